use num_complex::Complex64;
use proptest::prelude::*;

use skwaves_core::evolution::{self, EvolutionState};
use skwaves_core::functionals;
use skwaves_core::numerics::{Grid, SpectralOps};
use skwaves_core::report::{classify, Evidence, SlopeSign, Stage, StageFailure, Verdict};
use skwaves_core::waves::{self, Family, Selector};

fn evidence() -> impl Strategy<Value = Evidence> {
    (
        prop::option::of(0usize..4),
        prop::option::of(0usize..4),
        prop::option::of(0usize..3),
        prop::option::of(0usize..3),
        prop::option::of(any::<bool>()),
        prop::option::of(prop_oneof![-10.0..10.0f64, Just(0.0), Just(f64::NAN)]),
        prop::option::of(prop_oneof![0.0..1.0f64, Just(f64::INFINITY)]),
        any::<bool>(),
    )
        .prop_map(|(n_neg, z_kernel, even_n_neg, even_z_kernel, confirmed, slope, richardson_error, failed)| Evidence {
            n_neg,
            z_kernel,
            even_n_neg,
            even_z_kernel,
            confirmed,
            slope,
            richardson_error,
            theta: None,
            failure: failed.then(|| StageFailure { stage: Stage::Spectrum, message: "corrupted".into(), code: 4 }),
        })
}

proptest! {
    #[test]
    fn verdict_rule_integrity(e in evidence()) {
        let (v, _) = classify(&e);
        prop_assert_eq!(classify(&e).0, v);
        let sign = e.slope.zip(e.richardson_error).map(|(s, r)| SlopeSign::classify(s, r));
        match v {
            Verdict::StableH1 => {
                prop_assert_eq!(sign, Some(SlopeSign::Positive));
                prop_assert_eq!(e.n_neg, Some(1));
                prop_assert_eq!(e.z_kernel, Some(2));
                prop_assert!(e.failure.is_none() && e.confirmed == Some(true));
            }
            Verdict::UnstableEvenSubspace => {
                prop_assert_eq!(sign, Some(SlopeSign::Negative));
                prop_assert_eq!((e.even_n_neg, e.even_z_kernel), (Some(1), Some(1)));
                prop_assert!(e.failure.is_none() && e.confirmed == Some(true));
            }
            Verdict::Inconclusive => {}
        }
    }
}

fn dn_phi() -> (Grid, Vec<Complex64>) {
    let p = waves::build_profile(Family::PeriodicDn, 1, Selector::K(0.7), Some(128)).unwrap();
    (p.grid.clone(), functionals::profile_state(&p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn orbital_distance_invariance(theta in -3.0..3.0f64, shift in 0usize..128, q in -0.05..0.05f64) {
        let (grid, phi) = dn_phi();
        let ops = SpectralOps::new(grid.n(), grid.period().unwrap()).unwrap();
        let u: Vec<Complex64> = phi.iter().zip(grid.nodes())
            .map(|(f, &x)| f + Complex64::new(q * (2.0 * x).cos(), q * x.sin()))
            .collect();
        let d0 = evolution::orbital_distance(&ops, &u, &phi).unwrap().distance;
        let n = u.len();
        let moved: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(1.0, theta) * u[(j + n - shift) % n]).collect();
        let d1 = evolution::orbital_distance(&ops, &moved, &phi).unwrap().distance;
        prop_assert!((d0 - d1).abs() < 1e-12, "{} vs {}", d0, d1);
        prop_assert!(d0 <= evolution::h1_norm(&ops, &u.iter().zip(&phi).map(|(a, b)| a - b).collect::<Vec<_>>()) + 1e-14);
    }

    #[test]
    fn step_preserves_mass(seed in any::<u64>(), r in prop::sample::select(vec![1u32, 2, 4]), dt in 1e-4..1e-2f64) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let grid = Grid::torus(64).unwrap();
        let modes: Vec<(f64, f64)> = (0..6).map(|_| (rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3))).collect();
        let u: Vec<Complex64> = grid.nodes().iter().map(|&x| {
            modes.iter().enumerate().map(|(m, &(a, b))| Complex64::new(a, b) * Complex64::from_polar(1.0, m as f64 * x)).sum()
        }).collect();
        let mut s = EvolutionState::new(u, &grid, r).unwrap();
        let m0 = s.mass();
        for _ in 0..10 {
            s.step(dt);
        }
        prop_assert!((s.mass() - m0).abs() <= 1e-13 * m0.max(1e-300) * 10.0);
    }

    #[test]
    fn kirchhoff_at_least_one(amp in 0.0..2.0f64, m in 0i32..8) {
        let grid = Grid::torus(32).unwrap();
        let u: Vec<Complex64> = grid.nodes().iter().map(|&x| Complex64::from_polar(amp, m as f64 * x)).collect();
        let s = EvolutionState::new(u, &grid, 1).unwrap();
        let c = s.kirchhoff_coefficient();
        prop_assert!(c >= 1.0);
        prop_assert!((c - 1.0 - 2.0 * std::f64::consts::PI * (m * m) as f64 * amp * amp).abs() < 1e-9 * c);
    }

    #[test]
    fn solitary_profiles_solve_the_ode(omega in 0.5..3.0f64, r in prop::sample::select(vec![1u32, 2, 4])) {
        let p = waves::build_profile(Family::Solitary, r, Selector::Omega(omega), None).unwrap();
        let res = p.residual_samples();
        let scale = p.params.omega * p.params.a;
        prop_assert!(res.iter().all(|v| v.abs() < 1e-10 * scale.max(1.0)));
    }
}
