//! Dormand–Prince 5(4) integrator with PI step-size control.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between the 5th- and 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const MAX_STEPS: usize = 2_000_000;

/// Initial value problem `y' = f(t, y)`, `y(t0) = y0`, integrated up to `t1`.
pub struct IvpProblem<F> {
    pub rhs: F,
    pub y0: Vec<f64>,
    pub t_span: (f64, f64),
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl<F> IvpProblem<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    pub fn new(rhs: F, y0: Vec<f64>, t_span: (f64, f64)) -> Self {
        Self { rhs, y0, t_span, rel_tol: 1e-10, abs_tol: 1e-12 }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }
}

#[derive(Debug, Clone)]
pub struct IvpSolution {
    pub y_end: Vec<f64>,
    /// Accepted step points `(t, y)` including both ends, when requested.
    pub trajectory: Option<Vec<(f64, Vec<f64>)>>,
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrates the problem; `keep_trajectory` stores every accepted step.
pub fn integrate_ivp<F>(p: &mut IvpProblem<F>, keep_trajectory: bool) -> Result<IvpSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let (t0, t1) = p.t_span;
    if !(t1 > t0) {
        return Err(Error::Usage(format!("t_span must satisfy t1 > t0, got ({t0}, {t1})")));
    }
    for (name, tol) in [("rel_tol", p.rel_tol), ("abs_tol", p.abs_tol)] {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::Usage(format!("{name} must lie in (0, 1), got {tol}")));
        }
    }
    let m = p.y0.len();
    let f = &mut p.rhs;
    let (rtol, atol) = (p.rel_tol, p.abs_tol);

    let mut t = t0;
    let mut y = p.y0.clone();
    let mut k = vec![vec![0.0; m]; 7];
    let mut tmp = vec![0.0; m];
    let mut y_new = vec![0.0; m];
    f(t, &y, &mut k[0]);
    check_finite(&k[0], t)?;

    let mut h = initial_step(f, t, &y, &k[0], rtol, atol, t1 - t0);
    let mut err_old = 1e-4_f64;
    let mut trajectory = keep_trajectory.then(|| vec![(t, y.clone())]);
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let mut last_rejected = false;

    for _ in 0..MAX_STEPS {
        if t >= t1 {
            break;
        }
        if t + h > t1 {
            h = t1 - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::Stiffness { t, h });
        }

        stage(&y, h, &[(A21, 0)], &k, &mut tmp);
        f(t + C2 * h, &tmp, &mut k[1]);
        stage(&y, h, &[(A31, 0), (A32, 1)], &k, &mut tmp);
        f(t + C3 * h, &tmp, &mut k[2]);
        stage(&y, h, &[(A41, 0), (A42, 1), (A43, 2)], &k, &mut tmp);
        f(t + C4 * h, &tmp, &mut k[3]);
        stage(&y, h, &[(A51, 0), (A52, 1), (A53, 2), (A54, 3)], &k, &mut tmp);
        f(t + C5 * h, &tmp, &mut k[4]);
        stage(&y, h, &[(A61, 0), (A62, 1), (A63, 2), (A64, 3), (A65, 4)], &k, &mut tmp);
        f(t + h, &tmp, &mut k[5]);
        stage(&y, h, &[(A71, 0), (A73, 2), (A74, 3), (A75, 4), (A76, 5)], &k, &mut y_new);
        f(t + h, &y_new, &mut k[6]);

        // max-norm: stricter than RMS, keeps global drift near the requested tolerance
        let mut err = 0.0_f64;
        for i in 0..m {
            let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
            err = f64::max(err, (e / sc).abs());
        }
        if !err.is_finite() {
            h *= FAC_MIN;
            rejected += 1;
            last_rejected = true;
            continue;
        }

        if err <= 1.0 {
            let err_c = err.max(1e-10);
            let mut fac = SAFETY * err_c.powf(-(0.2 - 0.75 * BETA)) * err_old.powf(BETA);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if last_rejected {
                fac = fac.min(1.0);
            }
            err_old = err_c;
            t += h;
            std::mem::swap(&mut y, &mut y_new);
            let (first, rest) = k.split_at_mut(6);
            first[0].copy_from_slice(&rest[0]);
            if let Some(tr) = trajectory.as_mut() {
                tr.push((t, y.clone()));
            }
            accepted += 1;
            last_rejected = false;
            h *= fac;
        } else {
            let fac = (SAFETY * err.powf(-0.2)).max(FAC_MIN);
            h *= fac;
            rejected += 1;
            last_rejected = true;
        }
    }
    if t < t1 {
        return Err(Error::Numerical(format!("IVP step budget exhausted at t = {t}")));
    }
    check_finite(&y, t)?;
    Ok(IvpSolution { y_end: y, trajectory, accepted, rejected })
}

fn stage(y: &[f64], h: f64, coeffs: &[(f64, usize)], k: &[Vec<f64>], out: &mut [f64]) {
    for i in 0..y.len() {
        let mut s = 0.0;
        for &(a, j) in coeffs {
            s += a * k[j][i];
        }
        out[i] = y[i] + h * s;
    }
}

fn check_finite(v: &[f64], t: f64) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical(format!("non-finite state at t = {t}")))
    }
}

fn initial_step<F>(f: &mut F, t: f64, y: &[f64], f0: &[f64], rtol: f64, atol: f64, span: f64) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let m = y.len().max(1) as f64;
    let sc = |i: usize| atol + rtol * y[i].abs();
    let d0 = (y.iter().enumerate().map(|(i, v)| (v / sc(i)).powi(2)).sum::<f64>() / m).sqrt();
    let d1 = (f0.iter().enumerate().map(|(i, v)| (v / sc(i)).powi(2)).sum::<f64>() / m).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; y.len()];
    f(t + h0, &y1, &mut f1);
    let d2 = (f1
        .iter()
        .zip(f0)
        .enumerate()
        .map(|(i, (a, b))| ((a - b) / sc(i)).powi(2))
        .sum::<f64>()
        / m)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    #[test]
    fn exponential_growth() {
        let mut p = IvpProblem::new(|_t, y: &[f64], dy: &mut [f64]| dy[0] = y[0], vec![1.0], (0.0, 1.0))
            .with_tolerances(1e-12, 1e-14);
        let sol = integrate_ivp(&mut p, false).unwrap();
        assert!((sol.y_end[0] - E).abs() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator_period() {
        let mut p = IvpProblem::new(
            |_t, y: &[f64], dy: &mut [f64]| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            vec![1.0, 0.0],
            (0.0, 2.0 * PI),
        )
        .with_tolerances(1e-11, 1e-13);
        let sol = integrate_ivp(&mut p, false).unwrap();
        assert!((sol.y_end[0] - 1.0).abs() < 1e-8);
        assert!(sol.y_end[1].abs() < 1e-8);
    }

    #[test]
    fn oscillator_invariant_long_run() {
        let rel_tol = 1e-9;
        let mut p = IvpProblem::new(
            |_t, y: &[f64], dy: &mut [f64]| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            vec![1.0, 0.0],
            (0.0, 20.0 * PI),
        )
        .with_tolerances(rel_tol, 1e-12);
        let sol = integrate_ivp(&mut p, true).unwrap();
        for (_, y) in sol.trajectory.unwrap() {
            let inv = y[0] * y[0] + y[1] * y[1];
            assert!((inv - 1.0).abs() <= 10.0 * rel_tol, "invariant drift {}", inv - 1.0);
        }
    }

    #[test]
    fn rejects_bad_span_and_tolerances() {
        let mut p = IvpProblem::new(|_t, _y: &[f64], dy: &mut [f64]| dy[0] = 1.0, vec![0.0], (1.0, 1.0));
        assert!(matches!(integrate_ivp(&mut p, false), Err(Error::Usage(_))));
        let mut p = IvpProblem::new(|_t, _y: &[f64], dy: &mut [f64]| dy[0] = 1.0, vec![0.0], (0.0, 1.0))
            .with_tolerances(1.5, 1e-9);
        assert!(matches!(integrate_ivp(&mut p, false), Err(Error::Usage(_))));
    }

    #[test]
    fn finite_time_blowup_is_stiffness() {
        // y' = y², y(0) = 1 blows up at t = 1
        let mut p = IvpProblem::new(|_t, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0], vec![1.0], (0.0, 2.0));
        let err = integrate_ivp(&mut p, false).unwrap_err();
        assert!(matches!(err, Error::Stiffness { .. } | Error::Numerical(_)), "{err:?}");
    }
}
