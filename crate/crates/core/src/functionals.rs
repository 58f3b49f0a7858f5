//! Mass, energy, closed-form integrals of the profiles, the quadratic form of
//! `L_Re` and the Vakhitov–Kolokolov slope `d/dω ∫φ²`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::EllipticModulus;
use crate::error::{check_len, domain, Error, Result};
use crate::numerics::{fd, Grid, SpectralOps, Topology};
use crate::waves::{self, shape_constants, Family, Profile, Selector, WaveParams};

pub const DEFAULT_STEP: f64 = 1e-4;
/// Relative disagreement between step and step/2 above which a slope is flagged.
pub const RICHARDSON_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedPair {
    pub energy: f64,
    pub mass: f64,
}

/// `∂ₓu` of a grid state: spectral on the torus, fourth-order differences on the line.
pub fn state_derivative(u: &[Complex64], grid: &Grid) -> Result<Vec<Complex64>> {
    check_len(grid.n(), u.len())?;
    match grid.topology() {
        Topology::Torus => {
            let ops = SpectralOps::new(grid.n(), grid.period().expect("torus"))?;
            Ok(ops.derivative(u, 1))
        }
        Topology::Line => {
            let re: Vec<f64> = u.iter().map(|z| z.re).collect();
            let im: Vec<f64> = u.iter().map(|z| z.im).collect();
            let h = grid.spacing();
            Ok(fd::first_derivative(&re, h)
                .into_iter()
                .zip(fd::first_derivative(&im, h))
                .map(|(a, b)| Complex64::new(a, b))
                .collect())
        }
    }
}

/// `F(u) = ½∫|u|²`.
pub fn mass(u: &[Complex64], grid: &Grid) -> Result<f64> {
    let sq: Vec<f64> = u.iter().map(|z| z.norm_sqr()).collect();
    Ok(0.5 * grid.quadrature(&sq)?)
}

fn energy_from_parts(grad2: f64, potential: f64, r: u32) -> f64 {
    0.5 * grad2 + 0.25 * grad2 * grad2 - potential / (2 * r + 2) as f64
}

/// `E(u) = ½∫|u_x|² + ¼(∫|u_x|²)² − (1/(2r+2))∫|u|^{2r+2}`, the invariant of the flow.
pub fn energy(u: &[Complex64], grid: &Grid, r: u32) -> Result<f64> {
    let du = state_derivative(u, grid)?;
    let g: Vec<f64> = du.iter().map(|z| z.norm_sqr()).collect();
    let p: Vec<f64> = u.iter().map(|z| z.norm_sqr().powi(r as i32 + 1)).collect();
    Ok(energy_from_parts(grid.quadrature(&g)?, grid.quadrature(&p)?, r))
}

pub fn conserved(u: &[Complex64], grid: &Grid, r: u32) -> Result<ConservedPair> {
    Ok(ConservedPair { energy: energy(u, grid, r)?, mass: mass(u, grid)? })
}

/// Mass and energy of a profile, using its stored analytic derivative.
pub fn profile_conserved(p: &Profile) -> ConservedPair {
    let r = p.params.r;
    let g = p.grid.integrate_unchecked(&p.dphi.iter().map(|d| d * d).collect::<Vec<_>>());
    let pot = p.grid.integrate_unchecked(&p.phi.iter().map(|f| f.powi(2 * r as i32 + 2)).collect::<Vec<_>>());
    let m = p.grid.integrate_unchecked(&p.phi.iter().map(|f| f * f).collect::<Vec<_>>());
    ConservedPair { energy: energy_from_parts(g, pot, r), mass: 0.5 * m }
}

pub fn profile_state(p: &Profile) -> Vec<Complex64> {
    p.phi.iter().map(|&f| Complex64::new(f, 0.0)).collect()
}

/// `∫φ²` from the closed forms of each family.
pub fn mass_closed_form(params: &WaveParams) -> Result<f64> {
    let WaveParams { a, b, .. } = *params;
    match params.family {
        Family::Solitary => {
            let (_, m) = shape_constants(params.r)?;
            Ok(a * a / b * m)
        }
        Family::PeriodicDn => {
            let m = EllipticModulus::new(params.k.ok_or_else(|| domain("dn wave without modulus"))?)?;
            Ok(2.0 * PI * a * a * m.complete_e() / m.complete_k())
        }
        Family::PeriodicDnQuotient => {
            let k = params.k.ok_or_else(|| domain("quotient wave without modulus"))?;
            let alpha = params.alpha.ok_or_else(|| domain("quotient wave without alpha"))?;
            let m = EllipticModulus::new(k)?;
            let (kk, pi3) = (m.complete_k(), m.complete_pi(alpha)?);
            let k2 = k * k;
            Ok(2.0 * PI * a * a * (k2 * kk - k2 * pi3 + alpha * pi3) / (alpha * kk))
        }
    }
}

/// `∫φ²` by quadrature of the samples.
pub fn mass_quadrature(p: &Profile) -> f64 {
    p.grid.integrate_unchecked(&p.phi.iter().map(|f| f * f).collect::<Vec<_>>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauValues {
    /// `∫φ′²`
    pub tau1: f64,
    /// `∫φ⁴`
    pub tau2: f64,
    /// `−2τ₂ + 2τ₁²`
    pub tau: f64,
}

/// Closed forms of `∫φ′²`, `∫φ⁴` for the dn wave with modulus `k`.
pub fn closed_form_tau(k: f64) -> Result<TauValues> {
    let params = waves::solve_periodic_r1(k)?;
    let m = EllipticModulus::new(params.k.unwrap())?;
    let (kk, ee) = (m.complete_k(), m.complete_e());
    let k2 = k * k;
    let den = 8.0 * (1.0 - k2) * kk.powi(4) - 4.0 * (2.0 - k2) * ee * kk.powi(3) + 3.0 * PI.powi(3);
    let tau1 = (-8.0 * (1.0 - k2) * kk.powi(4) + 4.0 * (2.0 - k2) * ee * kk.powi(3)) / den;
    let tau2 = 24.0 * PI.powi(3) * kk.powi(3) * (2.0 * (2.0 - k2) * ee - (1.0 - k2) * kk) / (den * den);
    Ok(TauValues { tau1, tau2, tau: -2.0 * tau2 + 2.0 * tau1 * tau1 })
}

fn real_derivatives(values: &[f64], grid: &Grid) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len(grid.n(), values.len())?;
    match grid.topology() {
        Topology::Torus => {
            let ops = SpectralOps::new(grid.n(), grid.period().expect("torus"))?;
            Ok((ops.derivative_real(values, 1), ops.derivative_real(values, 2)))
        }
        Topology::Line => {
            let h = grid.spacing();
            Ok((fd::first_derivative(values, h), fd::second_derivative(values, h)))
        }
    }
}

/// `(L₁P, P) + 2(φ′, P′)²` with `L₁ = −c∂ₓ² + ω − (2r+1)φ^{2r}`.
pub fn quadratic_form_lre(p: &Profile, perturbation: &[f64]) -> Result<f64> {
    let (dp, d2p) = real_derivatives(perturbation, &p.grid)?;
    let WaveParams { omega, c, r, .. } = p.params;
    let l1p: Vec<f64> = perturbation
        .iter()
        .zip(&d2p)
        .zip(&p.phi)
        .map(|((&v, &v2), &f)| -c * v2 + (omega - (2 * r + 1) as f64 * f.powi(2 * r as i32)) * v)
        .collect();
    let coupling = p.grid.inner(&p.dphi, &dp)?;
    Ok(p.grid.inner(&l1p, perturbation)? + 2.0 * coupling * coupling)
}

/// `(L_Re φ, φ) = −2r∫φ^{2r+2} + 2(∫φ′²)²`: τ for r = 1, γ for r = 2.
pub fn lre_profile_value(p: &Profile) -> f64 {
    let r = p.params.r;
    let tau1 = p.kirchhoff_from_samples() - 1.0;
    let pot = p.grid.integrate_unchecked(&p.phi.iter().map(|f| f.powi(2 * r as i32 + 2)).collect::<Vec<_>>());
    -2.0 * r as f64 * pot + 2.0 * tau1 * tau1
}

/// `γ(k) = −4∫φ⁶ + 2(∫φ′²)²` for the r = 2 quotient wave.
pub fn gamma(k: f64) -> Result<f64> {
    let params = waves::solve_periodic_r2(k)?;
    let p = waves::sample_profile(&params, &params.default_grid(None)?)?;
    Ok(lre_profile_value(&p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeMethod {
    FiniteDifference,
    ChainRuleK,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VkSlopeResult {
    pub family: Family,
    pub r: u32,
    /// ω (solitary) or k (periodic).
    pub parameter: f64,
    pub omega: f64,
    /// `d/dω ∫φ²`
    pub slope: f64,
    /// `−slope / 2`
    pub index_i: f64,
    pub method: SlopeMethod,
    /// Absolute step in the differentiation variable.
    pub step: f64,
    /// `|slope(h) − slope(h/2)|`
    pub richardson_error: f64,
    /// Richardson disagreement above 1%.
    pub flagged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domega_dk: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dmass_dk: Option<f64>,
}

impl VkSlopeResult {
    pub fn sign(&self) -> f64 {
        self.slope.signum()
    }

    /// Slope too small compared with its own discretization error to trust its sign.
    pub fn is_degenerate(&self) -> bool {
        self.slope.abs() < 10.0 * self.richardson_error
    }
}

fn central<F: FnMut(f64) -> Result<f64>>(mut f: F, x: f64, h: f64) -> Result<f64> {
    Ok((f(x + h)? - f(x - h)?) / (2.0 * h))
}

fn richardson(coarse: f64, fine: f64) -> (f64, f64, bool) {
    let err = (coarse - fine).abs();
    let flagged = err > RICHARDSON_TOL * fine.abs();
    ((4.0 * fine - coarse) / 3.0, err, flagged)
}

fn step_error(e: Error, what: &str) -> Error {
    match e {
        Error::Existence(m) | Error::Domain(m) => domain(format!("step straddles the {what} boundary: {m}")),
        other => other,
    }
}

/// VK slope by central differences (`step` is relative to the parameter) with a Richardson check.
pub fn vk_slope(family: Family, r: u32, at: Selector, step: f64) -> Result<VkSlopeResult> {
    if !(step.is_finite() && step > 0.0 && step < 0.1) {
        return Err(Error::Usage(format!("relative step must lie in (0, 0.1), got {step}")));
    }
    let base = waves::solve(family, r, at)?;
    if family == Family::Solitary {
        let w = base.omega;
        let h = step * w;
        let mass_at = |w: f64| {
            waves::solve_solitary(r, w).and_then(|p| mass_closed_form(&p)).map_err(|e| step_error(e, "existence"))
        };
        let coarse = central(mass_at, w, h)?;
        let fine = central(mass_at, w, 0.5 * h)?;
        let (slope, err, flagged) = richardson(coarse, fine);
        Ok(VkSlopeResult {
            family,
            r,
            parameter: w,
            omega: w,
            slope,
            index_i: -0.5 * slope,
            method: SlopeMethod::FiniteDifference,
            step: h,
            richardson_error: err,
            flagged,
            domega_dk: None,
            dmass_dk: None,
        })
    } else {
        let k = base.k.expect("periodic wave carries k");
        let h = step * k;
        let at_k = |k: f64| waves::solve_periodic(family, k).map_err(|e| step_error(e, "modulus"));
        let mass_k = |k: f64| at_k(k).and_then(|p| mass_closed_form(&p));
        let omega_k = |k: f64| at_k(k).map(|p| p.omega);
        let dm = [central(mass_k, k, h)?, central(mass_k, k, 0.5 * h)?];
        let dw = [central(omega_k, k, h)?, central(omega_k, k, 0.5 * h)?];
        let (slope, err, flagged) = richardson(dm[0] / dw[0], dm[1] / dw[1]);
        Ok(VkSlopeResult {
            family,
            r,
            parameter: k,
            omega: base.omega,
            slope,
            index_i: -0.5 * slope,
            method: SlopeMethod::ChainRuleK,
            step: h,
            richardson_error: err,
            flagged,
            domega_dk: Some(richardson(dw[0], dw[1]).0),
            dmass_dk: Some(richardson(dm[0], dm[1]).0),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: f64,
    pub mass: f64,
    pub slope: f64,
    /// `ok`, `richardson` (flagged) or `failed`.
    pub flag: &'static str,
}

/// Mass and slope over a parameter grid (ω for solitary waves, k otherwise).
pub fn sweep(family: Family, r: u32, parameters: &[f64], step: f64) -> Vec<SweepRow> {
    parameters
        .iter()
        .map(|&x| {
            let at = if family.is_periodic() { Selector::K(x) } else { Selector::Omega(x) };
            let mass = waves::solve(family, r, at).and_then(|p| mass_closed_form(&p));
            let slope = vk_slope(family, r, at, step);
            match (mass, slope) {
                (Ok(m), Ok(s)) => SweepRow {
                    parameter: x,
                    mass: m,
                    slope: s.slope,
                    flag: if s.flagged { "richardson" } else { "ok" },
                },
                _ => SweepRow { parameter: x, mass: f64::NAN, slope: f64::NAN, flag: "failed" },
            }
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "parameter,mass,slope,flag")?;
    for row in rows {
        writeln!(out, "{:.12e},{:.12e},{:.12e},{}", row.parameter, row.mass, row.slope, row.flag)?;
    }
    Ok(())
}
