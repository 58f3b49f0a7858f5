//! Standing-wave families `u = e^{iωt} φ(x)` with
//! `−(1 + ∫φ′²) φ″ + ω φ − φ^{2r+1} = 0`.
//!
//! * solitary waves `φ = a sech^{1/r}(bx)` on the line,
//! * dnoidal waves `φ = a dn(bx, k)` on the 2π-torus (r = 1),
//! * dnoidal quotients `φ = a dn(bx, k) / √(1 − α sn²(bx, k))` on the torus (r = 2).

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::elliptic::EllipticModulus;
use crate::error::{domain, existence, Error, Result};
use crate::numerics::quad::integrate;
use crate::numerics::{find_root_bracketed, Grid, Topology};

pub const DEFAULT_LINE_NODES: usize = 1024;
pub const DEFAULT_TORUS_NODES: usize = 512;

/// Relative size of the solitary tail at the edge of the truncated line.
const TAIL: f64 = 1e-12;
/// Node count of the internal grid used by the r = 2 amplitude solve.
const AMPLITUDE_NODES: usize = 512;
const AMPLITUDE_BRACKET: (f64, f64) = (0.05, 10.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Solitary,
    #[serde(alias = "dn")]
    PeriodicDn,
    #[serde(alias = "dnq")]
    PeriodicDnQuotient,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Solitary, Family::PeriodicDn, Family::PeriodicDnQuotient];

    pub fn is_periodic(self) -> bool {
        !matches!(self, Family::Solitary)
    }

    pub fn topology(self) -> Topology {
        if self.is_periodic() {
            Topology::Torus
        } else {
            Topology::Line
        }
    }

    /// Short name used on the command line.
    pub fn short_name(self) -> &'static str {
        match self {
            Family::Solitary => "solitary",
            Family::PeriodicDn => "dn",
            Family::PeriodicDnQuotient => "dnq",
        }
    }

    /// The only exponent a periodic family is defined for.
    pub fn periodic_exponent(self) -> Option<u32> {
        match self {
            Family::Solitary => None,
            Family::PeriodicDn => Some(1),
            Family::PeriodicDnQuotient => Some(2),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "solitary" => Ok(Family::Solitary),
            "dn" | "periodic_dn" => Ok(Family::PeriodicDn),
            "dnq" | "periodic_dn_quotient" => Ok(Family::PeriodicDnQuotient),
            other => Err(Error::Usage(format!("unknown family `{other}` (expected solitary, dn or dnq)"))),
        }
    }
}

/// Which parameter selects the family member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    Omega(f64),
    K(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub family: Family,
    pub r: u32,
    pub omega: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    pub a: f64,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Kirchhoff constant `1 + ∫φ′²`.
    pub c: f64,
}

/// `(φ, φ′, φ″)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub phi: f64,
    pub dphi: f64,
    pub d2phi: f64,
}

impl WaveParams {
    /// ω for solitary waves, k for periodic ones.
    pub fn parameter(&self) -> f64 {
        self.k.unwrap_or(self.omega)
    }

    fn modulus(&self) -> EllipticModulus {
        EllipticModulus::new(self.k.expect("periodic wave without modulus")).expect("modulus validated at construction")
    }

    /// Closed-form evaluator, usable between grid nodes.
    pub fn evaluator(&self) -> Evaluator {
        Evaluator { params: *self, modulus: self.k.map(|_| self.modulus()) }
    }

    pub fn jet(&self, x: f64) -> Jet {
        self.evaluator().jet(x)
    }

    /// Truncation half-length for the line so that the tail is below `1e-12·max(1, φ(0))`.
    pub fn line_half_length(&self) -> f64 {
        let r = self.r as f64;
        r / self.b * (2.0 * self.a.max(1.0 / self.a) / TAIL).ln()
    }

    /// The grid every module uses unless told otherwise.
    pub fn default_grid(&self, n: Option<usize>) -> Result<Grid> {
        match self.family.topology() {
            Topology::Torus => Grid::torus(n.unwrap_or(DEFAULT_TORUS_NODES)),
            Topology::Line => Grid::line(n.unwrap_or(DEFAULT_LINE_NODES), self.line_half_length()),
        }
    }
}

/// Closed-form `φ, φ′, φ″` for a fixed parameter set.
#[derive(Debug, Clone, Copy)]
pub struct Evaluator {
    params: WaveParams,
    modulus: Option<EllipticModulus>,
}

impl Evaluator {
    pub fn jet(&self, x: f64) -> Jet {
        let WaveParams { a, b, .. } = self.params;
        match self.params.family {
            Family::Solitary => {
                let p = 1.0 / self.params.r as f64;
                let u = b * x;
                let s = 1.0 / u.cosh();
                let t = u.tanh();
                let sp = s.powf(p);
                Jet {
                    phi: a * sp,
                    dphi: -a * b * p * sp * t,
                    d2phi: a * p * b * b * sp * (p - (p + 1.0) * s * s),
                }
            }
            Family::PeriodicDn => {
                let m = self.modulus.expect("periodic wave without modulus");
                let k2 = m.k() * m.k();
                let j = m.jacobi(b * x);
                Jet {
                    phi: a * j.dn,
                    dphi: -a * b * k2 * j.sn * j.cn,
                    d2phi: a * b * b * ((2.0 - k2) * j.dn - 2.0 * j.dn.powi(3)),
                }
            }
            Family::PeriodicDnQuotient => {
                let m = self.modulus.expect("periodic wave without modulus");
                let k2 = m.k() * m.k();
                let alpha = self.params.alpha.expect("quotient wave without alpha");
                let (psi, dpsi, d2psi) = quotient_shape(m.jacobi(b * x), alpha, k2);
                Jet { phi: a * psi, dphi: a * b * dpsi, d2phi: a * b * b * d2psi }
            }
        }
    }
}

/// `ψ = dn/√D`, `D = 1 − α sn²`, and its first two derivatives in the elliptic argument.
fn quotient_shape(j: crate::elliptic::Jacobi, alpha: f64, k2: f64) -> (f64, f64, f64) {
    let s2 = j.sn * j.sn;
    let d = 1.0 - alpha * s2;
    let psi = j.dn / d.sqrt();
    let dpsi = (alpha - k2) * j.sn * j.cn * d.powf(-1.5);
    let d2psi = (alpha - k2) * j.dn * d.powf(-2.5) * ((1.0 - 2.0 * s2) * d + 3.0 * alpha * s2 * j.cn * j.cn);
    (psi, dpsi, d2psi)
}

// ---------------------------------------------------------------------------
// Solitary waves

/// `A(r) = ∫ sech^{2/r} tanh²` and `M(r) = ∫ sech^{2/r}` over ℝ.
pub fn shape_constants(r: u32) -> Result<(f64, f64)> {
    if r == 0 {
        return Err(domain("nonlinearity exponent r must be at least 1"));
    }
    let p = 2.0 / r as f64;
    // sech^p(x) ≤ 2^p e^{-p x} < 1e-18 beyond this point
    let cut = (p * 2f64.ln() + 18.0 * 10f64.ln()) / p;
    let sech_p = move |x: f64| (1.0 / x.cosh()).powf(p);
    let a = 2.0 * integrate(|x| sech_p(x) * x.tanh().powi(2), 0.0, cut, 1e-15, 1e-14)?;
    let m = 2.0 * integrate(sech_p, 0.0, cut, 1e-15, 1e-14)?;
    Ok((a, m))
}

/// Existence threshold: below it the cubic for `b` has a negative discriminant.
pub fn solitary_threshold(r: u32) -> Result<f64> {
    let (a_r, _) = shape_constants(r)?;
    Ok(threshold_from_constant(r, a_r))
}

fn threshold_from_constant(r: u32, a_r: f64) -> f64 {
    let rf = r as f64;
    let rhs = 4.0 * rf * rf / (27.0 * a_r * a_r) / (1.0 + rf).powf(2.0 / rf);
    rhs.powf(rf / (rf + 2.0))
}

/// `A q b³ + r² b² − r⁴ ω` with `q = ((1+r)ω)^{1/r}`; its positive root is the width.
fn width_residual(r: f64, omega: f64, a_r: f64, b: f64) -> f64 {
    let q = ((1.0 + r) * omega).powf(1.0 / r);
    a_r * q * b.powi(3) + r * r * b * b - r.powi(4) * omega
}

/// Closed form for the r = 1 width.
pub fn solitary_r1_width(omega: f64) -> Result<f64> {
    let disc = (12.0 * omega.powi(3) - 1.0) / omega;
    if !(disc >= 0.0) {
        return Err(existence(format!(
            "r = 1 solitary waves need ω > 12^(-1/3) ≈ 0.43679, got ω = {omega}"
        )));
    }
    let s = (24.0 * omega.powi(3) - 1.0 + 4.0 * 3f64.sqrt() * disc.sqrt() * omega * omega).cbrt();
    Ok((s + 1.0 / s - 1.0) / (4.0 * omega))
}

pub fn solve_solitary(r: u32, omega: f64) -> Result<WaveParams> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(domain(format!("frequency must be positive, got ω = {omega}")));
    }
    let (a_r, _) = shape_constants(r)?;
    let threshold = threshold_from_constant(r, a_r);
    if omega <= threshold {
        return Err(existence(format!(
            "solitary waves with r = {r} need ω > {threshold:.7}, got ω = {omega}"
        )));
    }
    let rf = r as f64;
    let b = if r == 1 {
        solitary_r1_width(omega)?
    } else {
        let hi = rf * omega.sqrt();
        let eps = 1e-12 * hi;
        find_root_bracketed(|b| width_residual(rf, omega, a_r, b), eps, hi - eps, 1e-15)
            .map_err(|e| existence(format!("no width root for r = {r}, ω = {omega}: {e}")))?
    };
    let a = rf * (a_r * b * (rf * rf * omega - b * b)).sqrt() / (a_r * b * b);
    let c = rf * rf * omega / (b * b);
    Ok(WaveParams { family: Family::Solitary, r, omega, k: None, a, b, alpha: None, c })
}

// ---------------------------------------------------------------------------
// Periodic waves

fn dn_denominator(m: &EllipticModulus) -> f64 {
    let k2 = m.k() * m.k();
    let kk = m.complete_k();
    8.0 * (1.0 - k2) * kk.powi(4) - 4.0 * (2.0 - k2) * m.complete_e() * kk.powi(3) + 3.0 * PI.powi(3)
}

/// The modulus where the r = 1 denominator changes sign (≈ 0.979653).
pub fn dn_critical_modulus() -> f64 {
    find_root_bracketed(|k| dn_denominator(&EllipticModulus::new(k).unwrap()), 0.9, 0.9999, 1e-14)
        .expect("denominator changes sign on [0.9, 0.9999]")
}

fn check_open_modulus(k: f64) -> Result<EllipticModulus> {
    if !(k.is_finite() && k > 0.0) {
        return Err(domain(format!("periodic waves need k ∈ (0, 1), got k = {k}")));
    }
    EllipticModulus::new(k)
}

pub fn solve_periodic_r1(k: f64) -> Result<WaveParams> {
    let m = check_open_modulus(k)?;
    let den = dn_denominator(&m);
    if !(den > 0.0) {
        return Err(domain(format!("dn waves need k < k* ≈ 0.979653, got k = {k}")));
    }
    let kk = m.complete_k();
    let a = (6.0 * PI).sqrt() * kk / den.sqrt();
    let b = kk / PI;
    let omega = 3.0 * (2.0 - k * k) * PI * kk * kk / den;
    let c = a * a / (2.0 * b * b);
    Ok(WaveParams { family: Family::PeriodicDn, r: 1, omega, k: Some(k), a, b, alpha: None, c })
}

pub fn quotient_alpha(k: f64) -> f64 {
    let k2 = k * k;
    -k2 + 1.0 - (k2 * k2 - k2 + 1.0).sqrt()
}

/// `ω / a⁴` for the quotient family.
fn quotient_omega_factor(k: f64, alpha: f64) -> f64 {
    let k2 = k * k;
    k2 * (alpha * k2 - k2 - alpha) / (alpha * alpha * (alpha - 2.0))
}

pub fn solve_periodic_r2(k: f64) -> Result<WaveParams> {
    let m = check_open_modulus(k)?;
    let alpha = quotient_alpha(k);
    let g = quotient_omega_factor(k, alpha);
    let b = m.complete_k() / PI;
    let grid = Grid::torus(AMPLITUDE_NODES)?;
    let k2 = k * k;
    let shapes: Vec<(f64, f64, f64)> =
        grid.nodes().iter().map(|&x| quotient_shape(m.jacobi(b * x), alpha, k2)).collect();
    let dpsi2: Vec<f64> = shapes.iter().map(|s| (b * s.1).powi(2)).collect();
    let j = grid.quadrature(&dpsi2)?;
    // ⟨−cφ″ + ωφ − φ⁵, φ⟩ / a² with c = 1 + a²J and ω = G a⁴
    let projection = |a: f64| {
        let c = 1.0 + a * a * j;
        let omega = g * a.powi(4);
        let res: Vec<f64> = shapes
            .iter()
            .map(|&(psi, _, d2psi)| (-c * b * b * d2psi + omega * psi - a.powi(4) * psi.powi(5)) * psi)
            .collect();
        grid.integrate_unchecked(&res)
    };
    let (lo, hi) = AMPLITUDE_BRACKET;
    let a = find_root_bracketed(projection, lo, hi, 1e-14)
        .map_err(|e| existence(format!("no amplitude root for the r = 2 quotient wave at k = {k}: {e}")))?;
    let omega = g * a.powi(4);
    if !(omega > 0.0) {
        return Err(existence(format!("non-positive frequency ω = {omega} at k = {k}")));
    }
    Ok(WaveParams {
        family: Family::PeriodicDnQuotient,
        r: 2,
        omega,
        k: Some(k),
        a,
        b,
        alpha: Some(alpha),
        c: 1.0 + a * a * j,
    })
}

/// Periodic member by modulus.
pub fn solve_periodic(family: Family, k: f64) -> Result<WaveParams> {
    match family {
        Family::PeriodicDn => solve_periodic_r1(k),
        Family::PeriodicDnQuotient => solve_periodic_r2(k),
        Family::Solitary => Err(Error::Usage("solitary waves are selected by ω, not k".into())),
    }
}

fn modulus_range(family: Family) -> (f64, f64) {
    match family {
        Family::PeriodicDn => (1e-6, dn_critical_modulus() - 1e-9),
        // the amplitude projection degenerates as k → 0 (ω → 1/4)
        _ => (0.05, 0.999),
    }
}

/// Invert the monotone map `k ↦ ω(k)` of a periodic family.
pub fn modulus_for_omega(family: Family, omega: f64) -> Result<f64> {
    let (lo, hi) = modulus_range(family);
    let w = |k: f64| solve_periodic(family, k).map(|p| p.omega);
    let (w_lo, w_hi) = (w(lo)?, w(hi)?);
    if !(omega > w_lo && omega < w_hi) {
        return Err(existence(format!(
            "{family} waves cover ω ∈ ({w_lo:.6}, {w_hi:.6}); ω = {omega} is outside"
        )));
    }
    find_root_bracketed(|k| w(k).map(|v| v - omega).unwrap_or(f64::NAN), lo, hi, 1e-14)
}

fn check_exponent(family: Family, r: u32) -> Result<()> {
    match family.periodic_exponent() {
        Some(e) if e != r => Err(Error::Usage(format!("family {family} is defined for r = {e} only, got r = {r}"))),
        _ if r == 0 => Err(Error::Usage("r must be at least 1".into())),
        _ => Ok(()),
    }
}

/// Family member selected by ω or k.
pub fn solve(family: Family, r: u32, at: Selector) -> Result<WaveParams> {
    check_exponent(family, r)?;
    match (family, at) {
        (Family::Solitary, Selector::Omega(w)) => solve_solitary(r, w),
        (Family::Solitary, Selector::K(_)) => Err(Error::Usage("solitary waves are selected by --omega".into())),
        (_, Selector::K(k)) => solve_periodic(family, k),
        (_, Selector::Omega(w)) => solve_periodic(family, modulus_for_omega(family, w)?),
    }
}

// ---------------------------------------------------------------------------
// Sampled profiles

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub params: WaveParams,
    pub grid: Grid,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub d2phi: Vec<f64>,
}

pub fn sample_profile(params: &WaveParams, grid: &Grid) -> Result<Profile> {
    if grid.topology() != params.family.topology() {
        return Err(Error::Usage(format!(
            "{} waves live on a {:?} grid, got {:?}",
            params.family,
            params.family.topology(),
            grid.topology()
        )));
    }
    if params.family.is_periodic() && grid.period().map_or(true, |p| (p - 2.0 * PI).abs() > 1e-12) {
        return Err(Error::Usage("periodic waves are sampled on the 2π torus".into()));
    }
    let ev = params.evaluator();
    let n = grid.n();
    let (mut phi, mut dphi, mut d2phi) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for &x in grid.nodes() {
        let j = ev.jet(x);
        phi.push(j.phi);
        dphi.push(j.dphi);
        d2phi.push(j.d2phi);
    }
    Ok(Profile { params: *params, grid: grid.clone(), phi, dphi, d2phi })
}

/// Solve and sample on the default grid (or `n` nodes).
pub fn build_profile(family: Family, r: u32, at: Selector, n: Option<usize>) -> Result<Profile> {
    let params = solve(family, r, at)?;
    sample_profile(&params, &params.default_grid(n)?)
}

impl Profile {
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    /// `1 + ∫φ′²` from the sampled derivative.
    pub fn kirchhoff_from_samples(&self) -> f64 {
        let sq: Vec<f64> = self.dphi.iter().map(|d| d * d).collect();
        1.0 + self.grid.integrate_unchecked(&sq)
    }

    /// Node-wise residual of the stationary equation with `c` recomputed on the grid.
    pub fn residual_samples(&self) -> Vec<f64> {
        let c = self.kirchhoff_from_samples();
        let w = self.params.omega;
        let p = 2 * self.params.r + 1;
        self.phi
            .iter()
            .zip(&self.d2phi)
            .map(|(&f, &f2)| -c * f2 + w * f - f.powi(p as i32))
            .collect()
    }

    /// Write `x, phi, dphi, d2phi` preceded by a `#`-prefixed JSON line with the parameters.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header = serde_json::to_string(&self.params).map_err(std::io::Error::other)?;
        writeln!(out, "# {header}")?;
        writeln!(out, "x,phi,dphi,d2phi")?;
        for i in 0..self.n() {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                self.grid.nodes()[i],
                self.phi[i],
                self.dphi[i],
                self.d2phi[i]
            )?;
        }
        Ok(())
    }
}

/// Sup-norm residual `|−(1+∫φ′²)φ″ + ωφ − φ^{2r+1}|`.
pub fn ode_residual(p: &Profile) -> f64 {
    p.residual_samples().iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Parse a CSV written by [`Profile::write_csv`] back into parameters and samples.
pub fn read_profile_csv(text: &str) -> Result<(WaveParams, Vec<[f64; 4]>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .and_then(|l| l.strip_prefix("# "))
        .ok_or_else(|| Error::Usage("profile CSV must start with a `# {json}` line".into()))?;
    let params: WaveParams =
        serde_json::from_str(header).map_err(|e| Error::Usage(format!("bad profile header: {e}")))?;
    lines.next();
    let mut rows = Vec::new();
    for line in lines {
        let mut row = [0.0; 4];
        let mut fields = line.split(',');
        for v in row.iter_mut() {
            *v = fields
                .next()
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| Error::Usage(format!("bad profile row `{line}`")))?;
        }
        rows.push(row);
    }
    Ok((params, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_constants_closed_forms() {
        let (a1, m1) = shape_constants(1).unwrap();
        let (a2, m2) = shape_constants(2).unwrap();
        assert!((a1 - 2.0 / 3.0).abs() < 1e-10);
        assert!((m1 - 2.0).abs() < 1e-10);
        assert!((a2 - PI / 2.0).abs() < 1e-10);
        assert!((m2 - PI).abs() < 1e-10);
        assert!(shape_constants(0).is_err());
    }

    #[test]
    fn thresholds() {
        assert!((solitary_threshold(1).unwrap() - 12f64.powf(-1.0 / 3.0)).abs() < 1e-12);
        assert!((solitary_threshold(2).unwrap() - 8.0 / (9.0 * PI)).abs() < 1e-10);
        assert!((solitary_threshold(4).unwrap() - 0.19594).abs() < 1e-4);
    }

    #[test]
    fn r1_closed_form_matches_cubic() {
        let b = solitary_r1_width(1.0).unwrap();
        let f = |b: f64| 4.0 / 3.0 * b.powi(3) + b * b - 1.0;
        let root = find_root_bracketed(f, 1e-12, 0.75f64.cbrt(), 1e-15).unwrap();
        assert!((b - root).abs() < 1e-10);
        let p = solve_solitary(1, 1.0).unwrap();
        assert!((p.a * p.a - 2.0).abs() < 1e-10);
        assert!((p.c - 1.0 / (b * b)).abs() < 1e-10);
    }

    #[test]
    fn solitary_existence() {
        assert!(matches!(solve_solitary(1, 0.4), Err(Error::Existence(_))));
        assert!(matches!(solve_solitary(2, 0.28), Err(Error::Existence(_))));
        assert!(solve_solitary(1, 0.44).is_ok());
        assert!(solve_solitary(2, 0.29).is_ok());
        assert!(matches!(solve_solitary(1, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn general_branch_agrees_with_r1_closed_form() {
        let (a_r, _) = shape_constants(1).unwrap();
        for w in [0.5f64, 1.0, 3.0] {
            let b = find_root_bracketed(|b| width_residual(1.0, w, a_r, b), 1e-12, w.sqrt(), 1e-15).unwrap();
            assert!((b - solitary_r1_width(w).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn solitary_monotone_in_omega() {
        let th = solitary_threshold(1).unwrap();
        let ps: Vec<WaveParams> = (1..=50).map(|i| solve_solitary(1, th + 0.05 * i as f64).unwrap()).collect();
        assert!(ps.windows(2).all(|w| w[1].a > w[0].a && w[1].b > w[0].b));
    }

    #[test]
    fn dn_family() {
        let p = solve_periodic_r1(0.5).unwrap();
        assert!((p.omega - 0.508).abs() < 1e-3);
        assert!(p.a > 0.5f64.sqrt() && p.omega > 0.5);
        let small = solve_periodic_r1(1e-6).unwrap();
        assert!((small.b - 0.5).abs() < 1e-9);
        assert!(solve_periodic_r1(0.98).is_err());
        assert!((dn_critical_modulus() - 0.979653).abs() < 1e-6);
    }

    #[test]
    fn quotient_family() {
        assert!((quotient_alpha(0.5) - (0.75 - 0.8125f64.sqrt())).abs() < 1e-15);
        for k in [0.1, 0.3, 0.5, 0.7, 0.9] {
            assert!(quotient_alpha(k) < 0.0);
        }
        let p = solve_periodic_r2(0.5).unwrap();
        assert!((p.omega - 0.2642).abs() < 1e-3, "ω = {}", p.omega);
    }

    #[test]
    fn quotient_amplitude_against_origin_balance() {
        // at x = 0 the equation reads −c b²(α − k²) a + ω a − a⁵ = 0 with c = 1 + a²J,
        // i.e. (G − 1) y² − sJ y − s = 0 in y = a², s = b²(α − k²)
        for k in [0.3, 0.5, 0.8] {
            let p = solve_periodic_r2(k).unwrap();
            let alpha = p.alpha.unwrap();
            let g = quotient_omega_factor(k, alpha);
            let j = (p.c - 1.0) / (p.a * p.a);
            let s = p.b * p.b * (alpha - k * k);
            let (qa, qb, qc) = (g - 1.0, -s * j, -s);
            let disc = (qb * qb - 4.0 * qa * qc).sqrt();
            let roots = [(-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa)];
            let y = roots.into_iter().filter(|&y| y > 0.0).fold(f64::NAN, f64::max);
            assert!((y.sqrt() - p.a).abs() < 1e-9, "k = {k}: {} vs {}", y.sqrt(), p.a);
        }
    }

    #[test]
    fn selectors() {
        assert!(matches!(solve(Family::PeriodicDn, 2, Selector::K(0.5)), Err(Error::Usage(_))));
        assert!(matches!(solve(Family::Solitary, 1, Selector::K(0.5)), Err(Error::Usage(_))));
        let p = solve(Family::PeriodicDn, 1, Selector::Omega(0.508004)).unwrap();
        assert!((p.k.unwrap() - 0.5).abs() < 1e-4);
        let q = solve(Family::PeriodicDnQuotient, 2, Selector::K(0.5)).unwrap();
        let back = modulus_for_omega(Family::PeriodicDnQuotient, q.omega).unwrap();
        assert!((back - 0.5).abs() < 1e-9);
        assert!("dnq".parse::<Family>().unwrap() == Family::PeriodicDnQuotient);
        assert!("cn".parse::<Family>().is_err());
    }

    #[test]
    fn profile_shapes() {
        let p = build_profile(Family::Solitary, 1, Selector::Omega(1.0), None).unwrap();
        let mid = p.n() / 2;
        // even node count: the origin sits between the two middle nodes
        let j = p.params.jet(0.0);
        assert!((j.phi - p.params.a).abs() < 1e-15 && j.dphi == 0.0);
        assert!((j.d2phi + p.params.a * p.params.b.powi(2)).abs() < 1e-12);
        assert!(p.phi[0] < 1e-12 * p.phi[mid]);
        assert!(p.phi.iter().all(|&v| v > 0.0));
        assert!(ode_residual(&p) < 1e-8);

        let q = build_profile(Family::PeriodicDn, 1, Selector::K(0.5), None).unwrap();
        assert!((q.phi[0] - q.params.a).abs() < 1e-15);
        let kc = (1.0f64 - 0.25).sqrt();
        assert!((q.phi[q.n() / 2] - q.params.a * kc).abs() < 1e-12);
        let end = q.params.jet(2.0 * PI);
        assert!((end.phi - q.phi[0]).abs() < 1e-10 && (end.dphi - q.dphi[0]).abs() < 1e-10);
    }

    #[test]
    fn residuals_for_all_families() {
        for (f, r, at) in [
            (Family::Solitary, 2, Selector::Omega(0.5)),
            (Family::Solitary, 4, Selector::Omega(0.3)),
            (Family::PeriodicDn, 1, Selector::K(0.5)),
            (Family::PeriodicDnQuotient, 2, Selector::K(0.5)),
        ] {
            let p = build_profile(f, r, at, None).unwrap();
            assert!(ode_residual(&p) < 1e-7, "{f} r={r}: {}", ode_residual(&p));
            let rel = (p.kirchhoff_from_samples() - p.params.c).abs() / p.params.c;
            assert!(rel < 1e-8, "{f}: c drift {rel:e}");
        }
        let q = build_profile(Family::PeriodicDnQuotient, 2, Selector::K(0.5), Some(1024)).unwrap();
        assert!(ode_residual(&q) < 1e-7);
    }

    #[test]
    fn residual_detects_perturbation() {
        let mut p = build_profile(Family::PeriodicDn, 1, Selector::K(0.5), None).unwrap();
        for (i, &x) in p.grid.nodes().to_vec().iter().enumerate() {
            p.phi[i] += 0.01 * x.cos();
            p.d2phi[i] -= 0.01 * x.cos();
            p.dphi[i] -= 0.01 * x.sin();
        }
        assert!(ode_residual(&p) >= 1e-3);
    }

    #[test]
    fn topology_mismatch() {
        let p = solve_periodic_r1(0.5).unwrap();
        let line = Grid::line(64, 10.0).unwrap();
        assert!(matches!(sample_profile(&p, &line), Err(Error::Usage(_))));
    }

    #[test]
    fn csv_round_trip() {
        let p = build_profile(Family::PeriodicDn, 1, Selector::K(0.3), Some(32)).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let (params, rows) = read_profile_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(params, p.params);
        assert_eq!(rows.len(), 32);
        assert_eq!(rows[5][1], p.phi[5]);
    }
}
