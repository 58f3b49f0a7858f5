//! Discretized linearization around a standing wave:
//! `L₁ = −c∂ₓ² + ω − (2r+1)φ^{2r}`, `L_Im = −c∂ₓ² + ω − φ^{2r}` and
//! `L_Re = L₁ − 2(φ′, ∂ₓ·)φ″`, with eigenvalue counts, the Floquet constant θ
//! and the `L_Re η = φ` identity.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::functionals;
use crate::numerics::eigen::dot;
use crate::numerics::fourier::fourier_d2_matrix;
use crate::numerics::{fd, integrate_ivp, symmetric_eigen, symmetric_eigenvalues, IvpProblem, SquareMatrix, Topology};
use crate::waves::{self, Family, Profile, Selector, WaveParams};

/// Default kernel tolerance relative to `‖M‖_∞` on the line.
pub const LINE_KERNEL_TOL: f64 = 1e-6;
/// Default kernel tolerance relative to `‖M‖_∞` on the torus; `‖M‖` grows like `n²`
/// there, so the line value would swallow genuinely positive eigenvalues.
pub const TORUS_KERNEL_TOL: f64 = 1e-8;
pub const THETA_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    #[serde(rename = "L_Re")]
    LRe,
    #[serde(rename = "L_Im")]
    LIm,
    #[serde(rename = "L1")]
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subspace {
    Full,
    Even,
    Odd,
}

/// Matrix of one operator acting on nodal values (line: interior nodes only).
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub kind: OperatorKind,
    pub matrix: SquareMatrix,
    pub topology: Topology,
    pub c: f64,
    pub r: u32,
    pub omega: f64,
}

impl OperatorMatrix {
    /// Grid indices of the unknowns.
    pub fn unknowns(&self) -> std::ops::Range<usize> {
        match self.topology {
            Topology::Torus => 0..self.matrix.n(),
            Topology::Line => 1..self.matrix.n() + 1,
        }
    }

    /// Default kernel tolerance (absolute) for this operator.
    pub fn default_tol(&self) -> f64 {
        default_relative_tol(self.topology) * self.matrix.norm_inf()
    }
}

pub fn default_relative_tol(topology: Topology) -> f64 {
    match topology {
        Topology::Torus => TORUS_KERNEL_TOL,
        Topology::Line => LINE_KERNEL_TOL,
    }
}

fn potential(kind: OperatorKind, params: &WaveParams, phi: f64) -> f64 {
    let r = params.r as i32;
    let coef = match kind {
        OperatorKind::LIm => 1.0,
        _ => (2 * r + 1) as f64,
    };
    params.omega - coef * phi.powi(2 * r)
}

/// Assemble `kind` around the profile. Torus grids use the exact Fourier
/// second-derivative matrix; line grids fourth-order differences with zero
/// values beyond the interior.
pub fn assemble(kind: OperatorKind, p: &Profile) -> Result<OperatorMatrix> {
    let params = &p.params;
    let c = params.c;
    let (mut m, range) = match p.grid.topology() {
        Topology::Torus => {
            let n = p.n();
            (fourier_d2_matrix(n, p.grid.period().expect("torus")), 0..n)
        }
        Topology::Line => {
            let n = p.n();
            (fd::second_derivative_matrix(n - 2, p.grid.spacing()), 1..n - 1)
        }
    };
    let idx: Vec<usize> = range.collect();
    for (i, &g) in idx.iter().enumerate() {
        let row = m.row_mut(i);
        row.iter_mut().for_each(|v| *v *= -c);
        row[i] += potential(kind, params, p.phi[g]);
    }
    if kind == OperatorKind::LRe {
        // −2(φ′, P′)φ″ = 2(φ″, P)φ″ after integrating by parts
        let u: Vec<f64> = idx.iter().map(|&g| p.d2phi[g]).collect();
        let wu: Vec<f64> = idx.iter().map(|&g| p.d2phi[g] * p.grid.weights()[g]).collect();
        m.add_rank_one(2.0, &u, &wu);
    }
    let norm = m.norm_inf();
    if m.asymmetry() > 1e-10 * norm {
        return Err(Error::Numerical(format!("{kind:?} assembled with asymmetry {:e}", m.asymmetry())));
    }
    m.symmetrize();
    Ok(OperatorMatrix { kind, matrix: m, topology: p.grid.topology(), c, r: params.r, omega: params.omega })
}

/// The unsymmetrized operator applied node-wise:
/// `−cP″ − 2(φ′,P′)φ″ + V P` with spectral (torus) or fourth-order (line) derivatives.
pub fn apply_direct(kind: OperatorKind, p: &Profile, v: &[f64]) -> Result<Vec<f64>> {
    crate::error::check_len(p.n(), v.len())?;
    let (dv, d2v) = match p.grid.topology() {
        Topology::Torus => {
            let ops = crate::numerics::SpectralOps::new(p.n(), p.grid.period().expect("torus"))?;
            (ops.derivative_real(v, 1), ops.derivative_real(v, 2))
        }
        Topology::Line => (fd::first_derivative(v, p.grid.spacing()), fd::second_derivative(v, p.grid.spacing())),
    };
    let coupling = if kind == OperatorKind::LRe { p.grid.inner(&p.dphi, &dv)? } else { 0.0 };
    Ok((0..p.n())
        .map(|i| -p.params.c * d2v[i] - 2.0 * coupling * p.d2phi[i] + potential(kind, &p.params, p.phi[i]) * v[i])
        .collect())
}

/// Reflection-adapted orthonormal basis, as sparse columns `(index, coefficient)`.
fn parity_basis(topology: Topology, m: usize, parity: Subspace) -> Vec<Vec<(usize, f64)>> {
    let mirror = |i: usize| match topology {
        Topology::Torus => (m - i) % m,
        Topology::Line => m - 1 - i,
    };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut cols = Vec::new();
    for i in 0..m {
        let j = mirror(i);
        match (i.cmp(&j), parity) {
            (std::cmp::Ordering::Equal, Subspace::Even) => cols.push(vec![(i, 1.0)]),
            (std::cmp::Ordering::Less, Subspace::Even) => cols.push(vec![(i, s), (j, s)]),
            (std::cmp::Ordering::Less, Subspace::Odd) => cols.push(vec![(i, s), (j, -s)]),
            _ => {}
        }
    }
    cols
}

fn reduce(m: &SquareMatrix, basis: &[Vec<(usize, f64)>]) -> SquareMatrix {
    SquareMatrix::from_fn(basis.len(), |a, b| {
        let mut v = 0.0;
        for &(i, ci) in &basis[a] {
            for &(j, cj) in &basis[b] {
                v += ci * cj * m[(i, j)];
            }
        }
        v
    })
}

/// Eigenvalues restricted to the even or odd subspace (operators around an even profile commute
/// with the reflection, so the full spectrum is the union of both).
pub fn subspace_eigenvalues(op: &OperatorMatrix, parity: Subspace) -> Result<Vec<f64>> {
    match parity {
        Subspace::Full => {
            let mut v = subspace_eigenvalues(op, Subspace::Even)?;
            v.extend(subspace_eigenvalues(op, Subspace::Odd)?);
            v.sort_by(f64::total_cmp);
            Ok(v)
        }
        _ => {
            let basis = parity_basis(op.topology, op.matrix.n(), parity);
            symmetric_eigenvalues(&reduce(&op.matrix, &basis))
        }
    }
}

/// Lowest eigenpair of the even block, expanded to grid values.
pub fn lowest_even_eigenpair(op: &OperatorMatrix, grid_n: usize) -> Result<(f64, Vec<f64>)> {
    let basis = parity_basis(op.topology, op.matrix.n(), Subspace::Even);
    let eig = symmetric_eigen(&reduce(&op.matrix, &basis))?;
    let y = eig.vector(0);
    let offset = op.unknowns().start;
    let mut v = vec![0.0; grid_n];
    for (col, &ya) in basis.iter().zip(y) {
        for &(i, ci) in col {
            v[i + offset] += ci * ya;
        }
    }
    Ok((eig.values[0], v))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub kind: OperatorKind,
    pub subspace: Subspace,
    pub n_neg: usize,
    pub z_kernel: usize,
    pub lowest: Vec<f64>,
    /// `ω/c`, line topology only.
    pub ess_edge: Option<f64>,
    /// Eigenvalues strictly below `ess_edge` (discrete spectrum); everything above is
    /// an artifact of the truncated line.
    pub n_discrete: Option<usize>,
    /// Absolute tolerance used for the counts.
    pub tol_kernel: f64,
    pub norm: f64,
}

fn summarize(op: &OperatorMatrix, values: &[f64], subspace: Subspace, tol: f64) -> SpectrumSummary {
    let n_neg = values.iter().filter(|&&v| v < -tol).count();
    let z_kernel = values.iter().filter(|&&v| v.abs() <= tol).count();
    let ess_edge = (op.topology == Topology::Line).then(|| op.omega / op.c);
    SpectrumSummary {
        kind: op.kind,
        subspace,
        n_neg,
        z_kernel,
        lowest: values.iter().take(5).copied().collect(),
        ess_edge,
        n_discrete: ess_edge.map(|e| values.iter().filter(|&&v| v < e).count()),
        tol_kernel: tol,
        norm: op.matrix.norm_inf(),
    }
}

/// Counts with `tol_rel · ‖M‖_∞` (the topology default when `None`).
pub fn spectrum(op: &OperatorMatrix, tol_rel: Option<f64>, subspace: Subspace) -> Result<SpectrumSummary> {
    let tol = tol_rel.unwrap_or_else(|| default_relative_tol(op.topology)) * op.matrix.norm_inf();
    let values = subspace_eigenvalues(op, subspace)?;
    Ok(summarize(op, &values, subspace, tol))
}

/// Full and even-subspace summaries from one pair of block solves.
pub fn spectrum_split(op: &OperatorMatrix, tol_rel: Option<f64>) -> Result<(SpectrumSummary, SpectrumSummary)> {
    let tol = tol_rel.unwrap_or_else(|| default_relative_tol(op.topology)) * op.matrix.norm_inf();
    let even = subspace_eigenvalues(op, Subspace::Even)?;
    let mut all = even.clone();
    all.extend(subspace_eigenvalues(op, Subspace::Odd)?);
    all.sort_by(f64::total_cmp);
    Ok((summarize(op, &all, Subspace::Full, tol), summarize(op, &even, Subspace::Even, tol)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub n_neg: usize,
    pub z_kernel: usize,
}

impl Counts {
    fn of(s: &SpectrumSummary) -> Self {
        Counts { n_neg: s.n_neg, z_kernel: s.z_kernel }
    }

    fn plus(self, o: Counts) -> Counts {
        Counts { n_neg: self.n_neg + o.n_neg, z_kernel: self.z_kernel + o.z_kernel }
    }
}

/// Spectral data of `𝓛 = diag(L_Re, L_Im)` at one resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpectrum {
    pub n: usize,
    pub l_re: SpectrumSummary,
    pub l_im: SpectrumSummary,
    pub block: Counts,
    /// Counts restricted to even functions (translation mode removed).
    pub even_l_re: SpectrumSummary,
    pub even_l_im: SpectrumSummary,
    pub even_block: Counts,
}

pub fn block_spectrum(p: &Profile, tol_rel: Option<f64>) -> Result<BlockSpectrum> {
    let (l_re, even_l_re) = spectrum_split(&assemble(OperatorKind::LRe, p)?, tol_rel)?;
    let (l_im, even_l_im) = spectrum_split(&assemble(OperatorKind::LIm, p)?, tol_rel)?;
    Ok(BlockSpectrum {
        n: p.n(),
        block: Counts::of(&l_re).plus(Counts::of(&l_im)),
        even_block: Counts::of(&even_l_re).plus(Counts::of(&even_l_im)),
        l_re,
        l_im,
        even_l_re,
        even_l_im,
    })
}

/// Block spectrum at `n` and `2n`; `confirmed` when every count agrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfirmedSpectrum {
    pub base: BlockSpectrum,
    pub doubled: BlockSpectrum,
    pub confirmed: bool,
}

impl ConfirmedSpectrum {
    pub fn counts_match(a: &BlockSpectrum, b: &BlockSpectrum) -> bool {
        let pairs = [
            (&a.l_re, &b.l_re),
            (&a.l_im, &b.l_im),
            (&a.even_l_re, &b.even_l_re),
            (&a.even_l_im, &b.even_l_im),
        ];
        pairs.iter().all(|(x, y)| Counts::of(x) == Counts::of(y))
    }
}

pub fn confirmed_spectrum(params: &WaveParams, n: Option<usize>, tol_rel: Option<f64>) -> Result<ConfirmedSpectrum> {
    let grid = params.default_grid(n)?;
    let base = block_spectrum(&waves::sample_profile(params, &grid)?, tol_rel)?;
    let doubled = block_spectrum(&waves::sample_profile(params, &grid.refined(2)?)?, tol_rel)?;
    let confirmed = ConfirmedSpectrum::counts_match(&base, &doubled);
    Ok(ConfirmedSpectrum { base, doubled, confirmed })
}

// ---------------------------------------------------------------------------
// Floquet constant

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloquetResult {
    pub theta: f64,
    pub omega_at: f64,
    pub ybar_end: [f64; 2],
    pub phi_dd0: f64,
    /// `max |W(x) − W(0)| / |W(0)|` for `W = φ′ȳ′ − φ″ȳ` along the accepted steps.
    pub wronskian_drift: f64,
}

/// Integrate `ȳ″ = (ω/c − (2r+1)φ^{2r}/c) ȳ` from `ȳ(0) = −1/φ″(0)`, `ȳ′(0) = 0` over one period and
/// return `θ = ȳ′(2π)/φ″(0)`.
pub fn floquet_theta(params: &WaveParams) -> Result<FloquetResult> {
    if !params.family.is_periodic() {
        return Err(Error::Usage("θ is defined for periodic waves only".into()));
    }
    let ev = params.evaluator();
    let phi_dd0 = ev.jet(0.0).d2phi;
    if phi_dd0 == 0.0 || !phi_dd0.is_finite() {
        return Err(domain(format!("degenerate profile: φ″(0) = {phi_dd0}")));
    }
    let (w, c) = (params.omega, params.c);
    let coef = (2 * params.r + 1) as f64;
    let p2r = 2 * params.r as i32;
    let period = 2.0 * std::f64::consts::PI;
    let mut prob = IvpProblem::new(
        move |x: f64, y: &[f64], dy: &mut [f64]| {
            let phi = ev.jet(x).phi;
            dy[0] = y[1];
            dy[1] = (w / c - coef * phi.powi(p2r) / c) * y[0];
        },
        vec![-1.0 / phi_dd0, 0.0],
        (0.0, period),
    )
    .with_tolerances(THETA_REL_TOL, 1e-13);
    let sol = integrate_ivp(&mut prob, true)?;
    let wronskian = |x: f64, y: &[f64]| {
        let j = ev.jet(x);
        j.dphi * y[1] - j.d2phi * y[0]
    };
    let traj = sol.trajectory.expect("trajectory requested");
    let w0 = wronskian(traj[0].0, &traj[0].1);
    let drift = traj.iter().map(|(x, y)| (wronskian(*x, y) - w0).abs()).fold(0.0, f64::max) / w0.abs();
    let y = &sol.y_end;
    Ok(FloquetResult {
        theta: y[1] / phi_dd0,
        omega_at: w,
        ybar_end: [y[0], y[1]],
        phi_dd0,
        wronskian_drift: drift,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoinertiaEntry {
    pub k: f64,
    pub omega: f64,
    pub theta: f64,
    pub n_neg: usize,
    pub z_kernel: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoinertiaReport {
    pub family: Family,
    pub r: u32,
    pub entries: Vec<IsoinertiaEntry>,
    pub anomalies: Vec<String>,
}

impl IsoinertiaReport {
    pub fn consistent(&self) -> bool {
        self.anomalies.is_empty()
    }
}

/// θ and the `L_Re` counts across a modulus grid; any change of sign or count is an anomaly.
pub fn isoinertia_sweep(family: Family, r: u32, k_grid: &[f64]) -> Result<IsoinertiaReport> {
    let mut entries = Vec::with_capacity(k_grid.len());
    let mut anomalies = Vec::new();
    for &k in k_grid {
        let params = waves::solve(family, r, Selector::K(k))?;
        let theta = floquet_theta(&params)?.theta;
        let p = waves::sample_profile(&params, &params.default_grid(None)?)?;
        let s = spectrum(&assemble(OperatorKind::LRe, &p)?, None, Subspace::Full)?;
        entries.push(IsoinertiaEntry { k, omega: params.omega, theta, n_neg: s.n_neg, z_kernel: s.z_kernel });
    }
    if let Some(first) = entries.first().copied() {
        for e in &entries {
            if e.theta.signum() != first.theta.signum() {
                anomalies.push(format!("θ changes sign at k = {}", e.k));
            }
            if (e.n_neg, e.z_kernel) != (first.n_neg, first.z_kernel) {
                anomalies.push(format!("L_Re counts change at k = {}: ({}, {})", e.k, e.n_neg, e.z_kernel));
            }
        }
    }
    Ok(IsoinertiaReport { family, r, entries, anomalies })
}

// ---------------------------------------------------------------------------
// η = −dφ/dω

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaCheck {
    /// `‖L_Re η − φ‖ / ‖φ‖`
    pub residual: f64,
    /// `(L_Re η, η)`, which equals `−½ d/dω ∫φ²`.
    pub pairing: f64,
    pub step: f64,
}

fn neighbor(params: &WaveParams, omega: f64) -> Result<WaveParams> {
    let at = if params.family.is_periodic() {
        Selector::K(waves::modulus_for_omega(params.family, omega)?)
    } else {
        Selector::Omega(omega)
    };
    waves::solve(params.family, params.r, at).map_err(|e| match e {
        Error::Domain(m) | Error::Existence(m) => crate::error::existence(m),
        b @ Error::Bracket { .. } => crate::error::existence(b.to_string()),
        other => other,
    })
}

/// Build `η ≈ −(φ_{ω+h} − φ_{ω−h})/(2h)` on the profile's grid and test `L_Re η = φ`.
pub fn eta_equation_check(p: &Profile, d_omega_step: f64) -> Result<EtaCheck> {
    let w = p.params.omega;
    let h = d_omega_step;
    let plus = neighbor(&p.params, w + h)?.evaluator();
    let minus = neighbor(&p.params, w - h)?.evaluator();
    let n = p.n();
    let (mut eta, mut deta, mut d2eta) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for (i, &x) in p.grid.nodes().iter().enumerate() {
        let (a, b) = (plus.jet(x), minus.jet(x));
        eta[i] = -(a.phi - b.phi) / (2.0 * h);
        deta[i] = -(a.dphi - b.dphi) / (2.0 * h);
        d2eta[i] = -(a.d2phi - b.d2phi) / (2.0 * h);
    }
    let WaveParams { c, omega, r, .. } = p.params;
    let coupling = p.grid.inner(&p.dphi, &deta)?;
    let l_eta: Vec<f64> = (0..n)
        .map(|i| {
            -c * d2eta[i] - 2.0 * coupling * p.d2phi[i]
                + (omega - (2 * r + 1) as f64 * p.phi[i].powi(2 * r as i32)) * eta[i]
        })
        .collect();
    let diff: Vec<f64> = l_eta.iter().zip(&p.phi).map(|(a, b)| a - b).collect();
    let residual = (p.grid.inner(&diff, &diff)? / p.grid.inner(&p.phi, &p.phi)?).sqrt();
    Ok(EtaCheck { residual, pairing: p.grid.inner(&l_eta, &eta)?, step: h })
}

// ---------------------------------------------------------------------------
// Report

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub family: Family,
    pub r: u32,
    pub parameter: f64,
    pub n_neg: usize,
    pub z_kernel: usize,
    pub lowest: Vec<f64>,
    pub ess_edge: Option<f64>,
    pub theta: Option<f64>,
    pub l_re: Counts,
    pub l_im: Counts,
    pub confirmed_at_double_resolution: bool,
    pub n: usize,
}

/// Block-operator report: counts of `𝓛`, lowest eigenvalues of `L_Re`, θ for periodic waves.
pub fn spectrum_report(params: &WaveParams, n: Option<usize>, tol_rel: Option<f64>) -> Result<SpectrumReport> {
    let s = confirmed_spectrum(params, n, tol_rel)?;
    let theta = if params.family.is_periodic() { Some(floquet_theta(params)?.theta) } else { None };
    Ok(SpectrumReport {
        family: params.family,
        r: params.r,
        parameter: params.parameter(),
        n_neg: s.base.block.n_neg,
        z_kernel: s.base.block.z_kernel,
        lowest: s.base.l_re.lowest.clone(),
        ess_edge: s.base.l_re.ess_edge,
        theta,
        l_re: Counts::of(&s.base.l_re),
        l_im: Counts::of(&s.base.l_im),
        confirmed_at_double_resolution: s.confirmed,
        n: s.base.n,
    })
}

pub fn write_report_json<W: Write>(report: &SpectrumReport, out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(out, report).map_err(std::io::Error::other)
}

/// `|⟨u, v⟩| / (‖u‖‖v‖)` in the plain Euclidean sense.
pub fn correlation(u: &[f64], v: &[f64]) -> f64 {
    dot(u, v).abs() / (dot(u, u) * dot(v, v)).sqrt()
}

/// Convenience: `VkSlopeResult` and the pairing from [`eta_equation_check`] should agree.
pub fn pairing_vs_slope(p: &Profile, h: f64) -> Result<(f64, f64)> {
    let eta = eta_equation_check(p, h)?;
    let at = if p.params.family.is_periodic() { Selector::K(p.params.parameter()) } else { Selector::Omega(p.params.omega) };
    let slope = functionals::vk_slope(p.params.family, p.params.r, at, functionals::DEFAULT_STEP)?;
    Ok((eta.pairing, -0.5 * slope.slope))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waves::build_profile;
    use rand::{Rng, SeedableRng};

    fn dn() -> Profile {
        build_profile(Family::PeriodicDn, 1, Selector::K(0.5), None).unwrap()
    }

    fn sol1() -> Profile {
        build_profile(Family::Solitary, 1, Selector::Omega(1.0), None).unwrap()
    }

    fn sup(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn kernel_vectors() {
        for p in [dn(), build_profile(Family::PeriodicDnQuotient, 2, Selector::K(0.5), None).unwrap()] {
            let lre = assemble(OperatorKind::LRe, &p).unwrap();
            let lim = assemble(OperatorKind::LIm, &p).unwrap();
            let scale = lre.matrix.norm_inf();
            assert!(sup(&lre.matrix.matvec(&p.dphi)) <= 1e-6 * sup(&p.dphi) * scale);
            assert!(sup(&lim.matrix.matvec(&p.phi)) <= 1e-6 * sup(&p.phi) * scale);
        }
    }

    #[test]
    fn quadratic_form_matches_matrix() {
        let p = dn();
        let m = assemble(OperatorKind::LRe, &p).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let h = p.grid.spacing();
        for _ in 0..20 {
            let coeffs: Vec<(f64, f64)> = (0..8).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let v: Vec<f64> = p
                .grid
                .nodes()
                .iter()
                .map(|&x| coeffs.iter().enumerate().map(|(j, (a, b))| a * (j as f64 * x).cos() + b * (j as f64 * x).sin()).sum())
                .collect();
            let lhs = h * dot(&v, &m.matrix.matvec(&v));
            let rhs = functionals::quadratic_form_lre(&p, &v).unwrap();
            assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
            let direct = apply_direct(OperatorKind::LRe, &p, &v).unwrap();
            let mv = m.matrix.matvec(&v);
            assert!(direct.iter().zip(&mv).all(|(a, b)| (a - b).abs() <= 1e-8 * sup(&mv)));
        }
    }

    #[test]
    fn line_rank_one_rewrite_tracks_direct_formula() {
        let p = sol1();
        let m = assemble(OperatorKind::LRe, &p).unwrap();
        let v: Vec<f64> = p.grid.nodes().iter().map(|&x| (-(x * x) / 8.0).exp() * (1.0 + 0.3 * x)).collect();
        let direct = apply_direct(OperatorKind::LRe, &p, &v).unwrap();
        let mv = m.matrix.matvec(&v[1..p.n() - 1]);
        let err = mv.iter().zip(&direct[1..p.n() - 1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-5 * sup(&mv), "{err}");
    }

    #[test]
    fn parity_split_reproduces_full_spectrum() {
        let p = build_profile(Family::PeriodicDn, 1, Selector::K(0.5), Some(64)).unwrap();
        let m = assemble(OperatorKind::LRe, &p).unwrap();
        let full = symmetric_eigenvalues(&m.matrix).unwrap();
        let split = subspace_eigenvalues(&m, Subspace::Full).unwrap();
        for (a, b) in full.iter().zip(&split) {
            assert!((a - b).abs() < 1e-9 * m.matrix.norm_inf());
        }
        let q = build_profile(Family::Solitary, 2, Selector::Omega(0.5), Some(66)).unwrap();
        let m = assemble(OperatorKind::LIm, &q).unwrap();
        let full = symmetric_eigenvalues(&m.matrix).unwrap();
        let split = subspace_eigenvalues(&m, Subspace::Full).unwrap();
        for (a, b) in full.iter().zip(&split) {
            assert!((a - b).abs() < 1e-9 * m.matrix.norm_inf());
        }
    }

    #[test]
    fn counts_dn_and_solitary() {
        let b = block_spectrum(&dn(), None).unwrap();
        assert_eq!((b.l_im.n_neg, b.l_im.z_kernel), (0, 1));
        assert_eq!((b.l_re.n_neg, b.l_re.z_kernel), (1, 1));
        assert_eq!((b.block.n_neg, b.block.z_kernel), (1, 2));
        assert_eq!((b.even_block.n_neg, b.even_block.z_kernel), (1, 1));
        let s = block_spectrum(&sol1(), None).unwrap();
        assert_eq!((s.l_re.n_neg, s.l_re.z_kernel), (1, 1));
        assert_eq!((s.block.n_neg, s.block.z_kernel), (1, 2));
        let params = sol1().params;
        assert_eq!(s.l_re.ess_edge, Some(params.omega / params.c));
        assert!(b.l_re.ess_edge.is_none());
    }

    #[test]
    fn ground_states_are_positive() {
        for p in [dn(), sol1()] {
            let lim = assemble(OperatorKind::LIm, &p).unwrap();
            let (_, v) = lowest_even_eigenpair(&lim, p.n()).unwrap();
            let inner: Vec<f64> = v[lim.unknowns()].to_vec();
            let sign = inner[inner.len() / 2].signum();
            assert!(inner.iter().all(|x| x * sign > -1e-12));
            assert!(correlation(&v, &p.phi) > 0.999);
            let lre = assemble(OperatorKind::LRe, &p).unwrap();
            let (l0, v) = lowest_even_eigenpair(&lre, p.n()).unwrap();
            assert!(l0 < 0.0);
            let inner: Vec<f64> = v[lre.unknowns()].to_vec();
            let sign = inner[inner.len() / 2].signum();
            assert!(inner.iter().all(|x| x * sign > -1e-12));
        }
    }

    #[test]
    fn theta_dn() {
        let params = waves::solve_periodic_r1(0.5).unwrap();
        let f = floquet_theta(&params).unwrap();
        assert!((f.theta + 18.7569).abs() < 0.01 * 18.7569, "θ = {}", f.theta);
        assert!(f.wronskian_drift < 1e-8, "{}", f.wronskian_drift);
        assert_eq!(f.theta, f.ybar_end[1] / f.phi_dd0);
        let sol = waves::solve_solitary(1, 1.0).unwrap();
        assert!(matches!(floquet_theta(&sol), Err(Error::Usage(_))));
    }

    #[test]
    fn eta_identity() {
        let p = sol1();
        let e1 = eta_equation_check(&p, 1e-4).unwrap();
        assert!(e1.residual < 1e-3, "{}", e1.residual);
        let e2 = eta_equation_check(&p, 2e-2).unwrap();
        let e3 = eta_equation_check(&p, 1e-2).unwrap();
        let ratio = e2.residual / e3.residual;
        assert!(ratio > 3.0 && ratio < 5.0, "ratio {ratio}");
        let (pair, half_slope) = pairing_vs_slope(&p, 1e-4).unwrap();
        assert!((pair - half_slope).abs() <= 0.05 * half_slope.abs(), "{pair} vs {half_slope}");
    }
}
