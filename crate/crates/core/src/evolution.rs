//! Strang split-step Fourier integration of
//! `i u_t + (1 + ∫|u_x|²) u_xx + |u|^{2r} u = 0` on a periodic box, and the
//! H¹ orbital distance to the orbit `{e^{iθ} φ(· − s)}` of a standing wave.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::functionals;
use crate::numerics::{Grid, SpectralOps};
use crate::waves::{self, Family, Profile, Selector, WaveParams};

/// Amplitude beyond which a run is declared blown up.
const BLOW_UP_AMPLITUDE: f64 = 1e6;
/// Minimum box length for solitary runs.
const MIN_BOX: f64 = 50.0;
/// Target node spacing for solitary runs.
const BOX_SPACING: f64 = 0.08;
pub const RESOLUTION_LOST_DRIFT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub kirchhoff_c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbital_distance: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub u: Vec<Complex64>,
    pub t: f64,
    pub r: u32,
    grid: Grid,
    ops: SpectralOps,
    pub monitors: Vec<MonitorRecord>,
}

impl EvolutionState {
    pub fn new(u: Vec<Complex64>, grid: &Grid, r: u32) -> Result<Self> {
        let period = grid
            .period()
            .ok_or_else(|| Error::Usage("evolution runs on a periodic grid".into()))?;
        check_len(grid.n(), u.len())?;
        if r == 0 {
            return Err(Error::Usage("r must be at least 1".into()));
        }
        Ok(Self { u, t: 0.0, r, grid: grid.clone(), ops: SpectralOps::new(grid.n(), period)?, monitors: Vec::new() })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ops(&self) -> &SpectralOps {
        &self.ops
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_amplitude(&self) -> f64 {
        self.u.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn kirchhoff_coefficient(&self) -> f64 {
        kirchhoff_from_hat(&self.ops, &self.ops.forward(&self.u))
    }

    pub fn mass(&self) -> f64 {
        functionals::mass(&self.u, &self.grid).expect("state matches grid")
    }

    pub fn energy(&self) -> f64 {
        functionals::energy(&self.u, &self.grid, self.r).expect("state matches grid")
    }

    fn nonlinear_half(&mut self, dt: f64) {
        let r = self.r as i32;
        for z in self.u.iter_mut() {
            let phase = z.norm_sqr().powi(r) * 0.5 * dt;
            *z *= Complex64::from_polar(1.0, phase);
        }
    }

    /// One Strang step: half nonlinear phase, exact linear flow with `c` taken from the
    /// current state (it does not change during the linear flow), half nonlinear phase.
    pub fn step(&mut self, dt: f64) {
        self.nonlinear_half(dt);
        let mut hat = self.u.clone();
        self.ops.forward_in_place(&mut hat);
        let c = kirchhoff_from_hat(&self.ops, &hat);
        for (z, &k) in hat.iter_mut().zip(self.ops.wavenumbers()) {
            *z *= Complex64::from_polar(1.0, -c * k * k * dt);
        }
        self.ops.inverse_in_place(&mut hat);
        self.u = hat;
        self.nonlinear_half(dt);
        self.t += dt;
    }
}

/// `1 + ∫|u_x|²` from the transform (the Nyquist mode carries no derivative).
fn kirchhoff_from_hat(ops: &SpectralOps, hat: &[Complex64]) -> f64 {
    let nyq = ops.n() / 2;
    let s = ops.period() / (ops.n() as f64).powi(2);
    1.0 + hat
        .iter()
        .zip(ops.wavenumbers())
        .enumerate()
        .filter(|(m, _)| *m != nyq)
        .map(|(_, (z, k))| k * k * z.norm_sqr())
        .sum::<f64>()
        * s
}

pub fn kirchhoff_coefficient(state: &EvolutionState) -> f64 {
    state.kirchhoff_coefficient()
}

pub fn step_strang(mut state: EvolutionState, dt: f64) -> EvolutionState {
    state.step(dt);
    state
}

// ---------------------------------------------------------------------------
// Orbital distance

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitalDistanceResult {
    pub distance: f64,
    pub theta_opt: f64,
    pub s_opt: f64,
}

/// `‖v‖²_{H¹} = Σ (1 + κ²)|v̂|² · period/n²`.
pub fn h1_norm_sq(ops: &SpectralOps, hat: &[Complex64]) -> f64 {
    ops.weighted_energy(hat, |k| 1.0 + k * k)
}

pub fn h1_norm(ops: &SpectralOps, u: &[Complex64]) -> f64 {
    h1_norm_sq(ops, &ops.forward(u)).sqrt()
}

fn distance_at(ops: &SpectralOps, u_hat: &[Complex64], phi_hat: &[Complex64], theta: f64, s: f64) -> f64 {
    let rot = Complex64::from_polar(1.0, theta);
    let diff: Vec<Complex64> = u_hat
        .iter()
        .zip(phi_hat)
        .zip(ops.wavenumbers())
        .map(|((a, b), &k)| a - rot * b * Complex64::from_polar(1.0, -k * s))
        .collect();
    h1_norm_sq(ops, &diff).sqrt()
}

/// H¹ pairing `⟨u, φ(· − s)⟩` as a function of a continuous shift.
fn pairing(ops: &SpectralOps, weights: &[Complex64], s: f64) -> Complex64 {
    weights
        .iter()
        .zip(ops.wavenumbers())
        .map(|(w, &k)| w * Complex64::from_polar(1.0, k * s))
        .sum::<Complex64>()
        * (ops.period() / (ops.n() as f64).powi(2))
}

/// `inf_{θ,s} ‖u − e^{iθ}φ(·−s)‖_{H¹}`: all cyclic shifts scanned through one inverse transform,
/// the best one refined between neighbouring nodes, θ in closed form.
pub fn orbital_distance(ops: &SpectralOps, u: &[Complex64], phi: &[Complex64]) -> Result<OrbitalDistanceResult> {
    let n = ops.n();
    check_len(n, u.len())?;
    check_len(n, phi.len())?;
    let u_hat = ops.forward(u);
    let phi_hat = ops.forward(phi);
    let weights: Vec<Complex64> = u_hat
        .iter()
        .zip(&phi_hat)
        .zip(ops.wavenumbers())
        .map(|((a, b), &k)| (1.0 + k * k) * a * b.conj())
        .collect();
    // g_j = Σ W_m e^{iκ_m x_j}, the pairing at every node shift
    let mut g = weights.clone();
    ops.inverse_in_place(&mut g);
    let best = (0..n).max_by(|&i, &j| g[i].norm().total_cmp(&g[j].norm())).unwrap_or(0);
    let h = ops.period() / n as f64;
    let s0 = best as f64 * h;
    let s_opt = refine_shift(ops, &weights, s0, h);
    let theta = pairing(ops, &weights, s_opt).arg();
    let distance = distance_at(ops, &u_hat, &phi_hat, theta, s_opt);
    Ok(OrbitalDistanceResult { distance, theta_opt: theta, s_opt: s_opt.rem_euclid(ops.period()) })
}

/// Distance to the rotation orbit `{e^{iθ}φ}` only (the even-subspace metric).
pub fn rotation_distance(ops: &SpectralOps, u: &[Complex64], phi: &[Complex64]) -> Result<OrbitalDistanceResult> {
    check_len(ops.n(), u.len())?;
    check_len(ops.n(), phi.len())?;
    let u_hat = ops.forward(u);
    let phi_hat = ops.forward(phi);
    let w: Complex64 = u_hat
        .iter()
        .zip(&phi_hat)
        .zip(ops.wavenumbers())
        .map(|((a, b), &k)| (1.0 + k * k) * a * b.conj())
        .sum();
    let theta = w.arg();
    Ok(OrbitalDistanceResult { distance: distance_at(ops, &u_hat, &phi_hat, theta, 0.0), theta_opt: theta, s_opt: 0.0 })
}

/// Newton on `d|G|²/ds = 0` from the best node, confined to neighbouring cells.
fn refine_shift(ops: &SpectralOps, weights: &[Complex64], s0: f64, h: f64) -> f64 {
    let i = Complex64::new(0.0, 1.0);
    let mut s = s0;
    for _ in 0..30 {
        let (mut g, mut g1, mut g2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (w, &k) in weights.iter().zip(ops.wavenumbers()) {
            let t = w * Complex64::from_polar(1.0, k * s);
            g += t;
            g1 += i * k * t;
            g2 -= k * k * t;
        }
        let f = (g.conj() * g1).re;
        let df = g1.norm_sqr() + (g.conj() * g2).re;
        if df >= 0.0 {
            break;
        }
        let next = (s - f / df).clamp(s0 - h, s0 + h);
        let done = (next - s).abs() <= 1e-15 * ops.period();
        s = next;
        if done {
            break;
        }
    }
    if pairing(ops, weights, s).norm() >= pairing(ops, weights, s0).norm() {
        s
    } else {
        s0
    }
}

// ---------------------------------------------------------------------------
// Runs

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    /// Rotations and translations.
    Full,
    /// Rotations only.
    Rotation,
}

/// Orbit reference for the monitors.
#[derive(Debug, Clone)]
pub struct Reference {
    pub phi: Vec<Complex64>,
    pub kind: DistanceKind,
}

impl Reference {
    pub fn distance(&self, state: &EvolutionState) -> Result<OrbitalDistanceResult> {
        match self.kind {
            DistanceKind::Full => orbital_distance(&state.ops, &state.u, &self.phi),
            DistanceKind::Rotation => rotation_distance(&state.ops, &state.u, &self.phi),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionSummary {
    pub steps: usize,
    pub dt: f64,
    pub t_final: f64,
    pub records: Vec<MonitorRecord>,
    /// `max |F(t) − F(0)| / F(0)` over the records.
    pub mass_drift: f64,
    /// `max |E(t) − E(0)| / |E(0)|` over the records.
    pub energy_drift: f64,
    /// Time of the first non-finite or exploding state.
    pub blow_up: Option<f64>,
    /// First logged time with relative energy error above `RESOLUTION_LOST_DRIFT`: the
    /// state has concentrated below the grid scale and the run is no longer trustworthy.
    pub resolution_lost: Option<f64>,
}

impl EvolutionSummary {
    pub fn max_distance(&self) -> Option<f64> {
        self.records.iter().filter_map(|r| r.orbital_distance).reduce(f64::max)
    }
}

fn record(state: &EvolutionState, reference: Option<&Reference>) -> Result<MonitorRecord> {
    Ok(MonitorRecord {
        t: state.t,
        mass: state.mass(),
        energy: state.energy(),
        kirchhoff_c: state.kirchhoff_coefficient(),
        orbital_distance: reference.map(|r| r.distance(state).map(|d| d.distance)).transpose()?,
    })
}

/// Advance to `t_final` in `ceil(T/dt)` equal steps, logging every `log_every` steps.
pub fn evolve(
    state: &mut EvolutionState,
    t_final: f64,
    dt: f64,
    log_every: usize,
    reference: Option<&Reference>,
) -> Result<EvolutionSummary> {
    if !(dt > 0.0 && t_final > 0.0 && dt.is_finite() && t_final.is_finite()) {
        return Err(Error::Usage(format!("need T > 0 and dt > 0, got T = {t_final}, dt = {dt}")));
    }
    let steps = (t_final / dt - 1e-9).ceil().max(1.0) as usize;
    let h = t_final / steps as f64;
    let log_every = log_every.max(1);
    let t0 = state.t;
    let mut records = vec![record(state, reference)?];
    let mut blow_up = None;
    for i in 1..=steps {
        state.step(h);
        state.t = t0 + i as f64 * h;
        if !state.is_finite() || state.max_amplitude() > BLOW_UP_AMPLITUDE {
            blow_up = Some(state.t);
            break;
        }
        if i % log_every == 0 || i == steps {
            records.push(record(state, reference)?);
        }
    }
    let (m0, e0) = (records[0].mass, records[0].energy);
    let mass_drift = records.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max) / m0.max(f64::MIN_POSITIVE);
    let energy_drift = records.iter().map(|r| (r.energy - e0).abs()).fold(0.0, f64::max) / e0.abs().max(f64::MIN_POSITIVE);
    let resolution_lost = records
        .iter()
        .find(|r| (r.energy - e0).abs() > RESOLUTION_LOST_DRIFT * e0.abs().max(f64::MIN_POSITIVE))
        .map(|r| r.t);
    state.monitors.extend_from_slice(&records);
    Ok(EvolutionSummary { steps, dt: h, t_final: state.t, records, mass_drift, energy_drift, blow_up, resolution_lost })
}

/// Energy drift at `dt` and `dt/2` from the same initial state; the ratio should be near 4.
pub fn energy_convergence(u0: &[Complex64], grid: &Grid, r: u32, t_final: f64, dt: f64) -> Result<(f64, f64)> {
    let mut drifts = [0.0; 2];
    for (d, h) in drifts.iter_mut().zip([dt, 0.5 * dt]) {
        let mut s = EvolutionState::new(u0.to_vec(), grid, r)?;
        *d = evolve(&mut s, t_final, h, 1, None)?.energy_drift;
    }
    Ok((drifts[0], drifts[1]))
}

/// Periodic box for a family member: the 2π torus for periodic waves; for solitary waves a
/// multiple of 2π covering the truncated line, eight widths and `MIN_BOX`.
pub fn evolution_grid(params: &WaveParams, n: Option<usize>) -> Result<Grid> {
    if params.family.is_periodic() {
        return Grid::torus(n.unwrap_or(waves::DEFAULT_TORUS_NODES));
    }
    let want = (2.0 * params.line_half_length()).max(8.0 * params.r as f64 / params.b).max(MIN_BOX);
    let period = 2.0 * PI * (want / (2.0 * PI)).ceil();
    let n = n.unwrap_or_else(|| ((period / BOX_SPACING).ceil() as usize).next_power_of_two().max(512));
    Grid::torus_with_period(n, period)
}

/// The standing wave sampled on a periodic box, centred at the origin.
pub fn torus_profile(params: &WaveParams, grid: &Grid) -> Result<Vec<Complex64>> {
    let period = grid.period().ok_or_else(|| Error::Usage("torus grid required".into()))?;
    let ev = params.evaluator();
    Ok(grid
        .nodes()
        .iter()
        .map(|&x| {
            let xc = if params.family.is_periodic() { x } else { x - period * (x / period).round() };
            Complex64::new(ev.jet(xc).phi, 0.0)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// `ε cos x` on the real part, `ε sin 2x` on the imaginary part.
    Standard,
    /// `ε cos x` on the real part, `ε cos 2x` on the imaginary part.
    Even,
}

impl Perturbation {
    pub fn describe(self) -> &'static str {
        match self {
            Perturbation::Standard => "eps*cos(x) + i*eps*sin(2x)",
            Perturbation::Even => "eps*cos(x) + i*eps*cos(2x)",
        }
    }

    pub fn apply(self, phi: &[Complex64], grid: &Grid, eps: f64) -> Vec<Complex64> {
        phi.iter()
            .zip(grid.nodes())
            .map(|(f, &x)| {
                let im = match self {
                    Perturbation::Standard => (2.0 * x).sin(),
                    Perturbation::Even => (2.0 * x).cos(),
                };
                f + Complex64::new(eps * x.cos(), eps * im)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub family: Family,
    pub r: u32,
    pub at: Selector,
    pub epsilon: f64,
    pub t_final: f64,
    pub dt: f64,
    pub n: Option<usize>,
    pub perturbation: Perturbation,
    pub distance: DistanceKind,
    pub log_every: usize,
}

impl ExperimentSpec {
    /// The documented defaults: dt = 1e-3, logging every 50 steps, and for the even
    /// perturbation the rotation-only distance.
    pub fn new(family: Family, r: u32, at: Selector, epsilon: f64, t_final: f64) -> Self {
        Self {
            family,
            r,
            at,
            epsilon,
            t_final,
            dt: 1e-3,
            n: None,
            perturbation: Perturbation::Standard,
            distance: DistanceKind::Full,
            log_every: 50,
        }
    }

    pub fn even(mut self) -> Self {
        self.perturbation = Perturbation::Even;
        self.distance = DistanceKind::Rotation;
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub params: WaveParams,
    pub n: usize,
    pub period: f64,
    pub perturbation: String,
    pub phi_h1_norm: f64,
    pub initial_distance: f64,
    pub max_distance: f64,
    /// `max_distance / initial_distance`
    pub growth: f64,
    /// Periodic image of the solitary tail at the box edge, relative to `φ(0)`.
    pub wraparound: f64,
    pub summary: EvolutionSummary,
}

/// Perturb the standing wave, evolve, and track the orbital distance.
pub fn stability_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let params = waves::solve(spec.family, spec.r, spec.at)?;
    let grid = evolution_grid(&params, spec.n)?;
    let phi = torus_profile(&params, &grid)?;
    let ops = SpectralOps::new(grid.n(), grid.period().expect("torus"))?;
    let phi_norm = h1_norm(&ops, &phi);
    if !(spec.epsilon >= 0.0 && spec.epsilon <= 0.05 * phi_norm) {
        return Err(Error::Usage(format!(
            "epsilon must lie in [0, 0.05·‖Φ‖_H1] = [0, {:.4}], got {}",
            0.05 * phi_norm,
            spec.epsilon
        )));
    }
    let u0 = spec.perturbation.apply(&phi, &grid, spec.epsilon);
    let edge = phi.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let reference = Reference { phi, kind: spec.distance };
    let mut state = EvolutionState::new(u0, &grid, params.r)?;
    let summary = evolve(&mut state, spec.t_final, spec.dt, spec.log_every, Some(&reference))?;
    let initial = summary.records[0].orbital_distance.unwrap_or(0.0);
    let max = summary.max_distance().unwrap_or(initial);
    Ok(ExperimentResult {
        spec: spec.clone(),
        params,
        n: grid.n(),
        period: grid.period().expect("torus"),
        perturbation: spec.perturbation.describe().to_string(),
        phi_h1_norm: phi_norm,
        initial_distance: initial,
        max_distance: max,
        growth: if initial > 0.0 { max / initial } else { f64::INFINITY },
        wraparound: if params.family.is_periodic() { 0.0 } else { edge / params.a },
        summary,
    })
}

pub fn write_trajectory_csv<W: Write>(records: &[MonitorRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,mass,energy,kirchhoff_c,orbital_distance")?;
    for r in records {
        let d = r.orbital_distance.map_or_else(String::new, |d| format!("{d:.12e}"));
        writeln!(out, "{:.6},{:.15e},{:.15e},{:.15e},{}", r.t, r.mass, r.energy, r.kirchhoff_c, d)?;
    }
    Ok(())
}

/// Everything needed to rerun the experiment, plus its headline numbers.
pub fn manifest(result: &ExperimentResult) -> serde_json::Value {
    serde_json::json!({
        "family": result.spec.family,
        "r": result.spec.r,
        "parameter": result.params.parameter(),
        "selector": result.spec.at,
        "params": result.params,
        "epsilon": result.spec.epsilon,
        "T": result.spec.t_final,
        "dt": result.summary.dt,
        "steps": result.summary.steps,
        "n": result.n,
        "period": result.period,
        "perturbation": result.perturbation,
        "distance": result.spec.distance,
        "log_every": result.spec.log_every,
        "phi_h1_norm": result.phi_h1_norm,
        "initial_distance": result.initial_distance,
        "max_distance": result.max_distance,
        "growth": result.growth,
        "mass_drift": result.summary.mass_drift,
        "energy_drift": result.summary.energy_drift,
        "blow_up": result.summary.blow_up,
        "resolution_lost": result.summary.resolution_lost,
        "wraparound": result.wraparound,
    })
}

/// Evolve the exact standing wave and return the H¹ error against `e^{iωT}φ`.
pub fn standing_wave_fidelity(p: &Profile, t_final: f64, dt: f64) -> Result<f64> {
    let phi = functionals::profile_state(p);
    let mut state = EvolutionState::new(phi.clone(), &p.grid, p.params.r)?;
    let summary = evolve(&mut state, t_final, dt, usize::MAX, None)?;
    let rot = Complex64::from_polar(1.0, p.params.omega * summary.t_final);
    let diff: Vec<Complex64> = state.u.iter().zip(&phi).map(|(u, f)| u - rot * f).collect();
    Ok(h1_norm(state.ops(), &diff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waves::build_profile;
    use rand::{Rng, SeedableRng};

    fn dn_state() -> (Profile, EvolutionState) {
        let p = build_profile(Family::PeriodicDn, 1, Selector::K(0.5), None).unwrap();
        let s = EvolutionState::new(functionals::profile_state(&p), &p.grid, 1).unwrap();
        (p, s)
    }

    #[test]
    fn kirchhoff_values() {
        let g = Grid::torus(64).unwrap();
        let zero = EvolutionState::new(vec![Complex64::new(0.0, 0.0); 64], &g, 1).unwrap();
        assert_eq!(zero.kirchhoff_coefficient(), 1.0);
        let plane: Vec<Complex64> = g.nodes().iter().map(|&x| Complex64::from_polar(1.0, 2.0 * x)).collect();
        let s = EvolutionState::new(plane, &g, 1).unwrap();
        assert!((s.kirchhoff_coefficient() - (1.0 + 8.0 * PI)).abs() < 1e-10);
        let (_, s) = dn_state();
        let tau1 = functionals::closed_form_tau(0.5).unwrap().tau1;
        assert!((s.kirchhoff_coefficient() - 1.0 - tau1).abs() < 1e-8);
        assert!(EvolutionState::new(vec![Complex64::new(0.0, 0.0); 64], &Grid::line(64, 5.0).unwrap(), 1).is_err());
    }

    #[test]
    fn one_step_preserves_mass() {
        let (_, mut s) = dn_state();
        let m0 = s.mass();
        s.step(1e-3);
        assert!((s.mass() - m0).abs() <= 1e-13 * m0);
    }

    #[test]
    fn plane_wave_closed_form() {
        let g = Grid::torus(64).unwrap();
        let (amp, m, r) = (0.5f64, 1.0f64, 1u32);
        let u0: Vec<Complex64> = g.nodes().iter().map(|&x| Complex64::from_polar(amp, m * x)).collect();
        let mut s = EvolutionState::new(u0.clone(), &g, r).unwrap();
        evolve(&mut s, 1.0, 1e-3, 100, None).unwrap();
        let c = 1.0 + m * m * amp * amp * 2.0 * PI;
        let freq = amp.powi(2 * r as i32) - c * m * m;
        for (u, u0) in s.u.iter().zip(&u0) {
            assert!((u - u0 * Complex64::from_polar(1.0, freq * 1.0)).norm() < 1e-8);
        }
        let mut z = EvolutionState::new(vec![Complex64::new(0.0, 0.0); 64], &g, 2).unwrap();
        evolve(&mut z, 1.0, 1e-2, 10, None).unwrap();
        assert!(z.u.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn orbit_members_have_zero_distance() {
        let (p, s) = dn_state();
        let phi = s.u.clone();
        let d = orbital_distance(s.ops(), &phi, &phi).unwrap();
        assert!(d.distance < 1e-12);
        let shift = 5;
        let moved: Vec<Complex64> =
            (0..p.n()).map(|j| Complex64::from_polar(1.0, 1.2) * phi[(j + p.n() - shift) % p.n()]).collect();
        let d = orbital_distance(s.ops(), &moved, &phi).unwrap();
        assert!(d.distance < 1e-12, "{}", d.distance);
        assert!((d.theta_opt - 1.2).abs() < 1e-9);
        assert!((d.s_opt - p.grid.nodes()[shift]).abs() < 1e-9);
    }

    #[test]
    fn distance_of_small_perturbation_against_brute_force() {
        let (p, s) = dn_state();
        let phi = s.u.clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let eps = 1e-3;
        let modes: Vec<(f64, f64)> = (0..5).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let pert: Vec<Complex64> = p
            .grid
            .nodes()
            .iter()
            .map(|&x| {
                let v: f64 = modes.iter().enumerate().map(|(j, (a, b))| a * (j as f64 * x).cos() + b * (j as f64 * x).sin()).sum();
                Complex64::new(v, 0.5 * v)
            })
            .collect();
        let pnorm = h1_norm(s.ops(), &pert);
        let u: Vec<Complex64> = phi.iter().zip(&pert).map(|(f, q)| f + eps / pnorm * q).collect();
        let d = orbital_distance(s.ops(), &u, &phi).unwrap();
        assert!(d.distance > 0.0 && d.distance <= 2.0 * eps);
        let (u_hat, phi_hat) = (s.ops().forward(&u), s.ops().forward(&phi));
        let mut brute = f64::INFINITY;
        for i in 0..200 {
            for j in 0..200 {
                let theta = -0.01 + 0.02 * i as f64 / 199.0;
                let shift = -0.01 + 0.02 * j as f64 / 199.0;
                brute = brute.min(distance_at(s.ops(), &u_hat, &phi_hat, theta, shift));
            }
        }
        assert!(d.distance <= brute + 1e-12, "{} vs {}", d.distance, brute);
    }

    #[test]
    fn distance_invariant_under_symmetries() {
        let (_, s) = dn_state();
        let phi = s.u.clone();
        let u: Vec<Complex64> = phi
            .iter()
            .zip(s.grid().nodes())
            .map(|(f, &x)| f + Complex64::new(0.01 * x.cos(), 0.02 * (3.0 * x).sin()))
            .collect();
        let d0 = orbital_distance(s.ops(), &u, &phi).unwrap().distance;
        let n = u.len();
        let moved: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(1.0, -0.7) * u[(j + 17) % n]).collect();
        let d1 = orbital_distance(s.ops(), &moved, &phi).unwrap().distance;
        assert!((d0 - d1).abs() < 1e-12, "{d0} vs {d1}");
    }

    #[test]
    fn standing_wave_rotates() {
        let (p, _) = dn_state();
        let err = standing_wave_fidelity(&p, 1.0, 1e-3).unwrap();
        assert!(err < 1e-5, "H1 error {err:e}");
    }

    #[test]
    fn energy_error_is_second_order() {
        let (p, s) = dn_state();
        let u0 = Perturbation::Standard.apply(&s.u, &p.grid, 0.05);
        let (coarse, fine) = energy_convergence(&u0, &p.grid, 1, 1.0, 1e-2).unwrap();
        let ratio = coarse / fine;
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}, drifts {coarse:e} {fine:e}");
    }

    #[test]
    fn experiment_rejects_large_epsilon() {
        let spec = ExperimentSpec::new(Family::PeriodicDn, 1, Selector::K(0.5), 10.0, 1.0);
        assert!(matches!(stability_experiment(&spec), Err(Error::Usage(_))));
    }

    #[test]
    fn solitary_box() {
        let p = waves::solve_solitary(2, 0.5).unwrap();
        let g = evolution_grid(&p, None).unwrap();
        let period = g.period().unwrap();
        assert!(period >= 2.0 * p.line_half_length() && period >= MIN_BOX);
        assert!(((period / (2.0 * PI)) - (period / (2.0 * PI)).round()).abs() < 1e-12);
        let phi = torus_profile(&p, &g).unwrap();
        assert!((phi[0].re - p.a).abs() < 1e-15);
        assert!(phi[g.n() / 2].re < 1e-10 * p.a);
    }
}
