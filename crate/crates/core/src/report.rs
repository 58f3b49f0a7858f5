//! Stability verdicts from the counting rule `n(𝓛) = 1`, `z(𝓛) = 2`, positive
//! VK slope; instability in the even subspace from a negative slope with even
//! counts `(1, 1)`. Plus the parameter-curve tables.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{self, DEFAULT_STEP};
use crate::spectral::{self, ConfirmedSpectrum};
use crate::waves::{self, Family, Selector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlopeSign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
    #[serde(rename = "0-flagged")]
    ZeroFlagged,
}

impl SlopeSign {
    /// A slope smaller than ten times its Richardson error has no trustworthy sign.
    pub fn classify(slope: f64, richardson_error: f64) -> Self {
        if !slope.is_finite() || !richardson_error.is_finite() || slope.abs() < 10.0 * richardson_error || slope == 0.0 {
            SlopeSign::ZeroFlagged
        } else if slope > 0.0 {
            SlopeSign::Positive
        } else {
            SlopeSign::Negative
        }
    }
}

impl fmt::Display for SlopeSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlopeSign::Positive => "+",
            SlopeSign::Negative => "-",
            SlopeSign::ZeroFlagged => "0-flagged",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    #[serde(rename = "stable_H1")]
    StableH1,
    UnstableEvenSubspace,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::StableH1 => "stable_H1",
            Verdict::UnstableEvenSubspace => "unstable_even_subspace",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Wave,
    Spectrum,
    Resolution,
    Slope,
    Theta,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: Stage,
    pub message: String,
    /// Exit code of the underlying error.
    pub code: i32,
}

/// Everything the rule looks at. Missing values (after a failed stage) are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub n_neg: Option<usize>,
    pub z_kernel: Option<usize>,
    pub even_n_neg: Option<usize>,
    pub even_z_kernel: Option<usize>,
    /// Counts agree at the doubled resolution.
    pub confirmed: Option<bool>,
    pub slope: Option<f64>,
    pub richardson_error: Option<f64>,
    pub theta: Option<f64>,
    pub failure: Option<StageFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub family: Family,
    pub r: u32,
    pub parameter: Option<f64>,
    pub omega: Option<f64>,
    pub n_neg_l: Option<usize>,
    pub z_kernel_l: Option<usize>,
    pub slope_sign: Option<SlopeSign>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    pub verdict: Verdict,
    pub reason: String,
    pub evidence: Evidence,
    /// The spectrum and slope artifacts the evidence was read from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<ConfirmedSpectrum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<functionals::VkSlopeResult>,
}

impl StabilityVerdict {
    /// Re-applies the rule to the stored evidence.
    pub fn recompute(&self) -> (Verdict, String) {
        classify(&self.evidence)
    }

    /// 0 for a definite verdict, 2 when the wave itself does not exist, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match (&self.verdict, &self.evidence.failure) {
            (Verdict::Inconclusive, Some(f)) if f.stage == Stage::Wave && f.code == 2 => 2,
            (Verdict::Inconclusive, _) => 3,
            _ => 0,
        }
    }
}

/// The counting rule. Pure: the output depends on `e` only.
pub fn classify(e: &Evidence) -> (Verdict, String) {
    let inconclusive = |why: String| (Verdict::Inconclusive, why);
    if let Some(f) = &e.failure {
        return inconclusive(format!("{:?} stage failed: {}", f.stage, f.message).to_lowercase());
    }
    let (Some(n_neg), Some(z), Some(en), Some(ez), Some(confirmed), Some(slope), Some(err)) =
        (e.n_neg, e.z_kernel, e.even_n_neg, e.even_z_kernel, e.confirmed, e.slope, e.richardson_error)
    else {
        return inconclusive("incomplete evidence".into());
    };
    if !confirmed {
        return inconclusive("counts change at doubled resolution".into());
    }
    match SlopeSign::classify(slope, err) {
        SlopeSign::ZeroFlagged => inconclusive(format!("slope {slope:e} within ten Richardson errors ({err:e})")),
        SlopeSign::Positive if n_neg == 1 && z == 2 => {
            (Verdict::StableH1, "n(L) = 1, z(L) = 2, slope positive".into())
        }
        SlopeSign::Negative if en == 1 && ez == 1 => {
            (Verdict::UnstableEvenSubspace, "even counts n = 1, z = 1, slope negative".into())
        }
        s => inconclusive(format!(
            "counting rule does not apply: n(L) = {n_neg}, z(L) = {z}, even ({en}, {ez}), slope {s}"
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictOptions {
    pub n: Option<usize>,
    pub tol_kernel: Option<f64>,
    pub step: f64,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        Self { n: None, tol_kernel: None, step: DEFAULT_STEP }
    }
}

pub fn verdict(family: Family, r: u32, at: Selector) -> StabilityVerdict {
    verdict_with(family, r, at, &VerdictOptions::default())
}

/// Wave, spectrum at two resolutions, VK slope and (periodic) θ, then [`classify`].
pub fn verdict_with(family: Family, r: u32, at: Selector, opts: &VerdictOptions) -> StabilityVerdict {
    let fail = |stage: Stage, e: &Error| StageFailure { stage, message: e.to_string(), code: e.exit_code() };
    let mut evidence = Evidence {
        n_neg: None,
        z_kernel: None,
        even_n_neg: None,
        even_z_kernel: None,
        confirmed: None,
        slope: None,
        richardson_error: None,
        theta: None,
        failure: None,
    };
    let mut out = StabilityVerdict {
        family,
        r,
        parameter: None,
        omega: None,
        n_neg_l: None,
        z_kernel_l: None,
        slope_sign: None,
        theta: None,
        verdict: Verdict::Inconclusive,
        reason: String::new(),
        evidence: evidence.clone(),
        spectrum: None,
        slope: None,
    };
    let finish = |mut out: StabilityVerdict, evidence: Evidence| {
        let (v, why) = classify(&evidence);
        out.verdict = v;
        out.reason = why;
        out.n_neg_l = evidence.n_neg;
        out.z_kernel_l = evidence.z_kernel;
        out.slope_sign = evidence.slope.zip(evidence.richardson_error).map(|(s, e)| SlopeSign::classify(s, e));
        out.theta = evidence.theta;
        out.evidence = evidence;
        out
    };

    let params = match waves::solve(family, r, at) {
        Ok(p) => p,
        Err(e) => {
            evidence.failure = Some(fail(Stage::Wave, &e));
            return finish(out, evidence);
        }
    };
    out.parameter = Some(params.parameter());
    out.omega = Some(params.omega);

    match spectral::confirmed_spectrum(&params, opts.n, opts.tol_kernel) {
        Ok(s) => {
            evidence.n_neg = Some(s.base.block.n_neg);
            evidence.z_kernel = Some(s.base.block.z_kernel);
            evidence.even_n_neg = Some(s.base.even_block.n_neg);
            evidence.even_z_kernel = Some(s.base.even_block.z_kernel);
            evidence.confirmed = Some(s.confirmed);
            out.spectrum = Some(s);
        }
        Err(e) => {
            evidence.failure = Some(fail(Stage::Spectrum, &e));
            return finish(out, evidence);
        }
    }

    match functionals::vk_slope(family, r, at, opts.step) {
        Ok(s) => {
            evidence.slope = Some(s.slope);
            evidence.richardson_error = Some(s.richardson_error);
            out.slope = Some(s);
        }
        Err(e) => {
            evidence.failure = Some(fail(Stage::Slope, &e));
            return finish(out, evidence);
        }
    }

    if family.is_periodic() {
        match spectral::floquet_theta(&params) {
            Ok(t) if t.theta.is_finite() => evidence.theta = Some(t.theta),
            Ok(t) => {
                let e = Error::Numerical(format!("non-finite theta {}", t.theta));
                evidence.failure = Some(fail(Stage::Theta, &e));
            }
            Err(e) => evidence.failure = Some(fail(Stage::Theta, &e)),
        }
    }
    finish(out, evidence)
}

// ---------------------------------------------------------------------------
// Figures

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    NonMonotone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignPattern {
    Positive,
    Negative,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub monotonicity: Monotonicity,
    pub sign: SignPattern,
}

impl ColumnSummary {
    pub fn of(values: &[f64]) -> Self {
        let up = values.windows(2).all(|w| w[1] > w[0]);
        let down = values.windows(2).all(|w| w[1] < w[0]);
        let monotonicity = match (up, down) {
            (true, _) => Monotonicity::Increasing,
            (_, true) => Monotonicity::Decreasing,
            _ => Monotonicity::NonMonotone,
        };
        let sign = if values.iter().all(|&v| v > 0.0) {
            SignPattern::Positive
        } else if values.iter().all(|&v| v < 0.0) {
            SignPattern::Negative
        } else {
            SignPattern::Mixed
        };
        Self { monotonicity, sign }
    }

    fn label(&self) -> String {
        let m = match self.monotonicity {
            Monotonicity::Increasing => "increasing",
            Monotonicity::Decreasing => "decreasing",
            Monotonicity::NonMonotone => "non_monotone",
        };
        let s = match self.sign {
            SignPattern::Positive => "positive",
            SignPattern::Negative => "negative",
            SignPattern::Mixed => "mixed",
        };
        format!("{m}|{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Points of the abscissa where a member could not be built.
    pub skipped: Vec<f64>,
}

impl Figure {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Summaries of every column after the abscissa.
    pub fn summaries(&self) -> Vec<(String, ColumnSummary)> {
        self.columns
            .iter()
            .skip(1)
            .map(|c| (c.clone(), ColumnSummary::of(&self.column(c).expect("own column"))))
            .collect()
    }

    /// Header, data rows, then a `summary` row of `monotonicity|sign` labels.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        let labels: Vec<String> = self.summaries().iter().map(|(_, s)| s.label()).collect();
        writeln!(out, "summary,{}", labels.join(","))
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn table(name: &str, columns: &[&str], xs: &[f64], f: impl Fn(f64) -> Result<Vec<f64>>) -> Figure {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &x in xs {
        match f(x) {
            Ok(v) => rows.push(std::iter::once(x).chain(v).collect()),
            Err(_) => skipped.push(x),
        }
    }
    Figure { name: name.into(), columns: columns.iter().map(|s| s.to_string()).collect(), rows, skipped }
}

const CURVE_POINTS: usize = 40;
const OMEGA_MAX: f64 = 4.0;

/// Parameter curves, τ, γ and mass curves, computed in memory.
pub fn figures() -> Result<Vec<Figure>> {
    let mut out = Vec::new();
    for r in [1u32, 2, 4] {
        let w0 = waves::solitary_threshold(r)?;
        let ws = linspace(w0 * 1.001, OMEGA_MAX, CURVE_POINTS);
        out.push(table(&format!("solitary_ab_r{r}"), &["omega", "a", "b"], &ws, |w| {
            waves::solve_solitary(r, w).map(|p| vec![p.a, p.b])
        }));
        out.push(table(&format!("solitary_mass_r{r}"), &["omega", "a2_over_b"], &ws, |w| {
            waves::solve_solitary(r, w).map(|p| vec![p.a * p.a / p.b])
        }));
    }
    let k_dn = linspace(0.02, 0.97 * waves::dn_critical_modulus(), CURVE_POINTS);
    let k_q = linspace(0.05, 0.99, CURVE_POINTS);
    for (family, ks) in [(Family::PeriodicDn, &k_dn), (Family::PeriodicDnQuotient, &k_q)] {
        let r = family.periodic_exponent().expect("periodic");
        out.push(table(&format!("periodic_params_r{r}"), &["k", "a", "omega"], ks, |k| {
            waves::solve_periodic(family, k).map(|p| vec![p.a, p.omega])
        }));
        out.push(table(&format!("periodic_mass_r{r}"), &["k", "mass"], ks, |k| {
            waves::solve_periodic(family, k).and_then(|p| functionals::mass_closed_form(&p)).map(|m| vec![m])
        }));
    }
    out.push(table("tau", &["k", "tau1", "tau2", "tau"], &k_dn, |k| {
        functionals::closed_form_tau(k).map(|t| vec![t.tau1, t.tau2, t.tau])
    }));
    out.push(table("gamma", &["k", "gamma"], &k_q, |k| functionals::gamma(k).map(|g| vec![g])));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureFile {
    pub name: String,
    pub path: PathBuf,
    pub rows: usize,
    pub summary: Vec<(String, ColumnSummary)>,
}

/// Writes one CSV per figure into `dir` (created if missing).
pub fn reproduce_figures(dir: &Path) -> Result<Vec<FigureFile>> {
    fs::create_dir_all(dir).map_err(|e| Error::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for fig in figures()? {
        let path = dir.join(format!("{}.csv", fig.name));
        let file = fs::File::create(&path).map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))?;
        fig.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))?;
        files.push(FigureFile { name: fig.name.clone(), path, rows: fig.rows.len(), summary: fig.summaries() });
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn good() -> Evidence {
        Evidence {
            n_neg: Some(1),
            z_kernel: Some(2),
            even_n_neg: Some(1),
            even_z_kernel: Some(1),
            confirmed: Some(true),
            slope: Some(0.3),
            richardson_error: Some(1e-9),
            theta: None,
            failure: None,
        }
    }

    #[test]
    fn rule_cases() {
        assert_eq!(classify(&good()).0, Verdict::StableH1);
        let mut e = good();
        e.slope = Some(-0.3);
        assert_eq!(classify(&e).0, Verdict::UnstableEvenSubspace);
        e.even_n_neg = Some(2);
        assert_eq!(classify(&e).0, Verdict::Inconclusive);
        let mut e = good();
        e.slope = Some(5e-9);
        let (v, why) = classify(&e);
        assert_eq!(v, Verdict::Inconclusive);
        assert!(why.contains("Richardson"));
        let mut e = good();
        e.confirmed = Some(false);
        assert_eq!(classify(&e).0, Verdict::Inconclusive);
        let mut e = good();
        e.failure = Some(StageFailure { stage: Stage::Slope, message: "x".into(), code: 2 });
        assert!(classify(&e).1.contains("slope"));
    }

    #[test]
    fn sign_classes() {
        assert_eq!(SlopeSign::classify(1.0, 0.01), SlopeSign::Positive);
        assert_eq!(SlopeSign::classify(-1.0, 0.01), SlopeSign::Negative);
        assert_eq!(SlopeSign::classify(1.0, 0.2), SlopeSign::ZeroFlagged);
        assert_eq!(SlopeSign::classify(f64::NAN, 0.0), SlopeSign::ZeroFlagged);
        assert_eq!(serde_json::to_string(&SlopeSign::ZeroFlagged).unwrap(), "\"0-flagged\"");
        assert_eq!(serde_json::to_string(&Verdict::StableH1).unwrap(), "\"stable_H1\"");
    }

    #[test]
    fn nonexistent_wave_is_inconclusive_with_stage() {
        let v = verdict(Family::Solitary, 1, Selector::Omega(0.3));
        assert_eq!(v.verdict, Verdict::Inconclusive);
        assert_eq!(v.evidence.failure.as_ref().unwrap().stage, Stage::Wave);
        assert_eq!(v.exit_code(), 2);
    }

    #[test]
    fn column_summaries() {
        assert_eq!(ColumnSummary::of(&[1.0, 2.0, 3.0]).monotonicity, Monotonicity::Increasing);
        assert_eq!(ColumnSummary::of(&[-1.0, -2.0]).sign, SignPattern::Negative);
        assert_eq!(ColumnSummary::of(&[1.0, 1.0]).monotonicity, Monotonicity::NonMonotone);
        assert_eq!(ColumnSummary::of(&[-1.0, 2.0]).sign, SignPattern::Mixed);
    }
}
