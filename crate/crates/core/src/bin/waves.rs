use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use skwaves_core::evolution::{self, ExperimentSpec};
use skwaves_core::functionals::{self, DEFAULT_STEP};
use skwaves_core::report::{self, SlopeSign, VerdictOptions};
use skwaves_core::spectral;
use skwaves_core::waves::{self, Family, Selector};
use skwaves_core::{Error, Result};

#[derive(Parser)]
#[command(name = "waves", version, about = "Standing waves of the Schrödinger–Kirchhoff equation")]
struct Cli {
    /// JSON file with default values for any flag (flags win).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a profile CSV.
    Profile(Opts),
    /// Spectral counts as a JSON report.
    Spectrum(Opts),
    /// Floquet constant of a periodic wave.
    Theta(Opts),
    /// Vakhitov–Kolokolov slope with its Richardson error.
    VkSlope(Opts),
    /// Stability verdict as JSON.
    Verdict(Opts),
    /// Perturb, evolve and log the orbital distance.
    Evolve(Opts),
    /// Write the parameter-curve and sweep tables.
    Figures(Opts),
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct Opts {
    #[arg(long)]
    family: Option<Family>,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(alias = "tol_kernel")]
    tol_kernel: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    t_final: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Steps between trajectory records.
    #[arg(long)]
    #[serde(alias = "log_every")]
    log_every: Option<usize>,
    /// Even perturbation and rotation-only distance.
    #[arg(long)]
    even: bool,
}

impl Opts {
    fn or(self, cfg: Opts) -> Opts {
        Opts {
            family: self.family.or(cfg.family),
            r: self.r.or(cfg.r),
            omega: self.omega.or(cfg.omega),
            k: self.k.or(cfg.k),
            n: self.n.or(cfg.n),
            out: self.out.or(cfg.out),
            tol_kernel: self.tol_kernel.or(cfg.tol_kernel),
            step: self.step.or(cfg.step),
            epsilon: self.epsilon.or(cfg.epsilon),
            t_final: self.t_final.or(cfg.t_final),
            dt: self.dt.or(cfg.dt),
            log_every: self.log_every.or(cfg.log_every),
            even: self.even || cfg.even,
        }
    }

    fn family(&self) -> Result<Family> {
        self.family.ok_or_else(|| Error::Usage("--family is required".into()))
    }

    fn r(&self, family: Family) -> Result<u32> {
        self.r
            .or(family.periodic_exponent())
            .ok_or_else(|| Error::Usage("--r is required".into()))
    }

    fn selector(&self) -> Result<Selector> {
        match (self.omega, self.k) {
            (Some(w), None) => Ok(Selector::Omega(w)),
            (None, Some(k)) => Ok(Selector::K(k)),
            (Some(_), Some(_)) => Err(Error::Usage("give either --omega or --k, not both".into())),
            (None, None) => Err(Error::Usage("one of --omega or --k is required".into())),
        }
    }

    fn wave(&self) -> Result<(Family, u32, Selector)> {
        let family = self.family()?;
        Ok((family, self.r(family)?, self.selector()?))
    }

    fn out_dir(&self) -> Result<&Path> {
        self.out.as_deref().ok_or_else(|| Error::Usage("--out DIR is required".into()))
    }
}

fn load_config(path: &Path) -> Result<Opts> {
    let text = fs::read_to_string(path).map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Usage(format!("bad config {}: {e}", path.display())))
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> Error + '_ {
    move |e| Error::Usage(format!("cannot write {}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn emit_json(value: &impl serde::Serialize, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Numerical(e.to_string()))?;
    if let Some(path) = out {
        let mut f = create(path)?;
        writeln!(f, "{text}").map_err(io_err(path))?;
    }
    say(&text);
    Ok(())
}

/// Line to stdout; a closed pipe is not an error.
fn say(line: &str) {
    let _ = writeln!(io::stdout().lock(), "{line}");
}

fn run(command: Command, cfg: Opts) -> Result<i32> {
    match command {
        Command::Profile(o) => {
            let o = o.or(cfg);
            let (family, r, at) = o.wave()?;
            let p = waves::build_profile(family, r, at, o.n)?;
            match &o.out {
                Some(path) => p.write_csv(create(path)?).map_err(io_err(path))?,
                None => match p.write_csv(io::stdout().lock()) {
                    Err(e) if e.kind() != io::ErrorKind::BrokenPipe => return Err(io_err(Path::new("stdout"))(e)),
                    _ => {}
                },
            }
        }
        Command::Spectrum(o) => {
            let o = o.or(cfg);
            let (family, r, at) = o.wave()?;
            let params = waves::solve(family, r, at)?;
            let report = spectral::spectrum_report(&params, o.n, o.tol_kernel)?;
            emit_json(&report, o.out.as_deref())?;
        }
        Command::Theta(o) => {
            let o = o.or(cfg);
            let (family, r, at) = o.wave()?;
            if !family.is_periodic() {
                return Err(Error::Usage("theta is defined for the periodic families".into()));
            }
            let params = waves::solve(family, r, at)?;
            let t = spectral::floquet_theta(&params)?;
            say(&format!("theta {:.10}", t.theta));
            say(&format!("omega {:.10}", params.omega));
            say(&format!("k {:.10}", params.k.unwrap_or(f64::NAN)));
        }
        Command::VkSlope(o) => {
            let o = o.or(cfg);
            let (family, r, at) = o.wave()?;
            let s = functionals::vk_slope(family, r, at, o.step.unwrap_or(DEFAULT_STEP))?;
            let sign = SlopeSign::classify(s.slope, s.richardson_error);
            let mut v = serde_json::to_value(&s).map_err(|e| Error::Numerical(e.to_string()))?;
            v["sign"] = serde_json::json!(sign);
            emit_json(&v, o.out.as_deref())?;
        }
        Command::Verdict(o) => {
            let o = o.or(cfg);
            let (family, r, at) = o.wave()?;
            let opts = VerdictOptions { n: o.n, tol_kernel: o.tol_kernel, step: o.step.unwrap_or(DEFAULT_STEP) };
            let v = report::verdict_with(family, r, at, &opts);
            emit_json(&v, o.out.as_deref())?;
            return Ok(v.exit_code());
        }
        Command::Evolve(o) => {
            let o = o.or(cfg);
            let (family, r, at) = o.wave()?;
            let dir = o.out_dir()?;
            let mut spec = ExperimentSpec::new(family, r, at, o.epsilon.unwrap_or(1e-2), o.t_final.unwrap_or(20.0));
            if o.even {
                spec = spec.even();
            }
            spec.dt = o.dt.unwrap_or(spec.dt);
            spec.n = o.n;
            spec.log_every = o.log_every.unwrap_or(spec.log_every);
            let res = evolution::stability_experiment(&spec)?;
            let traj = dir.join("trajectory.csv");
            evolution::write_trajectory_csv(&res.summary.records, create(&traj)?).map_err(io_err(&traj))?;
            emit_json(&evolution::manifest(&res), Some(&dir.join("manifest.json")))?;
            if res.summary.blow_up.is_some() {
                eprintln!("blow-up at t = {}", res.summary.blow_up.unwrap());
                return Ok(4);
            }
        }
        Command::Figures(o) => {
            let o = o.or(cfg);
            let dir = o.out_dir()?;
            for f in report::reproduce_figures(dir)? {
                say(&format!("{} ({} rows)", f.path.display(), f.rows));
            }
            for (family, r, params) in sweep_grids()? {
                let rows = functionals::sweep(family, r, &params, o.step.unwrap_or(DEFAULT_STEP));
                let path = dir.join(format!("sweep_{}_r{r}.csv", family.short_name()));
                functionals::write_sweep_csv(&rows, create(&path)?).map_err(io_err(&path))?;
                say(&format!("{} ({} rows)", path.display(), rows.len()));
            }
        }
    }
    Ok(0)
}

fn sweep_grids() -> Result<Vec<(Family, u32, Vec<f64>)>> {
    let grid = |lo: f64, hi: f64| (0..20).map(|i| lo + (hi - lo) * i as f64 / 19.0).collect::<Vec<_>>();
    let mut out = Vec::new();
    for r in [1, 2, 4] {
        out.push((Family::Solitary, r, grid(1.01 * waves::solitary_threshold(r)?, 4.0)));
    }
    out.push((Family::PeriodicDn, 1, grid(0.05, 0.95 * waves::dn_critical_modulus())));
    out.push((Family::PeriodicDnQuotient, 2, grid(0.05, 0.98)));
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.config.as_deref().map(load_config).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli.command, cfg) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
