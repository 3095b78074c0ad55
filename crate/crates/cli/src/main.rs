use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypflow::classify::{run_sweep, sweep_cases};
use hypflow::flow::{flow_run, oracle_compare, Scheme};
use hypflow::pipeline::{preset, presets, resolve_velocity, SolitonRun, Window};
use hypflow::soliton::conserved_epsilon;
use hypflow::svg::{render_figure, FigureSpec};
use hypflow::verify;
use hypflow::{ClassificationReport, MinkowskiVector, SolitonState, TrajectoryExport};

#[derive(Parser)]
#[command(name = "hypflow", version, about = "Self-similar curve shortening flow in the hyperbolic plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the soliton system, reconstruct the curve and classify it
    Soliton {
        #[command(flatten)]
        source: Source,
        /// Trajectory output (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Also write the classification report as JSON
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Classify a deterministic grid of initial conditions on every level set
    ClassifySweep {
        #[arg(long, default_value_t = 100)]
        per_type: usize,
        /// Comma-separated values of a
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        a: Vec<f64>,
        #[arg(long, default_value_t = 30.0)]
        s_max: f64,
        /// Per-case table output (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Move a soliton by its isometry flow and record CSF diagnostics
    Flow {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0.5)]
        t_max: f64,
        /// Spacing of the diagnostic times
        #[arg(long, default_value_t = 0.05)]
        dt: f64,
        #[arg(long, default_value_t = 1e-4)]
        dt_fd: f64,
        /// Largest accepted CSF residual
        #[arg(long, default_value_t = 1e-5)]
        tol_csf: f64,
        /// Largest accepted curvature-profile deviation
        #[arg(long, default_value_t = 1e-4)]
        tol_profile: f64,
        /// Diagnostics CSV (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the discrete CSF solver against the isometry flow
    Oracle {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0.01)]
        t: f64,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
        #[arg(long, value_enum, default_value_t = SchemeArg::SemiImplicit)]
        scheme: SchemeArg,
        /// Largest accepted Hausdorff distance
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Render a four-panel SVG for one of the presets fig1..fig7
    Figure {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance criteria and print a PASS/FAIL table
    Verify {
        /// Run only these criteria (1-12)
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[arg(long)]
        json: bool,
    },
}

/// Either a named preset or explicit data; explicit flags override the
/// preset's window.
#[derive(Args)]
struct Source {
    /// Start from a figure preset (fig1..fig7)
    #[arg(long)]
    preset: Option<String>,
    /// Velocity vector as x,y,z
    #[arg(long, allow_hyphen_values = true)]
    vtilde: Option<Vector>,
    /// Scale a in vtilde = a v (default: |vtilde|, or 1 for null vtilde)
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tau0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    nu0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mu0: Option<f64>,
    /// Half-width of the arclength window
    #[arg(long)]
    s_max: Option<f64>,
    /// Sample spacing in arclength
    #[arg(long)]
    ds: Option<f64>,
}

#[derive(Clone, Copy)]
struct Vector(MinkowskiVector);

impl FromStr for Vector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected three comma-separated numbers, got '{s}'"));
        }
        let mut c = [0.0; 3];
        for (slot, p) in c.iter_mut().zip(&parts) {
            *slot = p.parse().map_err(|_| format!("'{p}' is not a number"))?;
        }
        Ok(Vector(MinkowskiVector::from_array(c)))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    SemiImplicit,
    Explicit,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Check(String),
    #[error(transparent)]
    Run(#[from] hypflow::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Soliton { source, out, format, report } => soliton(&source, out.as_deref(), format, report.as_deref()),
        Command::ClassifySweep { per_type, a, s_max, out } => classify_sweep(per_type, &a, s_max, out.as_deref()),
        Command::Flow { source, t_max, dt, dt_fd, tol_csf, tol_profile, out } => {
            flow(&source, t_max, dt, dt_fd, tol_csf, tol_profile, out.as_deref())
        }
        Command::Oracle { source, t, dt, scheme, tol } => oracle(&source, t, dt, scheme, tol),
        Command::Figure { name, out } => figure(&name, out.as_deref()),
        Command::Verify { only, json } => verify_cmd(&only, json),
    }
}

fn usage(flag: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{flag}: {msg}"))
}

fn positive(flag: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(flag, format!("must be positive, got {v}")))
    }
}

impl Source {
    fn build(&self) -> CliResult<SolitonRun> {
        let base = match &self.preset {
            Some(name) => {
                Some(preset(name).ok_or_else(|| usage("--preset", format!("unknown preset '{name}' (fig1..fig7)")))?)
            }
            None => None,
        };
        let vtilde = match (self.vtilde, base) {
            (Some(v), _) => v.0,
            (None, Some(p)) => p.vtilde,
            (None, None) => return Err(usage("--vtilde", "required unless --preset is given")),
        };
        let velocity = resolve_velocity(vtilde, self.a).map_err(|e| match self.a {
            Some(_) => usage("--a", e),
            None => usage("--vtilde", e),
        })?;
        let initial = match (self.tau0, self.nu0, self.mu0, base) {
            (Some(t), Some(n), Some(m), _) => SolitonState::new(t, n, m),
            (None, None, None, Some(p)) => p.initial,
            _ => return Err(usage("--tau0/--nu0/--mu0", "give all three, or none with --preset")),
        };
        let eps = conserved_epsilon(initial);
        if (eps - f64::from(velocity.epsilon)).abs() > 1e-8 * (1.0 + initial.mu * initial.mu) {
            return Err(usage(
                "--tau0/--nu0/--mu0",
                format!("tau^2+nu^2-mu^2 = {eps} but the normalized vtilde has <v,v> = {}", velocity.epsilon),
            ));
        }
        let mut window = base.map(|p| p.window).unwrap_or(Window::symmetric(30.0));
        if let Some(s) = self.s_max {
            let s = positive("--s-max", s)?;
            window.s_min = -s;
            window.s_max = s;
            window.s_anchor = window.s_anchor.clamp(-s, s);
        }
        if let Some(ds) = self.ds {
            window.ds = positive("--ds", ds)?;
        }
        Ok(SolitonRun::new(vtilde, self.a, initial, window)?)
    }
}

fn write_out(path: Option<&Path>, body: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, body).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => io::stdout()
            .lock()
            .write_all(body.as_bytes())
            .map_err(|source| CliError::Io { path: "stdout".into(), source }),
    }
}

fn summary(r: &ClassificationReport) -> String {
    let crit = r.mu_critical.map(|c| format!("{:?} at s={:.6}", c.kind, c.s)).unwrap_or_else(|| "none".into());
    let zero = r.mu_zero.map(|s| format!("s={s:.6}")).unwrap_or_else(|| "none".into());
    format!(
        "classification: {} ({:?}, a={}); mu critical point: {crit}; mu zero: {zero}; ends: +inf {:?}, -inf {:?}",
        r.case_label, r.causal_type, r.a, r.ends[0].verdict, r.ends[1].verdict
    )
}

fn soliton(source: &Source, out: Option<&Path>, format: Option<Format>, report: Option<&Path>) -> CliResult<()> {
    let run = source.build()?;
    let export = TrajectoryExport::from_run(&run);
    let format = format.unwrap_or(match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("csv") => Format::Csv,
        _ => Format::Json,
    });
    let body = match format {
        Format::Json => export.to_json() + "\n",
        Format::Csv => export.to_csv(),
    };
    write_out(out, &body)?;
    let classified = match run.classify() {
        Ok(r) => r,
        Err(hypflow::Error::InconsistentWithTheorem(r)) => {
            eprintln!("{}", summary(&r));
            if let Some(p) = report {
                write_out(Some(p), &r.to_json())?;
            }
            return Err(CliError::Check(format!("theorem checks failed: {}", r.failed_checks().join(", "))));
        }
        Err(e @ hypflow::Error::WindowTooShort { .. }) => {
            eprintln!("classification unavailable: {e}");
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    eprintln!("{}", summary(&classified));
    if let Some(p) = report {
        write_out(Some(p), &classified.to_json())?;
    }
    Ok(())
}

fn classify_sweep(per_type: usize, a: &[f64], s_max: f64, out: Option<&Path>) -> CliResult<()> {
    if per_type == 0 {
        return Err(usage("--per-type", "must be at least 1"));
    }
    for &v in a {
        positive("--a", v)?;
    }
    positive("--s-max", s_max)?;
    let cases = sweep_cases(per_type, a);
    let outcomes = run_sweep(&cases, s_max);
    let mut table = String::from("type\ta\ttau0\tnu0\tmu0\tlabel\tconsistent\tfailure\n");
    for o in &outcomes {
        let c = &o.case;
        let label = o.case_label.map(|l| l.to_string()).unwrap_or_else(|| "-".into());
        table.push_str(&format!(
            "{:?}\t{}\t{:.6}\t{:.6}\t{:.6}\t{label}\t{}\t{}\n",
            c.causal_type,
            c.a,
            c.initial.tau,
            c.initial.nu,
            c.initial.mu,
            o.consistent,
            o.failure.as_deref().unwrap_or("")
        ));
    }
    write_out(out, &table)?;
    let mut counts: Vec<(String, usize)> = Vec::new();
    for o in &outcomes {
        let label = o.case_label.map(|l| l.to_string()).unwrap_or_else(|| "error".into());
        match counts.iter_mut().find(|(l, _)| *l == label) {
            Some((_, n)) => *n += 1,
            None => counts.push((label, 1)),
        }
    }
    counts.sort();
    for (label, n) in &counts {
        eprintln!("{label:<32} {n}");
    }
    let bad = outcomes.iter().filter(|o| !o.consistent).count();
    eprintln!("{} cases, {bad} inconsistent", outcomes.len());
    if bad > 0 {
        return Err(CliError::Check(format!("{bad} cases violate the classification")));
    }
    Ok(())
}

fn flow(
    source: &Source,
    t_max: f64,
    dt: f64,
    dt_fd: f64,
    tol_csf: f64,
    tol_profile: f64,
    out: Option<&Path>,
) -> CliResult<()> {
    positive("--t-max", t_max)?;
    positive("--dt", dt)?;
    positive("--dt-fd", dt_fd)?;
    let run = source.build()?;
    let steps = (t_max / dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| (k as f64 * dt).min(t_max)).collect();
    let fr = flow_run(&run.curve, run.vtilde, &times, dt_fd)?;
    write_out(out, &fr.to_csv())?;
    let (csf, prof) = (fr.max_csf_residual(), fr.max_profile_distance());
    eprintln!("max csf residual {csf:.3e} (tol {tol_csf:e}); max profile deviation {prof:.3e} (tol {tol_profile:e})");
    if csf > tol_csf || prof > tol_profile {
        return Err(CliError::Check("flow diagnostics exceed tolerance".into()));
    }
    Ok(())
}

fn oracle(source: &Source, t: f64, dt: f64, scheme: SchemeArg, tol: f64) -> CliResult<()> {
    positive("--t", t)?;
    positive("--dt", dt)?;
    let run = source.build()?;
    let scheme = match scheme {
        SchemeArg::SemiImplicit => Scheme::SemiImplicit,
        SchemeArg::Explicit => Scheme::Explicit,
    };
    let r = oracle_compare(&run.curve, run.vtilde, t, dt, scheme)?;
    println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
    if r.hausdorff > tol {
        return Err(CliError::Check(format!("Hausdorff distance {:.3e} exceeds {tol:e}", r.hausdorff)));
    }
    Ok(())
}

fn figure(name: &str, out: Option<&Path>) -> CliResult<()> {
    let p = preset(name).ok_or_else(|| {
        let names: Vec<&str> = presets().iter().map(|p| p.name).collect();
        usage("figure", format!("unknown preset '{name}' (one of {})", names.join(", ")))
    })?;
    let run = p.run()?;
    let label = run.classify().ok().map(|r| r.case_label);
    let spec = FigureSpec::for_run(&run, format!("{}: {}", p.name, p.caption), label);
    write_out(out, &render_figure(&spec, &run)?)
}

fn verify_cmd(only: &[u8], json: bool) -> CliResult<()> {
    let results: Vec<_> = if only.is_empty() {
        verify::run_all()
    } else {
        only.iter()
            .map(|&id| verify::run_criterion(id).ok_or_else(|| usage("--only", format!("no criterion {id} (1-12)"))))
            .collect::<CliResult<_>>()?
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&results).expect("results serialize"));
    } else {
        print!("{}", verify::table(&results));
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(CliError::Check(format!("{failed} criteria failed")));
    }
    Ok(())
}
