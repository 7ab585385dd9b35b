use clap::{Args, Parser, Subcommand};
use experiments::checks::{self, Suite};
use experiments::config::{Config, ConfigError};
use experiments::emit::{self, EmitError};
use experiments::sweep::{self, SweepError, SweepKind};
use nlplateau::geometry::{alpha_at_infinity, FarField, PixelSet, Window};
use nlplateau::kernel::Kernel;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "nlplateau-exp", version, about = "s-sweeps and invariant checks for the fractional Plateau obstacle problem")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides [output] dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid spacing; overrides [domain] h.
    #[arg(long, global = true)]
    grid_h: Option<f64>,
    /// Solver tolerance; overrides [sweep] tol.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads.
    #[arg(long, global = true, env = "NLPLATEAU_THREADS")]
    threads: Option<usize>,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 20240611)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one problem and write its profile and report.
    Solve {
        /// Order; defaults to [kernel] s, then the first sweep order.
        #[arg(long)]
        s: Option<f64>,
    },
    /// Stickiness sweep over [sweep] s_values.
    SweepStickiness,
    /// Detachment sweep over [sweep] s_values.
    SweepDetachment,
    /// Mass at infinity of the exterior subgraph of the configuration, or of
    /// a stored pixel set.
    Alpha {
        /// PGM image with its JSON sidecar.
        #[arg(long)]
        set: Option<PathBuf>,
        /// Decreasing orders for the numeric estimator.
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.02")]
        s_values: Vec<f64>,
    },
    /// Run the acceptance suites.
    Check {
        /// Comma-separated criterion numbers; all by default.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

enum Failure {
    Config(String),
    Assertion(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<EmitError> for Failure {
    fn from(e: EmitError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Config(c) => Failure::Config(c.to_string()),
            SweepError::Precondition(p) => Failure::Config(format!("precondition: {p}")),
        }
    }
}

fn load(common: &Common) -> Result<Config, Failure> {
    let path = common.config.as_ref().ok_or_else(|| Failure::Config("--config is required".into()))?;
    let mut c = Config::load(path)?;
    if let Some(h) = common.grid_h {
        c.domain.h = h;
    }
    if let Some(t) = common.tol {
        c.sweep.tol = t;
    }
    if let Some(o) = &common.out {
        c.output.dir = o.clone();
    }
    c.validate()?;
    Ok(c)
}

fn write_json(path: &std::path::Path, v: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::Runtime(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let common = &cli.common;
    match &cli.cmd {
        Cmd::Solve { s } => {
            let c = load(common)?;
            let s = s.or(c.kernel.s).or(c.sweep.s_values.first().copied()).ok_or_else(|| Failure::Config("no order given".into()))?;
            if !(s > 0.0 && s < 1.0) {
                return Err(Failure::Config(format!("order {s} outside (0, 1)")));
            }
            let start = Instant::now();
            let (p, r) = sweep::solve_at(&c, s).map_err(Failure::Runtime)?;
            let ms = start.elapsed().as_secs_f64() * 1e3;
            let dir = &c.output.dir;
            std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
            let psi = r.x.iter().zip(&r.lower).map(|(&x, &l)| (l > f64::NEG_INFINITY).then(|| p.obstacle.psi.eval(x))).collect();
            let profile = sweep::Profile { x: r.x.clone(), u: r.u.clone(), psi };
            emit::write_profile(&profile, &dir.join(emit::profile_name(s)))?;
            write_json(&dir.join("report.json"), &serde_json::json!({ "s": s, "wall_ms": ms, "m": p.m, "report": r, "config": c }))?;
            println!("s={s} status={:?} kkt={:.3e} energy={} coincidence={} ({ms:.0} ms)", r.status, r.kkt_residual, r.energy.total, r.coincidence_fraction());
            if r.certified {
                Ok(())
            } else {
                Err(Failure::Assertion(format!("solve not certified: {:?}", r.status)))
            }
        }
        Cmd::SweepStickiness | Cmd::SweepDetachment => {
            let c = load(common)?;
            let kind = if matches!(cli.cmd, Cmd::SweepStickiness) { SweepKind::Stickiness } else { SweepKind::Detachment };
            let report = sweep::run_sweep(&c, kind)?;
            let files = emit::emit_report(&report, &c, &c.output.dir)?;
            for r in &report.rows {
                println!(
                    "s={:<6} coincidence={:?} min_off_A={:?} max_on_Omega={:?} kkt={:?} ({:.0} ms)",
                    r.s, r.coincidence_fraction, r.min_off_a, r.max_on_omega, r.kkt_residual, r.wall_ms
                );
            }
            for a in &report.assertions {
                println!("{} {}: {}", if a.pass { "PASS" } else { "FAIL" }, a.name, a.detail);
            }
            println!("wrote {} files to {}", files.len(), c.output.dir.display());
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Assertion("sweep assertions failed".into()))
            }
        }
        Cmd::Alpha { set, s_values } => {
            let kernel = Kernel::new(1, 0.5).map_err(|e| Failure::Runtime(e.to_string()))?;
            let e = match set {
                Some(path) => PixelSet::read_pgm(path).map_err(|e| Failure::Config(e.to_string()))?,
                None => {
                    let c = load(common)?;
                    let w = Window::centered(2.0 * (c.domain.b - c.domain.a), 256).map_err(|e| Failure::Config(e.to_string()))?;
                    PixelSet::raster(w, FarField::Subgraph { phi: c.exterior() }).map_err(|e| Failure::Config(e.to_string()))?
                }
            };
            let a = alpha_at_infinity(kernel.spec(), &e, s_values).map_err(|e| Failure::Config(e.to_string()))?;
            println!("{}", serde_json::to_string_pretty(&a).map_err(|e| Failure::Runtime(e.to_string()))?);
            if let Some(dir) = &common.out {
                std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
                write_json(&dir.join("alpha.json"), &a)?;
            }
            if a.disagreement {
                Err(Failure::Assertion("numeric estimates disagree".into()))
            } else {
                Ok(())
            }
        }
        Cmd::Check { only } => {
            let out = common.out.clone().unwrap_or_else(|| PathBuf::from("out/check"));
            let mut suite = Suite::new(common.seed, out);
            let ids: Vec<u8> = if only.is_empty() { (1..=13).collect() } else { only.clone() };
            if let Some(bad) = ids.iter().find(|&&i| !(1..=13).contains(&i)) {
                return Err(Failure::Config(format!("no criterion {bad}")));
            }
            let mut failed = 0;
            for id in ids {
                let o = checks::run_criterion(id, &mut suite);
                println!("{o}");
                failed += !o.pass as usize;
            }
            if failed == 0 {
                Ok(())
            } else {
                Err(Failure::Assertion(format!("{failed} criteria failed")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Assertion(m)) => {
            eprintln!("assertion failed: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
