//! Command-line front end: solves single problems, verifies case catalogs and
//! runs slab sweeps.
//!
//! Exit codes: 0 success, 1 an inequality failed, 2 invalid input, 3 a solver
//! did not converge (or, with `--strict`, a catalog case was inconclusive),
//! 4 any other runtime error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use aniso_plap::cheeger::cheeger_estimate;
use aniso_plap::harness::{
    default_catalog, run_catalog, slab_sweep, write_slab_csv, CaseSpec, CaseStatus, Command, RunConfig, SweepConfig,
};
use aniso_plap::pde::{build_mesh, solve_eigen_on, solve_torsion_on, DEFAULT_TOL};
use aniso_plap::{DomainSpec, Error, Grid, MinkowskiNorm};

#[derive(Parser, Debug)]
#[command(name = "aniso-plap", version, about = "Anisotropic p-Laplacian eigenvalues, torsion and Cheeger constants")]
struct Cli {
    /// Output directory for reports and field dumps.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (all cores by default).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the resolved run configuration to this file (`-` for stdout)
    /// and exit without solving.
    #[arg(long, global = true, value_name = "PATH")]
    dump_config: Option<PathBuf>,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Debug, Clone)]
struct ProblemArgs {
    /// `rect:a,k`, `regular:n,R`, `wulff:r,n` or `poly:x,y;x,y;...`.
    #[arg(long)]
    domain: DomainSpec,
    /// `lq:q` or `ellipse:a11,a12,a22`.
    #[arg(long, default_value = "lq:2")]
    norm: MinkowskiNorm,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Grid spacing (default: the domain's default spacing).
    #[arg(long)]
    h: Option<f64>,
    /// Relative solver tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

impl ProblemArgs {
    fn case(&self) -> CaseSpec {
        CaseSpec { id: None, domain: self.domain.clone(), norm: self.norm.clone(), p: self.p, h: self.h, tol: self.tol }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Family {
    Slab,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// First Dirichlet eigenvalue and eigenfunction.
    Eigen(ProblemArgs),
    /// Torsion function, torsional rigidity and its maximum.
    Torsion(ProblemArgs),
    /// Cheeger bounds and the rolling-Wulff estimate.
    Cheeger {
        #[arg(long)]
        domain: DomainSpec,
        #[arg(long, default_value = "lq:2")]
        norm: MinkowskiNorm,
        /// Radii in the coarse sweep.
        #[arg(long, default_value_t = aniso_plap::cheeger::DEFAULT_SWEEP)]
        m: usize,
    },
    /// Evaluate every inequality on a case catalog (the built-in 36 cases
    /// when no config is given).
    Verify {
        config: Option<PathBuf>,
        /// Exit with code 3 when any case is inconclusive.
        #[arg(long)]
        strict: bool,
    },
    /// Optimality ratios along a family of domains.
    Sweep {
        #[arg(long, value_enum, default_value = "slab")]
        family: Family,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// Comma-separated half-lengths.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
        k: Vec<f64>,
        #[arg(long, default_value = "lq:2")]
        norm: MinkowskiNorm,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Execute a configuration file written by `--dump-config`.
    Run { config: PathBuf },
}

enum Failure {
    Inequality,
    Input(String),
    Convergence(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::InvalidArgument(_) | Error::GridTooCoarse { .. } => Failure::Input(e.to_string()),
            Error::NotConverged { .. } => Failure::Convergence(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Inequality) => ExitCode::from(1),
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Convergence(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(4)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut config = match &cli.command {
        Sub::Run { config } | Sub::Verify { config: Some(config), .. } => {
            RunConfig::load(config).map_err(|e| Failure::Input(format!("{}: {e}", config.display())))?
        }
        _ => RunConfig::new(Command::Verify),
    };
    match cli.command {
        Sub::Eigen(args) => {
            config.command = Command::Eigen;
            config.cases = vec![args.case()];
        }
        Sub::Torsion(args) => {
            config.command = Command::Torsion;
            config.cases = vec![args.case()];
        }
        Sub::Cheeger { domain, norm, m } => {
            config.command = Command::Cheeger;
            config.cheeger_sweep = m;
            config.cases = vec![CaseSpec::new(domain, norm, 2.0)];
        }
        Sub::Verify { config: ref path, strict } => {
            config.command = Command::Verify;
            config.strict |= strict;
            if path.is_none() {
                config.cases = default_catalog();
            }
        }
        Sub::Sweep { family: Family::Slab, a, k, norm, p, h, tol } => {
            config.command = Command::Sweep;
            config.sweep = Some(SweepConfig { a, k, norm, p, h, tol });
        }
        Sub::Run { .. } => {}
    }
    if let Some(out) = cli.out {
        config.out = out;
    }
    if cli.jobs.is_some() {
        config.jobs = cli.jobs;
    }

    if let Some(path) = cli.dump_config {
        let text = config.to_toml()?;
        if path.as_os_str() == "-" {
            print!("{text}");
        } else {
            fs::write(&path, text)?;
        }
        return Ok(());
    }
    execute(&config)
}

fn execute(config: &RunConfig) -> Result<(), Failure> {
    if let Some(jobs) = config.jobs {
        if config.command != Command::Verify {
            // Only fails when a pool already exists, which cannot happen here.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
        }
    }
    match config.command {
        Command::Eigen | Command::Torsion | Command::Cheeger => {
            let [case] = config.cases.as_slice() else {
                return Err(Failure::Input(format!("{:?} takes exactly one case", config.command)));
            };
            case.validate()?;
            fs::create_dir_all(&config.out)?;
            match config.command {
                Command::Eigen => eigen(case, &config.out),
                Command::Torsion => torsion(case, &config.out),
                _ => cheeger(case, config.cheeger_sweep, &config.out),
            }
        }
        Command::Verify => verify(config),
        Command::Sweep => {
            let Some(s) = &config.sweep else {
                return Err(Failure::Input("sweep needs a [sweep] section".into()));
            };
            let rows = slab_sweep(s.a, &s.norm, s.p, &s.k, s.h, s.tol)?;
            fs::create_dir_all(&config.out)?;
            write_slab_csv(&rows, fs::File::create(config.out.join("slab_sweep.csv"))?)?;
            write_slab_csv(&rows, std::io::stdout().lock())?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct EigenSummary<'a> {
    domain: String,
    norm: String,
    p: f64,
    h: f64,
    lambda: f64,
    iterations: usize,
    residual: f64,
    field: &'a str,
}

#[derive(Serialize)]
struct TorsionSummary<'a> {
    domain: String,
    norm: String,
    p: f64,
    h: f64,
    torsion: f64,
    max: f64,
    dual: f64,
    iterations: usize,
    residual: f64,
    field: &'a str,
}

fn spacing(case: &CaseSpec) -> Result<(aniso_plap::ConvexPolygon, f64), Failure> {
    let domain = case.domain.build(&case.norm)?;
    let h = case.h.unwrap_or_else(|| Grid::default_spacing(&domain));
    Ok((domain, h))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Other(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn eigen(case: &CaseSpec, out: &Path) -> Result<(), Failure> {
    let (domain, h) = spacing(case)?;
    let e = solve_eigen_on(build_mesh(&domain, h)?, domain.provenance(), &case.norm, case.p, case.tol)?;
    let field = "eigenfunction.csv";
    e.u.write_csv(out.join(field))?;
    let summary = EigenSummary {
        domain: case.domain.to_string(),
        norm: case.norm.to_string(),
        p: case.p,
        h,
        lambda: e.lambda,
        iterations: e.iterations,
        residual: e.residual,
        field,
    };
    write_json(&out.join("eigen.json"), &summary)?;
    println!("lambda     = {:.10}", e.lambda);
    println!("iterations = {}", e.iterations);
    println!("residual   = {:.3e}", e.residual);
    println!("h          = {h}");
    Ok(())
}

fn torsion(case: &CaseSpec, out: &Path) -> Result<(), Failure> {
    let (domain, h) = spacing(case)?;
    let t = solve_torsion_on(build_mesh(&domain, h)?, domain.provenance(), &case.norm, case.p, case.tol)?;
    let field = "torsion.csv";
    t.v.write_csv(out.join(field))?;
    let summary = TorsionSummary {
        domain: case.domain.to_string(),
        norm: case.norm.to_string(),
        p: case.p,
        h,
        torsion: t.torsion,
        max: t.max,
        dual: t.dual,
        iterations: t.iterations,
        residual: t.residual,
        field,
    };
    write_json(&out.join("torsion.json"), &summary)?;
    println!("T          = {:.10}", t.torsion);
    println!("Mv         = {:.10}", t.max);
    println!("iterations = {}", t.iterations);
    println!("residual   = {:.3e}", t.residual);
    println!("h          = {h}");
    Ok(())
}

fn cheeger(case: &CaseSpec, m: usize, out: &Path) -> Result<(), Failure> {
    let domain = case.domain.build(&case.norm)?;
    let c = cheeger_estimate(&domain, &case.norm, m)?;
    c.write_trace(out.join("cheeger_trace.csv"))?;
    write_json(&out.join("cheeger.json"), &c)?;
    println!("h_est  = {:.10}", c.h_est);
    println!("r_star = {:.10}", c.r_star);
    println!("bounds = [{:.10}, {:.10}]", c.lower, c.upper);
    if c.fallback {
        println!("note: every erosion was empty; h_est is the upper bound");
    }
    Ok(())
}

fn verify(config: &RunConfig) -> Result<(), Failure> {
    let report = run_catalog(&config.cases, &config.tolerances, config.jobs)?;
    report.write(&config.out)?;
    let mut stdout = std::io::stdout().lock();
    for case in &report.cases {
        let status = match case.status {
            CaseStatus::Pass => "pass",
            CaseStatus::Fail => "FAIL",
            CaseStatus::Inconclusive => "inconclusive",
        };
        writeln!(stdout, "{status:12} {}", case.id)?;
        for r in case.failures() {
            writeln!(stdout, "             {}: slack {:.3e} below -{:.3e}", r.id, r.slack, r.tolerance)?;
        }
    }
    let s = report.summary;
    writeln!(
        stdout,
        "{} cases: {} passed, {} failed, {} inconclusive; report in {}",
        s.cases,
        s.passed,
        s.failed,
        s.inconclusive,
        config.out.display()
    )?;
    if s.failed > 0 {
        Err(Failure::Inequality)
    } else if config.strict && s.inconclusive > 0 {
        Err(Failure::Convergence(format!("{} inconclusive cases", s.inconclusive)))
    } else {
        Ok(())
    }
}
