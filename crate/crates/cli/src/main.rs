use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qgeo::report::Report;
use qgeo::suites::{Suite, SuiteOptions};
use qgeo_cli::commands::{self, RenormArgs};
use qgeo_cli::{exit_code, output, ConfigError, SceneFile};

#[derive(Parser)]
#[command(name = "qgeo", version, about = "Evaluate and verify extrinsic conformal submanifold invariants")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Override every tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Write the JSON report here (`-` for stdout).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the CSV table here (`-` for stdout).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// List registered invariants, catalog scenes and suites.
    List,
    /// Print every valid invariant of a scene.
    Eval {
        #[arg(long, conflicts_with = "catalog")]
        scene: Option<PathBuf>,
        /// Catalog entry, or `all`.
        #[arg(long)]
        catalog: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_name = "SUITE", conflicts_with = "suite")]
        positional: Option<String>,
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, default_value_t = 4)]
        upsilon_degree: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Renormalized area of a totally geodesic hemisphere.
    Renorm {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 1e-3)]
        eps_min: f64,
        #[arg(long, default_value_t = 1e-1)]
        eps_max: f64,
        #[arg(long, default_value_t = 12)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn emit(report: &Report, common: &Common) -> anyhow::Result<()> {
    let to_stdout = |p: &Option<PathBuf>| p.as_deref().is_some_and(|p| p.as_os_str() == "-");
    if !to_stdout(&common.json) && !to_stdout(&common.csv) {
        print!("{}", output::table(report));
    }
    if let Some(p) = &common.json {
        output::write_to(p, &output::to_json(report)?)?;
    }
    if let Some(p) = &common.csv {
        output::write_to(p, &output::to_csv(report)?)?;
    }
    for c in &report.checks {
        if let Some(n) = c.note.as_deref().filter(|n| n.contains("ill-conditioned")) {
            eprintln!("warning: {n}");
        }
    }
    Ok(())
}

fn check_tol(common: &Common) -> anyhow::Result<()> {
    match common.tol {
        Some(t) if !(t > 0.0) => anyhow::bail!(ConfigError(format!("--tol must be positive, got {t}"))),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (report, common) = match cli.cmd {
        Cmd::List => {
            print!("{}", commands::list());
            return Ok(true);
        }
        Cmd::Eval { scene, catalog, common } => {
            check_tol(&common)?;
            let files = match (scene, catalog.as_deref()) {
                (Some(p), None) => vec![SceneFile::load(&p)?],
                (None, Some("all")) => commands::catalog_files(common.seed),
                (None, Some(c)) => vec![SceneFile::catalog(c, common.seed)],
                _ => anyhow::bail!(ConfigError("eval needs --scene FILE or --catalog NAME".into())),
            };
            (commands::eval(&files, common.seed, common.tol)?, common)
        }
        Cmd::Verify { positional, suite, upsilon_degree, common } => {
            check_tol(&common)?;
            let name = positional.or(suite).unwrap_or_else(|| "all".into());
            let suite: Suite = name.parse().map_err(|e: qgeo::GeoError| ConfigError(e.to_string()))?;
            let opts = SuiteOptions { seed: common.seed, upsilon_degree };
            (commands::verify(suite, &opts, common.tol), common)
        }
        Cmd::Renorm { k, n, radius, eps_min, eps_max, samples, common } => {
            check_tol(&common)?;
            let a = RenormArgs { k, n, radius, eps_min, eps_max, samples };
            (commands::renorm(&a, common.tol)?, common)
        }
    };
    emit(&report, &common)?;
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    // jet budget problems surface here rather than deep inside an evaluation
    if let Err(e) = qgeo::config::jet_order_max() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
