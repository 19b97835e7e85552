use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bergman_lab::config::RunConfig;
use bergman_lab::report::{run_bergman, run_curvature, write_bergman, write_curvature};
use bergman_lab::scenario::{ScenarioId, ScenarioParams};
use bergman_lab::verify::{exit_code, run_suite, table, Suite};

/// Family Bergman kernels and direct-image curvature on a model sphere fibration.
#[derive(Parser)]
#[command(name = "bergman-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the catalog scenarios and their default parameters.
    ScenarioList,
    /// Bergman densities and fits of rho_p / p against (b0, b1).
    RunBergman {
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Direct-image curvature and fits of p^-2 Theta(x, x) against (b20, b21).
    RunCurvature {
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Run a verification suite: 0 pass, 1 tolerance failure, 2 breakdown.
    Verify {
        #[arg(long, value_name = "NAME", default_value = "all")]
        suite: String,
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
    },
}

fn load(path: &Option<PathBuf>) -> bergman_lab::Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("BERGMAN_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("BERGMAN_LAB_THREADS={v}: expected a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn scenario_list() {
    let d = ScenarioParams::default();
    println!("{:<14} description", "id");
    for id in ScenarioId::CATALOG {
        println!("{:<14} {}", id.as_str(), id.describe());
    }
    println!(
        "\ndefaults: scenario.c={} scenario.eps={} scenario.eta={} scenario.s_max={} scenario.twist=none",
        d.c, d.eps, d.eta, d.s_max
    );
    println!("scenario.twist=<delta> adds the auxiliary weight psi = delta/(1+|z|^2)");
}

fn run(kind: &str, config: &Option<PathBuf>, out: &Path) -> bergman_lab::Result<bool> {
    let cfg = load(config)?;
    let (paths, pass) = if kind == "bergman" {
        let r = run_bergman(&cfg)?;
        (write_bergman(&r, out, cfg.plot)?, r.pass)
    } else {
        let r = run_curvature(&cfg)?;
        (write_curvature(&r, out, cfg.plot)?, r.pass)
    };
    for p in paths {
        println!("wrote {}", p.display());
    }
    println!("checks: {}", if pass { "pass" } else { "some checks fail, see summary" });
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match cli.command {
        Command::ScenarioList => {
            scenario_list();
            ExitCode::SUCCESS
        }
        Command::RunBergman { config, out } => match run("bergman", &config, &out) {
            Ok(_) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::RunCurvature { config, out } => match run("curvature", &config, &out) {
            Ok(_) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Verify { suite, config } => {
            let outcome = Suite::parse(&suite)
                .and_then(|s| load(&config).map(|c| (s, c)))
                .and_then(|(s, c)| run_suite(s, &c));
            match &outcome {
                Ok(criteria) => print!("{}", table(criteria)),
                Err(e) => eprintln!("breakdown: {e}"),
            }
            ExitCode::from(exit_code(&outcome) as u8)
        }
    }
}
