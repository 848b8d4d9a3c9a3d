use std::path::PathBuf;
use std::process::ExitCode;

use airy_lab::LabError;
use clap::{Parser, Subcommand};

use airy_lab_cli::config::{self, ConfigError, Experiment};
use airy_lab_cli::report::Report;
use airy_lab_cli::{catalog, experiments};

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_HYPOTHESIS: u8 = 3;

#[derive(Parser)]
#[command(name = "airy-lab", version, about = "Fourier-Lebesgue estimate probes and an mKdV contraction solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: the config's `out`, else `.`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Grid size: `grid.n`, or the finest of three probe refinements.
        #[arg(long)]
        grid_n: Option<usize>,
        /// `dotted.key=json-value`, applied before parsing; repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List experiment ids with their anchors and default parameters.
    List,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::List => {
            print!("{}", catalog::render());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            seed,
            out,
            grid_n,
            overrides,
        } => run(config, seed, out, grid_n, overrides),
    }
}

fn run(
    path: PathBuf,
    seed: Option<u64>,
    out: Option<PathBuf>,
    grid_n: Option<usize>,
    raw_overrides: Vec<String>,
) -> ExitCode {
    let mut overrides = Vec::new();
    for o in &raw_overrides {
        let Some((k, v)) = o.split_once('=') else {
            eprintln!("error: override {o:?} is not KEY=VALUE");
            return ExitCode::from(EXIT_CONFIG);
        };
        overrides.push((k.trim().to_string(), v.to_string()));
    }
    if let Some(s) = seed {
        overrides.push(("seed".into(), s.to_string()));
    }
    if let Some(o) = &out {
        overrides.push(("out".into(), serde_json::to_string(o).expect("path serializes")));
    }
    let mut cfg = match config::load(&path, &overrides) {
        Ok(c) => c,
        Err(e @ (ConfigError::Io(_) | ConfigError::Parse(_))) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(n) = grid_n {
        if cfg.experiment == Experiment::Probe {
            let mut p = cfg.probe.clone().unwrap_or_default();
            p.sizes = vec![n / 4, n / 2, n];
            cfg.probe = Some(p);
        } else {
            let mut g = cfg.grid.unwrap_or_else(|| match cfg.experiment {
                Experiment::Lifespan => config::default_lifespan_grid(),
                _ => Default::default(),
            });
            g.n = n;
            cfg.grid = Some(g);
        }
    }
    let echo = serde_json::to_value(&cfg).expect("config serializes");
    let mut report = Report::new(cfg.experiment.name(), experiments::columns(cfg.experiment));
    let mut code = match experiments::run(&cfg, &mut report) {
        Ok(()) if report.pass => 0,
        Ok(()) => EXIT_FAIL,
        Err(LabError::Hypothesis(v)) => {
            report.pass = false;
            report.error = Some(format!("hypothesis rejected: {}", v.join("; ")));
            EXIT_HYPOTHESIS
        }
        Err(e) => {
            report.pass = false;
            report.error = Some(e.to_string());
            EXIT_FAIL
        }
    };
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    match report.write(&dir, &echo, cfg.seed) {
        Ok((c, j)) => println!("{}\n{}", c.display(), j.display()),
        Err(e) => {
            eprintln!("error: writing report to {}: {e}", dir.display());
            code = EXIT_FAIL;
        }
    }
    if code == 0 {
        println!("{}: PASS", report.experiment);
    } else if code == EXIT_FAIL && report.error.is_none() {
        println!("{}: FAIL", report.experiment);
    }
    ExitCode::from(code)
}
