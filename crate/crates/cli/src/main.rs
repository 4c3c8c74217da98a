use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use warpgeo_cli::{catalog, check_opts, report, resolve_spec, suites, Overrides};

/// Constructs warped-product metrics and connection pairs in coordinates
/// and verifies their structural identities against finite-difference
/// oracles.
#[derive(Parser)]
#[command(name = "warpgeo", version, about)]
struct Cli {
    /// List the built-in catalog scenes and exit.
    #[arg(long)]
    list_catalog: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Load a scene spec and run a named identity suite against it.
    Run {
        /// Scene file path, or the name of a built-in catalog scene.
        spec: String,
        /// Suite to run: conjugacy, statistical, curvature,
        /// warped-curvature, dually-flat, metric-condition, or all.
        /// Defaults to the spec's `suites` list.
        #[arg(long)]
        suite: Option<String>,
        /// Seed for the sample streams (overrides the spec).
        #[arg(long)]
        seed: Option<u64>,
        /// Sample count per check (overrides the spec).
        #[arg(long)]
        samples: Option<usize>,
        /// First-derivative FD step (overrides the spec).
        #[arg(long = "fd-h")]
        fd_h: Option<f64>,
        /// Tolerance override applied to every report.
        #[arg(long)]
        tol: Option<f64>,
        /// Emit one JSON record per line instead of human-readable lines.
        #[arg(long)]
        json: bool,
        /// Also run the alternate B-tensor reading comparison
        /// (informational records, excluded from the exit status).
        #[arg(long)]
        diagnostic: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if cli.list_catalog {
        for (name, text) in catalog::CATALOG {
            let description = text
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches('#')
                .trim();
            println!("{name:<14} {description}");
        }
        return ExitCode::SUCCESS;
    }

    let Some(Command::Run {
        spec,
        suite,
        seed,
        samples,
        fd_h,
        tol,
        json,
        diagnostic,
    }) = cli.command
    else {
        eprintln!("error: nothing to do (try `warpgeo run <scene> --suite all`)");
        return ExitCode::from(2);
    };

    let loaded = match resolve_spec(&spec) {
        Ok(loaded) => loaded,
        Err(e) => {
            eprintln!("error: {spec}: {e}");
            return ExitCode::from(2);
        }
    };

    let overrides = Overrides {
        seed,
        samples,
        fd_h,
        tol,
    };
    let opts = check_opts(&loaded, &overrides);
    let suite_list: Vec<String> = match suite {
        Some(name) => vec![name],
        None => loaded.defaults.suites.clone(),
    };

    let mut all_records = Vec::new();
    for name in &suite_list {
        match suites::run_suite(&loaded.scene, name, &opts, diagnostic) {
            Ok((records, notes)) => {
                for note in &notes.skipped {
                    eprintln!("note: skipped {note}");
                }
                all_records.extend(records);
            }
            Err(e) => {
                eprintln!("error: suite `{name}` on `{spec}`: {e}");
                return ExitCode::from(2);
            }
        }
    }

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if report::emit_records(&mut out, &all_records, json).is_err() {
        return ExitCode::from(2);
    }
    let _ = out.flush();

    if report::all_passed(&all_records) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
