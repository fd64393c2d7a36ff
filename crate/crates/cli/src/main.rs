use std::path::PathBuf;
use std::process::ExitCode;

use bilin_lab::{catalog_list, load_config, run, RunSettings};
use clap::Parser;

/// Runs one experiment described by a JSON config.
#[derive(Parser, Debug)]
#[command(name = "bilin-lab", version)]
struct Args {
    /// Experiment config, or a sidecar written by an earlier run.
    #[arg(long, required_unless_present = "list_catalog")]
    config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "BILIN_LAB_THREADS")]
    threads: Option<usize>,
    /// Print the surface catalog with parameter schemas and exit.
    #[arg(long)]
    list_catalog: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if args.list_catalog {
        println!("{}", serde_json::to_string_pretty(&catalog_list()).expect("catalog serializes"));
        return ExitCode::SUCCESS;
    }
    let mut config = match load_config(args.config.as_deref().expect("required by clap")) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("validation error:\n{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(out) = args.out {
        config.out = Some(out);
    }
    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    if config.seed.is_none() {
        config.seed = Some(0);
    }
    match run(&config, &RunSettings { threads: args.threads }) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            match e.exit_code() {
                2 => eprintln!("validation error:\n{e}"),
                4 => eprintln!("resource error:\n{e}"),
                _ => eprintln!("error: {e}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
