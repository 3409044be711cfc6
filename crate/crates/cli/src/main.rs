use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fhartree::io::{execute, parse_config};
use fhartree::Error;

/// Runs one fhartree command described by a JSON config.
///
/// Exit status: 0 success, 2 configuration error, 3 numerical failure,
/// 4 a verification check failed.
#[derive(Parser, Debug)]
#[command(name = "fhartree", version, about)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (must be absent or empty). Overrides `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent sweep points. Overrides `threads`.
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for randomized perturbations. Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(args: Args) -> Result<bool, Error> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::Io {
        path: args.config.clone(),
        source: e,
    })?;
    let mut cfg = parse_config(&text)?;
    if let Some(out) = args.out {
        cfg.output = Some(out);
    }
    if let Some(t) = args.threads {
        cfg.threads = Some(t);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let out = cfg
        .output
        .clone()
        .ok_or_else(|| Error::Config("no output directory: pass --out or set \"output\"".into()))?;
    let threads = cfg.threads.unwrap_or(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("threads = {threads}: {e}")))?;

    log::info!("running {:?} into {}", cfg.command, out.display());
    let report = pool.install(|| execute(&cfg, &out))?;
    for c in &report.checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for f in &report.files {
        log::info!("wrote {}", f.display());
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
