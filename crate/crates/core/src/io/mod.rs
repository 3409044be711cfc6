//! Configuration, checkpoints, tables and the command runner.

pub mod checkpoint;
pub mod config;
pub mod tables;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dynamics::{evolve, EvolveOptions};
use crate::error::{Error, Result};
use crate::ground_state::{critical_mass, pairing_defect, petviashvili_solve, CriticalMass, PetviashviliOptions};
use crate::spectral::Grid;
use crate::studies::{self, Check, StudyKind, StudyResult, SweepSpec};
use crate::verify;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use config::{parse_config, Command, RunConfig};
pub use tables::{diagnostics_table, emit_tables, Table};

/// Outcome of one command.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub command: Command,
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Creates `dir`, refusing to reuse a non-empty directory.
fn prepare_output(dir: &Path) -> Result<()> {
    if dir.exists() {
        let mut entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        if entries.next().is_some() {
            return Err(Error::config(format!(
                "output directory {} is not empty; each run writes a fresh directory",
                dir.display()
            )));
        }
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn sweep_spec(cfg: &RunConfig, kind: StudyKind, grid: &Grid) -> SweepSpec {
    let mut spec = SweepSpec::new(
        kind,
        cfg.params(),
        cfg.values.clone().unwrap_or_default(),
        cfg.horizon,
        grid,
    );
    spec.initial_width = cfg.initial_width;
    spec.perturbation = cfg.perturbation;
    spec.seed = cfg.seed;
    spec.sample_every = cfg.sample_every;
    spec.thetas = cfg.thetas.clone();
    spec.interpolation_s = cfg.interpolation_s;
    spec.blowup_factor = cfg.blowup_factor;
    spec.squeeze = cfg.squeeze;
    if let Some(k) = cfg.schedule_exponent {
        spec.schedule_exponent = k;
    }
    spec
}

fn write_study(result: &StudyResult, dir: &Path, checkpoints: bool) -> Result<Vec<PathBuf>> {
    let mut files = emit_tables(result, dir)?;
    if checkpoints {
        for (name, ck) in &result.artifacts {
            let path = dir.join(format!("{name}.fhrt"));
            write_checkpoint(ck, &path)?;
            files.push(path);
        }
    }
    Ok(files)
}

#[derive(Serialize)]
struct EvolveSummary<'a> {
    command: &'static str,
    config: &'a RunConfig,
    steps: usize,
    mass_drift: f64,
    energy_drift: f64,
    blowup_time: Option<f64>,
}

#[derive(Serialize)]
struct GroundStateSummary<'a> {
    command: &'static str,
    config: &'a RunConfig,
    mass: f64,
    critical_mass: CriticalMass,
    omega: f64,
    residual: f64,
    iterations: usize,
    pairing_defect: f64,
}

#[derive(Serialize)]
struct VerifySummary<'a> {
    command: &'static str,
    pass: bool,
    checks: &'a [Check],
}

/// Runs `cfg` and writes every output below `out`.
pub fn execute(cfg: &RunConfig, out: &Path) -> Result<RunReport> {
    cfg.validate()?;
    prepare_output(out)?;
    let mut files = Vec::new();
    let config_path = out.join("config.json");
    tables::write_json(cfg, &config_path)?;
    files.push(config_path);
    let mut checks = Vec::new();

    match cfg.command {
        Command::Evolve => {
            let grid = cfg.grid()?;
            let phi0 = match &cfg.initial_state {
                Some(path) => read_checkpoint(path)?.to_field()?,
                None => studies::gaussian_datum(&grid, cfg.initial_width, cfg.perturbation, cfg.seed),
            };
            let opts = EvolveOptions::default()
                .store_every(cfg.store_every)
                .diag_every(cfg.sample_every)
                .with_sobolev(&cfg.sobolev)
                .with_blowup_factor(cfg.blowup_factor);
            let traj = evolve(&phi0, &cfg.params(), cfg.horizon, &opts)?;
            let table = diagnostics_table(&traj, &cfg.sobolev);
            let csv = out.join("diagnostics.csv");
            table.write_csv(&csv)?;
            files.push(csv);
            let (a, b) = (&traj.diagnostics[0], traj.diagnostics.last().unwrap());
            let summary = EvolveSummary {
                command: "evolve",
                config: cfg,
                steps: traj.steps,
                mass_drift: ((b.mass - a.mass) / a.mass).abs(),
                energy_drift: ((b.energy - a.energy) / a.energy).abs(),
                blowup_time: traj.blowup_time,
            };
            let path = out.join("summary.json");
            tables::write_json(&summary, &path)?;
            files.push(path);
            if cfg.checkpoints {
                let path = out.join("final.fhrt");
                let (t, f) = traj.stored.last().unwrap();
                write_checkpoint(&Checkpoint::from_field(f, vec![*t]), &path)?;
                files.push(path);
            }
        }
        Command::Groundstate => {
            let grid = cfg.grid()?;
            let opts = PetviashviliOptions {
                omega: cfg.omega,
                tol: cfg.tol,
                max_iter: cfg.max_iter,
                initial_width: None,
            };
            let gs = petviashvili_solve(cfg.gamma, cfg.sigma, &grid, &opts)?;
            let mut history = Table::new(["iteration", "residual"]);
            for (i, r) in gs.history.iter().enumerate() {
                history.push(vec![(i + 1) as f64, *r]);
            }
            let csv = out.join("groundstate_history.csv");
            history.write_csv(&csv)?;
            files.push(csv);
            let summary = GroundStateSummary {
                command: "groundstate",
                config: cfg,
                mass: gs.mass(),
                critical_mass: critical_mass(&gs),
                omega: gs.omega,
                residual: gs.residual,
                iterations: gs.iterations,
                pairing_defect: pairing_defect(&gs)?,
            };
            let path = out.join("summary.json");
            tables::write_json(&summary, &path)?;
            files.push(path);
            if cfg.checkpoints {
                let path = out.join("groundstate.fhrt");
                write_checkpoint(&Checkpoint::from_field(&gs.profile, gs.metadata().to_vec()), &path)?;
                files.push(path);
            }
        }
        Command::AlphaSweep | Command::Meanfield | Command::Dichotomy => {
            let grid = cfg.grid()?;
            let kind = match cfg.command {
                Command::AlphaSweep => StudyKind::AlphaSweep,
                Command::Dichotomy => StudyKind::Dichotomy,
                _ if cfg.schedule_exponent.is_some() => StudyKind::CoupledFocusing,
                _ => StudyKind::NSweep,
            };
            let result = studies::run_study(&sweep_spec(cfg, kind, &grid))?;
            files.extend(write_study(&result, out, cfg.checkpoints)?);
            checks = result.checks;
        }
        Command::Verify => {
            checks = verify::run_suite()?;
            let path = out.join("verify_summary.json");
            tables::write_json(
                &VerifySummary {
                    command: "verify",
                    pass: checks.iter().all(|c| c.pass),
                    checks: &checks,
                },
                &path,
            )?;
            files.push(path);
        }
    }
    Ok(RunReport {
        command: cfg.command,
        checks,
        files,
    })
}
