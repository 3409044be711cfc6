//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Pass criterion numbers as arguments to run a subset.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use fhartree::dynamics::{evolve, EvolveOptions};
use fhartree::ground_state::{gradient_flow_minimize, petviashvili_solve, GradientFlowOptions, PetviashviliOptions};
use fhartree::io::{execute, parse_config};
use fhartree::many_body::{
    pickl_from_density, pickl_functional, product_state, random_symmetric_state, reduce_density_1,
    schatten_distances, symmetrized_pair,
};
use fhartree::spectral::{Convolver, KernelMethod, RadialKernel};
use fhartree::studies::{run_study, StudyKind, StudyResult, SweepSpec};
use fhartree::verify::method_agreement;
use fhartree::{Field, Grid, HartreeParams, Sign, C64};

type Outcome = (bool, String);

/// Riesz potential of `exp(-|x|²)` in 3D at `r = 0, 0.5, 1, 2, 3`, from an
/// independent arbitrary-precision quadrature, kept digit for digit.
#[allow(clippy::excessive_precision, clippy::approx_constant)]
const RIESZ_ORACLE: [(f64, [f64; 5]); 3] = [
    (
        0.5,
        [
            5.6950947262261558,
            5.4718700951558976,
            4.9402914872289502,
            3.8617710660115095,
            3.1911369515113182,
        ],
    ),
    (
        1.0,
        [
            6.2831853071795865,
            5.7966280839477402,
            4.6924344183341776,
            2.7711404170874917,
            1.8560683298996022,
        ],
    ),
    (
        1.4,
        [
            7.315071031460722,
            6.5297536090007116,
            4.8157951603538328,
            2.1938044294335818,
            1.2174711799635263,
        ],
    ),
];

fn unit_gaussian(grid: &Grid, width: f64) -> Field {
    let mut f = Field::gaussian(grid, width);
    f.normalize();
    f
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn energy_drift(grid: &Grid, dt: f64) -> (f64, f64) {
    let phi0 = unit_gaussian(grid, 1.0);
    let params = HartreeParams::new(1.0, 0.5, Sign::Defocusing, 1.0).with_dt(dt);
    let steps = (1.0 / dt).round() as usize;
    let opts = EvolveOptions::default().store_every(steps).diag_every(steps);
    let traj = evolve(&phi0, &params, 1.0, &opts).expect("defocusing run");
    let (a, b) = (&traj.diagnostics[0], traj.diagnostics.last().unwrap());
    (rel(b.mass, a.mass), rel(b.energy, a.energy))
}

fn conservation() -> Outcome {
    let grid = Grid::new(3, 48, 12.0).unwrap();
    let (dm, de) = energy_drift(&grid, 2e-3);
    let (_, de_half) = energy_drift(&grid, 1e-3);
    let ratio = de / de_half;
    (
        dm < 1e-8 && de < 1e-4 && (ratio - 4.0).abs() <= 0.6,
        format!("mass drift {dm:.2e}, energy drift {de:.2e}, halving ratio {ratio:.3}"),
    )
}

fn riesz_oracle() -> Outcome {
    let grid = Grid::new(3, 64, 8.0).unwrap();
    let m = grid.points();
    let h = grid.spacing();
    let rho: Vec<f64> = (0..grid.len())
        .map(|i| (-grid.position(i).iter().map(|x| x * x).sum::<f64>()).exp())
        .collect();
    let mut worst: f64 = 0.0;
    for (gamma, exact) in RIESZ_ORACLE {
        let conv = Convolver::new(&grid, RadialKernel::Riesz { exponent: gamma }, KernelMethod::FourierSymbol)
            .unwrap();
        let v = conv.convolve(&rho);
        for (r, want) in [0.0, 0.5, 1.0, 2.0, 3.0].into_iter().zip(exact) {
            let j = m / 2 + (r / h).round() as usize;
            worst = worst.max(rel(v[(m / 2 * m + m / 2) * m + j], want));
        }
    }
    let gap = method_agreement(1.0, 0.1, &grid).unwrap();
    (
        worst < 1e-3 && gap < 1e-2,
        format!("oracle defect {worst:.2e} over gamma in {{0.5, 1, 1.4}}, route gap {gap:.2e}"),
    )
}

fn ground_state() -> Outcome {
    let opts = PetviashviliOptions::default();
    let g3 = Grid::new(3, 64, 16.0).unwrap();
    let residual = petviashvili_solve(1.0, 0.5, &g3, &opts).unwrap().residual;

    let fine = Grid::new(2, 768, 24.0).unwrap();
    let m1 = petviashvili_solve(1.0, 0.5, &fine, &opts).unwrap().mass();
    let omega4 = PetviashviliOptions { omega: 4.0, ..opts.clone() };
    let m4 = petviashvili_solve(1.0, 0.5, &fine, &omega4).unwrap().mass();
    let coarse = Grid::new(2, 384, 24.0).unwrap();
    let mc = petviashvili_solve(1.0, 0.5, &coarse, &opts).unwrap().mass();

    let g = Grid::new(2, 256, 24.0).unwrap();
    let petv = petviashvili_solve(1.0, 0.5, &g, &opts).unwrap().mass();
    // The flow pins the kinetic scale of its starting guess; start it at the
    // width of the ω = 1 profile so both solvers see the same box effects.
    let flow_opts = GradientFlowOptions {
        initial_width: Some(1.0),
        ..GradientFlowOptions::default()
    };
    let flow = gradient_flow_minimize(1.0, 0.5, &g, 1.0, 1e-8, &flow_opts).unwrap();
    let lambda_flow = flow.coupling;

    let (d_omega, d_grid, d_flow) = (rel(m4, m1), rel(mc, m1), rel(lambda_flow, petv));
    (
        residual <= 1e-8 && d_omega < 1e-3 && d_grid < 1e-3 && d_flow < 1e-2,
        format!(
            "residual {residual:.2e}; mass {m1:.6} (omega 4: {d_omega:.1e}, grid: {d_grid:.1e}); \
             gradient flow {lambda_flow:.5} vs {petv:.5} ({d_flow:.1e})"
        ),
    )
}

fn alpha_convergence() -> Outcome {
    let grid = Grid::new(3, 48, 64.0).unwrap();
    let params = HartreeParams::new(1.0, 0.5, Sign::Defocusing, 1.0).with_dt(2e-3);
    let mut spec = SweepSpec::new(StudyKind::AlphaSweep, params, vec![0.05, 0.1, 0.2, 0.4], 0.5, &grid);
    spec.initial_width = 16.0;
    let r = run_study(&spec).unwrap();
    match (r.fit("l2"), r.fit("hdot")) {
        (Some(l2), Some(hd)) => (
            l2.slope >= 0.95 && hd.slope >= 0.8,
            format!("L2 slope {:.4} (>= 0.95), Hdot slope {:.4} (>= 0.8)", l2.slope, hd.slope),
        ),
        _ => (false, format!("fits suppressed: {:?}", r.flags)),
    }
}

fn mean_field_run() -> StudyResult {
    let grid = Grid::new(1, 32, 8.0).unwrap();
    let params = HartreeParams::new(1.0, 1.0, Sign::Defocusing, 1.0)
        .with_alpha(0.5)
        .with_dt(0.02);
    let mut spec = SweepSpec::new(StudyKind::NSweep, params, vec![2.0, 3.0, 4.0, 5.0], 1.0, &grid);
    spec.sample_every = 5;
    spec.thetas = vec![0.0, 0.25, 0.5];
    run_study(&spec).unwrap()
}

fn mean_field(r: &StudyResult) -> Outcome {
    let chain = r.check("chain").is_some_and(|c| c.pass);
    match r.fit("pickl") {
        Some(f) => (
            f.slope <= -0.8 && chain,
            format!("pickl slope {:.4} (<= -0.8), chain holds at every sample: {chain}", f.slope),
        ),
        None => (false, "no pickl fit".into()),
    }
}

fn interpolation(r: &StudyResult) -> Outcome {
    let samples = r.samples.as_ref().expect("N-sweep samples");
    let ns = samples.column("N").unwrap();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for theta in [0.0, 0.25, 0.5] {
        let col = samples.column(&format!("interpolation_ratio_theta_{theta}")).unwrap();
        for (n, ratio) in ns.iter().zip(col) {
            if *n == 3.0 {
                worst = worst.max(ratio);
                count += 1;
            }
        }
    }

    let grid = Grid::new(1, 32, 8.0).unwrap();
    let params = HartreeParams::new(1.0, 1.0, Sign::Defocusing, 1.0).with_alpha(0.5);
    let phi = unit_gaussian(&grid, 1.0);
    let mut chi = Field::from_fn(&grid, |x| C64::new(x[0] * (-0.5 * x[0] * x[0]).exp(), 0.0));
    chi.normalize();
    let pair = symmetrized_pair(&phi, &chi, &params).unwrap();
    let d = schatten_distances(&reduce_density_1(&pair), &phi).unwrap();
    let exact = (d.trace_norm - 1.0).abs() < 1e-10 && (d.hs_norm - FRAC_1_SQRT_2).abs() < 1e-10;
    (
        count > 0 && worst <= 1.0 && exact,
        format!(
            "max ratio {worst:.3} over {count} N = 3 samples; rank-2 Tr = {:.12}, HS = {:.12}",
            d.trace_norm, d.hs_norm
        ),
    )
}

fn dichotomy() -> Outcome {
    let grid = Grid::new(2, 128, 16.0).unwrap();
    let params = HartreeParams::new(1.0, 0.5, Sign::Focusing, 1.0).with_dt(5e-3);
    let mut spec = SweepSpec::new(StudyKind::Dichotomy, params, vec![0.5, 1.5], 2.0, &grid);
    spec.sample_every = 5;
    let r = run_study(&spec).unwrap();
    let t = &r.points;
    let flagged = |multiple: f64, mu: f64| {
        let rows = t.column("multiple").unwrap();
        let signs = t.column("mu").unwrap();
        let flags = t.column("flagged").unwrap();
        (0..t.len())
            .find(|&i| rows[i] == multiple && signs[i] == mu)
            .map(|i| flags[i] == 1.0)
            .expect("run present")
    };
    let hi = flagged(1.5, -1.0);
    let lo = flagged(0.5, -1.0);
    let defocusing = flagged(0.5, 1.0) || flagged(1.5, 1.0);
    (
        hi && !lo && !defocusing,
        format!("flag at 1.5 lambda_c: {hi}, at 0.5 lambda_c: {lo}, any defocusing: {defocusing}"),
    )
}

fn pickl_algebra() -> Outcome {
    let grid = Grid::new(1, 12, 5.0).unwrap();
    let params = HartreeParams::new(1.0, 1.0, Sign::Defocusing, 1.0).with_alpha(0.5);
    let phi = unit_gaussian(&grid, 1.0);
    let mut chi = Field::from_fn(&grid, |x| C64::new(x[0] * (-0.5 * x[0] * x[0]).exp(), 0.0));
    chi.normalize();
    let a0 = pickl_functional(&product_state(&phi, 3, &params).unwrap(), &phi).unwrap();
    let a_pair = pickl_functional(&symmetrized_pair(&phi, &chi, &params).unwrap(), &phi).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let psi = random_symmetric_state(&grid, 2 + (seed % 2) as usize, &params, seed).unwrap();
        let direct = pickl_functional(&psi, &phi).unwrap();
        let reduced = pickl_from_density(&reduce_density_1(&psi), &phi).unwrap();
        worst = worst.max((direct - reduced).abs());
    }
    (
        a0.abs() < 1e-12 && (a_pair - 0.5).abs() < 1e-10 && worst < 1e-10,
        format!("product a = {a0:.1e}, pair a = {a_pair:.12}, two-path gap {worst:.1e} over 50 states"),
    )
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn determinism() -> Outcome {
    let configs = [
        r#"{"command":"alpha-sweep","dim":3,"points":16,"half_width":8,"horizon":0.1,"dt":0.01,
            "perturbation":0.2,"seed":7,"threads":2}"#,
        r#"{"command":"meanfield","sigma":1,"alpha":0.5,"points":8,"half_width":5,"horizon":0.2,
            "dt":0.01,"perturbation":0.3,"seed":11,"thetas":[0.25],"threads":2}"#,
        r#"{"command":"evolve","dim":2,"points":32,"half_width":8,"horizon":0.2,"dt":0.01,
            "perturbation":0.1,"seed":3,"sobolev":[1],"threads":2}"#,
    ];
    let tmp = tempfile::tempdir().unwrap();
    let mut compared = 0;
    for (k, text) in configs.iter().enumerate() {
        let cfg = parse_config(text).unwrap();
        let run = |tag: &str| {
            let dir = tmp.path().join(format!("{k}_{tag}"));
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads.unwrap())
                .build()
                .unwrap();
            pool.install(|| execute(&cfg, &dir)).unwrap();
            csv_files(&dir)
        };
        let (a, b) = (run("a"), run("b"));
        if a.is_empty() || a != b {
            return (false, format!("config {k}: CSV outputs differ or are missing"));
        }
        compared += a.len();
    }
    (true, format!("{compared} CSV files byte-identical across two runs"))
}

fn main() {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let run = |n: usize| wanted.is_empty() || wanted.contains(&n);
    let mut failures = 0;
    let mut report = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let (pass, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        if !pass {
            failures += 1;
        }
        println!(
            "{} criterion {n} ({name}): {detail} [{:.1} s]",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    };

    if run(1) {
        report(1, "conservation", &mut conservation);
    }
    if run(2) {
        report(2, "riesz oracle", &mut riesz_oracle);
    }
    if run(3) {
        report(3, "ground state", &mut ground_state);
    }
    if run(4) {
        report(4, "alpha convergence", &mut alpha_convergence);
    }
    if run(5) || run(6) {
        let start = Instant::now();
        let mf = catch_unwind(mean_field_run).ok();
        let shared = start.elapsed().as_secs_f64();
        let missing = || (false, "mean-field sweep panicked".to_string());
        if run(5) {
            report(5, "mean-field decay", &mut || {
                let (p, d) = mf.as_ref().map_or_else(missing, mean_field);
                (p, format!("{d}; sweep {shared:.1} s"))
            });
        }
        if run(6) {
            report(6, "interpolation bound", &mut || mf.as_ref().map_or_else(missing, interpolation));
        }
    }
    if run(7) {
        report(7, "focusing dichotomy", &mut dichotomy);
    }
    if run(8) {
        report(8, "pickl algebra", &mut pickl_algebra);
    }
    if run(9) {
        report(9, "determinism", &mut determinism);
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}
