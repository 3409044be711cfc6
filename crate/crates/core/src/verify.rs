//! Invariant suite behind the `verify` command.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::dynamics::{evolve, EvolveOptions, HartreeSolver};
use crate::error::Result;
use crate::ground_state::{petviashvili_solve, PetviashviliOptions};
use crate::io::checkpoint::Checkpoint;
use crate::many_body::{
    interpolation_bound_check, mb_trajectory, pickl_from_density, pickl_functional, product_state,
    random_symmetric_state, reduce_density_1, schatten_distances, symmetrized_pair, MbEvolveOptions,
};
use crate::params::{HartreeParams, Sign};
use crate::spectral::quadrature::PanelRule;
use crate::spectral::{Convolver, Field, Grid, KernelMethod, RadialKernel};
use crate::studies::Check;
use crate::C64;

/// `(|x|^{-γ} ∗ ρ)(r)` for a radial density in 3D, by shell integration:
/// each sphere of radius `s` contributes
/// `2π s ρ(s) [(r+s)^{2-γ} - |r-s|^{2-γ}] / ((2-γ) r)`.
pub fn radial_riesz_potential(rho: impl Fn(f64) -> f64, gamma: f64, r: f64, cutoff: f64) -> f64 {
    let rule = PanelRule::new(20);
    let panels = |a: f64, b: f64, f: &dyn Fn(f64) -> f64| -> f64 {
        let n = 64;
        let h = (b - a) / n as f64;
        (0..n)
            .map(|i| rule.integrate(a + i as f64 * h, a + (i + 1) as f64 * h, f))
            .sum()
    };
    let e = 2.0 - gamma;
    if r == 0.0 {
        return 4.0 * PI * panels(0.0, cutoff, &|s| s.powf(e) * rho(s));
    }
    let f = |s: f64| s * rho(s) * ((r + s).powf(e) - (r - s).abs().powf(e));
    let inner = panels(0.0, r, &f);
    let outer = panels(r, cutoff.max(r), &f);
    2.0 * PI / (e * r) * (inner + outer)
}

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        pass,
        detail,
    }
}

fn gaussian_density(grid: &Grid) -> Vec<f64> {
    (0..grid.len())
        .map(|i| {
            let r2: f64 = grid.position(i).iter().map(|x| x * x).sum();
            (-r2).exp()
        })
        .collect()
}

/// Largest relative defect of the Fourier-symbol Riesz potential of
/// `exp(-|x|²)` against shell quadrature at `r ∈ {0, 0.5, 1, 2, 3}`.
pub fn riesz_oracle_defect(gamma: f64, grid: &Grid) -> Result<f64> {
    let conv = Convolver::new(grid, RadialKernel::Riesz { exponent: gamma }, KernelMethod::FourierSymbol)?;
    let v = conv.convolve(&gaussian_density(grid));
    let m = grid.points();
    let h = grid.spacing();
    let mut worst: f64 = 0.0;
    for r in [0.0, 0.5, 1.0, 2.0, 3.0] {
        let j = m / 2 + (r / h).round() as usize;
        let flat = (m / 2 * m + m / 2) * m + j;
        let exact = radial_riesz_potential(|s| (-s * s).exp(), gamma, r, 10.0);
        worst = worst.max(((v[flat] - exact) / exact).abs());
    }
    Ok(worst)
}

/// Largest relative gap between the two convolution routes for the
/// regularized kernel, excluding the origin cell. The symbol route truncates
/// the kernel at `|x| = L` while the padded route keeps every in-box
/// separation, so only `|x| ≤ L/2` is compared.
pub fn method_agreement(gamma: f64, alpha: f64, grid: &Grid) -> Result<f64> {
    let kernel = RadialKernel::Regularized { gamma, alpha };
    let rho = gaussian_density(grid);
    let a = Convolver::new(grid, kernel, KernelMethod::FourierSymbol)?.convolve(&rho);
    let b = Convolver::new(grid, kernel, KernelMethod::PaddedRealKernel)?.convolve(&rho);
    let h = grid.spacing();
    let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok((0..grid.len())
        .filter(|&i| {
            let x = grid.position(i);
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter().any(|v| v.abs() > 0.5 * h) && r <= 0.5 * grid.half_width()
        })
        .map(|i| (a[i] - b[i]).abs() / scale)
        .fold(0.0, f64::max))
}

fn unit_gaussian(grid: &Grid, width: f64) -> Field {
    let mut f = Field::gaussian(grid, width);
    f.normalize();
    f
}

fn hermite_mode(grid: &Grid) -> Field {
    let mut f = Field::from_fn(grid, |x| C64::new(x[0] * (-0.5 * x[0] * x[0]).exp(), 0.0));
    f.normalize();
    f
}

/// Runs every invariant check. Each failure is reported, none aborts the run.
pub fn run_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let g3 = Grid::new(3, 64, 8.0)?;
    for gamma in [0.5, 1.0, 1.4] {
        let d = riesz_oracle_defect(gamma, &g3)?;
        out.push(check(
            &format!("riesz_oracle_gamma_{gamma}"),
            d < 1e-3,
            format!("max rel. defect {d:.3e} (< 1e-3)"),
        ));
    }
    let d = method_agreement(1.0, 0.1, &g3)?;
    out.push(check(
        "convolution_routes_agree",
        d < 1e-2,
        format!("max rel. gap {d:.3e} off the origin cell (< 1e-2)"),
    ));

    let g = Grid::new(3, 24, 8.0)?;
    let phi0 = unit_gaussian(&g, 1.0);
    let params = HartreeParams::new(1.0, 0.5, Sign::Defocusing, 1.0).with_dt(5e-3);
    let traj = evolve(&phi0, &params, 0.25, &EvolveOptions::default().store_every(50))?;
    let first = &traj.diagnostics[0];
    let last = traj.diagnostics.last().unwrap();
    let dm = ((last.mass - first.mass) / first.mass).abs();
    let de = ((last.energy - first.energy) / first.energy).abs();
    out.push(check(
        "conservation",
        dm < 1e-12 && de < 1e-4,
        format!("mass drift {dm:.2e}, energy drift {de:.2e}"),
    ));

    let solver = HartreeSolver::new(&g, &params)?;
    let mut phi = phi0.clone();
    for _ in 0..100 {
        solver.step_by(&mut phi, params.dt);
    }
    for _ in 0..100 {
        solver.step_by(&mut phi, -params.dt);
    }
    let back = phi.distance(&phi0);
    out.push(check(
        "time_reversal",
        back < 1e-8,
        format!("‖φ - φ₀‖ = {back:.2e} after 100 steps forward and back"),
    ));

    let g1 = Grid::new(1, 16, 5.0)?;
    let mb = HartreeParams::new(1.0, 1.0, Sign::Defocusing, 1.0).with_alpha(0.5).with_dt(0.01);
    let phi = unit_gaussian(&g1, 1.0);
    let chi = hermite_mode(&g1);
    let a0 = pickl_functional(&product_state(&phi, 3, &mb)?, &phi)?;
    out.push(check("pickl_product", a0.abs() < 1e-12, format!("a = {a0:.2e}")));
    let pair = symmetrized_pair(&phi, &chi, &mb)?;
    let a_pair = pickl_functional(&pair, &phi)?;
    let rho = reduce_density_1(&pair);
    let dist = schatten_distances(&rho, &phi)?;
    out.push(check(
        "pickl_orthogonal_pair",
        (a_pair - 0.5).abs() < 1e-10
            && (dist.trace_norm - 1.0).abs() < 1e-10
            && (dist.hs_norm - FRAC_1_SQRT_2).abs() < 1e-10,
        format!(
            "a = {a_pair:.12}, Tr = {:.12}, HS = {:.12}",
            dist.trace_norm, dist.hs_norm
        ),
    ));
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let psi = random_symmetric_state(&g1, 2, &mb, seed)?;
        let direct = pickl_functional(&psi, &phi)?;
        let via = pickl_from_density(&reduce_density_1(&psi), &phi)?;
        worst = worst.max((direct - via).abs());
    }
    out.push(check(
        "pickl_two_paths",
        worst < 1e-10,
        format!("max |direct - reduced| = {worst:.2e}"),
    ));

    let samples = mb_trajectory(
        &product_state(&phi, 2, &mb)?,
        0.2,
        &MbEvolveOptions {
            dt: 0.01,
            sample_every: 10,
        },
    )?;
    let reference = evolve(&phi, &mb, 0.2, &EvolveOptions::default().store_every(10))?;
    let mut chain = true;
    let mut ratio: f64 = 0.0;
    for ((_, psi), (_, phi_t)) in samples.iter().zip(&reference.stored) {
        let rho = reduce_density_1(psi);
        let a = pickl_from_density(&rho, phi_t)?;
        let d = schatten_distances(&rho, phi_t)?;
        chain &= d.trace_norm >= d.hs_norm - 1e-12 && d.hs_norm <= (2.0 * a).sqrt() + 1e-8;
        for theta in [0.0, 0.25, 0.5] {
            ratio = ratio.max(interpolation_bound_check(psi, phi_t, theta, 1.0, 1.0)?.ratio);
        }
    }
    out.push(check(
        "schatten_chain",
        chain,
        "Tr >= HS and HS <= sqrt(2a) along an N = 2 run".into(),
    ));
    out.push(check(
        "interpolation_bound",
        ratio <= 1.0,
        format!("max LHS/RHS = {ratio:.3e}"),
    ));

    let ck = Checkpoint::from_field(&phi0, vec![0.0]);
    let back = Checkpoint::from_bytes(&ck.to_bytes())?;
    out.push(check(
        "checkpoint_round_trip",
        back == ck,
        "field survives write/read bit-for-bit".into(),
    ));

    let gs = petviashvili_solve(0.8, 0.4, &Grid::new(1, 256, 20.0)?, &PetviashviliOptions::default())?;
    out.push(check(
        "ground_state_residual",
        gs.residual <= 1e-8,
        format!("residual {:.2e} after {} iterations", gs.residual, gs.iterations),
    ));

    Ok(out)
}
