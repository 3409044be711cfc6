//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every entry point takes plain numbers and returns a JSON string so the
//! page needs no generated glue beyond `wasm-bindgen`.

use fhartree::dynamics::{evolve, EvolveOptions};
use fhartree::ground_state::{petviashvili_solve, PetviashviliOptions};
use fhartree::many_body::{pickl_from_density, random_symmetric_state, reduce_density_1, schatten_distances};
use fhartree::{Field, Grid, HartreeParams, Sign};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js(e: fhartree::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn sign(mu: i32) -> Sign {
    if mu < 0 {
        Sign::Focusing
    } else {
        Sign::Defocusing
    }
}

/// Evolves a unit-mass Gaussian on a 1D grid and returns the diagnostics
/// together with the initial and final densities.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn evolve_gaussian(
    gamma: f64,
    sigma: f64,
    mu: i32,
    lambda: f64,
    alpha: f64,
    points: usize,
    half_width: f64,
    width: f64,
    horizon: f64,
    dt: f64,
) -> Result<String, JsValue> {
    let grid = Grid::new(1, points, half_width).map_err(js)?;
    let mut phi0 = Field::gaussian(&grid, width);
    phi0.normalize();
    let params = HartreeParams::new(gamma, sigma, sign(mu), lambda)
        .with_alpha(alpha)
        .with_dt(dt);
    params.validate().map_err(js)?;
    let steps = (horizon / dt).round().max(1.0);
    let opts = EvolveOptions::default()
        .store_every(usize::MAX)
        .diag_every(((steps / 200.0).ceil() as usize).max(1))
        .with_blowup_factor(50.0);
    let traj = evolve(&phi0, &params, steps * dt, &opts).map_err(js)?;
    let d = &traj.diagnostics;
    Ok(json!({
        "x": grid.axis(),
        "t": d.iter().map(|v| v.t).collect::<Vec<_>>(),
        "mass": d.iter().map(|v| v.mass).collect::<Vec<_>>(),
        "kinetic": d.iter().map(|v| v.kinetic).collect::<Vec<_>>(),
        "energy": d.iter().map(|v| v.energy).collect::<Vec<_>>(),
        "initial": traj.initial_state().density(),
        "final": traj.final_state().density(),
        "blowup_time": traj.blowup_time,
    })
    .to_string())
}

/// Solves for the 1D ground state and reports its mass and profile.
#[wasm_bindgen]
pub fn ground_state(gamma: f64, sigma: f64, points: usize, half_width: f64) -> Result<String, JsValue> {
    let grid = Grid::new(1, points, half_width).map_err(js)?;
    let gs = petviashvili_solve(gamma, sigma, &grid, &PetviashviliOptions::default()).map_err(js)?;
    Ok(json!({
        "x": grid.axis(),
        "profile": gs.profile.values().iter().map(|v| v.re).collect::<Vec<_>>(),
        "mass": gs.mass(),
        "residual": gs.residual,
        "iterations": gs.iterations,
        "history": gs.history,
    })
    .to_string())
}

/// Draws a random symmetric `n`-boson state and measures how far its
/// one-body density is from a Gaussian orbital.
#[wasm_bindgen]
pub fn condensate_distance(n: usize, points: usize, half_width: f64, seed: u32) -> Result<String, JsValue> {
    let grid = Grid::new(1, points, half_width).map_err(js)?;
    let params = HartreeParams::new(1.0, 1.0, Sign::Defocusing, 1.0).with_alpha(0.5);
    let psi = random_symmetric_state(&grid, n, &params, u64::from(seed)).map_err(js)?;
    let mut phi = Field::gaussian(&grid, 1.0);
    phi.normalize();
    let rho = reduce_density_1(&psi);
    let a = pickl_from_density(&rho, &phi).map_err(js)?;
    let d = schatten_distances(&rho, &phi).map_err(js)?;
    Ok(json!({
        "pickl": a,
        "hs": d.hs_norm,
        "trace": d.trace_norm,
        "sqrt_2a": (2.0 * a).sqrt(),
    })
    .to_string())
}
