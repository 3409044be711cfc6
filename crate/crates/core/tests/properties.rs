use fhartree::dynamics::HartreeSolver;
use fhartree::io::Checkpoint;
use fhartree::many_body::{pickl_from_density, pickl_functional, random_symmetric_state, reduce_density_1, schatten_distances};
use fhartree::studies::rate_fit;
use fhartree::{Field, Grid, HartreeParams, Sign, C64};
use proptest::prelude::*;

fn orbital(grid: &Grid, width: f64, shift: f64) -> Field {
    let mut f = Field::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| (v - shift) * (v - shift)).sum();
        C64::from_polar((-0.5 * r2 / (width * width)).exp(), 0.3 * x[0])
    });
    f.normalize();
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn split_step_preserves_mass(
        gamma in 0.2f64..0.9,
        sigma in 0.5f64..1.0,
        lambda in 0.1f64..3.0,
        focusing in any::<bool>(),
        width in 0.6f64..2.0,
    ) {
        let grid = Grid::new(1, 64, 10.0).unwrap();
        let mu = if focusing { Sign::Focusing } else { Sign::Defocusing };
        let params = HartreeParams::new(gamma, sigma, mu, lambda).with_dt(0.01);
        let solver = HartreeSolver::new(&grid, &params).unwrap();
        let mut phi = orbital(&grid, width, 0.5);
        for _ in 0..20 {
            solver.step(&mut phi);
        }
        prop_assert!((phi.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pickl_paths_and_chain_agree(seed in 0u64..10_000, n in 2usize..4, width in 0.6f64..2.0) {
        let grid = Grid::new(1, 10, 4.0).unwrap();
        let params = HartreeParams::new(1.0, 1.0, Sign::Defocusing, 1.0).with_alpha(0.5);
        let psi = random_symmetric_state(&grid, n, &params, seed).unwrap();
        let phi = orbital(&grid, width, 0.0);
        let rho = reduce_density_1(&psi);
        let a = pickl_functional(&psi, &phi).unwrap();
        prop_assert!((a - pickl_from_density(&rho, &phi).unwrap()).abs() < 1e-10);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&a));
        let d = schatten_distances(&rho, &phi).unwrap();
        prop_assert!(d.trace_norm >= d.hs_norm - 1e-12);
        prop_assert!(d.hs_norm <= (2.0 * a).sqrt() + 1e-8);
    }

    #[test]
    fn checkpoint_bytes_round_trip(values in prop::collection::vec(-1e3f64..1e3, 32), meta in prop::collection::vec(-10f64..10.0, 0..4)) {
        let grid = Grid::new(1, 16, 3.0).unwrap();
        let data: Vec<C64> = values.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        let ck = Checkpoint::new(vec![16], grid, meta, data).unwrap();
        prop_assert_eq!(Checkpoint::from_bytes(&ck.to_bytes()).unwrap(), ck);
    }

    #[test]
    fn rate_fit_recovers_exponent(p in -3.0f64..3.0, c in 0.1f64..10.0) {
        let pts: Vec<(f64, f64)> = [0.05, 0.1, 0.2, 0.4].iter().map(|&x| (x, c * f64::powf(x, p))).collect();
        let fit = rate_fit(&pts).unwrap();
        prop_assert!((fit.slope - p).abs() < 1e-10);
        prop_assert!(fit.residual < 1e-10);
    }
}
