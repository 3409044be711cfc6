//! Parameter sweeps and log-log rate fits.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{blowup_monitor, evolve, persistence_report, EvolveOptions};
use crate::error::{Error, Result};
use crate::ground_state::{petviashvili_solve, PetviashviliOptions};
use crate::io::checkpoint::Checkpoint;
use crate::io::tables::Table;
use crate::many_body::{
    interpolation_bound_from_density, mb_evolve, pickl_from_density, product_state,
    reduce_density_1, schatten_distances, MbEvolveOptions,
};
use crate::params::{HartreeParams, Sign};
use crate::spectral::{Field, Grid, KernelMethod, Spectral};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    AlphaSweep,
    NSweep,
    CoupledFocusing,
    Persistence,
    Dichotomy,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::AlphaSweep => "alpha_sweep",
            StudyKind::NSweep => "n_sweep",
            StudyKind::CoupledFocusing => "coupled_focusing",
            StudyKind::Persistence => "persistence",
            StudyKind::Dichotomy => "dichotomy",
        }
    }

    fn needs_fit(self) -> bool {
        matches!(
            self,
            StudyKind::AlphaSweep | StudyKind::NSweep | StudyKind::CoupledFocusing
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub points: usize,
    pub half_width: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.dim, self.points, self.half_width)
    }
}

impl From<&Grid> for GridSpec {
    fn from(g: &Grid) -> Self {
        Self {
            dim: g.dim(),
            points: g.points(),
            half_width: g.half_width(),
        }
    }
}

/// What to sweep and how.
///
/// `values` holds α for the α-sweep, particle numbers for the N-sweeps,
/// Sobolev indices for persistence and multiples of `λ_c` for the dichotomy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub kind: StudyKind,
    pub params: HartreeParams,
    pub values: Vec<f64>,
    pub horizon: f64,
    pub grid: GridSpec,
    /// Width of the Gaussian initial datum.
    pub initial_width: f64,
    /// Relative amplitude of a seeded smooth perturbation of the datum.
    pub perturbation: f64,
    pub seed: u64,
    /// Samples every this many steps.
    pub sample_every: usize,
    /// `α_N = α₀ N^{-exponent}` in the coupled study, `α₀ = params.alpha`.
    pub schedule_exponent: f64,
    /// `θ` values for pointwise interpolation checks along N-sweeps.
    pub thetas: Vec<f64>,
    /// Sobolev index `s` of those checks.
    pub interpolation_s: f64,
    /// Kinetic-energy growth factor that raises the blow-up flag.
    pub blowup_factor: f64,
    /// Width squeeze of the unit-mass ground state in the dichotomy.
    pub squeeze: f64,
}

impl SweepSpec {
    pub fn new(kind: StudyKind, params: HartreeParams, values: Vec<f64>, horizon: f64, grid: &Grid) -> Self {
        Self {
            kind,
            params,
            values,
            horizon,
            grid: grid.into(),
            initial_width: 1.0,
            perturbation: 0.0,
            seed: 0,
            sample_every: 10,
            schedule_exponent: 0.75,
            thetas: Vec::new(),
            interpolation_s: 1.0,
            blowup_factor: 5.0,
            squeeze: 0.9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.grid.build()?;
        let v = &self.values;
        if v.is_empty() {
            return Err(Error::config("sweep needs at least one value"));
        }
        if self.kind.needs_fit() && v.len() < 3 {
            return Err(Error::config(format!(
                "{} fits a rate and needs >= 3 sweep values, got {}",
                self.kind.name(),
                v.len()
            )));
        }
        if v.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("sweep values must be strictly increasing"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("sweep values must be finite"));
        }
        match self.kind {
            StudyKind::NSweep | StudyKind::CoupledFocusing => {
                if v.iter().any(|&n| n < 2.0 || n.fract() != 0.0) {
                    return Err(Error::config("particle numbers must be integers >= 2"));
                }
                if !(self.params.alpha > 0.0) {
                    return Err(Error::config("many-body sweeps need alpha > 0"));
                }
            }
            StudyKind::AlphaSweep | StudyKind::Dichotomy => {
                if v[0] <= 0.0 {
                    return Err(Error::config("sweep values must be positive"));
                }
            }
            StudyKind::Persistence => {
                if v[0] < 0.0 {
                    return Err(Error::config("Sobolev indices must be >= 0"));
                }
            }
        }
        if self.kind == StudyKind::CoupledFocusing && self.params.mu != Sign::Focusing {
            log::info!("coupled schedule run with mu = +1 (defocusing control)");
        }
        if !(self.initial_width > 0.0) {
            return Err(Error::config("initial_width must be > 0"));
        }
        if !(self.blowup_factor > 1.0) {
            return Err(Error::config("blowup_factor must be > 1"));
        }
        if !(self.squeeze > 0.0) {
            return Err(Error::config("squeeze must be > 0"));
        }
        if self.thetas.iter().any(|t| !(0.0..1.0).contains(t)) {
            return Err(Error::config("thetas must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Hex prefix of SHA-256 over the JSON form of the spec.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("spec serializes");
        Sha256::digest(text.as_bytes())[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the log-space defects.
    pub residual: f64,
}

/// Least squares on `(ln x, ln y)`.
pub fn rate_fit(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need >= 3 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0) || !x.is_finite() || !y.is_finite()) {
        return Err(Error::Fit(format!("nonpositive or non-finite point {p:?}")));
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(RateFit {
        slope,
        intercept,
        residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub name: String,
    pub fit: RateFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub grid: GridSpec,
    pub dt: f64,
    pub runtime_seconds: f64,
    pub build: String,
    pub spec_hash: String,
    /// Derived scalars worth recording (critical mass, …).
    pub extra: BTreeMap<String, f64>,
}

#[derive(Clone, Debug)]
pub struct StudyResult {
    pub kind: StudyKind,
    pub spec: SweepSpec,
    /// One row per sweep point.
    pub points: Table,
    /// Per-sample rows, when the study samples along trajectories.
    pub samples: Option<Table>,
    pub fits: Vec<NamedFit>,
    pub checks: Vec<Check>,
    /// Reasons a fit was suppressed or a point aborted.
    pub flags: Vec<String>,
    pub metadata: Metadata,
    /// Final states behind the measurements, named for checkpoint files.
    pub artifacts: Vec<(String, Checkpoint)>,
}

#[derive(Serialize)]
pub struct Summary<'a> {
    pub study: &'a str,
    pub spec: &'a SweepSpec,
    pub fits: &'a [NamedFit],
    pub checks: &'a [Check],
    pub flags: &'a [String],
    pub pass: bool,
    pub metadata: &'a Metadata,
}

impl StudyResult {
    pub fn fit(&self, name: &str) -> Option<RateFit> {
        self.fits.iter().find(|f| f.name == name).map(|f| f.fit)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn summary(&self) -> Summary<'_> {
        Summary {
            study: self.kind.name(),
            spec: &self.spec,
            fits: &self.fits,
            checks: &self.checks,
            flags: &self.flags,
            pass: self.passed(),
            metadata: &self.metadata,
        }
    }
}

struct Builder {
    spec: SweepSpec,
    start: Instant,
    fits: Vec<NamedFit>,
    checks: Vec<Check>,
    flags: Vec<String>,
    extra: BTreeMap<String, f64>,
    artifacts: Vec<(String, Checkpoint)>,
}

impl Builder {
    fn new(spec: &SweepSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec: spec.clone(),
            start: Instant::now(),
            fits: Vec::new(),
            checks: Vec::new(),
            flags: Vec::new(),
            extra: BTreeMap::new(),
            artifacts: Vec::new(),
        })
    }

    /// Fits `points`, recording a flag instead when the fit is impossible.
    fn fit(&mut self, name: &str, points: &[(f64, f64)]) -> Option<RateFit> {
        match rate_fit(points) {
            Ok(fit) => {
                self.fits.push(NamedFit {
                    name: name.into(),
                    fit,
                });
                Some(fit)
            }
            Err(e) => {
                self.flags.push(format!("{name}: fit suppressed ({e})"));
                None
            }
        }
    }

    fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            detail,
        });
    }

    fn finish(self, points: Table, samples: Option<Table>) -> StudyResult {
        let metadata = Metadata {
            grid: self.spec.grid.clone(),
            dt: self.spec.params.dt,
            runtime_seconds: self.start.elapsed().as_secs_f64(),
            build: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).into(),
            spec_hash: self.spec.hash(),
            extra: self.extra,
        };
        StudyResult {
            kind: self.spec.kind,
            spec: self.spec,
            points,
            samples,
            fits: self.fits,
            checks: self.checks,
            flags: self.flags,
            metadata,
            artifacts: self.artifacts,
        }
    }
}

/// Runs the independent sweep points, in parallel when enabled, and returns
/// results in sweep order.
fn map_points<T: Send>(values: &[f64], f: impl Fn(f64) -> Result<T> + Sync) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        values.par_iter().map(|&v| f(v)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        values.iter().map(|&v| f(v)).collect()
    }
}

/// Unit-mass Gaussian, optionally with a seeded low-mode perturbation
/// `i ε (c·x / w) e^{-|x|²/2w²}` added before normalization.
pub fn gaussian_datum(grid: &Grid, width: f64, perturbation: f64, seed: u64) -> Field {
    let mut phi = Field::gaussian(grid, width);
    if perturbation > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..grid.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let bump = Field::from_fn(grid, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let lin: f64 = x.iter().zip(&c).map(|(a, b)| a * b).sum();
            C64::new(0.0, perturbation * lin / width) * (-0.5 * r2 / (width * width)).exp()
        });
        for (p, b) in phi.values_mut().iter_mut().zip(bump.values()) {
            *p += b;
        }
    }
    phi.normalize();
    phi
}

pub fn initial_datum(spec: &SweepSpec) -> Result<Field> {
    let grid = spec.grid.build()?;
    Ok(gaussian_datum(&grid, spec.initial_width, spec.perturbation, spec.seed))
}

fn difference(a: &Field, b: &Field) -> Result<Field> {
    let values = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
    Field::new(a.grid().clone(), values)
}

fn final_only(horizon: f64, dt: f64) -> EvolveOptions {
    let steps = ((horizon / dt).round() as usize).max(1);
    EvolveOptions::default().store_every(steps).diag_every(steps)
}

/// Distances `‖φ_T − φ_T^{(α)}‖₂` and `‖(−Δ)^{γ/4}(φ_T − φ_T^{(α)})‖₂` for each α,
/// with both flows on the same convolution route.
pub fn alpha_sweep(spec: &SweepSpec) -> Result<StudyResult> {
    let mut b = Builder::new(spec)?;
    let phi0 = initial_datum(spec)?;
    let base = spec.params.with_method(KernelMethod::FourierSymbol);
    let opts = final_only(spec.horizon, base.dt);
    let reference = evolve(&phi0, &base.with_alpha(0.0), spec.horizon, &opts)?;
    let phi_t = reference.final_state().clone();
    let spectral = Spectral::new(phi0.grid());
    let quarter = 0.25 * base.gamma;

    let finals = map_points(&spec.values, |alpha| {
        evolve(&phi0, &base.with_alpha(alpha), spec.horizon, &opts).map(|t| t.final_state().clone())
    })?;
    let mut table = Table::new(["alpha", "l2_distance", "hdot_distance"]);
    for (&alpha, f) in spec.values.iter().zip(&finals) {
        let diff = difference(f, &phi_t)?;
        table.push(vec![
            alpha,
            diff.l2_norm(),
            spectral.homogeneous_sobolev_norm(&diff, quarter),
        ]);
        b.artifacts
            .push((format!("alpha_{alpha}"), Checkpoint::from_field(f, vec![spec.horizon, alpha])));
    }
    b.artifacts
        .push(("alpha_0".into(), Checkpoint::from_field(&phi_t, vec![spec.horizon, 0.0])));

    let l2 = table.column("l2_distance").unwrap();
    let hd = table.column("hdot_distance").unwrap();
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
    if increasing(&l2) && increasing(&hd) {
        let pts = |v: &[f64]| spec.values.iter().copied().zip(v.iter().copied()).collect::<Vec<_>>();
        let p2 = b.fit("l2", &pts(&l2));
        let ph = b.fit("hdot", &pts(&hd));
        match p2 {
            Some(f) => b.check("l2_slope", f.slope >= 0.95, format!("slope {:.4} (target >= 0.95)", f.slope)),
            None => b.check("l2_slope", false, "no fit".into()),
        }
        match ph {
            Some(f) => b.check("hdot_slope", f.slope >= 0.8, format!("slope {:.4} (target >= 0.8)", f.slope)),
            None => b.check("hdot_slope", false, "no fit".into()),
        }
    } else {
        b.flags
            .push("distances are not monotone in alpha; fits suppressed".into());
        b.check("l2_slope", false, "distances not monotone in alpha".into());
        b.check("hdot_slope", false, "distances not monotone in alpha".into());
    }
    Ok(b.finish(table, None))
}

/// Mean-field comparison at every N against the Hartree flow on the same grid.
pub fn n_sweep(spec: &SweepSpec) -> Result<StudyResult> {
    mean_field_sweep(spec, 0.0)
}

/// N-sweep with `α_N = α₀ N^{-κ}`.
pub fn coupled_focusing(spec: &SweepSpec) -> Result<StudyResult> {
    mean_field_sweep(spec, spec.schedule_exponent)
}

struct MeanFieldPoint {
    row: Vec<f64>,
    samples: Vec<Vec<f64>>,
    chain_ok: bool,
    interpolation_ok: bool,
    aborted: Option<String>,
    artifacts: Vec<(String, Checkpoint)>,
}

fn mean_field_sweep(spec: &SweepSpec, exponent: f64) -> Result<StudyResult> {
    let mut b = Builder::new(spec)?;
    let phi0 = initial_datum(spec)?;
    let coupled = spec.kind == StudyKind::CoupledFocusing;
    let sigma = spec.params.sigma;

    let run = |n_value: f64| -> Result<MeanFieldPoint> {
        let n = n_value as usize;
        let alpha = spec.params.alpha * n_value.powf(-exponent);
        let params = spec.params.with_alpha(alpha);
        let mut opts = EvolveOptions::default()
            .store_every(spec.sample_every)
            .diag_every(spec.sample_every);
        if coupled {
            opts = opts.with_blowup_factor(spec.blowup_factor);
        }
        let reference = evolve(&phi0, &params, spec.horizon, &opts)?;
        if let Some(t) = reference.blowup_time {
            return Ok(MeanFieldPoint {
                row: Vec::new(),
                samples: Vec::new(),
                chain_ok: true,
                interpolation_ok: true,
                aborted: Some(format!("N = {n}: reference Hartree run flagged blow-up at t = {t}")),
                artifacts: Vec::new(),
            });
        }
        let psi0 = product_state(&phi0, n, &params)?;
        let mb = MbEvolveOptions {
            dt: params.dt,
            sample_every: spec.sample_every,
        };
        let mut samples = Vec::new();
        let mut chain_ok = true;
        let mut interpolation_ok = true;
        let mut last = None;
        let mut index = 0;
        mb_evolve(&psi0, spec.horizon, &mb, |t, psi| {
            let (ts, phi) = &reference.stored[index];
            index += 1;
            if (ts - t).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "sample clocks diverged: many-body t = {t}, Hartree t = {ts}"
                )));
            }
            let rho = reduce_density_1(psi);
            let a = pickl_from_density(&rho, phi)?;
            let d = schatten_distances(&rho, phi)?;
            let bound = (2.0 * a).sqrt();
            chain_ok &= d.trace_norm >= d.hs_norm - 1e-12 && d.hs_norm <= bound + 1e-8;
            let mut row = vec![n_value, t, a, d.trace_norm, d.hs_norm, bound];
            for &theta in &spec.thetas {
                let c = interpolation_bound_from_density(&rho, psi, phi, theta, spec.interpolation_s, sigma)?;
                interpolation_ok &= c.pass;
                row.push(c.ratio);
            }
            samples.push(row);
            last = Some((a, d, rho));
            Ok(())
        })?;
        let (a, d, rho) = last.expect("final sample observed");
        let phi_t = reference.final_state();
        Ok(MeanFieldPoint {
            row: vec![n_value, alpha, a, d.trace_norm, d.hs_norm],
            samples,
            chain_ok,
            interpolation_ok,
            aborted: None,
            artifacts: vec![
                (
                    format!("density_N{n}"),
                    Checkpoint::from_density(&rho, vec![spec.horizon, n_value, alpha]),
                ),
                (
                    format!("hartree_N{n}"),
                    Checkpoint::from_field(phi_t, vec![spec.horizon, alpha]),
                ),
            ],
        })
    };

    // Many-body points can be large; run them one at a time.
    let results: Vec<MeanFieldPoint> = spec.values.iter().map(|&n| run(n)).collect::<Result<_>>()?;

    let mut table = Table::new(["N", "alpha", "pickl", "trace_distance", "hs_distance"]);
    let mut cols: Vec<String> = ["N", "t", "pickl", "trace_distance", "hs_distance", "sqrt_2a"]
        .map(String::from)
        .to_vec();
    cols.extend(spec.thetas.iter().map(|t| format!("interpolation_ratio_theta_{t}")));
    let mut samples = Table::new(cols);
    let mut chain_ok = true;
    let mut interpolation_ok = true;
    for p in results {
        if let Some(reason) = p.aborted {
            b.flags.push(reason);
            continue;
        }
        table.push(p.row);
        for r in p.samples {
            samples.push(r);
        }
        chain_ok &= p.chain_ok;
        interpolation_ok &= p.interpolation_ok;
        b.artifacts.extend(p.artifacts);
    }

    let ns = table.column("N").unwrap();
    let pts = |name: &str| -> Vec<(f64, f64)> {
        ns.iter().copied().zip(table.column(name).unwrap()).collect()
    };
    let a_fit = b.fit("pickl", &pts("pickl"));
    let tr_fit = b.fit("trace", &pts("trace_distance"));
    b.fit("hs", &pts("hs_distance"));
    b.check(
        "chain",
        chain_ok,
        "Tr >= HS and HS <= sqrt(2a) + 1e-8 at every sample".into(),
    );
    if !spec.thetas.is_empty() {
        b.check(
            "interpolation",
            interpolation_ok,
            "weighted trace distance within the explicit bound at every sample".into(),
        );
    }
    if coupled {
        match tr_fit {
            Some(f) => b.check(
                "trace_slope",
                f.slope <= -0.35,
                format!("slope {:.4} (target <= -0.35)", f.slope),
            ),
            None => b.check("trace_slope", false, "no fit".into()),
        }
    } else {
        match (a_fit, tr_fit) {
            (Some(fa), Some(ft)) => {
                b.check(
                    "pickl_slope",
                    fa.slope <= -0.8,
                    format!("slope {:.4} (target <= -0.8)", fa.slope),
                );
                b.check(
                    "trace_half_slope",
                    (ft.slope - 0.5 * fa.slope).abs() <= 0.3,
                    format!("trace slope {:.4} vs half pickl slope {:.4} (±0.3)", ft.slope, 0.5 * fa.slope),
                );
            }
            _ => b.check("pickl_slope", false, "no fit".into()),
        }
    }
    Ok(b.finish(table, Some(samples)))
}

/// Growth of `‖φ_t‖_{H^s}` for each `s` in `values`.
pub fn persistence(spec: &SweepSpec) -> Result<StudyResult> {
    let mut b = Builder::new(spec)?;
    let phi0 = initial_datum(spec)?;
    let opts = EvolveOptions::default()
        .store_every(spec.sample_every)
        .diag_every(spec.sample_every);
    let traj = evolve(&phi0, &spec.params, spec.horizon, &opts)?;
    let mut table = Table::new(["s", "nu", "max_ratio", "fitted_c", "linear_envelope"]);
    let mut samples = Table::new(["s", "t", "ratio"]);
    let mut envelope_ok = true;
    for &s in &spec.values {
        let r = persistence_report(&traj, s);
        let linear = r.within_linear_envelope(0.2);
        if s < 1.0 {
            envelope_ok &= linear;
        }
        let max_ratio = r.ratios.iter().copied().fold(0.0, f64::max);
        table.push(vec![s, r.nu, max_ratio, r.fitted_c, if linear { 1.0 } else { 0.0 }]);
        for (t, q) in r.times.iter().zip(&r.ratios) {
            samples.push(vec![s, *t, *q]);
        }
        if !r.fitted_c.is_finite() {
            b.flags.push(format!("s = {s}: envelope constant not finite"));
        }
    }
    b.check(
        "linear_envelope",
        envelope_ok,
        "ratio <= (t+1)(1+0.2) for every s < 1".into(),
    );
    b.artifacts
        .push(("final".into(), Checkpoint::from_field(traj.final_state(), vec![spec.horizon])));
    Ok(b.finish(table, Some(samples)))
}

/// Blow-up flags from squeezed ground-state data at `λ = m·λ_c` for each
/// multiple `m`, focusing and defocusing.
pub fn dichotomy_study(spec: &SweepSpec) -> Result<StudyResult> {
    let mut b = Builder::new(spec)?;
    let p = spec.params;
    if !p.is_mass_critical() {
        return Err(Error::config(format!(
            "dichotomy needs sigma = gamma/2, got gamma = {}, sigma = {}",
            p.gamma, p.sigma
        )));
    }
    let grid = spec.grid.build()?;
    let gs = petviashvili_solve(p.gamma, p.sigma, &grid, &PetviashviliOptions::default())?;
    let lambda_c = gs.mass();
    b.extra.insert("critical_mass".into(), lambda_c);
    b.extra.insert("ground_state_residual".into(), gs.residual);
    let phi0 = gs.squeezed_unit(spec.squeeze);

    let runs: Vec<(f64, Sign)> = spec
        .values
        .iter()
        .flat_map(|&m| [(m, Sign::Focusing), (m, Sign::Defocusing)])
        .collect();
    let keys: Vec<f64> = (0..runs.len()).map(|i| i as f64).collect();
    let opts = EvolveOptions::default()
        .with_blowup_factor(spec.blowup_factor)
        .store_every(usize::MAX)
        .diag_every(spec.sample_every);
    let outcomes = map_points(&keys, |k| {
        let (m, mu) = runs[k as usize];
        let params = p.with_lambda(m * lambda_c).with_mu(mu);
        let traj = evolve(&phi0, &params, spec.horizon, &opts)?;
        let report = blowup_monitor(&traj, spec.blowup_factor);
        let energy0 = traj.diagnostics[0].energy;
        Ok((report, energy0, traj.final_state().clone()))
    })?;

    let mut table = Table::new(["multiple", "mu", "lambda", "E0", "max_ratio", "flagged", "flag_time"]);
    let mut negative_flagged = true;
    let mut sub_clear = true;
    let mut defocusing_clear = true;
    for ((m, mu), (report, e0, last)) in runs.iter().zip(outcomes) {
        let flagged = report.flagged;
        table.push(vec![
            *m,
            mu.value(),
            m * lambda_c,
            e0,
            report.max_ratio,
            if flagged { 1.0 } else { 0.0 },
            report.flag_time.unwrap_or(f64::NAN),
        ]);
        match mu {
            Sign::Focusing if e0 < 0.0 => negative_flagged &= flagged,
            Sign::Focusing if *m < 1.0 => sub_clear &= !flagged,
            Sign::Defocusing => defocusing_clear &= !flagged,
            _ => {}
        }
        b.artifacts.push((
            format!("final_m{m}_mu{}", mu.value()),
            Checkpoint::from_field(&last, vec![*m, mu.value()]),
        ));
    }
    b.check(
        "negative_energy_flagged",
        negative_flagged,
        "focusing runs with E(phi0) < 0 raise the flag".into(),
    );
    b.check(
        "subcritical_clear",
        sub_clear,
        "focusing runs below lambda_c stay under the threshold".into(),
    );
    b.check(
        "defocusing_clear",
        defocusing_clear,
        "defocusing runs never flag".into(),
    );
    Ok(b.finish(table, None))
}

pub fn run_study(spec: &SweepSpec) -> Result<StudyResult> {
    match spec.kind {
        StudyKind::AlphaSweep => alpha_sweep(spec),
        StudyKind::NSweep => n_sweep(spec),
        StudyKind::CoupledFocusing => coupled_focusing(spec),
        StudyKind::Persistence => persistence(spec),
        StudyKind::Dichotomy => dichotomy_study(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_power_law() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x| (x, 3.0 * x * x)).collect();
        let f = rate_fit(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn fit_rejects_nonpositive() {
        assert!(matches!(
            rate_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]),
            Err(Error::Fit(_))
        ));
        assert!(rate_fit(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
    }

    #[test]
    fn spec_requires_monotone_values() {
        let g = Grid::new(1, 16, 4.0).unwrap();
        let p = HartreeParams::new(1.0, 1.0, Sign::Defocusing, 1.0).with_alpha(0.5);
        let spec = SweepSpec::new(StudyKind::NSweep, p, vec![2.0, 4.0, 3.0], 0.1, &g);
        assert!(spec.validate().is_err());
        let spec = SweepSpec::new(StudyKind::NSweep, p, vec![2.0, 3.0], 0.1, &g);
        assert!(spec.validate().is_err());
    }
}
