//! Gauss–Legendre rules and the radial integrals behind the kernel symbols.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fixed-order composite rule over an arbitrary list of panel breakpoints.
pub struct PanelRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl PanelRule {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights }
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// Bessel `J0`, rational/asymptotic approximation (abs. error ~1e-8).
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 8.0 {
        let y = x * x;
        let num = 57568490574.0
            + y * (-13362590354.0
                + y * (651619640.7 + y * (-11214424.18 + y * (77392.33017 + y * (-184.9052456)))));
        let den = 57568490411.0
            + y * (1029532985.0 + y * (9494680.718 + y * (59272.64853 + y * (267.8532712 + y))));
        num / den
    } else {
        let z = 8.0 / ax;
        let y = z * z;
        let xx = ax - 0.785398164;
        let p = 1.0
            + y * (-0.1098628627e-2
                + y * (0.2734510407e-4 + y * (-0.2073370639e-5 + y * 0.2093887211e-6)));
        let q = -0.1562499995e-1
            + y * (0.1430488765e-3
                + y * (-0.6911147651e-5 + y * (0.7621095161e-6 - y * 0.934935152e-7)));
        (std::f64::consts::FRAC_2_PI / ax).sqrt() * (xx.cos() * p - z * xx.sin() * q)
    }
}

/// Angular integral of `e^{-i k·x}` over the sphere of radius `r` divided by
/// `r^{d-1}`, as a function of `z = k r`.
pub fn angular_factor(dim: usize, z: f64) -> f64 {
    match dim {
        1 => 2.0 * z.cos(),
        2 => 2.0 * PI * bessel_j0(z),
        _ => {
            if z.abs() < 1e-4 {
                4.0 * PI * (1.0 - z * z / 6.0)
            } else {
                4.0 * PI * z.sin() / z
            }
        }
    }
}

/// `∫_{[-1/2,1/2]^d} |u|^{-β} du`, the unit-cell average of a Riesz kernel.
///
/// Integrates along rays from the origin: each of the `2d` faces contributes
/// `1/(d-β) ∫_face |p|^{-β} dA` (with the `1/2` face distance folded in).
pub fn unit_cell_riesz_average(dim: usize, beta: f64) -> f64 {
    let face_factor = dim as f64 / (dim as f64 - beta);
    match dim {
        1 => face_factor * 0.5f64.powf(-beta),
        2 => {
            let rule = PanelRule::new(32);
            face_factor * rule.integrate(-0.5, 0.5, |y| (0.25 + y * y).powf(-0.5 * beta))
        }
        _ => {
            let rule = PanelRule::new(32);
            face_factor
                * rule.integrate(-0.5, 0.5, |y| {
                    rule.integrate(-0.5, 0.5, |z| (0.25 + y * y + z * z).powf(-0.5 * beta))
                })
        }
    }
}

/// Average of a radial `f(|x|)` over the cell `[-h/2, h/2]^d`, by the same
/// ray decomposition: a face point `p` carries `(h/2)|p|^{-d} ∫_0^{|p|} f(r) r^{d-1} dr`.
pub fn cell_average_radial(dim: usize, h: f64, f: impl Fn(f64) -> f64) -> f64 {
    let rule = PanelRule::new(32);
    let d = dim as i32;
    let half = 0.5 * h;
    let radial = |r: f64| rule.integrate(0.0, r, |t| f(t) * t.powi(d - 1));
    let faces = 2.0 * dim as f64;
    let total = match dim {
        1 => faces * radial(half),
        2 => {
            faces
                * rule.integrate(-half, half, |y| {
                    let r = (half * half + y * y).sqrt();
                    half * radial(r) / r.powi(2)
                })
        }
        _ => {
            faces
                * rule.integrate(-half, half, |y| {
                    rule.integrate(-half, half, |z| {
                        let r = (half * half + y * y + z * z).sqrt();
                        half * radial(r) / r.powi(3)
                    })
                })
        }
    };
    total / h.powi(d)
}
