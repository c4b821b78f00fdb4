//! Composite Gauss-Legendre rules on the log-coordinate box, with the two
//! half-line tails mapped onto `(0, 1)` so integrals over all of `ℝ` are
//! captured rather than truncated.

use crate::geometry::LogGrid;

pub const PANEL_POINTS: usize = 16;
pub const TAIL_POINTS: usize = 24;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// A one-dimensional rule on `ℝ`: GL panels on `[-T, T]` plus the two tails
/// `t = ±(T - ln y)`, `y ∈ (0, 1)`, with Jacobian `1/y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    pub fn composite(halfwidth: f64, panels: usize, panel_pts: usize, tail_pts: usize) -> Self {
        let (gx, gw) = gauss_legendre(panel_pts);
        let (tx, tw) = gauss_legendre(tail_pts);
        let mut nodes = Vec::with_capacity(panels * panel_pts + 2 * tail_pts);
        let mut weights = Vec::with_capacity(nodes.capacity());
        // left tail, ascending in t
        for (x, w) in tx.iter().zip(&tw) {
            let y = 0.5 * (x + 1.0);
            nodes.push(-halfwidth + y.ln());
            weights.push(0.5 * w / y);
        }
        let width = 2.0 * halfwidth / panels as f64;
        for p in 0..panels {
            let a = -halfwidth + p as f64 * width;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(a + 0.5 * width * (x + 1.0));
                weights.push(0.5 * width * w);
            }
        }
        for (x, w) in tx.iter().zip(&tw).rev() {
            let y = 0.5 * (x + 1.0);
            nodes.push(halfwidth - y.ln());
            weights.push(0.5 * w / y);
        }
        Self { nodes, weights }
    }

    /// Panels aligned with the grid cells.
    pub fn for_grid(grid: &LogGrid) -> Self {
        Self::composite(grid.halfwidth(), grid.n_per_axis() - 1, PANEL_POINTS, TAIL_POINTS)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(t, w)| w * f(*t)).sum()
    }
}

/// Quadrature nodes over `ℝ^dim` (tensor product in two dimensions).
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    pub dim: usize,
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub tag: String,
}

impl NodeSet {
    pub fn for_grid(grid: &LogGrid) -> Self {
        let rule = Rule1d::for_grid(grid);
        let tag = format!(
            "gauss_legendre_{PANEL_POINTS}x{}_tails_{TAIL_POINTS}",
            grid.n_per_axis() - 1
        );
        match grid.dim() {
            1 => NodeSet {
                dim: 1,
                nodes: rule.nodes.iter().map(|&t| [t, 0.0]).collect(),
                weights: rule.weights,
                tag,
            },
            _ => {
                let k = rule.nodes.len();
                let mut nodes = Vec::with_capacity(k * k);
                let mut weights = Vec::with_capacity(k * k);
                for i in 0..k {
                    for j in 0..k {
                        nodes.push([rule.nodes[i], rule.nodes[j]]);
                        weights.push(rule.weights[i] * rule.weights[j]);
                    }
                }
                NodeSet {
                    dim: 2,
                    nodes,
                    weights,
                    tag: format!("{tag}_tensor"),
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(t, w)| w * f(*t)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        for n in [1, 2, 5, 16, 24] {
            let (x, w) = gauss_legendre(n);
            for k in 0..2 * n {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let want = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((got - want).abs() < 1e-14, "n={n} k={k}: {got} vs {want}");
            }
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    fn logistic_density(t: f64) -> f64 {
        let s = 1.0 / (1.0 + (-t).exp());
        s * (1.0 - s)
    }

    #[test]
    fn whole_line_mass_with_tails() {
        let grid = LogGrid::new(1, 257, 12.0).unwrap();
        let rule = Rule1d::for_grid(&grid);
        let total = rule.integrate(logistic_density);
        assert!((total - 1.0).abs() < 1e-14, "{total}");
        // Truncation alone would miss 2/(1 + e^12) ≈ 1.2e-5.
        let truncated: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .filter(|(t, _)| t.abs() <= 12.0)
            .map(|(t, w)| w * logistic_density(*t))
            .sum();
        assert!((1.0 - truncated) > 1e-6);
    }

    #[test]
    fn beta_integrals() {
        // ∫ e^{kt} (1 + e^t)^{-m} · e^t/(1+e^t)² dt = B(k+1, m-k+1).
        let grid = LogGrid::new(1, 129, 12.0).unwrap();
        let rule = Rule1d::for_grid(&grid);
        let m = 6;
        for k in 0..=m {
            let got = rule.integrate(|t| {
                (k as f64 * t - m as f64 * (1.0 + t.exp()).ln()).exp() * logistic_density(t)
            });
            let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
            let want = fact(k) * fact(m - k) / fact(m + 1);
            assert!(((got - want) / want).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn tensor_rule_mass() {
        let grid = LogGrid::new(2, 33, 12.0).unwrap();
        let nodes = NodeSet::for_grid(&grid);
        let total = nodes.integrate(|t| {
            let z = 1.0 + t[0].exp() + t[1].exp();
            2.0 * (t[0] + t[1]).exp() / (z * z * z)
        });
        // The corner tails meet the ridge t1 = t2 of the simplex density,
        // which the tensor rule resolves only to ~1e-9.
        assert!((total - 1.0).abs() < 1e-8, "{total}");
    }
}
