use rayon::prelude::*;

use super::grid::LogGrid;
use super::symbol::WeightSymbol;

/// Discrete Hessians of a symbol on a grid, next to the analytic ones.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    pub grid: LogGrid,
    /// Central second differences. Stencils reaching past the box use the
    /// closed-form symbol at the ghost points.
    pub hessian_entries: Vec<[[f64; 2]; 2]>,
    pub analytic: Vec<[[f64; 2]; 2]>,
}

/// Central second-difference Hessian of `u` at `t` with step `h`.
pub fn second_difference(u: &WeightSymbol, t: [f64; 2], h: f64) -> [[f64; 2]; 2] {
    let d = u.dim();
    let at = |dx: f64, dy: f64| u.value(&[t[0] + dx, t[1] + dy][..d]);
    let c = at(0.0, 0.0);
    let mut out = [[0.0; 2]; 2];
    out[0][0] = (at(h, 0.0) - 2.0 * c + at(-h, 0.0)) / (h * h);
    if d == 2 {
        out[1][1] = (at(0.0, h) - 2.0 * c + at(0.0, -h)) / (h * h);
        let mixed = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
        out[0][1] = mixed;
        out[1][0] = mixed;
    }
    out
}

impl CurvatureField {
    pub fn compute(u: &WeightSymbol, grid: &LogGrid) -> Self {
        let h = grid.spacing();
        let (hessian_entries, analytic): (Vec<_>, Vec<_>) = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let t = grid.point(k);
                (second_difference(u, t, h), u.hessian(&t[..grid.dim()]))
            })
            .unzip();
        Self {
            grid: *grid,
            hessian_entries,
            analytic,
        }
    }

    /// Largest entrywise gap between the two paths.
    pub fn max_discrepancy(&self) -> f64 {
        self.hessian_entries
            .iter()
            .zip(&self.analytic)
            .flat_map(|(a, b)| (0..2).flat_map(move |i| (0..2).map(move |j| (a[i][j] - b[i][j]).abs())))
            .fold(0.0, f64::max)
    }
}
