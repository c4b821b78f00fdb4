use crate::error::{Error, Result};
use crate::geometry::{polygon_area, LogGrid};

/// Slope-constrained lower envelope of samples on a square grid, built in the
/// dual: the cell of sample `i` is the set of slopes `σ ∈ P` for which `i`
/// minimizes `u_j - ⟨σ, t_j⟩`. Cells of hull vertices tile `P`; their areas
/// are the Alexandrov masses.
#[derive(Debug, Clone, PartialEq)]
pub struct Hull2d {
    pub cells: Vec<Vec<[f64; 2]>>,
    pub areas: Vec<f64>,
    pub values: Vec<f64>,
    pub slopes: Vec<[f64; 2]>,
    /// `(σ_v, c_v)` with envelope `= max_v ⟨σ_v, t⟩ - c_v`.
    pub dual_vertices: Vec<([f64; 2], f64)>,
}

/// Keep `{σ : ⟨σ, d⟩ ≥ c}` of a convex polygon (Sutherland-Hodgman).
fn clip(poly: &[[f64; 2]], d: [f64; 2], c: f64, tol: f64) -> Vec<[f64; 2]> {
    let n = poly.len();
    let side = |p: &[f64; 2]| p[0] * d[0] + p[1] * d[1] - c;
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        let (sa, sb) = (side(&a), side(&b));
        let ina = sa >= -tol;
        let inb = sb >= -tol;
        if ina {
            out.push(a);
        }
        if ina != inb && (sa - sb).abs() > 0.0 {
            let s = sa / (sa - sb);
            if s > 0.0 && s < 1.0 {
                out.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
            }
        }
    }
    out.dedup_by(|p, q| (p[0] - q[0]).abs() <= tol && (p[1] - q[1]).abs() <= tol);
    if out.len() > 1 {
        let (f, l) = (out[0], out[out.len() - 1]);
        if (f[0] - l[0]).abs() <= tol && (f[1] - l[1]).abs() <= tol {
            out.pop();
        }
    }
    out
}

/// Grid offsets ordered by distance so that cells of non-hull points empty
/// out after a few clips.
fn offsets(n: usize) -> Vec<[isize; 2]> {
    let r = n as isize - 1;
    let mut v: Vec<[isize; 2]> = (-r..=r)
        .flat_map(|a| (-r..=r).map(move |b| [a, b]))
        .filter(|o| *o != [0, 0])
        .collect();
    v.sort_by_key(|o| (o[0] * o[0] + o[1] * o[1], o[0], o[1]));
    v
}

pub fn lower_envelope_2d(grid: &LogGrid, u: &[f64], domain: &[[f64; 2]]) -> Result<Hull2d> {
    let n = grid.n_per_axis();
    if grid.dim() != 2 || u.len() != grid.len() {
        return Err(Error::HullDegenerate("two-dimensional samples required".into()));
    }
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::HullDegenerate("non-finite samples".into()));
    }
    let points = grid.points();
    let scale = domain
        .iter()
        .map(|p| p[0].abs().max(p[1].abs()))
        .fold(1.0, f64::max);
    let tol = 1e-13 * scale;
    let offs = offsets(n);
    let cells: Vec<Vec<[f64; 2]>> = {
        use rayon::prelude::*;
        (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let [a, b] = grid.multi_index(i);
                let mut poly = domain.to_vec();
                for o in &offs {
                    let (ja, jb) = (a as isize + o[0], b as isize + o[1]);
                    if ja < 0 || jb < 0 || ja >= n as isize || jb >= n as isize {
                        continue;
                    }
                    let j = grid.flat_index([ja as usize, jb as usize]);
                    let d = [points[i][0] - points[j][0], points[i][1] - points[j][1]];
                    poly = clip(&poly, d, u[i] - u[j], tol * (d[0].abs() + d[1].abs()));
                    if poly.len() < 3 {
                        break;
                    }
                }
                if poly.len() < 3 {
                    poly.clear();
                }
                poly
            })
            .collect()
    };
    let areas: Vec<f64> = cells.iter().map(|c| polygon_area(c).max(0.0)).collect();
    let total: f64 = areas.iter().sum();
    let target = polygon_area(domain);
    if (total - target).abs() > 1e-9 * target {
        return Err(Error::HullDegenerate(format!(
            "dual cells cover {total}, slope domain has area {target}"
        )));
    }
    let mut dual_vertices = Vec::new();
    for (i, c) in cells.iter().enumerate() {
        for s in c {
            dual_vertices.push((*s, s[0] * points[i][0] + s[1] * points[i][1] - u[i]));
        }
    }
    let eval = |x: [f64; 2]| -> (f64, [f64; 2]) {
        let mut best = (f64::NEG_INFINITY, [0.0; 2]);
        for (s, c) in &dual_vertices {
            let v = s[0] * x[0] + s[1] * x[1] - c;
            if v > best.0 {
                best = (v, *s);
            }
        }
        best
    };
    let mut values = Vec::with_capacity(grid.len());
    let mut slopes = Vec::with_capacity(grid.len());
    for (i, c) in cells.iter().enumerate() {
        if c.is_empty() {
            let (v, s) = eval(points[i]);
            values.push(v);
            slopes.push(s);
        } else {
            values.push(u[i]);
            let k = c.len() as f64;
            slopes.push([
                c.iter().map(|p| p[0]).sum::<f64>() / k,
                c.iter().map(|p| p[1]).sum::<f64>() / k,
            ]);
        }
    }
    Ok(Hull2d {
        cells,
        areas,
        values,
        slopes,
        dual_vertices,
    })
}

impl Hull2d {
    /// The envelope at an arbitrary point: max over the dual vertices.
    pub fn evaluate(&self, x: [f64; 2]) -> f64 {
        self.dual_vertices
            .iter()
            .map(|(s, c)| s[0] * x[0] + s[1] * x[1] - c)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
