use nalgebra::SymmetricEigen;
use rayon::prelude::*;

use super::gram::{diagonal_gram, exponent_f64, orthonormalize, GramMatrix, OrthonormalTransform, SampledMeasure, LOG_PRUNE};
use crate::error::{Error, Result};
use crate::geometry::{LogGrid, Model};
use crate::linalg::SymMatrix;
use crate::sections::{restriction_map, section_basis, RestrictionMap};

/// `B_{X|Z}(mφ)` sampled on a grid over `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    pub m: u32,
    pub grid: LogGrid,
    pub values: Vec<f64>,
    pub log_values: Vec<f64>,
}

/// Everything needed to evaluate the kernel at level `m`.
#[derive(Debug, Clone)]
pub struct BergmanLevel {
    pub m: u32,
    pub rmap: RestrictionMap,
    pub gram: GramMatrix,
    pub onb: OrthonormalTransform,
    measure: SampledMeasure,
}

impl BergmanLevel {
    pub fn new(model: &Model, m: u32) -> Result<Self> {
        let measure = SampledMeasure::new(model.restricted(), model.grid());
        Self::with_measure(model, measure, m)
    }

    pub(crate) fn with_measure(model: &Model, measure: SampledMeasure, m: u32) -> Result<Self> {
        let basis = section_basis(model.polytope(), m)?;
        let rmap = restriction_map(&basis, model.subvariety())?;
        let gram = diagonal_gram(&measure, &rmap.target_exponents, m)?;
        let onb = orthonormalize(&gram)?;
        Ok(Self {
            m,
            rmap,
            gram,
            onb,
            measure,
        })
    }

    pub fn image_dims(&self) -> usize {
        self.rmap.image_dims()
    }

    /// `log B` at a point with known symbol value `u = ι*u(t)`.
    pub fn log_kernel_at(&self, t: [f64; 2], u: f64) -> f64 {
        log_kernel(&self.rmap, &self.onb, t, u)
    }

    pub fn kernel_grid(&self, model: &Model, grid: &LogGrid) -> Result<KernelGrid> {
        kernel_eval(model, &self.rmap, &self.onb, self.m, grid)
    }

    /// `∫_Z B dμ` on the quadrature nodes used for the Gram matrix.
    pub fn trace(&self) -> f64 {
        let terms: Vec<f64> = (0..self.measure.len())
            .into_par_iter()
            .map(|k| {
                let lw = self.measure.log_w[k];
                if lw == f64::NEG_INFINITY {
                    return 0.0;
                }
                (self.log_kernel_at(self.measure.nodes[k], self.measure.u[k]) + lw).exp()
            })
            .collect();
        terms.iter().sum()
    }

    /// `∫ χ·B dμ` on the Gram quadrature nodes.
    pub fn pairing(&self, chi: impl Fn([f64; 2]) -> f64 + Sync) -> f64 {
        let terms: Vec<f64> = (0..self.measure.len())
            .into_par_iter()
            .map(|k| {
                let lw = self.measure.log_w[k];
                if lw == f64::NEG_INFINITY {
                    return 0.0;
                }
                let t = self.measure.nodes[k];
                chi(t) * (self.log_kernel_at(t, self.measure.u[k]) + lw).exp()
            })
            .collect();
        terms.iter().sum()
    }
}

/// `log(e(t)ᵀ G⁻¹ e(t)) - m u` through the scaled Cholesky factor:
/// `a_k = (⟨α_k, t⟩ - m u)/2 - s_k`, `L̂ y = e^{a - a*}`, `log B = 2a* + log|y|²`.
fn log_kernel(rmap: &RestrictionMap, onb: &OrthonormalTransform, t: [f64; 2], u: f64) -> f64 {
    let m = f64::from(onb.m);
    let a: Vec<f64> = rmap
        .target_exponents
        .iter()
        .zip(&onb.log_scale)
        .map(|(e, s)| {
            let e = exponent_f64(*e);
            0.5 * (e[0] * t[0] + e[1] * t[1] - m * u) - s
        })
        .collect();
    let top = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return f64::NEG_INFINITY;
    }
    let norm2 = match onb.cholesky.factor() {
        SymMatrix::Diagonal(d) => a
            .iter()
            .zip(d)
            .filter(|(x, _)| **x - top > -0.5 * LOG_PRUNE)
            .map(|(x, d)| {
                let y = (x - top).exp() / d;
                y * y
            })
            .sum::<f64>(),
        SymMatrix::Dense(_) => {
            let e: Vec<f64> = a.iter().map(|x| (x - top).exp()).collect();
            onb.cholesky.solve_lower(&e).iter().map(|y| y * y).sum()
        }
    };
    2.0 * top + norm2.ln()
}

fn check_level(rmap: &RestrictionMap, onb: &OrthonormalTransform, m: u32) -> Result<()> {
    if rmap.m() != m || onb.m != m || onb.log_scale.len() != rmap.image_dims() {
        return Err(Error::Precondition(format!(
            "kernel inputs disagree on the level (rmap {}, transform {}, m {m})",
            rmap.m(),
            onb.m
        )));
    }
    Ok(())
}

pub fn kernel_eval(
    model: &Model,
    rmap: &RestrictionMap,
    onb: &OrthonormalTransform,
    m: u32,
    zgrid: &LogGrid,
) -> Result<KernelGrid> {
    check_level(rmap, onb, m)?;
    if zgrid.dim() != model.p() {
        return Err(Error::InvalidGrid(format!(
            "kernel grid has dimension {}, Z has {}",
            zgrid.dim(),
            model.p()
        )));
    }
    let d = zgrid.dim();
    let u = model.restricted();
    let log_values: Vec<f64> = (0..zgrid.len())
        .into_par_iter()
        .map(|k| {
            let t = zgrid.point(k);
            log_kernel(rmap, onb, t, u.value(&t[..d]))
        })
        .collect();
    Ok(KernelGrid {
        m,
        grid: *zgrid,
        values: log_values.iter().map(|v| v.exp()).collect(),
        log_values,
    })
}

/// `∫_Z B dμ` for a level built by the caller.
pub fn trace(model: &Model, rmap: &RestrictionMap, onb: &OrthonormalTransform) -> Result<f64> {
    check_level(rmap, onb, onb.m)?;
    let measure = SampledMeasure::new(model.restricted(), model.grid());
    let terms: Vec<f64> = (0..measure.len())
        .into_par_iter()
        .map(|k| {
            let lw = measure.log_w[k];
            if lw == f64::NEG_INFINITY {
                return 0.0;
            }
            (log_kernel(rmap, onb, measure.nodes[k], measure.u[k]) + lw).exp()
        })
        .collect();
    Ok(terms.iter().sum())
}

/// The Bergman potential `u_m = ι*u + (1/m) log B` on `zgrid`.
pub fn fs_potential(model: &Model, rmap: &RestrictionMap, m: u32, zgrid: &LogGrid) -> Result<Vec<f64>> {
    let level = BergmanLevel::new(model, m)?;
    if level.rmap != *rmap {
        return Err(Error::Precondition("restriction map does not match the model".into()));
    }
    let kernel = level.kernel_grid(model, zgrid)?;
    potential_from_kernel(model, &kernel)
}

pub(crate) fn potential_from_kernel(model: &Model, kernel: &KernelGrid) -> Result<Vec<f64>> {
    let masked: Vec<usize> = kernel
        .log_values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_finite())
        .map(|(k, _)| k)
        .collect();
    if !masked.is_empty() {
        return Err(Error::LogOfZero { masked });
    }
    let d = kernel.grid.dim();
    let m = f64::from(kernel.m);
    Ok((0..kernel.grid.len())
        .map(|k| {
            let t = kernel.grid.point(k);
            model.restricted().value(&t[..d]) + kernel.log_values[k] / m
        })
        .collect())
}

/// `B(z)` through the Cholesky path, and the top Rayleigh quotient of the
/// rank-one evaluation form `e eᵀ` against `G`, computed from a symmetric
/// eigendecomposition of the scaled Gram: with `Ĝ = V Λ Vᵀ`, the only nonzero
/// eigenvalue of `Ĝ^{-1/2} ê êᵀ Ĝ^{-1/2}` is `|Λ^{-1/2} Vᵀ ê|²`.
pub fn extremal_check(model: &Model, rmap: &RestrictionMap, m: u32, z: [f64; 2]) -> Result<(f64, f64)> {
    let level = BergmanLevel::new(model, m)?;
    if level.rmap != *rmap {
        return Err(Error::Precondition("restriction map does not match the model".into()));
    }
    let d = model.p();
    let u = model.restricted().value(&z[..d]);
    let b = level.log_kernel_at(z, u).exp();

    let mf = f64::from(m);
    let logs: Vec<f64> = rmap
        .target_exponents
        .iter()
        .map(|e| 0.5 * (e[0] as f64 * z[0] + e[1] as f64 * z[1] - mf * u))
        .collect();
    // Independent scaling: the plain maximum of the unscaled log evaluations
    // and the unscaled Gram diagonal, rebalanced by its own geometric mean.
    let log_g: Vec<f64> = (0..rmap.image_dims()).map(|i| level.gram.log_diagonal(i)).collect();
    let shift = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let rayleigh = match &level.gram.scaled {
        SymMatrix::Diagonal(_) => {
            let terms: Vec<f64> = logs.iter().zip(&log_g).map(|(l, g)| 2.0 * (l - shift) - g).collect();
            let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = terms.iter().map(|x| (x - top).exp()).sum();
            (2.0 * shift + top + s.ln()).exp()
        }
        SymMatrix::Dense(a) => {
            let eig = SymmetricEigen::new(a.clone());
            let e: Vec<f64> = logs
                .iter()
                .zip(&level.gram.log_scale)
                .map(|(l, s)| (l - s - shift).exp())
                .collect();
            let mut acc = 0.0;
            for (k, lambda) in eig.eigenvalues.iter().enumerate() {
                let proj: f64 = (0..e.len()).map(|i| eig.eigenvectors[(i, k)] * e[i]).sum();
                acc += proj * proj / lambda;
            }
            (2.0 * shift).exp() * acc
        }
    };
    Ok((b, rayleigh))
}
