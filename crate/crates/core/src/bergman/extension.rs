use nalgebra::{DMatrix, SymmetricEigen};

use super::gram::{diagonal_gram, GramMatrix, SampledMeasure};
use crate::error::{Error, Result};
use crate::geometry::Model;
use crate::linalg::{Cholesky, SymMatrix};
use crate::sections::RestrictionMap;

/// Minimal-norm extension of one section of the image.
#[derive(Debug, Clone, PartialEq)]
pub struct Extension {
    /// Coefficients on the ambient monomial basis.
    pub coefficients: Vec<f64>,
    /// `‖s̃‖²_{mφ,X} / ‖s‖²_{mφ,Z}`.
    pub ratio: f64,
}

/// Worst-case extension ratio over the image, plus the ratio for each image
/// monomial.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionReport {
    pub m: u32,
    pub operator_norm: f64,
    pub per_basis: Vec<f64>,
}

/// Norms on both sides in the scaled bases `ê = e/‖e‖`, with the restriction
/// `R̂ = D_Z R D_X⁻¹` and `M = R̂ Ĝ_X⁻¹ R̂ᵀ`. The least-norm preimage of `ĉ`
/// is `Ĝ_X⁻¹ R̂ᵀ M⁻¹ ĉ` with squared norm `ĉᵀ M⁻¹ ĉ`.
struct ExtensionSystem {
    gx: GramMatrix,
    gz: GramMatrix,
    /// Columns `Ĝ_X⁻¹ R̂ᵀ e_j`.
    gx_inv_rt: Vec<Vec<f64>>,
    mmat: DMatrix<f64>,
    chol_m: Cholesky,
}

fn ambient_gram(model: &Model, rmap: &RestrictionMap) -> Result<GramMatrix> {
    let measure = SampledMeasure::new(model.weight(), model.ambient_grid());
    let g = diagonal_gram(&measure, &rmap.source.exponents, rmap.m())?;
    Ok(g)
}

impl ExtensionSystem {
    fn new(model: &Model, rmap: &RestrictionMap, m: u32) -> Result<Self> {
        if rmap.m() != m {
            return Err(Error::Precondition(format!("restriction map is at level {}", rmap.m())));
        }
        let gz = super::gram::gram(model, rmap, m)?;
        let gx = if model.subvariety().is_ambient() {
            gz.clone()
        } else {
            ambient_gram(model, rmap)?
        };
        let chol_x = Cholesky::new(&gx.scaled)?;
        let nz = rmap.image_dims();
        let nx = rmap.source_dims();
        let gx_inv_rt: Vec<Vec<f64>> = (0..nz)
            .map(|j| {
                let mut col = vec![0.0; nx];
                for &a in &rmap.fibers[j] {
                    col[a] = (gz.log_scale[j] - gx.log_scale[a]).exp();
                }
                chol_x.solve(&col)
            })
            .collect();
        let mut mmat = DMatrix::<f64>::zeros(nz, nz);
        for i in 0..nz {
            for j in 0..nz {
                // (R̂ Ĝ_X⁻¹ R̂ᵀ)_ij = Σ_{α ∈ fiber i} R̂_iα (Ĝ_X⁻¹ R̂ᵀ e_j)_α
                mmat[(i, j)] = rmap.fibers[i]
                    .iter()
                    .map(|&a| (gz.log_scale[i] - gx.log_scale[a]).exp() * gx_inv_rt[j][a])
                    .sum();
            }
        }
        let sym = 0.5 * (&mmat + mmat.transpose());
        let chol_m = Cholesky::new(&SymMatrix::Dense(sym.clone()))?;
        Ok(Self {
            gx,
            gz,
            gx_inv_rt,
            mmat: sym,
            chol_m,
        })
    }

    fn extend(&self, target: &[f64]) -> Extension {
        let c_hat: Vec<f64> = target
            .iter()
            .zip(&self.gz.log_scale)
            .map(|(c, s)| c * s.exp())
            .collect();
        let lam = self.chol_m.solve(&c_hat);
        let nx = self.gx.basis_size;
        let mut a_hat = vec![0.0; nx];
        for (j, l) in lam.iter().enumerate() {
            for (a, v) in a_hat.iter_mut().zip(&self.gx_inv_rt[j]) {
                *a += l * v;
            }
        }
        let norm_x: f64 = a_hat
            .iter()
            .zip(self.gx.scaled.mul_vec(&a_hat))
            .map(|(a, b)| a * b)
            .sum();
        let norm_z: f64 = c_hat
            .iter()
            .zip(self.gz.scaled.mul_vec(&c_hat))
            .map(|(a, b)| a * b)
            .sum();
        let coefficients = a_hat
            .iter()
            .zip(&self.gx.log_scale)
            .map(|(a, s)| a * (-s).exp())
            .collect();
        Extension {
            coefficients,
            ratio: norm_x / norm_z,
        }
    }

    /// `max ĉᵀM⁻¹ĉ / ĉᵀĜ_Zĉ = 1/λ_min(Lᵀ M L)` with `Ĝ_Z = L Lᵀ`.
    fn report(&self, m: u32) -> ExtensionReport {
        let nz = self.gz.basis_size;
        let per_basis: Vec<f64> = (0..nz)
            .map(|j| {
                let mut e = vec![0.0; nz];
                e[j] = 1.0;
                self.chol_m.solve(&e)[j] / self.gz.scaled.get(j, j)
            })
            .collect();
        let diagonal = self.gz.scaled.is_diagonal()
            && (0..nz).all(|i| (0..nz).all(|j| i == j || self.mmat[(i, j)] == 0.0));
        let lambda_min = if diagonal {
            (0..nz)
                .map(|i| self.mmat[(i, i)] / self.gz.scaled.get(i, i))
                .fold(f64::INFINITY, f64::min)
        } else {
            let l = self.gz_factor();
            let lml = l.transpose() * &self.mmat * &l;
            SymmetricEigen::new(lml).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        ExtensionReport {
            m,
            operator_norm: 1.0 / lambda_min,
            per_basis,
        }
    }

    fn gz_factor(&self) -> DMatrix<f64> {
        let ch = Cholesky::new(&self.gz.scaled).expect("Gram on Z factored in gram()");
        ch.factor().to_dense()
    }

    #[cfg(test)]
    fn scaled_parts(&self) -> (&GramMatrix, &GramMatrix) {
        (&self.gx, &self.gz)
    }
}

/// Least-norm ambient preimage of `target`, given in the image monomial basis.
pub fn minimal_norm_extension(
    model: &Model,
    rmap: &RestrictionMap,
    m: u32,
    target: &[f64],
) -> Result<Extension> {
    if target.len() != rmap.image_dims() {
        return Err(Error::NotInImage(format!(
            "target has {} coefficients, the image has dimension {}",
            target.len(),
            rmap.image_dims()
        )));
    }
    if target.iter().all(|c| *c == 0.0) || target.iter().any(|c| !c.is_finite()) {
        return Err(Error::NotInImage("target must be a finite nonzero section".into()));
    }
    Ok(ExtensionSystem::new(model, rmap, m)?.extend(target))
}

pub fn extension_report(model: &Model, rmap: &RestrictionMap, m: u32) -> Result<ExtensionReport> {
    Ok(ExtensionSystem::new(model, rmap, m)?.report(m))
}
