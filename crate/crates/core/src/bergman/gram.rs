use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{LogGrid, Model, WeightSymbol};
use crate::linalg::{orthonormality_defect, Cholesky, InverseFactor, SymMatrix};
use crate::quadrature::NodeSet;
use crate::sections::RestrictionMap;

/// Terms more than this far below the running maximum of a log-sum-exp are
/// dropped; `e^{-46}` times the node count stays below double precision.
pub(crate) const LOG_PRUNE: f64 = 46.0;

/// The integrand data `u(t)` and `log(w·ρ(t))` at every quadrature node,
/// where `ρ` is the density of the reference Monge-Ampère measure.
#[derive(Debug, Clone)]
pub(crate) struct SampledMeasure {
    pub nodes: Vec<[f64; 2]>,
    pub u: Vec<f64>,
    pub log_w: Vec<f64>,
    pub tag: String,
}

impl SampledMeasure {
    pub fn new(symbol: &WeightSymbol, grid: &LogGrid) -> Self {
        let set = NodeSet::for_grid(grid);
        let d = grid.dim();
        let (u, log_w): (Vec<f64>, Vec<f64>) = set
            .nodes
            .par_iter()
            .zip(&set.weights)
            .map(|(t, w)| {
                let rho = symbol.mu_density(&t[..d]);
                let lw = if rho > 0.0 && *w > 0.0 {
                    (w * rho).ln()
                } else {
                    f64::NEG_INFINITY
                };
                (symbol.value(&t[..d]), lw)
            })
            .unzip();
        Self {
            nodes: set.nodes,
            u,
            log_w,
            tag: set.tag,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// `log ∫ e^{⟨e,t⟩ - m u} dμ`.
    pub fn log_moment(&self, e: [f64; 2], m: f64) -> f64 {
        let value = |k: usize| {
            let t = self.nodes[k];
            e[0] * t[0] + e[1] * t[1] - m * self.u[k] + self.log_w[k]
        };
        let top = (0..self.len()).map(value).fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return top;
        }
        let mut acc = 0.0;
        for k in 0..self.len() {
            let v = value(k) - top;
            if v > -LOG_PRUNE {
                acc += v.exp();
            }
        }
        top + acc.ln()
    }
}

/// Gram matrix of the image basis in scaled form `G = D Ĝ D`,
/// `D = diag(e^{s_i})`, `s_i = ½ log G_ii`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub m: u32,
    pub basis_size: usize,
    pub log_scale: Vec<f64>,
    pub scaled: SymMatrix,
    pub quadrature_tag: String,
    pub node_count: usize,
}

impl GramMatrix {
    /// Unscaled entry; may over- or underflow for large `m`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        (self.log_scale[i] + self.log_scale[j]).exp() * self.scaled.get(i, j)
    }

    pub fn log_diagonal(&self, i: usize) -> f64 {
        2.0 * self.log_scale[i] + self.scaled.get(i, i).ln()
    }
}

pub(crate) fn exponent_f64(e: [i64; 2]) -> [f64; 2] {
    [e[0] as f64, e[1] as f64]
}

/// Diagonal Gram of `exponents` against `e^{-m u} dμ` sampled in `measure`.
/// Distinct monomials are orthogonal for torus-invariant weights, so only
/// the diagonal is integrated and the off-diagonal zeros are exact.
pub(crate) fn diagonal_gram(
    measure: &SampledMeasure,
    exponents: &[[i64; 2]],
    m: u32,
) -> Result<GramMatrix> {
    let log_diag: Vec<f64> = exponents
        .par_iter()
        .map(|e| measure.log_moment(exponent_f64(*e), f64::from(m)))
        .collect();
    if log_diag.iter().any(|v| !v.is_finite()) {
        return Err(Error::QuadratureUnderflow { m });
    }
    Ok(GramMatrix {
        m,
        basis_size: exponents.len(),
        log_scale: log_diag.iter().map(|v| 0.5 * v).collect(),
        scaled: SymMatrix::Diagonal(vec![1.0; exponents.len()]),
        quadrature_tag: measure.tag.clone(),
        node_count: measure.len(),
    })
}

/// Gram of the image basis on `Z` against `e^{-m ι*u} dμ`.
pub fn gram(model: &Model, rmap: &RestrictionMap, m: u32) -> Result<GramMatrix> {
    if rmap.m() != m {
        return Err(Error::Precondition(format!(
            "restriction map is at level {}, asked for {m}",
            rmap.m()
        )));
    }
    let measure = SampledMeasure::new(model.restricted(), model.grid());
    let g = diagonal_gram(&measure, &rmap.target_exponents, m)?;
    Cholesky::new(&g.scaled)?;
    Ok(g)
}

/// `C = D⁻¹ L̂⁻ᵀ` with `Ĝ = L̂ L̂ᵀ`, so `Cᵀ G C = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalTransform {
    pub m: u32,
    pub log_scale: Vec<f64>,
    pub cholesky: Cholesky,
    /// Squared pivot ratio of `L̂`.
    pub conditioning: f64,
}

pub fn orthonormalize(g: &GramMatrix) -> Result<OrthonormalTransform> {
    let cholesky = Cholesky::new(&g.scaled)?;
    Ok(OrthonormalTransform {
        m: g.m,
        log_scale: g.log_scale.clone(),
        conditioning: cholesky.pivot_ratio(),
        cholesky,
    })
}

impl OrthonormalTransform {
    /// The scaled factor `L̂⁻ᵀ`; `C = D⁻¹ L̂⁻ᵀ`.
    pub fn scaled_matrix(&self) -> InverseFactor {
        self.cholesky.inverse_transform()
    }

    /// `‖Ĉᵀ Ĝ Ĉ - I‖_F / ‖I‖_F`; the diagonal scaling cancels exactly.
    pub fn defect(&self, g: &GramMatrix) -> f64 {
        orthonormality_defect(&g.scaled, &self.scaled_matrix())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        build_model, MomentPolytope, Perturbation, SubvarietyDescriptor, SubvarietyKind,
    };
    use crate::sections::{restriction_map, section_basis};

    fn p1_model(n: usize) -> Model {
        let p = MomentPolytope::interval(1);
        build_model(
            p.clone(),
            SubvarietyDescriptor::ambient_of(p.clone()),
            WeightSymbol::for_polytope(&p, Perturbation::Zero, 12.0),
            LogGrid::new(1, n, 12.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn fubini_study_entries_are_beta_values() {
        let model = p1_model(257);
        for m in [2u32, 7, 20] {
            let basis = section_basis(model.polytope(), m).unwrap();
            let rmap = restriction_map(&basis, model.subvariety()).unwrap();
            let g = gram(&model, &rmap, m).unwrap();
            assert!(g.scaled.is_diagonal());
            assert_eq!(g.scaled.get(0, 1), 0.0);
            for k in 0..=m as usize {
                // entry(k)/entry(0) = 1 / C(m, k)
                let ratio = (g.log_diagonal(k) - g.log_diagonal(0)).exp();
                let binom = (0..k).fold(1.0, |acc, i| acc * (m as f64 - i as f64) / (i as f64 + 1.0));
                assert!((ratio * binom - 1.0).abs() < 1e-8, "m={m} k={k}");
            }
            // entry(0) = 1/(m+1)
            assert!((g.entry(0, 0) * (m as f64 + 1.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_curve_against_double_resolution() {
        let rect = MomentPolytope::rectangle(1, 1);
        let sub = SubvarietyDescriptor::new(SubvarietyKind::DiagonalCurve, rect.clone()).unwrap();
        let w = WeightSymbol::for_polytope(&rect, Perturbation::Zero, 12.0);
        let coarse = build_model(rect.clone(), sub.clone(), w.clone(), LogGrid::new(1, 65, 12.0).unwrap()).unwrap();
        let fine = coarse.with_grid(LogGrid::new(1, 129, 12.0).unwrap()).unwrap();
        let basis = section_basis(&rect, 1).unwrap();
        let rmap = restriction_map(&basis, &sub).unwrap();
        let a = gram(&coarse, &rmap, 1).unwrap();
        let b = gram(&fine, &rmap, 1).unwrap();
        assert_eq!(a.basis_size, 3);
        for k in 0..3 {
            assert!((a.entry(k, k) / b.entry(k, k) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn level_mismatch_is_rejected() {
        let model = p1_model(65);
        let basis = section_basis(model.polytope(), 3).unwrap();
        let rmap = restriction_map(&basis, model.subvariety()).unwrap();
        assert!(gram(&model, &rmap, 4).is_err());
    }

    #[test]
    fn transform_orthonormalizes() {
        let model = p1_model(129);
        let basis = section_basis(model.polytope(), 64).unwrap();
        let rmap = restriction_map(&basis, model.subvariety()).unwrap();
        let g = gram(&model, &rmap, 64).unwrap();
        let onb = orthonormalize(&g).unwrap();
        assert!(onb.defect(&g) < 1e-10);
        assert_eq!(onb.conditioning, 1.0);
    }
}
