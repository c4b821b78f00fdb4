//! Symmetric positive-definite matrices and their Cholesky factors.
//!
//! Gram matrices of torus-invariant weights are diagonal, so both a diagonal
//! and a dense representation are carried and every routine keeps the
//! diagonal case exact (off-diagonal zeros are never produced by rounding).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest tolerated ratio between the squared extreme Cholesky pivots.
pub const PIVOT_RATIO_LIMIT: f64 = 1e14;

#[derive(Debug, Clone, PartialEq)]
pub enum SymMatrix {
    Diagonal(Vec<f64>),
    Dense(DMatrix<f64>),
}

impl SymMatrix {
    pub fn dim(&self) -> usize {
        match self {
            SymMatrix::Diagonal(d) => d.len(),
            SymMatrix::Dense(a) => a.nrows(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            SymMatrix::Diagonal(d) => {
                if i == j {
                    d[i]
                } else {
                    0.0
                }
            }
            SymMatrix::Dense(a) => a[(i, j)],
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, SymMatrix::Diagonal(_))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            SymMatrix::Diagonal(d) => DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)),
            SymMatrix::Dense(a) => a.clone(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        match self {
            SymMatrix::Diagonal(d) => d.iter().zip(x).map(|(a, b)| a * b).collect(),
            SymMatrix::Dense(a) => (0..a.nrows())
                .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
                .collect(),
        }
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        match self {
            SymMatrix::Diagonal(_) => 0.0,
            SymMatrix::Dense(a) => {
                let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
                let mut worst = 0.0f64;
                for i in 0..a.nrows() {
                    for j in 0..i {
                        worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
                    }
                }
                worst / scale
            }
        }
    }
}

/// `A = L Lᵀ` with `L` lower triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    factor: SymMatrix,
    pivot_ratio: f64,
}

impl Cholesky {
    /// Factor with the default conditioning guard.
    pub fn new(a: &SymMatrix) -> Result<Self> {
        Self::with_limit(a, PIVOT_RATIO_LIMIT)
    }

    pub fn with_limit(a: &SymMatrix, limit: f64) -> Result<Self> {
        let factor = match a {
            SymMatrix::Diagonal(d) => {
                let mut l = Vec::with_capacity(d.len());
                for (index, &pivot) in d.iter().enumerate() {
                    if !(pivot > 0.0 && pivot.is_finite()) {
                        return Err(Error::NotPositiveDefinite { index, pivot });
                    }
                    l.push(pivot.sqrt());
                }
                SymMatrix::Diagonal(l)
            }
            SymMatrix::Dense(a) => {
                let n = a.nrows();
                let mut l = DMatrix::<f64>::zeros(n, n);
                for j in 0..n {
                    let mut pivot = a[(j, j)];
                    for k in 0..j {
                        pivot -= l[(j, k)] * l[(j, k)];
                    }
                    if !(pivot > 0.0 && pivot.is_finite()) {
                        return Err(Error::NotPositiveDefinite { index: j, pivot });
                    }
                    let d = pivot.sqrt();
                    l[(j, j)] = d;
                    for i in j + 1..n {
                        let mut s = a[(i, j)];
                        for k in 0..j {
                            s -= l[(i, k)] * l[(j, k)];
                        }
                        l[(i, j)] = s / d;
                    }
                }
                SymMatrix::Dense(l)
            }
        };
        let n = factor.dim();
        let (lo, hi) = (0..n).fold((f64::INFINITY, 0.0f64), |(lo, hi), i| {
            let d = factor.get(i, i);
            (lo.min(d), hi.max(d))
        });
        let pivot_ratio = if n == 0 { 1.0 } else { (hi / lo).powi(2) };
        if pivot_ratio > limit {
            return Err(Error::IllConditioned {
                ratio: pivot_ratio,
                limit,
            });
        }
        Ok(Self {
            factor,
            pivot_ratio,
        })
    }

    pub fn dim(&self) -> usize {
        self.factor.dim()
    }

    /// Squared ratio of the largest to the smallest diagonal entry of `L`.
    pub fn pivot_ratio(&self) -> f64 {
        self.pivot_ratio
    }

    pub fn factor(&self) -> &SymMatrix {
        &self.factor
    }

    /// Solve `L y = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        match &self.factor {
            SymMatrix::Diagonal(d) => b.iter().zip(d).map(|(x, d)| x / d).collect(),
            SymMatrix::Dense(l) => {
                let n = l.nrows();
                let mut y = b.to_vec();
                for i in 0..n {
                    let mut s = y[i];
                    for k in 0..i {
                        s -= l[(i, k)] * y[k];
                    }
                    y[i] = s / l[(i, i)];
                }
                y
            }
        }
    }

    /// Solve `Lᵀ x = y`.
    pub fn solve_upper(&self, y: &[f64]) -> Vec<f64> {
        match &self.factor {
            SymMatrix::Diagonal(d) => y.iter().zip(d).map(|(x, d)| x / d).collect(),
            SymMatrix::Dense(l) => {
                let n = l.nrows();
                let mut x = y.to_vec();
                for i in (0..n).rev() {
                    let mut s = x[i];
                    for k in i + 1..n {
                        s -= l[(k, i)] * x[k];
                    }
                    x[i] = s / l[(i, i)];
                }
                x
            }
        }
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `C = L⁻ᵀ`, so that `Cᵀ A C = I`.
    pub fn inverse_transform(&self) -> InverseFactor {
        match &self.factor {
            SymMatrix::Diagonal(d) => InverseFactor::Diagonal(d.iter().map(|x| 1.0 / x).collect()),
            SymMatrix::Dense(l) => {
                let n = l.nrows();
                let mut c = DMatrix::<f64>::zeros(n, n);
                for j in 0..n {
                    let mut e = vec![0.0; n];
                    e[j] = 1.0;
                    let col = self.solve_upper(&e);
                    for i in 0..n {
                        c[(i, j)] = col[i];
                    }
                }
                InverseFactor::Upper(c)
            }
        }
    }
}

/// The orthonormalizing transform: diagonal, or dense upper triangular.
#[derive(Debug, Clone, PartialEq)]
pub enum InverseFactor {
    Diagonal(Vec<f64>),
    Upper(DMatrix<f64>),
}

impl InverseFactor {
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            InverseFactor::Diagonal(d) => {
                DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d))
            }
            InverseFactor::Upper(c) => c.clone(),
        }
    }
}

/// Relative Frobenius distance of `Cᵀ A C` from the identity.
pub fn orthonormality_defect(a: &SymMatrix, c: &InverseFactor) -> f64 {
    let a = a.to_dense();
    let c = c.to_dense();
    let prod = c.transpose() * a * c;
    let n = prod.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    (prod - &id).norm() / id.norm().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &b * b.transpose() + DMatrix::<f64>::identity(n, n) * 0.5
    }

    #[test]
    fn explicit_diagonal() {
        let ch = Cholesky::new(&SymMatrix::Diagonal(vec![4.0, 9.0])).unwrap();
        assert_eq!(ch.inverse_transform(), InverseFactor::Diagonal(vec![0.5, 1.0 / 3.0]));
        let id = Cholesky::new(&SymMatrix::Diagonal(vec![1.0; 3])).unwrap();
        assert_eq!(id.inverse_transform(), InverseFactor::Diagonal(vec![1.0; 3]));
    }

    #[test]
    fn dense_diagonal_agrees_with_diagonal_path() {
        let dense = SymMatrix::Dense(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 9.0])));
        let c = Cholesky::new(&dense).unwrap().inverse_transform().to_dense();
        assert_eq!(c[(0, 0)], 0.5);
        assert_eq!(c[(1, 1)], 1.0 / 3.0);
        assert_eq!(c[(0, 1)], 0.0);
    }

    #[test]
    fn random_spd_orthonormalizes() {
        for seed in 0..20 {
            let a = SymMatrix::Dense(random_spd(5, seed));
            let ch = Cholesky::new(&a).unwrap();
            let c = ch.inverse_transform();
            assert!(orthonormality_defect(&a, &c) < 1e-12);
            let b = [1.0, -2.0, 0.5, 3.0, 0.0];
            let x = ch.solve(&b);
            let back = a.mul_vec(&x);
            for (u, v) in back.iter().zip(&b) {
                assert!((u - v).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn failures_carry_diagnostics() {
        let a = SymMatrix::Dense(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]));
        assert!(matches!(
            Cholesky::new(&a),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
        let b = SymMatrix::Diagonal(vec![1.0, 1e-16]);
        assert!(matches!(Cholesky::new(&b), Err(Error::IllConditioned { .. })));
        let c = SymMatrix::Diagonal(vec![1.0, 0.0]);
        assert!(matches!(
            Cholesky::new(&c),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
    }
}
