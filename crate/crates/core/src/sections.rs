//! Monomial bases of `H⁰(X, mL)` and their restrictions to `Z`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{MomentPolytope, PolytopeKind, SubvarietyDescriptor, SubvarietyKind};

/// Enumeration guard on `#(mP ∩ ℤᵈ)`.
pub const MAX_LATTICE_POINTS: u64 = 10_000_000;

/// Lattice points of `mP`, lexicographically sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBasis {
    pub m: u32,
    pub polytope: MomentPolytope,
    pub exponents: Vec<[i64; 2]>,
}

impl LatticeBasis {
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }
}

pub fn section_basis(polytope: &MomentPolytope, m: u32) -> Result<LatticeBasis> {
    if m == 0 {
        return Err(Error::Precondition("m ≥ 1".into()));
    }
    let count = polytope.lattice_count(m);
    if count > MAX_LATTICE_POINTS {
        return Err(Error::Overflow { count });
    }
    let (ka, kb) = polytope.scaled_extent(m);
    let mut exponents = Vec::with_capacity(count as usize);
    match polytope.kind() {
        PolytopeKind::Interval { .. } => exponents.extend((0..=ka).map(|i| [i, 0])),
        PolytopeKind::Rectangle { .. } => {
            for i in 0..=ka {
                exponents.extend((0..=kb).map(|j| [i, j]));
            }
        }
        PolytopeKind::Simplex { .. } => {
            for i in 0..=ka {
                exponents.extend((0..=ka - i).map(|j| [i, j]));
            }
        }
    }
    debug_assert_eq!(exponents.len() as u64, count);
    Ok(LatticeBasis {
        m,
        polytope: polytope.clone(),
        exponents,
    })
}

/// Monomial restriction `ι*` from the ambient basis onto its image on `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictionMap {
    pub source: LatticeBasis,
    pub sub: SubvarietyDescriptor,
    /// Exponents of the image basis on `Z`, sorted.
    pub target_exponents: Vec<[i64; 2]>,
    /// Image index of each source monomial; `None` when it vanishes on `Z`.
    pub targets: Vec<Option<usize>>,
    /// Preimage list of each image basis element.
    pub fibers: Vec<Vec<usize>>,
}

pub fn restriction_map(basis: &LatticeBasis, sub: &SubvarietyDescriptor) -> Result<RestrictionMap> {
    if sub.ambient() != &basis.polytope {
        return Err(Error::Precondition(format!(
            "basis of {} does not live on the ambient of {sub}",
            basis.polytope
        )));
    }
    let images: Vec<Option<[i64; 2]>> = basis
        .exponents
        .iter()
        .map(|&a| sub.restrict_exponent(a))
        .collect();
    let mut index: BTreeMap<[i64; 2], usize> = images.iter().flatten().map(|e| (*e, 0)).collect();
    for (k, v) in index.values_mut().enumerate() {
        *v = k;
    }
    let target_exponents: Vec<[i64; 2]> = index.keys().copied().collect();
    let targets: Vec<Option<usize>> = images.iter().map(|e| e.map(|e| index[&e])).collect();
    let mut fibers = vec![Vec::new(); target_exponents.len()];
    for (src, t) in targets.iter().enumerate() {
        if let Some(t) = t {
            fibers[*t].push(src);
        }
    }
    Ok(RestrictionMap {
        source: basis.clone(),
        sub: sub.clone(),
        target_exponents,
        targets,
        fibers,
    })
}

impl RestrictionMap {
    pub fn m(&self) -> u32 {
        self.source.m
    }

    /// `dim H⁰(X|Z, mL)`.
    pub fn image_dims(&self) -> usize {
        self.target_exponents.len()
    }

    pub fn source_dims(&self) -> usize {
        self.source.len()
    }

    /// Dense 0/1 incidence matrix, rows indexed by the image basis.
    pub fn incidence_matrix(&self) -> Vec<Vec<u8>> {
        let mut r = vec![vec![0u8; self.source_dims()]; self.image_dims()];
        for (src, t) in self.targets.iter().enumerate() {
            if let Some(t) = t {
                r[*t][src] = 1;
            }
        }
        r
    }

    /// Apply `ι*` to a coefficient vector on the ambient basis.
    pub fn apply(&self, coeffs: &[f64]) -> Vec<f64> {
        self.fibers
            .iter()
            .map(|f| f.iter().map(|&s| coeffs[s]).sum())
            .collect()
    }
}

/// `(m, ambient dim, image dim)` for each level.
pub fn dimension_sweep(
    polytope: &MomentPolytope,
    sub: &SubvarietyDescriptor,
    m_list: &[u32],
) -> Result<Vec<(u32, u64, u64)>> {
    if m_list.is_empty() || m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("m_list must be nonempty and increasing".into()));
    }
    m_list
        .par_iter()
        .map(|&m| {
            let basis = section_basis(polytope, m)?;
            let rmap = restriction_map(&basis, sub)?;
            Ok((m, basis.len() as u64, rmap.image_dims() as u64))
        })
        .collect()
}

const PRIME: u64 = 2_147_483_647;

fn pow_mod(mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1u64;
    b %= PRIME;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % PRIME;
        }
        b = b * b % PRIME;
        e >>= 1;
    }
    acc
}

fn rank_mod_p(mut a: Vec<Vec<u64>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| a[r][c] != 0) else {
            continue;
        };
        a.swap(rank, p);
        let inv = pow_mod(a[rank][c], PRIME - 2);
        for r in 0..rows {
            if r != rank && a[r][c] != 0 {
                let f = a[r][c] * inv % PRIME;
                for k in c..cols {
                    let sub = f * a[rank][k] % PRIME;
                    a[r][k] = (a[r][k] + PRIME - sub) % PRIME;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank over `𝔽_p` of the source monomials evaluated at sample points of `Z`.
/// Cubic in the basis size; intended for checks at small `m`.
pub fn restriction_rank(rmap: &RestrictionMap) -> usize {
    let n = rmap.source_dims();
    let exps = &rmap.source.exponents;
    // Affine coordinates of the sample points: the curve w ↦ point(w), or the
    // shifted lattice itself for the ambient case (a unisolvent set).
    let points: Vec<[u64; 2]> = match rmap.sub.kind() {
        SubvarietyKind::Ambient => exps.iter().map(|e| [e[0] as u64 + 1, e[1] as u64 + 1]).collect(),
        SubvarietyKind::DiagonalCurve | SubvarietyKind::LineInP2 => {
            (0..n as u64).map(|w| [w + 1, w + 1]).collect()
        }
        SubvarietyKind::CoordinateCurve { axis } => (0..n as u64)
            .map(|w| {
                let mut p = [0, 0];
                p[axis] = w + 1;
                p
            })
            .collect(),
    };
    let matrix = points
        .iter()
        .map(|p| {
            exps.iter()
                .map(|e| pow_mod(p[0], e[0] as u64) * pow_mod(p[1], e[1] as u64) % PRIME)
                .collect()
        })
        .collect();
    rank_mod_p(matrix)
}
