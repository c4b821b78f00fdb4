use std::fmt;

use super::polytope::{MomentPolytope, PolytopeKind, SlopeDomain};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubvarietyKind {
    /// `Z = X`.
    Ambient,
    /// Torus-invariant boundary curve on which `t_axis` is the free log
    /// coordinate and the other coordinate of the torus vanishes.
    CoordinateCurve { axis: usize },
    /// The diagonal `{z1 = z2}` of a product of projective lines.
    DiagonalCurve,
    /// The line `{z1 = z2}` of the projective plane, through `[1:0:0]`.
    LineInP2,
}

/// The pair `Z ⊆ X` with `X` encoded by its moment polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct SubvarietyDescriptor {
    kind: SubvarietyKind,
    ambient: MomentPolytope,
    p: usize,
}

/// Affine map `t ↦ lin · t + off` from log coordinates on `Z` into log
/// coordinates on `X`. Column `j` of `lin` is the image of the `j`-th basis
/// direction; unused columns are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub lin: [[f64; 2]; 2],
    pub off: [f64; 2],
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap {
        lin: [[1.0, 0.0], [0.0, 1.0]],
        off: [0.0, 0.0],
    };

    pub fn apply(&self, t: [f64; 2]) -> [f64; 2] {
        [
            self.lin[0][0] * t[0] + self.lin[0][1] * t[1] + self.off[0],
            self.lin[1][0] * t[0] + self.lin[1][1] * t[1] + self.off[1],
        ]
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        let mut lin = [[0.0; 2]; 2];
        for (i, row) in lin.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = self.lin[i][0] * inner.lin[0][j] + self.lin[i][1] * inner.lin[1][j];
            }
        }
        AffineMap {
            lin,
            off: self.apply(inner.off),
        }
    }

    /// Pull a covector on the target back to the source: `linᵀ v`.
    pub fn pull_covector(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.lin[0][0] * v[0] + self.lin[1][0] * v[1],
            self.lin[0][1] * v[0] + self.lin[1][1] * v[1],
        ]
    }
}

impl SubvarietyDescriptor {
    pub fn new(kind: SubvarietyKind, ambient: MomentPolytope) -> Result<Self> {
        let incompatible = || Error::IncompatibleSubvariety {
            subvariety: format!("{kind:?}"),
            ambient: ambient.to_string(),
        };
        let p = match kind {
            SubvarietyKind::Ambient => ambient.dim(),
            SubvarietyKind::CoordinateCurve { axis } => {
                if ambient.dim() != 2 || axis > 1 {
                    return Err(incompatible());
                }
                1
            }
            SubvarietyKind::DiagonalCurve => {
                if !matches!(ambient.kind(), PolytopeKind::Rectangle { .. }) {
                    return Err(incompatible());
                }
                1
            }
            SubvarietyKind::LineInP2 => {
                if !matches!(ambient.kind(), PolytopeKind::Simplex { .. }) {
                    return Err(incompatible());
                }
                1
            }
        };
        Ok(Self { kind, ambient, p })
    }

    pub fn ambient_of(polytope: MomentPolytope) -> Self {
        Self::new(SubvarietyKind::Ambient, polytope).expect("ambient is always compatible")
    }

    pub fn kind(&self) -> SubvarietyKind {
        self.kind
    }

    pub fn ambient(&self) -> &MomentPolytope {
        &self.ambient
    }

    /// Complex dimension of `Z`.
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn is_ambient(&self) -> bool {
        self.kind == SubvarietyKind::Ambient
    }

    /// Log-coordinate parametrization of `Z` inside `X`. Boundary curves sit
    /// at the truncation boundary `-halfwidth` of the vanishing coordinate.
    pub fn parametrization(&self, halfwidth: f64) -> AffineMap {
        match self.kind {
            SubvarietyKind::Ambient => AffineMap::IDENTITY,
            SubvarietyKind::DiagonalCurve | SubvarietyKind::LineInP2 => AffineMap {
                lin: [[1.0, 0.0], [1.0, 0.0]],
                off: [0.0, 0.0],
            },
            SubvarietyKind::CoordinateCurve { axis } => {
                let mut lin = [[0.0; 2]; 2];
                lin[axis][0] = 1.0;
                let mut off = [0.0; 2];
                off[1 - axis] = -halfwidth;
                AffineMap { lin, off }
            }
        }
    }

    /// Exponent of the restricted monomial, or `None` when the monomial
    /// vanishes identically on `Z`.
    pub fn restrict_exponent(&self, alpha: [i64; 2]) -> Option<[i64; 2]> {
        match self.kind {
            SubvarietyKind::Ambient => Some(alpha),
            SubvarietyKind::DiagonalCurve | SubvarietyKind::LineInP2 => {
                Some([alpha[0] + alpha[1], 0])
            }
            SubvarietyKind::CoordinateCurve { axis } => {
                (alpha[1 - axis] == 0).then_some([alpha[axis], 0])
            }
        }
    }

    /// Slopes achievable by restrictions of global symbols: the image of the
    /// moment polytope under the restriction of exponents.
    pub fn restricted_slopes(&self) -> SlopeDomain {
        let (a, b) = self.ambient.params();
        match (self.kind, self.ambient.kind()) {
            (SubvarietyKind::Ambient, _) => self.ambient.slope_domain(),
            (SubvarietyKind::DiagonalCurve, _) => SlopeDomain::Interval { lo: 0.0, hi: a + b },
            (SubvarietyKind::LineInP2, _) => SlopeDomain::Interval { lo: 0.0, hi: a },
            (SubvarietyKind::CoordinateCurve { axis }, PolytopeKind::Rectangle { .. }) => {
                SlopeDomain::Interval {
                    lo: 0.0,
                    hi: if axis == 0 { a } else { b },
                }
            }
            (SubvarietyKind::CoordinateCurve { .. }, _) => SlopeDomain::Interval { lo: 0.0, hi: a },
        }
    }
}

impl fmt::Display for SubvarietyDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} in {}", self.kind, self.ambient)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compatibility_rules() {
        let rect = MomentPolytope::rectangle(1, 1);
        let tri = MomentPolytope::simplex(1);
        let seg = MomentPolytope::interval(1);
        assert!(SubvarietyDescriptor::new(SubvarietyKind::DiagonalCurve, rect.clone()).is_ok());
        assert!(SubvarietyDescriptor::new(SubvarietyKind::LineInP2, rect.clone()).is_err());
        assert!(SubvarietyDescriptor::new(SubvarietyKind::DiagonalCurve, tri.clone()).is_err());
        assert!(SubvarietyDescriptor::new(SubvarietyKind::LineInP2, tri.clone()).is_ok());
        assert!(
            SubvarietyDescriptor::new(SubvarietyKind::CoordinateCurve { axis: 2 }, rect).is_err()
        );
        assert!(
            SubvarietyDescriptor::new(SubvarietyKind::CoordinateCurve { axis: 0 }, seg.clone())
                .is_err()
        );
        let amb = SubvarietyDescriptor::ambient_of(tri);
        assert_eq!(amb.p(), 2);
        assert_eq!(SubvarietyDescriptor::ambient_of(seg).p(), 1);
    }

    #[test]
    fn restricted_slopes_are_exponent_images() {
        let rect = MomentPolytope::new(PolytopeKind::Rectangle {
            a: 2.into(),
            b: 3.into(),
        })
        .unwrap();
        let diag = SubvarietyDescriptor::new(SubvarietyKind::DiagonalCurve, rect).unwrap();
        assert_eq!(diag.restricted_slopes(), SlopeDomain::Interval { lo: 0.0, hi: 5.0 });
        assert_eq!(diag.restrict_exponent([2, 3]), Some([5, 0]));
    }

    #[test]
    fn coordinate_curve_kills_off_face_monomials() {
        let rect = MomentPolytope::rectangle(1, 1);
        let z = SubvarietyDescriptor::new(SubvarietyKind::CoordinateCurve { axis: 0 }, rect)
            .unwrap();
        assert_eq!(z.restrict_exponent([1, 0]), Some([1, 0]));
        assert_eq!(z.restrict_exponent([1, 1]), None);
        let map = z.parametrization(12.0);
        assert_eq!(map.apply([0.5, 0.0]), [0.5, -12.0]);
    }

    #[test]
    fn affine_composition() {
        let diag = AffineMap {
            lin: [[1.0, 0.0], [1.0, 0.0]],
            off: [0.0, 0.0],
        };
        let shift = AffineMap {
            lin: [[2.0, 0.0], [0.0, 1.0]],
            off: [1.0, -1.0],
        };
        let c = shift.compose(&diag);
        assert_eq!(c.apply([3.0, 0.0]), shift.apply(diag.apply([3.0, 0.0])));
        assert_eq!(diag.pull_covector([1.0, 2.0]), [3.0, 0.0]);
    }
}
