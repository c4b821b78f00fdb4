use std::fmt;

use num_rational::Rational64;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolytopeKind {
    /// `[0, a]`.
    Interval { a: Rational64 },
    /// `[0, a] x [0, b]`.
    Rectangle { a: Rational64, b: Rational64 },
    /// `{x, y >= 0, x + y <= a}`.
    Simplex { a: Rational64 },
}

/// Moment polytope of a toric line bundle. Its lattice points at level `m`
/// index the monomial sections of the `m`-th tensor power.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentPolytope {
    kind: PolytopeKind,
    level: i64,
    vertices: Vec<[Rational64; 2]>,
}

fn check_positive(name: &str, x: Rational64) -> Result<()> {
    if x.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidPolytope(format!("{name} = {x} must be positive")))
    }
}

fn floor_mul(m: u32, x: Rational64) -> i64 {
    (i64::from(m) * x.numer()).div_euclid(*x.denom())
}

fn to_f64(x: Rational64) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

impl MomentPolytope {
    pub fn new(kind: PolytopeKind) -> Result<Self> {
        let zero = Rational64::zero();
        let vertices = match kind {
            PolytopeKind::Interval { a } => {
                check_positive("a", a)?;
                vec![[zero, zero], [a, zero]]
            }
            PolytopeKind::Rectangle { a, b } => {
                check_positive("a", a)?;
                check_positive("b", b)?;
                vec![[zero, zero], [a, zero], [a, b], [zero, b]]
            }
            PolytopeKind::Simplex { a } => {
                check_positive("a", a)?;
                vec![[zero, zero], [a, zero], [zero, a]]
            }
        };
        let level = vertices
            .iter()
            .flat_map(|v| v.iter())
            .fold(1, |acc, c| lcm(acc, *c.denom()));
        Ok(Self {
            kind,
            level,
            vertices,
        })
    }

    pub fn interval(a: i64) -> Self {
        Self::new(PolytopeKind::Interval { a: a.into() }).expect("positive length")
    }

    pub fn rectangle(a: i64, b: i64) -> Self {
        Self::new(PolytopeKind::Rectangle {
            a: a.into(),
            b: b.into(),
        })
        .expect("positive sides")
    }

    pub fn simplex(a: i64) -> Self {
        Self::new(PolytopeKind::Simplex { a: a.into() }).expect("positive scale")
    }

    pub fn kind(&self) -> PolytopeKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            PolytopeKind::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Integer level clearing every vertex denominator.
    pub fn level(&self) -> i64 {
        self.level
    }

    pub fn vertices(&self) -> &[[Rational64; 2]] {
        &self.vertices
    }

    /// Side lengths `(a, b)` as floats; `b` is zero for intervals and simplices.
    pub fn params(&self) -> (f64, f64) {
        match self.kind {
            PolytopeKind::Interval { a } | PolytopeKind::Simplex { a } => (to_f64(a), 0.0),
            PolytopeKind::Rectangle { a, b } => (to_f64(a), to_f64(b)),
        }
    }

    /// Euclidean volume.
    pub fn volume(&self) -> f64 {
        match self.kind {
            PolytopeKind::Interval { a } => to_f64(a),
            PolytopeKind::Rectangle { a, b } => to_f64(a * b),
            PolytopeKind::Simplex { a } => to_f64(a * a / 2),
        }
    }

    /// `dim! * vol(P)`, the top self-intersection of the line bundle.
    pub fn normalized_volume(&self) -> f64 {
        match self.dim() {
            1 => self.volume(),
            _ => 2.0 * self.volume(),
        }
    }

    /// Largest lattice coordinate reached by `mP` along each axis.
    pub(crate) fn scaled_extent(&self, m: u32) -> (i64, i64) {
        match self.kind {
            PolytopeKind::Interval { a } => (floor_mul(m, a), 0),
            PolytopeKind::Rectangle { a, b } => (floor_mul(m, a), floor_mul(m, b)),
            PolytopeKind::Simplex { a } => {
                let k = floor_mul(m, a);
                (k, k)
            }
        }
    }

    /// Number of lattice points in `mP`, computed without enumeration.
    pub fn lattice_count(&self, m: u32) -> u64 {
        let (ka, kb) = self.scaled_extent(m);
        let (ka, kb) = (ka as u64, kb as u64);
        match self.kind {
            PolytopeKind::Interval { .. } => ka + 1,
            PolytopeKind::Rectangle { .. } => (ka + 1) * (kb + 1),
            PolytopeKind::Simplex { .. } => (ka + 1) * (ka + 2) / 2,
        }
    }

    /// Slope domain of symbols whose gradient image is this polytope.
    pub fn slope_domain(&self) -> SlopeDomain {
        let (a, b) = self.params();
        match self.kind {
            PolytopeKind::Interval { .. } => SlopeDomain::Interval { lo: 0.0, hi: a },
            PolytopeKind::Rectangle { .. } => {
                SlopeDomain::Polygon(vec![[0.0, 0.0], [a, 0.0], [a, b], [0.0, b]])
            }
            PolytopeKind::Simplex { .. } => {
                SlopeDomain::Polygon(vec![[0.0, 0.0], [a, 0.0], [0.0, a]])
            }
        }
    }

    /// The polytope scaled by an integer factor (the bundle `kL`).
    pub fn scaled(&self, k: i64) -> Self {
        let k = Rational64::from(k);
        let kind = match self.kind {
            PolytopeKind::Interval { a } => PolytopeKind::Interval { a: a * k },
            PolytopeKind::Rectangle { a, b } => PolytopeKind::Rectangle { a: a * k, b: b * k },
            PolytopeKind::Simplex { a } => PolytopeKind::Simplex { a: a * k },
        };
        Self::new(kind).expect("scaling keeps sides positive")
    }
}

impl fmt::Display for MomentPolytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PolytopeKind::Interval { a } => write!(f, "Interval[0,{a}]"),
            PolytopeKind::Rectangle { a, b } => write!(f, "Rectangle[0,{a}]x[0,{b}]"),
            PolytopeKind::Simplex { a } => write!(f, "Simplex({a})"),
        }
    }
}

/// Closed convex set of admissible slopes for an envelope: an interval on a
/// curve or a convex polygon (counter-clockwise) on a surface.
#[derive(Debug, Clone, PartialEq)]
pub enum SlopeDomain {
    Interval { lo: f64, hi: f64 },
    Polygon(Vec<[f64; 2]>),
}

impl SlopeDomain {
    pub fn dim(&self) -> usize {
        match self {
            SlopeDomain::Interval { .. } => 1,
            SlopeDomain::Polygon(_) => 2,
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            SlopeDomain::Interval { lo, hi } => hi - lo,
            SlopeDomain::Polygon(v) => polygon_area(v),
        }
    }

    /// `p! * vol`, the total Monge-Ampere mass of any envelope with these slopes.
    pub fn normalized_volume(&self) -> f64 {
        match self.dim() {
            1 => self.volume(),
            _ => 2.0 * self.volume(),
        }
    }

    /// Closure membership with an absolute tolerance.
    pub fn contains(&self, g: [f64; 2], tol: f64) -> bool {
        match self {
            SlopeDomain::Interval { lo, hi } => g[0] >= lo - tol && g[0] <= hi + tol,
            SlopeDomain::Polygon(v) => (0..v.len()).all(|i| {
                let a = v[i];
                let b = v[(i + 1) % v.len()];
                let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
                let len = ex.hypot(ey);
                (ex * (g[1] - a[1]) - ey * (g[0] - a[0])) / len >= -tol
            }),
        }
    }
}

/// Shoelace area of a counter-clockwise polygon.
pub(crate) fn polygon_area(v: &[[f64; 2]]) -> f64 {
    if v.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..v.len() {
        let a = v[i];
        let b = v[(i + 1) % v.len()];
        twice += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * twice
}
