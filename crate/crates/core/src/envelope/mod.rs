//! The restricted equilibrium weight as a slope-constrained convex envelope.
//!
//! For torus-invariant data the supremum of restricted `θ`-psh functions below
//! `ι*φ` is the largest convex function below `ι*u` whose slopes stay in the
//! image of the moment polytope under restriction of exponents.

mod hull1d;
mod hull2d;

pub use hull1d::{lower_envelope_1d, Hull1d, SupportLine};
pub use hull2d::{lower_envelope_2d, Hull2d};

use rayon::prelude::*;

use crate::bergman::{potential_from_kernel, BergmanLevel};
use crate::error::{Error, Result};
use crate::geometry::{LogGrid, Model, SlopeDomain, WeightSymbol};

#[derive(Debug, Clone, PartialEq)]
pub enum HullMeta {
    OneD(Hull1d),
    TwoD(Hull2d),
}

/// Envelope samples with the hull they were read from.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeGrid {
    pub grid: LogGrid,
    pub domain: SlopeDomain,
    /// The data the envelope sits under.
    pub samples: Vec<f64>,
    pub values: Vec<f64>,
    /// Central-difference gradient of the values (one-sided at the box edge).
    pub slopes: Vec<[f64; 2]>,
    pub hull: HullMeta,
}

fn discrete_gradient(grid: &LogGrid, v: &[f64]) -> Vec<[f64; 2]> {
    let h = grid.spacing();
    (0..grid.len())
        .map(|k| {
            let mut g = [0.0; 2];
            for (a, ga) in g.iter_mut().enumerate().take(grid.dim()) {
                let p = grid.neighbour(k, a, 1);
                let m = grid.neighbour(k, a, -1);
                *ga = match (p, m) {
                    (Some(p), Some(m)) => (v[p] - v[m]) / (2.0 * h),
                    (Some(p), None) => (v[p] - v[k]) / h,
                    (None, Some(m)) => (v[k] - v[m]) / h,
                    (None, None) => 0.0,
                };
            }
            g
        })
        .collect()
}

/// Envelope of arbitrary samples on `grid` under the slope constraint.
pub fn envelope_of_samples(grid: &LogGrid, samples: &[f64], domain: &SlopeDomain) -> Result<EnvelopeGrid> {
    if samples.len() != grid.len() || domain.dim() != grid.dim() {
        return Err(Error::Precondition("samples, grid and slope domain disagree".into()));
    }
    let (values, hull) = match domain {
        SlopeDomain::Interval { lo, hi } => {
            let h = lower_envelope_1d(&grid.axis(), samples, *lo, *hi)?;
            (h.values.clone(), HullMeta::OneD(h))
        }
        SlopeDomain::Polygon(poly) => {
            let h = lower_envelope_2d(grid, samples, poly)?;
            (h.values.clone(), HullMeta::TwoD(h))
        }
    };
    Ok(EnvelopeGrid {
        grid: *grid,
        domain: domain.clone(),
        samples: samples.to_vec(),
        slopes: discrete_gradient(grid, &values),
        values,
        hull,
    })
}

pub fn sample(symbol: &WeightSymbol, grid: &LogGrid) -> Vec<f64> {
    let d = grid.dim();
    (0..grid.len())
        .into_par_iter()
        .map(|k| symbol.value(&grid.point(k)[..d]))
        .collect()
}

/// `P_{X|Z}φ` on the grid of `Z` when `on_z`, otherwise `P_Xφ` on the
/// ambient grid.
pub fn equilibrium_envelope(model: &Model, on_z: bool) -> Result<EnvelopeGrid> {
    if on_z {
        let samples = sample(model.restricted(), model.grid());
        envelope_of_samples(model.grid(), &samples, &model.subvariety().restricted_slopes())
    } else {
        let samples = sample(model.weight(), model.ambient_grid());
        envelope_of_samples(model.ambient_grid(), &samples, &model.polytope().slope_domain())
    }
}

impl EnvelopeGrid {
    /// The envelope at any point, from its supporting planes.
    pub fn evaluate(&self, x: [f64; 2]) -> f64 {
        match &self.hull {
            HullMeta::OneD(h) => h.evaluate(x[0]),
            HullMeta::TwoD(h) => h.evaluate(x),
        }
    }

    /// Alexandrov masses with the `p!` normalization, one per sample.
    pub fn masses(&self) -> Vec<f64> {
        match &self.hull {
            HullMeta::OneD(h) => h.jumps(),
            HullMeta::TwoD(h) => h.areas.iter().map(|a| 2.0 * a).collect(),
        }
    }

    /// Header `t1[,t2],u,p_phi,contact`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let d = self.grid.dim();
        let contact = contact_set(self);
        let mut out = String::from(if d == 1 { "t1,u,p_phi,contact\n" } else { "t1,t2,u,p_phi,contact\n" });
        for k in 0..self.grid.len() {
            let t = self.grid.point(k);
            for x in &t[..d] {
                let _ = write!(out, "{x:.16e},");
            }
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{}",
                self.samples[k],
                self.values[k],
                u8::from(contact.mask[k])
            );
        }
        out
    }

    /// `max (values - samples)`; nonpositive up to rounding.
    pub fn max_excess(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.samples)
            .map(|(v, u)| v - u)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `ι*P_Xφ` on the grid of `Z`, read from the supporting planes of the
/// ambient envelope along the parametrization of `Z`.
pub fn pullback(model: &Model, ambient: &EnvelopeGrid) -> Vec<f64> {
    let map = model.subvariety().parametrization(model.halfwidth());
    let grid = model.grid();
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let t = grid.point(k);
            let s = if grid.dim() == 1 { [t[0], 0.0] } else { t };
            ambient.evaluate(map.apply(s))
        })
        .collect()
}

/// Grid points where the envelope touches the data.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactSet {
    pub mask: Vec<bool>,
    /// Mask points whose axis neighbours are all in the mask.
    pub interior: Vec<bool>,
    pub epsilon: f64,
}

impl ContactSet {
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|b| **b).count()
    }
}

/// `|Pφ - φ| ≤ ε (1 + |φ|)` with `ε = max(1e-10, 10 h²)`.
pub fn contact_set(env: &EnvelopeGrid) -> ContactSet {
    let h = env.grid.spacing();
    let epsilon = f64::max(1e-10, 10.0 * h * h);
    let mask: Vec<bool> = env
        .values
        .iter()
        .zip(&env.samples)
        .map(|(v, u)| (v - u).abs() <= epsilon * (1.0 + u.abs()))
        .collect();
    let grid = &env.grid;
    let interior = (0..grid.len())
        .map(|k| {
            mask[k]
                && (0..grid.dim()).all(|a| {
                    [1, -1].iter().all(|s| grid.neighbour(k, a, *s).is_some_and(|j| mask[j]))
                })
        })
        .collect();
    ContactSet {
        mask,
        interior,
        epsilon,
    }
}

/// Largest absolute second difference of the envelope over interior points
/// (all axis and, in two dimensions, mixed differences).
pub fn regularity_probe(env: &EnvelopeGrid) -> (f64, [f64; 2]) {
    let grid = &env.grid;
    let v = &env.values;
    let h2 = grid.spacing() * grid.spacing();
    let mut best = (0.0, [0.0; 2]);
    for k in 0..grid.len() {
        if !grid.is_interior(k) {
            continue;
        }
        let mut worst = 0.0f64;
        for a in 0..grid.dim() {
            let p = grid.neighbour(k, a, 1).unwrap();
            let m = grid.neighbour(k, a, -1).unwrap();
            worst = worst.max(((v[p] - 2.0 * v[k] + v[m]) / h2).abs());
        }
        if grid.dim() == 2 {
            let at = |da: isize, db: isize| {
                let j = grid.neighbour(k, 0, da).and_then(|j| grid.neighbour(j, 1, db)).unwrap();
                v[j]
            };
            let mixed = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h2);
            worst = worst.max(mixed.abs());
        }
        if worst > best.0 {
            best = (worst, grid.point(k));
        }
    }
    best
}

/// `sup |u_m - Pφ|` over the inner half-grid for each `m`.
pub fn bergman_iteration_limit(model: &Model, env: &EnvelopeGrid, m_list: &[u32]) -> Result<Vec<(u32, f64)>> {
    if m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("m_list must be increasing".into()));
    }
    if env.grid != *model.grid() {
        return Err(Error::Precondition("envelope must live on the grid of Z".into()));
    }
    m_list
        .iter()
        .map(|&m| {
            let level = BergmanLevel::new(model, m)?;
            let kernel = level.kernel_grid(model, model.grid())?;
            let u_m = potential_from_kernel(model, &kernel)?;
            let dist = (0..env.grid.len())
                .filter(|&k| env.grid.in_inner_half(k))
                .map(|k| (u_m[k] - env.values[k]).abs())
                .fold(0.0, f64::max);
            Ok((m, dist))
        })
        .collect()
}
