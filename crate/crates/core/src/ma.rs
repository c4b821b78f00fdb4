//! Discrete Monge-Ampere measures: Alexandrov masses of envelopes and
//! Hessian determinants of smooth symbols.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::bergman::BergmanLevel;
use crate::envelope::{contact_set, EnvelopeGrid, HullMeta};
use crate::error::{Error, Result};
use crate::geometry::{det_scaled, min_eigenvalue, CurvatureField, LogGrid, Model};

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    pub grid: LogGrid,
    pub cell_masses: Vec<f64>,
    pub total: f64,
}

impl DiscreteMeasure {
    pub fn new(grid: LogGrid, cell_masses: Vec<f64>) -> Self {
        let total = cell_masses.iter().sum();
        Self {
            grid,
            cell_masses,
            total,
        }
    }

    /// `∫ χ dμ` with `χ` at cell centers.
    pub fn pairing(&self, chi: impl Fn([f64; 2]) -> f64) -> f64 {
        self.cell_masses
            .iter()
            .enumerate()
            .map(|(k, w)| w * chi(self.grid.point(k)))
            .sum()
    }

    /// Header `t1[,t2],mass`, one row per cell.
    pub fn to_csv(&self) -> String {
        let d = self.grid.dim();
        let mut out = String::from(if d == 1 { "t1,mass\n" } else { "t1,t2,mass\n" });
        for (k, w) in self.cell_masses.iter().enumerate() {
            let t = self.grid.point(k);
            for x in &t[..d] {
                let _ = write!(out, "{x:.16e},");
            }
            let _ = writeln!(out, "{w:.16e}");
        }
        out
    }
}

/// Subgradient jumps of a one-dimensional envelope.
pub fn monge_ampere_1d(env: &EnvelopeGrid) -> Result<DiscreteMeasure> {
    match &env.hull {
        HullMeta::OneD(h) => Ok(DiscreteMeasure::new(env.grid, h.jumps())),
        HullMeta::TwoD(_) => Err(Error::Precondition("monge_ampere_1d needs p = 1".into())),
    }
}

/// `2!·area` of the gradient cell of each sample.
pub fn monge_ampere_2d(env: &EnvelopeGrid) -> Result<DiscreteMeasure> {
    match &env.hull {
        HullMeta::TwoD(h) => Ok(DiscreteMeasure::new(env.grid, h.areas.iter().map(|a| 2.0 * a).collect())),
        HullMeta::OneD(_) => Err(Error::Precondition("monge_ampere_2d needs p = 2".into())),
    }
}

pub fn monge_ampere(env: &EnvelopeGrid) -> Result<DiscreteMeasure> {
    match env.grid.dim() {
        1 => monge_ampere_1d(env),
        _ => monge_ampere_2d(env),
    }
}

/// `p!·det D²u` times the trapezoid cell volume, where the discrete Hessian
/// is nonnegative up to `10h²`; zero elsewhere.
pub fn smooth_ma(model: &Model, on_z: bool) -> DiscreteMeasure {
    let owned;
    let field = if on_z {
        model.curvature()
    } else {
        owned = CurvatureField::compute(model.weight(), model.ambient_grid());
        &owned
    };
    smooth_ma_of(field)
}

fn smooth_ma_of(field: &CurvatureField) -> DiscreteMeasure {
    let grid = field.grid;
    let d = grid.dim();
    let h = grid.spacing();
    let floor = -10.0 * h * h;
    let masses = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let hess = &field.hessian_entries[k];
            if min_eigenvalue(hess, d) < floor {
                return 0.0;
            }
            let ij = grid.multi_index(k);
            let trapezoid: f64 = (0..d)
                .map(|a| if ij[a] == 0 || ij[a] + 1 == grid.n_per_axis() { 0.5 * h } else { h })
                .product();
            det_scaled(hess, d).max(0.0) * trapezoid
        })
        .collect();
    DiscreteMeasure::new(grid, masses)
}

/// `(mass of MA(Pφ) off the contact set, max cellwise |MA(Pφ) - smooth MA|
/// over the interior of the contact set)`.
pub fn representation_residual(env: &EnvelopeGrid, model: &Model) -> Result<(f64, f64)> {
    let on_z = env.grid == *model.grid();
    if !on_z && env.grid != *model.ambient_grid() {
        return Err(Error::Precondition("envelope grid belongs to neither Z nor X".into()));
    }
    let ma = monge_ampere(env)?;
    let smooth = smooth_ma(model, on_z);
    let contact = contact_set(env);
    let off: f64 = (0..ma.cell_masses.len())
        .filter(|&k| !contact.mask[k])
        .map(|k| ma.cell_masses[k])
        .sum();
    let gap = (0..ma.cell_masses.len())
        .filter(|&k| contact.interior[k])
        .map(|k| (ma.cell_masses[k] - smooth.cell_masses[k]).abs())
        .fold(0.0, f64::max);
    Ok((off, gap))
}

/// Smooth test functions for the weak comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    Constant,
    /// `exp(-|t - c|²/(2w²))`, with `c` on the diagonal in two dimensions.
    Gaussian { center: f64, width: f64 },
}

impl TestFunction {
    pub fn eval(&self, t: [f64; 2], dim: usize) -> f64 {
        match *self {
            TestFunction::Constant => 1.0,
            TestFunction::Gaussian { center, width } => {
                let r2: f64 = t[..dim].iter().map(|x| (x - center) * (x - center)).sum();
                (-0.5 * r2 / (width * width)).exp()
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            TestFunction::Constant => "one".into(),
            TestFunction::Gaussian { center, .. } => format!("gauss({center})"),
        }
    }
}

/// Five unit-width bumps and the constant.
pub fn shipped_test_functions() -> Vec<TestFunction> {
    let mut v: Vec<TestFunction> = [-3.0, -1.0, 0.0, 1.0, 3.0]
        .iter()
        .map(|&center| TestFunction::Gaussian { center, width: 1.0 })
        .collect();
    v.push(TestFunction::Constant);
    v
}

/// `|∫ χ (p!/mᵖ) B dμ - ∫ χ dMA|` per test function.
pub fn weak_compare(level: &BergmanLevel, target: &DiscreteMeasure, tests: &[TestFunction]) -> Vec<f64> {
    let p = target.grid.dim();
    let m = f64::from(level.m);
    let scale = if p == 1 { 1.0 / m } else { 2.0 / (m * m) };
    tests
        .par_iter()
        .map(|chi| {
            let lhs = scale * level.pairing(|t| chi.eval(t, p));
            let rhs = target.pairing(|t| chi.eval(t, p));
            (lhs - rhs).abs()
        })
        .collect()
}

/// Total mass may only drop for the more singular envelope; in the smooth
/// ample scope both carry full mass, so the totals must agree.
pub fn mass_comparison_check(less_singular: &EnvelopeGrid, more_singular: &EnvelopeGrid) -> Result<bool> {
    let a = monge_ampere(less_singular)?.total;
    let b = monge_ampere(more_singular)?.total;
    let tol = 1e-9 * a.abs().max(1.0);
    Ok(b <= a + 1e-10 && (a - b).abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::{envelope_of_samples, equilibrium_envelope};
    use crate::geometry::{build_model, Bump, MomentPolytope, Perturbation, SlopeDomain, SubvarietyDescriptor, WeightSymbol};

    fn p1(g: Perturbation) -> Model {
        let p = MomentPolytope::interval(1);
        build_model(
            p.clone(),
            SubvarietyDescriptor::ambient_of(p.clone()),
            WeightSymbol::for_polytope(&p, g, 12.0),
            LogGrid::new(1, 257, 12.0).unwrap(),
        )
        .unwrap()
    }

    fn bump() -> Perturbation {
        Perturbation::Bumps(vec![Bump {
            amplitude: 0.5,
            center: [0.0, 0.0],
            width: 1.0,
        }])
    }

    #[test]
    fn fubini_study_smooth_density_integrates_to_one() {
        let s = smooth_ma(&p1(Perturbation::Zero), true);
        // Tails beyond |t| = 12 carry 2/(1+e¹²).
        assert!((s.total - 1.0).abs() < 2e-5);
        assert!(s.cell_masses.iter().all(|w| *w >= 0.0));
    }

    #[test]
    fn affine_data_carries_no_mass() {
        let grid = LogGrid::new(1, 65, 5.0).unwrap();
        let u: Vec<f64> = grid.axis().iter().map(|t| 0.25 * t + 1.0).collect();
        let env = envelope_of_samples(&grid, &u, &SlopeDomain::Interval { lo: 0.0, hi: 1.0 }).unwrap();
        let ma = monge_ampere_1d(&env).unwrap();
        let inside: f64 = ma.cell_masses[1..64].iter().sum();
        assert_eq!(inside, 0.0);
        assert!((ma.total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bump_mass_vanishes_off_contact() {
        let model = p1(bump());
        let env = equilibrium_envelope(&model, true).unwrap();
        let (off, gap) = representation_residual(&env, &model).unwrap();
        let total = monge_ampere_1d(&env).unwrap().total;
        assert!(off < 1e-8 * total);
        // Masked points just inside the free interval carry no hull mass.
        assert!(gap < 0.06);
    }

    #[test]
    fn psh_weight_residual_is_tiny() {
        let model = p1(Perturbation::Zero);
        let env = equilibrium_envelope(&model, true).unwrap();
        let (off, gap) = representation_residual(&env, &model).unwrap();
        assert_eq!(off, 0.0);
        assert!(gap < 1e-10, "{gap}");
    }

    #[test]
    fn constant_pairing_matches_dimension_count() {
        let model = p1(Perturbation::Zero);
        let env = equilibrium_envelope(&model, true).unwrap();
        let ma = monge_ampere_1d(&env).unwrap();
        let level = BergmanLevel::new(&model, 8).unwrap();
        let gaps = weak_compare(&level, &ma, &[TestFunction::Constant]);
        assert!((gaps[0] - 1.0 / 8.0).abs() < 1e-8);
    }

    #[test]
    fn paraboloid_cells_are_grid_squares() {
        let grid = LogGrid::new(2, 65, 2.0).unwrap();
        let u: Vec<f64> = grid.points().iter().map(|t| 0.5 * (t[0] * t[0] + t[1] * t[1])).collect();
        let square = vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
        let env = envelope_of_samples(&grid, &u, &SlopeDomain::Polygon(square)).unwrap();
        let ma = monge_ampere_2d(&env).unwrap();
        assert!((ma.total - 8.0).abs() < 1e-9);
        let h = grid.spacing();
        for k in 0..grid.len() {
            let t = grid.point(k);
            if t[0].abs() < 0.9 && t[1].abs() < 0.9 {
                assert!((ma.cell_masses[k] / (2.0 * h * h) - 1.0).abs() < 0.02);
            }
        }
    }

    #[test]
    fn doubled_symbol_doubles_the_mass() {
        let model = p1(bump());
        let env = equilibrium_envelope(&model, true).unwrap();
        let doubled: Vec<f64> = env.samples.iter().map(|x| 2.0 * x).collect();
        let env2 = envelope_of_samples(&env.grid, &doubled, &SlopeDomain::Interval { lo: 0.0, hi: 2.0 }).unwrap();
        let (a, b) = (monge_ampere_1d(&env).unwrap().total, monge_ampere_1d(&env2).unwrap().total);
        assert!((b - 2.0 * a).abs() < 1e-12);
        assert!(mass_comparison_check(&env, &env).unwrap());
    }
}
