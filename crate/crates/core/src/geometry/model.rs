use super::curvature::CurvatureField;
use super::grid::LogGrid;
use super::polytope::{MomentPolytope, PolytopeKind};
use super::subvariety::{AffineMap, SubvarietyDescriptor};
use super::symbol::{ReferenceKind, WeightSymbol};
use crate::error::{Error, Result};

/// Default points per axis of the ambient surface grid used for pullbacks
/// and ambient norms when `Z` is a curve.
pub const DEFAULT_AMBIENT_POINTS: usize = 33;

/// Validated bundle of `(X, L)`, `Z`, the weight and the grid on `Z`.
#[derive(Debug, Clone)]
pub struct Model {
    polytope: MomentPolytope,
    sub: SubvarietyDescriptor,
    weight: WeightSymbol,
    grid: LogGrid,
    ambient_grid: LogGrid,
    restricted: WeightSymbol,
    curvature: CurvatureField,
}

fn check_reference(polytope: &MomentPolytope, weight: &WeightSymbol) -> Result<()> {
    let (pa, pb) = polytope.params();
    let (wa, wb) = weight.reference_params();
    let kind_ok = matches!(
        (polytope.kind(), weight.reference()),
        (PolytopeKind::Interval { .. }, ReferenceKind::FubiniStudy { .. })
            | (PolytopeKind::Rectangle { .. }, ReferenceKind::Product { .. })
            | (PolytopeKind::Simplex { .. }, ReferenceKind::Simplex { .. })
    );
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + x.abs());
    if !kind_ok || !close(pa, wa) || !close(pb, wb) {
        return Err(Error::NonAmpleReference(format!(
            "gradient image of {} with scale ({wa}, {wb}) is not the interior of {polytope}",
            weight.reference().name()
        )));
    }
    Ok(())
}

pub fn build_model(
    polytope: MomentPolytope,
    sub: SubvarietyDescriptor,
    weight: WeightSymbol,
    grid: LogGrid,
) -> Result<Model> {
    if sub.ambient() != &polytope {
        return Err(Error::IncompatibleSubvariety {
            subvariety: sub.to_string(),
            ambient: polytope.to_string(),
        });
    }
    if weight.dim() != weight.ambient_dim() || weight.embedding() != &AffineMap::IDENTITY {
        return Err(Error::Precondition(
            "the model weight must be given on the ambient space".into(),
        ));
    }
    check_reference(&polytope, &weight)?;
    if grid.dim() != sub.p() {
        return Err(Error::InvalidGrid(format!(
            "grid dimension {} does not match dim Z = {}",
            grid.dim(),
            sub.p()
        )));
    }
    let weight = weight.with_halfwidth(grid.halfwidth());
    let ambient_grid = if sub.is_ambient() {
        grid
    } else {
        LogGrid::new(polytope.dim(), DEFAULT_AMBIENT_POINTS, grid.halfwidth())?
    };
    let restricted = weight.pullback(&sub.parametrization(grid.halfwidth()), sub.p());
    let curvature = CurvatureField::compute(&restricted, &grid);
    Ok(Model {
        polytope,
        sub,
        weight,
        grid,
        ambient_grid,
        restricted,
        curvature,
    })
}

pub fn restrict_symbol(model: &Model) -> WeightSymbol {
    model.restricted.clone()
}

pub fn curvature_field(model: &Model) -> CurvatureField {
    model.curvature.clone()
}

impl Model {
    pub fn polytope(&self) -> &MomentPolytope {
        &self.polytope
    }

    pub fn subvariety(&self) -> &SubvarietyDescriptor {
        &self.sub
    }

    pub fn weight(&self) -> &WeightSymbol {
        &self.weight
    }

    pub fn grid(&self) -> &LogGrid {
        &self.grid
    }

    pub fn ambient_grid(&self) -> &LogGrid {
        &self.ambient_grid
    }

    /// `ι*u` on `Z`.
    pub fn restricted(&self) -> &WeightSymbol {
        &self.restricted
    }

    pub fn curvature(&self) -> &CurvatureField {
        &self.curvature
    }

    pub fn p(&self) -> usize {
        self.sub.p()
    }

    pub fn halfwidth(&self) -> f64 {
        self.grid.halfwidth()
    }

    /// Same data with another grid on `Z`.
    pub fn with_grid(&self, grid: LogGrid) -> Result<Model> {
        let mut m = build_model(
            self.polytope.clone(),
            self.sub.clone(),
            self.weight.clone(),
            grid,
        )?;
        if !self.sub.is_ambient() {
            m.ambient_grid = LogGrid::new(
                self.ambient_grid.dim(),
                self.ambient_grid.n_per_axis(),
                grid.halfwidth(),
            )?;
        }
        Ok(m)
    }

    pub fn with_ambient_points(&self, n: usize) -> Result<Model> {
        let mut m = self.clone();
        m.ambient_grid = LogGrid::new(self.polytope.dim(), n, self.halfwidth())?;
        if self.sub.is_ambient() {
            return self.with_grid(m.ambient_grid);
        }
        Ok(m)
    }

    /// Same data with the weight replaced.
    pub fn with_weight(&self, weight: WeightSymbol) -> Result<Model> {
        let mut m = build_model(self.polytope.clone(), self.sub.clone(), weight, self.grid)?;
        m.ambient_grid = self.ambient_grid;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::subvariety::SubvarietyKind;
    use crate::geometry::symbol::{Bump, Perturbation};

    fn p1() -> (MomentPolytope, SubvarietyDescriptor, WeightSymbol, LogGrid) {
        let p = MomentPolytope::interval(1);
        let sub = SubvarietyDescriptor::ambient_of(p.clone());
        let w = WeightSymbol::for_polytope(&p, Perturbation::Zero, 12.0);
        (p, sub, w, LogGrid::new(1, 257, 12.0).unwrap())
    }

    #[test]
    fn reference_configurations() {
        let (p, sub, w, g) = p1();
        let model = build_model(p, sub, w.clone(), g).unwrap();
        assert_eq!(restrict_symbol(&model), w);

        let rect = MomentPolytope::rectangle(1, 1);
        let diag = SubvarietyDescriptor::new(SubvarietyKind::DiagonalCurve, rect.clone()).unwrap();
        let w = WeightSymbol::for_polytope(&rect, Perturbation::Zero, 12.0);
        let model = build_model(rect, diag, w, LogGrid::new(1, 129, 12.0).unwrap()).unwrap();
        assert_eq!(model.p(), 1);
        assert_eq!(model.ambient_grid().dim(), 2);
        let z = restrict_symbol(&model);
        assert!((z.value(&[0.5]) - 2.0 * (1.0 + 0.5f64.exp()).ln()).abs() < 1e-14);
    }

    #[test]
    fn rejects_mismatches() {
        let rect = MomentPolytope::rectangle(1, 1);
        let tri = MomentPolytope::simplex(1);
        let line = SubvarietyDescriptor::new(SubvarietyKind::LineInP2, tri.clone()).unwrap();
        let w = WeightSymbol::for_polytope(&rect, Perturbation::Zero, 12.0);
        let g = LogGrid::new(1, 33, 12.0).unwrap();
        assert!(matches!(
            build_model(rect.clone(), line, w.clone(), g),
            Err(Error::IncompatibleSubvariety { .. })
        ));
        let amb = SubvarietyDescriptor::ambient_of(tri.clone());
        let g2 = LogGrid::new(2, 33, 12.0).unwrap();
        assert!(matches!(
            build_model(tri.clone(), amb.clone(), w, g2),
            Err(Error::NonAmpleReference(_))
        ));
        let doubled = WeightSymbol::for_polytope(&tri, Perturbation::Zero, 12.0).scaled(2.0);
        assert!(matches!(
            build_model(tri, amb, doubled, g2),
            Err(Error::NonAmpleReference(_))
        ));
        assert!(matches!(LogGrid::new(1, 17, 12.0), Err(Error::GridTooCoarse { n: 17 })));
    }

    #[test]
    fn diagonal_bump_restriction() {
        let rect = MomentPolytope::rectangle(1, 1);
        let diag = SubvarietyDescriptor::new(SubvarietyKind::DiagonalCurve, rect.clone()).unwrap();
        let g = Perturbation::Bumps(vec![Bump {
            amplitude: 1.0,
            center: [0.0, 0.0],
            width: 1.0,
        }]);
        let w = WeightSymbol::for_polytope(&rect, g, 12.0);
        let model = build_model(rect, diag, w, LogGrid::new(1, 65, 12.0).unwrap()).unwrap();
        let z = restrict_symbol(&model);
        for t in [-1.0, 0.0, 0.3] {
            let want = 2.0 * (1.0 + f64::exp(t)).ln() + (-2.0 * t * t).exp();
            assert!((z.value(&[t]) - want).abs() < 1e-14);
        }
    }
}
