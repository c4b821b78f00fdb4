//! Model spaces: moment polytopes, subvarieties, log-coordinate grids and
//! weight symbols.

mod curvature;
mod grid;
mod model;
mod polytope;
mod subvariety;
mod symbol;

pub use curvature::{second_difference, CurvatureField};
pub use grid::{LogGrid, MIN_POINTS_PER_AXIS};
pub use model::{build_model, curvature_field, restrict_symbol, Model, DEFAULT_AMBIENT_POINTS};
pub use polytope::{MomentPolytope, PolytopeKind, SlopeDomain};
pub use subvariety::{AffineMap, SubvarietyDescriptor, SubvarietyKind};
pub use symbol::{Bump, Jet, LseTerm, Perturbation, ReferenceKind, WeightSymbol};

pub(crate) use polytope::polygon_area;
pub(crate) use symbol::{det_scaled, min_eigenvalue};
