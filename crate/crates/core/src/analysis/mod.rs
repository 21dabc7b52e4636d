//! Cross-checks between the formal and holonomic processes and statistics of
//! the resulting surfaces: sphere Hausdorff distances, box counting and radial
//! Hölder exponents.

mod boxcount;
mod compare;
mod holder;
mod limit;
mod sphere;

pub use boxcount::{box_counting_dimension, linear_fit, BoxCountEstimate};
pub use holder::{holder_estimate, HolderEstimate, RadialColumn, HOLDER_GAPS, HOLDER_WINDOW};
pub use sphere::{great_circle, hausdorff_sphere, SpherePointSet};
pub use compare::{compare_formal_holonomic, compare_samples, telescoped_bound, ComparisonRow, StageSamples};
pub use limit::{layer_holder_estimate, limit_set_sample, LimitSetSample};
