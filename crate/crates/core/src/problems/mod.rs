//! The manufactured convergence case and the L-shaped benchmark.

pub mod benchmark;
pub mod errors;
pub mod manufactured;

pub use benchmark::{
    dominant_period, goal_characteristics, traction_profile, BenchmarkCase, GoalCharacteristics, GoalFunctionals,
    GoalSeries, TractionDirection,
};
pub use errors::{eoc, l2l2_error, ErrorAccumulator, NormKind, SpatialErrors};
pub use manufactured::{ExactFields, ManufacturedCase};
