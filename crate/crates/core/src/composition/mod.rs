//! Higher-order schemes by symmetric composition of a second-order base.

mod compose;
mod series;
mod weights;

pub use compose::{compose_stepper, compose_tableau, micro_step_sizes, Compose, ComposedStepper};
pub use series::order_residual;
pub use weights::{advanced_composition, bundled_weights, parse_weights, CompositionWeights, Family};
