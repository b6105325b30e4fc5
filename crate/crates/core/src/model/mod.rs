//! The affine market model: bond prices as exponential-affine martingales under the
//! terminal measure, and everything derived from them.

mod config;
mod correlation;
mod quantities;
mod transform;

pub(crate) use config::{build_u, build_v};
pub use config::{Generators, ModelConfig, ModelConfigFile, StateVector, TenorStructure};
pub use correlation::QuantitySelector;
pub use transform::LogMgf;
