//! Monte Carlo oracle: exact simulation of the drivers under the terminal measure with
//! reweighting to forward measures.

mod pricing;
mod simulate;

pub use pricing::{forward_measure_weight, mc_price, mc_price_batch, reweight_to_forward_measure, weighted_mean};
pub use simulate::{
    mc_component_mgf, mc_expectations, simulate, CirScheme, Ensemble, Estimate, SimulationPlan, BLOCK,
};
