//! Affine inflation market model.
//!
//! Nominal and inflation-linked zero-coupon bonds are exponential-affine martingales
//! driven by independent CIR, CIR-with-jumps and OU-with-jumps factors. The crate
//! provides the closed-form transforms, Fourier pricing of caplets and inflation
//! options, two-stage calibration, market-data I/O and a Monte Carlo oracle.

pub mod affine;
pub mod calibrator;
pub mod error;
pub mod market_data;
pub mod mc;
pub mod model;
pub mod pricer;
pub mod synthetic;
pub mod validate;

pub use affine::{AffineComponent, Cir, CirJump, OuJump, ProductProcess};
pub use error::{Error, Result};
pub use model::{ModelConfig, QuantitySelector, StateVector, TenorStructure};
