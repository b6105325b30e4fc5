//! Fourier-inversion pricing of CPI options, inflation caplets and interest-rate caplets,
//! and Black-type implied volatilities.

mod black;
mod fourier;
mod instruments;

pub use black::{black, black_vega, implied_vol_black, implied_vol_shifted_black, shifted_black};
pub use fourier::{
    admissible_upper, default_damping, fourier_call, fourier_call_batch, fourier_put_batch, ContourSpec, FourierOutcome,
};
pub use instruments::{
    cpi_call, cpi_put, implied_vol, inflation_caplet, inflation_floorlet, ir_caplet, ir_floorlet,
    price_options, strike_grid, OptionKind, OptionQuote, PricedOption, INFLATION_SHIFT,
};
