//! Market snapshots on disk and plot-ready result tables.

mod snapshot;
mod tables;

pub use snapshot::{
    load_snapshot, write_snapshot, CapletVol, DiscountPillar, InflOptionKind, InflOptionQuote,
    Manifest, MarketSnapshot, ZciisQuote,
};
pub use tables::{emit_tables, forward_inflation_table, num, opt, Table};
