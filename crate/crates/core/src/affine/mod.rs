//! Closed-form affine transforms for CIR, CIR-with-jumps and OU-with-jumps drivers.

mod component;
mod product;

pub use component::{AffineComponent, Cir, CirJump, Interval, OuJump, DOMAIN_MARGIN};
pub use product::{DomainBound, ProductProcess};
