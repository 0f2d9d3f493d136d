//! Exact weighted lozenge tilings of dented triangular-lattice regions.
//!
//! [`exactalg`] supplies the Laurent-polynomial ring, [`qformulas`] the closed
//! product formulas, [`regions`] the region builders and weight schemes,
//! [`enumerate`] the tiling engines and [`identities`] the verification harness.

pub mod enumerate;
pub mod exactalg;
pub mod identities;
pub mod qformulas;
pub mod regions;
