//! Desk-scale numerics for Musielak–Orlicz Hardy spaces.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod bmo;
pub mod error;
pub mod fourier;
pub mod functionals;
pub mod growth;
pub mod halfspace;
pub mod norms;
pub mod numeric;
pub mod synthesis;
pub mod tent_atoms;
pub mod weights;

pub use error::{Error, Result};
