#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod bogoliubov;
pub mod channel;
pub mod config;
pub mod error;
pub mod gaussian;
pub mod kinematics;
pub mod overlap;
pub mod qkd;
pub mod quadrature;
pub mod sweep;
pub mod wavepackets;

pub use error::{Error, Result};
