//! Frobenius-invariant p-adic paths on the projective line minus points.
//!
//! Computes p-adic Drinfeld associators and p-adic multiple zeta values by
//! solving Frobenius gauge equations on wide opens, with every coefficient
//! carrying its own certified precision.

pub mod cli;
pub mod connection;
pub mod error;
pub mod frobenius;
pub mod freealg;
pub mod padic;
pub mod rigid;

pub use error::{Error, Result};
pub use padic::PAdic;
