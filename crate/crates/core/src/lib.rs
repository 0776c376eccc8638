//! Exact reconstruction of genus-0 Gromov-Witten invariants of `P^r` and genus-0 quantum
//! K-invariants of `P^r` from 1-point data.

pub mod error;
pub mod gw;
pub mod jfunction;
pub mod lang;
pub mod moduli;
pub mod qk;
pub mod rings;
pub mod trace;

pub use error::{Error, Result};
