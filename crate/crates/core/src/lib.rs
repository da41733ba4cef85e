//! Quench dynamics of the transverse-field Ising ring and the tooling of the
//! many-body quantum score benchmark built on it.

pub mod ed;
pub mod error;
pub mod freefermion;
pub mod io;
pub mod pfaffian;
pub mod quench;
pub mod scoring;
pub mod shots;
pub mod surge;

pub use error::{Error, Result};
