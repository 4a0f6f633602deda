//! Simulation and numerical verification of non-uniform security games in the
//! quantum random oracle model.

pub mod adversary;
pub mod altmeas;
pub mod bounds;
pub mod bfqrom;
pub mod error;
pub mod game;
pub mod instances;
pub mod linalg;
pub mod oracle;
pub mod separation;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};

/// Crate version, recorded in experiment sidecars.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/oracles-and-games.md")]
    mod oracles_and_games {}
    #[doc = include_str!("../../../book/src/adversaries.md")]
    mod adversaries {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/alternating-measurement.md")]
    mod alternating_measurement {}
    #[doc = include_str!("../../../book/src/presampling.md")]
    mod presampling {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/separation.md")]
    mod separation {}
}
