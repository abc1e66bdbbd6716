//! Trotterized quench dynamics on small lattice models and long-time
//! extrapolation of the recorded observables with dynamic mode decomposition.

pub mod analysis;
pub mod dmd;
pub mod error;
pub mod experiment;
pub mod harness;
pub mod ihodmd;
pub mod lattice;
pub mod linalg;
pub mod observables;
pub mod oracle;
pub mod pauli;
pub mod state;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/lattice-models.md")]
    pub mod lattice_models {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    pub mod simulation {}
    #[doc = include_str!("../../../book/src/observables.md")]
    pub mod observables {}
    #[doc = include_str!("../../../book/src/dmd.md")]
    pub mod dmd {}
    #[doc = include_str!("../../../book/src/ihodmd.md")]
    pub mod ihodmd {}
    #[doc = include_str!("../../../book/src/error-analysis.md")]
    pub mod error_analysis {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
