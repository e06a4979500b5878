//! Birth-death-immigration dynamics on allelic partitions.
//!
//! The crate models a continuous-time Markov chain whose state is an
//! allelic partition (a multiplicity vector `m`, with `m_i` families of
//! size `i`). New families appear at rate `theta + alpha * k(m)`, a family
//! of size `i` grows at rate `(i - alpha) * m_i`, and each individual dies
//! at rate `mu`. Around that chain it provides:
//!
//! - [`partitions`]: the partition type, its statistics and exhaustive
//!   enumeration of all partitions of `n`;
//! - [`formulae`]: log-space Ewens and Pitman sampling formulae, negative
//!   binomial and Poisson laws, the `b_t` function;
//! - [`urn`]: the sequential (Hoppe / Pitman) urn and growth diagnostics
//!   for the number of families;
//! - [`ctmc`]: rate tables, a Gillespie engine on multiplicities, the scalar
//!   population-size process and an individual-level branching engine;
//! - [`stationary`]: the reversible law for `mu > 1`, its mixture
//!   representation and detailed-balance verifiers;
//! - [`montecarlo`]: seeded replicate ensembles, total-variation distances
//!   and occupation measures;
//! - [`cli`]: the `allelic` command line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::should_implement_trait)]

pub mod cli;
pub mod ctmc;
pub mod error;
pub mod formulae;
pub mod montecarlo;
pub mod partitions;
pub mod stationary;
pub mod urn;

pub use error::{Error, Result};
pub use formulae::{ModelParams, SignedLogValue};
pub use partitions::{AllelicPartition, TransitionEvent};

/// Version string written into every exported file header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
