//! Seedable simulator for quantum detectable Byzantine agreement.
//!
//! One commander and `n - 1` lieutenants share `k` copies of an `(n + 1)`-qubit
//! resource state. Every copy is measured in the computational basis when it is
//! handed out, so the whole protocol runs on classical bit tables:
//!
//! * [`entanglement`] holds the exact outcome distribution, the sampler, the
//!   bit-flip channel and the closed-form quantities (detection rate, game counts).
//! * [`protocol`] is the agreement state machine: distribution, verification,
//!   order issuance, pairwise games and the final agreement check.
//! * [`adversary`] contains the traitor behaviours.
//! * [`harness`] runs Monte Carlo sweeps and writes CSV datasets.

pub mod adversary;
pub mod entanglement;
pub mod error;
pub mod harness;
mod numfmt;
pub mod protocol;
pub mod rng;

pub use error::{Error, Result};
