//! Exact models of QKD post-processing on sub-normalized classical-quantum states.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. Everything here is pure computation: state construction and
//! manipulation, Hermitian spectra, secrecy and entropy metrics, Toeplitz
//! hashing, and the verification / privacy-amplification pipeline.
//!
//! **Trace-norm convention.** Every distance in this crate uses
//! `‖σ‖₁ = ½ tr √(σσ†)`, i.e. the factor ½ lives *inside* the norm. A pair of
//! orthogonal unit-trace states is therefore at distance 1, and the
//! verification counterexample reports exactly 1/4.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod bits;
pub mod block;
pub mod counterexample;
pub mod cq_state;
pub mod error;
pub mod hashing;
pub mod metrics;
pub mod protocol;

pub use bits::{BitString, Symbol};
pub use block::{HermitianBlock, SpectrumResult, MAX_EVE_DIM};
pub use counterexample::CounterexampleReport;
pub use cq_state::{Alphabet, ClassicalDistribution, CqState, Register, Tolerances};
pub use error::{Error, Result};
pub use hashing::ToeplitzHash;
pub use protocol::{KeyLengthParams, PaMode, VerificationOutcome, Verdict};
