//! Werner states, sequential ideal measurements and CHSH tests of nonlocality
//! that only shows up after a local filtering measurement.
//!
//! A Werner state of local dimension `d` violates no CHSH inequality when
//! each side performs a single ideal measurement. If each side first measures
//! the rank-2 projector onto span{|1⟩, |2⟩} and keeps the pairs where both
//! filters fire, the surviving subensemble has CHSH value
//! `(2d/(2d+4))·2√2`, which exceeds 2 for `d ≥ 5`.
//!
//! * [`quantum_core`]: dense complex matrices, Hermitian eigensolver, states.
//! * [`werner`]: basis kets, singlets, the Werner matrix and the flip operator.
//! * [`measurement`]: projective measurements, the two-stage protocol, sampling.
//! * [`chsh`]: CHSH observables, the filtered state and the dimension sweep.
//! * [`lhv`]: finite local-hidden-variable models and post-selection.
//! * [`output`]: CSV/JSON emitters.

pub mod chsh;
pub mod error;
pub mod lhv;
pub mod measurement;
pub mod outcome;
pub mod output;
pub mod quantum_core;
pub mod werner;

pub use error::{Error, Result};
