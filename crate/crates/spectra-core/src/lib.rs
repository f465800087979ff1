//! Dynamical Markov and Lagrange spectra over subshifts of finite type with
//! regular-Cantor-set geometry.
//!
//! The crate works in the symbolic model throughout: a [`TransitionSystem`]
//! presents the shift space, a [`geometry::GeometryModel`] assigns cylinder
//! sizes and scales to finite words, and a [`potential::Potential`] provides
//! certified window bounds together with exact values on periodic sequences.
//! On top of that sit
//!
//! - certified three-valued membership of cylinders in dynamical sublevel
//!   sets ([`sublevel`]),
//! - covering-count dimension estimators with honest lower/upper brackets
//!   ([`dimension`]),
//! - extraction of framed complete subshifts inside a sublevel set with an
//!   independent containment certificate ([`extraction`]),
//! - symbolic realization of Lagrange values by maximizer removal
//!   ([`realization`]).
//!
//! The classical objects are recovered on the full shift over the digits
//! `{1, ..., N}` with Gauss-cylinder geometry and the potential
//! `f(θ) = [θ_0; θ_1, ...] + [0; θ_{-1}, θ_{-2}, ...]`: the set of Markov
//! values of periodic points is the classical Markov spectrum restricted to
//! bounded digits, and `sqrt(5)`, `2 sqrt(2)`, `sqrt(221)/5` come out exactly.
//!
//! ```
//! use spectra_core::{TransitionSystem, PeriodicPoint, Word};
//! use spectra_core::potential::{markov_value, ClassicalCfPotential};
//!
//! let ts = TransitionSystem::full_shift_n(2)?;
//! let pot = ClassicalCfPotential::new(ts.clone());
//! let golden = PeriodicPoint::new(Word::new(vec![1], &ts)?, 0, &ts)?;
//! assert!((markov_value(&golden, &pot) - 5.0_f64.sqrt()).abs() < 1e-12);
//! # Ok::<(), spectra_core::Error>(())
//! ```

pub mod cf;
pub mod dimension;
pub mod error;
pub mod extraction;
pub mod geometry;
pub mod interval;
pub mod potential;
pub mod realization;
pub mod sublevel;
pub mod symbolic;
pub mod verify;

pub use error::{Error, Result};
pub use interval::Interval;
pub use symbolic::{
    check_complete_subshift, concat, enumerate_words, is_admissible, AlphabetKind, PeriodicPoint,
    Symbol, TransitionSystem, Word, WordAlphabet, DEFAULT_DEPTH_CAP,
};
