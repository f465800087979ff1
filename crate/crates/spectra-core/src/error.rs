//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by symbolic, geometric, and extraction operations.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A symbol does not belong to the transition system's alphabet.
    #[error("unknown symbol {symbol} (alphabet has {alphabet_len} symbols)")]
    UnknownSymbol { symbol: u8, alphabet_len: usize },

    /// A word contains a consecutive pair that is not an admissible transition.
    #[error("inadmissible pair ({a},{b}) at position {index}")]
    InadmissiblePair { a: u8, b: u8, index: usize },

    /// A concatenation failed at the junction between two pieces.
    #[error("inadmissible junction ({a},{b}) between pieces {index} and {next}", next = index + 1)]
    InadmissibleJunction { a: u8, b: u8, index: usize },

    /// A word was empty where a nonempty one is required.
    #[error("empty word")]
    EmptyWord,

    /// An alphabet or word set was empty where a nonempty one is required.
    #[error("empty collection: {0}")]
    EmptyCollection(&'static str),

    /// The transition system has a symbol with no outgoing or no incoming transition.
    #[error("dead symbol {symbol}: {reason}")]
    DeadSymbol { symbol: u8, reason: &'static str },

    /// A periodic word does not close up admissibly.
    #[error("period ({last},{first}) does not close admissibly")]
    PeriodDoesNotClose { last: u8, first: u8 },

    /// Depth-first enumeration needed to extend a word past the hard cap.
    #[error("enumeration overflow: word would exceed {cap} symbols")]
    EnumerationOverflow { cap: usize },

    /// A word-set failed the complete-subshift check.
    #[error("words {left} and {right} do not concatenate admissibly (junction ({a},{b}))")]
    NotCompleteSubshift { left: String, right: String, a: u8, b: u8 },

    /// The concatenation pool grew past its configured cap.
    #[error("concatenation pool exceeded cap of {cap} words; lower k or r0")]
    PoolCapExceeded { cap: usize },

    /// The sublevel set is too thin for the requested extraction.
    #[error("extraction impossible at stage `{stage}`: {reason}")]
    ExtractionImpossible { stage: &'static str, reason: String },

    /// Containment certification produced a non-positive margin.
    #[error("containment certification failed: worst window bound {bound} >= t = {t}")]
    CertificationFailed { bound: f64, t: f64 },

    /// No frame with matching block pairs could be cut.
    #[error("no frame positions with matching block pairs; increase frame length or pool size")]
    NoMatchingFrame,

    /// The maximizer gap could not be certified at the given block length.
    #[error("maximizer gap inconclusive at m = {m}: {reason}")]
    GapInconclusive { m: usize, reason: String },

    /// A numeric or structural parameter is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
