//! Recursive generation of all connected multigraphs with exact rational
//! weights (inverse symmetry factors), and evaluation of the resulting graph
//! sums as perturbative n-point functions of zero-dimensional field models.
//!
//! The core objects are [`Graph`] (a vertex-ordered multigraph with labeled
//! external legs and species-tagged internal edges) and [`GraphSum`] (a finite
//! linear combination of canonical graphs with exact rational weights).  The
//! [`generator`] module produces all connected graphs with a given loop,
//! vertex and leg count; the [`feynman`] module evaluates graph sums under
//! Feynman rules and cross-checks them against an independent series oracle.
//!
//! External legs always carry pairwise distinct labels; there is no mode with
//! identical (indistinguishable) external legs.

pub mod dot;
pub mod feynman;
pub mod generator;
pub mod graph;
pub mod hopf;
pub mod model;
pub mod series;
pub mod sum;
pub mod weight;

pub use graph::{Edge, Graph, GraphStats, Label, Leg, Species};
pub use sum::GraphSum;
pub use weight::Rat;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("vertex index {index} out of range 1..={v}")]
    VertexOutOfRange { index: u32, v: u32 },
    #[error("vertex count {0} out of supported range 1..=255")]
    BadVertexCount(u32),
    #[error("duplicate external label {0}")]
    DuplicateLabel(u32),
    #[error("invalid label {0}")]
    BadLabel(u32),
    #[error("species {0} out of declared range")]
    BadSpecies(u32),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("invalid parameters l={l}, v={v} (need v >= 1)")]
    BadOmegaParams { l: u32, v: u32 },
    #[error("omega_alt is undefined at (l, v) = (0, 1)")]
    AltAtBase,
    #[error("instance exceeds resource guard: {0}")]
    ResourceGuard(String),
    #[error("series variable sets or truncation caps do not match")]
    SeriesMismatch,
    #[error("series logarithm requires constant term 1, found {0}")]
    LogConstant(String),
    #[error("series exponential requires constant term 0, found {0}")]
    ExpConstant(String),
    #[error("series inverse requires nonzero constant term")]
    InverseZeroConstant,
    #[error("series substitution requires a replacement with constant term 0, found {0}")]
    SubstConstant(String),
    #[error("truncation caps {caps:?} too small for requested order {needed}")]
    CapTooSmall { caps: Vec<u32>, needed: u32 },
    #[error("coupling undefined for vertex with species profile {0:?}")]
    CouplingUndefined(Vec<u32>),
    #[error("propagator undefined for species {0}")]
    PropagatorUndefined(u32),
    #[error("model error: {0}")]
    Model(String),
    #[error("one-point-irreducible table violates its zero conventions: {0}")]
    BadOnePiTable(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
