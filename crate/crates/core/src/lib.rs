//! Erasure correctability of stabilizer and CSS codes, mean-rank profiles,
//! rate and threshold bounds for `(2, m)` codes, and bond percolation on
//! their graphs.
//!
//! Everything works over F2: Pauli operators are symplectic vectors
//! `(x | z)` with phases dropped, and CSS matrices are plain bit matrices.

pub mod css_graph;
pub mod error;
pub mod f2la;
pub mod output;
pub mod percolation;
pub mod rank_profile;
pub mod sampling;
pub mod series_bounds;
pub mod stabilizer;
pub mod verify;

pub use css_graph::{CssCode, FaceSet, IncidenceGraph};
pub use error::{Error, Result};
pub use f2la::{BitMatrix, BitVector, RowSpace};
pub use percolation::{ClusterReport, PercolationInstance};
pub use rank_profile::{Estimate, ExpectationMode, RankProfile, RankView};
pub use series_bounds::{BoundKind, BoundSpec, RationalSeries};
pub use stabilizer::{ErasureAnalysis, PauliOperator, StabilizerCode, StabilizerMatrix};

/// Crate version, recorded in output headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
