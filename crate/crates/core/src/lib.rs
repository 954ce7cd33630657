//! Computational toolkit for groups that are hyperbolic relative to a
//! peripheral subgroup: Cayley and coned-off balls, relative Rips complexes,
//! exact integer homology and essential-triviality certificates along the
//! `(r, d, s)` filtration.

pub mod brown;
pub mod cayley;
pub mod coned;
pub mod error;
pub mod fixtures;
pub mod homology;
pub mod hyperbolicity;
pub mod presentation;
pub mod rips;

pub use cayley::{build_ball, coset_table, graph_distance, CayleyBall, CosetTable};
pub use coned::{build_coned_ball, ConedBall, RelativePath};
pub use error::{CoreError, Result};
pub use presentation::{
    normal_form, parse_presentation, Fixture, GeneratorSet, GroupPresentation, Letter,
    PeripheralSpec, RewritingSystem, Word,
};
pub use rips::{RipsParams, SimplicialComplex};
