//! Extreme and almost-extreme Khovanov homology of link diagrams through
//! cube functors on chord diagrams.

pub mod algebra;
pub mod configs;
pub mod decomp;
pub mod error;
pub mod extreme;
pub mod functors;
pub mod ingest;
pub mod model;
pub mod oracle;
pub mod statecube;

pub use error::{Error, Result};
pub use model::{ChordDiagram, GradedChainComplex, HomologyResult, PdCode, ResolvedState, SimplicialComplex, State};
