//! Exact integer linear algebra and homology.

mod homology;
mod matrix;
pub mod modp;
mod simplicial;
mod snf;

pub use homology::{euler_characteristic, homology, homology_unchecked};
pub use matrix::SparseMatrix;
pub use simplicial::simplicial_chain_complex;
pub use snf::{factors_u64, invariant_factors, rank, smith_normal_form, SnfDecomposition};
