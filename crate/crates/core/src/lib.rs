//! Frequency-structure analysis of link streams.
//!
//! A link stream is held as a dense `T × M` matrix `L` whose rows are graphs
//! (weight functions over the relation space) and whose columns are edge time
//! series. Linear time operators act from the left (`H L`) and linear graph
//! operators from the right (`L Q`). This crate provides:
//!
//! * [`stream`]: relation spaces, link stream matrices, graph slices and the
//!   `dist` / `edit` graph distances;
//! * [`partition`]: recursive dyadic partitions of the relation space
//!   (SVD bisection, BFS halving, Z-order leaf mapping);
//! * [`graph_basis`]: the Haar-style orthonormal graph basis with an `O(M)`
//!   filter bank, embeddings, structural filters and graph regularity;
//! * [`time_basis`]: the unitary DFT, circulant operators and frequency filters;
//! * [`spectra`]: the joint decomposition `C = Ψ* L Φᵀ`, joint filters,
//!   backbones and link stream regularity;
//! * [`synth`]: seeded generators and Monte-Carlo checks of the embedding and
//!   regularity identities.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dense;
pub mod error;
pub mod graph_basis;
pub mod partition;
pub mod spectra;
pub mod stream;
pub mod synth;
pub mod time_basis;

pub use dense::{ComplexMatrix, Matrix, RealMatrix};
pub use error::{Error, Result};
pub use graph_basis::{CoefficientKind, GraphBasis, GraphCoefficients, StructuralResponse};
pub use partition::{PartitionTree, TreeNode, VertexSplit};
pub use spectra::{Backbone, Boundary, CoefficientMatrix, JointFilter, Regularity, Selection, StreamBases};
pub use stream::{GraphSlice, LinkStreamMatrix, Relation, RelationSpace};
pub use time_basis::{CirculantOperator, FourierBasis, FrequencyFilter};

pub use num_complex::Complex64;

/// `true` when `n` is a positive power of two.
#[inline]
pub fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

/// `log2(n)` for a power of two.
#[inline]
pub(crate) fn log2_exact(n: usize) -> u32 {
    debug_assert!(is_power_of_two(n));
    n.trailing_zeros()
}
