//! Multi-dimensional co-clustering of dense tensors under Bregman, metric,
//! and kernel-induced divergences.
//!
//! The pipeline clusters every dimension of a tensor independently
//! ([`tenclus::cotec`]), combines the per-dimension labels into a block
//! clustering, and optionally refines all dimensions jointly
//! ([`tenclus::sitec`]). The [`verify`] module holds exhaustive oracles and
//! numerical checkers for the approximation guarantees.

pub mod cluster1d;
pub mod datagen;
pub mod divergence;
pub mod error;
pub mod io;
pub mod par;
pub mod rng;
pub mod tenclus;
pub mod tensor;
pub mod verify;

pub use cluster1d::{cluster_1d, Assignment, ClusterConfig, ClusterOutcome, PointSet, Refine, Seeding};
pub use divergence::{CpdKernel, CurvatureBounds, CustomBregman, Divergence};
pub use error::{Error, Result};
pub use tenclus::{cotec, sitec, variant_pipeline, CoClustering, Variant, VariantConfig};
pub use tensor::{DenseTensor, Matrix, Shape};
