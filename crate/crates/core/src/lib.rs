//! Positive definite kernels on spheres cross groups through their
//! Schoenberg expansions.

pub mod cli;
pub mod error;
pub mod groups;
pub mod kernels;
pub mod linalg;
pub mod pd_check;
pub mod quadrature;
pub mod schoenberg;
pub mod special_functions;
pub mod spec_file;
pub mod table;

pub use error::{Error, Result};
pub use groups::{GroupElement, GroupModel, PdFunction, Verdict};
pub use kernels::{kernel_gram, KernelSpec, SpaceTimePoint, SpatialFactor};
pub use schoenberg::{Coefficient, Dimension, SchoenbergSequence};
pub use spec_file::KernelSpecFile;
