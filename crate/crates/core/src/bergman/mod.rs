//! Weighted Gram matrices, the restricted Bergman kernel and minimal-norm
//! extensions.
//!
//! Every quantity is carried in log form: `log G_kk` comes from a pruned
//! log-sum-exp over quadrature nodes and the kernel is assembled from
//! max-shifted evaluation vectors, so `m = 64` never touches subnormals.

mod extension;
mod gram;
mod kernel;

pub use extension::{extension_report, minimal_norm_extension, Extension, ExtensionReport};
pub use gram::{gram, orthonormalize, GramMatrix, OrthonormalTransform};
pub use kernel::{extremal_check, fs_potential, kernel_eval, trace, BergmanLevel, KernelGrid};

pub(crate) use kernel::potential_from_kernel;
