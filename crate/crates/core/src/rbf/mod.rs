//! Rescaled radial-basis interpolation of master shape functions.

pub mod diagnostics;
pub mod interpolant;
pub mod kernel;
pub mod layout;

pub use diagnostics::{condition_estimate_1norm, InterpolationDiagnostics};
pub use interpolant::{default_condition_limit, fit_master_interpolant, fit_master_with, EpsilonPolicy, MasterFitOptions, RbfInterpolant};
pub use kernel::{kernel_eval, KernelFamily, RbfKernel};
pub use layout::{interpolation_points, LayoutVariant, PointLayout};
