//! Mortar coupling of non-conforming finite-element interfaces with
//! radial-basis (RB), element-based (EB) and exact segment-based (SB) quadrature.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod mesh;
pub mod mortar;
pub mod rbf;
pub mod solver;

pub use error::{Error, Result};
