//! Fredholm determinants of matrix Airy convolution operators and the
//! noncommutative Painlevé II / XXXIV equations of the Hastings–McLeod
//! family, computed along two independent routes that are cross-checked.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airy;
pub mod cli;
pub mod config;
pub mod error;
pub mod fredholm;
pub mod kernels;
pub mod linalg;
pub mod ncp2;
pub mod ncp34;
pub mod table;
pub mod tw;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::CMat;
pub use num_complex::Complex64;
