//! Exact Weil-Petersson volumes from topological recursion on the JT
//! spectral curves, JT (super)gravity closed forms, and a finite-N random
//! matrix laboratory used to cross-check the matrix side.

pub mod acceptance;
pub mod curves;
pub mod error;
pub mod gravity;
pub mod matrix_lab;
pub mod oracle;
pub mod quad;
pub mod recursion;
pub mod ring;

pub use error::{Error, Result};
pub use ring::{ExactScalar, Rational, TruncSeries};
