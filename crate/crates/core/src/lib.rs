//! Simulation of DNN inference under customized narrow-precision arithmetic.
//!
//! The crate emulates customized floating-point and fixed-point formats
//! bit-exactly ([`numeric`]), runs network forward passes in which every
//! arithmetic operation is quantized into the active format ([`inference`]),
//! loads networks and benchmark datasets ([`model_io`]), attaches a
//! speedup/energy cost model to each format ([`costmodel`]), and searches the
//! format design space for the fastest configuration meeting an accuracy
//! constraint ([`search`]).

pub mod costmodel;
pub mod error;
pub mod inference;
pub mod model_io;
pub mod numeric;
pub mod search;
pub mod stats;
pub mod tensor;

pub use error::{Error, Result};
pub use numeric::{BitPattern, FixedFormat, FloatFormat, FormatKind, NumericFormat, Rounding};
pub use tensor::Tensor;
