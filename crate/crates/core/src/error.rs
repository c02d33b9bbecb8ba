//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by format construction, emulation, loading, and search.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric format failed validation.
    #[error("invalid format: {0}")]
    InvalidFormat(String),

    /// A format literal could not be parsed.
    #[error("cannot parse format literal {literal:?}: {reason}")]
    ParseFormat { literal: String, reason: String },

    /// An operation received a non-finite input.
    #[error("non-finite input {0} to a quantized operation")]
    NonFinite(f64),

    /// encode() was given a value that is not representable in the format.
    #[error("value {value} is not representable in format {format}")]
    Unrepresentable { value: f64, format: String },

    /// A bit pattern's width does not match the format it is decoded with.
    #[error("bit pattern width {pattern} does not match format width {format}")]
    WidthMismatch { pattern: u32, format: u32 },

    /// enumerate_values() was asked for a format too wide to enumerate.
    #[error("format width {0} exceeds the enumeration limit of {1} bits")]
    EnumerationTooWide(u32, u32),

    /// Tensor construction or use with inconsistent shape/data.
    #[error("shape error: {0}")]
    Shape(String),

    /// A network failed structural validation.
    #[error("network error in layer {layer:?}: {reason}")]
    Network { layer: String, reason: String },

    /// A layer referenced a weight tensor that is not present.
    #[error("missing weight tensor {0:?}")]
    MissingTensor(String),

    /// A binary input file is malformed.
    #[error("format error in {path} at byte {offset}: {reason}")]
    DataFormat {
        path: String,
        offset: u64,
        reason: String,
    },

    /// A manifest or cost-table text file is malformed.
    #[error("parse error in {path}: {reason}")]
    ParseFile { path: String, reason: String },

    /// A cost table query or construction violated the table contract.
    #[error("cost table error: {0}")]
    CostTable(String),

    /// Metric arguments were inconsistent.
    #[error("metric error: {0}")]
    Metric(String),

    /// A model fit had no usable variation in its inputs.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// A search was started with an empty design space.
    #[error("empty design space")]
    EmptySpace,

    /// An index into a network, layer, or dataset was out of range.
    #[error("index error: {0}")]
    Index(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
