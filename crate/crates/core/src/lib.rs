//! Design and simulation of finite-alphabet ("min-LUT") LDPC decoders.
//!
//! The library covers the full pipeline:
//!
//! - modelling a BI-AWGN channel with a symmetric quantized-LLR front end
//!   ([`channel`]),
//! - mutual-information-maximizing quantizer (LUT) design for binary-input
//!   discrete channels ([`quant`]),
//! - nested LUT tree structures for variable-node updates ([`trees`]),
//! - discretized density evolution, per-iteration LUT stack design and
//!   noise-threshold search ([`design`]),
//! - Tanner graph parsing and generation ([`tanner`]),
//! - bit-exact execution of the designed decoder plus min-sum baselines
//!   ([`decoder`]),
//! - a deterministic Monte Carlo error-rate harness ([`sim`]).

pub mod channel;
pub mod decoder;
pub mod decoder_spec;
pub mod design;
pub mod error;
pub mod pmf;
pub mod quant;
pub mod sim;
pub mod tanner;
pub mod trees;

pub use error::Error;
pub use pmf::ConditionalPmf;
