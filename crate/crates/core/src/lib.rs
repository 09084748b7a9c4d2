//! Soil-nutrient leaf-yield regression toolkit.
//!
//! The pipeline runs ingestion ([`dataset`]), cleaning and categorical
//! encoding, a seeded train/test split, min-max scaling ([`preprocess`]),
//! and one of three regressors: least squares and ridge ([`linear`]) or a
//! random forest ([`forest`]). Models are scored with R², RMSE and MAE
//! ([`metrics`], [`report`]) and persisted as versioned JSON ([`model`]).

// `!(a <= b)` is used deliberately so NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agronomy;
pub mod dataset;
pub mod error;
pub mod forest;
pub mod linalg;
pub mod linear;
pub mod metrics;
pub mod model;
pub mod preprocess;
pub mod report;
pub mod rng;
mod svg;
pub mod synth;

pub use error::{Error, ErrorClass, Result};
pub use linalg::Matrix;
