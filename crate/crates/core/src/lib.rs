//! Illumination-robust image retrieval toolkit.
//!
//! The pipeline is: photometric normalisation of the LAB lightness channel
//! ([`photometric`]), descriptor extraction or ingestion ([`descriptor`]),
//! supervised whitening ([`whitening`]), and ranking plus mAP evaluation
//! ([`retrieval`]). [`mining`] builds illumination-hard training pairs from
//! structure-from-motion models, and [`exposure`] synthesises intermediate
//! illumination levels from aligned exposure pairs.

// `!(x > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod descriptor;
pub mod error;
pub mod exposure;
pub mod fixtures;
pub mod mining;
pub mod photometric;
pub mod raster;
pub mod retrieval;
pub mod rng;
pub mod whitening;

pub use error::{Error, Result};
