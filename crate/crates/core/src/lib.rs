//! Geometry toolkit for 6DoF face pose: rotation utilities, pinhole projection,
//! pose conversion between crop and image cameras, face boxes from poses,
//! PnP-based labeling, training losses, dataset bookkeeping and evaluation.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod face_model;
pub mod geometry;
pub mod losses;
pub mod matching;
pub mod pnp;
pub mod transform;

pub use error::{Error, Result};
