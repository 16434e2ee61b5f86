//! Procedural synthesis of privacy-free pretraining images and the
//! frequency/filter statistics used to study them.
//!
//! Generation covers five variants: pink noise with a `1/(|fx|^a + |fy|^a)`
//! magnitude law, compositions of elementary shapes under a decaying size
//! schedule, and those compositions with a large central ("salient") shape
//! that is either flat or pink-noise textured.
//!
//! Everything is driven by counter-derived random streams keyed on
//! `(seed, image index)`, so a dataset is byte-identical no matter how many
//! workers produce it.

pub mod analysis;
pub mod cli;
mod error;
pub mod generator;
pub mod image;
pub mod rng;
pub mod shapes;
pub mod spectrum;

pub use error::{Error, Result};
pub use generator::{GeneratorConfig, Variant};
pub use image::ImageBuffer;
pub use rng::Stream;
