//! Fractal dimension of raster images from lossless compressed size.
//!
//! A raster is downscaled to a ladder of percentages, each copy is
//! compressed, and the slope of `log2(size)` against `log2(scale)` estimates
//! the dimension. Box-counting and information dimension estimators and
//! synthetic Weierstrass and Sierpinski rasters are included for validation.

pub mod bench;
pub mod codec;
pub mod dimension;
pub mod error;
pub mod fit;
pub mod raster;
pub mod reference;
pub mod rescale;
pub mod synth;

pub use bench::{run_bench, BenchConfig, BenchReport};
pub use codec::{compress, compressed_size, Codec, CompressedBlob};
pub use dimension::{compression_dimension, EstimateConfig, RangePolicy, ScalingCurve};
pub use error::{Error, Result};
pub use fit::FitResult;
pub use raster::GrayRaster;
pub use rescale::{Percent, ScaleMode};
