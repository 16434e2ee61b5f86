//! Dataset and model statistics: averaged magnitude spectra, spectral slope,
//! spectrum similarity, and filter diversity of convolution weights.

mod filters;
mod similarity;
mod slope;
mod stats;
mod weights;

pub use filters::{filter_similarity, model_report, model_report_dir, FilterSimilarity, LayerSimilarity, SimilarityReport};
pub use similarity::{spectrum_distance, ssim, SpectrumDistance, SSIM_K1, SSIM_K2, SSIM_WINDOW};
pub use slope::{fit_power_slope, fit_slope, fit_slope_profile, quantization_floor, SlopeFit};
pub use stats::{
    dataset_spectrum, list_images, radial_profile, spectrum_of_images, MagnitudeScale, RingMean, SpectrumAccumulator,
    SpectrumStats,
};
pub use weights::{parse_weight_tensor, read_weight_tensor, write_weight_tensor, WeightTensor, WT01_MAGIC};
