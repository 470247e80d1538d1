//! Dataset ingestion and generation: 16-bit PPM images, CSV manifests,
//! raw-data preprocessing, cross-validation folds and a synthetic
//! multi-sensor corpus generator.

mod folds;
mod manifest;
mod ppm;
mod preprocess;
mod synth;

pub use folds::kfold;
pub use manifest::{load_manifest, parse_manifest, DatasetManifest, ManifestEntry};
pub use ppm::{decode_ppm, encode_ppm16, read_ppm, write_ppm16, RawImage};
pub use preprocess::{preprocess, Profile};
pub use synth::{quantize, render_pixel, synth_dataset, write_synth_dataset, SynthConfig, SynthDataset};

use std::path::Path;

use rayon::prelude::*;

use crate::error::Result;
use crate::image::LinearImage;

/// Reads and preprocesses one image file.
pub fn load_image(path: &Path, profile: &Profile) -> Result<LinearImage> {
    preprocess(&read_ppm(path)?, profile)
}

/// Loads every manifest image in parallel; results keep manifest order.
pub fn load_images(manifest: &DatasetManifest, profile: &Profile) -> Result<Vec<LinearImage>> {
    manifest.entries.par_iter().map(|e| load_image(&e.path, profile)).collect()
}
