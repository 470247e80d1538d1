//! Unsupervised illuminant estimation for linear RGB images.
//!
//! [`tiger::train_color_tiger`] learns two illumination centers from pooled
//! Shades-of-Gray estimates without any ground truth, and
//! [`tiger::apply_color_tiger`] picks one of them per image by letting the
//! Gray-world and White-patch estimates vote. The Bengal variant
//! ([`tiger::train_color_bengal_tiger`]) divides out per-channel sensor gains
//! so a model trained on one camera can be applied to another.
//!
//! [`metrics`] holds the evaluation side: error summaries, Sets' Angular
//! Error (an optimal one-to-one matching between ground truths and
//! estimates) and nearest-angle histograms.

pub mod cluster;
pub mod color;
pub mod data;
pub mod error;
pub mod estimators;
pub mod eval;
pub mod image;
pub mod metrics;
pub mod modelfile;
pub mod tiger;

pub use color::{angular_distance, normalize, rb_chromaticity, Chromaticity, Illuminant, Rgb};
pub use error::{Error, Result};
pub use image::LinearImage;
