//! Synthetic two-mode corpus under the diagonal sensor model
//! `pixel = gains * illuminant * reflectance`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use crate::color::{normalize, offset_direction, Illuminant, Rgb};
use crate::error::{Error, Result};
use crate::image::LinearImage;
use crate::tiger::GainTriplet;

use super::{encode_ppm16, DatasetManifest, ManifestEntry, RawImage};

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub image_count: usize,
    pub width: usize,
    pub height: usize,
    /// Warm mode of the scene illuminant distribution.
    pub mode_a: Illuminant,
    /// Cool mode.
    pub mode_b: Illuminant,
    /// Per-axis standard deviation of the angular jitter around a mode, degrees.
    pub mode_spread: f64,
    /// Probability that an image is lit from `mode_a`.
    pub mode_mix: f64,
    pub gains: GainTriplet,
    /// Standard deviation of multiplicative per-sample noise.
    pub noise_sigma: f64,
    /// Log-normal sigma of a per-image reflectance tint; 0 keeps every
    /// scene achromatic on average.
    pub scene_cast: f64,
    /// Fraction of images whose reflectances get the strong `outlier_cast` tint.
    pub outlier_fraction: f64,
    pub outlier_cast: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// Two modes symmetric about white along the red-blue axis,
    /// `separation` degrees apart.
    pub fn symmetric_modes(separation: f64) -> (Illuminant, Illuminant) {
        let w = 1.0 / 3f64.sqrt();
        let d = std::f64::consts::FRAC_1_SQRT_2;
        let (s, c) = (0.5 * separation).to_radians().sin_cos();
        let warm = normalize([c * w + s * d, c * w, c * w - s * d]).expect("separation below 70 degrees");
        let cool = normalize([c * w - s * d, c * w, c * w + s * d]).expect("separation below 70 degrees");
        (warm, cool)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.image_count == 0 || self.width == 0 || self.height == 0 {
            return bad("image count and size must be positive");
        }
        if !(0.0..=1.0).contains(&self.mode_mix) || !(0.0..=1.0).contains(&self.outlier_fraction) {
            return bad("probabilities must lie in [0, 1]");
        }
        for (name, v) in [
            ("mode_spread", self.mode_spread),
            ("noise_sigma", self.noise_sigma),
            ("scene_cast", self.scene_cast),
            ("outlier_cast", self.outlier_cast),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!("{name} must be a non-negative number")));
            }
        }
        Ok(())
    }

    /// Key-value sidecar recording the configuration and the true gains.
    pub fn to_kv(&self) -> String {
        let t = |i: &Illuminant| {
            let v = i.to_array();
            format!("{} {} {}", v[0], v[1], v[2])
        };
        let g = self.gains.to_array();
        let mut out = String::new();
        let _ = writeln!(out, "image_count={}", self.image_count);
        let _ = writeln!(out, "width={}", self.width);
        let _ = writeln!(out, "height={}", self.height);
        let _ = writeln!(out, "mode_a={}", t(&self.mode_a));
        let _ = writeln!(out, "mode_b={}", t(&self.mode_b));
        let _ = writeln!(out, "mode_spread={}", self.mode_spread);
        let _ = writeln!(out, "mode_mix={}", self.mode_mix);
        let _ = writeln!(out, "gains={} {} {}", g[0], g[1], g[2]);
        let _ = writeln!(out, "noise_sigma={}", self.noise_sigma);
        let _ = writeln!(out, "scene_cast={}", self.scene_cast);
        let _ = writeln!(out, "outlier_fraction={}", self.outlier_fraction);
        let _ = writeln!(out, "outlier_cast={}", self.outlier_cast);
        let _ = writeln!(out, "seed={}", self.seed);
        out
    }
}

impl Default for SynthConfig {
    fn default() -> Self {
        let (mode_a, mode_b) = Self::symmetric_modes(20.0);
        SynthConfig {
            image_count: 100,
            width: 64,
            height: 64,
            mode_a,
            mode_b,
            mode_spread: 2.0,
            mode_mix: 0.5,
            gains: GainTriplet::identity(),
            noise_sigma: 0.0,
            scene_cast: 0.0,
            outlier_fraction: 0.0,
            outlier_cast: 0.5,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthDataset {
    pub images: Vec<LinearImage>,
    /// Ground truths as the sensor sees them: `normalize(gains * scene)`.
    pub manifest: DatasetManifest,
    pub gains: GainTriplet,
    /// Sampled scene illuminants before the sensor gains.
    pub scene_illuminants: Vec<Illuminant>,
    /// Whether each image received the outlier tint.
    pub outliers: Vec<bool>,
}

fn image_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

struct Rendered {
    image: LinearImage,
    scene: Illuminant,
    outlier: bool,
}

/// Noise-free sensor response `gains * illuminant * reflectance`.
pub fn render_pixel(gains: &GainTriplet, illuminant: &Illuminant, reflectance: Rgb) -> Rgb {
    let g = gains.to_array();
    let e = illuminant.to_array();
    [g[0] * e[0] * reflectance[0], g[1] * e[1] * reflectance[1], g[2] * e[2] * reflectance[2]]
}

fn render(cfg: &SynthConfig, index: usize) -> Rendered {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(image_seed(cfg.seed, index));
    let mode = if rng.random::<f64>() < cfg.mode_mix { cfg.mode_a } else { cfg.mode_b };
    let dx: f64 = rng.sample::<f64, _>(StandardNormal) * cfg.mode_spread;
    let dy: f64 = rng.sample::<f64, _>(StandardNormal) * cfg.mode_spread;
    let scene = offset_direction(&mode, dx.hypot(dy), dy.atan2(dx));
    let outlier = rng.random::<f64>() < cfg.outlier_fraction;
    let cast = if outlier { cfg.outlier_cast } else { cfg.scene_cast };
    let mut tint = [1.0; 3];
    if cast > 0.0 {
        for t in &mut tint {
            *t = (cast * rng.sample::<f64, _>(StandardNormal)).exp();
        }
    }
    let pixels = (0..cfg.width * cfg.height)
        .map(|_| {
            // Uniform on (0, 1] per channel.
            let mut reflectance = [0.0; 3];
            for (r, t) in reflectance.iter_mut().zip(&tint) {
                *r = t * (1.0 - rng.random::<f64>());
            }
            let mut px = render_pixel(&cfg.gains, &scene, reflectance);
            if cfg.noise_sigma > 0.0 {
                for v in &mut px {
                    *v = (*v * (1.0 + cfg.noise_sigma * rng.sample::<f64, _>(StandardNormal))).max(0.0);
                }
            }
            px
        })
        .collect();
    let image = LinearImage::from_pixels(cfg.width, cfg.height, pixels).expect("rendered pixels are valid");
    Rendered { image, scene, outlier }
}

/// Renders the corpus. Each image draws from its own seed derived from
/// `cfg.seed`, so the output does not depend on the worker count.
pub fn synth_dataset(cfg: &SynthConfig) -> Result<SynthDataset> {
    cfg.validate()?;
    let rendered: Vec<Rendered> = (0..cfg.image_count).into_par_iter().map(|i| render(cfg, i)).collect();
    let gains = cfg.gains.to_array();
    let mut entries = Vec::with_capacity(rendered.len());
    for (i, r) in rendered.iter().enumerate() {
        entries.push(ManifestEntry {
            path: PathBuf::from(format!("synth_{i:05}.ppm")),
            ground_truth: r.scene.scaled_by(&gains)?,
            second_ground_truth: None,
        });
    }
    let scene_illuminants = rendered.iter().map(|r| r.scene).collect();
    let outliers = rendered.iter().map(|r| r.outlier).collect();
    Ok(SynthDataset {
        images: rendered.into_iter().map(|r| r.image).collect(),
        manifest: DatasetManifest { entries, profile: "plain".into() },
        gains: cfg.gains,
        scene_illuminants,
        outliers,
    })
}

/// Scales an image so its brightest sample maps near the top of the 16-bit
/// range and rounds to integers.
pub fn quantize(img: &LinearImage) -> RawImage {
    let max = img.pixels().iter().flatten().copied().fold(0.0, f64::max);
    let scale = if max > 0.0 { 65000.0 / max } else { 0.0 };
    RawImage {
        width: img.width(),
        height: img.height(),
        maxval: 65535,
        data: img.pixels().iter().map(|px| px.map(|v| (v * scale).round().min(65535.0) as u16)).collect(),
    }
}

/// Writes images, `manifest.csv` and the `synth.cfg` sidecar into `dir`.
/// Returns the manifest path.
pub fn write_synth_dataset(dir: &Path, data: &SynthDataset, cfg: &SynthConfig) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    data.images
        .par_iter()
        .zip(&data.manifest.entries)
        .try_for_each(|(img, entry)| fs::write(dir.join(&entry.path), encode_ppm16(&quantize(img))))?;
    let manifest_path = dir.join("manifest.csv");
    fs::write(&manifest_path, data.manifest.to_csv())?;
    fs::write(dir.join("synth.cfg"), cfg.to_kv())?;
    Ok(manifest_path)
}
