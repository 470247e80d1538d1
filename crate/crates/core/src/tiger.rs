//! Color Tiger (two illumination centers learned from Shades-of-Gray
//! estimates, no ground truth) and Color Bengal Tiger (the same, trained on
//! one sensor and applied to another after neutralizing channel gains).

use rayon::prelude::*;

use crate::cluster::{spherical_kmeans, trim, TrimConfig};
use crate::color::{normalize, Illuminant, Rgb};
use crate::error::{Error, Result};
use crate::estimators::{gray_world, sog_sweep, white_patch, SogSweepConfig, DEFAULT_SWEEP_POWER};
use crate::image::LinearImage;

pub const DEFAULT_TRIM: f64 = 0.3;

/// Hyper-parameters shared by both training procedures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    /// Upper Shades-of-Gray power; powers `1..=n` are pooled.
    pub n: u32,
    /// Fraction of the farthest estimates dropped per provisional cluster.
    pub t: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(n: u32, t: f64, seed: u64) -> Result<Self> {
        SogSweepConfig::new(n)?;
        TrimConfig::new(t, 2)?;
        Ok(TrainConfig { n, t, seed })
    }

    fn sweep(&self) -> SogSweepConfig {
        SogSweepConfig { n: self.n }
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { n: DEFAULT_SWEEP_POWER, t: DEFAULT_TRIM, seed: 0 }
    }
}

/// Per-channel sensor gains `(g_r, g_g, g_b)`, all strictly positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainTriplet([f64; 3]);

impl GainTriplet {
    pub fn new(r: f64, g: f64, b: f64) -> Result<Self> {
        Self::from_array([r, g, b])
    }

    pub fn from_array(g: Rgb) -> Result<Self> {
        if g.iter().any(|&c| !c.is_finite() || c <= 0.0) {
            return Err(Error::ZeroChannel);
        }
        Ok(GainTriplet(g))
    }

    pub fn identity() -> Self {
        GainTriplet([1.0; 3])
    }

    pub fn to_array(self) -> Rgb {
        self.0
    }

    /// The same gains scaled to unit L2 norm.
    pub fn normalized(&self) -> GainTriplet {
        GainTriplet(normalize(self.0).expect("gains are positive").to_array())
    }
}

/// Two centers, warm (larger r-chromaticity) first.
fn order_warm_first(mut centers: [Illuminant; 2]) -> [Illuminant; 2] {
    if centers[1].chromaticity().r > centers[0].chromaticity().r {
        centers.swap(0, 1);
    }
    centers
}

/// A trained Color Tiger model.
#[derive(Clone, Debug, PartialEq)]
pub struct TigerModel {
    centers: [Illuminant; 2],
    pub config: TrainConfig,
    /// Free-form identifier of the training data.
    pub provenance: String,
}

impl TigerModel {
    /// Builds a model, reordering the centers warm-first.
    pub fn new(centers: [Illuminant; 2], config: TrainConfig, provenance: impl Into<String>) -> Self {
        TigerModel { centers: order_warm_first(centers), config, provenance: provenance.into() }
    }

    pub fn centers(&self) -> &[Illuminant; 2] {
        &self.centers
    }
}

/// A trained Color Bengal Tiger model. Centers live in the gain-neutral space.
#[derive(Clone, Debug, PartialEq)]
pub struct BengalModel {
    pub source_gains: GainTriplet,
    pub target_gains: GainTriplet,
    centers: [Illuminant; 2],
    pub config: TrainConfig,
    pub provenance: String,
}

impl BengalModel {
    pub fn new(
        source_gains: GainTriplet,
        target_gains: GainTriplet,
        centers: [Illuminant; 2],
        config: TrainConfig,
        provenance: impl Into<String>,
    ) -> Self {
        BengalModel {
            source_gains,
            target_gains,
            centers: order_warm_first(centers),
            config,
            provenance: provenance.into(),
        }
    }

    pub fn centers(&self) -> &[Illuminant; 2] {
        &self.centers
    }
}

/// Shades-of-Gray estimates for powers `1..=n` of every image, pooled in
/// image order. Images are processed in parallel on the current rayon pool.
pub fn pool_sweep(images: &[LinearImage], n: u32) -> Result<Vec<Illuminant>> {
    let cfg = SogSweepConfig::new(n)?;
    let per_image: Vec<Vec<Illuminant>> = images.par_iter().map(|img| sog_sweep(img, cfg)).collect::<Result<_>>()?;
    Ok(per_image.into_iter().flatten().collect())
}

/// Trims the pooled estimates and clusters the survivors into two
/// warm-first centers.
pub fn centers_from_estimates(estimates: &[Illuminant], cfg: &TrainConfig) -> Result<[Illuminant; 2]> {
    if estimates.is_empty() {
        return Err(Error::EmptyInput);
    }
    let kept = trim(estimates, TrimConfig::new(cfg.t, 2)?, cfg.seed)?;
    let model = spherical_kmeans(&kept, 2, cfg.seed)?;
    Ok(order_warm_first([model.centers[0], model.centers[1]]))
}

fn require_images(images: &[LinearImage], min: usize) -> Result<()> {
    if images.is_empty() {
        return Err(Error::EmptyInput);
    }
    if images.len() < min {
        return Err(Error::DegenerateInput(format!("need at least {min} images, got {}", images.len())));
    }
    Ok(())
}

pub fn train_color_tiger(images: &[LinearImage], cfg: &TrainConfig) -> Result<TigerModel> {
    require_images(images, 2)?;
    let pool = pool_sweep(images, cfg.sweep().n)?;
    let centers = centers_from_estimates(&pool, cfg)?;
    Ok(TigerModel::new(centers, *cfg, ""))
}

/// Index of the center with the largest sum of cosines to the Gray-world
/// and White-patch estimates. Exact ties pick index 0.
pub fn vote(centers: &[Illuminant; 2], gw: &Illuminant, wp: &Illuminant) -> usize {
    let score = |c: &Illuminant| c.dot(gw) + c.dot(wp);
    if score(&centers[1]) > score(&centers[0]) {
        1
    } else {
        0
    }
}

pub fn apply_color_tiger(img: &LinearImage, model: &TigerModel) -> Result<Illuminant> {
    let gw = gray_world(img)?;
    let wp = white_patch(img)?;
    Ok(model.centers[vote(&model.centers, &gw, &wp)])
}

fn median_of(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Channel-wise medians of normalized estimates, renormalized.
pub fn gains_from_estimates(estimates: &[Illuminant]) -> Result<GainTriplet> {
    if estimates.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut g = [0.0; 3];
    for (c, slot) in g.iter_mut().enumerate() {
        let mut channel: Vec<f64> = estimates.iter().map(|e| e.to_array()[c]).collect();
        *slot = median_of(&mut channel);
    }
    Ok(GainTriplet::from_array(g)?.normalized())
}

pub fn learn_gains(images: &[LinearImage], n: u32) -> Result<GainTriplet> {
    require_images(images, 1)?;
    gains_from_estimates(&pool_sweep(images, n)?)
}

/// Divides every estimate component-wise by `gains`.
pub fn neutralize(estimates: &[Illuminant], gains: &GainTriplet) -> Result<Vec<Illuminant>> {
    estimates.iter().map(|e| e.divided_by(&gains.0)).collect()
}

pub fn train_color_bengal_tiger(
    train_images: &[LinearImage],
    target_images: &[LinearImage],
    cfg: &TrainConfig,
) -> Result<BengalModel> {
    require_images(train_images, 1)?;
    require_images(target_images, 1)?;
    let pool = pool_sweep(train_images, cfg.n)?;
    let source_gains = gains_from_estimates(&pool)?;
    let target_gains = learn_gains(target_images, cfg.n)?;
    let centers = centers_from_estimates(&neutralize(&pool, &source_gains)?, cfg)?;
    Ok(BengalModel::new(source_gains, target_gains, centers, *cfg, ""))
}

/// Index of the gain-neutral center chosen for `img`.
pub fn bengal_choice(img: &LinearImage, model: &BengalModel) -> Result<usize> {
    let g = model.target_gains.0;
    let gw = gray_world(img)?.divided_by(&g)?;
    let wp = white_patch(img)?.divided_by(&g)?;
    Ok(vote(&model.centers, &gw, &wp))
}

pub fn apply_color_bengal_tiger(img: &LinearImage, model: &BengalModel) -> Result<Illuminant> {
    let idx = bengal_choice(img, model)?;
    model.centers[idx].scaled_by(&model.target_gains.0)
}

/// Either kind of trained model, as stored in a model file.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Tiger(TigerModel),
    Bengal(BengalModel),
}

impl Model {
    pub fn method(&self) -> &'static str {
        match self {
            Model::Tiger(_) => "ct",
            Model::Bengal(_) => "cbt",
        }
    }

    pub fn apply(&self, img: &LinearImage) -> Result<Illuminant> {
        match self {
            Model::Tiger(m) => apply_color_tiger(img, m),
            Model::Bengal(m) => apply_color_bengal_tiger(img, m),
        }
    }
}
