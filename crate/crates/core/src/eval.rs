//! Cross-validated evaluation of Color Tiger and of the single-image
//! estimators against ground truth.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use crate::color::Illuminant;
use crate::data::kfold;
use crate::error::{Error, Result};
use crate::estimators::Estimator;
use crate::image::LinearImage;
use crate::metrics::{angular_errors, summarize, ErrorSummary};
use crate::tiger::{apply_color_tiger, train_color_tiger, TigerModel, TrainConfig};

pub const DEFAULT_FOLDS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    /// Seed of the fold shuffle.
    pub fold_seed: u64,
    pub train: TrainConfig,
    /// Train on `L` images drawn at random from every training split.
    pub train_limit: Option<usize>,
    /// Seed of the draw behind `train_limit`.
    pub subset_seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { folds: DEFAULT_FOLDS, fold_seed: 0, train: TrainConfig::default(), train_limit: None, subset_seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct FoldResult {
    pub train_size: usize,
    pub test_indices: Vec<usize>,
    pub model: TigerModel,
    pub summary: ErrorSummary,
}

#[derive(Clone, Debug)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    /// Estimate for every image, in input order.
    pub estimates: Vec<Illuminant>,
    /// Angular error for every image, in input order.
    pub errors: Vec<f64>,
    pub pooled: ErrorSummary,
}

/// k-fold cross-validated Color Tiger: trains on all folds but one, tests
/// on the held-out fold. Ground truths are only used for scoring.
pub fn cross_validate_tiger(images: &[LinearImage], gts: &[Illuminant], cfg: &CvConfig) -> Result<CvReport> {
    if images.len() != gts.len() {
        return Err(Error::LengthMismatch { left: images.len(), right: gts.len() });
    }
    if cfg.train_limit == Some(0) {
        return Err(Error::InvalidConfig("train limit must be positive".into()));
    }
    let folds = kfold(images.len(), cfg.folds, cfg.fold_seed)?;
    let mut estimates = vec![None; images.len()];
    let mut results = Vec::with_capacity(folds.len());
    for (f, test) in folds.iter().enumerate() {
        let mut train: Vec<usize> =
            folds.iter().enumerate().filter(|(g, _)| *g != f).flat_map(|(_, idx)| idx.iter().copied()).collect();
        if let Some(limit) = cfg.train_limit {
            // Each fold draws its own subset; a shared prefix would tie the folds together.
            let mut rng =
                Xoshiro256PlusPlus::seed_from_u64(cfg.subset_seed ^ (f as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03));
            train.shuffle(&mut rng);
            train.truncate(limit);
            train.sort_unstable();
        }
        let train_images: Vec<LinearImage> = train.iter().map(|&i| images[i].clone()).collect();
        let model = train_color_tiger(&train_images, &cfg.train)?;
        let fold_est: Vec<Illuminant> =
            test.par_iter().map(|&i| apply_color_tiger(&images[i], &model)).collect::<Result<_>>()?;
        let fold_gt: Vec<Illuminant> = test.iter().map(|&i| gts[i]).collect();
        let summary = summarize(&angular_errors(&fold_gt, &fold_est)?)?;
        for (&i, e) in test.iter().zip(fold_est) {
            estimates[i] = Some(e);
        }
        results.push(FoldResult { train_size: train.len(), test_indices: test.clone(), model, summary });
    }
    let estimates: Vec<Illuminant> = estimates.into_iter().map(|e| e.expect("folds cover every image")).collect();
    let errors = angular_errors(gts, &estimates)?;
    let pooled = summarize(&errors)?;
    Ok(CvReport { folds: results, estimates, errors, pooled })
}

/// One point of a train-size curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainSizePoint {
    /// `None` for the unrestricted training folds.
    pub limit: Option<usize>,
    /// Pooled median averaged over the subset draws.
    pub median: f64,
    pub draws: usize,
}

/// Cross-validated median error as a function of the training-set limit.
/// The folds stay fixed; each limit is evaluated on `draws` independent
/// training subsets (subset seeds `0..draws`) and the pooled medians are
/// averaged. The first point is the unrestricted run.
pub fn train_size_curve(
    images: &[LinearImage],
    gts: &[Illuminant],
    cfg: &CvConfig,
    limits: &[usize],
    draws: usize,
) -> Result<Vec<TrainSizePoint>> {
    if draws == 0 {
        return Err(Error::InvalidConfig("draws must be positive".into()));
    }
    let full = cross_validate_tiger(images, gts, &CvConfig { train_limit: None, ..*cfg })?.pooled.median;
    let mut curve = vec![TrainSizePoint { limit: None, median: full, draws: 1 }];
    for &limit in limits {
        let mut sum = 0.0;
        for d in 0..draws {
            let run = CvConfig { train_limit: Some(limit), subset_seed: d as u64, ..*cfg };
            sum += cross_validate_tiger(images, gts, &run)?.pooled.median;
        }
        curve.push(TrainSizePoint { limit: Some(limit), median: sum / draws as f64, draws });
    }
    Ok(curve)
}

/// Runs a single-image estimator over a corpus.
pub fn estimate_all(images: &[LinearImage], estimator: Estimator) -> Result<Vec<Illuminant>> {
    images.par_iter().map(|img| estimator.estimate(img)).collect()
}

/// Angular errors of a single-image estimator.
pub fn evaluate_estimator(images: &[LinearImage], gts: &[Illuminant], estimator: Estimator) -> Result<Vec<f64>> {
    angular_errors(gts, &estimate_all(images, estimator)?)
}
