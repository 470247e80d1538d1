//! Statistics-based single-image illuminant estimators.

use crate::color::{normalize, Illuminant, Rgb};
use crate::error::{Error, Result};
use crate::image::LinearImage;

/// Default upper Minkowski power for the training sweep.
pub const DEFAULT_SWEEP_POWER: u32 = 8;

/// Powers `1..=n` evaluated by [`sog_sweep`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SogSweepConfig {
    pub n: u32,
}

impl SogSweepConfig {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("sweep power n must be at least 1".into()));
        }
        Ok(SogSweepConfig { n })
    }
}

impl Default for SogSweepConfig {
    fn default() -> Self {
        SogSweepConfig { n: DEFAULT_SWEEP_POWER }
    }
}

fn require_valid(img: &LinearImage) -> Result<()> {
    if img.valid_count() == 0 {
        Err(Error::NoValidPixels)
    } else {
        Ok(())
    }
}

fn channel_max(img: &LinearImage) -> Rgb {
    img.valid_pixels().fold([0.0; 3], |acc, px| {
        [acc[0].max(px[0]), acc[1].max(px[1]), acc[2].max(px[2])]
    })
}

/// Per-channel mean of the valid pixels.
pub fn gray_world(img: &LinearImage) -> Result<Illuminant> {
    require_valid(img)?;
    let sum = img.valid_pixels().fold([0.0; 3], |acc, px| {
        [acc[0] + px[0], acc[1] + px[1], acc[2] + px[2]]
    });
    let n = img.valid_count() as f64;
    normalize([sum[0] / n, sum[1] / n, sum[2] / n])
}

/// Per-channel maximum of the valid pixels.
pub fn white_patch(img: &LinearImage) -> Result<Illuminant> {
    require_valid(img)?;
    normalize(channel_max(img))
}

/// Minkowski p-norm mean of the valid pixels, per channel.
///
/// Each channel is divided by its valid maximum before the power is taken,
/// so large `p` on 16-bit data does not overflow.
pub fn shades_of_gray(img: &LinearImage, p: u32) -> Result<Illuminant> {
    if p == 0 {
        return Err(Error::InvalidConfig("Minkowski power must be at least 1".into()));
    }
    require_valid(img)?;
    let max = channel_max(img);
    let exp = p as i32;
    let mut acc = [0.0f64; 3];
    for px in img.valid_pixels() {
        for c in 0..3 {
            if max[c] > 0.0 {
                acc[c] += (px[c] / max[c]).powi(exp);
            }
        }
    }
    let n = img.valid_count() as f64;
    let mut e = [0.0; 3];
    for c in 0..3 {
        e[c] = max[c] * (acc[c] / n).powf(1.0 / p as f64);
    }
    normalize(e)
}

/// Shades-of-Gray estimates for every power `1..=cfg.n`, in order.
pub fn sog_sweep(img: &LinearImage, cfg: SogSweepConfig) -> Result<Vec<Illuminant>> {
    (1..=cfg.n).map(|p| shades_of_gray(img, p)).collect()
}

/// Estimator selectable at run time (CLI, evaluation harness).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimator {
    GrayWorld,
    WhitePatch,
    ShadesOfGray(u32),
}

impl Estimator {
    pub fn estimate(&self, img: &LinearImage) -> Result<Illuminant> {
        match *self {
            Estimator::GrayWorld => gray_world(img),
            Estimator::WhitePatch => white_patch(img),
            Estimator::ShadesOfGray(p) => shades_of_gray(img, p),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Estimator::GrayWorld => "gray-world".into(),
            Estimator::WhitePatch => "white-patch".into(),
            Estimator::ShadesOfGray(p) => format!("shades-of-gray(p={p})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::angular_distance;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn random_image(seed: u64, w: usize, h: usize) -> LinearImage {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let scale = [rng.random_range(0.2..1.0), rng.random_range(0.2..1.0), rng.random_range(0.2..1.0)];
        let pixels = (0..w * h)
            .map(|_| {
                [
                    scale[0] * rng.random::<f64>() * 60000.0,
                    scale[1] * rng.random::<f64>() * 60000.0,
                    scale[2] * rng.random::<f64>() * 60000.0,
                ]
            })
            .collect();
        LinearImage::from_pixels(w, h, pixels).unwrap()
    }

    fn dir(v: Rgb) -> Illuminant {
        normalize(v).unwrap()
    }

    #[test]
    fn gray_world_examples() {
        let img = LinearImage::from_pixels(2, 2, vec![[2.0, 4.0, 6.0]; 4]).unwrap();
        assert!(angular_distance(&gray_world(&img).unwrap(), &dir([2.0, 4.0, 6.0])) < 1e-9);
        let img = LinearImage::from_pixels(2, 1, vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        assert!(angular_distance(&gray_world(&img).unwrap(), &dir([1.0, 1.0, 0.0])) < 1e-9);
    }

    #[test]
    fn gray_world_matches_double_loop_mean() {
        let img = random_image(11, 64, 64);
        let mut sum = [0.0f64; 3];
        for row in 0..img.height() {
            for col in 0..img.width() {
                let px = img.pixel(row, col);
                for c in 0..3 {
                    sum[c] += px[c];
                }
            }
        }
        let n = (img.width() * img.height()) as f64;
        let norm = (sum.iter().map(|s| (s / n) * (s / n)).sum::<f64>()).sqrt();
        let gw = gray_world(&img).unwrap().to_array();
        for c in 0..3 {
            let want = sum[c] / n / norm;
            assert!((gw[c] - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn white_patch_examples() {
        let img =
            LinearImage::from_pixels(3, 1, vec![[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]]).unwrap();
        assert!(angular_distance(&white_patch(&img).unwrap(), &dir([1.0, 2.0, 3.0])) < 1e-9);
        let img = LinearImage::from_pixels(2, 2, vec![[5.0; 3]; 4]).unwrap();
        assert!(angular_distance(&white_patch(&img).unwrap(), &dir([1.0; 3])) < 1e-9);
    }

    #[test]
    fn white_patch_matches_max_oracle_exactly() {
        let img = random_image(5, 32, 40);
        let mut max = [f64::MIN; 3];
        for px in img.pixels() {
            for c in 0..3 {
                if px[c] > max[c] {
                    max[c] = px[c];
                }
            }
        }
        assert_eq!(white_patch(&img).unwrap(), normalize(max).unwrap());
    }

    #[test]
    fn error_paths() {
        let mut img = LinearImage::from_pixels(2, 1, vec![[1.0; 3], [2.0; 3]]).unwrap();
        img.set_valid(0, false);
        img.set_valid(1, false);
        assert!(matches!(gray_world(&img), Err(Error::NoValidPixels)));
        assert!(matches!(white_patch(&img), Err(Error::NoValidPixels)));
        assert!(matches!(shades_of_gray(&img, 3), Err(Error::NoValidPixels)));
        let black = LinearImage::from_pixels(2, 1, vec![[0.0; 3]; 2]).unwrap();
        assert!(matches!(gray_world(&black), Err(Error::ZeroVector)));
        assert!(matches!(shades_of_gray(&black, 2), Err(Error::ZeroVector)));
        assert!(SogSweepConfig::new(0).is_err());
    }

    #[test]
    fn sog_limits() {
        let img = random_image(3, 64, 64);
        let gw = gray_world(&img).unwrap();
        assert!(angular_distance(&shades_of_gray(&img, 1).unwrap(), &gw) < 1e-6);
        let wp = white_patch(&img).unwrap();
        let angle = angular_distance(&shades_of_gray(&img, 64).unwrap(), &wp);
        assert!(angle < 0.5, "p=64 is {angle} degrees from white-patch");
        let flat = LinearImage::from_pixels(3, 3, vec![[3.0, 2.0, 1.0]; 9]).unwrap();
        for p in [1, 2, 7, 20] {
            assert!(angular_distance(&shades_of_gray(&flat, p).unwrap(), &dir([3.0, 2.0, 1.0])) < 1e-9);
        }
    }

    #[test]
    fn sweep_matches_single_calls() {
        let img = random_image(8, 20, 20);
        let sweep = sog_sweep(&img, SogSweepConfig::default()).unwrap();
        assert_eq!(sweep.len(), 8);
        for (k, e) in sweep.iter().enumerate() {
            assert_eq!(*e, shades_of_gray(&img, k as u32 + 1).unwrap());
        }
        let one = sog_sweep(&img, SogSweepConfig::new(1).unwrap()).unwrap();
        assert_eq!(one.len(), 1);
        assert!(angular_distance(&one[0], &gray_world(&img).unwrap()) < 1e-6);
    }

    #[test]
    fn norm_family_approaches_white_patch() {
        let powers = [1u32, 2, 4, 8, 16, 32, 64];
        let mut passing = 0;
        let trials = 50;
        for seed in 0..trials {
            let img = random_image(100 + seed, 24, 24);
            let wp = white_patch(&img).unwrap();
            let angles: Vec<f64> =
                powers.iter().map(|&p| angular_distance(&shades_of_gray(&img, p).unwrap(), &wp)).collect();
            if angles.windows(2).all(|w| w[1] <= w[0] + 0.1) {
                passing += 1;
            }
        }
        assert!(passing * 10 >= trials * 9, "{passing}/{trials} images monotone");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn estimators_are_scale_equivariant(seed in 0u64..1000, s in 0.001f64..1000.0, p in 1u32..12) {
            let img = random_image(seed, 8, 8);
            let scaled = img.scaled(s);
            for est in [Estimator::GrayWorld, Estimator::WhitePatch, Estimator::ShadesOfGray(p)] {
                let a = est.estimate(&img).unwrap();
                let b = est.estimate(&scaled).unwrap();
                prop_assert!(angular_distance(&a, &b) < 1e-9);
            }
        }

        #[test]
        fn estimators_ignore_pixel_order(seed in 0u64..1000, p in 1u32..12) {
            let img = random_image(seed, 6, 5);
            let mut pixels = img.pixels().to_vec();
            pixels.reverse();
            pixels.rotate_left(7);
            let shuffled = LinearImage::from_pixels(5, 6, pixels).unwrap();
            for est in [Estimator::GrayWorld, Estimator::WhitePatch, Estimator::ShadesOfGray(p)] {
                let a = est.estimate(&img).unwrap();
                let b = est.estimate(&shuffled).unwrap();
                prop_assert!(angular_distance(&a, &b) < 1e-9);
            }
        }

        #[test]
        fn invalid_pixel_equals_deleted_pixel(seed in 0u64..1000, drop in 0usize..16, p in 1u32..12) {
            let img = random_image(seed, 4, 4);
            let mut masked = img.clone();
            masked.set_valid(drop, false);
            let mut kept = img.pixels().to_vec();
            kept.remove(drop);
            let deleted = LinearImage::from_pixels(15, 1, kept).unwrap();
            for est in [Estimator::GrayWorld, Estimator::WhitePatch, Estimator::ShadesOfGray(p)] {
                let a = est.estimate(&masked).unwrap();
                let b = est.estimate(&deleted).unwrap();
                prop_assert!(angular_distance(&a, &b) < 1e-9);
            }
        }
    }
}
