use crate::color::Rgb;
use crate::error::{Error, Result};

/// Row-major grid of linear RGB pixels with a validity mask.
///
/// Invalid pixels (saturated, or covered by a calibration object) are kept in
/// the grid but ignored by every estimator.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
    valid: Vec<bool>,
}

impl LinearImage {
    /// Builds an image whose pixels are all valid.
    pub fn from_pixels(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        let n = pixels.len();
        Self::with_mask(width, height, pixels, vec![true; n])
    }

    pub fn with_mask(width: usize, height: usize, pixels: Vec<Rgb>, valid: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if pixels.len() != width * height || valid.len() != pixels.len() {
            return Err(Error::ImageFormat(format!(
                "{}x{} image with {} pixels and {} mask entries",
                width,
                height,
                pixels.len(),
                valid.len()
            )));
        }
        if let Some(&c) = pixels.iter().flatten().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::NegativeChannel(c));
        }
        Ok(LinearImage { width, height, pixels, valid })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub(crate) fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn set_valid(&mut self, index: usize, valid: bool) {
        self.valid[index] = valid;
    }

    pub fn pixel(&self, row: usize, col: usize) -> Rgb {
        self.pixels[row * self.width + col]
    }

    pub fn valid_pixels(&self) -> impl Iterator<Item = &Rgb> + '_ {
        self.pixels.iter().zip(&self.valid).filter(|(_, v)| **v).map(|(p, _)| p)
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Copy with every channel multiplied by `s`.
    pub fn scaled(&self, s: f64) -> LinearImage {
        let mut out = self.clone();
        for px in &mut out.pixels {
            for c in px.iter_mut() {
                *c *= s;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(matches!(LinearImage::from_pixels(0, 3, vec![]), Err(Error::EmptyImage)));
        assert!(LinearImage::from_pixels(2, 2, vec![[1.0; 3]; 3]).is_err());
        assert!(LinearImage::from_pixels(1, 1, vec![[1.0, -0.5, 0.0]]).is_err());
        assert!(LinearImage::with_mask(1, 2, vec![[1.0; 3]; 2], vec![true]).is_err());
    }

    #[test]
    fn valid_pixels_respects_mask() {
        let mut img = LinearImage::from_pixels(3, 1, vec![[1.0; 3], [2.0; 3], [3.0; 3]]).unwrap();
        img.set_valid(1, false);
        let kept: Vec<_> = img.valid_pixels().copied().collect();
        assert_eq!(kept, vec![[1.0; 3], [3.0; 3]]);
        assert_eq!(img.valid_count(), 2);
        assert_eq!(img.pixel(0, 2), [3.0; 3]);
    }
}
