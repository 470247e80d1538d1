use crate::error::{Error, Result};
use crate::image::LinearImage;

use super::RawImage;

/// Raw-to-linear conversion settings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    pub name: String,
    /// Subtracted from every sample, clamping at zero.
    pub black_level: u16,
    /// Pixels with any raw channel `>= m - margin` are invalid, `m` being the
    /// image's largest raw sample. `None` disables the test.
    pub saturation_margin: Option<u16>,
    /// Pixels with `row >= mask.0 && col >= mask.1` (0-based) are invalid.
    pub mask: Option<(usize, usize)>,
}

impl Profile {
    /// Canon EOS 550D data of the Cube and Cube+ datasets: black level 2048,
    /// saturation margin 2, SpyderCube in the lower right corner.
    pub fn cube() -> Self {
        Profile {
            name: "cube".into(),
            black_level: 2048,
            saturation_margin: Some(2),
            mask: Some((1050, 2050)),
        }
    }

    /// Already-linear data with nothing to subtract or mask.
    pub fn plain() -> Self {
        Profile { name: "plain".into(), black_level: 0, saturation_margin: None, mask: None }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "cube" => Ok(Self::cube()),
            "plain" => Ok(Self::plain()),
            other => Err(Error::InvalidConfig(format!("unknown preprocessing profile {other:?}"))),
        }
    }
}

pub fn preprocess(raw: &RawImage, profile: &Profile) -> Result<LinearImage> {
    if raw.width == 0 || raw.height == 0 || raw.data.is_empty() {
        return Err(Error::EmptyImage);
    }
    let m = raw.data.iter().flat_map(|px| px.iter().copied()).max().unwrap_or(0);
    let limit = profile.saturation_margin.map(|margin| m.saturating_sub(margin));
    let black = profile.black_level;
    let mut pixels = Vec::with_capacity(raw.data.len());
    let mut valid = Vec::with_capacity(raw.data.len());
    for (i, px) in raw.data.iter().enumerate() {
        let (row, col) = (i / raw.width, i % raw.width);
        let saturated = limit.is_some_and(|l| px.iter().any(|&s| s >= l));
        let masked = profile.mask.is_some_and(|(r0, c0)| row >= r0 && col >= c0);
        valid.push(!saturated && !masked);
        pixels.push(px.map(|s| s.saturating_sub(black) as f64));
    }
    if !valid.iter().any(|v| *v) {
        return Err(Error::AllPixelsInvalid);
    }
    LinearImage::with_mask(raw.width, raw.height, pixels, valid)
}
