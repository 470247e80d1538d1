//! RGB direction math shared by the estimators, the clustering code and the
//! evaluation tools.
//!
//! Only the direction of an illuminant carries information, so [`Illuminant`]
//! is always stored with unit L2 norm.

use std::fmt;

use crate::error::{Error, Result};
use crate::image::LinearImage;

/// A linear RGB triplet.
pub type Rgb = [f64; 3];

/// Unit-length RGB direction of a light source (an estimate, a ground truth
/// or a cluster center).
#[derive(Clone, Copy, PartialEq)]
pub struct Illuminant([f64; 3]);

impl Illuminant {
    /// Normalizes `r, g, b` into an illuminant.
    pub fn new(r: f64, g: f64, b: f64) -> Result<Self> {
        normalize([r, g, b])
    }

    /// Wraps a vector that is already unit length (within 1e-9), keeping its
    /// exact bits. Used when reading stored models.
    pub fn from_unit(v: Rgb) -> Result<Self> {
        if v.iter().any(|c| c.is_nan() || *c < 0.0) {
            return Err(Error::NegativeChannel(v.iter().copied().fold(0.0, f64::min)));
        }
        if (dot(&v, &v).sqrt() - 1.0).abs() > 1e-9 {
            return Err(Error::ZeroVector);
        }
        Ok(Illuminant(v))
    }

    pub fn r(&self) -> f64 {
        self.0[0]
    }

    pub fn g(&self) -> f64 {
        self.0[1]
    }

    pub fn b(&self) -> f64 {
        self.0[2]
    }

    pub fn to_array(self) -> Rgb {
        self.0
    }

    pub fn dot(&self, other: &Illuminant) -> f64 {
        dot(&self.0, &other.0)
    }

    /// Angle to `other` in degrees.
    pub fn angle_to(&self, other: &Illuminant) -> f64 {
        angular_distance(self, other)
    }

    pub fn chromaticity(&self) -> Chromaticity {
        // Unit vectors with non-negative channels never sum to zero.
        let s = self.0[0] + self.0[1] + self.0[2];
        Chromaticity { r: self.0[0] / s, b: self.0[2] / s }
    }

    /// Component-wise product with `gains`, renormalized.
    pub fn scaled_by(&self, gains: &Rgb) -> Result<Illuminant> {
        normalize([self.0[0] * gains[0], self.0[1] * gains[1], self.0[2] * gains[2]])
    }

    /// Component-wise quotient by `gains`, renormalized.
    pub fn divided_by(&self, gains: &Rgb) -> Result<Illuminant> {
        if gains.iter().any(|&g| g.is_nan() || g <= 0.0) {
            return Err(Error::ZeroChannel);
        }
        normalize([self.0[0] / gains[0], self.0[1] / gains[1], self.0[2] / gains[2]])
    }
}

impl fmt::Debug for Illuminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Illuminant({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

impl fmt::Display for Illuminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.4}, {:.4}, {:.4})", self.0[0], self.0[1], self.0[2])
    }
}

/// Position in the rb-chromaticity plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chromaticity {
    pub r: f64,
    pub b: f64,
}

pub(crate) fn dot(a: &Rgb, b: &Rgb) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &Rgb, b: &Rgb) -> Rgb {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Scales `v` to unit L2 norm.
pub fn normalize(v: Rgb) -> Result<Illuminant> {
    if let Some(&c) = v.iter().find(|c| **c < 0.0 || c.is_nan()) {
        return Err(Error::NegativeChannel(c));
    }
    let norm = dot(&v, &v).sqrt();
    if !norm.is_finite() || norm <= 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(Illuminant([v[0] / norm, v[1] / norm, v[2] / norm]))
}

/// Angle between two illuminants in degrees, in `[0, 180]`.
///
/// Evaluated as `atan2(|a x b|, a . b)`, which stays accurate for nearly
/// parallel vectors where `acos` of the dot product loses half its digits.
pub fn angular_distance(a: &Illuminant, b: &Illuminant) -> f64 {
    let c = cross(&a.0, &b.0);
    let sin = dot(&c, &c).sqrt();
    let cos = dot(&a.0, &b.0).clamp(-1.0, 1.0);
    sin.atan2(cos).to_degrees()
}

/// Angle in degrees between two raw (unnormalized) RGB vectors.
pub fn angle_between(a: Rgb, b: Rgb) -> Result<f64> {
    Ok(angular_distance(&normalize(a)?, &normalize(b)?))
}

/// `(R, B) / (R + G + B)` of a raw RGB vector.
pub fn rb_chromaticity(v: Rgb) -> Result<Chromaticity> {
    let s = v[0] + v[1] + v[2];
    if s.is_nan() || s <= 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(Chromaticity { r: v[0] / s, b: v[2] / s })
}

/// Unit vector `degrees` away from `base`, displaced along the tangent
/// direction selected by `phase` (radians).
pub fn offset_direction(base: &Illuminant, degrees: f64, phase: f64) -> Illuminant {
    let b = base.0;
    let helper = if b[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = dot(&b, &helper);
    let u = [helper[0] - d * b[0], helper[1] - d * b[1], helper[2] - d * b[2]];
    let un = dot(&u, &u).sqrt();
    let u = [u[0] / un, u[1] / un, u[2] / un];
    let w = cross(&b, &u);
    let (s, c) = degrees.to_radians().sin_cos();
    let (sp, cp) = phase.sin_cos();
    let mut v = [0.0; 3];
    for i in 0..3 {
        v[i] = c * b[i] + s * (cp * u[i] + sp * w[i]);
    }
    // Large offsets can leave the positive octant; clip to stay a valid light.
    let v = v.map(|x| x.max(0.0));
    normalize(v).expect("offset direction collapsed to zero")
}

/// Von Kries correction: divides every valid pixel by `e`, with the divisor
/// scaled so that its green component is 1. Invalid pixels are copied as-is.
pub fn apply_white_balance(img: &LinearImage, e: &Illuminant) -> Result<LinearImage> {
    let e = e.to_array();
    if e.iter().any(|&c| c.is_nan() || c <= 0.0) {
        return Err(Error::ZeroChannel);
    }
    let divisor = [e[0] / e[1], 1.0, e[2] / e[1]];
    let mut out = img.clone();
    for (px, &valid) in out.pixels_mut().iter_mut().zip(img.valid()) {
        if valid {
            for c in 0..3 {
                px[c] /= divisor[c];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Rgb, b: Rgb, tol: f64) -> bool {
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn normalize_examples() {
        let v = normalize([2.0, 4.0, 6.0]).unwrap().to_array();
        assert!(close(v, [0.2673, 0.5345, 0.8018], 1e-4));
        let v = normalize([1.0, 1.0, 1.0]).unwrap().to_array();
        assert!(close(v, [0.5774; 3], 1e-4));
        assert!(matches!(normalize([0.0; 3]), Err(Error::ZeroVector)));
        assert!(matches!(normalize([1.0, -1.0, 0.0]), Err(Error::NegativeChannel(_))));
    }

    #[test]
    fn angle_examples() {
        assert!(angle_between([1.0, 2.0, 3.0], [2.0, 4.0, 6.0]).unwrap() < 1e-12);
        assert!((angle_between([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap() - 90.0).abs() < 1e-12);
        assert!((angle_between([1.0, 1.0, 0.0], [1.0, 0.0, 0.0]).unwrap() - 45.0).abs() < 1e-12);
        assert!(matches!(angle_between([0.0; 3], [1.0, 0.0, 0.0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn chromaticity_examples() {
        let c = rb_chromaticity([1.0, 1.0, 1.0]).unwrap();
        assert!((c.r - 1.0 / 3.0).abs() < 1e-15 && (c.b - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(rb_chromaticity([2.0, 1.0, 1.0]).unwrap(), Chromaticity { r: 0.5, b: 0.25 });
        assert_eq!(rb_chromaticity([0.0, 1.0, 0.0]).unwrap(), Chromaticity { r: 0.0, b: 0.0 });
        assert!(rb_chromaticity([0.0; 3]).is_err());
    }

    fn small_image() -> LinearImage {
        LinearImage::from_pixels(
            2,
            2,
            vec![[0.2, 0.5, 0.9], [1.0, 2.0, 3.0], [0.7, 0.1, 0.3], [4.0, 4.0, 4.0]],
        )
        .unwrap()
    }

    #[test]
    fn white_balance_neutralizes_illuminant_colored_pixels() {
        let e = Illuminant::new(0.9, 0.6, 0.3).unwrap();
        let img = LinearImage::from_pixels(1, 3, vec![e.to_array(); 3]).unwrap();
        let out = apply_white_balance(&img, &e).unwrap();
        for px in out.pixels() {
            assert!((px[0] - px[1]).abs() < 1e-12 && (px[2] - px[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn white_balance_identity_and_inverse() {
        let img = small_image();
        let gray = Illuminant::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(apply_white_balance(&img, &gray).unwrap().pixels(), img.pixels());

        let e = Illuminant::new(0.8, 0.5, 0.2).unwrap();
        let inv = Illuminant::new(1.0 / e.r(), 1.0 / e.g(), 1.0 / e.b()).unwrap();
        let back = apply_white_balance(&apply_white_balance(&img, &e).unwrap(), &inv).unwrap();
        for (a, b) in back.pixels().iter().zip(img.pixels()) {
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() <= 1e-9 * b[c].abs().max(1e-300));
            }
        }
    }

    #[test]
    fn white_balance_skips_invalid_pixels() {
        let mut img = small_image();
        img.set_valid(1, false);
        let e = Illuminant::new(0.8, 0.5, 0.2).unwrap();
        let out = apply_white_balance(&img, &e).unwrap();
        assert_eq!(out.pixels()[1], img.pixels()[1]);
        assert!(!out.valid()[1]);
        let zero = Illuminant::new(1.0, 1.0, 0.0).unwrap();
        assert!(matches!(apply_white_balance(&img, &zero), Err(Error::ZeroChannel)));
    }

    fn rgb() -> impl Strategy<Value = Rgb> {
        [0.001f64..10.0, 0.001f64..10.0, 0.001f64..10.0]
    }

    proptest! {
        #[test]
        fn angle_symmetric_and_scale_invariant(a in rgb(), b in rgb(), s in 0.01f64..100.0) {
            let ab = angle_between(a, b).unwrap();
            prop_assert!((ab - angle_between(b, a).unwrap()).abs() < 1e-12);
            let scaled = [a[0] * s, a[1] * s, a[2] * s];
            prop_assert!((ab - angle_between(scaled, b).unwrap()).abs() < 1e-9);
            prop_assert!((0.0..=180.0).contains(&ab));
        }

        #[test]
        fn chromaticity_scale_invariant(v in rgb(), s in 0.01f64..100.0) {
            let c = rb_chromaticity(v).unwrap();
            let d = rb_chromaticity([v[0] * s, v[1] * s, v[2] * s]).unwrap();
            prop_assert!((c.r - d.r).abs() < 1e-12 && (c.b - d.b).abs() < 1e-12);
            prop_assert!(c.r >= 0.0 && c.b >= 0.0 && c.r + c.b <= 1.0 + 1e-15);
        }

        #[test]
        fn normalize_idempotent(v in rgb()) {
            let once = normalize(v).unwrap();
            let twice = normalize(once.to_array()).unwrap();
            let n = dot(&once.to_array(), &once.to_array()).sqrt();
            prop_assert!((n - 1.0).abs() < 1e-9);
            prop_assert!(close(once.to_array(), twice.to_array(), 1e-15));
        }
    }
}
