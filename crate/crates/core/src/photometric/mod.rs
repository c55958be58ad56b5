//! Lightness-channel normalisations: global equalisation, CLAHE, gamma to a
//! target mean, histogram matching, and the trimmed-mean lightness used to
//! rank illumination differences.
//!
//! Every image-level method converts RGB to LAB, transforms `L` only and
//! converts back; `a` and `b` are carried through untouched.

mod clahe;
mod equalize;
mod gamma;
mod histogram;

pub use clahe::{clahe, clip_histogram, ClaheConfig};
pub use equalize::{equalization_lut, equalize, match_histogram, matching_lut};
pub use gamma::{gamma_to_mean, GammaFit, GAMMA_MAX, GAMMA_MIN, MEAN_TOLERANCE};
pub use histogram::{bin_lightness, histogram_of, lightness_bin, Histogram256, MonotoneLut, BINS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{lab_to_rgb, rgb_to_lab, Plane, RasterImage};

/// Fraction dropped from each end by [`trimmed_mean_lightness`] by default.
pub const DEFAULT_TRIM: f64 = 0.4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum NormalisationMethod {
    #[serde(rename = "histeq")]
    HistEq,
    Clahe(ClaheConfig),
    /// Target mean of `L / 100`.
    Gamma { target_mean: f64 },
    #[serde(rename = "histmatch")]
    HistMatch { target: Histogram256 },
    None,
}

impl NormalisationMethod {
    pub fn name(&self) -> &'static str {
        match self {
            NormalisationMethod::HistEq => "histeq",
            NormalisationMethod::Clahe(_) => "clahe",
            NormalisationMethod::Gamma { .. } => "gamma",
            NormalisationMethod::HistMatch { .. } => "histmatch",
            NormalisationMethod::None => "none",
        }
    }

    /// Applies the method to a lightness plane in `[0, 100]`.
    pub fn apply_lightness(&self, l: &Plane) -> Result<Plane> {
        match self {
            NormalisationMethod::HistEq => Ok(equalize(l)?.0),
            NormalisationMethod::Clahe(cfg) => clahe(l, cfg),
            NormalisationMethod::Gamma { target_mean } => {
                let unit = l.map(|v| (v / 100.0).clamp(0.0, 1.0));
                let (out, _) = gamma_to_mean(&unit, *target_mean)?;
                Ok(out.map(|v| v * 100.0))
            }
            NormalisationMethod::HistMatch { target } => match_histogram(l, target),
            NormalisationMethod::None => Ok(l.clone()),
        }
    }
}

/// RGB -> LAB, method on `L`, LAB -> RGB. `None` returns the input as is.
pub fn normalize_image(img: &RasterImage, method: &NormalisationMethod) -> Result<RasterImage> {
    if img.channels() != 3 {
        return Err(Error::invalid(format!(
            "normalisation needs a 3-channel image, got {}",
            img.channels()
        )));
    }
    if matches!(method, NormalisationMethod::None) {
        return Ok(img.clone());
    }
    let lab = rgb_to_lab(img)?;
    let l = method.apply_lightness(&lab.l)?;
    Ok(lab_to_rgb(&lab.with_lightness(l)?))
}

/// Mean of the values ranked in `[floor(trim N), N - floor(trim N))` after
/// sorting.
pub fn trimmed_mean_lightness(l: &Plane, trim: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&trim) {
        return Err(Error::invalid(format!("trim must lie in [0, 0.5), got {trim}")));
    }
    if l.is_empty() {
        return Err(Error::invalid("trimmed mean of an empty plane"));
    }
    let n = l.len();
    let mut sorted = l.data().to_vec();
    sorted.sort_by(f64::total_cmp);
    // The epsilon keeps products like 0.4 * 10 from flooring to 3.
    let lo = ((trim * n as f64) + 1e-9).floor() as usize;
    let hi = n - lo;
    let kept = &sorted[lo..hi];
    Ok(kept.iter().sum::<f64>() / kept.len() as f64)
}

/// Trimmed-mean LAB lightness of an RGB image with the default 40% trim.
pub fn image_lightness(img: &RasterImage) -> Result<f64> {
    trimmed_mean_lightness(&rgb_to_lab(img)?.l, DEFAULT_TRIM)
}

/// Mean of `L / 100` across images, the usual gamma target.
pub fn dataset_mean_lightness<'a>(images: impl IntoIterator<Item = &'a RasterImage>) -> Result<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for img in images {
        let lab = rgb_to_lab(img)?;
        sum += lab.l.data().iter().sum::<f64>() / 100.0;
        n += lab.l.len();
    }
    if n == 0 {
        return Err(Error::invalid("no pixels to average"));
    }
    Ok(sum / n as f64)
}
