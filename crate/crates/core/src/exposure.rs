//! Synthetic illumination levels from pixel-aligned short/long exposure
//! pairs, and the scale/flip/crop augmentation applied to them.
//!
//! 8-bit sRGB samples are linearised with a 2.2 power, blended linearly in
//! that domain (extrapolating for `alpha > 1`), clamped and re-encoded.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{quantize, resize, RasterImage, RealImage};
use crate::rng::Rng;

pub const LINEARISE_GAMMA: f64 = 2.2;
/// Three interpolated and two extrapolated levels.
pub const DEFAULT_ALPHAS: [f64; 5] = [0.25, 0.5, 0.75, 1.5, 2.0];

#[derive(Debug, Clone, PartialEq)]
pub struct ExposurePair {
    pub scene_id: String,
    pub short: RasterImage,
    pub long: RasterImage,
}

impl ExposurePair {
    pub fn new(scene_id: impl Into<String>, short: RasterImage, long: RasterImage) -> Result<Self> {
        if short.dimensions() != long.dimensions() || short.channels() != long.channels() {
            return Err(Error::invalid(format!(
                "exposure pair is not aligned: {:?}x{} vs {:?}x{}",
                short.dimensions(),
                short.channels(),
                long.dimensions(),
                long.channels()
            )));
        }
        Ok(Self {
            scene_id: scene_id.into(),
            short,
            long,
        })
    }
}

fn linear_table() -> &'static [f64; 256] {
    static TABLE: OnceLock<[f64; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; 256];
        for (v, out) in t.iter_mut().enumerate() {
            *out = (v as f64 / 255.0).powf(LINEARISE_GAMMA);
        }
        t
    })
}

/// Blended sample on `[0, 1]`, before quantisation.
#[inline]
pub fn blend_sample_real(short: u8, long: u8, alpha: f64) -> f64 {
    let t = linear_table();
    let (s, l) = (t[short as usize], t[long as usize]);
    let lin = (s + alpha * (l - s)).clamp(0.0, 1.0);
    lin.powf(1.0 / LINEARISE_GAMMA)
}

#[inline]
pub fn blend_sample(short: u8, long: u8, alpha: f64) -> u8 {
    quantize(blend_sample_real(short, long, alpha))
}

fn check_pair(pair: &ExposurePair, alpha: f64) -> Result<()> {
    if !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must be finite, got {alpha}")));
    }
    if pair.short.dimensions() != pair.long.dimensions()
        || pair.short.channels() != pair.long.channels()
    {
        return Err(Error::invalid("exposure pair dimensions differ"));
    }
    Ok(())
}

/// Unquantised variant of [`interpolate_exposure`].
pub fn interpolate_exposure_real(pair: &ExposurePair, alpha: f64) -> Result<RealImage> {
    check_pair(pair, alpha)?;
    let data = pair
        .short
        .data()
        .iter()
        .zip(pair.long.data())
        .map(|(&s, &l)| blend_sample_real(s, l, alpha) as f32)
        .collect();
    let (w, h) = pair.short.dimensions();
    RealImage::from_vec(w, h, pair.short.channels(), data)
}

/// `alpha = 0` gives the short exposure, `alpha = 1` the long one.
pub fn interpolate_exposure(pair: &ExposurePair, alpha: f64) -> Result<RasterImage> {
    check_pair(pair, alpha)?;
    let data = pair
        .short
        .data()
        .iter()
        .zip(pair.long.data())
        .map(|(&s, &l)| blend_sample(s, l, alpha))
        .collect();
    let (w, h) = pair.short.dimensions();
    RasterImage::from_vec(w, h, pair.short.channels(), data)
}

pub fn synth_levels(pair: &ExposurePair, alphas: &[f64]) -> Result<Vec<RasterImage>> {
    if alphas.is_empty() {
        return Err(Error::invalid("no illumination levels requested"));
    }
    alphas.iter().map(|&a| interpolate_exposure(pair, a)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AugmentMode {
    /// Random scale, random horizontal flip, random crop.
    #[default]
    Train,
    /// A single centre crop and nothing else.
    Validation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    pub scale_range: (f64, f64),
    /// Crop width and height.
    pub crop: (usize, usize),
    pub hflip_prob: f64,
    pub rng_seed: u64,
    pub mode: AugmentMode,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            scale_range: (0.4, 0.8),
            crop: (768, 512),
            hflip_prob: 0.5,
            rng_seed: 0,
            mode: AugmentMode::Train,
        }
    }
}

/// Top-left corner of the centred `crop` window.
pub fn centre_crop_offset(dims: (usize, usize), crop: (usize, usize)) -> Result<(usize, usize)> {
    if crop.0 > dims.0 || crop.1 > dims.1 {
        return Err(Error::invalid(format!(
            "crop {}x{} does not fit in {}x{}",
            crop.0, crop.1, dims.0, dims.1
        )));
    }
    Ok(((dims.0 - crop.0) / 2, (dims.1 - crop.1) / 2))
}

pub fn augment(img: &RasterImage, cfg: &AugmentConfig) -> Result<RasterImage> {
    let (cw, ch) = cfg.crop;
    if cw == 0 || ch == 0 {
        return Err(Error::invalid("crop size must be positive"));
    }
    if cfg.mode == AugmentMode::Validation {
        let (x, y) = centre_crop_offset(img.dimensions(), cfg.crop)?;
        return img.crop(x, y, cw, ch);
    }
    let (lo, hi) = cfg.scale_range;
    if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
        return Err(Error::invalid(format!("scale range ({lo}, {hi}) must lie in (0, 1]")));
    }
    let mut rng = Rng::new(cfg.rng_seed);
    let scale = rng.uniform(lo, hi);
    let (w, h) = img.dimensions();
    let (sw, sh) = (
        (w as f64 * scale).round() as usize,
        (h as f64 * scale).round() as usize,
    );
    if sw < cw || sh < ch {
        return Err(Error::invalid(format!(
            "scaled image {sw}x{sh} smaller than crop {cw}x{ch}"
        )));
    }
    let mut scaled = resize(img, sw, sh)?;
    if rng.unit() < cfg.hflip_prob {
        scaled = scaled.flip_horizontal();
    }
    let x = rng.below(sw - cw + 1);
    let y = rng.below(sh - ch + 1);
    scaled.crop(x, y, cw, ch)
}
