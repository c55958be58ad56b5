//! A small gradient-orientation descriptor standing in for a CNN embedding
//! in self-contained experiments. Luma is optionally smoothed, gradients
//! are binned by orientation in a grid of cells and weighted by magnitude,
//! each cell is L2-normalised, and the concatenation is L2-normalised.
//! Gradients weaker than `min_magnitude` (central differences on 8-bit
//! luma) are ignored, so low-contrast structure does not register.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::Descriptor;
use crate::error::{Error, Result};
use crate::raster::RasterImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToyDescriptorConfig {
    pub grid: usize,
    pub orientations: usize,
    pub min_magnitude: f64,
    /// L2-normalise each cell histogram before concatenation.
    pub cell_normalise: bool,
    /// Gaussian pre-smoothing in pixels; 0 disables it.
    pub smoothing: f64,
}

impl Default for ToyDescriptorConfig {
    fn default() -> Self {
        Self {
            grid: 4,
            orientations: 8,
            min_magnitude: DEFAULT_MIN_MAGNITUDE,
            cell_normalise: true,
            smoothing: 1.0,
        }
    }
}

impl ToyDescriptorConfig {
    pub fn dim(&self) -> usize {
        self.grid * self.grid * self.orientations
    }
}

pub const MIN_SIDE: usize = 8;
pub const DEFAULT_MIN_MAGNITUDE: f64 = 20.0;

fn grey(img: &RasterImage) -> Vec<f64> {
    match img.channels() {
        3 => img
            .data()
            .chunks_exact(3)
            .map(|p| 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]))
            .collect(),
        _ => img.data().iter().map(|&v| f64::from(v)).collect(),
    }
}

fn blur(g: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as isize;
    let k: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let ks: f64 = k.iter().sum();
    let clampi = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = (-r..=r)
                .zip(&k)
                .map(|(i, kv)| kv * g[y * w + clampi(x as isize + i, w)])
                .sum::<f64>()
                / ks;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = (-r..=r)
                .zip(&k)
                .map(|(i, kv)| kv * tmp[clampi(y as isize + i, h) * w + x])
                .sum::<f64>()
                / ks;
        }
    }
    out
}

/// A constant image has no gradients; it gets the uniform unit vector.
pub fn extract_toy_descriptor(
    id: &str,
    img: &RasterImage,
    cfg: &ToyDescriptorConfig,
) -> Result<Descriptor> {
    let (w, h) = img.dimensions();
    if w < MIN_SIDE || h < MIN_SIDE {
        return Err(Error::invalid(format!(
            "toy descriptor needs at least {MIN_SIDE}x{MIN_SIDE} pixels, got {w}x{h}"
        )));
    }
    if cfg.grid == 0 || cfg.orientations == 0 {
        return Err(Error::invalid("toy descriptor grid and orientations must be positive"));
    }
    let mut g = grey(img);
    if cfg.smoothing > 0.0 {
        g = blur(&g, w, h, cfg.smoothing);
    }
    let (cells, bins) = (cfg.grid, cfg.orientations);
    let mut hist = vec![0.0f64; cfg.dim()];
    for y in 1..h - 1 {
        let cy = y * cells / h;
        for x in 1..w - 1 {
            let gx = g[y * w + x + 1] - g[y * w + x - 1];
            let gy = g[(y + 1) * w + x] - g[(y - 1) * w + x];
            let mag = gx.hypot(gy);
            if mag == 0.0 || mag < cfg.min_magnitude {
                continue;
            }
            let angle = gy.atan2(gx) + PI;
            let bin = ((angle / TAU * bins as f64) as usize) % bins;
            let cx = x * cells / w;
            hist[(cy * cells + cx) * bins + bin] += mag;
        }
    }
    if cfg.cell_normalise {
        for cell in hist.chunks_exact_mut(bins) {
            let n = cell.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 0.0 {
                cell.iter_mut().for_each(|v| *v /= n);
            }
        }
    }
    let norm = hist.iter().map(|v| v * v).sum::<f64>().sqrt();
    let values = if norm == 0.0 {
        vec![(1.0 / (cfg.dim() as f64).sqrt()) as f32; cfg.dim()]
    } else {
        hist.iter().map(|v| (v / norm) as f32).collect()
    };
    Descriptor::new(id, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(w: usize, h: usize) -> RasterImage {
        let mut data = Vec::with_capacity(w * h * 3);
        for y in 0..h {
            for x in 0..w {
                let v = if (x / 5 + y / 9) % 2 == 0 { 40 } else { 200 };
                let v = (v + x * 2) as u8;
                data.extend_from_slice(&[v, v, v]);
            }
        }
        RasterImage::from_vec(w, h, 3, data).unwrap()
    }

    fn rotate_180(img: &RasterImage) -> RasterImage {
        let mut data: Vec<u8> = Vec::new();
        for px in img.data().chunks_exact(3).rev() {
            data.extend_from_slice(px);
        }
        RasterImage::from_vec(img.width(), img.height(), 3, data).unwrap()
    }

    #[test]
    fn dimension_and_norm() {
        let d = extract_toy_descriptor("p", &pattern(40, 30), &ToyDescriptorConfig::default()).unwrap();
        assert_eq!(d.dim(), 128);
        assert!((d.norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn constant_image_gives_uniform_vector() {
        let img = RasterImage::filled(16, 16, 3, 90).unwrap();
        let d = extract_toy_descriptor("c", &img, &ToyDescriptorConfig::default()).unwrap();
        let u = (1.0 / 128f64.sqrt()) as f32;
        assert!(d.values().iter().all(|&v| v == u));
    }

    #[test]
    fn rotation_changes_descriptor() {
        let img = pattern(40, 30);
        let cfg = ToyDescriptorConfig::default();
        let a = extract_toy_descriptor("a", &img, &cfg).unwrap();
        let b = extract_toy_descriptor("a", &rotate_180(&img), &cfg).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn deterministic() {
        let cfg = ToyDescriptorConfig::default();
        let img = pattern(33, 21);
        assert_eq!(
            extract_toy_descriptor("a", &img, &cfg).unwrap(),
            extract_toy_descriptor("a", &img, &cfg).unwrap()
        );
    }

    #[test]
    fn too_small_rejected() {
        let img = RasterImage::filled(7, 20, 3, 0).unwrap();
        assert!(extract_toy_descriptor("s", &img, &ToyDescriptorConfig::default()).is_err());
    }
}
