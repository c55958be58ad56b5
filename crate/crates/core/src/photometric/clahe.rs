//! Contrast limited adaptive histogram equalisation on a lightness plane.
//!
//! The plane is split into a grid of tiles. Each tile histogram is clipped
//! at `clip_limit` times the uniform bin level, the excess is spread back
//! uniformly, and the clipped histogram is equalised. Output pixels blend
//! the four nearest tile mappings bilinearly (tile centres act as knots;
//! pixels outside the outermost centres use the nearest tiles).

use serde::{Deserialize, Serialize};

use super::equalize::equalization_lut;
use super::histogram::{bin_lightness, lightness_bin, Histogram256, BINS};
use crate::error::{Error, Result};
use crate::raster::Plane;

const MAX_CLIP_PASSES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClaheConfig {
    pub grid_cols: usize,
    pub grid_rows: usize,
    pub clip_limit: f64,
    /// When set, the grid is derived per image as `ceil(side / px)` tiles
    /// per axis and `grid_cols`/`grid_rows` are ignored.
    pub target_window_px: Option<usize>,
}

impl Default for ClaheConfig {
    fn default() -> Self {
        Self {
            grid_cols: 8,
            grid_rows: 8,
            clip_limit: 4.0,
            target_window_px: None,
        }
    }
}

impl ClaheConfig {
    pub fn with_grid(cols: usize, rows: usize, clip_limit: f64) -> Self {
        Self {
            grid_cols: cols,
            grid_rows: rows,
            clip_limit,
            target_window_px: None,
        }
    }

    /// Tile counts actually used for a `width x height` plane.
    pub fn grid_for(&self, width: usize, height: usize) -> (usize, usize) {
        match self.target_window_px {
            Some(px) if px > 0 => (width.div_ceil(px).max(1), height.div_ceil(px).max(1)),
            _ => (self.grid_cols, self.grid_rows),
        }
    }

    fn validate(&self, width: usize, height: usize) -> Result<(usize, usize)> {
        if !(self.clip_limit >= 1.0) {
            return Err(Error::invalid(format!(
                "clip limit must be >= 1, got {}",
                self.clip_limit
            )));
        }
        if self.target_window_px == Some(0) {
            return Err(Error::invalid("target window must be at least 1 pixel"));
        }
        let (cols, rows) = self.grid_for(width, height);
        if cols == 0 || rows == 0 {
            return Err(Error::invalid("CLAHE grid must be at least 1x1"));
        }
        if cols > width || rows > height {
            return Err(Error::invalid(format!(
                "CLAHE grid {cols}x{rows} larger than plane {width}x{height}"
            )));
        }
        Ok((cols, rows))
    }
}

/// Clips every bin at `ceil(clip_limit * total / 256)` and spreads the
/// excess: a uniform share per pass (re-clipping up to 16 passes), then any
/// sub-256 remainder one sample at a time over the bins still below the
/// limit, round-robin. Total mass is preserved.
pub fn clip_histogram(bins: &[u64; BINS], clip_limit: f64) -> [u64; BINS] {
    let total: u64 = bins.iter().sum();
    let limit = ((clip_limit * total as f64 / BINS as f64).ceil() as u64).max(1);
    let mut h = *bins;
    for _ in 0..MAX_CLIP_PASSES {
        let mut excess = 0u64;
        for b in h.iter_mut() {
            if *b > limit {
                excess += *b - limit;
                *b = limit;
            }
        }
        if excess == 0 {
            break;
        }
        let share = excess / BINS as u64;
        let mut rem = (excess % BINS as u64) as usize;
        for b in h.iter_mut() {
            *b += share;
        }
        let below: Vec<usize> = (0..BINS).filter(|&i| h[i] < limit).collect();
        let targets: Vec<usize> = if below.is_empty() { (0..BINS).collect() } else { below };
        if let Some(step) = targets.len().checked_div(rem) {
            let step = step.max(1);
            let mut i = 0;
            while rem > 0 {
                h[targets[i % targets.len()]] += 1;
                rem -= 1;
                i += step;
            }
        }
    }
    h
}

/// Mapping of one tile.
#[derive(Debug, Clone)]
pub(crate) enum TileMap {
    /// Lightness value per input bin.
    Table(Box<[f64; BINS]>),
    /// Degenerate tile (one occupied bin): pass values through.
    Identity,
}

impl TileMap {
    #[inline]
    fn eval(&self, v: f64, bin: usize) -> f64 {
        match self {
            TileMap::Table(t) => t[bin],
            TileMap::Identity => v,
        }
    }
}

/// Half-open pixel range of tile `i` out of `n` along an axis of `len`.
#[inline]
pub(crate) fn tile_span(i: usize, n: usize, len: usize) -> (usize, usize) {
    (i * len / n, (i + 1) * len / n)
}

fn tile_centre(i: usize, n: usize, len: usize) -> f64 {
    let (a, b) = tile_span(i, n, len);
    (a + b - 1) as f64 / 2.0
}

/// For each pixel coordinate along an axis: the two tiles to blend and the
/// weight of the second.
fn axis_weights(n: usize, len: usize) -> Vec<(usize, usize, f64)> {
    let centres: Vec<f64> = (0..n).map(|i| tile_centre(i, n, len)).collect();
    (0..len)
        .map(|p| {
            let p = p as f64;
            if p <= centres[0] {
                return (0, 0, 0.0);
            }
            if p >= centres[n - 1] {
                return (n - 1, n - 1, 0.0);
            }
            let i = centres.partition_point(|&c| c <= p) - 1;
            (i, i + 1, (p - centres[i]) / (centres[i + 1] - centres[i]))
        })
        .collect()
}

pub(crate) fn tile_maps(l: &Plane, cols: usize, rows: usize, clip_limit: f64) -> Vec<TileMap> {
    let (w, h) = (l.width(), l.height());
    let mut maps = Vec::with_capacity(cols * rows);
    for ty in 0..rows {
        let (y0, y1) = tile_span(ty, rows, h);
        for tx in 0..cols {
            let (x0, x1) = tile_span(tx, cols, w);
            let mut bins = [0u64; BINS];
            for y in y0..y1 {
                for x in x0..x1 {
                    bins[lightness_bin(l.get(x, y))] += 1;
                }
            }
            let clipped = Histogram256::from_bins(clip_histogram(&bins, clip_limit));
            maps.push(match equalization_lut(&clipped) {
                Some(lut) => {
                    let mut table = Box::new([0.0; BINS]);
                    for (t, &m) in table.iter_mut().zip(lut.map()) {
                        *t = bin_lightness(m);
                    }
                    TileMap::Table(table)
                }
                None => TileMap::Identity,
            });
        }
    }
    maps
}

pub fn clahe(l: &Plane, cfg: &ClaheConfig) -> Result<Plane> {
    let (w, h) = (l.width(), l.height());
    let (cols, rows) = cfg.validate(w, h)?;
    let maps = tile_maps(l, cols, rows, cfg.clip_limit);
    let xw = axis_weights(cols, w);
    let yw = axis_weights(rows, h);

    let mut out = Vec::with_capacity(w * h);
    for &(ty0, ty1, fy) in &yw {
        for &(tx0, tx1, fx) in &xw {
            let v = l.get(out.len() % w, out.len() / w);
            let bin = lightness_bin(v);
            let row = |ty: usize| {
                let a = maps[ty * cols + tx0].eval(v, bin);
                if tx0 == tx1 {
                    a
                } else {
                    a * (1.0 - fx) + maps[ty * cols + tx1].eval(v, bin) * fx
                }
            };
            let top = row(ty0);
            let value = if ty0 == ty1 {
                top
            } else {
                top * (1.0 - fy) + row(ty1) * fy
            };
            out.push(value.clamp(0.0, 100.0));
        }
    }
    Plane::from_vec(w, h, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photometric::equalize::equalize;

    fn noise_plane(w: usize, h: usize, seed: u64) -> Plane {
        let mut s = seed;
        let data = (0..w * h)
            .map(|i| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let n = ((s >> 33) % 4000) as f64 / 100.0;
                (n + 30.0 * (i % w) as f64 / w as f64).min(100.0)
            })
            .collect();
        Plane::from_vec(w, h, data).unwrap()
    }

    /// Scalar reference: finds the bracketing tile centres by scanning every
    /// tile and evaluates the bilinear blend for a single pixel.
    fn oracle_pixel(l: &Plane, maps: &[TileMap], cols: usize, rows: usize, x: usize, y: usize) -> f64 {
        let centres = |n: usize, len: usize| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let a = (i * len / n) as f64;
                    let b = ((i + 1) * len / n) as f64;
                    (a + b - 1.0) / 2.0
                })
                .collect()
        };
        let bracket = |cs: &[f64], p: f64| -> (usize, usize, f64) {
            let mut lo = 0;
            let mut hi = cs.len() - 1;
            for (i, &c) in cs.iter().enumerate() {
                if c <= p {
                    lo = i;
                }
            }
            for (i, &c) in cs.iter().enumerate().rev() {
                if c >= p {
                    hi = i;
                }
            }
            if p <= cs[0] {
                return (0, 0, 0.0);
            }
            if p >= cs[cs.len() - 1] {
                return (cs.len() - 1, cs.len() - 1, 0.0);
            }
            if lo == hi {
                return (lo, lo, 0.0);
            }
            (lo, hi, (p - cs[lo]) / (cs[hi] - cs[lo]))
        };
        let (x0, x1, fx) = bracket(&centres(cols, l.width()), x as f64);
        let (y0, y1, fy) = bracket(&centres(rows, l.height()), y as f64);
        let v = l.get(x, y);
        let bin = lightness_bin(v);
        let m = |tx: usize, ty: usize| maps[ty * cols + tx].eval(v, bin);
        let val = (1.0 - fy) * ((1.0 - fx) * m(x0, y0) + fx * m(x1, y0))
            + fy * ((1.0 - fx) * m(x0, y1) + fx * m(x1, y1));
        val.clamp(0.0, 100.0)
    }

    #[test]
    fn single_tile_without_clipping_is_global_equalization() {
        let p = noise_plane(61, 47, 3);
        let (eq, _) = equalize(&p).unwrap();
        let out = clahe(&p, &ClaheConfig::with_grid(1, 1, 256.0)).unwrap();
        assert_eq!(out, eq);
    }

    #[test]
    fn clip_limit_one_flattens() {
        let mut bins = [0u64; 256];
        bins[10] = 4096;
        bins[200] = 1024;
        let clipped = clip_histogram(&bins, 1.0);
        assert!(clipped.iter().all(|&b| b == 20), "{clipped:?}");

        // Non-divisible mass stays within one sample of flat.
        let mut bins = [0u64; 256];
        bins[0] = 1000;
        bins[255] = 77;
        let clipped = clip_histogram(&bins, 1.0);
        assert_eq!(clipped.iter().sum::<u64>(), 1077);
        let (lo, hi) = (clipped.iter().min().unwrap(), clipped.iter().max().unwrap());
        assert!(hi - lo <= 1, "{lo}..{hi}");
    }

    #[test]
    fn flat_clipped_tile_maps_to_identity() {
        let p = noise_plane(64, 64, 11);
        let maps = tile_maps(&p, 2, 2, 1.0);
        for m in &maps {
            let TileMap::Table(t) = m else { panic!("expected table") };
            for (k, &v) in t.iter().enumerate() {
                assert!((lightness_bin(v) as i32 - k as i32).abs() <= 1);
            }
        }
    }

    #[test]
    fn clipping_conserves_mass_and_respects_limit() {
        let mut s = 5u64;
        for _ in 0..100 {
            let mut bins = [0u64; 256];
            for _ in 0..30 {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                bins[(s >> 56) as usize] += (s >> 20) % 500;
            }
            let total: u64 = bins.iter().sum();
            if total == 0 {
                continue;
            }
            let clipped = clip_histogram(&bins, 4.0);
            assert_eq!(clipped.iter().sum::<u64>(), total);
            let limit = (4.0 * total as f64 / 256.0).ceil() as u64;
            assert!(clipped.iter().all(|&b| b <= limit + 1));
        }
    }

    #[test]
    fn quadrant_image_matches_scalar_oracle() {
        let (w, h) = (40, 30);
        let data = (0..w * h)
            .map(|i| {
                let (x, y) = (i % w, i / w);
                match (x < w / 2, y < h / 2) {
                    (true, true) => 10.0,
                    (false, true) => 35.0,
                    (true, false) => 60.0,
                    (false, false) => 90.0,
                }
            })
            .collect();
        let p = Plane::from_vec(w, h, data).unwrap();
        let cfg = ClaheConfig::with_grid(2, 2, 256.0);
        let out = clahe(&p, &cfg).unwrap();
        let maps = tile_maps(&p, 2, 2, cfg.clip_limit);
        assert!(maps.iter().all(|m| matches!(m, TileMap::Identity)));
        // Quadrant interiors keep their values.
        assert_eq!(out.get(0, 0), 10.0);
        assert_eq!(out.get(w - 1, h - 1), 90.0);
        for y in 0..h {
            for x in 0..w {
                let want = oracle_pixel(&p, &maps, 2, 2, x, y);
                assert!((out.get(x, y) - want).abs() < 1e-9, "({x},{y})");
            }
        }
    }

    #[test]
    fn default_config_matches_scalar_oracle() {
        let p = noise_plane(97, 70, 21);
        let cfg = ClaheConfig::default();
        let out = clahe(&p, &cfg).unwrap();
        let maps = tile_maps(&p, 8, 8, cfg.clip_limit);
        for y in 0..p.height() {
            for x in 0..p.width() {
                let want = oracle_pixel(&p, &maps, 8, 8, x, y);
                assert!((out.get(x, y) - want).abs() < 1e-9, "({x},{y})");
            }
        }
    }

    #[test]
    fn window_mode_derives_grid() {
        let cfg = ClaheConfig {
            target_window_px: Some(45),
            ..ClaheConfig::default()
        };
        assert_eq!(cfg.grid_for(360, 240), (8, 6));
        assert_eq!(cfg.grid_for(361, 1), (9, 1));
    }

    #[test]
    fn rejects_bad_config() {
        let p = noise_plane(8, 8, 1);
        assert!(clahe(&p, &ClaheConfig::with_grid(9, 1, 4.0)).is_err());
        assert!(clahe(&p, &ClaheConfig::with_grid(2, 2, 0.5)).is_err());
        assert!(clahe(&p, &ClaheConfig::with_grid(0, 2, 4.0)).is_err());
    }
}
