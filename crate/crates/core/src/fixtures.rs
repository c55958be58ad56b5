//! Seeded synthetic imagery for tests, benchmarks and demos: textured
//! scenes, night renditions of them, and day/night retrieval corpora.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exposure::{interpolate_exposure, ExposurePair};
use crate::raster::{quantize, RasterImage};
use crate::retrieval::{ProtocolQuery, RetrievalProtocol};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub width: usize,
    pub height: usize,
    /// Layout drawn identically in every scene of a corpus.
    pub shared_shapes: usize,
    /// Scene-specific shapes drawn over the shared layout.
    pub shapes: usize,
    /// Amplitude of a smooth multiplicative shading field.
    pub shading: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            width: 360,
            height: 240,
            shared_shapes: 12,
            shapes: 3,
            shading: 0.1,
        }
    }
}

fn colour(rng: &mut Rng) -> [f64; 3] {
    [rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0)]
}

/// A background gradient overlaid with rectangles, ellipses and striped
/// patches. Values are sRGB in `[0, 1]`.
fn scene_real(cfg: &SceneConfig, layout_seed: u64, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = Rng::new(layout_seed);
    let mut img = background(cfg, &mut rng);
    draw_shapes(&mut img, cfg, cfg.shared_shapes, &mut rng);
    let mut rng = Rng::new(seed);
    draw_shapes(&mut img, cfg, cfg.shapes, &mut rng);
    if cfg.shading > 0.0 {
        let waves: Vec<[f64; 3]> = (0..3)
            .map(|_| {
                let a = rng.uniform(0.0, std::f64::consts::TAU);
                let f = rng.uniform(0.5, 2.0) * std::f64::consts::TAU / cfg.width.max(cfg.height) as f64;
                [f * a.cos(), f * a.sin(), rng.uniform(0.0, std::f64::consts::TAU)]
            })
            .collect();
        for (i, p) in img.iter_mut().enumerate() {
            let (x, y) = ((i % cfg.width) as f64, (i / cfg.width) as f64);
            let field: f64 = waves.iter().map(|w| (w[0] * x + w[1] * y + w[2]).sin()).sum::<f64>() / 3.0;
            for v in p.iter_mut() {
                *v = (*v * (1.0 + cfg.shading * field)).clamp(0.0, 1.0);
            }
        }
    }
    img
}

fn background(cfg: &SceneConfig, rng: &mut Rng) -> Vec<[f64; 3]> {
    let (w, h) = (cfg.width, cfg.height);
    let (c0, c1) = (colour(rng), colour(rng));
    let angle = rng.uniform(0.0, std::f64::consts::TAU);
    let (ca, sa) = (angle.cos(), angle.sin());
    (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64 / w as f64, (i / w) as f64 / h as f64);
            let t = (0.5 + 0.5 * ((x - 0.5) * ca + (y - 0.5) * sa)).clamp(0.0, 1.0);
            [0, 1, 2].map(|k| c0[k] + t * (c1[k] - c0[k]))
        })
        .collect()
}

fn draw_shapes(img: &mut [[f64; 3]], cfg: &SceneConfig, count: usize, rng: &mut Rng) {
    let (w, h) = (cfg.width, cfg.height);
    for _ in 0..count {
        let kind = rng.below(3);
        let c = colour(rng);
        let (cx, cy) = (rng.uniform(0.0, w as f64), rng.uniform(0.0, h as f64));
        let (rx, ry) = (rng.uniform(4.0, w as f64 / 4.0), rng.uniform(4.0, h as f64 / 4.0));
        let period = rng.uniform(3.0, 10.0);
        let theta = rng.uniform(0.0, std::f64::consts::PI);
        let (ct, st) = (theta.cos(), theta.sin());
        let shade = rng.uniform(-0.2, 0.2);
        for y in 0..h {
            for x in 0..w {
                let (dx, dy) = ((x as f64 - cx) / rx, (y as f64 - cy) / ry);
                let inside = match kind {
                    0 => dx.abs() <= 1.0 && dy.abs() <= 1.0,
                    _ => dx * dx + dy * dy <= 1.0,
                };
                if !inside {
                    continue;
                }
                let p = &mut img[y * w + x];
                let lit = 1.0 + shade * dx;
                let s = if kind == 2 {
                    0.35 + 0.65 * (0.5 + 0.5 * ((x as f64 * ct + y as f64 * st) * std::f64::consts::TAU / period).sin())
                } else {
                    1.0
                };
                for k in 0..3 {
                    p[k] = (c[k] * s * lit).clamp(0.0, 1.0);
                }
            }
        }
    }
}

fn to_raster(w: usize, h: usize, px: &[[f64; 3]]) -> RasterImage {
    let data = px.iter().flat_map(|p| p.map(quantize)).collect();
    RasterImage::from_vec(w, h, 3, data).expect("dimensions match")
}

/// Scenes sharing `layout_seed` share the background and the
/// `shared_shapes` layer.
pub fn synthetic_scene(cfg: &SceneConfig, layout_seed: u64, seed: u64) -> RasterImage {
    to_raster(cfg.width, cfg.height, &scene_real(cfg, layout_seed, seed))
}

/// How a night rendition is derived from a day image.
///
/// The short exposure is the scene under a few warm lamp pools over a dim
/// ambient floor; the night image is the exposure blend at `alpha` between
/// that and the day image, followed by Gaussian sensor noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NightConfig {
    pub alpha: f64,
    /// Linear-domain gain of the short exposure outside lamp pools.
    pub ambient: f64,
    /// Peak linear-domain gain inside a lamp pool.
    pub lamp_gain: f64,
    pub lamps: usize,
    /// Standard deviation in 8-bit levels.
    pub noise_sigma: f64,
}

impl Default for NightConfig {
    fn default() -> Self {
        Self {
            alpha: 0.15,
            ambient: 0.02,
            lamp_gain: 0.3,
            lamps: 2,
            noise_sigma: 2.0,
        }
    }
}

pub fn night_version(day: &RasterImage, cfg: &NightConfig, seed: u64) -> Result<RasterImage> {
    let mut rng = Rng::new(seed);
    let (w, h) = day.dimensions();
    let lamps: Vec<(f64, f64, f64)> = (0..cfg.lamps)
        .map(|_| {
            (
                rng.uniform(0.0, w as f64),
                rng.uniform(0.0, h as f64),
                rng.uniform(0.15, 0.35) * w.max(h) as f64,
            )
        })
        .collect();
    let tint = [1.0, 0.85, 0.6];
    let mut short = day.clone();
    for y in 0..h {
        for x in 0..w {
            let pool: f64 = lamps
                .iter()
                .map(|&(lx, ly, r)| {
                    let d2 = (x as f64 - lx).powi(2) + (y as f64 - ly).powi(2);
                    (-d2 / (2.0 * r * r)).exp()
                })
                .sum::<f64>()
                .min(1.0);
            let px = short.pixel_mut(x, y);
            for (k, v) in px.iter_mut().enumerate() {
                let lin = (f64::from(*v) / 255.0).powf(2.2);
                let gain = cfg.ambient + cfg.lamp_gain * pool * tint[k];
                *v = quantize((lin * gain).powf(1.0 / 2.2));
            }
        }
    }
    let pair = ExposurePair::new("night", short, day.clone())?;
    let mut night = interpolate_exposure(&pair, cfg.alpha)?;
    if cfg.noise_sigma > 0.0 {
        let data: Vec<u8> = night
            .data()
            .iter()
            .map(|&v| quantize((f64::from(v) + cfg.noise_sigma * rng.normal()) / 255.0))
            .collect();
        night = RasterImage::from_vec(w, h, 3, data)?;
    }
    Ok(night)
}

/// Day and night images of the same scenes, in scene order.
#[derive(Debug, Clone)]
pub struct DayNightCorpus {
    pub images: Vec<(String, RasterImage)>,
    pub scenes: usize,
}

impl DayNightCorpus {
    pub fn day_id(scene: usize) -> String {
        format!("scene{scene:03}_day")
    }

    pub fn night_id(scene: usize) -> String {
        format!("scene{scene:03}_night")
    }

    /// Every image queries the whole corpus; its only positive is the other
    /// rendition of the same scene.
    pub fn protocol(&self) -> RetrievalProtocol {
        let database = self.images.iter().map(|(id, _)| id.clone()).collect();
        let queries = (0..self.scenes)
            .flat_map(|s| {
                let (d, n) = (Self::day_id(s), Self::night_id(s));
                [
                    ProtocolQuery {
                        id: d.clone(),
                        positives: vec![n.clone()],
                        junk: vec![],
                    },
                    ProtocolQuery {
                        id: n,
                        positives: vec![d],
                        junk: vec![],
                    },
                ]
            })
            .collect();
        RetrievalProtocol::new(database, queries).expect("corpus protocol is consistent")
    }
}

pub fn day_night_corpus(
    scenes: usize,
    scene: &SceneConfig,
    night: &NightConfig,
    seed: u64,
) -> Result<DayNightCorpus> {
    let mut images = Vec::with_capacity(2 * scenes);
    for s in 0..scenes {
        let day_id = DayNightCorpus::day_id(s);
        let day = synthetic_scene(scene, seed, crate::rng::derive_seed(seed, &day_id));
        let n = night_version(&day, night, crate::rng::derive_seed(seed, &DayNightCorpus::night_id(s)))?;
        images.push((day_id, day));
        images.push((DayNightCorpus::night_id(s), n));
    }
    Ok(DayNightCorpus { images, scenes })
}
