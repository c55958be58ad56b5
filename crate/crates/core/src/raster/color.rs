//! sRGB (D65) <-> CIELAB.

use std::sync::OnceLock;

use nalgebra::Matrix3;

use super::{Plane, RasterImage};
use crate::error::{Error, Result};

const EPSILON: f64 = 216.0 / 24389.0;
const KAPPA: f64 = 24389.0 / 27.0;

// Linear sRGB -> XYZ, D65.
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

/// CIELAB image. `l` is in `[0, 100]`; `a` and `b` are unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct LabImage {
    pub l: Plane,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl LabImage {
    pub fn width(&self) -> usize {
        self.l.width()
    }

    pub fn height(&self) -> usize {
        self.l.height()
    }

    /// Replaces the lightness channel, leaving chroma untouched.
    pub fn with_lightness(self, l: Plane) -> Result<Self> {
        if l.width() != self.l.width() || l.height() != self.l.height() {
            return Err(Error::invalid(format!(
                "lightness plane {}x{} does not match image {}x{}",
                l.width(),
                l.height(),
                self.l.width(),
                self.l.height()
            )));
        }
        Ok(Self { l, ..self })
    }
}

struct Tables {
    decode: [f64; 256],
    to_xyz: Matrix3<f64>,
    to_rgb: Matrix3<f64>,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut decode = [0.0; 256];
        for (v, out) in decode.iter_mut().enumerate() {
            *out = srgb_to_linear(v as f64 / 255.0);
        }
        // Rows are divided by their sums so that RGB white lands exactly on
        // the reference white and a = b = 0.
        let mut m = Matrix3::zeros();
        for r in 0..3 {
            let sum: f64 = RGB_TO_XYZ[r].iter().sum();
            for c in 0..3 {
                m[(r, c)] = RGB_TO_XYZ[r][c] / sum;
            }
        }
        let inv = m.try_inverse().expect("sRGB primaries matrix is invertible");
        Tables {
            decode,
            to_xyz: m,
            to_rgb: inv,
        }
    })
}

/// sRGB electro-optical transfer function on `[0, 1]`.
pub fn srgb_to_linear(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

fn linear_to_srgb(v: f64) -> f64 {
    if v <= 0.0031308 {
        12.92 * v
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

#[inline]
fn f_lab(t: f64) -> f64 {
    if t > EPSILON {
        t.cbrt()
    } else {
        (KAPPA * t + 16.0) / 116.0
    }
}

#[inline]
fn f_lab_inv(f: f64) -> f64 {
    let cube = f * f * f;
    if cube > EPSILON {
        cube
    } else {
        (116.0 * f - 16.0) / KAPPA
    }
}

pub(crate) fn pixel_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let t = tables();
    let lin = nalgebra::Vector3::new(
        t.decode[rgb[0] as usize],
        t.decode[rgb[1] as usize],
        t.decode[rgb[2] as usize],
    );
    let xyz = t.to_xyz * lin;
    let (fx, fy, fz) = (f_lab(xyz.x), f_lab(xyz.y), f_lab(xyz.z));
    let l = (116.0 * fy - 16.0).clamp(0.0, 100.0);
    [l, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

pub(crate) fn lab_to_pixel(lab: [f64; 3]) -> [u8; 3] {
    let t = tables();
    let [l, a, b] = lab;
    let fy = (l + 16.0) / 116.0;
    let fx = fy + a / 500.0;
    let fz = fy - b / 200.0;
    let y = if l > KAPPA * EPSILON { fy * fy * fy } else { l / KAPPA };
    let xyz = nalgebra::Vector3::new(f_lab_inv(fx), y, f_lab_inv(fz));
    let lin = t.to_rgb * xyz;
    [0, 1, 2].map(|c| super::quantize(linear_to_srgb(lin[c].clamp(0.0, 1.0))))
}

pub fn rgb_to_lab(img: &RasterImage) -> Result<LabImage> {
    if img.channels() != 3 {
        return Err(Error::invalid(format!(
            "LAB conversion needs 3 channels, got {}",
            img.channels()
        )));
    }
    let n = img.width() * img.height();
    let mut l = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for px in img.data().chunks_exact(3) {
        let lab = pixel_to_lab([px[0], px[1], px[2]]);
        l.push(lab[0]);
        a.push(lab[1]);
        b.push(lab[2]);
    }
    Ok(LabImage {
        l: Plane::from_vec(img.width(), img.height(), l)?,
        a,
        b,
    })
}

/// Out-of-gamut colours are clamped per channel.
pub fn lab_to_rgb(img: &LabImage) -> RasterImage {
    let mut data = Vec::with_capacity(img.l.len() * 3);
    for ((&l, &a), &b) in img.l.data().iter().zip(&img.a).zip(&img.b) {
        data.extend_from_slice(&lab_to_pixel([l, a, b]));
    }
    RasterImage::from_vec(img.width(), img.height(), 3, data).expect("dimensions carried over")
}
