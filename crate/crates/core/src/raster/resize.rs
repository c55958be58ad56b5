use super::RasterImage;
use crate::error::{Error, Result};

/// Source coordinate and blend weight for each destination column/row,
/// using pixel-centre alignment.
fn sample_positions(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, s - i0 as f64)
        })
        .collect()
}

/// Bilinear resampling to `width x height`.
pub fn resize(img: &RasterImage, width: usize, height: usize) -> Result<RasterImage> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!("cannot resize to {width}x{height}")));
    }
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::invalid("cannot resize an empty image"));
    }
    if (width, height) == img.dimensions() {
        return Ok(img.clone());
    }
    let c = img.channels();
    let xs = sample_positions(img.width(), width);
    let ys = sample_positions(img.height(), height);
    let mut data = Vec::with_capacity(width * height * c);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let (p00, p01) = (img.pixel(x0, y0), img.pixel(x1, y0));
            let (p10, p11) = (img.pixel(x0, y1), img.pixel(x1, y1));
            for ch in 0..c {
                let top = f64::from(p00[ch]) * (1.0 - fx) + f64::from(p01[ch]) * fx;
                let bot = f64::from(p10[ch]) * (1.0 - fx) + f64::from(p11[ch]) * fx;
                let v = top * (1.0 - fy) + bot * fy;
                data.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    RasterImage::from_vec(width, height, c, data)
}

/// Rescales so the longer edge equals `target`, keeping the aspect ratio.
pub fn resize_longest_edge(img: &RasterImage, target: usize) -> Result<RasterImage> {
    if target == 0 {
        return Err(Error::invalid("target edge must be at least 1"));
    }
    let (w, h) = img.dimensions();
    let longest = w.max(h);
    if longest == target {
        return Ok(img.clone());
    }
    let scale = target as f64 / longest as f64;
    let (nw, nh) = if w >= h {
        (target, ((h as f64 * scale).round() as usize).max(1))
    } else {
        (((w as f64 * scale).round() as usize).max(1), target)
    };
    resize(img, nw, nh)
}
