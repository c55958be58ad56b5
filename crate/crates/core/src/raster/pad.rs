use serde::{Deserialize, Serialize};

use super::Raster;
use crate::error::{Error, Result};

pub const PAD_MULTIPLE: usize = 256;

/// Pixels added on each side by [`pad_reflect_256`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PadRecord {
    pub left: usize,
    pub right: usize,
    pub top: usize,
    pub bottom: usize,
}

impl PadRecord {
    pub fn is_zero(&self) -> bool {
        *self == PadRecord::default()
    }
}

/// Mirror index without repeating the edge sample (`abc|cb`), folded
/// periodically when the pad is wider than the image.
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

fn round_up(v: usize) -> usize {
    v.div_ceil(PAD_MULTIPLE) * PAD_MULTIPLE
}

/// Reflection-pads to the smallest dimensions divisible by 256. The pad is
/// split evenly, with the odd pixel going right / bottom.
pub fn pad_reflect_256<T: Copy>(img: &Raster<T>) -> Result<(Raster<T>, PadRecord)> {
    let (w, h) = img.dimensions();
    if w < 2 || h < 2 {
        return Err(Error::invalid(format!(
            "reflection padding needs at least 2x2 pixels, got {w}x{h}"
        )));
    }
    let (tw, th) = (round_up(w), round_up(h));
    let left = (tw - w) / 2;
    let top = (th - h) / 2;
    let rec = PadRecord {
        left,
        right: tw - w - left,
        top,
        bottom: th - h - top,
    };
    if rec.is_zero() {
        return Ok((img.clone(), rec));
    }

    let c = img.channels();
    let mut data = Vec::with_capacity(tw * th * c);
    for y in 0..th {
        let sy = reflect(y as isize - top as isize, h);
        for x in 0..tw {
            let sx = reflect(x as isize - left as isize, w);
            data.extend_from_slice(img.pixel(sx, sy));
        }
    }
    Ok((Raster::from_vec(tw, th, c, data)?, rec))
}

/// Removes the border recorded by [`pad_reflect_256`].
pub fn unpad<T: Copy>(img: &Raster<T>, rec: &PadRecord) -> Result<Raster<T>> {
    let (w, h) = img.dimensions();
    if rec.left + rec.right >= w || rec.top + rec.bottom >= h {
        return Err(Error::invalid(format!(
            "pad record {rec:?} leaves no pixels in a {w}x{h} image"
        )));
    }
    img.crop(
        rec.left,
        rec.top,
        w - rec.left - rec.right,
        h - rec.top - rec.bottom,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::RasterImage;
    use proptest::prelude::*;

    fn ramp(w: usize, h: usize, c: usize) -> RasterImage {
        let data = (0..w * h * c).map(|i| (i * 7 % 251) as u8).collect();
        RasterImage::from_vec(w, h, c, data).unwrap()
    }

    #[test]
    fn aligned_image_is_untouched() {
        let img = ramp(256, 256, 1);
        let (out, rec) = pad_reflect_256(&img).unwrap();
        assert!(rec.is_zero());
        assert_eq!(out, img);
    }

    #[test]
    fn padded_dimensions() {
        let (out, _) = pad_reflect_256(&ramp(300, 500, 3)).unwrap();
        assert_eq!(out.dimensions(), (512, 512));
        let (out, _) = pad_reflect_256(&ramp(769, 257, 1)).unwrap();
        assert_eq!(out.dimensions(), (1024, 512));
    }

    #[test]
    fn mirror_skips_edge_pixel() {
        // a b c | b a ...
        let img = RasterImage::from_vec(3, 2, 1, vec![10, 20, 30, 40, 50, 60]).unwrap();
        let (out, rec) = pad_reflect_256(&img).unwrap();
        let row = rec.top;
        let px = |x: usize| out.pixel(x, row)[0];
        assert_eq!(px(rec.left - 1), 20);
        assert_eq!(px(rec.left - 2), 30);
        assert_eq!(px(rec.left + 3), 20);
        assert_eq!(px(rec.left + 4), 10);
    }

    #[test]
    fn tiny_images_rejected() {
        assert!(pad_reflect_256(&ramp(1, 5, 1)).is_err());
        assert!(pad_reflect_256(&ramp(5, 1, 3)).is_err());
    }

    #[test]
    fn unpad_contract() {
        let img = ramp(300, 500, 3);
        assert_eq!(unpad(&img, &PadRecord::default()).unwrap(), img);
        let (padded, rec) = pad_reflect_256(&img).unwrap();
        assert_eq!(unpad(&padded, &rec).unwrap(), img);
        let bad = PadRecord {
            left: 300,
            right: 300,
            top: 0,
            bottom: 0,
        };
        assert!(unpad(&img, &bad).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn unpad_inverts_pad(w in 2usize..300, h in 2usize..300, c in prop::sample::select(vec![1usize, 3])) {
            let img = ramp(w, h, c);
            let (padded, rec) = pad_reflect_256(&img).unwrap();
            prop_assert_eq!(padded.width() % 256, 0);
            prop_assert_eq!(padded.height() % 256, 0);
            prop_assert!(padded.width() - w < 256 && padded.height() - h < 256);
            prop_assert_eq!(unpad(&padded, &rec).unwrap(), img);
        }
    }
}
