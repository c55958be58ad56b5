//! Binary PPM (P6, plus P5 for grey) and PNG.

use std::path::Path;

use super::RasterImage;
use crate::error::{Error, Result};

pub fn encode_ppm(img: &RasterImage) -> Vec<u8> {
    let magic = if img.channels() == 3 { "P6" } else { "P5" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format(start as u64, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(start as u64, format!("{what} out of range")))
    }
}

pub fn decode_ppm(bytes: &[u8]) -> Result<RasterImage> {
    let channels = match bytes.get(..2) {
        Some(b"P6") => 3,
        Some(b"P5") => 1,
        _ => return Err(Error::format(0, "expected P6 or P5 magic")),
    };
    let mut rd = HeaderReader { bytes, pos: 2 };
    let width = rd.number("width")?;
    let height = rd.number("height")?;
    let maxval_at = rd.pos;
    let maxval = rd.number("maxval")?;
    if maxval != 255 {
        return Err(Error::format(
            maxval_at as u64,
            format!("only 8-bit PPM is supported, maxval {maxval}"),
        ));
    }
    match bytes.get(rd.pos) {
        Some(b) if b.is_ascii_whitespace() => rd.pos += 1,
        _ => return Err(Error::format(rd.pos as u64, "expected whitespace after maxval")),
    }
    let expected = width * height * channels;
    let payload = &bytes[rd.pos..];
    if payload.len() < expected {
        return Err(Error::format(
            rd.pos as u64,
            format!(
                "pixel data truncated: expected {expected} bytes, found {}",
                payload.len()
            ),
        ));
    }
    RasterImage::from_vec(width, height, channels, payload[..expected].to_vec())
}

/// Reads PPM/PGM or PNG (decided by content), always returning RGB.
pub fn read_image(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let decode_err = |message: String| Error::Decode {
        path: path.to_path_buf(),
        message,
    };
    if bytes.starts_with(b"P6") || bytes.starts_with(b"P5") {
        let img = decode_ppm(&bytes).map_err(|e| decode_err(e.to_string()))?;
        return Ok(to_rgb(img));
    }
    let dynamic = image::load_from_memory(&bytes).map_err(|e| decode_err(e.to_string()))?;
    let rgb = dynamic.to_rgb8();
    let (w, h) = rgb.dimensions();
    RasterImage::from_vec(w as usize, h as usize, 3, rgb.into_raw())
}

fn to_rgb(img: RasterImage) -> RasterImage {
    if img.channels() == 3 {
        return img;
    }
    let (w, h) = img.dimensions();
    let data = img.data().iter().flat_map(|&v| [v, v, v]).collect();
    RasterImage::from_vec(w, h, 3, data).expect("same dimensions")
}

/// Writes PPM for `.ppm`/`.pgm` extensions and PNG otherwise.
pub fn write_image(path: impl AsRef<Path>, img: &RasterImage) -> Result<()> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let bytes = match ext.as_deref() {
        Some("ppm") | Some("pgm") => encode_ppm(img),
        _ => {
            let color = if img.channels() == 3 {
                image::ExtendedColorType::Rgb8
            } else {
                image::ExtendedColorType::L8
            };
            let mut out = Vec::new();
            image::ImageEncoder::write_image(
                image::codecs::png::PngEncoder::new(&mut out),
                img.data(),
                img.width() as u32,
                img.height() as u32,
                color,
            )
            .map_err(|e| Error::Decode {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
            out
        }
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
