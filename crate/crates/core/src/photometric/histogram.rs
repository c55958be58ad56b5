use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Plane;

pub const BINS: usize = 256;

/// Maps a lightness value in `[0, 100]` to its 8-bit bin.
#[inline]
pub fn lightness_bin(l: f64) -> usize {
    (l / 100.0 * 255.0).round().clamp(0.0, 255.0) as usize
}

#[inline]
pub fn bin_lightness(bin: u8) -> f64 {
    f64::from(bin) * 100.0 / 255.0
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram256 {
    bins: Vec<u64>,
    total: u64,
}

impl Histogram256 {
    pub fn from_bins(bins: [u64; BINS]) -> Self {
        Self {
            total: bins.iter().sum(),
            bins: bins.to_vec(),
        }
    }

    /// Every bin holding `per_bin` samples.
    pub fn uniform(per_bin: u64) -> Self {
        Self::from_bins([per_bin; BINS])
    }

    pub fn bins(&self) -> &[u64] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn max_bin(&self) -> u64 {
        self.bins.iter().copied().max().unwrap_or(0)
    }

    /// Inclusive normalised CDF.
    pub fn cdf(&self) -> [f64; BINS] {
        let mut out = [0.0; BINS];
        let mut acc = 0u64;
        let total = self.total.max(1) as f64;
        for (o, &b) in out.iter_mut().zip(&self.bins) {
            acc += b;
            *o = acc as f64 / total;
        }
        out
    }
}

pub fn histogram_of(l: &Plane) -> Result<Histogram256> {
    if l.is_empty() {
        return Err(Error::invalid("histogram of an empty plane"));
    }
    let mut bins = [0u64; BINS];
    for &v in l.data() {
        bins[lightness_bin(v)] += 1;
    }
    Ok(Histogram256::from_bins(bins))
}

/// Non-decreasing 256-entry intensity map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneLut {
    map: [u8; BINS],
}

impl MonotoneLut {
    pub fn identity() -> Self {
        let mut map = [0u8; BINS];
        for (i, m) in map.iter_mut().enumerate() {
            *m = i as u8;
        }
        Self { map }
    }

    /// Fails unless `map` is non-decreasing.
    pub fn new(map: [u8; BINS]) -> Result<Self> {
        if map.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("lookup table is not monotone"));
        }
        Ok(Self { map })
    }

    pub fn map(&self) -> &[u8; BINS] {
        &self.map
    }

    #[inline]
    pub fn get(&self, bin: usize) -> u8 {
        self.map[bin]
    }

    /// Applies the table to a lightness plane; outputs are bin centres.
    pub fn apply(&self, l: &Plane) -> Plane {
        l.map(|v| bin_lightness(self.map[lightness_bin(v)]))
    }
}
