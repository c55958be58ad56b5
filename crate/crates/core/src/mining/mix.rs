use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MixMode {
    /// `ratio.0` items of `a` then `ratio.1` of `b`, repeated.
    Cycle,
    /// Each draw takes `a` with probability `ratio.0 / (ratio.0 + ratio.1)`.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    A,
    B,
}

/// `draws` items interleaved from two streams; each stream is consumed in
/// order and wraps around when exhausted.
pub fn mix_datasets<T: Clone>(
    a: &[T],
    b: &[T],
    ratio: (u32, u32),
    draws: usize,
    mode: MixMode,
) -> Result<Vec<(Source, T)>> {
    if ratio.0 == 0 && ratio.1 == 0 {
        return Err(Error::invalid("mixing ratio 0:0"));
    }
    if (ratio.0 > 0 && a.is_empty()) || (ratio.1 > 0 && b.is_empty()) {
        return Err(Error::invalid("cannot draw from an empty pair stream"));
    }
    let period = (ratio.0 + ratio.1) as usize;
    let p_a = f64::from(ratio.0) / period as f64;
    let mut rng = match mode {
        MixMode::Random { seed } => Some(Rng::new(seed)),
        MixMode::Cycle => None,
    };
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut out = Vec::with_capacity(draws);
    for k in 0..draws {
        let take_a = match rng.as_mut() {
            Some(r) => r.unit() < p_a,
            None => k % period < ratio.0 as usize,
        };
        if take_a {
            out.push((Source::A, a[ia % a.len()].clone()));
            ia += 1;
        } else {
            out.push((Source::B, b[ib % b.len()].clone()));
            ib += 1;
        }
    }
    Ok(out)
}
