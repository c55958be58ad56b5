use super::histogram::{histogram_of, Histogram256, MonotoneLut, BINS};
use crate::error::{Error, Result};
use crate::raster::Plane;

/// Equalisation table `round(255 (cdf(v) - cdf_min) / (1 - cdf_min))`.
///
/// Returns `None` for a histogram with a single occupied bin, where the
/// formula degenerates to 0/0.
pub fn equalization_lut(hist: &Histogram256) -> Option<MonotoneLut> {
    let first = hist.bins().iter().position(|&b| b > 0)?;
    let total = hist.total() as f64;
    let cdf_min = hist.bins()[first];
    if cdf_min == hist.total() {
        return None;
    }
    let denom = total - cdf_min as f64;
    let mut map = [0u8; BINS];
    let mut acc = 0u64;
    for (m, &b) in map.iter_mut().zip(hist.bins()) {
        acc += b;
        let num = acc.saturating_sub(cdf_min) as f64;
        *m = (255.0 * num / denom).round() as u8;
    }
    Some(MonotoneLut::new(map).expect("cumulative sums are monotone"))
}

/// Global histogram equalisation of a lightness plane. A constant plane is
/// returned unchanged together with the identity table.
pub fn equalize(l: &Plane) -> Result<(Plane, MonotoneLut)> {
    let hist = histogram_of(l)?;
    match equalization_lut(&hist) {
        Some(lut) => Ok((lut.apply(l), lut)),
        None => Ok((l.clone(), MonotoneLut::identity())),
    }
}

/// Table sending source bin `v` to the target bin whose CDF is closest to
/// `cdf_source(v)`, ties resolved to the smaller bin.
#[allow(clippy::needless_range_loop)]
pub fn matching_lut(source: &Histogram256, target: &Histogram256) -> Result<MonotoneLut> {
    if target.is_empty() {
        return Err(Error::invalid("histogram matching target is empty"));
    }
    let cs = source.cdf();
    let ct = target.cdf();
    let mut map = [0u8; BINS];
    let mut w = 0usize;
    for (v, m) in map.iter_mut().enumerate() {
        // The optimum is non-decreasing in v, so the scan resumes from the
        // previous answer.
        let mut best = w;
        let mut best_dist = (ct[w] - cs[v]).abs();
        for cand in w + 1..BINS {
            let d = (ct[cand] - cs[v]).abs();
            if d < best_dist {
                best = cand;
                best_dist = d;
            } else if ct[cand] >= cs[v] && d > best_dist {
                break;
            }
        }
        w = best;
        *m = best as u8;
    }
    MonotoneLut::new(map)
}

pub fn match_histogram(l: &Plane, target: &Histogram256) -> Result<Plane> {
    if target.is_empty() {
        return Err(Error::invalid("histogram matching target is empty"));
    }
    let lut = matching_lut(&histogram_of(l)?, target)?;
    Ok(lut.apply(l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photometric::histogram::{bin_lightness, lightness_bin};

    fn plane_from_bins(levels: &[(u8, usize)]) -> Plane {
        let data: Vec<f64> = levels
            .iter()
            .flat_map(|&(b, n)| std::iter::repeat_n(bin_lightness(b), n))
            .collect();
        let n = data.len();
        Plane::from_vec(n, 1, data).unwrap()
    }

    fn bins_of(p: &Plane) -> Vec<usize> {
        p.data().iter().map(|&v| lightness_bin(v)).collect()
    }

    /// Direct argmin over all target bins.
    fn brute_matching(source: &Histogram256, target: &Histogram256) -> [u8; 256] {
        let (cs, ct) = (source.cdf(), target.cdf());
        let mut out = [0u8; 256];
        for v in 0..256 {
            let mut best = 0;
            for w in 1..256 {
                if (ct[w] - cs[v]).abs() < (ct[best] - cs[v]).abs() {
                    best = w;
                }
            }
            out[v] = best as u8;
        }
        out
    }

    #[test]
    fn uniform_histogram_is_fixed_point() {
        let p = plane_from_bins(&(0..=255).map(|b| (b as u8, 3)).collect::<Vec<_>>());
        let (out, lut) = equalize(&p).unwrap();
        for (k, &m) in lut.map().iter().enumerate() {
            assert!((m as i32 - k as i32).abs() <= 1, "bin {k} -> {m}");
        }
        for (a, b) in bins_of(&p).iter().zip(bins_of(&out)) {
            assert!((*a as i32 - b as i32).abs() <= 1);
        }
    }

    #[test]
    fn constant_plane_unchanged() {
        let p = Plane::filled(5, 5, 37.3);
        let (out, lut) = equalize(&p).unwrap();
        assert_eq!(out, p);
        assert_eq!(lut, MonotoneLut::identity());
    }

    #[test]
    fn two_level_stretch() {
        let p = plane_from_bins(&[(64, 25), (128, 75)]);
        let (out, lut) = equalize(&p).unwrap();
        assert_eq!((lut.get(64), lut.get(128)), (0, 255));
        assert_eq!(bins_of(&out)[0], 0);
        assert_eq!(bins_of(&out)[99], 255);
    }

    #[test]
    fn match_to_self_is_identity() {
        let p = plane_from_bins(&[(3, 4), (40, 1), (41, 9), (200, 2)]);
        let h = histogram_of(&p).unwrap();
        let out = match_histogram(&p, &h).unwrap();
        assert_eq!(bins_of(&out), bins_of(&p));
    }

    #[test]
    fn two_level_matching() {
        let src = plane_from_bins(&[(64, 50), (128, 50)]);
        let target = histogram_of(&plane_from_bins(&[(0, 50), (255, 50)])).unwrap();
        let lut = matching_lut(&histogram_of(&src).unwrap(), &target).unwrap();
        assert_eq!((lut.get(64), lut.get(128)), (0, 255));
    }

    #[test]
    fn match_uniform_tracks_equalize() {
        // Dense random plane: the lowest occupied bin holds ~1/256 of the
        // mass, so matching to flat and equalising agree within one level.
        let mut state = 7u64;
        let data: Vec<f64> = (0..64 * 64)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 33) % 10_000) as f64 / 100.0
            })
            .collect();
        let p = Plane::from_vec(64, 64, data).unwrap();
        let (eq, _) = equalize(&p).unwrap();
        let matched = match_histogram(&p, &Histogram256::uniform(1)).unwrap();
        for (a, b) in bins_of(&eq).iter().zip(bins_of(&matched)) {
            assert!((*a as i32 - b as i32).abs() <= 1, "{a} vs {b}");
        }
    }

    #[test]
    fn empty_target_rejected() {
        let p = Plane::filled(2, 2, 10.0);
        let empty = Histogram256::from_bins([0; 256]);
        assert!(match_histogram(&p, &empty).is_err());
    }

    #[test]
    fn matching_agrees_with_brute_force() {
        let mut state = 99u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..50 {
            let mut a = [0u64; 256];
            let mut b = [0u64; 256];
            for _ in 0..40 {
                a[(next() % 256) as usize] += next() % 5;
                b[(next() % 256) as usize] += next() % 5;
            }
            b[(next() % 256) as usize] += 1;
            let (ha, hb) = (Histogram256::from_bins(a), Histogram256::from_bins(b));
            let fast = matching_lut(&ha, &hb).unwrap();
            assert_eq!(fast.map(), &brute_matching(&ha, &hb));
        }
    }
}
