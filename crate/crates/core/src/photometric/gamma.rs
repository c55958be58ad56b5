use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Plane;

pub const GAMMA_MIN: f64 = 1.0 / 16.0;
pub const GAMMA_MAX: f64 = 16.0;
/// Guaranteed accuracy of the corrected mean.
pub const MEAN_TOLERANCE: f64 = 1e-4;
const MAX_ITERATIONS: usize = 50;
// Iteration keeps going well past MEAN_TOLERANCE; secant steps are cheap
// near the root and this pins gamma itself to ~1e-10.
const STOP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub gamma: f64,
    /// Mean of the corrected plane.
    pub mean: f64,
    pub iterations: usize,
    /// True when the target lies outside what `[1/16, 16]` can reach and
    /// gamma was pinned to a bound.
    pub at_bound: bool,
}

fn powered_mean(values: &[f64], gamma: f64) -> f64 {
    values.iter().map(|&v| v.powf(gamma)).sum::<f64>() / values.len() as f64
}

/// Finds `gamma` so that `mean(l^gamma) == target_mean` on a plane with
/// values in `[0, 1]`, and returns the corrected plane.
///
/// Secant iteration from gamma 1 and 1.5; any step leaving the current
/// bracket (or not finite) is replaced by bisection.
pub fn gamma_to_mean(l: &Plane, target_mean: f64) -> Result<(Plane, GammaFit)> {
    if !(target_mean > 0.0 && target_mean < 1.0) {
        return Err(Error::invalid(format!(
            "gamma target mean must lie in (0, 1), got {target_mean}"
        )));
    }
    let values = l.data();
    if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::invalid("gamma correction needs values in [0, 1]"));
    }
    if !values.iter().any(|&v| v > 0.0 && v < 1.0) {
        return Err(Error::UnreachableTarget {
            target: target_mean,
            reason: "no sample strictly inside (0, 1); every exponent gives the same mean".into(),
        });
    }

    // f is decreasing in gamma.
    let f = |g: f64| powered_mean(values, g) - target_mean;
    let (mut lo, mut hi) = (GAMMA_MIN, GAMMA_MAX);
    let f_lo = f(lo);
    let f_hi = f(hi);
    let finish = |gamma: f64, iterations: usize, at_bound: bool| {
        let out = l.map(|v| v.powf(gamma));
        let mean = out.mean();
        (
            out,
            GammaFit {
                gamma,
                mean,
                iterations,
                at_bound,
            },
        )
    };
    if f_lo <= 0.0 {
        return Ok(finish(lo, 0, f_lo < 0.0));
    }
    if f_hi >= 0.0 {
        return Ok(finish(hi, 0, f_hi > 0.0));
    }

    let shrink = |g: f64, fg: f64, lo: &mut f64, hi: &mut f64| {
        if fg > 0.0 {
            *lo = lo.max(g);
        } else {
            *hi = hi.min(g);
        }
    };
    let (mut g0, mut f0) = (1.0, f(1.0));
    shrink(g0, f0, &mut lo, &mut hi);
    let (mut g1, mut f1) = (1.5, f(1.5));
    shrink(g1, f1, &mut lo, &mut hi);
    let mut best = if f0.abs() <= f1.abs() { (g0, f0) } else { (g1, f1) };
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && best.1.abs() > STOP_TOLERANCE {
        iterations += 1;
        let mut g2 = g1 - f1 * (g1 - g0) / (f1 - f0);
        if !g2.is_finite() || g2 <= lo || g2 >= hi {
            g2 = 0.5 * (lo + hi);
        }
        if (g2 - g1).abs() < 1e-15 {
            break;
        }
        let f2 = f(g2);
        shrink(g2, f2, &mut lo, &mut hi);
        (g0, f0, g1, f1) = (g1, f1, g2, f2);
        if f2.abs() < best.1.abs() {
            best = (g2, f2);
        }
    }
    Ok(finish(best.0, iterations, false))
}
