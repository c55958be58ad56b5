//! Training-pair mining from structure-from-motion output: geometrically
//! overlapping image pairs ranked by illumination difference, hard
//! negatives from descriptor space, and mixing of pair streams.

mod geometry;
mod mix;
mod model;
mod negatives;

pub use geometry::{axis_angle, ball_approx, intersection_volume, norm3, sphere_iou, Ball, Vec3};
pub use mix::{mix_datasets, MixMode, Source};
pub use model::{load_lightness_csv, load_sfm_model, parse_sfm_model, write_pairs_csv, SfmImageRecord};
pub use negatives::{mine_hard_negatives, NegativeSelection};

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.55;
pub const DEFAULT_ANGLE_THRESHOLD_DEG: f64 = 45.0;
pub const DEFAULT_POSITIVE_PAIRS: usize = 20_000;
pub const DEFAULT_NEGATIVES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningThresholds {
    /// Pairs need IoU strictly above this.
    pub iou: f64,
    /// Pairs need an axis angle at most this, in degrees.
    pub angle_deg: f64,
}

impl Default for MiningThresholds {
    fn default() -> Self {
        Self {
            iou: DEFAULT_IOU_THRESHOLD,
            angle_deg: DEFAULT_ANGLE_THRESHOLD_DEG,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id_a: String,
    pub id_b: String,
    pub iou: f64,
    pub angle_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivePair {
    /// The darker image.
    pub anchor_id: String,
    pub positive_id: String,
    pub iou: f64,
    pub axis_angle_deg: f64,
    pub delta_lightness: f64,
}

/// Every same-cluster pair (in record order, `a` before `b`) passing both
/// thresholds. Records whose points do not define a ball are skipped.
pub fn candidate_positives(records: &[SfmImageRecord], thr: &MiningThresholds) -> Result<Vec<Candidate>> {
    let balls: Vec<Option<Ball>> = records.iter().map(|r| ball_approx(&r.points).ok()).collect();
    let per_anchor: Vec<Vec<Candidate>> = (0..records.len())
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            let Some(bi) = &balls[i] else { return Ok(out) };
            for j in i + 1..records.len() {
                let Some(bj) = &balls[j] else { continue };
                if records[i].cluster != records[j].cluster {
                    continue;
                }
                let iou = sphere_iou(bi, bj);
                if iou <= thr.iou {
                    continue;
                }
                let angle_deg = axis_angle(records[i].optical_axis, records[j].optical_axis)?;
                if angle_deg <= thr.angle_deg {
                    out.push(Candidate {
                        id_a: records[i].id.clone(),
                        id_b: records[j].id.clone(),
                        iou,
                        angle_deg,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_anchor.into_iter().flatten().collect())
}

/// The `k` candidates with the largest lightness difference, anchor darker.
/// Ties go to the lexicographically smaller (min id, max id) pair.
pub fn select_hard_positives(
    candidates: &[Candidate],
    lightness: &HashMap<String, f64>,
    k: usize,
) -> Result<Vec<PositivePair>> {
    if k == 0 {
        return Err(Error::invalid("number of positive pairs must be positive"));
    }
    let light = |id: &str| {
        lightness
            .get(id)
            .copied()
            .ok_or_else(|| Error::invalid(format!("no trimmed lightness for `{id}`")))
    };
    let mut pairs = candidates
        .iter()
        .map(|c| {
            let (la, lb) = (light(&c.id_a)?, light(&c.id_b)?);
            let a_darker = la < lb || (la == lb && c.id_a <= c.id_b);
            let (anchor, positive) = if a_darker { (&c.id_a, &c.id_b) } else { (&c.id_b, &c.id_a) };
            Ok(PositivePair {
                anchor_id: anchor.clone(),
                positive_id: positive.clone(),
                iou: c.iou,
                axis_angle_deg: c.angle_deg,
                delta_lightness: (la - lb).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let key = |p: &PositivePair| {
        if p.anchor_id <= p.positive_id {
            (p.anchor_id.clone(), p.positive_id.clone())
        } else {
            (p.positive_id.clone(), p.anchor_id.clone())
        }
    };
    pairs.sort_by(|x, y| {
        y.delta_lightness
            .total_cmp(&x.delta_lightness)
            .then_with(|| key(x).cmp(&key(y)))
    });
    pairs.truncate(k);
    Ok(pairs)
}

/// Counts of `delta_lightness` in bins of width 10 over `[0, 100]`; the
/// last bin is closed.
pub fn delta_histogram(pairs: &[PositivePair]) -> [usize; 10] {
    let mut h = [0usize; 10];
    for p in pairs {
        let b = ((p.delta_lightness / 10.0) as usize).min(9);
        h[b] += 1;
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningReport {
    pub thresholds: MiningThresholds,
    pub k: usize,
    pub records: usize,
    pub records_without_ball: usize,
    pub candidates: usize,
    pub selected: usize,
    /// Bins of width 10 lightness units.
    pub delta_histogram: [usize; 10],
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    pub(crate) fn record(id: &str, cluster: &str, centre: Vec3, spread: f64, axis: Vec3, lightness: f64) -> SfmImageRecord {
        let points = (0..6)
            .map(|i| {
                let mut p = centre;
                p[i % 3] += if i < 3 { spread } else { -spread };
                p
            })
            .collect();
        SfmImageRecord {
            id: id.into(),
            cluster: cluster.into(),
            camera_center: [0.0; 3],
            optical_axis: axis,
            points,
            trimmed_lightness: Some(lightness),
        }
    }

    const Z: Vec3 = [0.0, 0.0, 1.0];

    #[test]
    fn identical_records_make_one_pair() {
        let r = vec![record("a", "c", [0.0; 3], 1.0, Z, 10.0), record("b", "c", [0.0; 3], 1.0, Z, 50.0)];
        let c = candidate_positives(&r, &MiningThresholds::default()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].iou, c[0].angle_deg), (1.0, 0.0));
        let far = vec![record("a", "c", [0.0; 3], 1.0, Z, 10.0), record("b", "c", [9.0, 0.0, 0.0], 1.0, Z, 50.0)];
        assert!(candidate_positives(&far, &MiningThresholds::default()).unwrap().is_empty());
    }

    #[test]
    fn candidates_match_brute_force() {
        let mut rng = Rng::new(4);
        let records: Vec<SfmImageRecord> = (0..60)
            .map(|i| {
                let a = rng.uniform(0.0, 1.2);
                let axis = [a.sin(), 0.0, a.cos()];
                let c = [rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0), 0.0];
                record(&format!("r{i:02}"), if i % 4 == 0 { "x" } else { "y" }, c, rng.uniform(0.8, 1.5), axis, 0.0)
            })
            .collect();
        let thr = MiningThresholds::default();
        let got = candidate_positives(&records, &thr).unwrap();
        let mut expect = Vec::new();
        for i in 0..records.len() {
            for j in i + 1..records.len() {
                let (a, b) = (&records[i], &records[j]);
                if a.cluster != b.cluster {
                    continue;
                }
                let (ba, bb) = (ball_approx(&a.points).unwrap(), ball_approx(&b.points).unwrap());
                let dot: f64 = (0..3).map(|k| a.optical_axis[k] * b.optical_axis[k]).sum();
                if sphere_iou(&ba, &bb) > 0.55 && dot.clamp(-1.0, 1.0).acos().to_degrees() <= 45.0 {
                    expect.push((a.id.clone(), b.id.clone()));
                }
            }
        }
        assert!(!expect.is_empty());
        assert_eq!(got.iter().map(|c| (c.id_a.clone(), c.id_b.clone())).collect::<Vec<_>>(), expect);
    }

    fn cand(a: &str, b: &str) -> Candidate {
        Candidate {
            id_a: a.into(),
            id_b: b.into(),
            iou: 0.9,
            angle_deg: 1.0,
        }
    }

    #[test]
    fn hard_positive_selection() {
        let light: HashMap<String, f64> =
            [("a", 0.0), ("b", 30.0), ("c", 40.0), ("d", 50.0), ("e", 70.0), ("f", 20.0)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect();
        let cands = vec![cand("a", "b"), cand("c", "d"), cand("a", "d")];
        let top = select_hard_positives(&cands, &light, 2).unwrap();
        assert_eq!(top.iter().map(|p| p.delta_lightness).collect::<Vec<_>>(), vec![50.0, 30.0]);
        assert_eq!(select_hard_positives(&cands, &light, 10).unwrap().len(), 3);
        let p = &select_hard_positives(&[cand("e", "f")], &light, 1).unwrap()[0];
        assert_eq!((p.anchor_id.as_str(), p.positive_id.as_str()), ("f", "e"));
        assert!(select_hard_positives(&cands, &light, 0).is_err());
        assert!(select_hard_positives(&[cand("a", "zz")], &light, 1).is_err());
    }
}
