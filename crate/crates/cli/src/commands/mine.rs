use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};

use lumen::descriptor::read_descriptors;
use lumen::mining::{
    ball_approx, candidate_positives, delta_histogram, load_lightness_csv, load_sfm_model, mine_hard_negatives,
    select_hard_positives, write_pairs_csv, MiningReport, MiningThresholds, NegativeSelection,
};
use lumen::photometric::image_lightness;
use lumen::raster::read_image;
use lumen::whitening::read_pair_csv;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{MineNegativesArgs, MinePositivesArgs};
use crate::error::{CliError, CliResult};
use crate::files::{list_images, stem, write_json};
use crate::Outcome;

fn report_path(report: &Option<PathBuf>, output: &Path) -> PathBuf {
    report.clone().unwrap_or_else(|| output.with_extension("json"))
}

pub(crate) fn mine_positives(a: &MinePositivesArgs) -> CliResult<Outcome> {
    if !(0.0..1.0).contains(&a.iou) {
        return Err(CliError::Usage(format!("--iou must lie in [0, 1), got {}", a.iou)));
    }
    if !(0.0..=180.0).contains(&a.angle) {
        return Err(CliError::Usage(format!("--angle must lie in [0, 180], got {}", a.angle)));
    }
    if a.k == 0 {
        return Err(CliError::Usage("-k must be positive".into()));
    }
    let records = load_sfm_model(&a.model)?;
    let thresholds = MiningThresholds {
        iou: a.iou,
        angle_deg: a.angle,
    };
    let mut outcome = Outcome::default();
    let without_ball: Vec<&str> = records
        .iter()
        .filter(|r| ball_approx(&r.points).is_err())
        .map(|r| r.id.as_str())
        .collect();
    if !without_ball.is_empty() {
        outcome.warn(format!(
            "{} record(s) have too few points for a ball and were skipped (first: {})",
            without_ball.len(),
            without_ball[0]
        ));
    }
    let candidates = candidate_positives(&records, &thresholds)?;

    let needed: BTreeSet<&str> = candidates
        .iter()
        .flat_map(|c| [c.id_a.as_str(), c.id_b.as_str()])
        .collect();
    let mut lightness: HashMap<String, f64> = records
        .iter()
        .filter_map(|r| r.trimmed_lightness.map(|l| (r.id.clone(), l)))
        .collect();
    if let Some(path) = &a.lightness {
        lightness.extend(load_lightness_csv(path)?);
    }
    let missing: Vec<&str> = needed.iter().copied().filter(|id| !lightness.contains_key(*id)).collect();
    if !missing.is_empty() {
        let files: HashMap<String, PathBuf> = match &a.images {
            Some(dir) => list_images(dir)?.into_iter().map(|p| (stem(&p), p)).collect(),
            None => HashMap::new(),
        };
        let computed: Vec<CliResult<f64>> = missing
            .par_iter()
            .map(|id| {
                let path = files
                    .get(*id)
                    .ok_or_else(|| CliError::Usage("no lightness value and no image".into()))?;
                Ok(image_lightness(&read_image(path)?)?)
            })
            .collect();
        for (id, r) in missing.iter().zip(computed) {
            match r {
                Ok(l) => {
                    lightness.insert(id.to_string(), l);
                }
                Err(e) => outcome.fail(id.to_string(), e),
            }
        }
    }
    let usable: Vec<_> = candidates
        .iter()
        .filter(|c| lightness.contains_key(&c.id_a) && lightness.contains_key(&c.id_b))
        .cloned()
        .collect();
    let selected = select_hard_positives(&usable, &lightness, a.k)?;
    write_pairs_csv(
        &a.output,
        ("anchor_id", "positive_id"),
        selected.iter().map(|p| (p.anchor_id.as_str(), p.positive_id.as_str())),
    )?;
    let report = MiningReport {
        thresholds,
        k: a.k,
        records: records.len(),
        records_without_ball: without_ball.len(),
        candidates: candidates.len(),
        selected: selected.len(),
        delta_histogram: delta_histogram(&selected),
    };
    write_json(&report_path(&a.report, &a.output), &report)?;
    Ok(outcome)
}

#[derive(Serialize)]
struct NegativeReport {
    anchors: usize,
    requested: usize,
    rows: usize,
    /// Anchors for which fewer clusters than requested were available.
    short: Vec<String>,
}

pub(crate) fn mine_negatives(a: &MineNegativesArgs) -> CliResult<Outcome> {
    if a.n == 0 {
        return Err(CliError::Usage("-n must be positive".into()));
    }
    let records = load_sfm_model(&a.model)?;
    let cluster_of: HashMap<String, String> = records.into_iter().map(|r| (r.id, r.cluster)).collect();
    let pool = read_descriptors(&a.descriptors)?;
    if let Some(id) = pool.ids().find(|id| !cluster_of.contains_key(*id)) {
        return Err(CliError::config(&a.descriptors, format!("descriptor `{id}` is not in the model")));
    }
    let anchors: Vec<String> = match &a.anchors {
        Some(path) => {
            let mut seen = HashSet::new();
            read_pair_csv(path)?
                .into_iter()
                .map(|(anchor, _)| anchor)
                .filter(|id| seen.insert(id.clone()))
                .collect()
        }
        None => pool.ids().map(str::to_string).collect(),
    };
    let results: Vec<CliResult<NegativeSelection>> = anchors
        .par_iter()
        .map(|id| {
            let d = pool
                .get(id)
                .ok_or_else(|| CliError::Usage("anchor has no descriptor in the pool".into()))?;
            Ok(mine_hard_negatives(d, &pool, &cluster_of, a.n)?)
        })
        .collect();

    let mut outcome = Outcome::default();
    let csv_err = |e: csv::Error| CliError::config(&a.output, e.to_string());
    let mut w = csv::Writer::from_path(&a.output).map_err(csv_err)?;
    w.write_record(["anchor_id", "negative_id", "similarity"]).map_err(csv_err)?;
    let mut report = NegativeReport {
        anchors: anchors.len(),
        requested: a.n,
        rows: 0,
        short: Vec::new(),
    };
    for (anchor, r) in anchors.iter().zip(results) {
        match r {
            Ok(sel) => {
                for (neg, s) in sel.ids.iter().zip(&sel.similarities) {
                    w.write_record([anchor.as_str(), neg.as_str(), &s.to_string()])
                        .map_err(csv_err)?;
                    report.rows += 1;
                }
                if sel.short {
                    report.short.push(anchor.clone());
                }
            }
            Err(e) => outcome.fail(anchor.clone(), e),
        }
    }
    w.flush().map_err(|e| CliError::io(&a.output, e))?;
    if !report.short.is_empty() {
        outcome.warn(format!(
            "{} anchor(s) have fewer than {} eligible clusters",
            report.short.len(),
            a.n
        ));
    }
    write_json(&report_path(&a.report, &a.output), &report)?;
    Ok(outcome)
}
