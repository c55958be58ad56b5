//! Exhaustive cosine ranking, average precision with junk handling, and the
//! evaluation protocols built on them.

mod protocol;
mod report;
mod tokyo;

pub use protocol::{load_protocol, save_protocol, ProtocolQuery, RetrievalProtocol};
pub use report::{EvaluationTable, MethodRow};
pub use tokyo::{
    build_tokyo_protocol, condition_breakdown, load_tokyo_meta, tokyo_pair_protocol, Condition, ConditionPair,
    TokyoImageMeta, BREAKDOWN_PAIRS,
};

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptor::{dot, Descriptor, DescriptorSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub query_id: String,
    pub ids: Vec<String>,
    pub scores: Vec<f64>,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.ids.iter().map(String::as_str).zip(self.scores.iter().copied())
    }
}

fn order(scores: &[f64], ids: &[&str]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then_with(|| ids[a].cmp(ids[b])));
    idx
}

/// Database ordered by descending dot product (cosine similarity for unit
/// vectors), ties by ascending id.
pub fn rank(query: &Descriptor, db: &DescriptorSet) -> Result<RankedList> {
    let entries: Vec<&Descriptor> = db.iter().collect();
    rank_among(query, &entries)
}

fn rank_among(query: &Descriptor, db: &[&Descriptor]) -> Result<RankedList> {
    if let Some(d) = db.iter().find(|d| d.dim() != query.dim()) {
        return Err(Error::invalid(format!(
            "query `{}` has dimension {}, database entry `{}` has {}",
            query.id(),
            query.dim(),
            d.id(),
            d.dim()
        )));
    }
    let scores: Vec<f64> = db.iter().map(|d| dot(query.values(), d.values())).collect();
    let ids: Vec<&str> = db.iter().map(|d| d.id()).collect();
    let idx = order(&scores, &ids);
    Ok(RankedList {
        query_id: query.id().to_string(),
        ids: idx.iter().map(|&i| ids[i].to_string()).collect(),
        scores: idx.iter().map(|&i| scores[i]).collect(),
    })
}

/// Un-interpolated AP: the mean of precision at the rank of each positive,
/// after dropping junk ids and the query itself from the ranking. `None`
/// when no positive remains.
pub fn average_precision(
    ranking: &RankedList,
    positives: &HashSet<&str>,
    junk: &HashSet<&str>,
) -> Option<f64> {
    let query = ranking.query_id.as_str();
    let n_pos = positives.iter().filter(|&&p| p != query && !junk.contains(p)).count();
    if n_pos == 0 {
        return None;
    }
    let (mut rank, mut hits, mut sum) = (0usize, 0usize, 0.0);
    for id in &ranking.ids {
        let id = id.as_str();
        if id == query || junk.contains(id) {
            continue;
        }
        rank += 1;
        if positives.contains(id) {
            hits += 1;
            sum += hits as f64 / rank as f64;
            if hits == n_pos {
                break;
            }
        }
    }
    Some(sum / n_pos as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryAp {
    pub query_id: String,
    pub ap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapReport {
    /// mAP in percent, rounded to one decimal.
    pub map: f64,
    /// Unrounded mean AP as a fraction.
    pub mean_ap: f64,
    pub evaluated: usize,
    pub per_query: Vec<QueryAp>,
    /// Queries with no positive left after filtering.
    pub skipped: Vec<String>,
}

pub fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

impl MapReport {
    fn from_results(results: Vec<(String, Option<f64>)>) -> Self {
        let mut per_query = Vec::new();
        let mut skipped = Vec::new();
        for (id, ap) in results {
            match ap {
                Some(ap) => per_query.push(QueryAp { query_id: id, ap }),
                None => skipped.push(id),
            }
        }
        let mut by_id: Vec<&QueryAp> = per_query.iter().collect();
        by_id.sort_by(|a, b| a.query_id.cmp(&b.query_id));
        let mean_ap = if by_id.is_empty() {
            0.0
        } else {
            by_id.iter().map(|q| q.ap).sum::<f64>() / by_id.len() as f64
        };
        Self {
            map: round1(100.0 * mean_ap),
            mean_ap,
            evaluated: per_query.len(),
            per_query,
            skipped,
        }
    }
}

/// Ranks every protocol query against the protocol database and averages AP
/// over queries that have positives.
pub fn mean_ap(protocol: &RetrievalProtocol, db: &DescriptorSet, queries: &DescriptorSet) -> Result<MapReport> {
    let database: Vec<&Descriptor> = protocol
        .database
        .iter()
        .map(|id| {
            db.get(id)
                .ok_or_else(|| Error::Protocol(format!("database id `{id}` has no descriptor")))
        })
        .collect::<Result<_>>()?;
    let query_descs: Vec<&Descriptor> = protocol
        .queries
        .iter()
        .map(|q| {
            queries
                .get(&q.id)
                .ok_or_else(|| Error::Protocol(format!("query id `{}` has no descriptor", q.id)))
        })
        .collect::<Result<_>>()?;
    let results = protocol
        .queries
        .par_iter()
        .zip(query_descs.par_iter())
        .map(|(q, d)| {
            let ranking = rank_among(d, &database)?;
            let pos: HashSet<&str> = q.positives.iter().map(String::as_str).collect();
            let junk: HashSet<&str> = q.junk.iter().map(String::as_str).collect();
            Ok((q.id.clone(), average_precision(&ranking, &pos, &junk)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MapReport::from_results(results))
}
