//! The day/sunset/night place-recognition protocol: three viewing
//! directions per location, each captured under three conditions.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{mean_ap, MapReport, ProtocolQuery, RetrievalProtocol};
use crate::descriptor::DescriptorSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Day,
    Sunset,
    Night,
}

impl Condition {
    pub fn letter(self) -> char {
        match self {
            Condition::Day => 'D',
            Condition::Sunset => 'S',
            Condition::Night => 'N',
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "day" | "d" => Some(Condition::Day),
            "sunset" | "s" => Some(Condition::Sunset),
            "night" | "n" => Some(Condition::Night),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokyoImageMeta {
    pub image_id: String,
    pub location: u32,
    pub direction: u8,
    pub condition: Condition,
}

/// Query condition to retrieved condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionPair {
    pub query: Condition,
    pub retrieved: Condition,
}

impl fmt::Display for ConditionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.query.letter(), self.retrieved.letter())
    }
}

const fn pair(query: Condition, retrieved: Condition) -> ConditionPair {
    ConditionPair { query, retrieved }
}

/// Column order of the per-condition table.
pub const BREAKDOWN_PAIRS: [ConditionPair; 6] = [
    pair(Condition::Day, Condition::Sunset),
    pair(Condition::Sunset, Condition::Day),
    pair(Condition::Sunset, Condition::Night),
    pair(Condition::Night, Condition::Sunset),
    pair(Condition::Day, Condition::Night),
    pair(Condition::Night, Condition::Day),
];

#[derive(Debug, Deserialize)]
struct MetaRow {
    image_id: String,
    location: u32,
    direction: u8,
    condition: String,
}

/// Reads `image_id,location,direction,condition` CSV with a header row.
pub fn load_tokyo_meta(path: impl AsRef<Path>) -> Result<Vec<TokyoImageMeta>> {
    let path = path.as_ref();
    let decode = |message: String| Error::Decode {
        path: path.into(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| decode(e.to_string()))?;
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<MetaRow>().enumerate() {
        let row = row.map_err(|e| decode(e.to_string()))?;
        let condition = Condition::parse(&row.condition)
            .ok_or_else(|| decode(format!("record {}: unknown condition `{}`", i + 1, row.condition)))?;
        out.push(TokyoImageMeta {
            image_id: row.image_id,
            location: row.location,
            direction: row.direction,
            condition,
        });
    }
    check_meta(&out)?;
    Ok(out)
}

fn check_meta(meta: &[TokyoImageMeta]) -> Result<()> {
    let mut keys = HashSet::new();
    let mut ids = HashSet::new();
    for m in meta {
        if m.direction > 2 {
            return Err(Error::invalid(format!("`{}`: direction {} outside 0..=2", m.image_id, m.direction)));
        }
        if !keys.insert((m.location, m.direction, m.condition)) {
            return Err(Error::invalid(format!(
                "`{}` duplicates location {}, direction {}, condition {:?}",
                m.image_id, m.location, m.direction, m.condition
            )));
        }
        if !ids.insert(m.image_id.as_str()) {
            return Err(Error::invalid(format!("duplicate image id `{}`", m.image_id)));
        }
    }
    Ok(())
}

/// Builds a protocol over all images where queries are restricted by
/// `query_filter` and an image at the query's location counts as positive
/// when `positive` holds; other images at that location are junk.
fn protocol_with(
    meta: &[TokyoImageMeta],
    query_filter: impl Fn(&TokyoImageMeta) -> bool,
    positive: impl Fn(&TokyoImageMeta, &TokyoImageMeta) -> bool,
) -> Result<RetrievalProtocol> {
    check_meta(meta)?;
    let mut by_location: BTreeMap<u32, Vec<&TokyoImageMeta>> = BTreeMap::new();
    for m in meta {
        by_location.entry(m.location).or_default().push(m);
    }
    let queries = meta
        .iter()
        .filter(|q| query_filter(q))
        .map(|q| {
            let (mut positives, mut junk) = (Vec::new(), Vec::new());
            for m in &by_location[&q.location] {
                if m.image_id == q.image_id {
                    continue;
                }
                if positive(q, m) {
                    positives.push(m.image_id.clone());
                } else {
                    junk.push(m.image_id.clone());
                }
            }
            ProtocolQuery {
                id: q.image_id.clone(),
                positives,
                junk,
            }
        })
        .collect();
    RetrievalProtocol::new(meta.iter().map(|m| m.image_id.clone()).collect(), queries)
}

/// Every image queries all others. Positives share location and direction
/// under a different condition; same location, other direction is junk.
pub fn build_tokyo_protocol(meta: &[TokyoImageMeta]) -> Result<RetrievalProtocol> {
    protocol_with(
        meta,
        |_| true,
        |q, m| m.direction == q.direction && m.condition != q.condition,
    )
}

/// Queries of condition `pair.query` only; positives are same-direction
/// images of condition `pair.retrieved`, the third condition is junk.
pub fn tokyo_pair_protocol(meta: &[TokyoImageMeta], pair: ConditionPair) -> Result<RetrievalProtocol> {
    if pair.query == pair.retrieved {
        return Err(Error::invalid("breakdown pair needs two different conditions"));
    }
    protocol_with(
        meta,
        |q| q.condition == pair.query,
        |q, m| m.direction == q.direction && m.condition == pair.retrieved,
    )
}

/// mAP for each pair of [`BREAKDOWN_PAIRS`], in that order.
pub fn condition_breakdown(
    meta: &[TokyoImageMeta],
    db: &DescriptorSet,
    queries: &DescriptorSet,
) -> Result<Vec<(ConditionPair, MapReport)>> {
    BREAKDOWN_PAIRS
        .iter()
        .map(|&p| Ok((p, mean_ap(&tokyo_pair_protocol(meta, p)?, db, queries)?)))
        .collect()
}
