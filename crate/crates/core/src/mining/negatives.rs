use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::descriptor::{dot, Descriptor, DescriptorSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeSelection {
    pub ids: Vec<String>,
    pub similarities: Vec<f64>,
    /// Fewer than the requested number of eligible clusters existed.
    pub short: bool,
}

/// The `n` most similar pool entries outside the anchor's cluster, taking
/// at most one per cluster. Ties go to the smaller id.
pub fn mine_hard_negatives(
    anchor: &Descriptor,
    pool: &DescriptorSet,
    cluster_of: &HashMap<String, String>,
    n: usize,
) -> Result<NegativeSelection> {
    if pool.dim() != anchor.dim() {
        return Err(Error::invalid(format!(
            "anchor has dimension {}, pool has {}",
            anchor.dim(),
            pool.dim()
        )));
    }
    let cluster = |id: &str| {
        cluster_of
            .get(id)
            .map(String::as_str)
            .ok_or_else(|| Error::invalid(format!("no cluster for `{id}`")))
    };
    let own = cluster(anchor.id())?;
    let mut scored = Vec::with_capacity(pool.len());
    for d in pool {
        let c = cluster(d.id())?;
        if c != own && d.id() != anchor.id() {
            scored.push((dot(anchor.values(), d.values()), d.id(), c));
        }
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    let mut used = HashSet::new();
    let (mut ids, mut similarities) = (Vec::new(), Vec::new());
    for (s, id, c) in scored {
        if ids.len() == n {
            break;
        }
        if used.insert(c) {
            ids.push(id.to_string());
            similarities.push(s);
        }
    }
    Ok(NegativeSelection {
        short: ids.len() < n,
        ids,
        similarities,
    })
}
