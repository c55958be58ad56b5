use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::descriptor::DescriptorSet;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Cap on sampled cross-cluster pairs.
pub const DEFAULT_MAX_NON_MATCHING: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum NonMatching {
    Explicit { pairs: Vec<(String, String)> },
    /// Every pair of images in different clusters, where clusters are the
    /// connected components of the matching-pair graph (an image with no
    /// matching pair is a cluster of its own). Subsampled with a seeded RNG
    /// when there are more than `max_pairs`.
    CrossCluster { max_pairs: usize, seed: u64 },
}

impl Default for NonMatching {
    fn default() -> Self {
        NonMatching::CrossCluster {
            max_pairs: DEFAULT_MAX_NON_MATCHING,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PairList {
    pub matching: Vec<(String, String)>,
    pub non_matching: NonMatching,
}

/// Pairs as row indices into a [`DescriptorSet`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedPairs {
    pub matching: Vec<(usize, usize)>,
    pub non_matching: Vec<(usize, usize)>,
}

impl PairList {
    pub fn new(matching: Vec<(String, String)>, non_matching: NonMatching) -> Self {
        Self {
            matching,
            non_matching,
        }
    }

    /// Reads pairs from CSV files with rows `id_a,id_b` (header optional).
    /// Without a non-matching file, cross-cluster sampling is used.
    pub fn from_csv(
        matching: impl AsRef<Path>,
        non_matching: Option<&Path>,
        seed: u64,
    ) -> Result<Self> {
        let non_matching = match non_matching {
            Some(p) => NonMatching::Explicit {
                pairs: read_pair_csv(p)?,
            },
            None => NonMatching::CrossCluster {
                max_pairs: DEFAULT_MAX_NON_MATCHING,
                seed,
            },
        };
        Ok(Self::new(read_pair_csv(matching.as_ref())?, non_matching))
    }

    pub fn resolve(&self, set: &DescriptorSet) -> Result<IndexedPairs> {
        let index = |a: &str, b: &str, kind: &str| -> Result<(usize, usize)> {
            if a == b {
                return Err(Error::invalid(format!("{kind} pair ({a}, {a}) pairs an image with itself")));
            }
            let find = |id: &str| {
                set.position(id)
                    .ok_or_else(|| Error::invalid(format!("{kind} pair references unknown id `{id}`")))
            };
            Ok((find(a)?, find(b)?))
        };
        let matching = self
            .matching
            .iter()
            .map(|(a, b)| index(a, b, "matching"))
            .collect::<Result<Vec<_>>>()?;
        let non_matching = match &self.non_matching {
            NonMatching::Explicit { pairs } => pairs
                .iter()
                .map(|(a, b)| index(a, b, "non-matching"))
                .collect::<Result<Vec<_>>>()?,
            NonMatching::CrossCluster { max_pairs, seed } => {
                cross_cluster_pairs(&clusters(set.len(), &matching), *max_pairs, *seed)
            }
        };
        Ok(IndexedPairs {
            matching,
            non_matching,
        })
    }
}

pub fn read_pair_csv(path: &Path) -> Result<Vec<(String, String)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| decode(path, e))?;
    let mut pairs = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| decode(path, e))?;
        if record.len() < 2 {
            return Err(Error::Decode {
                path: path.into(),
                message: format!("line {}: expected two ids", row + 1),
            });
        }
        if row == 0 && is_header(&record[0], &record[1]) {
            continue;
        }
        pairs.push((record[0].to_string(), record[1].to_string()));
    }
    Ok(pairs)
}

fn is_header(a: &str, b: &str) -> bool {
    matches!(
        (a, b),
        ("a", "b") | ("id_a", "id_b") | ("anchor", "positive")
            | ("anchor", "negative")
            | ("anchor_id", "positive_id")
            | ("anchor_id", "negative_id")
            | ("query", "positive")
    )
}

fn decode(path: &Path, e: csv::Error) -> Error {
    Error::Decode {
        path: path.into(),
        message: e.to_string(),
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Cluster label per row: the smallest row index in its component.
pub(crate) fn clusters(n: usize, matching: &[(usize, usize)]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    for &(a, b) in matching {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            parent[hi] = lo;
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

fn cross_cluster_pairs(label: &[usize], max_pairs: usize, seed: u64) -> Vec<(usize, usize)> {
    let n = label.len();
    let mut sizes = vec![0usize; n];
    for &l in label {
        sizes[l] += 1;
    }
    let within: usize = sizes.iter().map(|&s| s * s.saturating_sub(1) / 2).sum();
    let total = n * n.saturating_sub(1) / 2 - within;
    let mut rng = Rng::new(seed);

    if total <= max_pairs.saturating_mul(2) {
        let mut all = Vec::with_capacity(total);
        for i in 0..n {
            for j in i + 1..n {
                if label[i] != label[j] {
                    all.push((i, j));
                }
            }
        }
        if total > max_pairs {
            // Partial Fisher-Yates: the first max_pairs slots are a uniform sample.
            for k in 0..max_pairs {
                let r = k + rng.below(total - k);
                all.swap(k, r);
            }
            all.truncate(max_pairs);
        }
        return all;
    }

    let mut seen = HashSet::with_capacity(max_pairs);
    let mut out = Vec::with_capacity(max_pairs);
    while out.len() < max_pairs {
        let (i, j) = (rng.below(n), rng.below(n));
        if label[i] == label[j] {
            continue;
        }
        let pair = (i.min(j), i.max(j));
        if seen.insert(pair) {
            out.push(pair);
        }
    }
    out
}
