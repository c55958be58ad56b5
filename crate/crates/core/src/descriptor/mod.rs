//! Global descriptors: containers, the built-in gradient-histogram
//! extractor, concatenation ensembles, the contrastive loss value, and the
//! DSC1 file format.

mod dsc1;
mod toy;

pub use dsc1::{decode_descriptors, encode_descriptors, read_descriptors, write_descriptors, DSC1_MAGIC};
pub use toy::{extract_toy_descriptor, ToyDescriptorConfig, DEFAULT_MIN_MAGNITUDE};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on unit norm after normalisation.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    id: String,
    values: Vec<f32>,
}

pub(crate) fn check_id(id: &str) -> Result<()> {
    if id.is_empty() || id.contains(['\n', '\r']) {
        return Err(Error::invalid(format!("invalid descriptor id {id:?}")));
    }
    Ok(())
}

impl Descriptor {
    pub fn new(id: impl Into<String>, values: Vec<f32>) -> Result<Self> {
        let id = id.into();
        check_id(&id)?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("descriptor `{id}` has non-finite entry {i}")));
        }
        Ok(Self { id, values })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|&v| f64::from(v).powi(2)).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Descriptor) -> f64 {
        dot(&self.values, &other.values)
    }

    pub fn with_id(self, id: impl Into<String>) -> Result<Self> {
        Descriptor::new(id, self.values)
    }
}

#[inline]
pub fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum()
}

pub fn euclidean_distance(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (f64::from(x) - f64::from(y)).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn l2_normalize(d: &Descriptor) -> Result<Descriptor> {
    let norm = d.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::invalid(format!("descriptor `{}` has zero norm", d.id)));
    }
    Ok(Descriptor {
        id: d.id.clone(),
        values: d.values.iter().map(|&v| (f64::from(v) / norm) as f32).collect(),
    })
}

/// `a` followed by `b`, not re-normalised.
pub fn concat(a: &Descriptor, b: &Descriptor) -> Result<Descriptor> {
    if a.id != b.id {
        return Err(Error::invalid(format!(
            "cannot concatenate descriptors of `{}` and `{}`",
            a.id, b.id
        )));
    }
    let mut values = Vec::with_capacity(a.dim() + b.dim());
    values.extend_from_slice(&a.values);
    values.extend_from_slice(&b.values);
    Ok(Descriptor {
        id: a.id.clone(),
        values,
    })
}

/// Ordered descriptors of one dimension with unique ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DescriptorSet {
    dim: usize,
    entries: Vec<Descriptor>,
    index: HashMap<String, usize>,
}

impl DescriptorSet {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn from_descriptors(dim: usize, descriptors: impl IntoIterator<Item = Descriptor>) -> Result<Self> {
        let mut set = Self::new(dim);
        for d in descriptors {
            set.push(d)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, d: Descriptor) -> Result<()> {
        if d.dim() != self.dim {
            return Err(Error::invalid(format!(
                "descriptor `{}` has dimension {}, set expects {}",
                d.id,
                d.dim(),
                self.dim
            )));
        }
        if self.index.contains_key(&d.id) {
            return Err(Error::invalid(format!("duplicate descriptor id `{}`", d.id)));
        }
        self.index.insert(d.id.clone(), self.entries.len());
        self.entries.push(d);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Descriptor> {
        self.index.get(id).map(|&i| &self.entries[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn entries(&self) -> &[Descriptor] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Descriptor> {
        self.entries.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|d| d.id.as_str())
    }

    /// Requires every id to be present.
    pub fn subset<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Result<DescriptorSet> {
        let mut out = DescriptorSet::new(self.dim);
        for id in ids {
            let d = self
                .get(id)
                .ok_or_else(|| Error::invalid(format!("unknown descriptor id `{id}`")))?;
            out.push(d.clone())?;
        }
        Ok(out)
    }

    pub fn normalized(&self) -> Result<DescriptorSet> {
        DescriptorSet::from_descriptors(self.dim, self.entries.iter().map(l2_normalize).collect::<Result<Vec<_>>>()?)
    }
}

impl<'a> IntoIterator for &'a DescriptorSet {
    type Item = &'a Descriptor;
    type IntoIter = std::slice::Iter<'a, Descriptor>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContrastiveConfig {
    pub margin: f64,
}

impl Default for ContrastiveConfig {
    fn default() -> Self {
        Self { margin: 0.75 }
    }
}

/// Matching pairs cost `0.5 d^2`; non-matching pairs cost
/// `0.5 max(0, margin - d)^2`, with `d` the Euclidean distance.
pub fn contrastive_loss(
    d1: &Descriptor,
    d2: &Descriptor,
    is_match: bool,
    cfg: &ContrastiveConfig,
) -> Result<f64> {
    if d1.dim() != d2.dim() {
        return Err(Error::invalid(format!(
            "descriptor dimensions differ: {} vs {}",
            d1.dim(),
            d2.dim()
        )));
    }
    if !(cfg.margin > 0.0) {
        return Err(Error::invalid(format!("margin must be positive, got {}", cfg.margin)));
    }
    let d = euclidean_distance(&d1.values, &d2.values);
    Ok(if is_match {
        0.5 * d * d
    } else {
        0.5 * (cfg.margin - d).max(0.0).powi(2)
    })
}
