//! The TOML pipeline config read by `lumen evaluate`.
//!
//! ```toml
//! seed = 0
//! output_dir = "report"
//!
//! [[dataset]]
//! name = "Tokyo"
//! tokyo_meta = "tokyo/meta.csv"   # or: protocol = "roxf.json"
//! images = "tokyo/images"         # needed by toy-descriptor methods
//!
//! [[method]]
//! name = "CLAHE"
//! normalisation = { method = "clahe", clip_limit = 4.0 }
//! descriptor = "toy"
//!
//! [[method]]
//! name = "GeM + Lw"
//! descriptor = { Tokyo = "tokyo_gem.dsc1" }
//! whitening = { transform = "gem.wht1" }
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use lumen::descriptor::ToyDescriptorConfig;
use lumen::photometric::{ClaheConfig, NormalisationMethod};
use serde::{Deserialize, Serialize};

use crate::args::reference_histogram;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    pub threads: Option<usize>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Write SVG breakdown charts.
    #[serde(default)]
    pub plot: bool,
    #[serde(rename = "dataset")]
    pub datasets: Vec<DatasetConfig>,
    #[serde(rename = "method")]
    pub methods: Vec<MethodConfig>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("report")
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    /// Protocol JSON.
    pub protocol: Option<PathBuf>,
    /// Tokyo-style metadata CSV; enables the day/night breakdown.
    pub tokyo_meta: Option<PathBuf>,
    pub images: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum NormalisationConfig {
    #[default]
    None,
    #[serde(rename = "histeq")]
    HistEq,
    Clahe(ClaheConfig),
    Gamma { target_mean: f64 },
    #[serde(rename = "histmatch")]
    HistMatch { reference: PathBuf },
}

impl NormalisationConfig {
    pub fn to_method(&self) -> CliResult<NormalisationMethod> {
        Ok(match self {
            NormalisationConfig::None => NormalisationMethod::None,
            NormalisationConfig::HistEq => NormalisationMethod::HistEq,
            NormalisationConfig::Clahe(c) => NormalisationMethod::Clahe(*c),
            NormalisationConfig::Gamma { target_mean } => NormalisationMethod::Gamma {
                target_mean: *target_mean,
            },
            NormalisationConfig::HistMatch { reference } => reference_histogram(reference)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum DescriptorFiles {
    Shared(PathBuf),
    /// Separate query descriptors, e.g. for cropped queries.
    Split { database: PathBuf, queries: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum DescriptorSource {
    /// Only `"toy"` is accepted.
    Named(String),
    /// DSC1 files per dataset name; datasets left out get no value.
    Files(BTreeMap<String, DescriptorFiles>),
}

impl Default for DescriptorSource {
    fn default() -> Self {
        DescriptorSource::Named("toy".into())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhiteningConfig {
    /// Existing WHT1 transform.
    pub transform: Option<PathBuf>,
    /// Matching pairs CSV to learn from, with `descriptors`.
    pub matching: Option<PathBuf>,
    pub non_matching: Option<PathBuf>,
    pub max_non_matching: Option<usize>,
    /// Training descriptors (DSC1).
    pub descriptors: Option<PathBuf>,
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub name: String,
    #[serde(default)]
    pub normalisation: NormalisationConfig,
    #[serde(default)]
    pub descriptor: DescriptorSource,
    #[serde(default)]
    pub toy: ToyDescriptorConfig,
    pub whitening: Option<WhiteningConfig>,
}

impl MethodConfig {
    pub fn is_toy(&self) -> bool {
        matches!(self.descriptor, DescriptorSource::Named(_))
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn resolve_opt(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(p) = p {
        resolve(base, p);
    }
}

impl PipelineConfig {
    pub fn parse(text: &str, origin: &Path) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::config(origin, e.to_string().trim_end()))
    }

    /// Reads, resolves paths against the file's directory and validates.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::parse(&text, path)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new("")));
        cfg.validate(path)?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.output_dir);
        for d in &mut self.datasets {
            resolve_opt(base, &mut d.protocol);
            resolve_opt(base, &mut d.tokyo_meta);
            resolve_opt(base, &mut d.images);
        }
        for m in &mut self.methods {
            if let NormalisationConfig::HistMatch { reference } = &mut m.normalisation {
                resolve(base, reference);
            }
            if let DescriptorSource::Files(files) = &mut m.descriptor {
                for f in files.values_mut() {
                    match f {
                        DescriptorFiles::Shared(p) => resolve(base, p),
                        DescriptorFiles::Split { database, queries } => {
                            resolve(base, database);
                            resolve(base, queries);
                        }
                    }
                }
            }
            if let Some(w) = &mut m.whitening {
                resolve_opt(base, &mut w.transform);
                resolve_opt(base, &mut w.matching);
                resolve_opt(base, &mut w.non_matching);
                resolve_opt(base, &mut w.descriptors);
            }
        }
    }

    pub fn validate(&self, origin: &Path) -> CliResult<()> {
        let err = |msg: String| Err(CliError::config(origin, msg));
        let exists = |what: String, p: &Path| {
            if p.exists() {
                Ok(())
            } else {
                Err(CliError::config(origin, format!("{what}: {} does not exist", p.display())))
            }
        };
        if self.threads == Some(0) {
            return err("threads must be positive".into());
        }
        if self.datasets.is_empty() {
            return err("no [[dataset]] entries".into());
        }
        if self.methods.is_empty() {
            return err("no [[method]] entries".into());
        }
        let mut names = HashSet::new();
        for (i, d) in self.datasets.iter().enumerate() {
            let at = format!("dataset[{i}]");
            if !names.insert(d.name.as_str()) {
                return err(format!("{at}.name: duplicate `{}`", d.name));
            }
            match (&d.protocol, &d.tokyo_meta) {
                (Some(p), None) => exists(format!("{at}.protocol"), p)?,
                (None, Some(p)) => exists(format!("{at}.tokyo_meta"), p)?,
                _ => return err(format!("{at}: set exactly one of `protocol` and `tokyo_meta`")),
            }
            if let Some(p) = &d.images {
                exists(format!("{at}.images"), p)?;
            }
        }
        let mut method_names = HashSet::new();
        for (i, m) in self.methods.iter().enumerate() {
            let at = format!("method[{i}]");
            if !method_names.insert(m.name.as_str()) {
                return err(format!("{at}.name: duplicate `{}`", m.name));
            }
            match &m.descriptor {
                DescriptorSource::Named(n) if n == "toy" => {
                    if let Some(d) = self.datasets.iter().find(|d| d.images.is_none()) {
                        return err(format!("{at}: toy descriptors need `images` for dataset `{}`", d.name));
                    }
                }
                DescriptorSource::Named(n) => {
                    return err(format!("{at}.descriptor: expected \"toy\" or a table of DSC1 files, got `{n}`"))
                }
                DescriptorSource::Files(files) => {
                    if m.normalisation != NormalisationConfig::None {
                        return err(format!("{at}.normalisation: only applies to toy descriptors"));
                    }
                    for (name, f) in files {
                        if !names.contains(name.as_str()) {
                            return err(format!("{at}.descriptor.{name}: no such dataset"));
                        }
                        match f {
                            DescriptorFiles::Shared(p) => exists(format!("{at}.descriptor.{name}"), p)?,
                            DescriptorFiles::Split { database, queries } => {
                                exists(format!("{at}.descriptor.{name}.database"), database)?;
                                exists(format!("{at}.descriptor.{name}.queries"), queries)?;
                            }
                        }
                    }
                }
            }
            if let NormalisationConfig::HistMatch { reference } = &m.normalisation {
                exists(format!("{at}.normalisation.reference"), reference)?;
            }
            if let Some(w) = &m.whitening {
                let at = format!("{at}.whitening");
                match (&w.transform, &w.matching, &w.descriptors) {
                    (Some(t), None, None) => exists(format!("{at}.transform"), t)?,
                    (None, Some(p), Some(d)) => {
                        exists(format!("{at}.matching"), p)?;
                        exists(format!("{at}.descriptors"), d)?;
                    }
                    _ => {
                        return err(format!(
                            "{at}: set either `transform`, or `matching` together with `descriptors`"
                        ))
                    }
                }
                if let Some(p) = &w.non_matching {
                    exists(format!("{at}.non_matching"), p)?;
                }
            }
        }
        Ok(())
    }
}
