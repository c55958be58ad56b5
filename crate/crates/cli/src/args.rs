use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lumen::descriptor::ToyDescriptorConfig;
use lumen::mining::{DEFAULT_ANGLE_THRESHOLD_DEG, DEFAULT_IOU_THRESHOLD, DEFAULT_NEGATIVES, DEFAULT_POSITIVE_PAIRS};
use lumen::photometric::{histogram_of, ClaheConfig, NormalisationMethod};
use lumen::raster::{read_image, rgb_to_lab};
use lumen::whitening::DEFAULT_MAX_NON_MATCHING;

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "lumen", version, about = "Illumination-robust image retrieval pipeline")]
pub struct Cli {
    /// Worker threads; LUMEN_THREADS takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Photometrically normalise every image in a directory.
    Normalize(NormalizeArgs),
    /// Blend `_short`/`_long` exposure pairs into intermediate illumination levels.
    SynthExposure(SynthExposureArgs),
    /// Extract toy descriptors for a directory of images into a DSC1 file.
    Extract(ExtractArgs),
    /// Learn a whitening transform from matching pairs.
    WhitenLearn(WhitenLearnArgs),
    /// Apply a WHT1 transform to a DSC1 file.
    WhitenApply(WhitenApplyArgs),
    /// Concatenate two descriptor sets and reduce them with learned whitening.
    Ensemble(EnsembleArgs),
    /// Compute mAP tables from a TOML pipeline config.
    Evaluate(EvaluateArgs),
    /// Mine illumination-hard positive pairs from an SfM model.
    MinePositives(MinePositivesArgs),
    /// Mine hard negatives from other clusters in descriptor space.
    MineNegatives(MineNegativesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodName {
    None,
    Histeq,
    Clahe,
    Gamma,
    Histmatch,
}

#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    #[arg(long, value_enum, default_value_t = MethodName::None)]
    pub method: MethodName,
    /// CLAHE clip limit, as a multiple of the uniform bin level.
    #[arg(long, default_value_t = 4.0)]
    pub clip_limit: f64,
    /// CLAHE tile grid as COLSxROWS.
    #[arg(long, default_value = "8x8", value_parser = parse_grid)]
    pub grid: (usize, usize),
    /// Derive the CLAHE grid per image from this tile size in pixels.
    #[arg(long)]
    pub window: Option<usize>,
    /// Gamma target for the mean of L/100.
    #[arg(long, default_value_t = 0.5)]
    pub target_mean: f64,
    /// Image whose lightness histogram `histmatch` targets.
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (c, r) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected COLSxROWS, got `{s}`"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok((parse(c)?, parse(r)?))
}

impl MethodArgs {
    pub fn to_method(&self) -> CliResult<NormalisationMethod> {
        Ok(match self.method {
            MethodName::None => NormalisationMethod::None,
            MethodName::Histeq => NormalisationMethod::HistEq,
            MethodName::Clahe => NormalisationMethod::Clahe(ClaheConfig {
                grid_cols: self.grid.0,
                grid_rows: self.grid.1,
                clip_limit: self.clip_limit,
                target_window_px: self.window,
            }),
            MethodName::Gamma => NormalisationMethod::Gamma {
                target_mean: self.target_mean,
            },
            MethodName::Histmatch => {
                let path = self
                    .reference
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("histmatch needs --reference".into()))?;
                reference_histogram(path)?
            }
        })
    }
}

pub(crate) fn reference_histogram(path: &std::path::Path) -> CliResult<NormalisationMethod> {
    let lab = rgb_to_lab(&read_image(path)?)?;
    Ok(NormalisationMethod::HistMatch {
        target: histogram_of(&lab.l)?,
    })
}

#[derive(Debug, Clone, Args)]
pub struct ToyArgs {
    /// Cells per side of the descriptor grid.
    #[arg(long, default_value_t = ToyDescriptorConfig::default().grid)]
    pub cells: usize,
    #[arg(long, default_value_t = ToyDescriptorConfig::default().orientations)]
    pub orientations: usize,
    /// Gradients weaker than this (8-bit luma units) are ignored.
    #[arg(long, default_value_t = ToyDescriptorConfig::default().min_magnitude)]
    pub min_magnitude: f64,
    /// Gaussian pre-smoothing sigma in pixels.
    #[arg(long, default_value_t = ToyDescriptorConfig::default().smoothing)]
    pub smoothing: f64,
    /// Skip per-cell normalisation.
    #[arg(long)]
    pub no_cell_norm: bool,
}

impl ToyArgs {
    pub fn config(&self) -> ToyDescriptorConfig {
        ToyDescriptorConfig {
            grid: self.cells,
            orientations: self.orientations,
            min_magnitude: self.min_magnitude,
            cell_normalise: !self.no_cell_norm,
            smoothing: self.smoothing,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct NormalizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SynthExposureArgs {
    /// Directory holding `<scene>_short.<ext>` and `<scene>_long.<ext>` pairs.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Comma-separated blend factors.
    #[arg(long, value_delimiter = ',', default_values_t = lumen::exposure::DEFAULT_ALPHAS)]
    pub alphas: Vec<f64>,
    /// Manifest CSV path; defaults to `<output>/manifest.csv`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// DSC1 output file.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    pub toy: ToyArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    /// CSV of matching pairs `id_a,id_b`.
    #[arg(long)]
    pub matching: PathBuf,
    /// CSV of non-matching pairs; cross-cluster pairs are sampled without it.
    #[arg(long)]
    pub non_matching: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_NON_MATCHING)]
    pub max_non_matching: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output dimensionality; defaults to the input dimensionality.
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct WhitenLearnArgs {
    /// Training descriptors (DSC1).
    #[arg(long)]
    pub descriptors: PathBuf,
    #[command(flatten)]
    pub pairs: PairArgs,
    /// WHT1 output file.
    #[arg(long)]
    pub output: PathBuf,
    /// Optional JSON summary of the fit.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct WhitenApplyArgs {
    #[arg(long)]
    pub descriptors: PathBuf,
    #[arg(long)]
    pub transform: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EnsembleArgs {
    /// First descriptor set; its id order is kept.
    #[arg(long)]
    pub first: PathBuf,
    #[arg(long)]
    pub second: PathBuf,
    #[command(flatten)]
    pub pairs: PairArgs,
    #[arg(long)]
    pub output: PathBuf,
    /// Also write the learned transform.
    #[arg(long)]
    pub transform_output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write an SVG bar chart of the day/night breakdown.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Args)]
pub struct MinePositivesArgs {
    /// SfM model JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// CSV `image_id,lightness`; overrides values stored in the model.
    #[arg(long)]
    pub lightness: Option<PathBuf>,
    /// Directory of images named by id, for lightness the model and CSV lack.
    #[arg(long)]
    pub images: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
    pub iou: f64,
    #[arg(long, default_value_t = DEFAULT_ANGLE_THRESHOLD_DEG)]
    pub angle: f64,
    /// Number of pairs to keep.
    #[arg(short, long, default_value_t = DEFAULT_POSITIVE_PAIRS)]
    pub k: usize,
    /// Pair CSV output.
    #[arg(long)]
    pub output: PathBuf,
    /// Mining report JSON; defaults to the output path with a `.json` extension.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MineNegativesArgs {
    /// SfM model JSON providing the cluster of every image.
    #[arg(long)]
    pub model: PathBuf,
    /// Descriptor pool (DSC1).
    #[arg(long)]
    pub descriptors: PathBuf,
    /// Pair CSV whose first column lists the anchors; defaults to every
    /// pool entry.
    #[arg(long)]
    pub anchors: Option<PathBuf>,
    #[arg(short, long, default_value_t = DEFAULT_NEGATIVES)]
    pub n: usize,
    #[arg(long)]
    pub output: PathBuf,
    /// Defaults to the output path with a `.json` extension.
    #[arg(long)]
    pub report: Option<PathBuf>,
}
