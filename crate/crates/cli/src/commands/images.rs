use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lumen::descriptor::{extract_toy_descriptor, write_descriptors, Descriptor, DescriptorSet, ToyDescriptorConfig};
use lumen::exposure::{interpolate_exposure, ExposurePair};
use lumen::photometric::{normalize_image, NormalisationMethod};
use lumen::raster::{read_image, write_image};
use rayon::prelude::*;

use crate::args::{ExtractArgs, NormalizeArgs, SynthExposureArgs};
use crate::error::{CliError, CliResult};
use crate::files::{create_dir, list_images, stem};
use crate::Outcome;

fn same_dir(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

pub(crate) fn normalize(a: &NormalizeArgs) -> CliResult<Outcome> {
    let method = a.method.to_method()?;
    let inputs = list_images(&a.input)?;
    let mut outcome = Outcome::default();
    if inputs.is_empty() {
        outcome.warn(format!("no images in {}", a.input.display()));
        return Ok(outcome);
    }
    create_dir(&a.output)?;
    if same_dir(&a.input, &a.output) {
        return Err(CliError::Usage("output directory must differ from the input directory".into()));
    }
    let results: Vec<CliResult<()>> = inputs
        .par_iter()
        .map(|p| normalize_file(p, &a.output, &method))
        .collect();
    for (p, r) in inputs.iter().zip(results) {
        if let Err(e) = r {
            outcome.fail(p.display().to_string(), e);
        }
    }
    Ok(outcome)
}

fn normalize_file(path: &Path, out_dir: &Path, method: &NormalisationMethod) -> CliResult<()> {
    let dest = out_dir.join(path.file_name().expect("listed files have names"));
    let img = read_image(path)?;
    if matches!(method, NormalisationMethod::None) {
        std::fs::copy(path, &dest).map_err(|e| CliError::io(&dest, e))?;
        return Ok(());
    }
    write_image(&dest, &normalize_image(&img, method)?)?;
    Ok(())
}

#[derive(Default)]
struct ExposureFiles {
    short: Option<PathBuf>,
    long: Option<PathBuf>,
}

fn alpha_label(alpha: f64) -> String {
    format!("a{alpha}")
}

pub(crate) fn synth_exposure(a: &SynthExposureArgs) -> CliResult<Outcome> {
    if a.alphas.is_empty() || a.alphas.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Usage("--alphas must be finite numbers".into()));
    }
    let mut outcome = Outcome::default();
    let mut scenes: BTreeMap<String, ExposureFiles> = BTreeMap::new();
    for path in list_images(&a.input)? {
        let name = stem(&path);
        if let Some(scene) = name.strip_suffix("_short") {
            scenes.entry(scene.to_string()).or_default().short = Some(path);
        } else if let Some(scene) = name.strip_suffix("_long") {
            scenes.entry(scene.to_string()).or_default().long = Some(path);
        } else {
            outcome.warn(format!("{}: not a _short/_long exposure, ignored", path.display()));
        }
    }
    if scenes.is_empty() {
        outcome.warn(format!("no exposure pairs in {}", a.input.display()));
    }
    create_dir(&a.output)?;
    let scenes: Vec<(String, ExposureFiles)> = scenes.into_iter().collect();
    let results: Vec<CliResult<Vec<(f64, PathBuf)>>> = scenes
        .par_iter()
        .map(|(scene, files)| synth_scene(scene, files, &a.alphas, &a.output))
        .collect();

    let manifest = a.manifest.clone().unwrap_or_else(|| a.output.join("manifest.csv"));
    let mut rows = Vec::new();
    for ((scene, _), r) in scenes.iter().zip(results) {
        match r {
            Ok(outputs) => rows.extend(outputs.into_iter().map(|(alpha, p)| (scene.clone(), alpha, p))),
            Err(e) => outcome.fail(scene.clone(), e),
        }
    }
    let csv_err = |e: csv::Error| CliError::config(&manifest, e.to_string());
    let mut w = csv::Writer::from_path(&manifest).map_err(csv_err)?;
    w.write_record(["scene_id", "alpha", "path"]).map_err(csv_err)?;
    for (scene, alpha, path) in rows {
        w.write_record([scene, alpha.to_string(), path.display().to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(&manifest, e))?;
    Ok(outcome)
}

fn synth_scene(scene: &str, files: &ExposureFiles, alphas: &[f64], out_dir: &Path) -> CliResult<Vec<(f64, PathBuf)>> {
    let (short, long) = match (&files.short, &files.long) {
        (Some(s), Some(l)) => (s, l),
        (Some(_), None) => return Err(CliError::Usage("no matching _long exposure".into())),
        _ => return Err(CliError::Usage("no matching _short exposure".into())),
    };
    let pair = ExposurePair::new(scene, read_image(short)?, read_image(long)?)?;
    let ext = short.extension().and_then(|e| e.to_str()).unwrap_or("png");
    alphas
        .iter()
        .map(|&alpha| {
            let dest = out_dir.join(format!("{scene}_{}.{ext}", alpha_label(alpha)));
            write_image(&dest, &interpolate_exposure(&pair, alpha)?)?;
            Ok((alpha, dest))
        })
        .collect()
}

/// Toy descriptors for every image in `dir`, ids taken from file stems.
/// Images that fail, and later files repeating an id, are reported in
/// `outcome` and left out.
pub(crate) fn toy_descriptors(
    dir: &Path,
    method: &NormalisationMethod,
    cfg: &ToyDescriptorConfig,
    outcome: &mut Outcome,
) -> CliResult<DescriptorSet> {
    if cfg.grid == 0 || cfg.orientations == 0 {
        return Err(CliError::Usage("descriptor cells and orientations must be positive".into()));
    }
    let inputs = list_images(dir)?;
    if inputs.is_empty() {
        outcome.warn(format!("no images in {}", dir.display()));
    }
    let results: Vec<CliResult<Descriptor>> = inputs
        .par_iter()
        .map(|p| {
            let img = normalize_image(&read_image(p)?, method)?;
            Ok(extract_toy_descriptor(&stem(p), &img, cfg)?)
        })
        .collect();
    let mut set = DescriptorSet::new(cfg.dim());
    for (p, r) in inputs.iter().zip(results) {
        match r.and_then(|d| Ok(set.push(d)?)) {
            Ok(()) => {}
            Err(e) => outcome.fail(p.display().to_string(), e),
        }
    }
    Ok(set)
}

pub(crate) fn extract(a: &ExtractArgs) -> CliResult<Outcome> {
    let method = a.method.to_method()?;
    let cfg = a.toy.config();
    let mut outcome = Outcome::default();
    let set = toy_descriptors(&a.input, &method, &cfg, &mut outcome)?;
    write_descriptors(&set, &a.output)?;
    Ok(outcome)
}
