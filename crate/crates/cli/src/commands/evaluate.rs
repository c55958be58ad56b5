use std::path::Path;

use lumen::descriptor::{read_descriptors, DescriptorSet};
use lumen::retrieval::{
    build_tokyo_protocol, condition_breakdown, load_protocol, load_tokyo_meta, mean_ap, EvaluationTable, MapReport,
    RetrievalProtocol, TokyoImageMeta,
};
use lumen::whitening::{learn_whitening, read_pair_csv, read_whitening, NonMatching, PairList, WhiteningTransform, DEFAULT_MAX_NON_MATCHING};
use serde::Serialize;

use super::images::toy_descriptors;
use super::whiten::whiten_set;
use crate::args::EvaluateArgs;
use crate::config::{DatasetConfig, DescriptorFiles, DescriptorSource, MethodConfig, NormalisationConfig, PipelineConfig, WhiteningConfig};
use crate::error::{CliError, CliResult};
use crate::files::{create_dir, write_file, write_json};
use crate::plot::breakdown_svg;
use crate::Outcome;

const BREAKDOWN_JUNK_RULE: &str = "images of the third condition at the query location are junk";

struct Dataset<'a> {
    cfg: &'a DatasetConfig,
    protocol: RetrievalProtocol,
    tokyo: Option<Vec<TokyoImageMeta>>,
}

fn load_dataset(cfg: &DatasetConfig) -> CliResult<Dataset<'_>> {
    if let Some(meta_path) = &cfg.tokyo_meta {
        let meta = load_tokyo_meta(meta_path)?;
        return Ok(Dataset {
            cfg,
            protocol: build_tokyo_protocol(&meta)?,
            tokyo: Some(meta),
        });
    }
    let path = cfg.protocol.as_ref().expect("validated: protocol or tokyo_meta");
    Ok(Dataset {
        cfg,
        protocol: load_protocol(path)?,
        tokyo: None,
    })
}

#[derive(Serialize)]
struct BreakdownEntry {
    pair: String,
    map: f64,
    mean_ap: f64,
    evaluated: usize,
    skipped: usize,
}

#[derive(Serialize)]
struct Breakdown {
    junk_rule: &'static str,
    pairs: Vec<BreakdownEntry>,
}

#[derive(Serialize)]
struct DatasetResult {
    dataset: String,
    #[serde(flatten)]
    report: MapReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    breakdown: Option<Breakdown>,
}

#[derive(Serialize)]
struct WhiteningSummary {
    source: &'static str,
    input_dim: usize,
    output_dim: usize,
}

#[derive(Serialize)]
struct MethodReport {
    name: String,
    normalisation: NormalisationConfig,
    descriptor: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    whitening: Option<WhiteningSummary>,
    average: Option<f64>,
    datasets: Vec<DatasetResult>,
}

#[derive(Serialize)]
struct EvaluationReport {
    seed: u64,
    table: EvaluationTable,
    methods: Vec<MethodReport>,
}

fn whitening_for(w: &WhiteningConfig, seed: u64) -> CliResult<(WhiteningTransform, &'static str)> {
    if let Some(path) = &w.transform {
        return Ok((read_whitening(path)?, "file"));
    }
    let (matching, train) = (
        w.matching.as_ref().expect("validated"),
        w.descriptors.as_ref().expect("validated"),
    );
    let set = read_descriptors(train)?;
    let non_matching = match &w.non_matching {
        Some(p) => NonMatching::Explicit {
            pairs: read_pair_csv(p)?,
        },
        None => NonMatching::CrossCluster {
            max_pairs: w.max_non_matching.unwrap_or(DEFAULT_MAX_NON_MATCHING),
            seed,
        },
    };
    let pairs = PairList::new(read_pair_csv(matching)?, non_matching);
    Ok((learn_whitening(&set, &pairs, w.dim.unwrap_or(set.dim()))?, "learned"))
}

/// Database and query descriptors for one method on one dataset, or `None`
/// when the method has no descriptors for it.
fn descriptors_for(
    m: &MethodConfig,
    ds: &Dataset<'_>,
    outcome: &mut Outcome,
) -> CliResult<Option<(DescriptorSet, Option<DescriptorSet>)>> {
    match &m.descriptor {
        DescriptorSource::Named(_) => {
            let dir = ds.cfg.images.as_ref().expect("validated: toy needs images");
            let method = m.normalisation.to_method()?;
            Ok(Some((toy_descriptors(dir, &method, &m.toy, outcome)?, None)))
        }
        DescriptorSource::Files(files) => match files.get(&ds.cfg.name) {
            None => Ok(None),
            Some(DescriptorFiles::Shared(p)) => Ok(Some((read_descriptors(p)?, None))),
            Some(DescriptorFiles::Split { database, queries }) => {
                Ok(Some((read_descriptors(database)?, Some(read_descriptors(queries)?))))
            }
        },
    }
}

fn run_method(
    m: &MethodConfig,
    datasets: &[Dataset<'_>],
    seed: u64,
    outcome: &mut Outcome,
) -> CliResult<(Vec<Option<f64>>, MethodReport)> {
    let whitening = m.whitening.as_ref().map(|w| whitening_for(w, seed)).transpose()?;
    let mut values = Vec::new();
    let mut results = Vec::new();
    for ds in datasets {
        let context = |source: lumen::Error| CliError::Evaluation {
            method: m.name.clone(),
            dataset: ds.cfg.name.clone(),
            source,
        };
        let Some((mut db, mut queries)) = descriptors_for(m, ds, outcome)? else {
            values.push(None);
            continue;
        };
        if let Some((t, _)) = &whitening {
            db = whiten_set(t, &db, outcome)?;
            queries = queries.map(|q| whiten_set(t, &q, outcome)).transpose()?;
        }
        let queries = queries.as_ref().unwrap_or(&db);
        let report = mean_ap(&ds.protocol, &db, queries).map_err(context)?;
        let breakdown = match &ds.tokyo {
            Some(meta) => Some(Breakdown {
                junk_rule: BREAKDOWN_JUNK_RULE,
                pairs: condition_breakdown(meta, &db, queries)
                    .map_err(context)?
                    .into_iter()
                    .map(|(pair, r)| BreakdownEntry {
                        pair: pair.to_string(),
                        map: r.map,
                        mean_ap: r.mean_ap,
                        evaluated: r.evaluated,
                        skipped: r.skipped.len(),
                    })
                    .collect(),
            }),
            None => None,
        };
        values.push(Some(report.map));
        results.push(DatasetResult {
            dataset: ds.cfg.name.clone(),
            report,
            breakdown,
        });
    }
    let report = MethodReport {
        name: m.name.clone(),
        normalisation: m.normalisation.clone(),
        descriptor: if m.is_toy() { "toy" } else { "dsc1" },
        whitening: whitening.map(|(t, source)| WhiteningSummary {
            source,
            input_dim: t.input_dim(),
            output_dim: t.output_dim(),
        }),
        average: None,
        datasets: results,
    };
    Ok((values, report))
}

fn render_text(report: &EvaluationReport, datasets: &[Dataset<'_>]) -> String {
    let mut out = String::from("mAP (%)\n");
    out.push_str(&report.table.render_text());
    for ds in datasets.iter().filter(|d| d.tokyo.is_some()) {
        let name = &ds.cfg.name;
        let mut columns = Vec::new();
        let mut rows = Vec::new();
        for m in &report.methods {
            let Some(b) = m.datasets.iter().find(|r| &r.dataset == name).and_then(|r| r.breakdown.as_ref()) else {
                continue;
            };
            columns = b.pairs.iter().map(|p| p.pair.clone()).collect();
            rows.push((m.name.clone(), b.pairs.iter().map(|p| Some(p.map)).collect::<Vec<_>>()));
        }
        if rows.is_empty() {
            continue;
        }
        let mut table = EvaluationTable::new(columns, false);
        for (method, values) in rows {
            table.push(method, values);
        }
        out.push_str(&format!("\n{name} breakdown, mAP (%); query condition -> database condition, {BREAKDOWN_JUNK_RULE}\n"));
        out.push_str(&table.render_text());
    }
    let skipped: Vec<String> = report
        .methods
        .iter()
        .flat_map(|m| {
            m.datasets
                .iter()
                .filter(|r| !r.report.skipped.is_empty())
                .map(move |r| format!("{} on {}: {} query(ies) without positives skipped", m.name, r.dataset, r.report.skipped.len()))
        })
        .collect();
    if !skipped.is_empty() {
        out.push('\n');
        for line in skipped {
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub(crate) fn evaluate(a: &EvaluateArgs, cfg: &PipelineConfig) -> CliResult<Outcome> {
    let out_dir = a.output.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let mut outcome = Outcome::default();
    let datasets = cfg.datasets.iter().map(load_dataset).collect::<CliResult<Vec<_>>>()?;
    let mut table = EvaluationTable::new(cfg.datasets.iter().map(|d| d.name.clone()).collect(), true);
    let mut methods = Vec::new();
    for m in &cfg.methods {
        let (values, mut report) = run_method(m, &datasets, cfg.seed, &mut outcome)?;
        table.push(m.name.clone(), values);
        report.average = table.rows.last().and_then(|r| r.average());
        methods.push(report);
    }
    let report = EvaluationReport {
        seed: cfg.seed,
        table,
        methods,
    };
    create_dir(&out_dir)?;
    write_json(&out_dir.join("report.json"), &report)?;
    write_file(&out_dir.join("report.txt"), render_text(&report, &datasets))?;
    if a.plot || cfg.plot {
        write_plots(&report, &datasets, &out_dir, &mut outcome)?;
    }
    Ok(outcome)
}

fn write_plots(report: &EvaluationReport, datasets: &[Dataset<'_>], out_dir: &Path, outcome: &mut Outcome) -> CliResult<()> {
    let mut any = false;
    for ds in datasets.iter().filter(|d| d.tokyo.is_some()) {
        let name = &ds.cfg.name;
        let series: Vec<(String, Vec<(String, f64)>)> = report
            .methods
            .iter()
            .filter_map(|m| {
                let b = m.datasets.iter().find(|r| &r.dataset == name)?.breakdown.as_ref()?;
                Some((m.name.clone(), b.pairs.iter().map(|p| (p.pair.clone(), p.map)).collect()))
            })
            .collect();
        if series.is_empty() {
            continue;
        }
        any = true;
        let svg = breakdown_svg(&format!("{name}: mAP by condition pair"), &series);
        write_file(&out_dir.join(format!("{}_breakdown.svg", file_safe(name))), svg)?;
    }
    if !any {
        outcome.warn("plot requested but no dataset has Tokyo metadata");
    }
    Ok(())
}
