use lumen::descriptor::{read_descriptors, write_descriptors, DescriptorSet};
use lumen::whitening::{
    apply_whitening_set, concat_sets, learn_whitening, learn_whitening_detailed, read_pair_csv, read_whitening,
    write_whitening, NonMatching, PairList, WhiteningTransform,
};
use serde::Serialize;

use crate::args::{EnsembleArgs, PairArgs, WhitenApplyArgs, WhitenLearnArgs};
use crate::error::CliResult;
use crate::files::write_json;
use crate::Outcome;

pub(crate) fn pair_list(a: &PairArgs) -> CliResult<PairList> {
    let non_matching = match &a.non_matching {
        Some(p) => NonMatching::Explicit {
            pairs: read_pair_csv(p)?,
        },
        None => NonMatching::CrossCluster {
            max_pairs: a.max_non_matching,
            seed: a.seed,
        },
    };
    Ok(PairList::new(read_pair_csv(&a.matching)?, non_matching))
}

#[derive(Serialize)]
struct FitSummary {
    input_dim: usize,
    output_dim: usize,
    matching_pairs: usize,
    non_matching_pairs: usize,
    /// Intra-class eigenvalues raised to the regularisation floor.
    floored: usize,
    intra_eigenvalues: Vec<f64>,
    inter_eigenvalues: Vec<f64>,
}

pub(crate) fn whiten_learn(a: &WhitenLearnArgs) -> CliResult<Outcome> {
    let set = read_descriptors(&a.descriptors)?;
    let pairs = pair_list(&a.pairs)?;
    let fit = learn_whitening_detailed(&set, &pairs, a.pairs.dim.unwrap_or(set.dim()))?;
    write_whitening(&fit.transform, &a.output)?;
    if let Some(path) = &a.report {
        write_json(
            path,
            &FitSummary {
                input_dim: fit.transform.input_dim(),
                output_dim: fit.transform.output_dim(),
                matching_pairs: fit.matching_pairs,
                non_matching_pairs: fit.non_matching_pairs,
                floored: fit.floored,
                intra_eigenvalues: fit.intra_eigenvalues,
                inter_eigenvalues: fit.inter_eigenvalues,
            },
        )?;
    }
    Ok(Outcome::default())
}

/// Applies `t`, listing descriptors that project to zero as failures.
pub(crate) fn whiten_set(t: &WhiteningTransform, set: &DescriptorSet, outcome: &mut Outcome) -> CliResult<DescriptorSet> {
    let w = apply_whitening_set(t, set)?;
    for id in &w.degenerate {
        outcome.fail(id.clone(), "projects to the zero vector; written as zeros");
    }
    Ok(w.set)
}

pub(crate) fn whiten_apply(a: &WhitenApplyArgs) -> CliResult<Outcome> {
    let set = read_descriptors(&a.descriptors)?;
    let t = read_whitening(&a.transform)?;
    let mut outcome = Outcome::default();
    let out = whiten_set(&t, &set, &mut outcome)?;
    write_descriptors(&out, &a.output)?;
    Ok(outcome)
}

pub(crate) fn ensemble(a: &EnsembleArgs) -> CliResult<Outcome> {
    let joined = concat_sets(&read_descriptors(&a.first)?, &read_descriptors(&a.second)?)?;
    let pairs = pair_list(&a.pairs)?;
    let t = learn_whitening(&joined, &pairs, a.pairs.dim.unwrap_or(joined.dim()))?;
    let mut outcome = Outcome::default();
    let out = whiten_set(&t, &joined, &mut outcome)?;
    write_descriptors(&out, &a.output)?;
    if let Some(path) = &a.transform_output {
        write_whitening(&t, path)?;
    }
    Ok(outcome)
}
