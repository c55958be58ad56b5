mod evaluate;
mod images;
mod mine;
mod whiten;

pub(crate) use evaluate::evaluate;
pub(crate) use images::{extract, normalize, synth_exposure};
pub(crate) use mine::{mine_negatives, mine_positives};
pub(crate) use whiten::{ensemble, whiten_apply, whiten_learn};
