//! Supervised whitening learned from matching and non-matching pairs, with
//! optional discriminative dimensionality reduction.
//!
//! With matching differences `Δ = d_i - d_j`:
//!
//! 1. `S_intra = mean(Δ Δᵀ)`, eigendecomposed as `V diag(μ) Vᵀ`;
//!    eigenvalues below `λ = 1e-6 · trace(S_intra) / D` are raised to `λ`;
//!    `W = V diag(μ^-1/2) Vᵀ`.
//! 2. `S_inter = W mean(Δ' Δ'ᵀ) W` over non-matching differences `Δ'`.
//! 3. The projection is `Uᵀ W`, with `U` the top `d_out` eigenvectors of
//!    `S_inter` in descending eigenvalue order.
//!
//! Applying the transform subtracts the set mean, projects, and
//! L2-normalises.

mod pairs;
mod wht1;

pub use pairs::{read_pair_csv, IndexedPairs, NonMatching, PairList, DEFAULT_MAX_NON_MATCHING};
pub use wht1::{decode_whitening, encode_whitening, read_whitening, write_whitening, WHT1_MAGIC};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::descriptor::{concat, Descriptor, DescriptorSet};
use crate::error::{Error, Result};

/// Relative eigenvalue floor for the intra-class scatter.
pub const REGULARISATION: f64 = 1e-6;
const BLOCK_ROWS: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningTransform {
    mean: DVector<f64>,
    /// `d_out x D`.
    projection: DMatrix<f64>,
}

impl WhiteningTransform {
    pub fn new(mean: Vec<f64>, projection: DMatrix<f64>) -> Result<Self> {
        if projection.nrows() == 0 {
            return Err(Error::invalid("whitening projection needs at least one row"));
        }
        if projection.ncols() != mean.len() {
            return Err(Error::invalid(format!(
                "projection has {} columns but mean has {} entries",
                projection.ncols(),
                mean.len()
            )));
        }
        if projection.nrows() > projection.ncols() {
            return Err(Error::invalid("d_out exceeds input dimension"));
        }
        if mean.iter().chain(projection.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("whitening transform has non-finite entries"));
        }
        Ok(Self {
            mean: DVector::from_vec(mean),
            projection,
        })
    }

    /// Identity projection around `mean`.
    pub fn identity(mean: Vec<f64>) -> Result<Self> {
        let d = mean.len();
        Self::new(mean, DMatrix::identity(d, d))
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.projection.nrows()
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn projection(&self) -> &DMatrix<f64> {
        &self.projection
    }

    /// `projection · (x - mean)`, not normalised.
    pub fn project(&self, x: &[f32]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::invalid(format!(
                "descriptor has dimension {}, whitening expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        let centred = DVector::from_iterator(
            x.len(),
            x.iter().zip(self.mean.iter()).map(|(&v, m)| f64::from(v) - m),
        );
        Ok((&self.projection * centred).data.into())
    }

    /// Linear part only, for differences of descriptors.
    pub fn project_difference(&self, delta: &[f64]) -> Vec<f64> {
        (&self.projection * DVector::from_column_slice(delta)).data.into()
    }

    /// The same transform with every entry rounded to `f32`, as stored in
    /// WHT1 files.
    pub fn to_f32_precision(&self) -> Self {
        let round = |v: &f64| f64::from(*v as f32);
        Self {
            mean: self.mean.map(|v| round(&v)),
            projection: self.projection.map(|v| round(&v)),
        }
    }
}

/// Everything computed while learning a transform.
#[derive(Debug, Clone)]
pub struct WhiteningFit {
    pub transform: WhiteningTransform,
    /// `W = S_intra^(-1/2)`, `D x D`.
    pub whitener: DMatrix<f64>,
    /// Top eigenvectors of `S_inter` as columns, `D x d_out`.
    pub rotation: DMatrix<f64>,
    /// Eigenvalues of `S_intra`, ascending, before flooring.
    pub intra_eigenvalues: Vec<f64>,
    /// Eigenvalues of `S_inter`, descending.
    pub inter_eigenvalues: Vec<f64>,
    /// Number of intra eigenvalues raised to the floor.
    pub floored: usize,
    pub matching_pairs: usize,
    pub non_matching_pairs: usize,
}

fn scatter(set: &DescriptorSet, pairs: &[(usize, usize)]) -> DMatrix<f64> {
    let dim = set.dim();
    let rows = set.entries();
    let mut acc = DMatrix::<f64>::zeros(dim, dim);
    for block in pairs.chunks(BLOCK_ROWS) {
        let x = DMatrix::from_fn(block.len(), dim, |r, c| {
            let (i, j) = block[r];
            f64::from(rows[i].values()[c]) - f64::from(rows[j].values()[c])
        });
        acc += x.tr_mul(&x);
    }
    acc /= pairs.len() as f64;
    // Summation order makes the product symmetric only up to rounding.
    (&acc + acc.transpose()) * 0.5
}

/// Eigenpairs sorted by eigenvalue, each vector signed so its largest
/// magnitude entry is positive.
fn sorted_eigen(m: DMatrix<f64>, descending: bool) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let o = eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]);
        if descending {
            o.reverse()
        } else {
            o
        }
    });
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).clone_owned();
        let pivot = col
            .iter()
            .copied()
            .fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if pivot < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(k, &col);
    }
    (order.iter().map(|&i| eig.eigenvalues[i]).collect(), vectors)
}

pub fn set_mean(set: &DescriptorSet) -> Vec<f64> {
    let mut mean = vec![0.0; set.dim()];
    for d in set {
        for (m, &v) in mean.iter_mut().zip(d.values()) {
            *m += f64::from(v);
        }
    }
    let n = set.len().max(1) as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

pub fn learn_whitening(set: &DescriptorSet, pairs: &PairList, d_out: usize) -> Result<WhiteningTransform> {
    Ok(learn_whitening_detailed(set, pairs, d_out)?.transform)
}

pub fn learn_whitening_detailed(set: &DescriptorSet, pairs: &PairList, d_out: usize) -> Result<WhiteningFit> {
    let dim = set.dim();
    if d_out == 0 || d_out > dim {
        return Err(Error::invalid(format!(
            "output dimension {d_out} must lie in 1..={dim}"
        )));
    }
    let idx = pairs.resolve(set)?;
    if idx.matching.is_empty() {
        return Err(Error::Rank("no matching pairs".into()));
    }
    if idx.non_matching.is_empty() {
        return Err(Error::invalid("no non-matching pairs"));
    }

    let s_intra = scatter(set, &idx.matching);
    let trace = s_intra.trace();
    if !(trace > 0.0 && trace.is_finite()) {
        return Err(Error::Rank(format!(
            "matching-pair scatter has trace {trace}; all matching descriptors coincide"
        )));
    }
    let floor = REGULARISATION * trace / dim as f64;
    let (intra_eigenvalues, v) = sorted_eigen(s_intra, false);
    let floored = intra_eigenvalues.iter().filter(|&&mu| mu < floor).count();
    let inv_sqrt = DVector::from_iterator(dim, intra_eigenvalues.iter().map(|&mu| 1.0 / mu.max(floor).sqrt()));
    let whitener = &v * DMatrix::from_diagonal(&inv_sqrt) * v.transpose();

    let s_nm = scatter(set, &idx.non_matching);
    let s_inter = &whitener * s_nm * &whitener;
    let s_inter = (&s_inter + s_inter.transpose()) * 0.5;
    let (inter_eigenvalues, u) = sorted_eigen(s_inter, true);
    let rotation = u.columns(0, d_out).clone_owned();
    let projection = rotation.transpose() * &whitener;

    Ok(WhiteningFit {
        transform: WhiteningTransform::new(set_mean(set), projection)?,
        whitener,
        rotation,
        intra_eigenvalues,
        inter_eigenvalues,
        floored,
        matching_pairs: idx.matching.len(),
        non_matching_pairs: idx.non_matching.len(),
    })
}

/// Projects and L2-normalises. A zero projection is reported as
/// [`Error::DegenerateDescriptor`].
pub fn apply_whitening(t: &WhiteningTransform, d: &Descriptor) -> Result<Descriptor> {
    let y = t.project(d.values())?;
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::DegenerateDescriptor(d.id().to_string()));
    }
    Descriptor::new(d.id(), y.iter().map(|v| (v / norm) as f32).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WhitenedSet {
    pub set: DescriptorSet,
    /// Ids whose projection was zero; they are kept as zero vectors.
    pub degenerate: Vec<String>,
}

pub fn apply_whitening_set(t: &WhiteningTransform, set: &DescriptorSet) -> Result<WhitenedSet> {
    if set.dim() != t.input_dim() {
        return Err(Error::invalid(format!(
            "descriptor set has dimension {}, whitening expects {}",
            set.dim(),
            t.input_dim()
        )));
    }
    let out: Vec<(Descriptor, bool)> = set
        .entries()
        .par_iter()
        .map(|d| match apply_whitening(t, d) {
            Ok(w) => Ok((w, false)),
            Err(Error::DegenerateDescriptor(_)) => {
                Ok((Descriptor::new(d.id(), vec![0.0; t.output_dim()])?, true))
            }
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let degenerate = out.iter().filter(|(_, bad)| *bad).map(|(d, _)| d.id().to_string()).collect();
    Ok(WhitenedSet {
        set: DescriptorSet::from_descriptors(t.output_dim(), out.into_iter().map(|(d, _)| d))?,
        degenerate,
    })
}

/// Concatenates `a` and `b` per id (in the order of `a`).
pub fn concat_sets(a: &DescriptorSet, b: &DescriptorSet) -> Result<DescriptorSet> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "ensemble sets differ in size: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let joined = a
        .iter()
        .map(|da| {
            let db = b
                .get(da.id())
                .ok_or_else(|| Error::invalid(format!("id `{}` missing from second set", da.id())))?;
            concat(da, db)
        })
        .collect::<Result<Vec<_>>>()?;
    DescriptorSet::from_descriptors(a.dim() + b.dim(), joined)
}

/// Concatenation followed by a whitening learned on the concatenated
/// descriptors.
pub fn reduce_ensemble(
    a: &DescriptorSet,
    b: &DescriptorSet,
    pairs: &PairList,
    d_out: usize,
) -> Result<(DescriptorSet, WhiteningTransform)> {
    let joined = concat_sets(a, b)?;
    let t = learn_whitening(&joined, pairs, d_out)?;
    let whitened = apply_whitening_set(&t, &joined)?;
    Ok((whitened.set, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    /// Cyclic Jacobi eigen-solver; returns eigenvalues and column vectors.
    #[allow(clippy::needless_range_loop)]
    fn jacobi(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = a.len();
        let mut a = a.to_vec();
        let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
        for _ in 0..100 {
            let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
            if off < 1e-24 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                    for row in v.iter_mut() {
                        let (vp, vq) = (row[p], row[q]);
                        row[p] = c * vp - s * vq;
                        row[q] = s * vp + c * vq;
                    }
                }
            }
        }
        ((0..n).map(|i| a[i][i]).collect(), (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect())
    }

    fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        (0..a.len())
            .map(|i| (0..b[0].len()).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect())
            .collect()
    }

    /// Matching pairs (2k, 2k+1) with differences drawn by `diff`,
    /// anchors by `anchor`.
    fn paired_set(
        n_pairs: usize,
        dim: usize,
        seed: u64,
        anchor: impl Fn(&mut Rng) -> Vec<f64>,
        diff: impl Fn(&mut Rng) -> Vec<f64>,
    ) -> (DescriptorSet, PairList) {
        let mut rng = Rng::new(seed);
        let mut ds = Vec::new();
        let mut matching = Vec::new();
        for k in 0..n_pairs {
            let a = anchor(&mut rng);
            let d = diff(&mut rng);
            let b: Vec<f32> = a.iter().zip(&d).map(|(x, y)| (x + y) as f32).collect();
            ds.push(Descriptor::new(format!("a{k}"), a.iter().map(|&x| x as f32).collect()).unwrap());
            ds.push(Descriptor::new(format!("b{k}"), b).unwrap());
            matching.push((format!("a{k}"), format!("b{k}")));
        }
        (
            DescriptorSet::from_descriptors(dim, ds).unwrap(),
            PairList::new(matching, NonMatching::CrossCluster { max_pairs: 5000, seed }),
        )
    }

    fn whitened_diff_cov(t: &WhiteningTransform, set: &DescriptorSet, pairs: &PairList) -> DMatrix<f64> {
        let idx = pairs.resolve(set).unwrap();
        let k = t.output_dim();
        let mut cov = DMatrix::zeros(k, k);
        for &(i, j) in &idx.matching {
            let delta: Vec<f64> = set.entries()[i]
                .values()
                .iter()
                .zip(set.entries()[j].values())
                .map(|(&x, &y)| f64::from(x) - f64::from(y))
                .collect();
            let y = DVector::from_vec(t.project_difference(&delta));
            cov += &y * y.transpose();
        }
        cov / idx.matching.len() as f64
    }

    #[test]
    fn matching_differences_become_white() {
        let dim = 6;
        let scales = [5.0, 0.2, 1.0, 3.0, 0.7, 2.0];
        let (set, pairs) = paired_set(
            300,
            dim,
            3,
            |r| (0..dim).map(|_| r.normal()).collect(),
            |r| scales.iter().map(|s| s * r.normal()).collect(),
        );
        let fit = learn_whitening_detailed(&set, &pairs, dim).unwrap();
        assert_eq!(fit.floored, 0);
        let cov = whitened_diff_cov(&fit.transform, &set, &pairs);
        assert!((cov - DMatrix::identity(dim, dim)).norm() < 1e-9);
        let gram = fit.rotation.transpose() * &fit.rotation;
        assert!((gram - DMatrix::identity(dim, dim)).norm() < 1e-10);
    }

    #[test]
    fn stretched_axis_is_shrunk_per_oracle() {
        let (set, pairs) = paired_set(
            200,
            2,
            11,
            |r| vec![r.normal(), r.normal()],
            |r| vec![10.0 * r.normal(), r.normal()],
        );
        let fit = learn_whitening_detailed(&set, &pairs, 2).unwrap();

        // Independent W from the Jacobi oracle.
        let idx = pairs.resolve(&set).unwrap();
        let mut s = vec![vec![0.0; 2]; 2];
        for &(i, j) in &idx.matching {
            let d: Vec<f64> = (0..2)
                .map(|c| f64::from(set.entries()[i].values()[c]) - f64::from(set.entries()[j].values()[c]))
                .collect();
            for a in 0..2 {
                for b in 0..2 {
                    s[a][b] += d[a] * d[b] / idx.matching.len() as f64;
                }
            }
        }
        let (mu, vecs) = jacobi(&s);
        let vt: Vec<Vec<f64>> = vecs.clone();
        let v: Vec<Vec<f64>> = (0..2).map(|i| (0..2).map(|j| vecs[j][i]).collect()).collect();
        let dmat: Vec<Vec<f64>> = (0..2).map(|i| (0..2).map(|j| if i == j { 1.0 / mu[i].sqrt() } else { 0.0 }).collect()).collect();
        let w = matmul(&matmul(&v, &dmat), &vt);
        for i in 0..2 {
            for j in 0..2 {
                assert!((fit.whitener[(i, j)] - w[i][j]).abs() < 1e-9, "{:?} vs {w:?}", fit.whitener);
            }
        }
        // The stretched axis is shrunk about ten times more than the other.
        let ratio = fit.whitener[(1, 1)] / fit.whitener[(0, 0)];
        assert!((ratio - 10.0).abs() < 2.0, "{ratio}");
    }

    #[test]
    fn single_output_keeps_most_discriminative_axis() {
        // White matching differences; non-matching spread lives on axis 2.
        let dim = 3;
        let mut rng = Rng::new(5);
        let mut ds = Vec::new();
        let mut matching = Vec::new();
        for k in 0..150 {
            let centre = [0.1 * rng.normal(), 0.1 * rng.normal(), 20.0 * rng.normal()];
            let a: Vec<f32> = centre.iter().map(|c| (c + rng.normal() / 2f64.sqrt()) as f32).collect();
            let b: Vec<f32> = centre.iter().map(|c| (c + rng.normal() / 2f64.sqrt()) as f32).collect();
            ds.push(Descriptor::new(format!("a{k}"), a).unwrap());
            ds.push(Descriptor::new(format!("b{k}"), b).unwrap());
            matching.push((format!("a{k}"), format!("b{k}")));
        }
        let set = DescriptorSet::from_descriptors(dim, ds).unwrap();
        let pairs = PairList::new(matching, NonMatching::default());
        let fit = learn_whitening_detailed(&set, &pairs, 1).unwrap();

        // Oracle: top eigenvector of S_inter computed by Jacobi.
        let s_inter: Vec<Vec<f64>> = {
            let idx = pairs.resolve(&set).unwrap();
            let mut acc = vec![vec![0.0; dim]; dim];
            for &(i, j) in &idx.non_matching {
                let d: Vec<f64> = (0..dim)
                    .map(|c| f64::from(set.entries()[i].values()[c]) - f64::from(set.entries()[j].values()[c]))
                    .collect();
                for a in 0..dim {
                    for b in 0..dim {
                        acc[a][b] += d[a] * d[b] / idx.non_matching.len() as f64;
                    }
                }
            }
            let w: Vec<Vec<f64>> = (0..dim).map(|i| (0..dim).map(|j| fit.whitener[(i, j)]).collect()).collect();
            matmul(&matmul(&w, &acc), &w)
        };
        let (mu, vecs) = jacobi(&s_inter);
        let top = (0..dim).max_by(|&a, &b| mu[a].total_cmp(&mu[b])).unwrap();
        let cos: f64 = (0..dim).map(|i| vecs[top][i] * fit.rotation[(i, 0)]).sum();
        assert!((cos.abs() - 1.0).abs() < 1e-9, "{cos}");
        assert!(fit.rotation[(2, 0)].abs() > 0.99);
        assert_eq!(fit.transform.output_dim(), 1);
    }

    #[test]
    fn identity_transform_normalises() {
        let t = WhiteningTransform::identity(vec![0.0, 0.0]).unwrap();
        let d = Descriptor::new("x", vec![3.0, 4.0]).unwrap();
        assert_eq!(apply_whitening(&t, &d).unwrap().values(), &[0.6, 0.8]);
    }

    #[test]
    fn zero_projection_is_flagged() {
        let t = WhiteningTransform::identity(vec![1.0, 2.0]).unwrap();
        let d = Descriptor::new("m", vec![1.0, 2.0]).unwrap();
        assert!(matches!(apply_whitening(&t, &d), Err(Error::DegenerateDescriptor(id)) if id == "m"));
        let set = DescriptorSet::from_descriptors(2, [d, Descriptor::new("n", vec![2.0, 2.0]).unwrap()]).unwrap();
        let out = apply_whitening_set(&t, &set).unwrap();
        assert_eq!(out.degenerate, vec!["m".to_string()]);
        assert_eq!(out.set.get("m").unwrap().values(), &[0.0, 0.0]);
        assert_eq!(out.set.get("n").unwrap().values(), &[1.0, 0.0]);
    }

    #[test]
    fn dimension_errors() {
        let (set, pairs) = paired_set(10, 3, 1, |r| (0..3).map(|_| r.normal()).collect(), |r| (0..3).map(|_| r.normal()).collect());
        assert!(matches!(learn_whitening(&set, &pairs, 4), Err(Error::InvalidInput(_))));
        assert!(learn_whitening(&set, &pairs, 0).is_err());
        let t = learn_whitening(&set, &pairs, 3).unwrap();
        assert!(apply_whitening(&t, &Descriptor::new("x", vec![1.0, 2.0]).unwrap()).is_err());
    }

    #[test]
    fn coincident_matches_are_rank_error() {
        let (set, pairs) = paired_set(5, 2, 1, |r| vec![r.normal(), r.normal()], |_| vec![0.0, 0.0]);
        assert!(matches!(learn_whitening(&set, &pairs, 2), Err(Error::Rank(_))));
    }

    #[test]
    fn ensemble_with_itself_is_well_posed() {
        let dim = 4;
        let (set, pairs) = paired_set(80, dim, 9, |r| (0..dim).map(|_| r.normal()).collect(), |r| (0..dim).map(|_| 0.5 * r.normal()).collect());
        let (out, t) = reduce_ensemble(&set, &set, &pairs, 2 * dim).unwrap();
        assert_eq!(out.dim(), 8);
        assert!(t.projection().iter().all(|v| v.is_finite()));
        // Whitened matching differences have covariance equal to a rank-4
        // projector: white on the range, zero on the duplicated null space.
        let joined = concat_sets(&set, &set).unwrap();
        let cov = whitened_diff_cov(&t, &joined, &pairs);
        let (eig, _) = sorted_eigen(cov, true);
        for (k, e) in eig.iter().enumerate() {
            let expect = if k < dim { 1.0 } else { 0.0 };
            assert!((e - expect).abs() < 1e-6, "{eig:?}");
        }
        for d in &out {
            assert!((d.norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn ensemble_reduces_and_checks_alignment() {
        let (a, pairs) = paired_set(40, 3, 2, |r| (0..3).map(|_| r.normal()).collect(), |r| (0..3).map(|_| r.normal()).collect());
        let (b, _) = paired_set(40, 2, 4, |r| (0..2).map(|_| r.normal()).collect(), |r| (0..2).map(|_| r.normal()).collect());
        let (out, t) = reduce_ensemble(&a, &b, &pairs, 2).unwrap();
        assert_eq!((out.dim(), t.input_dim(), t.output_dim()), (2, 5, 2));
        let short = a.subset(a.ids().take(10).collect::<Vec<_>>()).unwrap();
        assert!(reduce_ensemble(&short, &b, &pairs, 2).is_err());
    }

    #[test]
    fn scaling_inputs_does_not_change_output() {
        let dim = 4;
        let (set, pairs) = paired_set(60, dim, 21, |r| (0..dim).map(|_| r.normal()).collect(), |r| (0..dim).map(|_| 0.3 * r.normal()).collect());
        let scaled = DescriptorSet::from_descriptors(
            dim,
            set.iter().map(|d| Descriptor::new(d.id(), d.values().iter().map(|v| v * 4.0).collect()).unwrap()),
        )
        .unwrap();
        let a = apply_whitening_set(&learn_whitening(&set, &pairs, 3).unwrap(), &set).unwrap().set;
        let b = apply_whitening_set(&learn_whitening(&scaled, &pairs, 3).unwrap(), &scaled).unwrap().set;
        for (x, y) in a.iter().zip(b.iter()) {
            for (p, q) in x.values().iter().zip(y.values()) {
                assert!((p - q).abs() < 1e-5);
            }
        }
    }
}
