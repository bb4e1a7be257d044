//! Rejection samplers for the planted and pair-planted laws.
//!
//! Each row is drawn as i.i.d. Rademacher entries and redrawn until it
//! admits the planted vector(s). Rows are independent given the planted
//! vectors, so the accepted matrix has exactly the conditioned law.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std inherent methods when std is in the graph
use num_traits::Float;
use rand::{seq::index, Rng};

use crate::{
    model::{row_sum_words, words_for, ConstraintMatrix, ModelParams, Overlap, SpinVector},
    stats::MeanEstimate,
    Error, Kappa, Result,
};

/// Draws allowed per row before giving up.
pub const ROW_BUDGET: u64 = 1_000_000;

/// Draws spent on each row, the last one accepted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AcceptStats {
    pub attempts: Vec<u64>,
}

impl AcceptStats {
    pub fn total_attempts(&self) -> u64 {
        self.attempts.iter().sum()
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.attempts.len() as f64 / self.total_attempts() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedInstance {
    pub planted: SpinVector,
    pub matrix: ConstraintMatrix,
    pub accept_stats: AcceptStats,
}

impl PlantedInstance {
    /// `G_{j,i} X_i`: the same instance with the planted vector mapped to
    /// all-ones.
    pub fn gauged(&self) -> ConstraintMatrix {
        self.matrix.gauge(&self.planted)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairPlantedInstance {
    pub x1: SpinVector,
    pub x2: SpinVector,
    pub overlap: Overlap,
    pub matrix: ConstraintMatrix,
    pub accept_stats: AcceptStats,
}

impl PairPlantedInstance {
    /// Gauge mapping `x1` to all-ones and `x2` to `a` leading `+1`s followed
    /// by `−1`s, where `a` is the agreement count. Returns the matrix and `a`.
    pub fn gauged(&self) -> (ConstraintMatrix, usize) {
        let n = self.x1.len();
        let g = self.matrix.gauge(&self.x1);
        let mut perm: Vec<usize> = (0..n).filter(|&i| self.x1.get(i) == self.x2.get(i)).collect();
        let a = perm.len();
        perm.extend((0..n).filter(|&i| self.x1.get(i) != self.x2.get(i)));
        (g.permute_columns(&perm), a)
    }
}

fn sample_row<R: Rng + ?Sized>(
    n: usize,
    row: &mut [u64],
    rng: &mut R,
    mut accept: impl FnMut(&[u64]) -> bool,
) -> Result<u64> {
    let tail = match n % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    };
    for attempt in 1..=ROW_BUDGET {
        for w in row.iter_mut() {
            *w = rng.random();
        }
        if let Some(last) = row.last_mut() {
            *last &= tail;
        }
        if accept(row) {
            return Ok(attempt);
        }
    }
    Err(Error::Sampling {
        what: "planted row rejection",
        budget: ROW_BUDGET,
    })
}

fn build<R: Rng + ?Sized>(
    params: &ModelParams,
    planted: &[&SpinVector],
    rng: &mut R,
) -> Result<(ConstraintMatrix, AcceptStats)> {
    let n = params.n;
    let band = params.kappa.band_sq(n);
    let admits = |row: &[u64], x: &SpinVector| {
        let s = row_sum_words(row, x.words(), n).unsigned_abs() as u128;
        s * s <= band
    };
    let mut rows = Vec::with_capacity(params.m);
    let mut attempts = Vec::with_capacity(params.m);
    let mut row = alloc::vec![0u64; words_for(n)];
    for _ in 0..params.m {
        attempts.push(sample_row(n, &mut row, rng, |r| planted.iter().all(|x| admits(r, x)))?);
        rows.push(SpinVector::from_words(n, row.clone()));
    }
    Ok((ConstraintMatrix::from_rows(n, &rows)?, AcceptStats { attempts }))
}

/// `X` uniform on `{±1}^n`, then `G` conditioned on `X ∈ S(G)`.
pub fn sample_planted<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<PlantedInstance> {
    let planted = SpinVector::random(params.n, rng);
    let (matrix, accept_stats) = build(params, &[&planted], rng)?;
    Ok(PlantedInstance {
        planted,
        matrix,
        accept_stats,
    })
}

/// `X1` uniform, `X2` uniform among vectors with `⟨X1, X2⟩ = overlap`, then
/// `G` conditioned on both being solutions.
pub fn sample_planted_pair<R: Rng + ?Sized>(
    params: &ModelParams,
    overlap: Overlap,
    rng: &mut R,
) -> Result<PairPlantedInstance> {
    let n = params.n;
    let overlap = Overlap::new(n, overlap.0)?;
    let x1 = SpinVector::random(n, rng);
    let a = overlap.agreements(n);
    let mut x2 = x1.negated();
    for i in index::sample(rng, n, a) {
        x2.flip(i);
    }
    let (matrix, accept_stats) = build(params, &[&x1, &x2], rng)?;
    Ok(PairPlantedInstance {
        x1,
        x2,
        overlap,
        matrix,
        accept_stats,
    })
}

/// Mean over all rows of the gauged product `Π_{i ∈ cols} G_{j,i} X_i`.
pub fn planted_row_correlation(instances: &[PlantedInstance], cols: &[usize]) -> Result<MeanEstimate> {
    if cols.len() < 2 {
        return Err(Error::Precondition("need at least two columns"));
    }
    for (p, c) in cols.iter().enumerate() {
        if cols[..p].contains(c) {
            return Err(Error::Precondition("columns must be distinct"));
        }
    }
    let values = instances.iter().flat_map(|inst| {
        let g = &inst.matrix;
        (0..g.m()).map(move |j| {
            cols.iter()
                .map(|&i| (g.get(j, i) * inst.planted.get(i)) as f64)
                .product::<f64>()
        })
    });
    Ok(MeanEstimate::from_values(values))
}

/// Predicted value `2β_n/√(mn)` of the gauged two-column product.
pub fn predicted_pair_correlation(kappa: &Kappa, n: usize, m: usize) -> Result<f64> {
    let d = crate::theory::discrete_constants(kappa, n, m)?;
    Ok(2.0 * d.beta_n / ((m * n) as f64).sqrt())
}
