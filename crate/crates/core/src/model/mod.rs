//! Disorder matrices, spin vectors and the exact partition-function
//! machinery.
//!
//! Matrices are `m × n` with rows = constraints and columns = variables.
//! Entries and spins are bit-packed: a set bit is `+1`, a clear bit `−1`.
//! Bits past `n` in the last word are always clear.

mod count;
mod fixture;
mod moments;
mod neighbors;

pub use count::{
    count_solutions, count_solutions_with, nth_solution, CountOptions, GrayScanner, SolutionSet,
    LIST_MAX_N, LIST_MAX_Z, N_MAX,
};
pub use fixture::{parse_fixture, write_fixture, Fixture};
pub use moments::{expected_z, pair_prob, second_moment_ratio, Overlap};
pub use neighbors::nearest_other_solution;

use alloc::{vec, vec::Vec};

use rand::Rng;

use crate::{theory::DiscreteConstants, Error, Kappa, Result};

const WORD: usize = 64;

pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

fn tail_mask(n: usize) -> u64 {
    match n % WORD {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Problem size and band, plus the replica seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModelParams {
    pub kappa: Kappa,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
}

impl ModelParams {
    pub fn new(kappa: Kappa, n: usize, m: usize, seed: u64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Domain {
                what: "n and m must be at least 1",
                value: n.min(m) as f64,
            });
        }
        Ok(ModelParams { kappa, n, m, seed })
    }

    /// `m = ⌊αn⌋`.
    pub fn from_density(kappa: Kappa, alpha: f64, n: usize, seed: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain {
                what: "alpha must be positive",
                value: alpha,
            });
        }
        let m = libm::floor(alpha * n as f64) as usize;
        Self::new(kappa, n, m, seed)
    }

    pub fn alpha(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    pub fn discrete(&self) -> Result<DiscreteConstants> {
        crate::theory::discrete_constants(&self.kappa, self.n, self.m)
    }
}

/// A vector in `{−1, +1}^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinVector {
    n: usize,
    words: Vec<u64>,
}

impl SpinVector {
    pub fn all_ones(n: usize) -> Self {
        let mut words = vec![u64::MAX; words_for(n)];
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(n);
        }
        SpinVector { n, words }
    }

    pub fn from_signs(signs: &[i8]) -> Self {
        let n = signs.len();
        let mut words = vec![0u64; words_for(n)];
        for (i, &s) in signs.iter().enumerate() {
            if s > 0 {
                words[i / WORD] |= 1 << (i % WORD);
            }
        }
        SpinVector { n, words }
    }

    /// Low `n` bits of `bits`, bit `i` set meaning `X_i = +1`.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        assert!(n <= WORD, "from_bits holds at most 64 spins");
        let mask = if n == WORD { u64::MAX } else { (1u64 << n) - 1 };
        SpinVector {
            n,
            words: vec![bits & mask],
        }
    }

    /// Packed words as returned by [`SpinVector::words`]; bits past `n` are
    /// cleared.
    pub fn from_words(n: usize, mut words: Vec<u64>) -> Self {
        assert_eq!(words.len(), words_for(n), "word count does not match n");
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(n);
        }
        SpinVector { n, words }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut words: Vec<u64> = (0..words_for(n)).map(|_| rng.random()).collect();
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(n);
        }
        SpinVector { n, words }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> i8 {
        if self.words[i / WORD] >> (i % WORD) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / WORD] ^= 1 << (i % WORD);
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        for w in &mut out.words {
            *w = !*w;
        }
        if let Some(last) = out.words.last_mut() {
            *last &= tail_mask(self.n);
        }
        out
    }

    pub fn signs(&self) -> Vec<i8> {
        (0..self.n).map(|i| self.get(i)).collect()
    }

    /// `⟨X, Y⟩`.
    pub fn dot(&self, other: &SpinVector) -> i64 {
        debug_assert_eq!(self.n, other.n);
        let disagree: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum();
        self.n as i64 - 2 * disagree as i64
    }

    /// Hamming distance `(n − ⟨X, Y⟩)/2`.
    pub fn distance(&self, other: &SpinVector) -> usize {
        ((self.n as i64 - self.dot(other)) / 2) as usize
    }
}

/// The `m × n` disorder matrix `G` with `±1` entries, one bit-packed row per
/// constraint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstraintMatrix {
    n: usize,
    m: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl ConstraintMatrix {
    pub fn from_rows(n: usize, rows: &[SpinVector]) -> Result<Self> {
        let stride = words_for(n);
        let mut bits = Vec::with_capacity(rows.len() * stride);
        for row in rows {
            if row.len() != n {
                return Err(Error::Precondition("row length differs from n"));
            }
            bits.extend_from_slice(row.words());
        }
        Ok(ConstraintMatrix {
            n,
            m: rows.len(),
            stride,
            bits,
        })
    }

    /// Builds `G` from `entry(j, i) > 0` meaning `G_{j,i} = +1`.
    pub fn from_fn(m: usize, n: usize, mut entry: impl FnMut(usize, usize) -> i8) -> Self {
        let stride = words_for(n);
        let mut bits = vec![0u64; m * stride];
        for j in 0..m {
            for i in 0..n {
                if entry(j, i) > 0 {
                    bits[j * stride + i / WORD] |= 1 << (i % WORD);
                }
            }
        }
        ConstraintMatrix { n, m, stride, bits }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row(&self, j: usize) -> &[u64] {
        &self.bits[j * self.stride..(j + 1) * self.stride]
    }

    pub fn row_vector(&self, j: usize) -> SpinVector {
        SpinVector {
            n: self.n,
            words: self.row(j).to_vec(),
        }
    }

    pub fn get(&self, j: usize, i: usize) -> i8 {
        if self.bits[j * self.stride + i / WORD] >> (i % WORD) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    /// Dense row-major copy with `±1` entries.
    pub fn to_dense(&self) -> Vec<i8> {
        let mut out = Vec::with_capacity(self.m * self.n);
        for j in 0..self.m {
            for i in 0..self.n {
                out.push(self.get(j, i));
            }
        }
        out
    }

    pub fn transpose(&self) -> ConstraintMatrix {
        ConstraintMatrix::from_fn(self.n, self.m, |j, i| self.get(i, j))
    }

    /// Multiplies column `i` by `−1`.
    pub fn negate_column(&mut self, i: usize) {
        for j in 0..self.m {
            self.bits[j * self.stride + i / WORD] ^= 1 << (i % WORD);
        }
    }

    /// Multiplies row `j` by `−1`.
    pub fn negate_row(&mut self, j: usize) {
        let n = self.n;
        let row = &mut self.bits[j * self.stride..(j + 1) * self.stride];
        for w in row.iter_mut() {
            *w = !*w;
        }
        if let Some(last) = row.last_mut() {
            *last &= tail_mask(n);
        }
    }

    /// Column `i` of the result is column `perm[i]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> ConstraintMatrix {
        ConstraintMatrix::from_fn(self.m, self.n, |j, i| self.get(j, perm[i]))
    }

    /// Multiplies every column `i` by `x_i`. Maps a planted solution `x` to
    /// the all-ones vector without changing any row sum.
    pub fn gauge(&self, x: &SpinVector) -> ConstraintMatrix {
        let stride = self.stride;
        let mut bits = self.bits.clone();
        for j in 0..self.m {
            for (w, xw) in bits[j * stride..(j + 1) * stride].iter_mut().zip(x.words()) {
                // +1 exactly where entry and spin agree.
                *w = !(*w ^ xw);
            }
            if let Some(last) = bits[j * stride..(j + 1) * stride].last_mut() {
                *last &= tail_mask(self.n);
            }
        }
        ConstraintMatrix {
            n: self.n,
            m: self.m,
            stride,
            bits,
        }
    }
}

/// `m × n` matrix of i.i.d. uniform `±1` entries.
pub fn sample_matrix<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> ConstraintMatrix {
    let stride = words_for(params.n);
    let mask = tail_mask(params.n);
    let mut bits = Vec::with_capacity(params.m * stride);
    for _ in 0..params.m {
        for w in 0..stride {
            let word: u64 = rng.random();
            bits.push(if w + 1 == stride { word & mask } else { word });
        }
    }
    ConstraintMatrix {
        n: params.n,
        m: params.m,
        stride,
        bits,
    }
}

pub(crate) fn row_sum_words(row: &[u64], x: &[u64], n: usize) -> i64 {
    let disagree: u32 = row.iter().zip(x).map(|(a, b)| (a ^ b).count_ones()).sum();
    n as i64 - 2 * disagree as i64
}

/// `Σ_i G_{j,i} X_i`.
pub fn row_sum(g: &ConstraintMatrix, j: usize, x: &SpinVector) -> Result<i64> {
    if j >= g.m {
        return Err(Error::IndexOutOfRange {
            what: "constraint rows",
            index: j,
            len: g.m,
        });
    }
    if x.len() != g.n {
        return Err(Error::Precondition("spin vector length differs from n"));
    }
    Ok(row_sum_words(g.row(j), x.words(), g.n))
}

/// True iff every row satisfies `|⟨G_j, X⟩| ≤ κ√n` (decided exactly).
pub fn satisfies(g: &ConstraintMatrix, x: &SpinVector, kappa: &Kappa) -> bool {
    assert_eq!(x.len(), g.n, "spin vector length differs from n");
    let band = kappa.band_sq(g.n);
    (0..g.m).all(|j| {
        let s = row_sum_words(g.row(j), x.words(), g.n).unsigned_abs() as u128;
        s * s <= band
    })
}
