use alloc::{vec, vec::Vec};

use super::{ConstraintMatrix, SpinVector};
use crate::{Error, Kappa, Result};

/// Default largest `n` accepted by the exhaustive counter.
pub const N_MAX: usize = 30;
/// Solutions are listed only for `n` up to this size.
pub const LIST_MAX_N: usize = 24;
/// Listing is dropped once `Z` exceeds this.
pub const LIST_MAX_Z: u64 = 1_000_000;

/// Hard ceiling: spin states are held in one `u64`.
const N_HARD_MAX: usize = 63;
const LANES: usize = 16;
type Lane = [i16; LANES];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountOptions {
    /// Capability limit on `n`; at most 63.
    pub n_max: usize,
    /// Number of leading free spins fixed per block.
    pub block_bits: usize,
    /// Retain the explicit solution list (subject to [`LIST_MAX_N`], [`LIST_MAX_Z`]).
    pub list: bool,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            n_max: N_MAX,
            block_bits: 10,
            list: false,
        }
    }
}

/// `Z = |S(G)|`, with the solutions when they were retained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSet {
    pub count: u64,
    /// Scan order: the solutions with `X_{n−1} = +1`, then their negations
    /// in the same order.
    pub solutions: Option<Vec<SpinVector>>,
}

/// Exhaustive scan of `{−1,+1}^n` in reflected Gray-code order.
///
/// Only the half with `X_{n−1} = +1` is walked; `Z` is twice that count
/// because `X` and `−X` satisfy the same constraints. The half is split into
/// `2^p` blocks on its top `p` free spins; blocks are independent and may be
/// scanned in any order or concurrently.
#[derive(Debug, Clone)]
pub struct GrayScanner {
    n: usize,
    lanes: usize,
    smax: i16,
    /// Free spins enumerated inside a block.
    low_bits: usize,
    block_bits: usize,
    /// `2·G_{j,i}` for each free spin `i`, `lanes` chunks per spin.
    deltas: Vec<Lane>,
    rows: Vec<u64>,
}

impl GrayScanner {
    pub fn new(g: &ConstraintMatrix, kappa: &Kappa, opts: &CountOptions) -> Result<Self> {
        let n = g.n();
        let limit = opts.n_max.min(N_HARD_MAX);
        if n > limit {
            return Err(Error::Capability {
                what: "exhaustive counting: n exceeds n_max",
                limit: limit as u64,
                requested: n as u64,
            });
        }
        let m = g.m();
        let lanes = m.div_ceil(LANES).max(1);
        let free = n - 1;
        let block_bits = opts.block_bits.min(free);
        let mut deltas = vec![[0i16; LANES]; free * lanes];
        for i in 0..free {
            for j in 0..m {
                deltas[i * lanes + j / LANES][j % LANES] = 2 * g.get(j, i) as i16;
            }
        }
        let rows = (0..m).map(|j| g.row(j)[0]).collect();
        Ok(GrayScanner {
            n,
            lanes,
            smax: kappa.max_abs_sum(n) as i16,
            low_bits: free - block_bits,
            block_bits,
            deltas,
            rows,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_count(&self) -> usize {
        1 << self.block_bits
    }

    fn start(&self, block: usize) -> (u64, Vec<Lane>) {
        assert!(block < self.block_count(), "block index out of range");
        let x = ((block as u64) << self.low_bits) | (1u64 << (self.n - 1));
        let mut sums = vec![[0i16; LANES]; self.lanes];
        for (j, &row) in self.rows.iter().enumerate() {
            sums[j / LANES][j % LANES] = self.n as i16 - 2 * (row ^ x).count_ones() as i16;
        }
        (x, sums)
    }

    #[inline(always)]
    fn admissible(&self, sums: &[Lane]) -> bool {
        let smax = self.smax;
        let mut bad = [0i16; LANES];
        for lane in sums {
            for k in 0..LANES {
                bad[k] |= (lane[k] > smax) as i16 | (lane[k] < -smax) as i16;
            }
        }
        bad.iter().fold(0, |a, &b| a | b) == 0
    }

    #[inline(always)]
    fn walk(&self, block: usize, mut on_solution: impl FnMut(u64)) {
        let (mut x, mut sums) = self.start(block);
        if self.admissible(&sums) {
            on_solution(x);
        }
        let lanes = self.lanes;
        for step in 1u64..(1u64 << self.low_bits) {
            let i = step.trailing_zeros() as usize;
            x ^= 1 << i;
            let d = &self.deltas[i * lanes..(i + 1) * lanes];
            if x >> i & 1 == 1 {
                for (s, dl) in sums.iter_mut().zip(d) {
                    for k in 0..LANES {
                        s[k] += dl[k];
                    }
                }
            } else {
                for (s, dl) in sums.iter_mut().zip(d) {
                    for k in 0..LANES {
                        s[k] -= dl[k];
                    }
                }
            }
            if self.admissible(&sums) {
                on_solution(x);
            }
        }
    }

    /// Solutions with `X_{n−1} = +1` inside `block`.
    pub fn count_block(&self, block: usize) -> u64 {
        let mut count = 0u64;
        self.walk(block, |_| count += 1);
        count
    }

    /// Calls `f` with the spin mask (bit `i` set iff `X_i = +1`) of every
    /// solution in `block`, in scan order.
    pub fn visit_block(&self, block: usize, f: impl FnMut(u64)) {
        self.walk(block, f)
    }

    /// Per-block half counts, sequentially.
    pub fn half_counts(&self) -> Vec<u64> {
        (0..self.block_count()).map(|b| self.count_block(b)).collect()
    }
}

/// Exact `Z(G)` with default options.
pub fn count_solutions(g: &ConstraintMatrix, kappa: &Kappa) -> Result<SolutionSet> {
    count_solutions_with(g, kappa, &CountOptions::default())
}

pub fn count_solutions_with(
    g: &ConstraintMatrix,
    kappa: &Kappa,
    opts: &CountOptions,
) -> Result<SolutionSet> {
    let scanner = GrayScanner::new(g, kappa, opts)?;
    let n = g.n();
    if !(opts.list && n <= LIST_MAX_N) {
        let half: u64 = (0..scanner.block_count()).map(|b| scanner.count_block(b)).sum();
        return Ok(SolutionSet {
            count: 2 * half,
            solutions: None,
        });
    }
    let mut half = Vec::new();
    let mut overflow = false;
    for b in 0..scanner.block_count() {
        scanner.visit_block(b, |x| {
            if !overflow {
                half.push(x);
                overflow = 2 * half.len() as u64 > LIST_MAX_Z;
            }
        });
        if overflow {
            break;
        }
    }
    if overflow {
        return count_solutions_with(g, kappa, &CountOptions { list: false, ..*opts });
    }
    let mut list: Vec<SpinVector> = half.iter().map(|&x| SpinVector::from_bits(n, x)).collect();
    let negated: Vec<SpinVector> = list.iter().map(SpinVector::negated).collect();
    list.extend(negated);
    Ok(SolutionSet {
        count: list.len() as u64,
        solutions: Some(list),
    })
}

/// The `r`-th solution in [`SolutionSet`] scan order, given the scanner's
/// per-block half counts. Uniform `r < Z` yields a uniform solution.
pub fn nth_solution(scanner: &GrayScanner, half_counts: &[u64], r: u64) -> Result<SpinVector> {
    let half: u64 = half_counts.iter().sum();
    if r >= 2 * half {
        return Err(Error::IndexOutOfRange {
            what: "solutions",
            index: r as usize,
            len: 2 * half as usize,
        });
    }
    let (mut rest, negate) = if r < half { (r, false) } else { (r - half, true) };
    for (b, &c) in half_counts.iter().enumerate() {
        if rest >= c {
            rest -= c;
            continue;
        }
        let mut found = None;
        let mut seen = 0u64;
        scanner.visit_block(b, |x| {
            if seen == rest {
                found = Some(x);
            }
            seen += 1;
        });
        let x = SpinVector::from_bits(scanner.n(), found.ok_or(Error::Numeric("block count mismatch"))?);
        return Ok(if negate { x.negated() } else { x });
    }
    Err(Error::Numeric("block count mismatch"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_matrix, satisfies, ModelParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive(g: &ConstraintMatrix, kappa: &Kappa) -> Vec<u64> {
        (0..1u64 << g.n())
            .filter(|&b| satisfies(g, &SpinVector::from_bits(g.n(), b), kappa))
            .collect()
    }

    fn k(s: &str) -> Kappa {
        s.parse().unwrap()
    }

    #[test]
    fn matches_naive_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for (t, kap) in ["1", "0.5", "1.3", "0.8"].iter().cycle().take(60).enumerate() {
            let kappa = k(kap);
            let n = 1 + t % 13;
            let m = 1 + rng.random_range(0..20);
            let g = sample_matrix(&ModelParams::new(kappa, n, m, 0).unwrap(), &mut rng);
            let want = naive(&g, &kappa);
            for bits in [0, 2, 10] {
                let opts = CountOptions { block_bits: bits, list: true, ..Default::default() };
                let set = count_solutions_with(&g, &kappa, &opts).unwrap();
                assert_eq!(set.count, want.len() as u64, "n {n} m {m}");
                let mut got: Vec<u64> = set.solutions.unwrap().iter().map(|x| x.words()[0]).collect();
                got.sort_unstable();
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn vacuous_band_counts_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = sample_matrix(&ModelParams::new(k("5"), 16, 40, 0).unwrap(), &mut rng);
        assert_eq!(count_solutions(&g, &k("5")).unwrap().count, 1 << 16);
    }

    #[test]
    fn rejects_oversized_n() {
        let g = ConstraintMatrix::from_fn(1, 31, |_, _| 1);
        assert!(matches!(count_solutions(&g, &k("1")), Err(Error::Capability { .. })));
        let opts = CountOptions { n_max: 31, block_bits: 20, list: false };
        assert!(GrayScanner::new(&g, &k("1"), &opts).is_ok());
    }

    #[test]
    fn listing_respects_size_cap() {
        let g = ConstraintMatrix::from_fn(1, 25, |_, _| 1);
        let opts = CountOptions { list: true, ..Default::default() };
        assert!(count_solutions_with(&g, &k("1"), &opts).unwrap().solutions.is_none());
    }

    #[test]
    fn nth_solution_walks_listing_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let kappa = k("1");
        let g = sample_matrix(&ModelParams::new(kappa, 12, 6, 0).unwrap(), &mut rng);
        let opts = CountOptions { block_bits: 3, list: true, ..Default::default() };
        let list = count_solutions_with(&g, &kappa, &opts).unwrap().solutions.unwrap();
        let scanner = GrayScanner::new(&g, &kappa, &opts).unwrap();
        let counts = scanner.half_counts();
        for (r, want) in list.iter().enumerate() {
            assert_eq!(&nth_solution(&scanner, &counts, r as u64).unwrap(), want);
        }
        assert!(nth_solution(&scanner, &counts, list.len() as u64).is_err());
    }
}
