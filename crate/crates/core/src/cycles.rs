//! Dense cycle statistics
//!
//! `C_k(G) = (nm)^{−k/2} Σ Π_{ℓ=1}^{k} G_{j_ℓ,i_ℓ} G_{j_ℓ,i_{ℓ+1}}`
//!
//! summed over ordered tuples of distinct columns `i_1..i_k` and distinct
//! rows `j_1..j_k`, with `i_{k+1} = i_1`. The unnormalized sums are exact
//! integers; both evaluation paths divide by the same float at the end, so
//! they agree bit for bit.

use alloc::{vec, vec::Vec};

#[allow(unused_imports)] // shadowed by std inherent methods when std is in the graph
use num_traits::Float;

use crate::{model::ConstraintMatrix, Error, Result};

/// Largest `k` with a closed-form evaluation.
pub const K_FAST: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CycleMethod {
    BruteForce,
    Fast,
}

/// Largest `k` the literal sum accepts for a matrix with `max(n, m) = size`.
pub fn bruteforce_max_k(size: usize) -> usize {
    match size {
        0..=10 => 5,
        11..=40 => 3,
        _ => 0,
    }
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Domain {
            what: "cycle length must be at least 2",
            value: k as f64,
        });
    }
    Ok(())
}

fn check_budget(g: &ConstraintMatrix, k: usize) -> Result<()> {
    check_k(k)?;
    let limit = bruteforce_max_k(g.n().max(g.m()));
    if k > limit {
        return Err(Error::Capability {
            what: "literal cycle sum: k over budget for this size",
            limit: limit as u64,
            requested: k as u64,
        });
    }
    Ok(())
}

/// `(nm)^{k/2}`.
fn scale(n: usize, m: usize, k: usize) -> f64 {
    libm::pow((n * m) as f64, k as f64 / 2.0)
}

/// `raw / (nm)^{k/2}`.
pub fn normalize(raw: i128, n: usize, m: usize, k: usize) -> f64 {
    raw as f64 / scale(n, m, k)
}

/// Visits ordered tuples of `k` distinct values from `0..len`.
fn for_each_tuple(len: usize, k: usize, mut f: impl FnMut(&[usize])) {
    fn rec(len: usize, k: usize, cur: &mut Vec<usize>, used: &mut [bool], f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for v in 0..len {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(len, k, cur, used, f);
                cur.pop();
                used[v] = false;
            }
        }
    }
    if k <= len {
        rec(len, k, &mut Vec::with_capacity(k), &mut vec![false; len], &mut f);
    }
}

/// Literal sum with an arbitrary per-edge weight `edge(j, i, i')`.
fn literal_sum<T: Copy + core::ops::Mul<Output = T> + core::ops::AddAssign>(
    g: &ConstraintMatrix,
    k: usize,
    zero: T,
    one: T,
    edge: impl Fn(usize, usize, usize) -> T,
) -> T {
    let mut total = zero;
    for_each_tuple(g.n(), k, |is| {
        for_each_tuple(g.m(), k, |js| {
            let mut prod = one;
            for l in 0..k {
                prod = prod * edge(js[l], is[l], is[(l + 1) % k]);
            }
            total += prod;
        });
    });
    total
}

/// Unnormalized literal sum.
pub fn cycle_count_bruteforce(g: &ConstraintMatrix, k: usize) -> Result<i128> {
    check_budget(g, k)?;
    let dense = g.to_dense();
    let n = g.n();
    Ok(literal_sum(g, k, 0i128, 1i128, |j, i, i2| {
        (dense[j * n + i] * dense[j * n + i2]) as i128
    }))
}

/// Reference evaluation of `C_k` by the defining sum.
pub fn cycle_stat_bruteforce(g: &ConstraintMatrix, k: usize) -> Result<f64> {
    Ok(normalize(cycle_count_bruteforce(g, k)?, g.n(), g.m(), k))
}

/// Square integer matrix, row-major.
struct Square {
    p: usize,
    a: Vec<i64>,
}

impl Square {
    fn at(&self, r: usize, c: usize) -> i64 {
        self.a[r * self.p + c]
    }

    fn mul(&self, other: &Square) -> Square {
        let p = self.p;
        let mut out = vec![0i64; p * p];
        for r in 0..p {
            for t in 0..p {
                let x = self.at(r, t);
                if x == 0 {
                    continue;
                }
                let row = &other.a[t * p..(t + 1) * p];
                for (o, &y) in out[r * p..(r + 1) * p].iter_mut().zip(row) {
                    *o += x * y;
                }
            }
        }
        Square { p, a: out }
    }
}

/// `W_{ab} = ⟨r_a, r_b⟩` over the rows of a bit-packed matrix.
fn gram(rows: &ConstraintMatrix) -> Square {
    let (p, len) = (rows.m(), rows.n() as i64);
    let mut w = vec![0i64; p * p];
    for a in 0..p {
        let ra = rows.row(a);
        for b in a..p {
            let disagree: u32 = ra.iter().zip(rows.row(b)).map(|(x, y)| (x ^ y).count_ones()).sum();
            let v = len - 2 * disagree as i64;
            w[a * p + b] = v;
            w[b * p + a] = v;
        }
    }
    Square { p, a: w }
}

/// Falling factorial `p (p−1) … (p−r+1)`.
fn falling(p: i128, r: i128) -> i128 {
    (0..r).map(|t| p - t).product()
}

/// Unnormalized `C_k` sum by trace identities for `2 ≤ k ≤ 4`.
///
/// Works on the smaller side: `A` is `q × p` with `p ≤ q`, `W = AᵀA`, `W'`
/// is `W` with zero diagonal. Coincident row indices are removed by
/// inclusion–exclusion; each correction is a closed sum over `W`, `W'²`
/// and `AAᵀ`.
pub fn cycle_count_fast(g: &ConstraintMatrix, k: usize) -> Result<i128> {
    check_k(k)?;
    if k > K_FAST {
        return Err(Error::Capability {
            what: "closed-form cycle sum",
            limit: K_FAST as u64,
            requested: k as u64,
        });
    }
    // `cols` holds the p columns of A, `rows` its q rows.
    let (cols, rows) = if g.n() > g.m() {
        (g.clone(), g.transpose())
    } else {
        (g.transpose(), g.clone())
    };
    let (p, q) = (cols.m(), rows.m());
    if p < k || q < k {
        return Ok(0);
    }
    let mut wp = gram(&cols);
    for d in 0..p {
        wp.a[d * p + d] = 0;
    }
    let (pi, qi) = (p as i128, q as i128);
    let s2: i128 = wp.a.iter().map(|&x| (x as i128).pow(2)).sum();
    if k == 2 {
        return Ok(s2 - falling(pi, 2) * qi);
    }
    let wp2 = wp.mul(&wp);
    let tr3: i128 = wp2.a.iter().zip(&wp.a).map(|(&x, &y)| x as i128 * y as i128).sum();
    if k == 3 {
        return Ok(tr3 - 3 * (pi - 2) * s2 + 2 * qi * falling(pi, 3));
    }
    let tr4: i128 = wp2.a.iter().map(|&x| (x as i128).pow(2)).sum();
    let r_sq: i128 = (0..p)
        .map(|r| {
            let ra: i128 = (0..p).map(|c| (wp.at(r, c) as i128).pow(2)).sum();
            ra * ra
        })
        .sum();
    let w4: i128 = wp.a.iter().map(|&x| (x as i128).pow(4)).sum();
    let distinct4 = tr4 - 2 * r_sq + w4;

    // Σ_j (s_j² − 4 Σ_a v_j(a)²) with v_j(a) = A_{j,a} (W' a_j)_a.
    let a = rows.to_dense();
    let mut term13: i128 = 0;
    let mut wa = vec![0i64; p];
    for row in a.chunks_exact(p) {
        for (r, o) in wa.iter_mut().enumerate() {
            *o = wp.a[r * p..(r + 1) * p]
                .iter()
                .zip(row)
                .map(|(&x, &y)| x * y as i64)
                .sum();
        }
        let mut s = 0i128;
        let mut sq = 0i128;
        for (&x, &y) in row.iter().zip(&wa) {
            let v = (x as i64 * y) as i128;
            s += v;
            sq += v * v;
        }
        term13 += s * s - 4 * sq;
    }
    term13 += 2 * qi * s2;

    // Σ_{j,j'} [V⁴ − (6p − 8)V² + 3p² − 6p] with V = AAᵀ.
    let mut qsq: i128 = 0;
    let v_gram = gram(&rows);
    for &v in &v_gram.a {
        let v2 = (v as i128).pow(2);
        qsq += v2 * v2 - (6 * pi - 8) * v2 + 3 * pi * pi - 6 * pi;
    }

    Ok(distinct4 - 4 * (pi - 3) * tr3 - 2 * term13 + 10 * (pi - 2) * (pi - 3) * s2 + qsq
        - 6 * qi * falling(pi, 4))
}

/// `C_k` by the closed forms; equal to [`cycle_stat_bruteforce`] wherever
/// both are defined.
pub fn cycle_stat_fast(g: &ConstraintMatrix, k: usize) -> Result<f64> {
    Ok(normalize(cycle_count_fast(g, k)?, g.n(), g.m(), k))
}

/// Declares the planting the shifted count subtracts.
///
/// The matrix must be gauged so the planted vector is all-ones; for a pair
/// the second vector is `+1` on columns `0..block` and `−1` after.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlantInfo {
    Single { beta_n: f64 },
    Pair { beta_n: f64, block: usize },
}

/// Shifted count: each edge factor `G_{j,i}G_{j,i'}` is reduced by its
/// planted expectation, `2β_n/√(mn)` for one plant, or `4β_n/√(mn)` when `i`
/// and `i'` lie on the same side of the block boundary for a pair (`0`
/// otherwise).
pub fn cycle_stat_shifted(g: &ConstraintMatrix, k: usize, plant: PlantInfo) -> Result<f64> {
    check_budget(g, k)?;
    let (n, m) = (g.n(), g.m());
    let unit = 1.0 / ((n * m) as f64).sqrt();
    let dense = g.to_dense();
    let shift = |i: usize, i2: usize| match plant {
        PlantInfo::Single { beta_n } => 2.0 * beta_n * unit,
        PlantInfo::Pair { beta_n, block } => {
            if (i < block) == (i2 < block) {
                4.0 * beta_n * unit
            } else {
                0.0
            }
        }
    };
    let raw = literal_sum(g, k, 0.0f64, 1.0f64, |j, i, i2| {
        (dense[j * n + i] * dense[j * n + i2]) as f64 - shift(i, i2)
    });
    Ok(raw / scale(n, m, k))
}

/// `C_2 … C_{M1}` of one matrix; `None` where no evaluation path fits.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleStats {
    pub n: usize,
    pub m: usize,
    /// Entry `k − 2`.
    pub values: Vec<Option<(f64, CycleMethod)>>,
}

impl CycleStats {
    /// Closed forms for `k ≤ 4`, the literal sum beyond when within budget.
    pub fn compute(g: &ConstraintMatrix, m1: usize) -> Result<Self> {
        check_k(m1)?;
        let size = g.n().max(g.m());
        let mut values = Vec::with_capacity(m1 - 1);
        for k in 2..=m1 {
            values.push(if k <= K_FAST {
                Some((cycle_stat_fast(g, k)?, CycleMethod::Fast))
            } else if k <= bruteforce_max_k(size) {
                Some((cycle_stat_bruteforce(g, k)?, CycleMethod::BruteForce))
            } else {
                None
            });
        }
        Ok(CycleStats {
            n: g.n(),
            m: g.m(),
            values,
        })
    }

    pub fn m1(&self) -> usize {
        self.values.len() + 1
    }

    pub fn c(&self, k: usize) -> Option<f64> {
        self.values.get(k.checked_sub(2)?).copied().flatten().map(|(v, _)| v)
    }

    pub fn missing(&self, m1: usize) -> Vec<usize> {
        (2..=m1).filter(|&k| self.c(k).is_none()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BetaConvention {
    /// `β_n` from the finite-`n` constants.
    Finite,
    /// Limit value `β`.
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionTerm {
    pub y: f64,
    pub m1: usize,
    pub beta_used: f64,
    pub convention: BetaConvention,
}

/// `Y_{M1} = Σ_{k=2}^{M1} [2(2β)^k C_k − (2β)^{2k}] / (4k)`.
pub fn correction_y(
    stats: &CycleStats,
    m1: usize,
    beta: f64,
    convention: BetaConvention,
) -> Result<CorrectionTerm> {
    check_k(m1)?;
    let missing = stats.missing(m1);
    if !missing.is_empty() {
        return Err(Error::MissingCycles(missing));
    }
    let two_b = 2.0 * beta;
    let y = (2..=m1)
        .map(|k| {
            let c = stats.c(k).unwrap_or(0.0);
            let pk = two_b.powi(k as i32);
            (2.0 * pk * c - pk * pk) / (4 * k) as f64
        })
        .sum();
    Ok(CorrectionTerm {
        y,
        m1,
        beta_used: beta,
        convention,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_matrix, ModelParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, m: usize, rng: &mut ChaCha8Rng) -> ConstraintMatrix {
        sample_matrix(&ModelParams::new("1".parse().unwrap(), n, m, 0).unwrap(), rng)
    }

    #[test]
    fn all_ones_two_by_two() {
        let g = ConstraintMatrix::from_fn(2, 2, |_, _| 1);
        assert_eq!(cycle_stat_bruteforce(&g, 2).unwrap(), 1.0);
        assert_eq!(cycle_stat_fast(&g, 2).unwrap(), 1.0);
    }

    #[test]
    fn all_ones_general() {
        for (n, m) in [(5, 7), (9, 3), (6, 6)] {
            let g = ConstraintMatrix::from_fn(m, n, |_, _| 1);
            for k in 2..=4 {
                let want = (falling(n as i128, k as i128) * falling(m as i128, k as i128)) as f64;
                assert_eq!(cycle_stat_fast(&g, k).unwrap(), want / scale(n, m, k));
            }
        }
    }

    #[test]
    fn k2_matches_schoolbook_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = random(6, 6, &mut rng);
        let mut raw = 0i64;
        for i1 in 0..6 {
            for i2 in 0..6 {
                for j1 in 0..6 {
                    for j2 in 0..6 {
                        if i1 != i2 && j1 != j2 {
                            raw += (g.get(j1, i1) * g.get(j1, i2) * g.get(j2, i2) * g.get(j2, i1)) as i64;
                        }
                    }
                }
            }
        }
        assert_eq!(cycle_count_bruteforce(&g, 2).unwrap(), raw as i128);
    }

    #[test]
    fn fast_equals_bruteforce() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..150 {
            let n = rng.random_range(1..=7);
            let m = rng.random_range(1..=7);
            let g = random(n, m, &mut rng);
            for k in 2..=4 {
                assert_eq!(
                    cycle_count_fast(&g, k).unwrap(),
                    cycle_count_bruteforce(&g, k).unwrap(),
                    "n {n} m {m} k {k}"
                );
            }
        }
    }

    #[test]
    fn row_and_column_sign_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = random(7, 6, &mut rng);
        let mut h = g.clone();
        h.negate_row(2);
        h.negate_column(4);
        let perm = [3, 0, 6, 1, 5, 2, 4];
        let h = h.permute_columns(&perm);
        for k in 2..=4 {
            assert_eq!(cycle_stat_fast(&g, k).unwrap(), cycle_stat_fast(&h, k).unwrap());
            assert_eq!(cycle_stat_bruteforce(&g, k).unwrap(), cycle_stat_bruteforce(&h, k).unwrap());
        }
    }

    #[test]
    fn budgets_are_enforced() {
        let g = ConstraintMatrix::from_fn(11, 11, |_, _| 1);
        assert!(cycle_stat_bruteforce(&g, 4).is_err());
        assert!(cycle_stat_bruteforce(&g, 3).is_ok());
        assert!(cycle_stat_fast(&g, 5).is_err());
        assert!(cycle_stat_bruteforce(&g, 1).is_err());
        let big = ConstraintMatrix::from_fn(41, 3, |_, _| 1);
        assert!(cycle_stat_bruteforce(&big, 2).is_err());
    }

    #[test]
    fn shifted_with_zero_beta_is_plain() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = random(5, 6, &mut rng);
        for k in 2..=3 {
            let plain = cycle_stat_bruteforce(&g, k).unwrap();
            let s = cycle_stat_shifted(&g, k, PlantInfo::Single { beta_n: 0.0 }).unwrap();
            assert!((plain - s).abs() < 1e-12);
        }
    }

    #[test]
    fn shifted_k2_expansion() {
        // Σ (h1 − s)(h2 − s) = T2 − 2s(m−1)Σ_j(S_j² − n) + s² n(n−1)m(m−1).
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (n, m) = (4usize, 4usize);
        let g = random(n, m, &mut rng);
        let beta_n = -0.3;
        let s = 2.0 * beta_n / ((n * m) as f64).sqrt();
        let row_part: f64 = (0..m)
            .map(|j| {
                let sj: i64 = (0..n).map(|i| g.get(j, i) as i64).sum();
                (sj * sj - n as i64) as f64
            })
            .sum();
        let t2 = cycle_count_bruteforce(&g, 2).unwrap() as f64;
        let want = (t2 - 2.0 * s * (m - 1) as f64 * row_part
            + s * s * (n * (n - 1) * m * (m - 1)) as f64)
            / (n * m) as f64;
        let got = cycle_stat_shifted(&g, 2, PlantInfo::Single { beta_n }).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn pair_shift_with_full_block_doubles() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = random(5, 5, &mut rng);
        let single = cycle_stat_shifted(&g, 3, PlantInfo::Single { beta_n: -0.4 }).unwrap();
        let pair = cycle_stat_shifted(&g, 3, PlantInfo::Pair { beta_n: -0.2, block: 5 }).unwrap();
        assert!((single - pair).abs() < 1e-12);
    }

    #[test]
    fn correction_assembly() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let g = random(9, 8, &mut rng);
        let stats = CycleStats::compute(&g, 5).unwrap();
        assert_eq!(stats.missing(5), Vec::<usize>::new());
        let zero = correction_y(&stats, 5, 0.0, BetaConvention::Finite).unwrap();
        assert_eq!(zero.y, 0.0);
        let b = -0.3;
        let y2 = correction_y(&stats, 2, b, BetaConvention::Finite).unwrap().y;
        let c2 = stats.c(2).unwrap();
        let want = (2.0 * (2.0 * b).powi(2) * c2 - (2.0 * b).powi(4)) / 8.0;
        assert!((y2 - want).abs() < 1e-15);

        let wide = CycleStats::compute(&random(20, 18, &mut rng), 6).unwrap();
        match correction_y(&wide, 6, b, BetaConvention::Finite) {
            Err(Error::MissingCycles(ks)) => assert_eq!(ks, vec![5, 6]),
            other => panic!("expected missing cycles, got {other:?}"),
        }
    }
}
