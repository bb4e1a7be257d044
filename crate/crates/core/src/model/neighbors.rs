use alloc::vec::Vec;

use super::{row_sum_words, satisfies, ConstraintMatrix, SpinVector};
use crate::{Error, Kappa, Result};

struct Search {
    cols: Vec<Vec<i64>>,
    spins: Vec<i64>,
    sums: Vec<i64>,
    band: u128,
}

impl Search {
    fn admissible(&self) -> bool {
        self.sums.iter().all(|&s| (s.unsigned_abs() as u128).pow(2) <= self.band)
    }

    fn flip(&mut self, i: usize) {
        let s = self.spins[i];
        for (sum, g) in self.sums.iter_mut().zip(&self.cols[i]) {
            *sum -= 2 * s * g;
        }
        self.spins[i] = -s;
    }

    /// Looks for an admissible flip set of exactly `left` more spins drawn
    /// from indices `from..`.
    fn dfs(&mut self, from: usize, left: usize) -> bool {
        if left == 0 {
            return self.admissible();
        }
        let n = self.spins.len();
        for i in from..=n - left {
            self.flip(i);
            let hit = self.dfs(i + 1, left - 1);
            self.flip(i);
            if hit {
                return true;
            }
        }
        false
    }
}

/// Smallest `d ≤ radius` such that some solution lies at Hamming distance `d`
/// from `x`, found by exhaustive search over flip sets of growing size.
pub fn nearest_other_solution(
    g: &ConstraintMatrix,
    x: &SpinVector,
    kappa: &Kappa,
    radius: usize,
) -> Result<Option<usize>> {
    if !satisfies(g, x, kappa) {
        return Err(Error::Precondition("starting vector is not a solution"));
    }
    let n = g.n();
    let mut search = Search {
        cols: (0..n)
            .map(|i| (0..g.m()).map(|j| g.get(j, i) as i64).collect())
            .collect(),
        spins: x.signs().into_iter().map(i64::from).collect(),
        sums: (0..g.m()).map(|j| row_sum_words(g.row(j), x.words(), n)).collect(),
        band: kappa.band_sq(n),
    };
    for d in 1..=radius.min(n) {
        if search.dfs(0, d) {
            return Ok(Some(d));
        }
    }
    Ok(None)
}
