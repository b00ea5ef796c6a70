//! Refocusing schemes built from rows of a Sylvester-Hadamard matrix.
//!
//! Spins that share a nonzero coupling get different rows, so their
//! coupling averages out over the period; the active pair shares row 0 (or
//! row 0 and its negation for a sign flip) and stays coupled throughout.

use crate::error::{Error, Result};
use crate::spin::SpinSystem;

#[derive(Debug, Clone, PartialEq)]
pub struct RefocusScheme {
    pub total_time: f64,
    /// Equal segments of total_time / m.
    pub segments: Vec<f64>,
    /// sign_grid[spin][segment] is +1 or -1.
    pub sign_grid: Vec<Vec<i8>>,
    /// pulse_grid[boundary][spin]: a 180 pulse at boundary k (0..=m), before segment k.
    pub pulse_grid: Vec<Vec<bool>>,
    /// Active pair and the sign of its net evolution.
    pub active: Option<(usize, usize, i8)>,
}

/// Sign of Walsh row r at segment k.
fn walsh(r: usize, k: usize) -> i8 {
    if (r & k).count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

impl RefocusScheme {
    pub fn m(&self) -> usize {
        self.segments.len()
    }

    /// Sum over segments of sign_i * sign_j, in units of one segment.
    pub fn pair_balance(&self, i: usize, j: usize) -> i64 {
        self.sign_grid[i].iter().zip(&self.sign_grid[j]).map(|(a, b)| (*a as i64) * (*b as i64)).sum()
    }

    /// Intended balance: +-m for the active pair, 0 for other coupled
    /// pairs, anything for pairs of known-z spins or uncoupled pairs.
    pub fn check(&self, system: &SpinSystem, known_z: &[usize]) -> Result<()> {
        let n = system.n;
        let m = self.m() as i64;
        for i in 0..n {
            for j in i + 1..n {
                let bal = self.pair_balance(i, j);
                let want = match self.active {
                    Some((a, b, s)) if (a, b) == (i, j) || (a, b) == (j, i) => Some(m * s as i64),
                    _ if system.effective_j(i, j) == 0.0 => None,
                    _ if known_z.contains(&i) && known_z.contains(&j) => None,
                    _ => Some(0),
                };
                if let Some(w) = want {
                    if bal != w {
                        return Err(Error::Invariant(format!("pair ({}, {}) balance {} != {}", i + 1, j + 1, bal, w)));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn pulse_count(&self) -> usize {
        self.pulse_grid.iter().map(|b| b.iter().filter(|x| **x).count()).sum()
    }
}

/// Assign sign rows so that all couplings but the active pair cancel.
///
/// `active` is (a, b, sign): sign -1 flips the net evolution of the pair.
pub fn synthesize_refocus(
    system: &SpinSystem,
    active: Option<(usize, usize, i8)>,
    total_time: f64,
    known_z: &[usize],
) -> Result<RefocusScheme> {
    let n = system.n;
    if total_time <= 0.0 {
        return Err(Error::InvalidArgument("refocus period must be positive".into()));
    }
    if let Some((a, b, s)) = active {
        if a == b || a >= n || b >= n || s == 0 {
            return Err(Error::Infeasible(format!("bad active pair ({}, {})", a + 1, b + 1)));
        }
    }
    let is_active = |i: usize, j: usize| matches!(active, Some((a, b, _)) if (a, b) == (i, j) || (a, b) == (j, i));
    let conflict = |i: usize, j: usize| {
        i != j && system.effective_j(i, j) != 0.0 && !is_active(i, j) && !(known_z.contains(&i) && known_z.contains(&j))
    };

    // greedy colouring; the active pair is fixed to row 0
    let mut color: Vec<Option<usize>> = vec![None; n];
    if let Some((a, b, _)) = active {
        color[a] = Some(0);
        color[b] = Some(0);
    }
    let mut order: Vec<usize> = (0..n).filter(|&s| color[s].is_none()).collect();
    // high-degree spins first
    order.sort_by_key(|&s| std::cmp::Reverse((0..n).filter(|&j| conflict(s, j)).count()));
    for s in order {
        let used: Vec<usize> = (0..n).filter(|&j| conflict(s, j)).filter_map(|j| color[j]).collect();
        let mut cidx = 0;
        while used.contains(&cidx) {
            cidx += 1;
        }
        color[s] = Some(cidx);
    }
    let ncolors = color.iter().map(|c| c.unwrap() + 1).max().unwrap_or(1);
    let m = ncolors.next_power_of_two();

    let mut sign_grid: Vec<Vec<i8>> = (0..n).map(|s| (0..m).map(|k| walsh(color[s].unwrap(), k)).collect()).collect();
    if let Some((_, b, -1)) = active {
        for v in sign_grid[b].iter_mut() {
            *v = -*v;
        }
    }
    let mut pulse_grid = vec![vec![false; n]; m + 1];
    for s in 0..n {
        let mut prev = 1i8;
        for k in 0..=m {
            let cur = if k < m { sign_grid[s][k] } else { 1 };
            if cur != prev {
                pulse_grid[k][s] = true;
            }
            prev = cur;
        }
    }
    let scheme = RefocusScheme { total_time, segments: vec![total_time / m as f64; m], sign_grid, pulse_grid, active };
    scheme.check(system, known_z)?;
    Ok(scheme)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_spin_echo() {
        let sys = SpinSystem::new(2).with_j(0, 1, 100.0);
        let s = synthesize_refocus(&sys, None, 0.01, &[]).unwrap();
        assert_eq!(s.m(), 2);
        assert_eq!(s.pair_balance(0, 1), 0);
        assert_eq!(s.pulse_count(), 2);
    }

    #[test]
    fn four_spin_active_pair() {
        let mut sys = SpinSystem::new(4);
        for i in 0..4 {
            for j in i + 1..4 {
                sys.set_j(i, j, 10.0 + (i * 4 + j) as f64);
            }
        }
        let s = synthesize_refocus(&sys, Some((0, 1, 1)), 0.01, &[]).unwrap();
        assert_eq!(s.pair_balance(0, 1), s.m() as i64);
        assert_eq!(s.pair_balance(2, 3), 0);
        assert_eq!(s.pair_balance(0, 2), 0);
        let neg = synthesize_refocus(&sys, Some((0, 1, -1)), 0.01, &[]).unwrap();
        assert_eq!(neg.pair_balance(0, 1), -(neg.m() as i64));
    }

    #[test]
    fn known_z_pairs_left_alone() {
        let sys = SpinSystem::new(3).with_j(0, 1, 50.0).with_j(1, 2, 40.0).with_j(0, 2, 30.0);
        let full = synthesize_refocus(&sys, None, 1.0, &[]).unwrap();
        let relaxed = synthesize_refocus(&sys, None, 1.0, &[1, 2]).unwrap();
        assert!(relaxed.pulse_count() <= full.pulse_count());
    }
}
