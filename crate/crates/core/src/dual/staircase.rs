//! Minimum-energy allocations under cumulative rate constraints.
//!
//! With prefix demands `sum_{i<=k} r[i] >= demand[k]`, the cheapest rates
//! follow water-filling with a non-increasing staircase of levels. The first
//! step's level is the largest constant level needed to meet any single
//! prefix demand on its own; that prefix then becomes tight and the search
//! restarts after it.
//!
//! Prefix caps with a fixed total are the same problem run backwards in
//! time, which yields non-decreasing levels.

use crate::waterfill::{energy_at_level, level_for_rate};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Staircase {
    pub powers: Vec<f64>,
    pub rates: Vec<f64>,
    pub levels: Vec<f64>,
    pub energy: f64,
}

impl Staircase {
    fn zeros(len: usize) -> Self {
        Staircase {
            powers: vec![0.0; len],
            rates: vec![0.0; len],
            levels: vec![0.0; len],
            energy: 0.0,
        }
    }

    fn reversed(mut self) -> Self {
        self.powers.reverse();
        self.rates.reverse();
        self.levels.reverse();
        self
    }

    #[cfg(test)]
    pub fn total_rate(&self) -> f64 {
        self.rates.iter().sum()
    }
}

/// Cheapest rates with `sum_{i<=k} r[i] >= demand[k]` for every `k`.
/// `demand` must be non-decreasing.
pub(crate) fn min_energy_for_demands(gains: &[f64], demand: &[f64]) -> Staircase {
    debug_assert_eq!(gains.len(), demand.len());
    let m = gains.len();
    let mut out = Staircase::zeros(m);
    let mut start = 0;
    let mut delivered = 0.0;
    while start < m {
        let mut best_level = 0.0;
        let mut best_end = m;
        for end in start + 1..=m {
            let need = demand[end - 1] - delivered;
            let level = if need > 0.0 {
                level_for_rate(&gains[start..end], need)
            } else {
                0.0
            };
            if level >= best_level {
                best_level = level;
                best_end = end;
            }
        }
        if best_level <= 0.0 {
            break;
        }
        for (i, g) in gains.iter().enumerate().take(best_end).skip(start) {
            let p = (best_level - 1.0 / g).max(0.0);
            out.powers[i] = p;
            out.rates[i] = (p * g).ln_1p() / std::f64::consts::LN_2;
            out.levels[i] = best_level;
        }
        out.energy += energy_at_level(&gains[start..best_end], best_level);
        delivered += out.rates[start..best_end].iter().sum::<f64>();
        start = best_end;
    }
    out
}

/// Cheapest rates delivering exactly `total` with `sum_{i<=k} r[i] <= caps[k]`.
/// `caps` must be non-decreasing and `total <= caps[last]`.
pub(crate) fn min_energy_under_caps(gains: &[f64], caps: &[f64], total: f64) -> Staircase {
    let m = gains.len();
    let rev_gains: Vec<f64> = gains.iter().rev().copied().collect();
    // suffix of length l must carry at least total - caps[m - l - 1]
    let demand: Vec<f64> = (1..=m)
        .map(|l| if l < m { total - caps[m - l - 1] } else { total })
        .collect();
    min_energy_for_demands(&rev_gains, &demand).reversed()
}

/// Largest total rate under prefix caps and an energy budget.
pub(crate) fn max_rate_under_caps(gains: &[f64], caps: &[f64], budget: f64) -> Staircase {
    let m = gains.len();
    let top = caps.last().copied().unwrap_or(0.0);
    if top <= 0.0 || budget <= 0.0 {
        return Staircase::zeros(m);
    }
    let full = min_energy_under_caps(gains, caps, top);
    if full.energy <= budget {
        return full;
    }
    let (mut lo, mut hi) = (0.0, top);
    let mut best = Staircase::zeros(m);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let s = min_energy_under_caps(gains, caps, mid);
        if s.energy <= budget {
            lo = mid;
            best = s;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * top {
            break;
        }
    }
    best
}
