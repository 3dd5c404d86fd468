//! Water-filling kernels.
//!
//! Weighted water-filling solves
//!
//! ```text
//! maximize  sum_n w[n] * log2(1 + p[n] * g[n])
//! s.t.      sum_n p[n] = E,  p[n] >= 0
//! ```
//!
//! whose KKT solution is `p[n] = [level * w[n] - 1/g[n]]^+`. The classic
//! kernel is the unit-weight special case with a constant water level.

use crate::error::{RelayError, Result};

const LEVEL_ITERS: usize = 200;
const BUDGET_RESIDUAL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WfResult {
    pub powers: Vec<f64>,
    /// The scalar level; slot `n` sees the effective level `water_level * w[n]`.
    pub water_level: f64,
    /// `log2(1 + p[n] * g[n])`, computed from the powers.
    pub rates: Vec<f64>,
}

impl WfResult {
    pub fn zeros(len: usize) -> Self {
        WfResult {
            powers: vec![0.0; len],
            water_level: 0.0,
            rates: vec![0.0; len],
        }
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }

    pub fn total_rate(&self) -> f64 {
        self.rates.iter().sum()
    }
}

pub(crate) fn rates_from_powers(gains: &[f64], powers: &[f64]) -> Vec<f64> {
    gains
        .iter()
        .zip(powers)
        .map(|(g, p)| (p * g).ln_1p() / std::f64::consts::LN_2)
        .collect()
}

fn check_gains(gains: &[f64]) -> Result<()> {
    if let Some(g) = gains.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(RelayError::param(format!("gain {g} must be positive and finite")));
    }
    Ok(())
}

fn check_budget(budget: f64) -> Result<()> {
    if !(budget.is_finite() && budget >= 0.0) {
        return Err(RelayError::param(format!("budget {budget} must be finite and >= 0")));
    }
    Ok(())
}

pub fn weighted_wf(gains: &[f64], weights: &[f64], budget: f64) -> Result<WfResult> {
    if gains.len() != weights.len() {
        return Err(RelayError::param(format!(
            "{} gains but {} weights",
            gains.len(),
            weights.len()
        )));
    }
    check_gains(gains)?;
    check_budget(budget)?;
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(RelayError::param(format!("weight {w} must be finite and >= 0")));
    }
    if budget == 0.0 {
        return Ok(WfResult::zeros(gains.len()));
    }

    let active: Vec<usize> = (0..gains.len()).filter(|&i| weights[i] > 0.0).collect();
    if active.is_empty() {
        return Err(RelayError::DegenerateWeights { budget });
    }

    let fill = |level: f64| -> f64 {
        active
            .iter()
            .map(|&i| (level * weights[i] - 1.0 / gains[i]).max(0.0))
            .sum()
    };

    let weight_sum: f64 = active.iter().map(|&i| weights[i]).sum();
    let mut lo = 0.0;
    let mut hi = active
        .iter()
        .map(|&i| 1.0 / (gains[i] * weights[i]))
        .fold(0.0, f64::max)
        + budget / weight_sum;
    let mut level = hi;
    for _ in 0..LEVEL_ITERS {
        level = 0.5 * (lo + hi);
        let residual = fill(level) - budget;
        if residual.abs() <= BUDGET_RESIDUAL {
            break;
        }
        if residual > 0.0 {
            hi = level;
        } else {
            lo = level;
        }
    }

    // Bisection identifies the active set; within it the level equation is linear.
    let (num, den) = active
        .iter()
        .filter(|&&i| level * weights[i] > 1.0 / gains[i])
        .fold((budget, 0.0), |(n, d), &i| (n + 1.0 / gains[i], d + weights[i]));
    if den > 0.0 {
        let exact = num / den;
        let consistent = active.iter().all(|&i| {
            let was_on = level * weights[i] > 1.0 / gains[i];
            let is_on = exact * weights[i] > 1.0 / gains[i];
            was_on == is_on || (exact * weights[i] * gains[i] - 1.0).abs() <= 1e-12
        });
        if consistent {
            level = exact;
        }
    }

    let mut powers = vec![0.0; gains.len()];
    for &i in &active {
        powers[i] = (level * weights[i] - 1.0 / gains[i]).max(0.0);
    }
    let rates = rates_from_powers(gains, &powers);
    Ok(WfResult {
        powers,
        water_level: level,
        rates,
    })
}

pub fn classic_wf(gains: &[f64], budget: f64) -> Result<WfResult> {
    weighted_wf(gains, &vec![1.0; gains.len()], budget)
}

/// Aggregate rate `sum_n [log2(level * g[n])]^+` of classic water-filling at `budget`.
pub fn rate_curve(gains: &[f64], budget: f64) -> Result<f64> {
    if budget < 0.0 {
        return Err(RelayError::param(format!("budget {budget} must be >= 0")));
    }
    Ok(classic_wf(gains, budget)?.total_rate())
}

/// Water level whose classic water-filling reaches `target` aggregate rate.
///
/// Sorting the gains makes the active set explicit: with the `k` strongest
/// slots on, `k * log2(level) + sum log2(g) = target`.
pub(crate) fn level_for_rate(gains: &[f64], target: f64) -> f64 {
    if target <= 0.0 || gains.is_empty() {
        return 0.0;
    }
    let mut sorted: Vec<f64> = gains.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut log_sum = 0.0;
    let mut level = 0.0;
    for (k, &g) in sorted.iter().enumerate() {
        log_sum += g.log2();
        level = ((target - log_sum) / (k + 1) as f64).exp2();
        let next_off = sorted.get(k + 1).is_none_or(|&gn| level * gn <= 1.0);
        if next_off {
            break;
        }
    }
    level
}

/// Energy classic water-filling spends at `level`.
pub(crate) fn energy_at_level(gains: &[f64], level: f64) -> f64 {
    gains.iter().map(|g| (level - 1.0 / g).max(0.0)).sum()
}

/// Inverts [`rate_curve`]: the budget at which classic water-filling
/// delivers `target`, searched within `[0, budget_cap]`.
pub fn invert_rate_curve(gains: &[f64], target: f64, budget_cap: f64) -> Result<f64> {
    check_gains(gains)?;
    check_budget(budget_cap)?;
    if !(target.is_finite() && target >= 0.0) {
        return Err(RelayError::param(format!(
            "target rate {target} must be finite and >= 0"
        )));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    let achievable = rate_curve(gains, budget_cap)?;
    if target > achievable + 1e-12 * achievable.max(1.0) {
        return Err(RelayError::InfeasibleTarget { target, achievable });
    }
    let level = level_for_rate(gains, target);
    Ok(energy_at_level(gains, level).clamp(0.0, budget_cap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Brute-force KKT oracle: try every active set and keep the consistent one.
    fn kkt_by_enumeration(gains: &[f64], weights: &[f64], budget: f64) -> (f64, Vec<f64>) {
        let n = gains.len();
        for mask in 1u32..(1 << n) {
            let on: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0 && weights[*i] > 0.0).collect();
            if on.is_empty() {
                continue;
            }
            let level = (budget + on.iter().map(|&i| 1.0 / gains[i]).sum::<f64>())
                / on.iter().map(|&i| weights[i]).sum::<f64>();
            let ok = (0..n).all(|i| {
                let p = level * weights[i] - 1.0 / gains[i];
                if on.contains(&i) {
                    p >= -1e-12
                } else {
                    weights[i] == 0.0 || p <= 1e-12
                }
            });
            if ok {
                let p = (0..n)
                    .map(|i| {
                        if on.contains(&i) {
                            (level * weights[i] - 1.0 / gains[i]).max(0.0)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                return (level, p);
            }
        }
        unreachable!("some active set is always consistent")
    }

    #[test]
    fn two_channel_examples() {
        let r = weighted_wf(&[10.0, 2.0], &[1.0, 1.0], 1.0).unwrap();
        assert_relative_eq!(r.water_level, 0.8, max_relative = 1e-12);
        assert_relative_eq!(r.powers[0], 0.7, max_relative = 1e-12);
        assert_relative_eq!(r.powers[1], 0.3, max_relative = 1e-12);

        let r = weighted_wf(&[10.0, 2.0], &[1.0, 1.0], 0.1).unwrap();
        assert_relative_eq!(r.water_level, 0.2, max_relative = 1e-12);
        assert_relative_eq!(r.powers[0], 0.1, max_relative = 1e-12);
        assert_eq!(r.powers[1], 0.0);

        let r = weighted_wf(&[1.0, 1.0], &[2.0, 1.0], 3.0).unwrap();
        assert_relative_eq!(r.water_level, 5.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(r.powers[0], 7.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(r.powers[1], 2.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_budget_allocates_nothing() {
        let r = weighted_wf(&[3.0, 1.0], &[0.0, 0.0], 0.0).unwrap();
        assert_eq!(r.powers, vec![0.0, 0.0]);
        let r = classic_wf(&[3.0, 1.0], 0.0).unwrap();
        assert_eq!(r.total_rate(), 0.0);
    }

    #[test]
    fn all_zero_weights_with_budget_is_degenerate() {
        let err = weighted_wf(&[3.0, 1.0], &[0.0, 0.0], 1.0).unwrap_err();
        assert!(matches!(err, RelayError::DegenerateWeights { .. }));
    }

    #[test]
    fn zero_weight_slots_get_no_power() {
        let r = weighted_wf(&[100.0, 1.0, 5.0], &[0.0, 1.0, 1.0], 2.0).unwrap();
        assert_eq!(r.powers[0], 0.0);
        assert_relative_eq!(r.total_power(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn input_errors() {
        assert!(weighted_wf(&[1.0], &[1.0, 1.0], 1.0).is_err());
        assert!(weighted_wf(&[0.0], &[1.0], 1.0).is_err());
        assert!(weighted_wf(&[1.0], &[-1.0], 1.0).is_err());
        assert!(weighted_wf(&[1.0], &[1.0], -1.0).is_err());
        assert!(rate_curve(&[1.0], -0.5).is_err());
        assert!(invert_rate_curve(&[1.0], -1.0, 1.0).is_err());
    }

    #[test]
    fn classic_examples() {
        let r = classic_wf(&[10.0, 2.0], 1.0).unwrap();
        assert_relative_eq!(r.powers[0], 0.7, max_relative = 1e-12);
        assert_relative_eq!(r.powers[1], 0.3, max_relative = 1e-12);

        let r = classic_wf(&[7.0], 2.5).unwrap();
        assert_relative_eq!(r.powers[0], 2.5, max_relative = 1e-12);
        assert_relative_eq!(r.rates[0], (1.0 + 2.5 * 7.0f64).log2(), max_relative = 1e-12);

        let r = classic_wf(&[4.0; 6], 3.0).unwrap();
        for p in &r.powers {
            assert_relative_eq!(*p, 0.5, max_relative = 1e-12);
        }
    }

    #[test]
    fn rate_curve_examples() {
        assert_relative_eq!(rate_curve(&[1.0], 3.0).unwrap(), 2.0, max_relative = 1e-12);
        assert_eq!(rate_curve(&[1.0, 5.0], 0.0).unwrap(), 0.0);
        let r = rate_curve(&[4.0, 2.0], 2.0).unwrap();
        assert_relative_eq!(r, 5.5f64.log2() + 2.75f64.log2(), max_relative = 1e-12);
        assert_relative_eq!(r, 3.918_863_237_274_594_6, max_relative = 1e-12);
    }

    #[test]
    fn inverse_examples() {
        assert_relative_eq!(invert_rate_curve(&[1.0], 2.0, 10.0).unwrap(), 3.0, max_relative = 1e-12);
        assert_eq!(invert_rate_curve(&[1.0], 0.0, 10.0).unwrap(), 0.0);
        let target = 5.5f64.log2() + 2.75f64.log2();
        assert_relative_eq!(
            invert_rate_curve(&[4.0, 2.0], target, 5.0).unwrap(),
            2.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn inverse_rejects_unreachable_targets() {
        let err = invert_rate_curve(&[1.0], 2.5, 3.0).unwrap_err();
        assert!(matches!(err, RelayError::InfeasibleTarget { .. }));
    }

    fn wf_case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64)> {
        (1usize..8).prop_flat_map(|n| {
            (
                prop::collection::vec(-2.0..4.0f64, n).prop_map(|v| v.into_iter().map(|e| 10f64.powf(e)).collect()),
                prop::collection::vec(prop_oneof![Just(0.0), 0.01..2.0f64], n),
                0.0..20.0f64,
            )
        })
    }

    proptest! {
        #[test]
        fn matches_active_set_enumeration((gains, mut weights, budget) in wf_case()) {
            if weights.iter().all(|w| *w == 0.0) { weights[0] = 1.0; }
            let r = weighted_wf(&gains, &weights, budget).unwrap();
            if budget > 0.0 {
                let (level, p) = kkt_by_enumeration(&gains, &weights, budget);
                prop_assert!((r.water_level - level).abs() <= 1e-9 * level.max(1.0));
                for (a, b) in r.powers.iter().zip(&p) {
                    prop_assert!((a - b).abs() <= 1e-9 * budget.max(1.0));
                }
                let total: f64 = r.powers.iter().sum();
                prop_assert!((total - budget).abs() <= 1e-9 * budget.max(1e-300));
            }
            for (i, p) in r.powers.iter().enumerate() {
                prop_assert!(*p >= 0.0);
                if weights[i] == 0.0 { prop_assert_eq!(*p, 0.0); }
                if *p > 1e-9 {
                    let lhs = r.water_level * weights[i] - 1.0 / gains[i];
                    prop_assert!((lhs - p).abs() <= 1e-9 * lhs.abs().max(1.0));
                }
            }
        }

        #[test]
        fn inverse_round_trips((gains, _, cap) in wf_case(), frac in 0.0..1.0f64) {
            let top = rate_curve(&gains, cap).unwrap();
            let target = frac * top;
            let e = invert_rate_curve(&gains, target, cap).unwrap();
            prop_assert!(e <= cap);
            prop_assert!((rate_curve(&gains, e).unwrap() - target).abs() <= 1e-8 * target.max(1.0));
        }

        #[test]
        fn rate_curve_is_increasing_and_concave(gains in prop::collection::vec(0.01..100.0f64, 1..6), e in 0.01..10.0f64) {
            let h = e * 0.25;
            let r0 = rate_curve(&gains, e - h * 0.999).unwrap();
            let r1 = rate_curve(&gains, e).unwrap();
            let r2 = rate_curve(&gains, e + h * 0.999).unwrap();
            prop_assert!(r1 > r0 && r2 > r1);
            prop_assert!(r1 - r0 >= r2 - r1 - 1e-12);
        }

        #[test]
        fn ordered_weights_and_gains_give_ordered_rates(
            mut gains in prop::collection::vec(0.1..100.0f64, 2..8),
            mut weights in prop::collection::vec(0.05..1.0f64, 2..8),
            budget in 0.1..10.0f64,
        ) {
            let n = gains.len().min(weights.len());
            gains.truncate(n);
            weights.truncate(n);
            gains.sort_by(|a, b| b.total_cmp(a));
            weights.sort_by(|a, b| b.total_cmp(a));
            let r = weighted_wf(&gains, &weights, budget).unwrap();
            for w in r.rates.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }
}
