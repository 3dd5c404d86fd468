//! Independent checks: a strict feasibility audit for any allocation and an
//! exhaustive grid search for tiny instances.
//!
//! Nothing here calls the water-filling kernels or the dual machinery except
//! [`duality_gap`], which needs the dual function by definition.

use std::fmt;

use rayon::prelude::*;

use crate::dual::{evaluate_dual, DualPoint, ProblemInstance};
use crate::error::{RelayError, Result};
use crate::solution::{buffer_trace, CaseTag, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintId {
    SourcePowerNonNegative,
    RelayPowerNonNegative,
    SourceBudget,
    RelayBudget,
    SourceRateCap,
    RelayRateCap,
    InformationCausality,
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConstraintId::SourcePowerNonNegative => "p_s >= 0",
            ConstraintId::RelayPowerNonNegative => "p_r >= 0",
            ConstraintId::SourceBudget => "sum p_s <= E_s",
            ConstraintId::RelayBudget => "sum p_r <= E_r",
            ConstraintId::SourceRateCap => "r_s <= log2(1 + p_s g_sr)",
            ConstraintId::RelayRateCap => "r_r <= log2(1 + p_r g_rd)",
            ConstraintId::InformationCausality => "information causality",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintViolation {
    pub constraint: ConstraintId,
    /// 1-based slot, or 0 for budget constraints.
    pub slot: usize,
    /// Raw amount by which the constraint is exceeded (bits or power units).
    pub magnitude: f64,
    /// `magnitude` divided by the problem scale for its units.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub violations: Vec<ConstraintViolation>,
    /// Largest normalized violation, 0 if none.
    pub max_violation: f64,
    pub passed: bool,
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// Audits `sol` against every constraint of the problem.
///
/// Rate violations are normalized by `max(1, sum of source-link capacities)`
/// and power violations by `max(1, budget)`.
pub fn check_feasibility(inst: &ProblemInstance, sol: &Solution, tol: f64) -> Result<FeasibilityReport> {
    let m = inst.dual_dim();
    for (name, len) in [
        ("p_s", sol.p_s.len()),
        ("r_s", sol.r_s.len()),
        ("p_r", sol.p_r.len()),
        ("r_r", sol.r_r.len()),
    ] {
        if len != m {
            return Err(RelayError::param(format!("{name} has {len} entries, expected {m}")));
        }
    }
    let g_sr = inst.gains.g_sr();
    let g_rd = inst.gains.g_rd();
    let cap_s: Vec<f64> = (0..m).map(|i| log2_1p(sol.p_s[i].max(0.0) * g_sr[i])).collect();
    let cap_r: Vec<f64> = (0..m).map(|i| log2_1p(sol.p_r[i].max(0.0) * g_rd[i + 1])).collect();
    let rate_scale = cap_s.iter().sum::<f64>().max(1.0);
    let es_scale = inst.e_s.max(1.0);
    let er_scale = inst.e_r.max(1.0);

    let mut violations = Vec::new();
    let mut push = |constraint, slot, magnitude: f64, scale: f64| {
        if magnitude > 0.0 || magnitude.is_nan() {
            violations.push(ConstraintViolation {
                constraint,
                slot,
                magnitude,
                normalized: magnitude / scale,
            });
        }
    };

    for i in 0..m {
        push(ConstraintId::SourcePowerNonNegative, i + 1, -sol.p_s[i], es_scale);
        push(ConstraintId::RelayPowerNonNegative, i + 2, -sol.p_r[i], er_scale);
        push(ConstraintId::SourceRateCap, i + 1, sol.r_s[i] - cap_s[i], rate_scale);
        push(ConstraintId::RelayRateCap, i + 2, sol.r_r[i] - cap_r[i], rate_scale);
    }
    push(
        ConstraintId::SourceBudget,
        0,
        sol.p_s.iter().sum::<f64>() - inst.e_s,
        es_scale,
    );
    push(
        ConstraintId::RelayBudget,
        0,
        sol.p_r.iter().sum::<f64>() - inst.e_r,
        er_scale,
    );

    let mut received = 0.0;
    let mut sent = 0.0;
    for i in 0..m {
        received += sol.r_s[i];
        sent += sol.r_r[i];
        push(ConstraintId::InformationCausality, i + 2, sent - received, rate_scale);
    }

    let max_violation = violations
        .iter()
        .map(|v| {
            if v.normalized.is_nan() {
                f64::INFINITY
            } else {
                v.normalized
            }
        })
        .fold(0.0, f64::max);
    Ok(FeasibilityReport {
        passed: max_violation <= tol,
        violations,
        max_violation,
    })
}

/// `g(dp) - objective(sol)`; weak duality makes it non-negative.
pub fn duality_gap(inst: &ProblemInstance, dp: &DualPoint, sol: &Solution) -> Result<f64> {
    let report = check_feasibility(inst, sol, 1e-6)?;
    if !report.passed {
        return Err(RelayError::param(format!(
            "solution is infeasible (max violation {:.3e})",
            report.max_violation
        )));
    }
    Ok(evaluate_dual(inst, dp)?.g_value - sol.objective)
}

/// Grid-search result with a certified optimality band: the true optimum
/// lies in `[solution.objective, solution.objective + band]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub solution: Solution,
    pub band: f64,
}

pub const DEFAULT_GRID_POINTS: usize = 21;
pub const DEFAULT_REFINE_ROUNDS: usize = 3;

/// Candidate power vectors for one side with their per-slot capacities.
struct Side {
    powers: Vec<Vec<f64>>,
    rates: Vec<Vec<f64>>,
}

impl Side {
    fn new(powers: Vec<Vec<f64>>, gains: &[f64]) -> Side {
        let rates = powers
            .iter()
            .map(|p| p.iter().zip(gains).map(|(p, g)| log2_1p(p * g)).collect())
            .collect();
        Side { powers, rates }
    }
}

/// All `k` with `k_i >= 0`, `sum k <= total`, in lexicographic order.
fn simplex_lattice(dim: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == dim {
            out.push(prefix.clone());
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(dim, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, total, &mut Vec::with_capacity(dim), &mut out);
    out
}

fn coarse_grid(dim: usize, intervals: usize, budget: f64) -> Vec<Vec<f64>> {
    if budget == 0.0 {
        return vec![vec![0.0; dim]];
    }
    let step = budget / intervals as f64;
    simplex_lattice(dim, intervals)
        .into_iter()
        .map(|k| k.into_iter().map(|k| k as f64 * step).collect())
        .collect()
}

/// Box of half-width `half` around `center`, clipped to the budget simplex.
fn box_grid(center: &[f64], half: f64, points: usize, budget: f64) -> Vec<Vec<f64>> {
    if budget == 0.0 {
        return vec![vec![0.0; center.len()]];
    }
    let axes: Vec<Vec<f64>> = center
        .iter()
        .map(|&c| {
            let lo = (c - half).max(0.0);
            let hi = (c + half).min(budget);
            let mut axis: Vec<f64> = (0..points)
                .map(|j| lo + (hi - lo) * j as f64 / (points - 1) as f64)
                .collect();
            axis.push(c);
            axis.sort_by(f64::total_cmp);
            axis.dedup();
            axis
        })
        .collect();
    let mut out = vec![Vec::new()];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out.retain(|p| p.iter().sum::<f64>() <= budget);
    out
}

/// Relay data actually forwarded: each slot sends `min(capacity, buffer)`.
/// For fixed powers this is the largest causal total, because sending
/// earlier never shrinks what later slots may send.
fn greedy_relay(source_rates: &[f64], relay_caps: &[f64], out: &mut [f64]) -> f64 {
    let mut buffer = 0.0;
    let mut total = 0.0;
    for i in 0..source_rates.len() {
        buffer += source_rates[i];
        let r = relay_caps[i].min(buffer);
        out[i] = r;
        buffer -= r;
        total += r;
    }
    total
}

fn greedy_total(source_rates: &[f64], relay_caps: &[f64]) -> f64 {
    let mut buffer = 0.0;
    let mut total = 0.0;
    for (s, c) in source_rates.iter().zip(relay_caps) {
        buffer += s;
        let r = c.min(buffer);
        buffer -= r;
        total += r;
    }
    total
}

/// Best (source, relay) pair; ties keep the lexicographically smallest pair.
fn search(source: &Side, relay: &Side) -> (f64, usize, usize) {
    source
        .rates
        .par_iter()
        .enumerate()
        .map(|(si, rs)| {
            let mut best = (f64::NEG_INFINITY, si, 0);
            for (ri, rc) in relay.rates.iter().enumerate() {
                let v = greedy_total(rs, rc);
                if v > best.0 {
                    best = (v, si, ri);
                }
            }
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX, usize::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                    b
                } else {
                    a
                }
            },
        )
}

/// Worst-case loss from rounding an optimal point onto the coarse grid.
///
/// Total forwarded data is `min_k (sum_{i<k} r_s[i] + sum_{i>k} c_r[i])`, so
/// rounding losses `a_i` on source rates and `b_i` on relay capacities cost
/// at most `max_k (sum_{i<k} a_i + sum_{i>k} b_i)`. Rounding a power down by
/// `d` loses at most `log2(1 + d g)` bits.
fn rounding_band(inst: &ProblemInstance, intervals: usize) -> f64 {
    let m = inst.dual_dim();
    let deficit = |budget: f64| {
        let step = budget / intervals as f64;
        // one coordinate can round to the nearest grid point and stay feasible
        if m == 1 {
            0.5 * step
        } else {
            step
        }
    };
    let ds = deficit(inst.e_s);
    let dr = deficit(inst.e_r);
    let a: Vec<f64> = inst.gains.source_slots().iter().map(|g| log2_1p(ds * g)).collect();
    let b: Vec<f64> = inst.gains.relay_slots().iter().map(|g| log2_1p(dr * g)).collect();
    // cut k = 0..=m: source slots before k, relay slots from k on
    (0..=m)
        .map(|k| a[..k].iter().sum::<f64>() + b[k..].iter().sum::<f64>())
        .fold(0.0, f64::max)
}

/// Exhaustive search over source and relay power grids, then `refine_rounds`
/// zoomed searches around the incumbent (box shrinks 4x per round).
pub fn grid_search_solve(
    inst: &ProblemInstance,
    grid_points_per_dim: usize,
    refine_rounds: usize,
) -> Result<OracleResult> {
    let n = inst.n_slots();
    if n > 4 {
        return Err(RelayError::UnsupportedSize(n));
    }
    if grid_points_per_dim < 5 {
        return Err(RelayError::param(format!(
            "grid needs at least 5 points per dimension, got {grid_points_per_dim}"
        )));
    }
    let m = inst.dual_dim();
    let intervals = grid_points_per_dim - 1;
    let gs = inst.gains.source_slots();
    let gr = inst.gains.relay_slots();

    let source = Side::new(coarse_grid(m, intervals, inst.e_s), gs);
    let relay = Side::new(coarse_grid(m, intervals, inst.e_r), gr);
    let (coarse_best, si, ri) = search(&source, &relay);
    let mut best = (coarse_best, source.powers[si].clone(), relay.powers[ri].clone());
    // putting a whole budget into every slot at once over-counts each side
    let naive = |gains: &[f64], e: f64| gains.iter().map(|g| log2_1p(e * g)).sum::<f64>();
    let upper = (coarse_best + rounding_band(inst, intervals))
        .min(naive(gs, inst.e_s))
        .min(naive(gr, inst.e_r));

    let mut half_s = inst.e_s / 2.0;
    let mut half_r = inst.e_r / 2.0;
    for _ in 0..refine_rounds {
        half_s /= 4.0;
        half_r /= 4.0;
        let source = Side::new(box_grid(&best.1, half_s, grid_points_per_dim, inst.e_s), gs);
        let relay = Side::new(box_grid(&best.2, half_r, grid_points_per_dim, inst.e_r), gr);
        let (v, si, ri) = search(&source, &relay);
        if v > best.0 {
            best = (v, source.powers[si].clone(), relay.powers[ri].clone());
        }
    }

    let (objective, p_s, p_r) = best;
    let r_s: Vec<f64> = p_s.iter().zip(gs).map(|(p, g)| log2_1p(p * g)).collect();
    let caps: Vec<f64> = p_r.iter().zip(gr).map(|(p, g)| log2_1p(p * g)).collect();
    let mut r_r = vec![0.0; m];
    greedy_relay(&r_s, &caps, &mut r_r);
    let source_levels = p_s
        .iter()
        .zip(gs)
        .map(|(p, g)| if *p > 0.0 { p + 1.0 / g } else { 0.0 })
        .collect();
    let relay_levels = p_r
        .iter()
        .zip(gr)
        .map(|(p, g)| if *p > 0.0 { p + 1.0 / g } else { 0.0 })
        .collect();
    let buffer = buffer_trace(&r_s, &r_r);
    let solution = Solution {
        p_s,
        r_s,
        p_r,
        r_r,
        source_levels,
        relay_levels,
        buffer,
        objective,
        throughput: objective / n as f64,
        case_tag: CaseTag::GridSearch,
        gap: 0.0,
        lambda: None,
        converged: true,
    };
    Ok(OracleResult {
        solution,
        band: (upper - objective).max(0.0),
    })
}
