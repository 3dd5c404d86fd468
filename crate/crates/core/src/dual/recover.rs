//! Primal recovery from an (approximately) optimal dual point.

use super::segments::solve_with_breakpoints;
use super::staircase::{max_rate_under_caps, min_energy_for_demands, min_energy_under_caps};
use super::{evaluate_dual, DualPoint, ProblemInstance};
use crate::error::{RelayError, Result};
use crate::solution::{CaseTag, Solution};
use crate::waterfill::{classic_wf, WfResult};

/// Largest accepted `g(lambda) - objective`, relative to `max(1, objective)`.
const CASE1_GAP: f64 = 1e-3;
/// Multipliers above this mark their causality constraint as tight.
const TIGHT_MULTIPLIER: f64 = 1e-6;
/// Relative slack when comparing a required energy against its budget.
const BUDGET_SLACK: f64 = 1e-9;

fn cumulative(v: &[f64]) -> Vec<f64> {
    v.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

fn within_budget(used: f64, budget: f64) -> bool {
    used <= budget * (1.0 + BUDGET_SLACK) + 1e-12
}

fn classic_or_zero(gains: &[f64], budget: f64) -> Result<WfResult> {
    if budget == 0.0 {
        Ok(WfResult::zeros(gains.len()))
    } else {
        classic_wf(gains, budget)
    }
}

/// Both weight vectors positive. Two candidates are built and the better
/// one is kept:
///
/// * the exact optimum for the causality constraints the multipliers mark
///   as tight, with that set repaired until it is consistent;
/// * the source's Lagrangian maximizer with the relay forwarding as much of
///   it as the caps and `E_r` allow.
///
/// Either is feasible by construction; the duality gap against `dp` decides
/// whether the result is accepted.
pub fn recover_case1(inst: &ProblemInstance, dp: &DualPoint) -> Result<Solution> {
    let fail = |reason: String| RelayError::RecoveryFailure {
        case: CaseTag::Case1,
        reason,
    };
    if dp.beta_first() <= 0.0 || dp.nu_last() <= 0.0 {
        return Err(fail("weights vanish at the ends, not an interior dual point".into()));
    }
    let ev = evaluate_dual(inst, dp)?;
    let source = ev.source_alloc;

    let tight: Vec<bool> = dp.lambda.iter().map(|l| *l > TIGHT_MULTIPLIER).collect();
    let seg = solve_with_breakpoints(inst, &tight);
    let exact = Solution::assemble(
        inst,
        seg.p_s,
        seg.r_s,
        seg.p_r,
        seg.r_r,
        seg.source_levels,
        seg.relay_levels,
        CaseTag::Case1,
    );

    let caps = cumulative(&source.rates);
    let relay = max_rate_under_caps(inst.gains.relay_slots(), &caps, inst.e_r);
    let source_levels = dp.beta.iter().map(|b| b * source.water_level).collect();
    let response = Solution::assemble(
        inst,
        source.powers,
        source.rates,
        relay.powers,
        relay.rates,
        source_levels,
        relay.levels,
        CaseTag::Case1,
    );

    let sol = if response.objective > exact.objective {
        response
    } else {
        exact
    };
    let gap = ev.g_value - sol.objective;
    if gap > CASE1_GAP * sol.objective.max(1.0) {
        return Err(fail(format!("duality gap {gap:.3e} after recovery")));
    }
    Ok(sol)
}

/// Source-limited: the source water-fills its whole budget, the relay
/// forwards everything with the least energy its caps permit.
pub fn recover_case2(inst: &ProblemInstance, _dp: &DualPoint) -> Result<Solution> {
    let source = classic_or_zero(inst.gains.source_slots(), inst.e_s)?;
    let caps = cumulative(&source.rates);
    let total = caps.last().copied().unwrap_or(0.0);
    let relay = min_energy_under_caps(inst.gains.relay_slots(), &caps, total);
    if !within_budget(relay.energy, inst.e_r) {
        return Err(RelayError::RecoveryFailure {
            case: CaseTag::Case2,
            reason: format!(
                "forwarding {total:.6} bits needs {:.6e} relay energy, budget is {:.6e}",
                relay.energy, inst.e_r
            ),
        });
    }
    let source_levels = vec![source.water_level; source.powers.len()];
    Ok(Solution::assemble(
        inst,
        source.powers,
        source.rates,
        relay.powers,
        relay.rates,
        source_levels,
        relay.levels,
        CaseTag::Case2,
    ))
}

/// Relay-limited: the relay water-fills its whole budget, the source sends
/// just enough, as cheaply as possible, to keep every relay slot fed.
pub fn recover_case3(inst: &ProblemInstance, _dp: &DualPoint) -> Result<Solution> {
    let relay = classic_or_zero(inst.gains.relay_slots(), inst.e_r)?;
    let demand = cumulative(&relay.rates);
    let source = min_energy_for_demands(inst.gains.source_slots(), &demand);
    if !within_budget(source.energy, inst.e_s) {
        return Err(RelayError::RecoveryFailure {
            case: CaseTag::Case3,
            reason: format!(
                "feeding the relay needs {:.6e} source energy, budget is {:.6e}",
                source.energy, inst.e_s
            ),
        });
    }
    let relay_levels = vec![relay.water_level; relay.powers.len()];
    Ok(Solution::assemble(
        inst,
        source.powers,
        source.rates,
        relay.powers,
        relay.rates,
        source.levels,
        relay_levels,
        CaseTag::Case3,
    ))
}
