//! Exact solution when the relay only ever gets closer to the destination.
//!
//! If `g_sr` is non-increasing and `g_rd` non-decreasing over the slots each
//! link uses, every interior causality multiplier is zero and both ends run
//! classic water-filling at a constant level. The bottleneck side spends its
//! whole budget `E`; the other side spends just enough for its aggregate
//! rate to match, found by inverting its rate curve. Causality then holds in
//! every slot, not only at the horizon: the source's per-slot rates fall
//! while the relay's rise.

use crate::channel::LinkGains;
use crate::dual::{evaluate_dual, DualPoint, ProblemInstance};
use crate::error::{RelayError, Result};
use crate::solution::{CaseTag, Solution};
use crate::waterfill::{classic_wf, invert_rate_curve, rate_curve, WfResult};

/// Relative tie tolerance between the two aggregate rates.
const BALANCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bottleneck {
    SourceLimited,
    RelayLimited,
    Balanced,
}

/// Energies actually spent by each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BottleneckSplit {
    pub e_s_used: f64,
    pub e_r_used: f64,
    pub bottleneck: Bottleneck,
}

/// True when `g_sr` never rises over slots `1..N-1` and `g_rd` never falls
/// over slots `2..N`, both up to relative `tol`.
pub fn is_monotone_instance(gains: &LinkGains, tol: f64) -> bool {
    let sr_falls = gains.source_slots().windows(2).all(|w| w[1] <= w[0] * (1.0 + tol));
    let rd_rises = gains.relay_slots().windows(2).all(|w| w[1] >= w[0] * (1.0 - tol));
    sr_falls && rd_rises
}

fn classic_or_zero(gains: &[f64], budget: f64) -> Result<WfResult> {
    if budget == 0.0 {
        Ok(WfResult::zeros(gains.len()))
    } else {
        classic_wf(gains, budget)
    }
}

/// Bottleneck energies for a monotone instance.
pub fn bottleneck_split(inst: &ProblemInstance) -> Result<BottleneckSplit> {
    let gs = inst.gains.source_slots();
    let gr = inst.gains.relay_slots();
    let rate_s = rate_curve(gs, inst.e_s)?;
    let rate_r = rate_curve(gr, inst.e_r)?;
    let split = if (rate_s - rate_r).abs() <= BALANCE_TOL * rate_s.max(rate_r).max(1.0) {
        BottleneckSplit {
            e_s_used: inst.e_s,
            e_r_used: inst.e_r,
            bottleneck: Bottleneck::Balanced,
        }
    } else if rate_s < rate_r {
        BottleneckSplit {
            e_s_used: inst.e_s,
            e_r_used: invert_rate_curve(gr, rate_s, inst.e_r)?,
            bottleneck: Bottleneck::SourceLimited,
        }
    } else {
        BottleneckSplit {
            e_s_used: invert_rate_curve(gs, rate_r, inst.e_s)?,
            e_r_used: inst.e_r,
            bottleneck: Bottleneck::RelayLimited,
        }
    };
    Ok(split)
}

pub fn solve_monotone(inst: &ProblemInstance) -> Result<Solution> {
    solve_monotone_with_split(inst).map(|(sol, _)| sol)
}

pub fn solve_monotone_with_split(inst: &ProblemInstance) -> Result<(Solution, BottleneckSplit)> {
    if !is_monotone_instance(&inst.gains, 1e-9) {
        return Err(RelayError::Precondition(
            "closed form needs non-increasing g_sr and non-decreasing g_rd".into(),
        ));
    }
    let split = bottleneck_split(inst)?;
    let source = classic_or_zero(inst.gains.source_slots(), split.e_s_used)?;
    let relay = classic_or_zero(inst.gains.relay_slots(), split.e_r_used)?;

    let m = inst.dual_dim();
    let mut sol = Solution::assemble(
        inst,
        source.powers,
        source.rates,
        relay.powers,
        relay.rates,
        vec![source.water_level; m],
        vec![relay.water_level; m],
        CaseTag::ClosedForm,
    );
    // lambda_N = 1 certifies a source bottleneck, lambda = 0 a relay one
    let dp = match split.bottleneck {
        Bottleneck::RelayLimited => DualPoint::zero(m),
        _ => DualPoint::last_vertex(m),
    };
    sol.gap = evaluate_dual(inst, &dp)?.g_value - sol.objective;
    sol.lambda = Some(dp.lambda);
    Ok((sol, split))
}

/// True when every interior multiplier `lambda_2..lambda_{N-1}` is at most
/// `1e-4`, as the dual optimum of a monotone instance must be.
pub fn interior_multipliers_vanish(dp: &DualPoint, gains: &LinkGains) -> Result<bool> {
    if !is_monotone_instance(gains, 1e-9) {
        return Err(RelayError::Precondition("gains are not monotone".into()));
    }
    let interior = &dp.lambda[..dp.lambda.len() - 1];
    Ok(interior.iter().all(|l| *l <= 1e-4))
}
