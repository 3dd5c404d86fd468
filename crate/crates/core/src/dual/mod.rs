//! Lagrangian dual decomposition of the throughput problem.
//!
//! Dualizing only the information-causality constraints (multipliers
//! `lambda_2..lambda_N`) splits the Lagrangian into two weighted sum-rate
//! problems, one per transmitter:
//!
//! ```text
//! g(lambda) = max sum_{n=1}^{N-1} beta_n log2(1 + p_s[n] g_sr[n])
//!           + max sum_{n=2}^{N}   nu_n   R_r[n]
//! beta_n = sum_{i>n} lambda_i,   nu_n = 1 - sum_{i>=n} lambda_i
//! ```
//!
//! The dual is bounded only when `nu_n >= 0`, i.e. `sum lambda <= 1`, so the
//! ellipsoid search runs over `{lambda >= 0, sum lambda <= 1}`. The
//! subgradient in coordinate `n` is the buffer occupancy the Lagrangian
//! maximizers would leave at slot `n`.

mod recover;
mod segments;
pub(crate) mod staircase;

use serde::{Deserialize, Serialize};

use crate::channel::LinkGains;
use crate::closed_form;
use crate::ellipsoid::{Ellipsoid, EllipsoidSettings, Probe};
use crate::error::{RelayError, Result};
use crate::solution::{CaseTag, Solution};
use crate::waterfill::{weighted_wf, WfResult};

pub use recover::{recover_case1, recover_case2, recover_case3};

/// Channel gains plus the energy budgets over the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub gains: LinkGains,
    /// Source energy `E_s` (sum of per-slot powers).
    pub e_s: f64,
    /// Relay energy `E_r`.
    pub e_r: f64,
}

impl ProblemInstance {
    pub fn new(gains: LinkGains, e_s: f64, e_r: f64) -> Result<Self> {
        for (name, e) in [("e_s", e_s), ("e_r", e_r)] {
            if !(e.is_finite() && e >= 0.0) {
                return Err(RelayError::param(format!("{name} = {e} must be finite and >= 0")));
            }
        }
        Ok(ProblemInstance { gains, e_s, e_r })
    }

    pub fn n_slots(&self) -> usize {
        self.gains.len()
    }

    /// Number of free multipliers, `N - 1`.
    pub fn dual_dim(&self) -> usize {
        self.gains.len() - 1
    }
}

/// Dual multipliers with the derived source and relay weights.
///
/// `lambda[k]` is `lambda_{k+2}`, `beta[k]` is `beta_{k+1}` (source slot
/// `k+1`) and `nu[k]` is `nu_{k+2}` (relay slot `k+2`).
#[derive(Debug, Clone, PartialEq)]
pub struct DualPoint {
    pub lambda: Vec<f64>,
    pub beta: Vec<f64>,
    pub nu: Vec<f64>,
}

impl DualPoint {
    pub fn from_lambda(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(RelayError::param("need at least one multiplier"));
        }
        if let Some(l) = lambda.iter().find(|l| !(l.is_finite() && **l >= -1e-12)) {
            return Err(RelayError::param(format!("multiplier {l} must be >= 0")));
        }
        let total: f64 = lambda.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(RelayError::param(format!("multipliers sum to {total} > 1")));
        }
        let mut beta = vec![0.0; lambda.len()];
        let mut acc = 0.0;
        for k in (0..lambda.len()).rev() {
            acc += lambda[k].max(0.0);
            beta[k] = acc;
        }
        let nu = beta.iter().map(|b| (1.0 - b).max(0.0)).collect();
        Ok(DualPoint { lambda, beta, nu })
    }

    /// All multipliers zero: relay-bottleneck vertex.
    pub fn zero(dim: usize) -> Self {
        DualPoint::from_lambda(vec![0.0; dim]).expect("zero is dual feasible")
    }

    /// `lambda_N = 1`, all others zero: source-bottleneck vertex.
    pub fn last_vertex(dim: usize) -> Self {
        let mut l = vec![0.0; dim];
        l[dim - 1] = 1.0;
        DualPoint::from_lambda(l).expect("vertex is dual feasible")
    }

    /// `beta_1`.
    pub fn beta_first(&self) -> f64 {
        self.beta[0]
    }

    /// `nu_N`.
    pub fn nu_last(&self) -> f64 {
        self.nu[self.nu.len() - 1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualEvaluation {
    pub g_value: f64,
    /// Maximizer of the source subproblem over slots `1..N-1`.
    pub source_alloc: WfResult,
    /// Maximizer of the relay subproblem over slots `2..N`.
    pub relay_alloc: WfResult,
    /// `s_2..s_N`.
    pub subgrad: Vec<f64>,
}

/// Weighted water-filling that maps all-zero weights to the zero allocation.
fn lagrangian_wf(gains: &[f64], weights: &[f64], budget: f64) -> Result<WfResult> {
    match weighted_wf(gains, weights, budget) {
        Err(RelayError::DegenerateWeights { .. }) => Ok(WfResult::zeros(gains.len())),
        other => other,
    }
}

pub fn evaluate_dual(inst: &ProblemInstance, dp: &DualPoint) -> Result<DualEvaluation> {
    let m = inst.dual_dim();
    if dp.lambda.len() != m {
        return Err(RelayError::param(format!(
            "dual point has {} multipliers, instance needs {m}",
            dp.lambda.len()
        )));
    }
    let source_alloc = lagrangian_wf(inst.gains.source_slots(), &dp.beta, inst.e_s)?;
    let relay_alloc = lagrangian_wf(inst.gains.relay_slots(), &dp.nu, inst.e_r)?;

    let g_value = dp.beta.iter().zip(&source_alloc.rates).map(|(b, r)| b * r).sum::<f64>()
        + dp.nu.iter().zip(&relay_alloc.rates).map(|(v, r)| v * r).sum::<f64>();

    let mut subgrad = Vec::with_capacity(m);
    let mut acc = 0.0;
    for (rs, rr) in source_alloc.rates.iter().zip(&relay_alloc.rates) {
        acc += rs - rr;
        subgrad.push(acc);
    }
    Ok(DualEvaluation {
        g_value,
        source_alloc,
        relay_alloc,
        subgrad,
    })
}

/// Solver knobs; the defaults are the values the acceptance suite runs with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Ellipsoid stopping width `sqrt(s^T P s)`.
    pub ellipsoid_tol: f64,
    /// Iteration cap; `None` means `500 (N-1)^2`.
    pub max_iter: Option<usize>,
    /// Threshold on `beta_1` and `nu_N` separating the cases.
    pub eps_case: f64,
    /// Relative slack in the closed-form monotonicity test.
    pub monotone_tol: f64,
    /// Route monotone instances to the closed form.
    pub use_closed_form: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            ellipsoid_tol: 1e-6,
            max_iter: None,
            eps_case: 1e-6,
            monotone_tol: 1e-9,
            use_closed_form: true,
        }
    }
}

impl SolverSettings {
    fn iteration_cap(&self, dim: usize) -> usize {
        self.max_iter.unwrap_or(500 * dim * dim).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualOutcome {
    pub point: DualPoint,
    /// `g` at `point`.
    pub value: f64,
    pub iterations: usize,
    /// False when the iteration cap stopped the search.
    pub converged: bool,
}

pub fn ellipsoid_minimize(inst: &ProblemInstance, settings: &SolverSettings) -> Result<DualOutcome> {
    let m = inst.dual_dim();
    let start = vec![1.0 / (2.0 * m as f64); m];
    let radius = (inst.n_slots() as f64).sqrt();
    let ell = Ellipsoid::ball(start.clone(), radius);
    let ell_settings = EllipsoidSettings {
        tolerance: settings.ellipsoid_tol,
        max_iter: settings.iteration_cap(m),
    };

    let mut failure = None;
    let outcome = ell.minimize(ell_settings, |c| {
        if let Some((k, v)) = c
            .iter()
            .enumerate()
            .filter(|(_, v)| **v < 0.0)
            .min_by(|a, b| a.1.total_cmp(b.1))
        {
            let mut normal = vec![0.0; m];
            normal[k] = -1.0;
            return Probe::Infeasible { normal, excess: -v };
        }
        let total: f64 = c.iter().sum();
        if total > 1.0 {
            return Probe::Infeasible {
                normal: vec![1.0; m],
                excess: total - 1.0,
            };
        }
        let eval = DualPoint::from_lambda(c.to_vec()).and_then(|dp| evaluate_dual(inst, &dp));
        match eval {
            Ok(ev) => Probe::Feasible {
                value: ev.g_value,
                subgradient: ev.subgrad,
            },
            Err(e) => {
                failure.get_or_insert(e);
                // zero subgradient ends the search
                Probe::Feasible {
                    value: f64::INFINITY,
                    subgradient: vec![0.0; m],
                }
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }

    let lambda = outcome.best.unwrap_or(start);
    let point = DualPoint::from_lambda(lambda)?;
    let value = evaluate_dual(inst, &point)?.g_value;
    Ok(DualOutcome {
        point,
        value,
        iterations: outcome.iterations,
        converged: outcome.converged,
    })
}

pub fn classify_case(dp: &DualPoint, eps_case: f64) -> Result<CaseTag> {
    let b = dp.beta_first();
    let v = dp.nu_last();
    match (b > eps_case, v > eps_case) {
        (true, true) => Ok(CaseTag::Case1),
        (true, false) => Ok(CaseTag::Case2),
        (false, true) => Ok(CaseTag::Case3),
        (false, false) => Err(RelayError::CaseInconsistency { beta_1: b, nu_last: v }),
    }
}

fn recover(inst: &ProblemInstance, dp: &DualPoint, case: CaseTag) -> Result<Solution> {
    match case {
        CaseTag::Case1 => recover_case1(inst, dp),
        CaseTag::Case2 => recover_case2(inst, dp),
        CaseTag::Case3 => recover_case3(inst, dp),
        other => Err(RelayError::Precondition(format!("{other} is not a dual recovery case"))),
    }
}

fn is_retryable(e: &RelayError) -> bool {
    matches!(
        e,
        RelayError::RecoveryFailure { .. } | RelayError::CaseInconsistency { .. }
    )
}

/// Solves the instance, taking the closed form whenever it applies.
pub fn solve(inst: &ProblemInstance, settings: &SolverSettings) -> Result<Solution> {
    if settings.use_closed_form && closed_form::is_monotone_instance(&inst.gains, settings.monotone_tol) {
        return closed_form::solve_monotone(inst);
    }
    solve_dual(inst, settings)
}

/// Dual route only: ellipsoid search, case classification, primal recovery.
///
/// A failed recovery post-check reruns the search with a 10x tighter width.
/// If that fails too, the two bottleneck recoveries are tried directly; they
/// certify themselves because each one attains an upper bound on the
/// throughput.
pub fn solve_dual(inst: &ProblemInstance, settings: &SolverSettings) -> Result<Solution> {
    let mut attempt_settings = *settings;
    let mut last_err = None;
    let mut last_outcome = None;
    for _ in 0..2 {
        let outcome = ellipsoid_minimize(inst, &attempt_settings)?;
        let result =
            classify_case(&outcome.point, settings.eps_case).and_then(|case| recover(inst, &outcome.point, case));
        match result {
            Ok(sol) => return Ok(attach_dual(sol, &outcome)),
            Err(e) if is_retryable(&e) => last_err = Some(e),
            Err(e) => return Err(e),
        }
        last_outcome = Some(outcome);
        attempt_settings.ellipsoid_tol /= 10.0;
    }
    let outcome = last_outcome.expect("at least one attempt ran");
    for case in [CaseTag::Case3, CaseTag::Case2] {
        if let Ok(sol) = recover(inst, &outcome.point, case) {
            return Ok(attach_dual(sol, &outcome));
        }
    }
    Err(last_err.expect("only retryable errors reach the fallback"))
}

fn attach_dual(mut sol: Solution, outcome: &DualOutcome) -> Solution {
    sol.gap = outcome.value - sol.objective;
    sol.lambda = Some(outcome.point.lambda.clone());
    sol.converged = outcome.converged;
    sol
}
