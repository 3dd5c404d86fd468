//! Scenario files, single solves, horizon sweeps and oracle verification.
//!
//! A scenario is a small TOML document:
//!
//! ```toml
//! n_slots = 41
//! avg_power_s_dbm = 10.0
//! avg_power_r_dbm = 10.0
//!
//! [phy]
//! distance_m = 2000.0
//! altitude_m = 100.0
//! gamma0_db = 80.0
//! vmax_mps = 50.0
//! slot_len_s = 1.0
//!
//! [trajectory]
//! pattern = "toward_dest"
//! ```
//!
//! Either `n_slots` or `horizon_s` (or both, if consistent) fixes the number
//! of slots. Average powers are per-slot limits; the energy budget over the
//! horizon is `N * 10^((dBm - 30) / 10)`, and `-inf` dBm means a silent node.

mod csv;

use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{channel_gains, generate_trajectory, LinkGains, PhyParams, Trajectory, TrajectoryPattern};
use crate::dual::{solve, ProblemInstance, SolverSettings};
use crate::error::{RelayError, Result};
use crate::oracle::{
    check_feasibility, grid_search_solve, FeasibilityReport, OracleResult, DEFAULT_GRID_POINTS, DEFAULT_REFINE_ROUNDS,
};
use crate::solution::Solution;

pub use csv::{trajectory_csv, CsvTable, EmitCsv, SOLVE_COLUMNS, SWEEP_COLUMNS, TRAJECTORY_COLUMNS};

const SLOT_MATCH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_slots: Option<usize>,
    pub avg_power_s_dbm: f64,
    pub avg_power_r_dbm: f64,
    /// Seed for randomized studies; the solvers themselves are deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "PhyParams::reference")]
    pub phy: PhyParams,
    pub trajectory: TrajectoryPattern,
    #[serde(default)]
    pub solver: SolverSettings,
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

impl ScenarioConfig {
    /// Reference geometry with 10 dBm at both nodes.
    pub fn reference(trajectory: TrajectoryPattern, n_slots: usize) -> Self {
        ScenarioConfig {
            horizon_s: None,
            n_slots: Some(n_slots),
            avg_power_s_dbm: 10.0,
            avg_power_r_dbm: 10.0,
            seed: 0,
            phy: PhyParams::reference(),
            trajectory,
            solver: SolverSettings::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| RelayError::config("file", e.message().to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| RelayError::io_at(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs always serialize")
    }

    /// Checks every field and returns the resolved slot count.
    pub fn validate(&self) -> Result<usize> {
        let phy = &self.phy;
        let positive = |field: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(RelayError::config(field, format!("must be finite and > 0, got {v}")))
            }
        };
        positive("phy.distance_m", phy.distance)?;
        positive("phy.altitude_m", phy.altitude)?;
        positive("phy.slot_len_s", phy.slot_len)?;
        if !phy.gamma0_db.is_finite() {
            return Err(RelayError::config("phy.gamma0_db", "must be finite"));
        }
        if !(phy.vmax.is_finite() && phy.vmax >= 0.0) {
            return Err(RelayError::config(
                "phy.vmax_mps",
                format!("must be finite and >= 0, got {}", phy.vmax),
            ));
        }
        for (field, dbm) in [
            ("avg_power_s_dbm", self.avg_power_s_dbm),
            ("avg_power_r_dbm", self.avg_power_r_dbm),
        ] {
            if dbm.is_nan() || dbm == f64::INFINITY {
                return Err(RelayError::config(field, format!("must be finite or -inf, got {dbm}")));
            }
        }
        if !(self.solver.ellipsoid_tol.is_finite() && self.solver.ellipsoid_tol > 0.0) {
            return Err(RelayError::config("solver.ellipsoid_tol", "must be > 0"));
        }
        if !(self.solver.eps_case.is_finite() && self.solver.eps_case >= 0.0) {
            return Err(RelayError::config("solver.eps_case", "must be >= 0"));
        }

        let n = match (self.n_slots, self.horizon_s) {
            (None, None) => return Err(RelayError::config("n_slots", "set n_slots or horizon_s")),
            (Some(n), None) => n,
            (n, Some(t)) => {
                if !(t.is_finite() && t > 0.0) {
                    return Err(RelayError::config(
                        "horizon_s",
                        format!("must be finite and > 0, got {t}"),
                    ));
                }
                let slots = t / phy.slot_len;
                let rounded = slots.round();
                if (slots - rounded).abs() > SLOT_MATCH_TOL * slots.max(1.0) {
                    return Err(RelayError::config(
                        "horizon_s",
                        format!("{t} s is not a whole number of {} s slots", phy.slot_len),
                    ));
                }
                let from_t = rounded as usize;
                if let Some(n) = n {
                    if n != from_t {
                        return Err(RelayError::config(
                            "n_slots",
                            format!("{n} slots of {} s do not span horizon_s = {t}", phy.slot_len),
                        ));
                    }
                }
                from_t
            }
        };
        if n < 2 {
            return Err(RelayError::config("n_slots", format!("need at least 2 slots, got {n}")));
        }
        generate_trajectory(self.trajectory, *phy, n).map_err(|e| RelayError::config("trajectory", e.to_string()))?;
        Ok(n)
    }

    /// Source and relay energy budgets over `n` slots.
    pub fn energies(&self, n: usize) -> (f64, f64) {
        (
            n as f64 * dbm_to_watts(self.avg_power_s_dbm),
            n as f64 * dbm_to_watts(self.avg_power_r_dbm),
        )
    }

    /// Validates and builds the trajectory and problem instance.
    pub fn build(&self) -> Result<(Trajectory, ProblemInstance)> {
        let n = self.validate()?;
        let traj = generate_trajectory(self.trajectory, self.phy, n)?;
        let (e_s, e_r) = self.energies(n);
        let inst = ProblemInstance::new(channel_gains(&traj), e_s, e_r)?;
        Ok((traj, inst))
    }

    fn with_scheme_and_horizon(&self, scheme: TrajectoryPattern, horizon_s: f64) -> Self {
        ScenarioConfig {
            horizon_s: Some(horizon_s),
            n_slots: None,
            trajectory: scheme,
            ..self.clone()
        }
    }
}

/// Everything produced by one solve. `wall_time` is informational and is not
/// part of the CSV output, which stays byte-identical across runs.
#[derive(Debug, Clone)]
pub struct SolveRecord {
    pub config: ScenarioConfig,
    pub trajectory: Trajectory,
    pub gains: LinkGains,
    pub e_s: f64,
    pub e_r: f64,
    pub solution: Solution,
    pub wall_time: Duration,
}

pub fn run_solve(config: &ScenarioConfig) -> Result<SolveRecord> {
    let start = Instant::now();
    let (trajectory, inst) = config.build()?;
    let solution = solve(&inst, &config.solver)?;
    Ok(SolveRecord {
        config: config.clone(),
        trajectory,
        gains: inst.gains,
        e_s: inst.e_s,
        e_r: inst.e_r,
        solution,
        wall_time: start.elapsed(),
    })
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub scheme: TrajectoryPattern,
    pub horizon_s: f64,
    pub n_slots: usize,
    pub solution: Solution,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub config: ScenarioConfig,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn throughput(&self, scheme: &TrajectoryPattern, horizon_s: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.scheme == *scheme && r.horizon_s == horizon_s)
            .map(|r| r.solution.throughput)
    }
}

/// Solves every `(scheme, T)` pair, in parallel. Rows come back scheme-major
/// in the order given.
pub fn run_sweep(config: &ScenarioConfig, t_values: &[f64], schemes: &[TrajectoryPattern]) -> Result<SweepTable> {
    if t_values.is_empty() || schemes.is_empty() {
        return Err(RelayError::param("sweep needs at least one horizon and one scheme"));
    }
    let points: Vec<(TrajectoryPattern, f64)> = schemes
        .iter()
        .flat_map(|s| t_values.iter().map(move |t| (*s, *t)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(scheme, t)| {
            let record = run_solve(&config.with_scheme_and_horizon(scheme, t))?;
            Ok(SweepRow {
                scheme,
                horizon_s: t,
                n_slots: record.trajectory.len(),
                solution: record.solution,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        config: config.clone(),
        rows,
    })
}

/// Solver output next to the grid-search oracle on the same instance.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub solver: Solution,
    pub oracle: OracleResult,
    pub feasibility: FeasibilityReport,
    /// Oracle objective minus solver objective, positive when the oracle wins.
    pub oracle_excess: f64,
    pub passed: bool,
}

impl VerifyReport {
    pub fn render(&self) -> String {
        let lines = [
            format!("solver_case = {}", self.solver.case_tag),
            format!("solver_objective = {:e}", self.solver.objective),
            format!("solver_gap = {:e}", self.solver.gap),
            format!("oracle_objective = {:e}", self.oracle.solution.objective),
            format!("oracle_band = {:e}", self.oracle.band),
            format!("oracle_excess = {:e}", self.oracle_excess),
            format!("max_violation = {:e}", self.feasibility.max_violation),
            format!("feasible = {}", self.feasibility.passed),
            format!("verdict = {}", if self.passed { "pass" } else { "fail" }),
        ];
        lines.join("\n") + "\n"
    }
}

/// Solves and cross-checks against the grid oracle (`N <= 4` only). Passes
/// when the solution is feasible, the oracle does not beat it by more than
/// `1e-6`, and it does not exceed the oracle's certified band.
pub fn verify(config: &ScenarioConfig) -> Result<VerifyReport> {
    let (_, inst) = config.build()?;
    if inst.n_slots() > 4 {
        return Err(RelayError::UnsupportedSize(inst.n_slots()));
    }
    let solver = solve(&inst, &config.solver)?;
    let oracle = grid_search_solve(&inst, DEFAULT_GRID_POINTS, DEFAULT_REFINE_ROUNDS)?;
    let feasibility = check_feasibility(&inst, &solver, 1e-6)?;
    let oracle_excess = oracle.solution.objective - solver.objective;
    let passed = feasibility.passed && oracle_excess <= 1e-6 && -oracle_excess <= oracle.band;
    Ok(VerifyReport {
        solver,
        oracle,
        feasibility,
        oracle_excess,
        passed,
    })
}
