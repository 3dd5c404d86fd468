//! Relay geometry and line-of-sight link model.
//!
//! The source sits at `(0, 0)`, the destination at `(D, 0)` and the relay
//! flies at constant altitude `H` along the segment between them. Time is
//! split into `N` slots of length `slot_len`; the relay position is constant
//! within a slot and may change by at most `vmax * slot_len` between slots.
//!
//! Free-space path loss gives per-slot SNR coefficients (per unit power)
//!
//! ```text
//! gamma_sr[n] = gamma0 / (H^2 + x[n]^2)
//! gamma_rd[n] = gamma0 / (H^2 + (D - x[n])^2)
//! ```
//!
//! with `gamma0` the reference SNR at 1 m. The dB to linear conversion of
//! `gamma0` happens once, in [`channel_gains`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{RelayError, Result};

/// Relative slack allowed on the per-slot speed constraint.
pub const SPEED_TOLERANCE: f64 = 1e-9;

/// Physical layer and geometry parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhyParams {
    /// Source to destination distance `D` in meters.
    #[serde(rename = "distance_m")]
    pub distance: f64,
    /// Relay altitude `H` in meters.
    #[serde(rename = "altitude_m")]
    pub altitude: f64,
    /// Reference SNR at 1 m, in dB.
    pub gamma0_db: f64,
    /// Maximum relay speed in m/s.
    #[serde(rename = "vmax_mps")]
    pub vmax: f64,
    /// Slot length in seconds.
    #[serde(rename = "slot_len_s")]
    pub slot_len: f64,
}

impl PhyParams {
    /// Reference setup: `D = 2000 m`, `H = 100 m`,
    /// 80 dB reference SNR, 50 m/s, and 1 s slots.
    pub fn reference() -> Self {
        PhyParams {
            distance: 2000.0,
            altitude: 100.0,
            gamma0_db: 80.0,
            vmax: 50.0,
            slot_len: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &str, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(RelayError::param(format!("{field}: {msg}")))
            }
        };
        check(
            self.distance.is_finite() && self.distance > 0.0,
            "distance",
            "must be > 0",
        )?;
        check(
            self.altitude.is_finite() && self.altitude > 0.0,
            "altitude",
            "must be > 0",
        )?;
        check(self.gamma0_db.is_finite(), "gamma0_db", "must be finite")?;
        check(self.vmax.is_finite() && self.vmax >= 0.0, "vmax", "must be >= 0")?;
        check(
            self.slot_len.is_finite() && self.slot_len > 0.0,
            "slot_len",
            "must be > 0",
        )?;
        Ok(())
    }

    /// Maximum displacement per slot, `V = vmax * slot_len`.
    pub fn max_step(&self) -> f64 {
        self.vmax * self.slot_len
    }

    pub fn gamma0_linear(&self) -> f64 {
        10f64.powf(self.gamma0_db / 10.0)
    }
}

/// Mobility pattern used to build a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pattern", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectoryPattern {
    /// Start above the source, fly to the destination at full speed.
    TowardDest,
    /// Start above the destination, fly to the source at full speed.
    TowardSource,
    /// Shuttle between `lo` and `hi` at full speed, starting at `lo`.
    Cyclic {
        #[serde(rename = "lo_m")]
        lo: f64,
        #[serde(rename = "hi_m")]
        hi: f64,
    },
    /// Hover at `x0` for the whole horizon.
    Static {
        #[serde(rename = "x0_m")]
        x0: f64,
    },
}

impl TrajectoryPattern {
    /// Parses the compact scheme syntax used on the command line:
    /// `toward_dest`, `toward_source`, `static_mid`, `static:<x0>`,
    /// `cyclic_mid` (between D/4 and 3D/4) and `cyclic:<lo>:<hi>`.
    pub fn parse(text: &str, distance: f64) -> Result<Self> {
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| RelayError::param(format!("bad number `{s}` in pattern `{text}`")))
        };
        let parts: Vec<&str> = text.trim().split(':').collect();
        match parts.as_slice() {
            ["toward_dest"] => Ok(TrajectoryPattern::TowardDest),
            ["toward_source"] => Ok(TrajectoryPattern::TowardSource),
            ["static_mid"] => Ok(TrajectoryPattern::Static { x0: distance / 2.0 }),
            ["static", x0] => Ok(TrajectoryPattern::Static { x0: num(x0)? }),
            ["cyclic_mid"] => Ok(TrajectoryPattern::Cyclic {
                lo: distance / 4.0,
                hi: 3.0 * distance / 4.0,
            }),
            ["cyclic", lo, hi] => Ok(TrajectoryPattern::Cyclic {
                lo: num(lo)?,
                hi: num(hi)?,
            }),
            _ => Err(RelayError::param(format!("unknown trajectory pattern `{text}`"))),
        }
    }
}

impl fmt::Display for TrajectoryPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrajectoryPattern::TowardDest => write!(f, "toward_dest"),
            TrajectoryPattern::TowardSource => write!(f, "toward_source"),
            TrajectoryPattern::Cyclic { lo, hi } => write!(f, "cyclic:{lo}:{hi}"),
            TrajectoryPattern::Static { x0 } => write!(f, "static:{x0}"),
        }
    }
}

/// Discretized relay x-coordinates, one per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    x: Vec<f64>,
    params: PhyParams,
}

impl Trajectory {
    /// Wraps explicit positions, rejecting anything that fails validation.
    pub fn new(x: Vec<f64>, params: PhyParams) -> Result<Self> {
        params.validate()?;
        let report = validate_positions(&x, &params);
        if !report.is_valid() {
            return Err(RelayError::param(format!("invalid trajectory: {report}")));
        }
        Ok(Trajectory { x, params })
    }

    pub fn positions(&self) -> &[f64] {
        &self.x
    }

    pub fn params(&self) -> &PhyParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Horizon `T = N * slot_len` in seconds.
    pub fn horizon(&self) -> f64 {
        self.x.len() as f64 * self.params.slot_len
    }

    /// Reflection `x -> D - x`, which swaps the two links.
    pub fn mirrored(&self) -> Trajectory {
        let d = self.params.distance;
        Trajectory {
            x: self.x.iter().map(|&x| d - x).collect(),
            params: self.params,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Fewer than two slots.
    TooShort { len: usize },
    /// `x[slot] < 0`.
    BelowSource { slot: usize, x: f64 },
    /// `x[slot] > D`.
    BeyondDestination { slot: usize, x: f64 },
    /// `|x[slot + 1] - x[slot]| > V`.
    Speed { slot: usize, step: f64, limit: f64 },
    /// NaN or infinite coordinate.
    NonFinite { slot: usize },
}

/// Outcome of [`validate_trajectory`]. Slot indices are 1-based.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            match v {
                Violation::TooShort { len } => write!(f, "need at least 2 slots, got {len}")?,
                Violation::BelowSource { slot, x } => write!(f, "x[{slot}] = {x} < 0")?,
                Violation::BeyondDestination { slot, x } => write!(f, "x[{slot}] = {x} > D")?,
                Violation::Speed { slot, step, limit } => {
                    write!(f, "|x[{}] - x[{slot}]| = {step} > {limit}", slot + 1)?
                }
                Violation::NonFinite { slot } => write!(f, "x[{slot}] is not finite")?,
            }
        }
        Ok(())
    }
}

/// Checks bounds and the speed constraint on raw positions.
pub fn validate_positions(x: &[f64], params: &PhyParams) -> ValidationReport {
    let mut violations = Vec::new();
    if x.len() < 2 {
        violations.push(Violation::TooShort { len: x.len() });
    }
    let d = params.distance;
    let bound_tol = 1e-12 * d;
    for (i, &xi) in x.iter().enumerate() {
        let slot = i + 1;
        if !xi.is_finite() {
            violations.push(Violation::NonFinite { slot });
        } else if xi < -bound_tol {
            violations.push(Violation::BelowSource { slot, x: xi });
        } else if xi > d + bound_tol {
            violations.push(Violation::BeyondDestination { slot, x: xi });
        }
    }
    let limit = params.max_step();
    let allowed = limit * (1.0 + SPEED_TOLERANCE) + 1e-12 * d;
    for (i, w) in x.windows(2).enumerate() {
        let step = (w[1] - w[0]).abs();
        if step.is_finite() && step > allowed {
            violations.push(Violation::Speed {
                slot: i + 1,
                step,
                limit,
            });
        }
    }
    ValidationReport { violations }
}

pub fn validate_trajectory(traj: &Trajectory) -> ValidationReport {
    validate_positions(&traj.x, &traj.params)
}

/// Builds an `n`-slot trajectory for `pattern`.
///
/// Unidirectional patterns that finish early hover at both endpoints; the
/// surplus slots are split evenly with the odd one spent at the start.
pub fn generate_trajectory(pattern: TrajectoryPattern, params: PhyParams, n: usize) -> Result<Trajectory> {
    params.validate()?;
    if n < 2 {
        return Err(RelayError::param(format!("need at least 2 slots, got {n}")));
    }
    let d = params.distance;
    let v = params.max_step();
    let in_range = |name: &str, val: f64| {
        if val.is_finite() && (0.0..=d).contains(&val) {
            Ok(())
        } else {
            Err(RelayError::param(format!("{name} = {val} outside [0, {d}]")))
        }
    };

    let x = match pattern {
        TrajectoryPattern::TowardDest => ramp(d, v, n),
        TrajectoryPattern::TowardSource => ramp(d, v, n).into_iter().map(|x| d - x).collect(),
        TrajectoryPattern::Static { x0 } => {
            in_range("x0", x0)?;
            vec![x0; n]
        }
        TrajectoryPattern::Cyclic { lo, hi } => {
            in_range("lo", lo)?;
            in_range("hi", hi)?;
            if lo >= hi {
                return Err(RelayError::param(format!(
                    "cyclic bounds need lo < hi, got {lo} >= {hi}"
                )));
            }
            let span = hi - lo;
            (0..n)
                .map(|i| {
                    let travelled = (i as f64 * v) % (2.0 * span);
                    let offset = if travelled <= span {
                        travelled
                    } else {
                        2.0 * span - travelled
                    };
                    lo + offset
                })
                .collect()
        }
    };
    Trajectory::new(x, params)
}

/// Full-speed ramp from 0 to `d`, padded with hover slots at both ends.
fn ramp(d: f64, v: f64, n: usize) -> Vec<f64> {
    let travel_steps = if v > 0.0 {
        (d / v - 1e-9).ceil().max(0.0) as usize
    } else {
        usize::MAX
    };
    if travel_steps == usize::MAX || travel_steps + 1 >= n {
        return (0..n).map(|i| (i as f64 * v).min(d)).collect();
    }
    let surplus = n - (travel_steps + 1);
    let head = surplus - surplus / 2;
    let tail = surplus / 2;
    let mut x = vec![0.0; head];
    x.extend((0..=travel_steps).map(|i| (i as f64 * v).min(d)));
    x.extend(std::iter::repeat_n(d, tail));
    x
}

/// Per-slot SNR coefficients of both hops.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    g_sr: Vec<f64>,
    g_rd: Vec<f64>,
}

impl LinkGains {
    pub fn new(g_sr: Vec<f64>, g_rd: Vec<f64>) -> Result<Self> {
        if g_sr.len() != g_rd.len() {
            return Err(RelayError::param(format!(
                "gain sequences differ in length ({} vs {})",
                g_sr.len(),
                g_rd.len()
            )));
        }
        if g_sr.len() < 2 {
            return Err(RelayError::param("need at least 2 slots"));
        }
        if let Some(bad) = g_sr.iter().chain(&g_rd).find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(RelayError::param(format!("gain {bad} is not positive and finite")));
        }
        Ok(LinkGains { g_sr, g_rd })
    }

    pub fn len(&self) -> usize {
        self.g_sr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g_sr.is_empty()
    }

    /// `gamma_sr[n]` for all `N` slots.
    pub fn g_sr(&self) -> &[f64] {
        &self.g_sr
    }

    /// `gamma_rd[n]` for all `N` slots.
    pub fn g_rd(&self) -> &[f64] {
        &self.g_rd
    }

    /// Source-side gains for the slots where the source may transmit (1..N-1).
    pub fn source_slots(&self) -> &[f64] {
        &self.g_sr[..self.g_sr.len() - 1]
    }

    /// Relay-side gains for the slots where the relay may transmit (2..N).
    pub fn relay_slots(&self) -> &[f64] {
        &self.g_rd[1..]
    }
}

pub fn channel_gains(traj: &Trajectory) -> LinkGains {
    let p = traj.params();
    let gamma0 = p.gamma0_linear();
    let h2 = p.altitude * p.altitude;
    let d = p.distance;
    let (g_sr, g_rd) = traj
        .positions()
        .iter()
        .map(|&x| (gamma0 / (h2 + x * x), gamma0 / (h2 + (d - x) * (d - x))))
        .unzip();
    LinkGains { g_sr, g_rd }
}
