//! Exact primal solution for a given set of tight causality constraints.
//!
//! Forcing the buffer to empty at slots `k_1 < ... < k_J = N` splits the
//! horizon into segments. Inside segment `j` both nodes water-fill at
//! constant levels `L_s[j]`, `L_r[j]` and carry the same amount of data
//! `D_j`, so only the two energy budgets couple the segments:
//!
//! ```text
//! max sum_j D_j   s.t.   sum_j f_j(D_j) <= E_s,   sum_j h_j(D_j) <= E_r
//! ```
//!
//! with `f_j`, `h_j` the least energies that carry `D_j` over the segment's
//! source and relay slots. With multipliers `(u, w)` (scaled by `ln 2`) each
//! segment solves `u L_s(D) + w L_r(D) = 1`, and `(u, w)` follow from two
//! nested monotone searches on the budgets.
//!
//! The breakpoint set is then repaired: a breakpoint whose implied
//! multiplier is negative (source level rising across it, counting an empty
//! segment at its threshold level) is dropped, and a slot whose buffer goes
//! negative becomes a breakpoint.

use std::collections::HashSet;

use super::ProblemInstance;

/// Water-filling over one segment, gains sorted in descending order.
struct Side {
    sorted: Vec<f64>,
    /// `log_prefix[k] = sum_{i<k} log2(sorted[i])`.
    log_prefix: Vec<f64>,
}

impl Side {
    fn new(gains: &[f64]) -> Side {
        let mut sorted = gains.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut log_prefix = vec![0.0];
        for g in &sorted {
            log_prefix.push(log_prefix.last().unwrap() + g.log2());
        }
        Side { sorted, log_prefix }
    }

    /// Level below which the segment carries nothing.
    fn threshold(&self) -> f64 {
        1.0 / self.sorted[0]
    }

    /// Level at which classic water-filling carries `rate` bits.
    fn level(&self, rate: f64) -> f64 {
        if rate <= 0.0 {
            return self.threshold();
        }
        let mut level = 0.0;
        for k in 1..=self.sorted.len() {
            level = ((rate - self.log_prefix[k]) / k as f64).exp2();
            if self.sorted.get(k).is_none_or(|g| level * g <= 1.0) {
                break;
            }
        }
        level
    }

    fn energy(&self, level: f64) -> f64 {
        self.sorted.iter().map(|g| (level - 1.0 / g).max(0.0)).sum()
    }
}

struct Segment {
    start: usize,
    end: usize,
    source: Side,
    relay: Side,
}

impl Segment {
    /// Data carried at multipliers `(u, w)`, with both levels.
    fn data(&self, u: f64, w: f64) -> (f64, f64, f64) {
        let marginal = |d: f64| u * self.source.level(d) + w * self.relay.level(d);
        if marginal(0.0) >= 1.0 {
            return (0.0, self.source.threshold(), self.relay.threshold());
        }
        let mut hi = 1.0;
        while marginal(hi) < 1.0 {
            hi *= 2.0;
            if !hi.is_finite() {
                break;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if marginal(mid) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        (lo, self.source.level(lo), self.relay.level(lo))
    }
}

struct Allocation {
    data: Vec<f64>,
    source_levels: Vec<f64>,
    relay_levels: Vec<f64>,
}

fn allocate(segments: &[Segment], u: f64, w: f64) -> (Allocation, f64, f64) {
    let mut a = Allocation {
        data: Vec::with_capacity(segments.len()),
        source_levels: Vec::with_capacity(segments.len()),
        relay_levels: Vec::with_capacity(segments.len()),
    };
    let (mut fs, mut fr) = (0.0, 0.0);
    for seg in segments {
        let (d, ls, lr) = seg.data(u, w);
        fs += seg.source.energy(ls);
        fr += seg.relay.energy(lr);
        a.data.push(d);
        a.source_levels.push(ls);
        a.relay_levels.push(lr);
    }
    (a, fs, fr)
}

/// Smallest `w` in `[0, w_max]` keeping relay energy within `e_r`, for a fixed `u`.
fn relay_multiplier(segments: &[Segment], u: f64, e_r: f64, w_max: f64) -> f64 {
    if u > 0.0 && allocate(segments, u, 0.0).2 <= e_r {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, w_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if allocate(segments, u, mid).2 > e_r {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

fn solve_segments(segments: &[Segment], e_s: f64, e_r: f64) -> Allocation {
    let u_max = segments.iter().map(|s| s.source.sorted[0]).fold(0.0, f64::max);
    let w_max = segments.iter().map(|s| s.relay.sorted[0]).fold(0.0, f64::max);
    let source_energy = |u: f64| {
        let w = relay_multiplier(segments, u, e_r, w_max);
        (allocate(segments, u, w).1, w)
    };
    // source energy falls as u grows; the budget binds unless it is slack at u = 0
    let u = if source_energy(0.0).0 <= e_s {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0, u_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if source_energy(mid).0 > e_s {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        hi
    };
    let w = relay_multiplier(segments, u, e_r, w_max);
    allocate(segments, u, w).0
}

/// Per-slot allocation, levels and the relaxed relay rates.
pub(crate) struct SegmentSolution {
    pub p_s: Vec<f64>,
    pub r_s: Vec<f64>,
    pub p_r: Vec<f64>,
    pub r_r: Vec<f64>,
    pub source_levels: Vec<f64>,
    pub relay_levels: Vec<f64>,
}

fn expand(inst: &ProblemInstance, segments: &[Segment], alloc: &Allocation) -> (SegmentSolution, Vec<f64>) {
    let m = inst.dual_dim();
    let gs = inst.gains.source_slots();
    let gr = inst.gains.relay_slots();
    let mut out = SegmentSolution {
        p_s: vec![0.0; m],
        r_s: vec![0.0; m],
        p_r: vec![0.0; m],
        r_r: vec![0.0; m],
        source_levels: vec![0.0; m],
        relay_levels: vec![0.0; m],
    };
    let mut caps = vec![0.0; m];
    for (j, seg) in segments.iter().enumerate() {
        let (ls, lr) = (alloc.source_levels[j], alloc.relay_levels[j]);
        for k in seg.start..=seg.end {
            if alloc.data[j] > 0.0 {
                out.p_s[k] = (ls - 1.0 / gs[k]).max(0.0);
                out.p_r[k] = (lr - 1.0 / gr[k]).max(0.0);
            }
            out.source_levels[k] = ls;
            out.relay_levels[k] = lr;
            out.r_s[k] = (out.p_s[k] * gs[k]).ln_1p() / std::f64::consts::LN_2;
            caps[k] = (out.p_r[k] * gr[k]).ln_1p() / std::f64::consts::LN_2;
        }
    }
    (out, caps)
}

fn build_segments(inst: &ProblemInstance, breaks: &[bool]) -> Vec<Segment> {
    let gs = inst.gains.source_slots();
    let gr = inst.gains.relay_slots();
    let mut segments = Vec::new();
    let mut start = 0;
    for (k, &b) in breaks.iter().enumerate() {
        if b {
            segments.push(Segment {
                start,
                end: k,
                source: Side::new(&gs[start..=k]),
                relay: Side::new(&gr[start..=k]),
            });
            start = k + 1;
        }
    }
    segments
}

/// Best feasible allocation found by repairing the breakpoint set `initial`
/// (indexed like the multipliers; the last entry is forced on).
pub(crate) fn solve_with_breakpoints(inst: &ProblemInstance, initial: &[bool]) -> SegmentSolution {
    let m = inst.dual_dim();
    let mut breaks = initial.to_vec();
    breaks[m - 1] = true;
    let mut seen = HashSet::new();
    let mut best: Option<(f64, SegmentSolution)> = None;

    while seen.insert(breaks.clone()) && seen.len() <= 4 * m + 8 {
        let segments = build_segments(inst, &breaks);
        let alloc = solve_segments(&segments, inst.e_s, inst.e_r);
        let (mut sol, caps) = expand(inst, &segments, &alloc);

        // forward greedily so the candidate is causal whatever the breakpoints
        let (mut buffer, mut total) = (0.0, 0.0);
        let mut relaxed = 0.0;
        let mut worst = (0.0, None);
        for k in 0..m {
            buffer += sol.r_s[k];
            sol.r_r[k] = caps[k].min(buffer);
            buffer -= sol.r_r[k];
            total += sol.r_r[k];
            relaxed += sol.r_s[k] - caps[k];
            if !breaks[k] && relaxed < worst.0 {
                worst = (relaxed, Some(k));
            }
        }
        if best.as_ref().is_none_or(|(v, _)| total > *v) {
            best = Some((total, sol));
        }

        let scale = 1.0 + alloc.data.iter().sum::<f64>();
        if let (w, Some(k)) = worst {
            if w < -1e-12 * scale {
                breaks[k] = true;
                continue;
            }
        }
        // a breakpoint's multiplier is proportional to the drop in source level;
        // an empty segment sits at its threshold level
        let drop = (0..segments.len().saturating_sub(1))
            .filter(|&j| alloc.data[j] + alloc.data[j + 1] > 0.0)
            .map(|j| (alloc.source_levels[j] - alloc.source_levels[j + 1], segments[j].end))
            .filter(|(d, _)| *d < -1e-12 * alloc.source_levels[0].abs().max(1e-300))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        match drop {
            Some((_, k)) => breaks[k] = false,
            None => break,
        }
    }
    best.expect("at least one breakpoint set is evaluated").1
}
