use std::fmt;

use crate::dual::ProblemInstance;

/// Which recovery path produced a [`Solution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseTag {
    /// Both weight vectors strictly positive: staircase water-filling.
    Case1,
    /// Source-to-relay link is the bottleneck.
    Case2,
    /// Relay-to-destination link is the bottleneck.
    Case3,
    /// Monotone instance solved by the closed form.
    ClosedForm,
    /// Produced by the grid-search oracle.
    GridSearch,
}

impl CaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseTag::Case1 => "case1",
            CaseTag::Case2 => "case2",
            CaseTag::Case3 => "case3",
            CaseTag::ClosedForm => "closed_form",
            CaseTag::GridSearch => "grid_search",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Power and rate allocation for one instance.
///
/// Source vectors cover slots `1..N-1` and relay vectors cover slots
/// `2..N`; the source never transmits in slot `N` and the relay never in
/// slot 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub p_s: Vec<f64>,
    pub r_s: Vec<f64>,
    pub p_r: Vec<f64>,
    pub r_r: Vec<f64>,
    /// Effective source water level per source slot (`p + 1/g` where active).
    pub source_levels: Vec<f64>,
    /// Effective relay water level per relay slot.
    pub relay_levels: Vec<f64>,
    /// `B[n] = sum_{i<n} r_s[i] - sum_{2<=i<=n} r_r[i]` for `n = 1..N`.
    pub buffer: Vec<f64>,
    pub objective: f64,
    pub throughput: f64,
    pub case_tag: CaseTag,
    /// Dual value minus objective for the dual point attached below.
    pub gap: f64,
    /// Multipliers `lambda_2..lambda_N` the solution was derived from.
    pub lambda: Option<Vec<f64>>,
    /// False when the dual search hit its iteration cap.
    pub converged: bool,
}

impl Solution {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        inst: &ProblemInstance,
        p_s: Vec<f64>,
        r_s: Vec<f64>,
        p_r: Vec<f64>,
        r_r: Vec<f64>,
        source_levels: Vec<f64>,
        relay_levels: Vec<f64>,
        case_tag: CaseTag,
    ) -> Solution {
        let n = inst.n_slots();
        let r_r = trim_rounding_excess(&r_s, r_r);
        let buffer = buffer_trace(&r_s, &r_r);
        let objective: f64 = r_r.iter().sum();
        Solution {
            p_s,
            r_s,
            p_r,
            r_r,
            source_levels,
            relay_levels,
            buffer,
            objective,
            throughput: objective / n as f64,
            case_tag,
            gap: 0.0,
            lambda: None,
            converged: true,
        }
    }

    /// Number of slots `N`.
    pub fn n_slots(&self) -> usize {
        self.p_s.len() + 1
    }

    pub fn source_energy(&self) -> f64 {
        self.p_s.iter().sum()
    }

    pub fn relay_energy(&self) -> f64 {
        self.p_r.iter().sum()
    }

    pub fn source_total_rate(&self) -> f64 {
        self.r_s.iter().sum()
    }
}

/// Caps each relay rate at the data buffered so far when it overshoots by
/// rounding only; larger overshoots are left for the feasibility check.
fn trim_rounding_excess(r_s: &[f64], mut r_r: Vec<f64>) -> Vec<f64> {
    let (mut received, mut sent) = (0.0, 0.0);
    for (s, r) in r_s.iter().zip(r_r.iter_mut()) {
        received += s;
        let room = (received - sent).max(0.0);
        if *r > room && *r - room <= 1e-12 * (1.0 + received) {
            *r = room;
        }
        sent += *r;
    }
    r_r
}

/// Buffer occupancy `B[1..N]` from source rates (slots `1..N-1`) and relay
/// rates (slots `2..N`).
pub fn buffer_trace(r_s: &[f64], r_r: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(r_s.len() + 1);
    out.push(0.0);
    let mut received = 0.0;
    let mut sent = 0.0;
    for (s, r) in r_s.iter().zip(r_r) {
        received += s;
        sent += r;
        out.push(received - sent);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_overshoot_is_trimmed() {
        let r_r = trim_rounding_excess(&[1.1343006683424022], vec![1.1343006683424028]);
        assert_eq!(r_r, vec![1.1343006683424022]);
        let r_r = trim_rounding_excess(&[1.0, 0.0], vec![0.5, 0.6]);
        assert_eq!(r_r, vec![0.5, 0.6]);
        assert!(buffer_trace(&[1.0, 0.0], &r_r)[2] < 0.0);
    }
}
