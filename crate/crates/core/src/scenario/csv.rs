//! Comma-separated output with a `#`-prefixed preamble.
//!
//! Every file starts with comment lines: the resolved config as TOML (one
//! `# config: ` line per TOML line), then `# result: key = value` summaries.
//! A header row and the data rows follow. Floats use Rust's shortest
//! round-tripping scientific notation, so parsing a file back recovers every
//! value bit for bit.

use std::fmt::Write as _;

use super::{SolveRecord, SweepTable};
use crate::channel::{channel_gains, Trajectory};
use crate::error::{RelayError, Result};

pub const SOLVE_COLUMNS: [&str; 12] = [
    "slot", "time_s", "x_m", "gamma_sr", "gamma_rd", "p_s", "r_s", "p_r", "r_r", "buffer", "level_s", "level_r",
];

pub const SWEEP_COLUMNS: [&str; 8] = [
    "scheme",
    "horizon_s",
    "n_slots",
    "throughput",
    "objective",
    "case",
    "gap",
    "converged",
];

pub const TRAJECTORY_COLUMNS: [&str; 5] = ["slot", "time_s", "x_m", "gamma_sr", "gamma_rd"];

pub trait EmitCsv {
    fn emit_csv(&self) -> String;
}

fn push_config(out: &mut String, toml: &str) {
    for line in toml.lines() {
        let _ = writeln!(out, "# config: {line}");
    }
}

fn push_result(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "# result: {key} = {value}");
}

fn push_row<I: IntoIterator<Item = String>>(out: &mut String, cells: I) {
    let row: Vec<String> = cells.into_iter().collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

fn e(v: f64) -> String {
    format!("{v:e}")
}

impl EmitCsv for SolveRecord {
    /// One row per slot. Source quantities are zero in slot `N`, relay
    /// quantities zero in slot 1; levels are zero where a node is silent.
    fn emit_csv(&self) -> String {
        let sol = &self.solution;
        let n = self.trajectory.len();
        let dt = self.config.phy.slot_len;
        let mut out = String::from("# mobile-relay solve\n");
        push_config(&mut out, &self.config.to_toml());
        push_result(&mut out, "n_slots", n);
        push_result(&mut out, "e_s", e(self.e_s));
        push_result(&mut out, "e_r", e(self.e_r));
        push_result(&mut out, "case", sol.case_tag);
        push_result(&mut out, "objective", e(sol.objective));
        push_result(&mut out, "throughput", e(sol.throughput));
        push_result(&mut out, "gap", e(sol.gap));
        push_result(&mut out, "converged", sol.converged);
        push_row(&mut out, SOLVE_COLUMNS.iter().map(|s| s.to_string()));

        let source = |v: &[f64], k: usize| if k + 1 < n { v[k] } else { 0.0 };
        let relay = |v: &[f64], k: usize| if k >= 1 { v[k - 1] } else { 0.0 };
        for k in 0..n {
            push_row(
                &mut out,
                [
                    (k + 1).to_string(),
                    e(k as f64 * dt),
                    e(self.trajectory.positions()[k]),
                    e(self.gains.g_sr()[k]),
                    e(self.gains.g_rd()[k]),
                    e(source(&sol.p_s, k)),
                    e(source(&sol.r_s, k)),
                    e(relay(&sol.p_r, k)),
                    e(relay(&sol.r_r, k)),
                    e(sol.buffer[k]),
                    e(source(&sol.source_levels, k)),
                    e(relay(&sol.relay_levels, k)),
                ],
            );
        }
        out
    }
}

impl EmitCsv for SweepTable {
    fn emit_csv(&self) -> String {
        let mut out = String::from("# mobile-relay sweep\n");
        push_config(&mut out, &self.config.to_toml());
        push_result(&mut out, "rows", self.rows.len());
        push_row(&mut out, SWEEP_COLUMNS.iter().map(|s| s.to_string()));
        for r in &self.rows {
            push_row(
                &mut out,
                [
                    r.scheme.to_string(),
                    e(r.horizon_s),
                    r.n_slots.to_string(),
                    e(r.solution.throughput),
                    e(r.solution.objective),
                    r.solution.case_tag.to_string(),
                    e(r.solution.gap),
                    r.solution.converged.to_string(),
                ],
            );
        }
        out
    }
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let gains = channel_gains(traj);
    let dt = traj.params().slot_len;
    let mut out = String::new();
    push_row(&mut out, TRAJECTORY_COLUMNS.iter().map(|s| s.to_string()));
    for (k, x) in traj.positions().iter().enumerate() {
        push_row(
            &mut out,
            [
                (k + 1).to_string(),
                e(k as f64 * dt),
                e(*x),
                e(gains.g_sr()[k]),
                e(gains.g_rd()[k]),
            ],
        );
    }
    out
}

/// A parsed output file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    /// Comment lines with the leading `# ` removed.
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn parse(text: &str) -> Result<CsvTable> {
        let mut comments = Vec::new();
        let mut header: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if let Some(c) = line.strip_prefix('#') {
                comments.push(c.strip_prefix(' ').unwrap_or(c).to_string());
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let cells: Vec<String> = line.split(',').map(str::to_string).collect();
            match &header {
                None => header = Some(cells),
                Some(h) if h.len() != cells.len() => {
                    return Err(RelayError::Parse(format!(
                        "line {}: {} cells, header has {}",
                        lineno + 1,
                        cells.len(),
                        h.len()
                    )))
                }
                Some(_) => rows.push(cells),
            }
        }
        let header = header.ok_or_else(|| RelayError::Parse("no header row".into()))?;
        Ok(CsvTable { comments, header, rows })
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| RelayError::Parse(format!("no column `{name}`")))
    }

    pub fn column_str(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        self.column_str(name)?
            .into_iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| RelayError::Parse(format!("`{s}` in column `{name}` is not a number")))
            })
            .collect()
    }

    /// Value of a `result: key = value` comment.
    pub fn result(&self, key: &str) -> Option<&str> {
        self.comments.iter().find_map(|c| {
            let (k, v) = c.strip_prefix("result: ")?.split_once(" = ")?;
            (k == key).then_some(v)
        })
    }

    /// The embedded config, reassembled from `config:` comments.
    pub fn config_toml(&self) -> String {
        self.comments
            .iter()
            .filter_map(|c| c.strip_prefix("config:"))
            .map(|l| l.strip_prefix(' ').unwrap_or(l))
            .collect::<Vec<_>>()
            .join("\n")
    }
}
