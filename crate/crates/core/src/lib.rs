//! Throughput-optimal power allocation for a mobile decode-and-forward relay.
//!
//! A relay moves between a source and a destination over `N` slots. In each
//! slot the source may send to the relay and the relay may forward buffered
//! data to the destination; the relay can never forward bits it has not yet
//! received. Given per-slot link gains and energy budgets for both nodes, this
//! crate maximizes the data delivered by the end of the horizon.
//!
//! * [`channel`]: trajectories, validation and link gains.
//! * [`waterfill`]: weighted and classic water-filling.
//! * [`dual`]: the dual problem, its ellipsoid minimizer and primal recovery.
//! * [`closed_form`]: the exact solution for trajectories toward the destination.
//! * [`oracle`]: feasibility audits and brute-force grid search.
//! * [`scenario`]: config files, sweeps and CSV output.

pub mod channel;
pub mod closed_form;
pub mod dual;
pub mod ellipsoid;
pub mod error;
pub mod oracle;
pub mod scenario;
pub mod solution;
pub mod waterfill;

pub use channel::{channel_gains, generate_trajectory, LinkGains, PhyParams, Trajectory, TrajectoryPattern};
pub use dual::{solve, DualPoint, ProblemInstance, SolverSettings};
pub use error::{RelayError, Result};
pub use solution::{CaseTag, Solution};
