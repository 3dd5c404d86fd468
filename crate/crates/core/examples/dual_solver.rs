// Ellipsoid search on the dual, case classification and primal recovery
// for a relay flying back toward the source.

use mobile_relay::dual::{classify_case, ellipsoid_minimize, solve_dual, ProblemInstance, SolverSettings};
use mobile_relay::{channel_gains, generate_trajectory, PhyParams, TrajectoryPattern};

fn main() {
    let traj = generate_trajectory(TrajectoryPattern::TowardSource, PhyParams::reference(), 41).unwrap();
    let inst = ProblemInstance::new(channel_gains(&traj), 0.41, 0.41).unwrap();
    let settings = SolverSettings::default();

    let out = ellipsoid_minimize(&inst, &settings).unwrap();
    let case = classify_case(&out.point, settings.eps_case).unwrap();
    println!(
        "dual minimum {:.6} after {} iterations (converged: {}), {case}",
        out.value, out.iterations, out.converged
    );
    let tight: Vec<usize> = (0..out.point.lambda.len())
        .filter(|&k| out.point.lambda[k] > 1e-4)
        .map(|k| k + 2)
        .collect();
    println!("buffer empties at slots {tight:?}");

    let sol = solve_dual(&inst, &settings).unwrap();
    println!("throughput {:.6} bps/Hz, duality gap {:.2e}", sol.throughput, sol.gap);
    for k in (0..40).step_by(8) {
        println!(
            "slot {:2}: source level {:.4}, relay level (slot {:2}) {:.4}",
            k + 1,
            sol.source_levels[k],
            k + 2,
            sol.relay_levels[k]
        );
    }
}
