// Direct solution for a relay that only approaches the destination, checked
// against the general dual route.

use mobile_relay::closed_form::{bottleneck_split, is_monotone_instance, solve_monotone};
use mobile_relay::dual::{solve_dual, ProblemInstance, SolverSettings};
use mobile_relay::{channel_gains, generate_trajectory, PhyParams, TrajectoryPattern};

fn main() {
    let traj = generate_trajectory(TrajectoryPattern::TowardDest, PhyParams::reference(), 41).unwrap();
    let gains = channel_gains(&traj);
    println!("monotone gains: {}", is_monotone_instance(&gains, 1e-9));

    for (e_s, e_r) in [(0.41, 0.41), (0.01, 4.1), (4.1, 0.01)] {
        let inst = ProblemInstance::new(gains.clone(), e_s, e_r).unwrap();
        let split = bottleneck_split(&inst).unwrap();
        let exact = solve_monotone(&inst).unwrap();
        let settings = SolverSettings {
            use_closed_form: false,
            ..SolverSettings::default()
        };
        let dual = solve_dual(&inst, &settings).unwrap();
        println!(
            "E_s = {e_s}, E_r = {e_r}: {:?}, spends ({:.4}, {:.4}), throughput {:.9} (dual route {:.9})",
            split.bottleneck, split.e_s_used, split.e_r_used, exact.throughput, dual.throughput
        );
    }
}
