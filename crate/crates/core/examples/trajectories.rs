// The four mobility patterns, their validation and link gains.

use mobile_relay::channel::{validate_positions, validate_trajectory};
use mobile_relay::{channel_gains, generate_trajectory, PhyParams, TrajectoryPattern};

fn main() {
    let params = PhyParams::reference();
    let patterns = [
        TrajectoryPattern::TowardDest,
        TrajectoryPattern::TowardSource,
        TrajectoryPattern::Cyclic { lo: 500.0, hi: 1500.0 },
        TrajectoryPattern::Static { x0: 1000.0 },
    ];
    for pattern in patterns {
        let traj = generate_trajectory(pattern, params, 50).unwrap();
        let gains = channel_gains(&traj);
        let x = traj.positions();
        println!(
            "{pattern:>16}: x[1] = {:6.0}, x[25] = {:6.0}, x[50] = {:6.0}, g_sr[1] = {:9.2}, g_rd[50] = {:9.2}, valid = {}",
            x[0],
            x[24],
            x[49],
            gains.g_sr()[0],
            gains.g_rd()[49],
            validate_trajectory(&traj).is_valid()
        );
    }

    let report = validate_positions(&[-1.0, 51.0, 40.0], &params);
    println!("hand-made path:\n{report}");
}
