// Throughput against horizon for flying toward the destination, hovering
// at the midpoint and flying toward the source.

use mobile_relay::scenario::{run_sweep, ScenarioConfig};
use mobile_relay::TrajectoryPattern;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/horizon_sweep.toml");
    let config = ScenarioConfig::load(path).unwrap();
    let schemes = [
        TrajectoryPattern::TowardDest,
        TrajectoryPattern::Static {
            x0: config.phy.distance / 2.0,
        },
        TrajectoryPattern::TowardSource,
    ];
    let horizons = [40.0, 60.0, 80.0, 100.0];
    let table = run_sweep(&config, &horizons, &schemes).unwrap();

    print!("{:>8}", "T [s]");
    for s in &schemes {
        print!("{:>16}", s.to_string());
    }
    println!();
    for t in horizons {
        print!("{t:>8}");
        for s in &schemes {
            print!("{:>16.4}", table.throughput(s, t).unwrap());
        }
        println!();
    }
}
