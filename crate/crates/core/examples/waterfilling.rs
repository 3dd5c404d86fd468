// Classic and weighted water-filling, the aggregate rate curve and its
// inverse.

use mobile_relay::waterfill::{classic_wf, invert_rate_curve, rate_curve, weighted_wf};

fn main() {
    let gains = [10.0, 2.0];
    for budget in [0.1, 1.0] {
        let wf = classic_wf(&gains, budget).unwrap();
        println!("budget {budget}: level {:.4}, powers {:?}", wf.water_level, wf.powers);
    }

    let wf = weighted_wf(&[1.0, 1.0], &[2.0, 1.0], 3.0).unwrap();
    println!("weights [2, 1]: level {:.4}, powers {:?}", wf.water_level, wf.powers);

    let gains = [4.0, 2.0];
    let rate = rate_curve(&gains, 2.0).unwrap();
    let energy = invert_rate_curve(&gains, rate, 10.0).unwrap();
    println!("rate at E = 2: {rate:.6} bits, inverse gives E = {energy:.6}");
}
