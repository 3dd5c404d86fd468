// Cross-checks the solver against the brute-force grid oracle on a few
// random three- and four-slot instances.

use mobile_relay::dual::{solve, ProblemInstance, SolverSettings};
use mobile_relay::oracle::{check_feasibility, grid_search_solve};
use mobile_relay::LinkGains;

fn main() {
    let instances = [
        (vec![40.0, 3.0, 900.0], vec![2.0, 700.0, 15.0], 2.0, 1.0),
        (vec![5.0, 5.0, 5.0, 5.0], vec![5.0, 5.0, 5.0, 5.0], 1.0, 1.0),
        (vec![1.0, 2e3, 10.0, 4.0], vec![8e3, 1.0, 30.0, 600.0], 0.5, 6.0),
    ];
    for (g_sr, g_rd, e_s, e_r) in instances {
        let inst = ProblemInstance::new(LinkGains::new(g_sr, g_rd).unwrap(), e_s, e_r).unwrap();
        let sol = solve(&inst, &SolverSettings::default()).unwrap();
        let feasible = check_feasibility(&inst, &sol, 1e-6).unwrap();
        let oracle = grid_search_solve(&inst, 21, 3).unwrap();
        println!(
            "N = {}: solver {:.6} ({}), oracle {:.6} + band {:.3}, feasible {}",
            inst.n_slots(),
            sol.objective,
            sol.case_tag,
            oracle.solution.objective,
            oracle.band,
            feasible.passed
        );
    }
}
