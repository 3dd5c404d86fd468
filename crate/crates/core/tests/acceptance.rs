//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use mobile_relay::closed_form::{interior_multipliers_vanish, is_monotone_instance, solve_monotone};
use mobile_relay::dual::{
    ellipsoid_minimize, evaluate_dual, solve, solve_dual, DualPoint, ProblemInstance, SolverSettings,
};
use mobile_relay::oracle::{check_feasibility, grid_search_solve, DEFAULT_GRID_POINTS, DEFAULT_REFINE_ROUNDS};
use mobile_relay::scenario::{run_solve, run_sweep, ScenarioConfig};
use mobile_relay::{channel_gains, generate_trajectory, CaseTag, LinkGains, PhyParams, Solution, TrajectoryPattern};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn random_instance(rng: &mut impl Rng, n: usize) -> ProblemInstance {
    let g_sr = (0..n).map(|_| log_uniform(rng, 1.0, 1e4)).collect();
    let g_rd = (0..n).map(|_| log_uniform(rng, 1.0, 1e4)).collect();
    let e_s = rng.gen_range(0.1..10.0);
    let e_r = rng.gen_range(0.1..10.0);
    ProblemInstance::new(LinkGains::new(g_sr, g_rd).unwrap(), e_s, e_r).unwrap()
}

fn dual_only() -> SolverSettings {
    SolverSettings {
        use_closed_form: false,
        ..SolverSettings::default()
    }
}

fn reference_instance(pattern: TrajectoryPattern, n: usize) -> ProblemInstance {
    let traj = generate_trajectory(pattern, PhyParams::reference(), n).unwrap();
    let e = n as f64 * 0.01;
    ProblemInstance::new(channel_gains(&traj), e, e).unwrap()
}

fn closed_form_agreement() -> Verdict {
    let inst = reference_instance(TrajectoryPattern::TowardDest, 41);
    let exact = solve_monotone(&inst).unwrap();
    let start = Instant::now();
    let dual = match solve_dual(&inst, &dual_only()) {
        Ok(s) => s,
        Err(e) => return verdict(false, format!("dual solver failed: {e}")),
    };
    let secs = start.elapsed().as_secs_f64();
    let rel = (dual.throughput - exact.throughput).abs() / exact.throughput;
    verdict(
        rel <= 1e-3 && secs < 30.0,
        format!(
            "closed form {:.9}, dual {:.9} ({}), relative difference {rel:.2e} (<= 1e-3), dual time {secs:.2} s (< 30 s)",
            exact.throughput, dual.throughput, dual.case_tag
        ),
    )
}

struct SandwichStats {
    instances: usize,
    worst_oracle_excess: f64,
    worst_band_excess: f64,
    worst_weak_duality: f64,
}

fn oracle_sandwich(instances: &[ProblemInstance]) -> Verdict {
    let mut stats = SandwichStats {
        instances: 0,
        worst_oracle_excess: f64::NEG_INFINITY,
        worst_band_excess: f64::NEG_INFINITY,
        worst_weak_duality: f64::NEG_INFINITY,
    };
    let mut failures = Vec::new();
    for (k, inst) in instances.iter().enumerate() {
        let sol = match solve(inst, &SolverSettings::default()) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("#{k}: solver error {e}"));
                continue;
            }
        };
        let oracle = grid_search_solve(inst, DEFAULT_GRID_POINTS, DEFAULT_REFINE_ROUNDS).unwrap();
        let lambda = sol.lambda.clone().expect("solver attaches its dual point");
        let g = evaluate_dual(inst, &DualPoint::from_lambda(lambda).unwrap())
            .unwrap()
            .g_value;

        let oracle_excess = oracle.solution.objective - sol.objective;
        let band_excess = sol.objective - (oracle.solution.objective + oracle.band);
        // weak duality up to floating-point noise
        let weak = sol.objective - g - 1e-9 * sol.objective.max(1.0);
        stats.instances += 1;
        stats.worst_oracle_excess = stats.worst_oracle_excess.max(oracle_excess);
        stats.worst_band_excess = stats.worst_band_excess.max(band_excess);
        stats.worst_weak_duality = stats.worst_weak_duality.max(weak);
        if oracle_excess > 1e-6 || band_excess > 0.0 || weak > 0.0 {
            failures.push(format!(
                "#{k} (N={}, {}): oracle excess {oracle_excess:.3e}, band excess {band_excess:.3e}, objective - g {weak:.3e}",
                inst.n_slots(),
                sol.case_tag
            ));
        }
    }
    let mut detail = format!(
        "{} instances; max(oracle - solver) {:.3e} (<= 1e-6), max(solver - oracle - band) {:.3e} (<= 0), max(solver - g - 1e-9 max(1, solver)) {:.3e} (<= 0)",
        stats.instances, stats.worst_oracle_excess, stats.worst_band_excess, stats.worst_weak_duality
    );
    for f in failures.iter().take(5) {
        detail.push_str("\n    ");
        detail.push_str(f);
    }
    verdict(failures.is_empty() && stats.instances >= 50, detail)
}

fn two_slot_exactness(rng: &mut impl Rng) -> Verdict {
    let mut worst_solve = 0.0f64;
    let mut worst_dual = 0.0f64;
    for _ in 0..100 {
        let inst = random_instance(rng, 2);
        let expected = (1.0 + inst.e_s * inst.gains.g_sr()[0])
            .log2()
            .min((1.0 + inst.e_r * inst.gains.g_rd()[1]).log2());
        let a = solve(&inst, &SolverSettings::default()).unwrap().objective;
        let b = solve_dual(&inst, &dual_only()).unwrap().objective;
        worst_solve = worst_solve.max((a - expected).abs());
        worst_dual = worst_dual.max((b - expected).abs());
    }
    verdict(
        worst_solve <= 1e-9 && worst_dual <= 1e-9,
        format!("100 instances; max error {worst_solve:.2e} (solve), {worst_dual:.2e} (dual route only), bound 1e-9"),
    )
}

fn scheme_ordering() -> Verdict {
    let config = ScenarioConfig::load(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/horizon_sweep.toml")).unwrap();
    let t_values = [40.0, 60.0, 80.0, 100.0, 120.0];
    let dest = TrajectoryPattern::TowardDest;
    let mid = TrajectoryPattern::Static {
        x0: config.phy.distance / 2.0,
    };
    let src = TrajectoryPattern::TowardSource;
    let table = match run_sweep(&config, &t_values, &[dest, mid, src]) {
        Ok(t) => t,
        Err(e) => return verdict(false, format!("sweep failed: {e}")),
    };
    let tau = |s: &TrajectoryPattern, t: f64| table.throughput(s, t).unwrap();
    let mut pass = true;
    let mut lines = Vec::new();
    for &t in &t_values {
        let (a, b, c) = (tau(&dest, t), tau(&mid, t), tau(&src, t));
        if t >= 80.0 && !(a > b && b > c) {
            pass = false;
        }
        lines.push(format!("T={t}: {a:.4} / {b:.4} / {c:.4}"));
    }
    let growing = t_values.windows(2).all(|w| tau(&dest, w[1]) > tau(&dest, w[0]));
    pass &= growing;
    verdict(
        pass,
        format!(
            "toward_dest / static_mid / toward_source throughput: {}; toward_dest increasing in T: {growing}",
            lines.join(", ")
        ),
    )
}

fn active_levels(levels: &[f64], powers: &[f64]) -> Vec<f64> {
    levels
        .iter()
        .zip(powers)
        .filter(|(_, p)| **p > 0.0)
        .map(|(l, _)| *l)
        .collect()
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    if v.is_empty() {
        0.0
    } else {
        (max - min) / max.abs()
    }
}

/// Length of the longest prefix whose relative spread stays within `tol`.
fn constant_prefix(v: &[f64], tol: f64) -> usize {
    (1..=v.len())
        .take_while(|&k| spread(&v[..k]) <= tol)
        .last()
        .unwrap_or(0)
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))
}

fn non_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12))
}

fn strict_drop(v: &[f64]) -> bool {
    v.windows(2).any(|w| w[1] < w[0] * (1.0 - 1e-6))
}

fn strict_rise(v: &[f64]) -> bool {
    v.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-6))
}

fn config_solution(file: &str) -> Solution {
    let path = format!("{}/configs/{file}", env!("CARGO_MANIFEST_DIR"));
    run_solve(&ScenarioConfig::load(path).unwrap()).unwrap().solution
}

fn allocation_structure() -> Verdict {
    let a = config_solution("toward_dest.toml");
    let a_s = spread(&active_levels(&a.source_levels, &a.p_s));
    let a_r = spread(&active_levels(&a.relay_levels, &a.p_r));
    let pass_a = a_s <= 1e-3 && a_r <= 1e-3;

    let b = config_solution("toward_source.toml");
    let b_s = active_levels(&b.source_levels, &b.p_s);
    let b_r = active_levels(&b.relay_levels, &b.p_r);
    let b_buf = b.buffer.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let pass_b =
        non_increasing(&b_s) && strict_drop(&b_s) && non_decreasing(&b_r) && strict_rise(&b_r) && b_buf <= 1e-4;

    let c = config_solution("cyclic.toml");
    let c_s = active_levels(&c.source_levels, &c.p_s);
    let c_r = active_levels(&c.relay_levels, &c.p_r);
    let (ks, kr) = (constant_prefix(&c_s, 1e-3), constant_prefix(&c_r, 1e-3));
    let pass_c = ks >= 2
        && kr >= 2
        && ks < c_s.len()
        && kr < c_r.len()
        && non_increasing(&c_s[ks - 1..])
        && non_decreasing(&c_r[kr - 1..]);

    verdict(
        pass_a && pass_b && pass_c,
        format!(
            "(a) level spread source {a_s:.1e}, relay {a_r:.1e} (<= 1e-3): {pass_a}; \
             (b) source falls and relay rises, max |B| {b_buf:.1e} (<= 1e-4): {pass_b}; \
             (c) constant prefixes of {ks}/{} source and {kr}/{} relay slots then monotone: {pass_c}",
            c_s.len(),
            c_r.len()
        ),
    )
}

fn feasibility_and_gap(rng: &mut impl Rng, small: &[ProblemInstance]) -> Verdict {
    let mut instances: Vec<ProblemInstance> = small.to_vec();
    for _ in 0..30 {
        let n = rng.gen_range(5..=12);
        instances.push(random_instance(rng, n));
    }
    for p in [
        TrajectoryPattern::TowardDest,
        TrajectoryPattern::TowardSource,
        TrajectoryPattern::Cyclic { lo: 500.0, hi: 1500.0 },
        TrajectoryPattern::Static { x0: 1000.0 },
    ] {
        instances.push(reference_instance(p, 41));
    }

    let mut checked = 0;
    let mut worst_violation = 0.0f64;
    let mut worst_gap = f64::NEG_INFINITY;
    let mut min_gap = f64::INFINITY;
    let mut failures = Vec::new();
    for (k, inst) in instances.iter().enumerate() {
        for (route, settings) in [("solve", SolverSettings::default()), ("dual", dual_only())] {
            let sol = match solve(inst, &settings) {
                Ok(s) => s,
                Err(e) => {
                    failures.push(format!("#{k} {route}: {e}"));
                    continue;
                }
            };
            checked += 1;
            let report = check_feasibility(inst, &sol, 1e-6).unwrap();
            let rel_gap = sol.gap / sol.objective.max(1.0);
            worst_violation = worst_violation.max(report.max_violation);
            worst_gap = worst_gap.max(rel_gap);
            min_gap = min_gap.min(sol.gap);
            if !report.passed || rel_gap > 1e-3 || sol.gap < -1e-9 {
                failures.push(format!(
                    "#{k} {route} N={} {}: violation {:.2e}, gap {:.2e}",
                    inst.n_slots(),
                    sol.case_tag,
                    report.max_violation,
                    sol.gap
                ));
            }
        }
    }
    let mut detail = format!(
        "{checked} solutions; max normalized violation {worst_violation:.2e} (<= 1e-6), max relative gap {worst_gap:.2e} (<= 1e-3), min gap {min_gap:.2e} (>= -1e-9)"
    );
    for f in failures.iter().take(5) {
        detail.push_str("\n    ");
        detail.push_str(f);
    }
    verdict(failures.is_empty(), detail)
}

fn monotone_instance(rng: &mut impl Rng) -> ProblemInstance {
    let n = rng.gen_range(3..=10);
    let mut g_sr: Vec<f64> = (0..n).map(|_| log_uniform(rng, 1.0, 1e4)).collect();
    let mut g_rd: Vec<f64> = (0..n).map(|_| log_uniform(rng, 1.0, 1e4)).collect();
    g_sr.sort_by(|a, b| b.total_cmp(a));
    g_rd.sort_by(f64::total_cmp);
    let e_s = rng.gen_range(0.1..10.0);
    let e_r = rng.gen_range(0.1..10.0);
    ProblemInstance::new(LinkGains::new(g_sr, g_rd).unwrap(), e_s, e_r).unwrap()
}

fn interior_multipliers(rng: &mut impl Rng) -> Verdict {
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..20 {
        let inst = monotone_instance(rng);
        assert!(is_monotone_instance(&inst.gains, 1e-9));
        let out = ellipsoid_minimize(&inst, &SolverSettings::default()).unwrap();
        let lambda = &out.point.lambda;
        worst = lambda[..lambda.len() - 1].iter().cloned().fold(worst, f64::max);
        if !interior_multipliers_vanish(&out.point, &inst.gains).unwrap() {
            failures += 1;
        }
    }
    verdict(
        failures == 0,
        format!("20 instances; largest interior multiplier {worst:.2e} (<= 1e-4), {failures} failures"),
    )
}

fn complementary_slackness(rng: &mut impl Rng) -> Verdict {
    let mut found = 0;
    let mut tried = 0;
    let mut active = 0;
    let mut worst_ratio = 0.0f64;
    let mut failures = Vec::new();
    while found < 20 && tried < 400 {
        tried += 1;
        let n = rng.gen_range(3..=8);
        let inst = random_instance(rng, n);
        let sol = match solve_dual(&inst, &dual_only()) {
            Ok(s) if s.case_tag == CaseTag::Case1 => s,
            _ => continue,
        };
        found += 1;
        let lambda = sol.lambda.as_ref().unwrap();
        let bound = 1e-4 * (sol.objective + 1.0);
        for (k, l) in lambda.iter().enumerate() {
            if *l > 1e-4 {
                active += 1;
                // lambda[k] prices the causality constraint at slot k + 2
                let b = sol.buffer[k + 1].abs();
                worst_ratio = worst_ratio.max(b / bound);
                if b > bound {
                    failures.push(format!(
                        "N={n} slot {}: lambda {l:.2e}, |B| {b:.2e} > {bound:.2e}",
                        k + 2
                    ));
                }
            }
        }
    }
    let mut detail = format!(
        "{found} case-1 instances ({tried} drawn), {active} active multipliers; worst |B| / bound {worst_ratio:.2e} (<= 1)"
    );
    for f in failures.iter().take(5) {
        detail.push_str("\n    ");
        detail.push_str(f);
    }
    verdict(found >= 20 && failures.is_empty(), detail)
}

fn source_bottleneck_balance(rng: &mut impl Rng) -> Verdict {
    let mut worst_balance = 0.0f64;
    let mut worst_budget = 0.0f64;
    let mut cases = Vec::new();
    for _ in 0..20 {
        let n = rng.gen_range(3..=8);
        let g_sr = (0..n).map(|_| log_uniform(rng, 1.0, 100.0)).collect();
        let g_rd = (0..n).map(|_| log_uniform(rng, 1e3, 1e4)).collect();
        let e_s = rng.gen_range(0.1..1.0);
        let e_r = rng.gen_range(5.0..10.0);
        let inst = ProblemInstance::new(LinkGains::new(g_sr, g_rd).unwrap(), e_s, e_r).unwrap();
        for settings in [SolverSettings::default(), dual_only()] {
            let sol = solve(&inst, &settings).unwrap();
            let rs: f64 = sol.r_s.iter().sum();
            let rr: f64 = sol.r_r.iter().sum();
            worst_balance = worst_balance.max((rr - rs).abs() / rs);
            worst_budget = worst_budget.max((sol.source_energy() - e_s).abs() / e_s);
            if !cases.contains(&sol.case_tag) {
                cases.push(sol.case_tag);
            }
        }
    }
    let names: Vec<&str> = cases.iter().map(|c| c.as_str()).collect();
    verdict(
        worst_balance <= 1e-6 && worst_budget <= 1e-9,
        format!(
            "20 instances x 2 routes (cases seen: {}); max |sum r_r - sum r_s| / sum r_s {worst_balance:.2e} (<= 1e-6), max source budget shortfall {worst_budget:.2e} (<= 1e-9)",
            names.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let mut rng = ChaCha8Rng::seed_from_u64(20_241_015);
    let small: Vec<ProblemInstance> = (0..60).map(|k| random_instance(&mut rng, 2 + k % 3)).collect();

    type Check<'a> = Box<dyn FnOnce(&mut ChaCha8Rng) -> Verdict + 'a>;
    let criteria: Vec<(&str, Check)> = vec![
        (
            "closed form and dual solver agree on toward_dest, N = 41",
            Box::new(|_| closed_form_agreement()),
        ),
        (
            "grid oracle sandwich on random N <= 4 instances",
            Box::new(|_| oracle_sandwich(&small)),
        ),
        ("two-slot instances solved exactly", Box::new(two_slot_exactness)),
        ("scheme ordering across horizons", Box::new(|_| scheme_ordering())),
        (
            "water-level structure of the three trajectories",
            Box::new(|_| allocation_structure()),
        ),
        (
            "feasibility and duality gap of every solution",
            Box::new(|r| feasibility_and_gap(r, &small)),
        ),
        (
            "interior multipliers vanish on monotone gains",
            Box::new(interior_multipliers),
        ),
        (
            "complementary slackness on case-1 instances",
            Box::new(complementary_slackness),
        ),
        (
            "aggregate rate balance on source-bottleneck instances",
            Box::new(source_bottleneck_balance),
        ),
    ];

    let mut failed = 0;
    for (k, (title, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let v = check(&mut rng);
        let status = if v.pass { "PASS" } else { "FAIL" };
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {} [{status}] {title} ({:.1} s): {}",
            k + 1,
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
