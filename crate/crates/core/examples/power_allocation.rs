// Per-slot water levels and buffer for the three shipped 41-slot
// scenarios, written as CSV next to a short summary.

use mobile_relay::scenario::{run_solve, EmitCsv, ScenarioConfig};

fn main() {
    let out_dir = std::env::temp_dir().join("mobile-relay");
    std::fs::create_dir_all(&out_dir).unwrap();
    for name in ["toward_dest", "toward_source", "cyclic"] {
        let path = format!("{}/configs/{name}.toml", env!("CARGO_MANIFEST_DIR"));
        let rec = run_solve(&ScenarioConfig::load(path).unwrap()).unwrap();
        let sol = &rec.solution;
        let first = sol.source_levels.first().unwrap();
        let last = sol.source_levels.last().unwrap();
        println!(
            "{name}: {}, throughput {:.4} bps/Hz, source level {first:.4} -> {last:.4}, relay level {:.4} -> {:.4}",
            sol.case_tag,
            sol.throughput,
            sol.relay_levels.first().unwrap(),
            sol.relay_levels.last().unwrap()
        );
        let file = out_dir.join(format!("{name}.csv"));
        std::fs::write(&file, rec.emit_csv()).unwrap();
        println!("  wrote {}", file.display());
    }
}
