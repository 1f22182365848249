// End-to-end analysis from a JSON configuration: report summary and CSV tracks.

use std::error::Error;

use shiftfloquet::analysis::{self, AnalysisConfig};

const CONFIG: &str = r#"{
  "timescale": {"kind": "real", "window": [1, 256]},
  "shifts": {"kind": "multiplicative", "t0": 1, "T": 4},
  "system": {
    "n": 2,
    "A": [["(1/t)*cos(pi*ln(t)/ln(q))", "0"], ["0", "-0.1/t"]],
    "params": {"q": 2}
  },
  "analysis": {"samples": 6}
}"#;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = AnalysisConfig::from_json(CONFIG)?;
    let report = analysis::run_analysis(cfg)?;
    println!("schema {}, verification pass {}", report.schema_version, report.verification.pass);
    for m in &report.multipliers {
        println!("multiplier {m:.8}");
    }
    println!("periodic solution exists: {}", report.periodic_solution.exists);
    println!("verdicts: {:?} / {:?}", report.stability.verdict_theorem, report.stability.verdict_corollary);
    let mut csv = Vec::new();
    analysis::emit_samples(&report, &mut csv)?;
    let text = String::from_utf8(csv)?;
    for line in text.lines().take(3) {
        let cols: Vec<&str> = line.split(',').take(6).collect();
        println!("{} ...", cols.join(","));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
