//! Acceptance criteria at full scale. Prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use werner_cli::report::Check;
use werner_cli::suite::{self, rng_for};

const SEED: u64 = 20_091_117;

struct Outcome {
    passed: bool,
    summary: String,
}

fn summarize(checks: &[Check], elapsed: f64, budget: Option<f64>) -> Outcome {
    let mut passed = checks.iter().all(|c| c.passed);
    let mut parts: Vec<String> = checks
        .iter()
        .map(|c| {
            format!(
                "{}[d={}] {}={:.3e}{}",
                c.name,
                c.dim.unwrap_or(0),
                c.metric,
                c.worst,
                if c.passed { "" } else { " FAILED" }
            )
        })
        .collect();
    for c in checks.iter().filter(|c| !c.passed) {
        eprintln!("  {}[d={}]: {}", c.name, c.dim.unwrap_or(0), c.detail);
    }
    if let Some(limit) = budget {
        passed &= elapsed < limit;
        parts.push(format!("runtime {elapsed:.2} s (< {limit} s)"));
    } else {
        parts.push(format!("runtime {elapsed:.2} s"));
    }
    Outcome {
        passed,
        summary: parts.join("; "),
    }
}

fn timed(budget: Option<f64>, f: impl FnOnce() -> Vec<Check>) -> Outcome {
    let start = Instant::now();
    let checks = f();
    summarize(&checks, start.elapsed().as_secs_f64(), budget)
}

fn facet_recovery() -> Outcome {
    timed(Some(1.0), || (2..=4).map(suite::facet_recovery).collect())
}

fn ppt_equivalence() -> Outcome {
    timed(Some(30.0), || {
        (2..=4)
            .map(|d| suite::ppt_equivalence(d, 50, 10_000, &mut rng_for(SEED, d, 1)))
            .collect()
    })
}

fn witness_positivity() -> Outcome {
    timed(Some(60.0), || {
        let mut checks: Vec<Check> = (2..=3)
            .map(|d| suite::witness_positivity(d, 100_000, 50, 300, SEED + d as u64))
            .collect();
        checks.extend(
            (2..=4).map(|d| suite::witness_identity_consistency(d, 100, &mut rng_for(SEED, d, 4))),
        );
        checks
    })
}

fn depolarization() -> Outcome {
    timed(None, || {
        let mut checks = Vec::new();
        for d in 2..=4 {
            checks.push(suite::depolarization_exact(d));
            checks.push(suite::depolarization_monte_carlo(
                d,
                10_000,
                &mut rng_for(SEED, d, 7),
            ));
            checks.push(suite::depolarization_fixed_point(d));
        }
        checks
    })
}

fn monotonicity() -> Outcome {
    timed(Some(60.0), || {
        let mut checks = Vec::new();
        for d in 2..=4 {
            checks.push(suite::monotonicity(
                d,
                100_000,
                50,
                20,
                &mut rng_for(SEED, d, 10),
            ));
            checks.push(suite::closed_form_agreement(
                d,
                1_000,
                &mut rng_for(SEED, d, 11),
            ));
        }
        checks
    })
}

fn run_cli(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_werner"))
        .args(args)
        .env_remove("WERNER_REPORT_DIR")
        .output()
        .expect("binary runs");
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap_or(-1), json)
}

fn necessity() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut cases = 0;
    for d in ["2", "3", "4"] {
        let (code, classify) = run_cli(&["classify", "--lambda", "1,0,0,0", "--dim", d]);
        let result = &classify["result"];
        let mu2 = result["margins"]
            .as_array()
            .and_then(|rows| rows.iter().find(|r| r["facet"] == "mu2"))
            .and_then(|r| r["margin"].as_f64());
        if code != 0 || result["member"] != false || mu2.is_none_or(|m| m >= 0.0) {
            failures.push(format!("classify d={d}: exit {code}, mu2 margin {mu2:?}"));
        }
        for nu in ["0.1", "0.6", "0.9"] {
            cases += 1;
            let (_, apply) = run_cli(&["apply", "--lambda", "1,0,0,0", "--nu", nu, "--dim", d]);
            let r = &apply["result"];
            let np = r["nu_prime"].as_f64();
            let ok = np.is_some_and(|v| (v - 1.0).abs() <= suite::EXACT_TOL)
                && r["mu2_margin"].as_f64().is_some_and(|m| m < 0.0)
                && r["flags"][0] == "non-separable map";
            if !ok {
                failures.push(format!("apply d={d} nu={nu}: nu' {np:?}"));
            }
        }
    }
    failures.iter().for_each(|f| eprintln!("  {f}"));
    Outcome {
        passed: failures.is_empty(),
        summary: format!(
            "{cases} apply and 3 classify runs, {} failures; runtime {:.2} s",
            failures.len(),
            start.elapsed().as_secs_f64()
        ),
    }
}

fn twirl_convergence() -> Outcome {
    timed(None, || {
        (2..=4)
            .map(|d| {
                suite::twirl_convergence(d, 16, &mut ChaCha8Rng::seed_from_u64(SEED ^ d as u64))
            })
            .collect()
    })
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("facet recovery", facet_recovery),
        ("PPT set equals P", ppt_equivalence),
        ("witness positivity", witness_positivity),
        ("depolarization identity", depolarization),
        ("monotonicity", monotonicity),
        ("necessity outside P", necessity),
        ("Monte-Carlo twirl convergence", twirl_convergence),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        all &= outcome.passed;
        println!(
            "{} criterion {} ({name}): {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            i + 1,
            outcome.summary
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
