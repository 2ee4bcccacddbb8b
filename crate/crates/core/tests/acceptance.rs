//! Acceptance run: nine criteria, one PASS/FAIL line each.
//!
//! Runs under its own harness so every criterion is attempted even when an
//! earlier one fails. The process exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mmnet::code::{exact_error_probability, phase_transition_experiment, repetition_code, ExperimentConfig, Method};
use mmnet::fixtures;
use mmnet::network::{determinism_report, enumerate_cuts, Cut, NetworkSpec};
use mmnet::prob::{Axis, CondKernel};
use mmnet::regions::{
    check_product_dominance, dmc_capacity, fixed_input_bounds, link_capacities, max_cut_value, membership_report,
    rprime_bounds, BoundMode, MembershipOptions, OptimizerConfig, Region, Verdict,
};
use mmnet::suites::{
    certificate_suite, simulation_suite, link_bound_suite, fano_suite, continuity_suite, region_order_suite, renyi_suite,
    CodeFamily, SuiteOutcome,
};

const SEED: u64 = 20_240_601;

type Outcome = Result<Vec<String>, String>;

fn fixture(name: &str) -> NetworkSpec {
    fixtures::load(name).unwrap_or_else(|| panic!("missing fixture {name}"))
}

fn suite(o: SuiteOutcome) -> Outcome {
    let line = format!("{}: {} checks, {} skipped, worst slack {:e}", o.name, o.checks, o.skipped, o.worst_slack);
    if o.passed() {
        Ok(vec![line])
    } else {
        Err(format!("{line}; {} failed: {}", o.failed, o.failures.join("; ")))
    }
}

fn suites(parts: Vec<SuiteOutcome>) -> Outcome {
    let mut notes = Vec::new();
    let mut errs = Vec::new();
    for o in parts {
        match suite(o) {
            Ok(n) => notes.extend(n),
            Err(e) => errs.push(e),
        }
    }
    if errs.is_empty() { Ok(notes) } else { Err(errs.join(" | ")) }
}

fn require(ok: bool, what: String, notes: &mut Vec<String>, errs: &mut Vec<String>) {
    if ok {
        notes.push(what);
    } else {
        errs.push(what);
    }
}

fn finish(notes: Vec<String>, errs: Vec<String>) -> Outcome {
    if errs.is_empty() { Ok(notes) } else { Err(errs.join(" | ")) }
}

fn families() -> Vec<(&'static str, CodeFamily)> {
    let mut out = Vec::new();
    for name in ["bsc2", "erasure_relay3"] {
        for rate in [0.5, 1.0] {
            out.push((name, CodeFamily { rate, blocklengths: vec![1, 2], seeds: vec![0, 1, 2], budget: 1_000_000 }));
        }
    }
    out
}

fn renyi() -> Outcome {
    suite(renyi_suite(SEED, 1000).map_err(|e| e.to_string())?)
}

fn fano() -> Outcome {
    suite(fano_suite(SEED, 1000).map_err(|e| e.to_string())?)
}

fn continuity() -> Outcome {
    suite(continuity_suite(SEED, 500).map_err(|e| e.to_string())?)
}

fn simulating_law() -> Outcome {
    let mut parts = Vec::new();
    for (name, family) in families() {
        parts.push(simulation_suite(&fixture(name), &family, &[1.0, 1.1, 2.0]).map_err(|e| format!("{name}: {e}"))?);
    }
    suites(parts)
}

fn certificate() -> Outcome {
    let mut parts = Vec::new();
    for (name, family) in families() {
        parts.push(certificate_suite(&fixture(name), &family, &[1.1, 2.0]).map_err(|e| format!("{name}: {e}"))?);
    }
    suites(parts)
}

fn capacities() -> Outcome {
    let (mut notes, mut errs) = (Vec::new(), Vec::new());
    let e: f64 = 0.1;
    let closed_form = 1.0 + e * e.log2() + (1.0 - e) * (1.0 - e).log2();
    let bsc = CondKernel::new(vec![Axis::new("X", 2)], vec![Axis::new("Y", 2)], vec![0.9, 0.1, 0.1, 0.9])
        .map_err(|e| e.to_string())?;
    let (c, _) = dmc_capacity(&bsc);
    require((c - closed_form).abs() <= 1e-4, format!("BSC capacity {c} vs {closed_form}"), &mut notes, &mut errs);

    let line = fixture("line3");
    let caps = link_capacities(&line).map_err(|e| e.to_string())?;
    let cuts = [Cut::from_nodes(&[0]), Cut::from_nodes(&[0, 1])];
    for b in rprime_bounds(&caps, &line, &cuts).map_err(|e| e.to_string())? {
        require(
            (b.value - closed_form).abs() <= 1e-4,
            format!("line cut {:#b} link bound {}", b.cut.bitmask(), b.value),
            &mut notes,
            &mut errs,
        );
    }

    let opts = MembershipOptions::default();
    for (rate, want) in [(0.52, Verdict::Member), (0.54, Verdict::NonMember)] {
        for region in [Region::Prime, Region::Out] {
            let rep = membership_report(&line, &[rate, 0.0, 0.0], &region, &opts).map_err(|e| e.to_string())?;
            require(
                rep.verdict == want,
                format!("{} at {rate}: {:?}", region.name(), rep.verdict),
                &mut notes,
                &mut errs,
            );
        }
    }
    finish(notes, errs)
}

fn orderings() -> Outcome {
    let (mut notes, mut errs) = (Vec::new(), Vec::new());
    match suite(region_order_suite(SEED, 50).map_err(|e| e.to_string())?) {
        Ok(n) => notes.extend(n),
        Err(e) => errs.push(e),
    }

    let spec = fixture("erasure_relay3");
    let det = determinism_report(&spec).map_err(|e| e.to_string())?;
    require(det.region_cuts_deterministic(), "erasure determinism on region cuts".into(), &mut notes, &mut errs);

    let cuts = enumerate_cuts(&spec);
    let uniform = spec.uniform_input();
    let cfg = OptimizerConfig::default();
    let dom = check_product_dominance(&spec, &uniform, &cuts, &cfg).map_err(|e| e.to_string())?;
    require(dom.dominated, format!("product dominance over {} cuts", dom.cuts.len()), &mut notes, &mut errs);

    let inner = fixed_input_bounds(&spec, &cuts, &uniform, true).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for b in &inner {
        let star = max_cut_value(&spec, b.cut, BoundMode::ProductInputs, &cfg).map_err(|e| e.to_string())?;
        worst = worst.max(((b.value - b.penalty) - (star.value - star.penalty)).abs());
    }
    require(worst <= 1e-3, format!("inner vs product-input bounds differ by at most {worst:e}"), &mut notes, &mut errs);
    finish(notes, errs)
}

fn link_bounds() -> Outcome {
    let (mut notes, mut errs) = (Vec::new(), Vec::new());
    let line = fixture("line3");
    match suite(link_bound_suite(&line, SEED, 200).map_err(|e| e.to_string())?) {
        Ok(n) => notes.extend(n),
        Err(e) => errs.push(e),
    }
    // The bundled feedback fixture must agree with the original on every
    // cut that leaves the destination outside.
    let fb = fixture("line3_feedback");
    let mut worst: f64 = 0.0;
    for cut in enumerate_cuts(&line) {
        let a = max_cut_value(&line, cut, BoundMode::AllInputs, &OptimizerConfig::default()).map_err(|e| e.to_string())?;
        let b = fixed_input_bounds(&fb, &[cut], &a.argmax_input, false).map_err(|e| e.to_string())?;
        let c = fixed_input_bounds(&line, &[cut], &a.argmax_input, false).map_err(|e| e.to_string())?;
        worst = worst.max((b[0].value - c[0].value).abs());
    }
    require(worst <= 1e-9, format!("feedback fixture cut values differ by at most {worst:e}"), &mut notes, &mut errs);
    finish(notes, errs)
}

fn phase_transition() -> Outcome {
    let (mut notes, mut errs) = (Vec::new(), Vec::new());
    let spec = fixture("bec2");
    let blocklengths = vec![4, 8, 12];
    let cfg = ExperimentConfig {
        rates: vec![0.25, 0.75],
        blocklengths: blocklengths.clone(),
        seeds: (0..32).collect(),
        trials: 10_000,
        budget_cells: 4_000_000,
    };
    let cells = phase_transition_experiment(&spec, &cfg);
    for (rate, increasing) in [(0.25, false), (0.75, true)] {
        let row: Vec<_> = blocklengths
            .iter()
            .map(|&n| cells.iter().find(|c| c.rate_bits == rate && c.n == n).expect("cell"))
            .collect();
        let exact = row.iter().all(|c| c.method == Method::Exact && c.error.is_some());
        let errs_n: Vec<f64> = row.iter().map(|c| c.error.unwrap_or(f64::NAN)).collect();
        let strict = errs_n.windows(2).all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] });
        let dir = if increasing { "increasing" } else { "decreasing" };
        require(exact && strict, format!("rate {rate}: best errors {errs_n:?} (want strictly {dir})"), &mut notes, &mut errs);
    }
    let code = repetition_code(&spec, 12, 4).map_err(|e| e.to_string())?;
    let err = exact_error_probability(&spec, &code, 4_000_000).map_err(|e| e.to_string())?;
    let want = 1.0 - (1.0 - 0.5f64.powi(4)).powi(3);
    require((err - want).abs() <= 1e-9, format!("repetition code error {err} vs {want}"), &mut notes, &mut errs);
    finish(notes, errs)
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 9] = [
        ("renyi divergence properties", Duration::from_secs(10), renyi),
        ("fano-type error bound", Duration::from_secs(10), fano),
        ("order-to-one continuity bound", Duration::from_secs(30), continuity),
        ("simulating law properties", Duration::from_secs(120), simulating_law),
        ("converse certificate chain", Duration::from_secs(120), certificate),
        ("capacities and region verdicts", Duration::from_secs(30), capacities),
        ("region orderings", Duration::from_secs(300), orderings),
        ("link bounds and feedback", Duration::from_secs(60), link_bounds),
        ("phase transition on the erasure channel", Duration::from_secs(300), phase_transition),
    ];
    let mut failed = 0;
    for (k, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(_) if took > *limit => (false, format!("over the {} s limit", limit.as_secs())),
            Ok(notes) => (true, notes.join("; ")),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("criterion {} {verdict} {name} ({:.2} s): {detail}", k + 1, took.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
