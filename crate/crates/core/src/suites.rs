//! Seeded randomized verification suites.
//!
//! Each suite draws instances from its own random stream, checks an
//! inequality or identity on every instance, and reports the smallest slack
//! seen together with the failing instances.

use rand::Rng;
use serde::Serialize;

use crate::code::{exact_error_probability, generate_random_code, Code, DecoderKind};
use crate::converse::{
    build_simulating_distribution, lambda_schedule, prop2_bound, prop3_gap, single_letter_certificate, verify_lemma1,
    ConverseError, CHAIN_TOLERANCE, CONTINUITY_MAX_LAMBDA,
};
use crate::network::{build_feedback_version, enumerate_cuts, NetworkSpec, RawNetwork};
use crate::prob::{
    conditional_mutual_information, markov_residual, relative_entropy, renyi_divergence, Axis, CondKernel, JointPmf,
    ProbError,
};
use crate::regions::{
    cut_value, link_capacities, membership_report, MembershipOptions, Region, RegionError, RegionReport, Verdict,
};
use crate::rng::{dirichlet_uniform, stream, Purpose};

/// Slack allowed on the divergence inequalities of [`renyi_suite`].
pub const RENYI_TOLERANCE: f64 = 1e-12;
/// Failing instances listed in a report; the count covers all of them.
const LISTED_FAILURES: usize = 20;

/// Result of one suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub checks: usize,
    pub skipped: usize,
    pub failed: usize,
    #[serde(serialize_with = "crate::nonfinite::float")]
    pub worst_slack: f64,
    pub failures: Vec<String>,
}

impl SuiteOutcome {
    fn new(name: &'static str) -> Self {
        Self { name, checks: 0, skipped: 0, failed: 0, worst_slack: f64::INFINITY, failures: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    /// Records a check passing iff `slack ≥ −tol`.
    fn check(&mut self, slack: f64, tol: f64, label: impl FnOnce() -> String) {
        self.checks += 1;
        self.worst_slack = self.worst_slack.min(slack);
        if !(slack >= -tol) {
            self.failed += 1;
            if self.failures.len() < LISTED_FAILURES {
                self.failures.push(format!("{}: slack {slack:e}", label()));
            }
        }
    }
}

fn pmf(names: &[(&str, usize)], values: Vec<f64>) -> Result<JointPmf, ProbError> {
    JointPmf::new(names.iter().map(|&(n, s)| Axis::new(n, s)).collect(), values)
}

fn kernel_rows<R: Rng>(rng: &mut R, rows: usize, width: usize) -> Vec<f64> {
    (0..rows).flat_map(|_| dirichlet_uniform(rng, width)).collect()
}

const RENYI_ORDERS: [f64; 4] = [1.0, 1.1, 2.0, 4.0];

/// Nonnegativity, data processing, monotonicity in the order and
/// continuity at order 1 of `D_λ` on random `(p, q, g)` with `|X| ≤ 6`.
pub fn renyi_suite(seed: u64, draws: usize) -> Result<SuiteOutcome, ProbError> {
    let mut out = SuiteOutcome::new("renyi");
    for t in 0..draws {
        let mut rng = stream(seed, Purpose::Draw, 1, t as u64);
        let nx = rng.random_range(2..=6);
        let ny = rng.random_range(2..=6);
        let p = pmf(&[("X", nx)], dirichlet_uniform(&mut rng, nx))?;
        let q = pmf(&[("X", nx)], dirichlet_uniform(&mut rng, nx))?;
        let g = CondKernel::new(vec![Axis::new("X", nx)], vec![Axis::new("Y", ny)], kernel_rows(&mut rng, nx, ny))?;
        let pg = g.compose(&p)?.marginalize(&["Y"])?;
        let qg = g.compose(&q)?.marginalize(&["Y"])?;
        let mut prev = f64::NEG_INFINITY;
        for lambda in RENYI_ORDERS {
            let d = renyi_divergence(&p, &q, lambda)?;
            let dg = renyi_divergence(&pg, &qg, lambda)?;
            out.check(d, RENYI_TOLERANCE, || format!("draw {t} λ={lambda}: D_λ(p‖q) < 0"));
            out.check(d - dg, RENYI_TOLERANCE, || format!("draw {t} λ={lambda}: processing increased D_λ"));
            out.check(d - prev, RENYI_TOLERANCE, || format!("draw {t} λ={lambda}: D_λ decreased in λ"));
            prev = d;
        }
        // Order 1 against the relative entropy, and the approach to it.
        let kl = relative_entropy(&p, &q)?;
        let gap = |delta: f64| renyi_divergence(&p, &q, 1.0 + delta).map(|d| d - kl);
        let (coarse, fine) = (gap(1e-4)?, gap(1e-8)?);
        out.check(fine, RENYI_TOLERANCE, || format!("draw {t}: D_(1+δ) below D"));
        out.check(coarse * 1e-3 + RENYI_TOLERANCE - fine, 0.0, || {
            format!("draw {t}: D_(1+δ) − D does not shrink with δ ({coarse:e} at 1e-4, {fine:e} at 1e-8)")
        });
    }
    Ok(out)
}

/// The Rényi Fano inequality on random joints with uniform `U`,
/// `|W| ≤ 8`, and its equality case.
pub fn fano_suite(seed: u64, draws: usize) -> Result<SuiteOutcome, ConverseError> {
    let mut out = SuiteOutcome::new("fano");
    for t in 0..draws {
        let mut rng = stream(seed, Purpose::Draw, 2, t as u64);
        let w = rng.random_range(2..=8);
        let mut joint = Vec::with_capacity(w * w);
        for u in 0..w {
            let keep: f64 = rng.random();
            let row = dirichlet_uniform(&mut rng, w);
            joint.extend(row.iter().enumerate().map(|(v, &r)| (keep * f64::from(u8::from(u == v)) + (1.0 - keep) * r) / w as f64));
        }
        let p_uv = pmf(&[("U", w), ("V", w)], joint)?;
        let q_v = pmf(&[("V", w)], dirichlet_uniform(&mut rng, w))?;
        let lambda = 1.0 + rng.random_range(0.01..5.0);
        match prop2_bound(&p_uv, "U", "V", &q_v, lambda) {
            Ok(r) => out.check(r.slack, CHAIN_TOLERANCE, || format!("draw {t} |W|={w} λ={lambda}")),
            Err(ConverseError::AlphaOne) => out.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let p_uv = pmf(&[("U", 2), ("V", 2)], vec![0.5, 0.0, 0.0, 0.5])?;
    let q_v = pmf(&[("V", 2)], vec![0.5, 0.5])?;
    let r = prop2_bound(&p_uv, "U", "V", &q_v, 2.0)?;
    out.check(-(r.lhs - r.rhs).abs(), CHAIN_TOLERANCE, || "equality case".into());
    Ok(out)
}

const CONTINUITY_ORDERS: [f64; 3] = [1.01, 1.1, CONTINUITY_MAX_LAMBDA];

/// The Rényi conditional-information bound on random `p_{XYZ}` with
/// alphabets of size at most 3.
pub fn continuity_suite(seed: u64, draws: usize) -> Result<SuiteOutcome, ConverseError> {
    let mut out = SuiteOutcome::new("continuity");
    for t in 0..draws {
        let mut rng = stream(seed, Purpose::Draw, 3, t as u64);
        let (a, b, c) = (rng.random_range(2..=3), rng.random_range(2..=3), rng.random_range(2..=3));
        let p = pmf(&[("X", a), ("Y", b), ("Z", c)], dirichlet_uniform(&mut rng, a * b * c))?;
        let lambda = CONTINUITY_ORDERS[t % CONTINUITY_ORDERS.len()];
        let r = prop3_gap(&p, &["X"], &["Y"], &["Z"], lambda)?;
        out.check(r.bound - r.d_lambda, CHAIN_TOLERANCE, || format!("draw {t} λ={lambda}"));
        let cmi = conditional_mutual_information(&p, &["X"], &["Y"], &["Z"])?;
        out.check(-(cmi - r.d_one).abs(), CHAIN_TOLERANCE, || format!("draw {t}: order-1 term is not I(X;Y|Z)"));
    }
    Ok(out)
}

/// Markov chains built as `r_{XY}·q_{Z|Y}` have zero residual and zero
/// conditional mutual information.
pub fn markov_suite(seed: u64, draws: usize) -> Result<SuiteOutcome, ProbError> {
    let mut out = SuiteOutcome::new("markov");
    for t in 0..draws {
        let mut rng = stream(seed, Purpose::Draw, 4, t as u64);
        let (a, b, c) = (rng.random_range(2..=4), rng.random_range(2..=4), rng.random_range(2..=4));
        let r = pmf(&[("X", a), ("Y", b)], dirichlet_uniform(&mut rng, a * b))?;
        let q = CondKernel::new(vec![Axis::new("Y", b)], vec![Axis::new("Z", c)], kernel_rows(&mut rng, b, c))?;
        let p = JointPmf::from_factor(r.factor().product(&q.to_factor())?)?;
        let residual = markov_residual(&p, &["X"], &["Y"], &["Z"])?;
        out.check(1e-12 - residual, 0.0, || format!("draw {t}: residual {residual:e}"));
        let cmi = conditional_mutual_information(&p, &["X"], &["Z"], &["Y"])?;
        out.check(1e-12 - cmi, 0.0, || format!("draw {t}: I(X;Z|Y) = {cmi:e}"));
    }
    Ok(out)
}

/// Random codes used by the code-level suites.
#[derive(Clone, Debug)]
pub struct CodeFamily {
    /// Rate of every source.
    pub rate: f64,
    pub blocklengths: Vec<usize>,
    pub seeds: Vec<u64>,
    pub budget: usize,
}

impl CodeFamily {
    fn codes(&self, spec: &NetworkSpec) -> Result<Vec<(u64, Code)>, ConverseError> {
        let rates: Vec<f64> =
            (0..spec.node_count()).map(|i| if spec.is_source(i) { self.rate } else { 0.0 }).collect();
        let mut out = Vec::new();
        for &n in &self.blocklengths {
            for &seed in &self.seeds {
                out.push((seed, generate_random_code(spec, &rates, n, seed, DecoderKind::Ml)?));
            }
        }
        Ok(out)
    }
}

/// The five properties of the simulating law for every code, region cut
/// and order; at order 1 the tilted per-time joints must also equal the
/// code's own.
pub fn simulation_suite(spec: &NetworkSpec, family: &CodeFamily, lambdas: &[f64]) -> Result<SuiteOutcome, ConverseError> {
    let mut out = SuiteOutcome::new("simulating_law");
    for (seed, code) in family.codes(spec)? {
        for cut in enumerate_cuts(spec) {
            for &lambda in lambdas {
                let sim = build_simulating_distribution(spec, &code, cut, lambda, family.budget)?;
                let r = verify_lemma1(spec, &code, &sim)?;
                let label = || format!("seed {seed} n={} cut={:#b} λ={lambda}", code.n, cut.bitmask());
                out.check(CHAIN_TOLERANCE - r.max_deviation(), 0.0, label);
                if lambda == 1.0 {
                    out.check(1e-12 - r.induced_l1, 0.0, || format!("{}: order-1 tilt moved", label()));
                }
            }
        }
    }
    Ok(out)
}

/// The converse chain for every code, region cut, destination outside the
/// cut and order `λ > 1`, with `ε̄` the code's exact error probability.
/// Codes that always err are skipped. Also checks that the order schedule
/// reaches `5/4` at `n = 16`.
pub fn certificate_suite(
    spec: &NetworkSpec,
    family: &CodeFamily,
    lambdas: &[f64],
) -> Result<SuiteOutcome, ConverseError> {
    let mut out = SuiteOutcome::new("certificate");
    for (seed, code) in family.codes(spec)? {
        let eps = exact_error_probability(spec, &code, family.budget)?;
        if eps >= 1.0 {
            out.skipped += 1;
            continue;
        }
        for cut in enumerate_cuts(spec) {
            for &d in spec.destinations().iter().filter(|&&d| !cut.contains(d)) {
                for &lambda in lambdas.iter().filter(|&&l| l > 1.0) {
                    let c = single_letter_certificate(spec, &code, cut, d, lambda, eps, family.budget)?;
                    let worst = c.slacks.iter().fold(f64::INFINITY, |a, &b| a.min(b));
                    let label = || format!("seed {seed} n={} cut={:#b} d={} λ={lambda}", code.n, cut.bitmask(), d + 1);
                    out.check(worst, CHAIN_TOLERANCE, label);
                    out.check(CHAIN_TOLERANCE - c.simulation.max_deviation(), 0.0, || format!("{}: simulating law", label()));
                }
            }
        }
    }
    let gate = lambda_schedule(16);
    out.check(-(gate.lambda - CONTINUITY_MAX_LAMBDA).abs(), 0.0, || format!("schedule at n=16 gives {}", gate.lambda));
    Ok(out)
}

/// On an independent-link network: every cut value at a random input is at
/// most the sum of the crossing link capacities, and, with a single
/// destination, the feedback version has the same cut values.
pub fn link_bound_suite(spec: &NetworkSpec, seed: u64, draws: usize) -> Result<SuiteOutcome, RegionError> {
    let mut out = SuiteOutcome::new("link_bound");
    let caps = link_capacities(spec)?;
    let feedback = if spec.destinations().len() == 1 { Some(build_feedback_version(spec)?) } else { None };
    let cuts = enumerate_cuts(spec);
    let axes = spec.input_axes();
    for t in 0..draws {
        let mut rng = stream(seed, Purpose::Draw, 5, t as u64);
        let p = JointPmf::new(axes.clone(), dirichlet_uniform(&mut rng, spec.joint_input_size()))?;
        for &cut in &cuts {
            let value = cut_value(spec, cut, &p)?;
            let crossing: f64 = caps
                .links
                .iter()
                .filter(|l| cut.contains(l.from) && !cut.contains(l.to))
                .map(|l| l.capacity)
                .sum();
            out.check(crossing - value, CHAIN_TOLERANCE, || format!("draw {t} cut={:#b}", cut.bitmask()));
            if let Some(fb) = &feedback {
                let fb_value = cut_value(fb, cut, &p)?;
                out.check(-(fb_value - value).abs(), CHAIN_TOLERANCE, || {
                    format!("draw {t} cut={:#b}: feedback version differs", cut.bitmask())
                });
            }
        }
    }
    Ok(out)
}

/// A random network with two or three nodes and binary or trivial
/// alphabets, with random source and destination sets.
pub fn random_small_network<R: Rng>(rng: &mut R) -> NetworkSpec {
    let n = rng.random_range(2..=3);
    let input_sizes: Vec<usize> = (0..n).map(|_| rng.random_range(1..=2)).collect();
    let output_sizes: Vec<usize> = (0..n).map(|_| rng.random_range(1..=2)).collect();
    let subset = |rng: &mut R| loop {
        let s: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        if !s.is_empty() {
            break s;
        }
    };
    let sources = subset(rng);
    let destinations = subset(rng);
    let nx: usize = input_sizes.iter().product();
    let ny: usize = output_sizes.iter().product();
    let channel = kernel_rows(rng, nx, ny);
    NetworkSpec::new(RawNetwork { node_count: n, sources, destinations, input_sizes, output_sizes, channel })
        .expect("random network is valid")
}

fn ordered(inner: &RegionReport, outer: &RegionReport) -> bool {
    !(inner.verdict == Verdict::Member && outer.verdict == Verdict::NonMember)
}

/// On random small networks with random rates and a random product input
/// `p`: membership in `R_in(p)` implies membership in `R_out*`, which
/// implies membership in `R_out`. A boundary verdict never counts as a
/// violation.
pub fn region_order_suite(seed: u64, draws: usize) -> Result<SuiteOutcome, RegionError> {
    let mut out = SuiteOutcome::new("region_order");
    for t in 0..draws {
        let mut rng = stream(seed, Purpose::Draw, 6, t as u64);
        let spec = random_small_network(&mut rng);
        let marginals: Vec<Vec<f64>> = spec.input_sizes().iter().map(|&s| dirichlet_uniform(&mut rng, s)).collect();
        let p = spec.product_input(&marginals)?;
        let scale = rng.random_range(0.05..0.8);
        let rates: Vec<f64> =
            (0..spec.node_count()).map(|i| if spec.is_source(i) { scale * rng.random::<f64>() } else { 0.0 }).collect();
        let opts = MembershipOptions { witnesses: vec![p.clone()], ..Default::default() };
        let inner = membership_report(&spec, &rates, &Region::In(p), &opts)?;
        let star = membership_report(&spec, &rates, &Region::OutStar, &opts)?;
        let outer = membership_report(&spec, &rates, &Region::Out, &opts)?;
        let verdicts = || format!("draw {t}: in {:?}, out* {:?}, out {:?}", inner.verdict, star.verdict, outer.verdict);
        out.check(if ordered(&inner, &star) { 0.0 } else { -1.0 }, 0.0, verdicts);
        out.check(if ordered(&star, &outer) { 0.0 } else { -1.0 }, 0.0, verdicts);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::DEFAULT_BUDGET_CELLS;
    use crate::fixtures;

    #[test]
    fn generic_suites_pass() {
        let r = renyi_suite(1, 50).unwrap();
        assert!(r.passed(), "{r:#?}");
        assert!(fano_suite(1, 50).unwrap().passed());
        assert!(continuity_suite(1, 30).unwrap().passed());
        assert!(markov_suite(1, 30).unwrap().passed());
    }

    #[test]
    fn region_order_holds_on_a_few_networks() {
        let r = region_order_suite(3, 4).unwrap();
        assert!(r.passed(), "{r:#?}");
        assert_eq!(r.checks, 8);
    }

    #[test]
    fn suites_are_deterministic() {
        assert_eq!(fano_suite(9, 20).unwrap(), fano_suite(9, 20).unwrap());
    }

    #[test]
    fn failures_are_counted() {
        let mut s = SuiteOutcome::new("t");
        s.check(0.1, 0.0, || "fine".into());
        s.check(-1.0, 0.5, || "bad".into());
        assert_eq!((s.checks, s.failed), (2, 1));
        assert_eq!(s.worst_slack, -1.0);
        assert!(!s.passed());
    }

    #[test]
    fn network_suites_pass_on_fixtures() {
        let spec = fixtures::load("bsc2").unwrap();
        let family = CodeFamily { rate: 0.5, blocklengths: vec![2], seeds: vec![0, 1], budget: DEFAULT_BUDGET_CELLS };
        assert!(simulation_suite(&spec, &family, &[1.0, 2.0]).unwrap().passed());
        assert!(certificate_suite(&spec, &family, &[2.0]).unwrap().passed());
        let line = fixtures::load("line3").unwrap();
        let r = link_bound_suite(&line, 3, 20).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
