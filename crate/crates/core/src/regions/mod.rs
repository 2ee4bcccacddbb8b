//! Cut-set style rate regions as membership oracles.
//!
//! Supported regions, each evaluated cut by cut over the cuts `T` with
//! `T^c ∩ D ≠ ∅`:
//! - [`Region::Out`]: `Σ_{i∈T} R_i ≤ sup_p I(X_T; Y_{T^c} | X_{T^c})`, the
//!   supremum taken separately per cut;
//! - [`Region::OutStar`]: one product input `∏_i p_{X_i}` satisfying every
//!   cut;
//! - [`Region::In`]: a given product input, with the penalty
//!   `H(Y_T | X_I, Y_{T^c})` subtracted;
//! - [`Region::CutSet`]: a given (arbitrary) input, no penalty;
//! - [`Region::Prime`]: sum of crossing link capacities (independent-link
//!   networks only).

pub mod capacity;
pub mod objective;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::network::{
    enumerate_cuts, input_axis_name, marginal_channel, output_axis_name, product_marginals, Cut,
    NetworkError, NetworkSpec,
};
use crate::prob::{conditional_entropy, conditional_mutual_information, Factor, JointPmf, ProbError};

pub use capacity::{blahut_arimoto, dmc_capacity, BaResult};
pub use objective::{CutObjective, Maximum, OptimizerConfig};

/// Tolerance for regions evaluated without numerical optimization.
pub const EXACT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum RegionError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("grid oracle found {oracle} but ascent stopped at {ascent}")]
    OracleDisagreement { ascent: f64, oracle: f64 },
    #[error("invalid rate tuple: {0}")]
    InvalidRates(String),
    #[error("network was not built from independent links")]
    NotLinkNetwork,
}

/// How a cut bound was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMode {
    AllInputs,
    ProductInputs,
    FixedInput,
    LinkSum,
}

/// One cut's bound on the sum rate of the sources inside it.
#[derive(Clone, Debug, PartialEq)]
pub struct CutBound {
    pub cut: Cut,
    pub value: f64,
    pub argmax_input: JointPmf,
    pub mode: BoundMode,
    /// `H(Y_T | X_I, Y_{T^c})` (inner-bound regions only, else 0).
    pub penalty: f64,
    /// Certified optimality gap (all-inputs mode).
    pub gap: Option<f64>,
    /// Grid oracle value when it ran.
    pub oracle: Option<f64>,
    pub exhausted: bool,
}

fn names(nodes: &[usize], f: fn(usize) -> String) -> Vec<String> {
    nodes.iter().map(|&i| f(i)).collect()
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// `I(X_T; Y_{T^c} | X_{T^c})` under `p·q`, evaluated with the generic
/// tensor routines.
pub fn cut_value(spec: &NetworkSpec, cut: Cut, p: &JointPmf) -> Result<f64, RegionError> {
    let n = spec.node_count();
    let joint = marginal_channel(spec, cut)?.compose(p)?;
    let xt = names(&cut.nodes(n), input_axis_name);
    let xtc = names(&cut.complement(n), input_axis_name);
    let ytc = names(&cut.complement(n), output_axis_name);
    Ok(conditional_mutual_information(&joint, &refs(&xt), &refs(&ytc), &refs(&xtc))?)
}

/// `H(Y_T | X_I, Y_{T^c})` under `p·q`.
pub fn cut_penalty(spec: &NetworkSpec, cut: Cut, p: &JointPmf) -> Result<f64, RegionError> {
    spec.check_cut(cut)?;
    let n = spec.node_count();
    let joint = spec.channel().compose(p)?;
    let yt = names(&cut.nodes(n), output_axis_name);
    let mut given = names(&(0..n).collect::<Vec<_>>(), input_axis_name);
    given.extend(names(&cut.complement(n), output_axis_name));
    Ok(conditional_entropy(&joint, &refs(&yt), &refs(&given))?)
}

fn flat_input(spec: &NetworkSpec, p: &[f64]) -> Result<JointPmf, RegionError> {
    Ok(JointPmf::normalized(Factor::new(spec.input_axes(), p.to_vec())?)?)
}

/// Maximizes the cut objective over all inputs or over product inputs.
pub fn max_cut_value(
    spec: &NetworkSpec,
    cut: Cut,
    mode: BoundMode,
    cfg: &OptimizerConfig,
) -> Result<CutBound, RegionError> {
    max_cut_value_with(spec, cut, mode, cfg, &[])
}

/// [`max_cut_value`] with extra starting points.
pub fn max_cut_value_with(
    spec: &NetworkSpec,
    cut: Cut,
    mode: BoundMode,
    cfg: &OptimizerConfig,
    warm: &[JointPmf],
) -> Result<CutBound, RegionError> {
    let obj = CutObjective::new(spec, cut)?;
    let tag = cut.bitmask() as u64;
    let m = match mode {
        BoundMode::AllInputs => {
            let warm: Vec<Vec<f64>> = warm.iter().map(|p| p.values().to_vec()).collect();
            objective::maximize_all_inputs(&obj, cfg, tag, &warm)?
        }
        BoundMode::ProductInputs => {
            let warm = warm
                .iter()
                .map(|p| product_marginals(spec, p))
                .collect::<Result<Vec<_>, _>>()?;
            objective::maximize_product_inputs(&obj, cfg, tag, &warm)?
        }
        other => {
            return Err(RegionError::InvalidRates(format!("{other:?} is not an optimization mode")));
        }
    };
    Ok(CutBound {
        cut,
        value: m.value,
        argmax_input: flat_input(spec, &m.point)?,
        mode,
        penalty: 0.0,
        gap: m.gap,
        oracle: m.oracle,
        exhausted: m.exhausted,
    })
}

/// Capacity of one link with its attaining input.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkCapacity {
    pub from: usize,
    pub to: usize,
    pub capacity: f64,
    pub input: Vec<f64>,
    pub gap: f64,
}

/// Capacities `C_{i,j}` of every link of an independent-link network.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkCapacities {
    pub links: Vec<LinkCapacity>,
}

impl LinkCapacities {
    pub fn capacity(&self, from: usize, to: usize) -> f64 {
        self.links.iter().find(|l| l.from == from && l.to == to).map_or(0.0, |l| l.capacity)
    }
}

pub fn link_capacities(spec: &NetworkSpec) -> Result<LinkCapacities, RegionError> {
    let table = spec.links().ok_or(RegionError::NotLinkNetwork)?;
    let links = table
        .links
        .iter()
        .map(|l| {
            let r = blahut_arimoto(&l.probabilities, l.input_size, l.output_size);
            LinkCapacity { from: l.from, to: l.to, capacity: r.capacity, input: r.input, gap: r.gap }
        })
        .collect();
    Ok(LinkCapacities { links })
}

/// Per-cut sums of crossing link capacities. The reported input is the
/// product of the per-link capacity-achieving inputs.
pub fn rprime_bounds(
    caps: &LinkCapacities,
    spec: &NetworkSpec,
    cuts: &[Cut],
) -> Result<Vec<CutBound>, RegionError> {
    let table = spec.links().ok_or(RegionError::NotLinkNetwork)?;
    let n = spec.node_count();
    // Node input marginal: product over its outgoing links (ordered by receiver).
    let marginals: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut out = vec![1.0];
            for l in table.links.iter().filter(|l| l.from == i) {
                let input = &caps.links.iter().find(|c| c.from == l.from && c.to == l.to).expect("link").input;
                out = out.iter().flat_map(|&a| input.iter().map(move |&b| a * b)).collect();
            }
            out
        })
        .collect();
    let input = spec.product_input(&marginals)?;
    cuts.iter()
        .map(|&cut| {
            spec.check_cut(cut)?;
            let value = caps
                .links
                .iter()
                .filter(|l| cut.contains(l.from) && !cut.contains(l.to))
                .map(|l| l.capacity)
                .sum();
            Ok(CutBound {
                cut,
                value,
                argmax_input: input.clone(),
                mode: BoundMode::LinkSum,
                penalty: 0.0,
                gap: None,
                oracle: None,
                exhausted: false,
            })
        })
        .collect()
}

/// A region to test a rate tuple against.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Out,
    OutStar,
    In(JointPmf),
    CutSet(JointPmf),
    Prime,
}

impl Region {
    pub fn name(&self) -> &'static str {
        match self {
            Region::Out => "out",
            Region::OutStar => "out-star",
            Region::In(_) => "in",
            Region::CutSet(_) => "cut-set",
            Region::Prime => "prime",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Member,
    NonMember,
    Boundary,
}

impl Verdict {
    fn of_slack(slack: f64, tol: f64) -> Self {
        if slack > tol {
            Verdict::Member
        } else if slack < -tol {
            Verdict::NonMember
        } else {
            Verdict::Boundary
        }
    }

    fn combine(slacks: impl Iterator<Item = Verdict>) -> Self {
        let mut out = Verdict::Member;
        for v in slacks {
            match v {
                Verdict::NonMember => return Verdict::NonMember,
                Verdict::Boundary => out = Verdict::Boundary,
                Verdict::Member => {}
            }
        }
        out
    }
}

/// One cut of a membership report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutRecord {
    pub cut_bitmask: u32,
    pub bound_bits: f64,
    pub penalty_bits: f64,
    pub slack_bits: f64,
    pub argmax_input: Vec<f64>,
    /// The constraint holds for every input: no rate crosses the cut and
    /// the bound cannot be negative.
    pub vacuous: bool,
    pub verdict: Verdict,
}

/// Membership verdict with per-cut slacks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionReport {
    pub region: &'static str,
    pub rates: Vec<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub cuts: Vec<CutRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Settings for [`membership_report`].
#[derive(Clone, Debug, Default)]
pub struct MembershipOptions {
    pub optimizer: OptimizerConfig,
    /// Extra input pmfs used as warm starts (R_out) or candidate witnesses
    /// (R_out*).
    pub witnesses: Vec<JointPmf>,
}

/// Checks `R_i ≥ 0` and `R_i = 0` off the source set.
pub fn validate_rates(spec: &NetworkSpec, rates: &[f64]) -> Result<(), RegionError> {
    if rates.len() != spec.node_count() {
        return Err(RegionError::InvalidRates(format!(
            "expected {} rates, got {}",
            spec.node_count(),
            rates.len()
        )));
    }
    for (i, &r) in rates.iter().enumerate() {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(RegionError::InvalidRates(format!("rate of node {} is {r}", i + 1)));
        }
        if r > 0.0 && !spec.is_source(i) {
            return Err(RegionError::InvalidRates(format!("node {} is not a source but has rate {r}", i + 1)));
        }
    }
    Ok(())
}

fn sum_rate(cut: Cut, rates: &[f64]) -> f64 {
    rates.iter().enumerate().filter(|&(i, _)| cut.contains(i)).map(|(_, r)| r).sum()
}

fn record(bound: &CutBound, rates: &[f64], tol: f64) -> CutRecord {
    let bound_bits = bound.value - bound.penalty;
    let sum = sum_rate(bound.cut, rates);
    let slack = bound_bits - sum;
    // Without a penalty term the bound is a mutual information (or a sum of
    // capacities) and therefore nonnegative; the empty cut is always 0 ≤ 0.
    let vacuous = sum == 0.0 && (bound.penalty == 0.0 || bound.cut.bitmask() == 0);
    CutRecord {
        cut_bitmask: bound.cut.bitmask(),
        bound_bits,
        penalty_bits: bound.penalty,
        slack_bits: slack,
        argmax_input: bound.argmax_input.values().to_vec(),
        vacuous,
        verdict: if vacuous { Verdict::Member } else { Verdict::of_slack(slack, tol) },
    }
}

fn report(region: &Region, rates: &[f64], tol: f64, cuts: Vec<CutRecord>) -> RegionReport {
    RegionReport {
        region: region.name(),
        rates: rates.to_vec(),
        tolerance: tol,
        verdict: Verdict::combine(cuts.iter().map(|c| c.verdict)),
        cuts,
        witness: None,
        note: None,
    }
}

/// Per-cut bounds of a fixed input, with or without the penalty term.
pub fn fixed_input_bounds(
    spec: &NetworkSpec,
    cuts: &[Cut],
    p: &JointPmf,
    with_penalty: bool,
) -> Result<Vec<CutBound>, RegionError> {
    cuts.iter()
        .map(|&cut| {
            Ok(CutBound {
                cut,
                value: cut_value(spec, cut, p)?,
                argmax_input: p.clone(),
                mode: BoundMode::FixedInput,
                penalty: if with_penalty { cut_penalty(spec, cut, p)? } else { 0.0 },
                gap: None,
                oracle: None,
                exhausted: false,
            })
        })
        .collect()
}

/// Membership of `rates` in `region`.
pub fn membership_report(
    spec: &NetworkSpec,
    rates: &[f64],
    region: &Region,
    opts: &MembershipOptions,
) -> Result<RegionReport, RegionError> {
    validate_rates(spec, rates)?;
    let cuts = enumerate_cuts(spec);
    let cfg = &opts.optimizer;
    match region {
        Region::Out => {
            let bounds = cuts
                .par_iter()
                .map(|&c| max_cut_value_with(spec, c, BoundMode::AllInputs, cfg, &opts.witnesses))
                .collect::<Result<Vec<_>, _>>()?;
            let records = bounds.iter().map(|b| record(b, rates, cfg.tolerance)).collect();
            Ok(report(region, rates, cfg.tolerance, records))
        }
        Region::OutStar => out_star(spec, rates, &cuts, opts),
        Region::In(p) => {
            product_marginals(spec, p)?;
            let bounds = fixed_input_bounds(spec, &cuts, p, true)?;
            let records = bounds.iter().map(|b| record(b, rates, EXACT_TOLERANCE)).collect();
            Ok(report(region, rates, EXACT_TOLERANCE, records))
        }
        Region::CutSet(p) => {
            let bounds = fixed_input_bounds(spec, &cuts, p, false)?;
            let records = bounds.iter().map(|b| record(b, rates, EXACT_TOLERANCE)).collect();
            Ok(report(region, rates, EXACT_TOLERANCE, records))
        }
        Region::Prime => {
            let caps = link_capacities(spec)?;
            let bounds = rprime_bounds(&caps, spec, &cuts)?;
            let records = bounds.iter().map(|b| record(b, rates, EXACT_TOLERANCE)).collect();
            Ok(report(region, rates, EXACT_TOLERANCE, records))
        }
    }
}

/// Smallest per-cut slack of a product input given by node marginals.
fn min_slack(objs: &[(Cut, CutObjective)], m: &[Vec<f64>], rates: &[f64]) -> (f64, usize) {
    objs.iter()
        .enumerate()
        .map(|(k, (cut, obj))| (obj.value(&obj.product(m)) - sum_rate(*cut, rates), k))
        .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
}

/// Local search for a product input maximizing the smallest cut slack.
fn improve_witness(objs: &[(Cut, CutObjective)], start: Vec<Vec<f64>>, rates: &[f64]) -> (f64, Vec<Vec<f64>>) {
    let mut m = start;
    let (mut g, mut active) = min_slack(objs, &m, rates);
    for _ in 0..300 {
        let mut improved = false;
        for i in 0..m.len() {
            if m[i].len() == 1 {
                continue;
            }
            let obj = &objs[active].1;
            let (_, grad) = obj.value_and_gradient(&obj.product(&m));
            let bg = obj.block_gradient(&m, i, &grad);
            let mut step = 0.5;
            while step > 1e-8 {
                let cand_block = objective::project_simplex(
                    &m[i].iter().zip(&bg).map(|(a, b)| a + step * b).collect::<Vec<_>>(),
                );
                let mut cand = m.clone();
                cand[i] = cand_block;
                let (gc, ac) = min_slack(objs, &cand, rates);
                if gc > g + 1e-13 {
                    m = cand;
                    g = gc;
                    active = ac;
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
        }
        if !improved {
            break;
        }
    }
    (g, m)
}

fn out_star(
    spec: &NetworkSpec,
    rates: &[f64],
    cuts: &[Cut],
    opts: &MembershipOptions,
) -> Result<RegionReport, RegionError> {
    let cfg = &opts.optimizer;
    let tol = cfg.tolerance;
    let region = Region::OutStar;
    let maxima = cuts
        .par_iter()
        .map(|&c| max_cut_value_with(spec, c, BoundMode::ProductInputs, cfg, &opts.witnesses))
        .collect::<Result<Vec<_>, _>>()?;
    let per_cut: Vec<CutRecord> = maxima.iter().map(|b| record(b, rates, tol)).collect();
    if per_cut.iter().any(|r| r.verdict == Verdict::NonMember) {
        let mut rep = report(&region, rates, tol, per_cut);
        rep.note = Some("a cut's maximum over product inputs is below its sum rate".into());
        return Ok(rep);
    }
    let objs: Vec<(Cut, CutObjective)> =
        cuts.iter().map(|&c| Ok((c, CutObjective::new(spec, c)?))).collect::<Result<_, RegionError>>()?;
    let mut starts: Vec<Vec<Vec<f64>>> = opts
        .witnesses
        .iter()
        .map(|p| product_marginals(spec, p))
        .collect::<Result<_, _>>()?;
    starts.push(spec.input_sizes().iter().map(|&s| vec![1.0 / s as f64; s]).collect());
    for b in &maxima {
        starts.push(product_marginals(spec, &b.argmax_input).unwrap_or_else(|_| {
            spec.input_sizes().iter().map(|&s| vec![1.0 / s as f64; s]).collect()
        }));
    }
    let candidates: Vec<(f64, Vec<Vec<f64>>)> =
        starts.into_iter().map(|s| improve_witness(&objs, s, rates)).collect();
    let (g, m) = candidates
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 + 1e-12 { b } else { a })
        .expect("at least one start");
    if g < -tol {
        let mut rep = report(&region, rates, tol, per_cut);
        rep.verdict = Verdict::Boundary;
        rep.note = Some(format!(
            "every cut is satisfiable by some product input, but no common product input was found (best smallest slack {g:.3e})"
        ));
        return Ok(rep);
    }
    let witness = spec.product_input(&m)?;
    let bounds = fixed_input_bounds(spec, cuts, &witness, false)?;
    let mut rep = report(&region, rates, tol, bounds.iter().map(|b| record(b, rates, tol)).collect());
    rep.witness = Some(witness.values().to_vec());
    Ok(rep)
}

/// One cut of a product-dominance check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominanceRecord {
    pub cut_bitmask: u32,
    pub value_at_product: f64,
    pub max_value: f64,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominanceReport {
    pub cuts: Vec<DominanceRecord>,
    pub tolerance: f64,
    pub dominated: bool,
}

/// Compares the cut objective at a product input against its maximum over
/// all inputs, cut by cut. `cfg.grid_resolution` sets the oracle grid.
pub fn check_product_dominance(
    spec: &NetworkSpec,
    p_star: &JointPmf,
    cuts: &[Cut],
    cfg: &OptimizerConfig,
) -> Result<DominanceReport, RegionError> {
    product_marginals(spec, p_star)?;
    let cuts: Vec<DominanceRecord> = cuts
        .iter()
        .map(|&cut| {
            let at = cut_value(spec, cut, p_star)?;
            let best = max_cut_value_with(spec, cut, BoundMode::AllInputs, cfg, std::slice::from_ref(p_star))?;
            let max_value = best.oracle.map_or(best.value, |o| o.max(best.value));
            Ok(DominanceRecord { cut_bitmask: cut.bitmask(), value_at_product: at, max_value, slack: max_value - at })
        })
        .collect::<Result<_, RegionError>>()?;
    let dominated = cuts.iter().all(|c| c.slack <= cfg.tolerance);
    Ok(DominanceReport { cuts, tolerance: cfg.tolerance, dominated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_erasure_network, build_independent_dmc_network, ErasureEdge, Link, LinkChannelTable};

    fn bsc(from: usize, to: usize, eps: f64) -> Link {
        Link { from, to, input_size: 2, output_size: 2, probabilities: vec![1.0 - eps, eps, eps, 1.0 - eps] }
    }

    fn line() -> NetworkSpec {
        build_independent_dmc_network(
            LinkChannelTable { node_count: 3, links: vec![bsc(0, 1, 0.1), bsc(1, 2, 0.1)] },
            &[0],
            &[2],
        )
        .unwrap()
    }

    const C_BSC: f64 = 0.531_004_406_410_719;

    #[test]
    fn cut_value_cases() {
        let spec = line();
        let u = spec.uniform_input();
        assert_eq!(cut_value(&spec, Cut::from_bitmask(0), &u).unwrap(), 0.0);
        assert!((cut_value(&spec, Cut::from_nodes(&[0]), &u).unwrap() - C_BSC).abs() < 1e-12);
        let noiseless = build_independent_dmc_network(
            LinkChannelTable { node_count: 2, links: vec![bsc(0, 1, 0.0)] },
            &[0],
            &[1],
        )
        .unwrap();
        assert!((cut_value(&noiseless, Cut::from_nodes(&[0]), &noiseless.uniform_input()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fast_objective_matches_generic_route() {
        let spec = line();
        let p = crate::prob::make_joint(spec.input_axes(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        for cut in enumerate_cuts(&spec) {
            let obj = CutObjective::new(&spec, cut).unwrap();
            assert!((obj.value(p.values()) - cut_value(&spec, cut, &p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn rprime_bounds_on_line() {
        let spec = line();
        let caps = link_capacities(&spec).unwrap();
        let b = rprime_bounds(&caps, &spec, &enumerate_cuts(&spec)).unwrap();
        assert_eq!(b[0].value, 0.0);
        assert!((b[1].value - C_BSC).abs() < 1e-9);
        // Diamond: 1→2, 1→3, 2→4, 3→4 noiseless.
        let diamond = build_independent_dmc_network(
            LinkChannelTable {
                node_count: 4,
                links: vec![bsc(0, 1, 0.0), bsc(0, 2, 0.0), bsc(1, 3, 0.0), bsc(2, 3, 0.0)],
            },
            &[0],
            &[3],
        )
        .unwrap();
        let caps = link_capacities(&diamond).unwrap();
        let b = rprime_bounds(&caps, &diamond, &[Cut::from_nodes(&[0])]).unwrap();
        assert!((b[0].value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn prime_membership_verdicts() {
        let spec = line();
        let opts = MembershipOptions::default();
        let r = membership_report(&spec, &[0.52, 0.0, 0.0], &Region::Prime, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Member);
        let r = membership_report(&spec, &[0.54, 0.0, 0.0], &Region::Prime, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::NonMember);
        for region in [Region::Out, Region::OutStar, Region::Prime, Region::In(spec.uniform_input())] {
            let r = membership_report(&spec, &[0.0; 3], &region, &opts).unwrap();
            assert_ne!(r.verdict, Verdict::NonMember, "{}", region.name());
        }
        assert!(membership_report(&spec, &[0.1, 0.1, 0.0], &Region::Prime, &opts).is_err());
    }

    #[test]
    fn out_region_on_line_network() {
        let spec = line();
        let opts = MembershipOptions::default();
        let r = membership_report(&spec, &[0.52, 0.0, 0.0], &Region::Out, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Member);
        let r = membership_report(&spec, &[0.54, 0.0, 0.0], &Region::Out, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::NonMember);
        let r = membership_report(&spec, &[0.52, 0.0, 0.0], &Region::OutStar, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Member);
        assert!(r.witness.is_some());
    }

    #[test]
    fn dominance_examples() {
        let bsc2 = build_independent_dmc_network(
            LinkChannelTable { node_count: 2, links: vec![bsc(0, 1, 0.1)] },
            &[0],
            &[1],
        )
        .unwrap();
        let rep = check_product_dominance(&bsc2, &bsc2.uniform_input(), &enumerate_cuts(&bsc2), &OptimizerConfig::default())
            .unwrap();
        assert!(rep.cuts.iter().all(|c| c.slack <= 1e-6));
        let z = build_independent_dmc_network(
            LinkChannelTable {
                node_count: 2,
                links: vec![Link { from: 0, to: 1, input_size: 2, output_size: 2, probabilities: vec![1.0, 0.0, 0.5, 0.5] }],
            },
            &[0],
            &[1],
        )
        .unwrap();
        let rep = check_product_dominance(&z, &z.uniform_input(), &enumerate_cuts(&z), &OptimizerConfig::default()).unwrap();
        assert!(!rep.dominated);
        // Uniform gives H(Y) − 1/2 = H_b(1/4) − 1/2; capacity is log2(5) − 2.
        let hb = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        assert!((rep.cuts[1].slack - (5f64.log2() - 2.0 - (hb(0.25) - 0.5))).abs() < 1e-6);
    }

    #[test]
    fn erasure_relay_dominated_by_uniform() {
        let spec = build_erasure_network(
            3,
            &[2, 2, 1],
            &[ErasureEdge { from: 0, to: 1, erasure: 0.5 }, ErasureEdge { from: 1, to: 2, erasure: 0.5 }],
            &[0],
            &[2],
        )
        .unwrap();
        let cfg = OptimizerConfig { grid_resolution: 64, ..OptimizerConfig::default() };
        let rep = check_product_dominance(&spec, &spec.uniform_input(), &enumerate_cuts(&spec), &cfg).unwrap();
        assert!(rep.dominated, "{rep:?}");
        assert!(rep.cuts.iter().all(|c| c.slack <= 1e-3));
    }
}
