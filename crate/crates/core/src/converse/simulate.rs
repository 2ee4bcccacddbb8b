//! The simulating law `s` of a code across a cut and the audit of its five
//! defining properties.
//!
//! `s` keeps the code's own law on the cut side (`X_T^n`, `Y_T^n` and every
//! estimate not formed across the cut) and replaces the complement side by
//! `r`: messages as in the code, complement encoders as in the code, but
//! complement outputs drawn from the tilted channels `s^{(λ)}_k(y | x_{T^c})`.
//! Estimates of cut-side messages formed on the complement side are then
//! produced by the code's decoders. Encoders and decoders enter as total
//! functions, so `s` is defined on histories the code never produces.

use serde::Serialize;

use super::{build_tilted_sequence, conditional, ConverseError, TiltedSequence, CHAIN_TOLERANCE, NULL_MASS};
use crate::code::{
    estimate_axis, induced_distribution, input_axis, message_axis, output_axis, Code, Decisions,
};
use crate::network::{Cut, NetworkSpec};
use crate::prob::{markov_residual, Axis, Factor, JointPmf, ProbError};

/// A code's induced law `p`, its simulating law `s`, and the tilted
/// sequence `s` was built from.
#[derive(Clone, Debug)]
pub struct SimulatingDistribution {
    pub lambda: f64,
    pub cut: Cut,
    pub p: JointPmf,
    pub s: JointPmf,
    pub tilted: TiltedSequence,
    /// Tilted channel rows at inputs of zero tilted mass (taken uniform)
    /// that `s` nevertheless reaches.
    pub substituted_rows_reached: usize,
}

/// Variable names of a code on a network, split by a cut.
pub(crate) struct Names {
    pub n: usize,
    pub t: Vec<usize>,
    pub tc: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
}

impl Names {
    pub fn new(spec: &NetworkSpec, code: &Code, cut: Cut) -> Self {
        Self {
            n: code.n,
            t: cut.nodes(spec.node_count()),
            tc: cut.complement(spec.node_count()),
            pairs: Code::decoded_pairs(spec),
        }
    }

    pub fn messages(&self, nodes: &[usize]) -> Vec<String> {
        nodes.iter().map(|&i| message_axis(i)).collect()
    }

    pub fn all_messages(&self) -> Vec<String> {
        let mut all: Vec<usize> = self.t.iter().chain(&self.tc).copied().collect();
        all.sort_unstable();
        self.messages(&all)
    }

    /// Inputs of `nodes` at 0-based times `times`.
    pub fn inputs(&self, nodes: &[usize], times: std::ops::Range<usize>) -> Vec<String> {
        times.flat_map(|k| nodes.iter().map(move |&i| input_axis(i, k))).collect()
    }

    pub fn outputs(&self, nodes: &[usize], times: std::ops::Range<usize>) -> Vec<String> {
        times.flat_map(|k| nodes.iter().map(move |&i| output_axis(i, k))).collect()
    }

    pub fn all_nodes(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.t.iter().chain(&self.tc).copied().collect();
        all.sort_unstable();
        all
    }

    /// Estimates of cut-side sources formed on the complement side.
    pub fn crossing_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs.iter().copied().filter(|(i, j)| self.t.contains(i) && self.tc.contains(j)).collect()
    }

    pub fn estimates(pairs: &[(usize, usize)]) -> Vec<String> {
        pairs.iter().map(|&(i, j)| estimate_axis(i, j)).collect()
    }
}

fn as_str(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn mixed_radix(digits: &[usize], sizes: &[usize]) -> usize {
    digits.iter().zip(sizes).fold(0, |acc, (&d, &s)| acc * s + d)
}

struct TailWalk<'a> {
    spec: &'a NetworkSpec,
    code: &'a Code,
    tilted: &'a TiltedSequence,
    decisions: &'a Decisions,
    tc: &'a [usize],
    crossing: &'a [(usize, usize)],
    /// Tilted input mass of each `x_{T^c}` per time.
    tc_mass: Vec<Vec<f64>>,
    sizes: Vec<usize>,
    values: Vec<f64>,
    reached: Vec<Vec<bool>>,
}

impl TailWalk<'_> {
    fn step(&mut self, k: usize, w: &[usize], past: &mut [Vec<usize>], digits: &mut Vec<usize>, weight: f64) {
        if k == self.code.n {
            let base = digits.len();
            for &(i, j) in self.crossing {
                digits.push(self.decisions.estimate(self.spec, self.code, j, w[j], &past[j], i));
            }
            let idx = mixed_radix(digits, &self.sizes);
            self.values[idx] += weight;
            digits.truncate(base);
            return;
        }
        let xs: Vec<usize> = self
            .tc
            .iter()
            .map(|&i| self.code.encoders[i].symbol(k, w[i], &past[i], self.spec.output_sizes()[i]))
            .collect();
        let in_sizes: Vec<usize> = self.tc.iter().map(|&i| self.spec.input_sizes()[i]).collect();
        let out_sizes: Vec<usize> = self.tc.iter().map(|&i| self.spec.output_sizes()[i]).collect();
        let x_tc = mixed_radix(&xs, &in_sizes);
        if self.tc_mass[k][x_tc] <= 0.0 {
            self.reached[k][x_tc] = true;
        }
        let row: Vec<f64> = self.tilted.channel_row(k, x_tc).to_vec();
        for (y, &sy) in row.iter().enumerate() {
            if sy == 0.0 {
                continue;
            }
            let mut rest = y;
            let mut ys = vec![0; self.tc.len()];
            for d in (0..self.tc.len()).rev() {
                ys[d] = rest % out_sizes[d];
                rest /= out_sizes[d];
            }
            let base = digits.len();
            digits.extend_from_slice(&xs);
            digits.extend_from_slice(&ys);
            for (d, &j) in self.tc.iter().enumerate() {
                past[j].push(ys[d]);
            }
            self.step(k + 1, w, past, digits, weight * sy);
            for &j in self.tc {
                past[j].pop();
            }
            digits.truncate(base);
        }
    }
}

/// Builds the simulating law of `code` across `cut` at order `λ ≥ 1`,
/// together with the code's induced law over the same variables.
pub fn build_simulating_distribution(
    spec: &NetworkSpec,
    code: &Code,
    cut: Cut,
    lambda: f64,
    budget: usize,
) -> Result<SimulatingDistribution, ConverseError> {
    spec.check_cut(cut)?;
    let p = induced_distribution(spec, code, None, budget)?;
    let names = Names::new(spec, code, cut);
    let n = code.n;
    let all = names.all_nodes();

    let mut tilt_axes = names.inputs(&all, 0..n);
    tilt_axes.extend(names.outputs(&names.tc, 0..n));
    let tilted = build_tilted_sequence(spec, &p.marginalize(&tilt_axes)?, cut, lambda, n, budget)?;

    let crossing = names.crossing_pairs();
    let mut head_names = names.inputs(&names.t, 0..n);
    head_names.extend(names.outputs(&names.t, 0..n));
    head_names.extend(Names::estimates(
        &names.pairs.iter().copied().filter(|pair| !crossing.contains(pair)).collect::<Vec<_>>(),
    ));
    let head = p.factor().marginal(&head_names)?;

    let mut tail_axes: Vec<Axis> =
        all.iter().map(|&i| Axis::new(message_axis(i), code.message_sizes[i])).collect();
    for k in 0..n {
        tail_axes.extend(names.tc.iter().map(|&i| Axis::new(input_axis(i, k), spec.input_sizes()[i])));
        tail_axes.extend(names.tc.iter().map(|&j| Axis::new(output_axis(j, k), spec.output_sizes()[j])));
    }
    tail_axes.extend(crossing.iter().map(|&(i, j)| Axis::new(estimate_axis(i, j), code.estimate_size(i))));
    let tail_cells = tail_axes.iter().map(|a| a.size() as u128).product::<u128>();
    let cells = tail_cells.saturating_mul(head.len() as u128);
    if cells > budget as u128 {
        return Err(ConverseError::BudgetExhausted { cells, budget });
    }

    let lay = &tilted.layout;
    let tc_mass: Vec<Vec<f64>> = tilted
        .joints
        .iter()
        .map(|j| {
            let mut mass = vec![0.0; lay.ntc];
            for (c, &v) in j.values().iter().enumerate() {
                mass[lay.xtc[c / lay.b]] += v;
            }
            mass
        })
        .collect();
    let decisions = Decisions::build(spec, code, budget)?;
    let mut walk = TailWalk {
        spec,
        code,
        tilted: &tilted,
        decisions: &decisions,
        tc: &names.tc,
        crossing: &crossing,
        tc_mass,
        sizes: tail_axes.iter().map(Axis::size).collect(),
        values: vec![0.0; tail_cells as usize],
        reached: vec![vec![false; lay.ntc]; n],
    };
    let total = code.joint_message_count();
    let weight = 1.0 / total as f64;
    for wi in 0..total {
        let mut rest = wi;
        let mut w = vec![0; spec.node_count()];
        for i in (0..spec.node_count()).rev() {
            w[i] = rest % code.message_sizes[i];
            rest /= code.message_sizes[i];
        }
        let mut past = vec![Vec::with_capacity(n); spec.node_count()];
        let mut digits = w.clone();
        walk.step(0, &w, &mut past, &mut digits, weight);
    }
    let substituted_rows_reached = walk.reached.iter().flatten().filter(|&&r| r).count();
    let tail = Factor::new(tail_axes, walk.values)?;
    let s = JointPmf::from_factor(head.product(&tail)?)?;
    Ok(SimulatingDistribution { lambda, cut, p, s, tilted, substituted_rows_reached })
}

/// Deviations of the five defining properties of a simulating law.
///
/// Conditional equalities compare conditionals on cells whose conditioning
/// mass under the code's law exceeds [`NULL_MASS`]; property (iv) involves
/// only `s` and uses `s` as the reference. The `null_cells_*` counts are
/// conditioning cells that carry mass under `s` but not under the code,
/// where the code's conditional is undefined and `s` follows the code's
/// encoder and decoder functions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationReport {
    pub lambda: f64,
    pub cut_bitmask: u32,
    /// L1 distance between the message marginals.
    pub property_i: f64,
    /// Largest conditional deviation of the crossing estimates given the
    /// complement messages and outputs.
    pub property_ii: f64,
    /// Largest Markov residual of `(W_I, X_{T^c}^{k−1}, Y_{T^c}^{k−1}) →
    /// X_{T^c,k} → Y_{T^c,k}` under `s`, over `k`.
    pub property_iii: f64,
    /// Largest deviation of `s(y_{T^c,k} | x_{T^c,k})` from the tilted channel.
    pub property_iv: f64,
    /// Largest deviation between the code's complement encoders seen through
    /// `p` and through `s`.
    pub property_v: f64,
    pub null_cells_ii: usize,
    pub null_cells_v: usize,
    /// Largest L1 distance between the tilted and induced per-time joints.
    pub induced_l1: f64,
    pub passed: bool,
}

impl SimulationReport {
    pub fn max_deviation(&self) -> f64 {
        [self.property_i, self.property_ii, self.property_iii, self.property_iv, self.property_v]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Largest deviation between `p(target | given_p)` and `s(target | given_s)`
/// (`given_s ⊆ given_p`) over `p`-positive cells, and the number of
/// `given_s` cells positive under `s` but null under `p`.
fn conditional_deviation(
    p: &Factor,
    s: &Factor,
    target: &[String],
    given_p: &[String],
    given_s: &[String],
) -> Result<(f64, usize), ProbError> {
    if target.is_empty() {
        return Ok((0.0, 0));
    }
    let cp = conditional(p, target, given_p)?;
    let cs = conditional(s, target, given_s)?;
    let diff = cp.zip_with(&cs, |a, b| (a - b).abs())?;
    let mask = p.marginal(given_p)?;
    let dev = diff
        .zip_with(&mask, |d, m| if m > NULL_MASS { d } else { 0.0 })?
        .values()
        .iter()
        .fold(0.0, |a: f64, &b| a.max(b));
    let nulls = s
        .marginal(given_s)?
        .zip_with(&p.marginal(given_s)?, |a, b| if a > NULL_MASS && b <= NULL_MASS { 1.0 } else { 0.0 })?
        .values()
        .iter()
        .filter(|&&v| v > 0.0)
        .count();
    Ok((dev, nulls))
}

/// Checks properties (i)–(v) of `sim.s` against `sim.p`.
pub fn verify_lemma1(spec: &NetworkSpec, code: &Code, sim: &SimulatingDistribution) -> Result<SimulationReport, ConverseError> {
    let names = Names::new(spec, code, sim.cut);
    let (p, s) = (sim.p.factor(), sim.s.factor());
    let all = names.all_nodes();
    let w_all = names.all_messages();
    let w_tc = names.messages(&names.tc);
    let n = names.n;

    let property_i = p.marginal(&w_all)?.zip_with(&s.marginal(&w_all)?, |a, b| (a - b).abs())?.values().iter().sum();

    let mut given = w_tc.clone();
    given.extend(names.outputs(&names.tc, 0..n));
    let crossing = Names::estimates(&names.crossing_pairs());
    let (property_ii, null_cells_ii) = conditional_deviation(p, s, &crossing, &given, &given)?;

    let mut property_iii: f64 = 0.0;
    let mut property_iv: f64 = 0.0;
    let mut property_v: f64 = 0.0;
    let mut null_cells_v = 0;
    let lay = &sim.tilted.layout;
    for k in 0..n {
        let x_k = names.inputs(&names.tc, k..k + 1);
        let y_k = names.outputs(&names.tc, k..k + 1);
        let mut past = w_all.clone();
        past.extend(names.inputs(&names.tc, 0..k));
        past.extend(names.outputs(&names.tc, 0..k));
        if !x_k.is_empty() && !y_k.is_empty() {
            property_iii =
                property_iii.max(markov_residual(&sim.s, &as_str(&past), &as_str(&x_k), &as_str(&y_k))?);
        }

        let mut axes: Vec<Axis> =
            names.tc.iter().map(|&i| Axis::new(input_axis(i, k), spec.input_sizes()[i])).collect();
        axes.extend(names.tc.iter().map(|&j| Axis::new(output_axis(j, k), spec.output_sizes()[j])));
        let tilted = Factor::new(axes, sim.tilted.channels[k].clone())?;
        debug_assert_eq!(tilted.len(), lay.ntc * lay.b);
        let cs = conditional(s, &y_k, &x_k)?;
        let mask = s.marginal(&x_k)?;
        let dev = cs
            .zip_with(&tilted, |a, b| (a - b).abs())?
            .zip_with(&mask, |d, m| if m > NULL_MASS { d } else { 0.0 })?
            .values()
            .iter()
            .fold(0.0, |a: f64, &b| a.max(b));
        property_iv = property_iv.max(dev);

        let mut given_p = w_all.clone();
        given_p.extend(names.inputs(&all, 0..k));
        given_p.extend(names.outputs(&names.tc, 0..k));
        let mut given_s = w_tc.clone();
        given_s.extend(names.inputs(&names.tc, 0..k));
        given_s.extend(names.outputs(&names.tc, 0..k));
        let (dev, nulls) = conditional_deviation(p, s, &x_k, &given_p, &given_s)?;
        property_v = property_v.max(dev);
        null_cells_v += nulls;
    }
    let mut report = SimulationReport {
        lambda: sim.lambda,
        cut_bitmask: sim.cut.bitmask(),
        property_i,
        property_ii,
        property_iii,
        property_iv,
        property_v,
        null_cells_ii,
        null_cells_v,
        induced_l1: sim.tilted.induced_l1,
        passed: false,
    };
    report.passed = report.max_deviation() <= CHAIN_TOLERANCE;
    Ok(report)
}
