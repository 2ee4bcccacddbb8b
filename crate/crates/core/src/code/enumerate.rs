//! Exact induced laws by depth-first enumeration of the positive-probability
//! trajectories `(w_I, x_I^n, y_I^n)`, and Monte Carlo error estimates.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{Code, CodeError, Decoder, TieRule, TIE_TOLERANCE};
use crate::network::{Cut, NetworkSpec};
use crate::prob::{Axis, Factor, JointPmf};
use crate::rng::{stream, Purpose};

pub fn message_axis(node: usize) -> String {
    format!("W{}", node + 1)
}

/// Input of `node` at 0-based time `k`.
pub fn input_axis(node: usize, k: usize) -> String {
    format!("X{}_{}", node + 1, k + 1)
}

/// Output of `node` at 0-based time `k`.
pub fn output_axis(node: usize, k: usize) -> String {
    format!("Y{}_{}", node + 1, k + 1)
}

/// Estimate of the message of `source` formed at `destination`.
pub fn estimate_axis(source: usize, destination: usize) -> String {
    format!("Wh{}_{}", source + 1, destination + 1)
}

fn digits(mut idx: usize, sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for d in (0..sizes.len()).rev() {
        out[d] = idx % sizes[d];
        idx /= sizes[d];
    }
    out
}

/// Walks the trajectory tree of one message tuple.
pub(crate) struct Walker<'a> {
    spec: &'a NetworkSpec,
    code: &'a Code,
    rows: Vec<Vec<(usize, f64)>>,
    out_digits: Vec<Vec<usize>>,
    in_digits: Vec<Vec<usize>>,
}

/// A complete trajectory: joint inputs and outputs per time slot.
pub(crate) struct Path<'p> {
    pub w: &'p [usize],
    pub xs: &'p [usize],
    pub ys: &'p [usize],
}

impl<'a> Walker<'a> {
    pub fn new(spec: &'a NetworkSpec, code: &'a Code) -> Self {
        let ny = spec.joint_output_size();
        let rows = (0..spec.joint_input_size())
            .map(|x| {
                spec.channel_row(x).iter().enumerate().filter(|(_, &q)| q > 0.0).map(|(y, &q)| (y, q)).collect()
            })
            .collect();
        Self {
            spec,
            code,
            rows,
            out_digits: (0..ny).map(|y| spec.output_digits(y)).collect(),
            in_digits: (0..spec.joint_input_size()).map(|x| spec.input_digits(x)).collect(),
        }
    }

    pub fn messages(&self, w_index: usize) -> Vec<usize> {
        digits(w_index, &self.code.message_sizes)
    }

    pub fn out_digit(&self, y: usize, node: usize) -> usize {
        self.out_digits[y][node]
    }

    pub fn in_digit(&self, x: usize, node: usize) -> usize {
        self.in_digits[x][node]
    }

    fn input_at(&self, k: usize, w: &[usize], past: &[Vec<usize>]) -> usize {
        let n = self.spec.node_count();
        let mut x = 0;
        for i in 0..n {
            let s = self.code.encoders[i].symbol(k, w[i], &past[i], self.spec.output_sizes()[i]);
            x = x * self.spec.input_sizes()[i] + s;
        }
        x
    }

    /// Calls `visit` on every trajectory of message tuple `w` whose outputs
    /// pass `keep(k, y)`, with its conditional probability given `w`.
    pub fn walk(&self, w: &[usize], keep: &dyn Fn(usize, usize) -> bool, visit: &mut dyn FnMut(&Path, f64)) {
        let n = self.code.n;
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        let mut past = vec![Vec::with_capacity(n); self.spec.node_count()];
        self.step(w, 1.0, &mut xs, &mut ys, &mut past, keep, visit);
    }

    #[allow(clippy::too_many_arguments)]
    fn step(
        &self,
        w: &[usize],
        prob: f64,
        xs: &mut Vec<usize>,
        ys: &mut Vec<usize>,
        past: &mut [Vec<usize>],
        keep: &dyn Fn(usize, usize) -> bool,
        visit: &mut dyn FnMut(&Path, f64),
    ) {
        let k = xs.len();
        if k == self.code.n {
            visit(&Path { w, xs, ys }, prob);
            return;
        }
        let x = self.input_at(k, w, past);
        xs.push(x);
        for &(y, q) in &self.rows[x] {
            if !keep(k, y) {
                continue;
            }
            ys.push(y);
            for (i, p) in past.iter_mut().enumerate() {
                p.push(self.out_digits[y][i]);
            }
            self.step(w, prob * q, xs, ys, past, keep, visit);
            for p in past.iter_mut() {
                p.pop();
            }
            ys.pop();
        }
        xs.pop();
    }

    /// Observation of `node`: its message and output sequence as one key.
    pub fn observation(&self, node: usize, w: usize, ys: &[usize]) -> u128 {
        let ny = self.spec.output_sizes()[node] as u128;
        ys.iter().fold(w as u128, |acc, &y| acc * ny + self.out_digits[y][node] as u128)
    }

    fn max_branching(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(1)
    }
}

/// Upper bound on the number of positive-probability trajectories.
pub fn trajectory_count(spec: &NetworkSpec, code: &Code) -> u128 {
    let b = Walker::new(spec, code).max_branching() as u128;
    let mut count = code.joint_message_count() as u128;
    for _ in 0..code.n {
        count = count.saturating_mul(b);
    }
    count
}

fn check_trajectories(spec: &NetworkSpec, code: &Code, budget: usize) -> Result<(), CodeError> {
    let cells = trajectory_count(spec, code);
    if cells > budget as u128 {
        return Err(CodeError::BudgetExhausted { cells, budget });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug)]
enum Choice {
    Joint(usize),
    Declared,
}

#[derive(Clone, Copy, Debug, Default)]
struct Best {
    mass: f64,
    w: usize,
    tie: bool,
}

impl Best {
    /// Folds in candidate `w` with likelihood `mass`; candidates arrive in
    /// increasing index order, so keeping the incumbent on a tie keeps the
    /// smallest index.
    fn offer(&mut self, mass: f64, w: usize) {
        if self.mass == 0.0 {
            *self = Best { mass, w, tie: false };
        } else if (mass - self.mass).abs() <= TIE_TOLERANCE * self.mass.max(mass) {
            self.tie = true;
        } else if mass > self.mass {
            *self = Best { mass, w, tie: false };
        }
    }
}

/// Observation spaces up to this many keys use a flat array.
const DENSE_KEYS: u128 = 1 << 22;

/// Best candidate per observation key of one destination.
enum Store {
    Dense(Vec<Best>),
    Sparse(HashMap<u128, Best>),
}

impl Store {
    fn new(keys: Option<u128>) -> Self {
        match keys {
            Some(k) if k <= DENSE_KEYS => Store::Dense(vec![Best::default(); k as usize]),
            _ => Store::Sparse(HashMap::new()),
        }
    }

    fn offer(&mut self, key: u128, mass: f64, w: usize) {
        match self {
            Store::Dense(v) => v[key as usize].offer(mass, w),
            Store::Sparse(m) => m.entry(key).or_default().offer(mass, w),
        }
    }

    fn get(&self, key: u128) -> Option<&Best> {
        let b = match self {
            Store::Dense(v) => v.get(key as usize),
            Store::Sparse(m) => m.get(&key),
        };
        b.filter(|b| b.mass > 0.0)
    }
}

/// Decisions of every destination, resolved from the code's decoder.
pub(crate) struct Decisions {
    /// Per node (only destinations are filled), the ML winner for every
    /// observation of positive probability.
    ml: Vec<Option<Store>>,
    ties: Option<TieRule>,
    strides: Vec<usize>,
}

/// Sums the masses of equal keys in a list of `(key, mass)` pairs.
fn combine(mut leaves: Vec<(u128, f64)>) -> Vec<(u128, f64)> {
    leaves.sort_unstable_by_key(|e| e.0);
    let mut out: Vec<(u128, f64)> = Vec::with_capacity(leaves.len());
    for (k, m) in leaves {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 += m,
            _ => out.push((k, m)),
        }
    }
    out
}

impl Decisions {
    pub fn build(spec: &NetworkSpec, code: &Code, budget: usize) -> Result<Self, CodeError> {
        let mut strides = vec![1; code.message_sizes.len()];
        for i in (0..strides.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * code.message_sizes[i + 1];
        }
        let ties = match &code.decoder {
            Decoder::MaximumLikelihood { ties } => *ties,
            Decoder::Tables { .. } => return Ok(Self { ml: Vec::new(), ties: None, strides }),
        };
        check_trajectories(spec, code, budget)?;
        let walker = Walker::new(spec, code);
        let dests = spec.destinations();
        let mut ml: Vec<Option<Store>> = (0..spec.node_count())
            .map(|j| {
                dests.contains(&j).then(|| {
                    let keys = (spec.output_sizes()[j] as u128)
                        .checked_pow(code.n as u32)
                        .and_then(|p| p.checked_mul(code.message_sizes[j] as u128));
                    Store::new(keys)
                })
            })
            .collect();
        let total = code.joint_message_count();
        const CHUNK: usize = 256;
        for start in (0..total).step_by(CHUNK) {
            let end = (start + CHUNK).min(total);
            // Per message and destination: likelihood of every observation.
            let local: Vec<Vec<Vec<(u128, f64)>>> = (start..end)
                .into_par_iter()
                .map(|wi| {
                    let w = walker.messages(wi);
                    let mut leaves = vec![Vec::new(); dests.len()];
                    walker.walk(&w, &|_, _| true, &mut |path, p| {
                        for (l, &j) in leaves.iter_mut().zip(dests) {
                            l.push((walker.observation(j, w[j], path.ys), p));
                        }
                    });
                    leaves.into_iter().map(combine).collect()
                })
                .collect();
            for (offset, per_dest) in local.into_iter().enumerate() {
                for (entries, &j) in per_dest.into_iter().zip(dests) {
                    let store = ml[j].as_mut().expect("destination store");
                    for (key, mass) in entries {
                        store.offer(key, mass, start + offset);
                    }
                }
            }
        }
        Ok(Self { ml, ties: Some(ties), strides })
    }

    /// `Ŵ_{source, destination}` given the destination's message `w_j` and
    /// its output digits `ys_j` (one per time slot).
    pub fn estimate(
        &self,
        spec: &NetworkSpec,
        code: &Code,
        destination: usize,
        w_j: usize,
        ys_j: &[usize],
        source: usize,
    ) -> usize {
        let ny = spec.output_sizes()[destination] as u128;
        let key = ys_j.iter().fold(w_j as u128, |acc, &y| acc * ny + y as u128);
        self.estimate_key(code, destination, key, source)
    }

    fn estimate_key(&self, code: &Code, destination: usize, key: u128, source: usize) -> usize {
        match &code.decoder {
            Decoder::Tables { tables } => {
                let t = tables
                    .iter()
                    .find(|t| t.source == source && t.destination == destination)
                    .expect("validated decoder tables");
                t.values[key as usize]
            }
            Decoder::MaximumLikelihood { .. } => {
                let store = self.ml[destination].as_ref().expect("destination store");
                let choice = match store.get(key) {
                    Some(b) if b.tie && self.ties == Some(TieRule::Declare) => Choice::Declared,
                    Some(b) => Choice::Joint(b.w),
                    // Every candidate has likelihood zero: a tie among all.
                    None if self.ties == Some(TieRule::Declare) => Choice::Declared,
                    None => Choice::Joint(0),
                };
                match choice {
                    Choice::Joint(w) => (w / self.strides[source]) % code.message_sizes[source],
                    Choice::Declared => code.message_sizes[source],
                }
            }
        }
    }

    /// Sum over observations at `destination` of the likelihood of the
    /// decoded tuple, counting declared failures as zero.
    fn winning_mass(&self, destination: usize, ties: TieRule) -> f64 {
        let keep = |b: &Best| b.mass > 0.0 && !(b.tie && ties == TieRule::Declare);
        match self.ml[destination].as_ref().expect("destination store") {
            Store::Dense(v) => v.iter().filter(|b| keep(b)).map(|b| b.mass).sum(),
            Store::Sparse(m) => {
                let mut entries: Vec<(&u128, &Best)> = m.iter().filter(|(_, b)| keep(b)).collect();
                entries.sort_unstable_by_key(|e| *e.0);
                entries.iter().map(|e| e.1.mass).sum()
            }
        }
    }

    fn path_has_error(&self, walker: &Walker, spec: &NetworkSpec, code: &Code, path: &Path) -> bool {
        spec.destinations().iter().any(|&j| {
            let key = walker.observation(j, path.w[j], path.ys);
            spec.sources().iter().any(|&i| i != j && self.estimate_key(code, j, key, i) != path.w[i])
        })
    }
}

/// Exact average probability that some destination misdecodes some source
/// message.
///
/// With one destination and an ML decoder the probability of success is
/// the total likelihood of the winning message tuple over observations,
/// which needs a single enumeration; otherwise every trajectory is checked
/// against every destination's decision.
pub fn exact_error_probability(spec: &NetworkSpec, code: &Code, budget: usize) -> Result<f64, CodeError> {
    code.validate(spec)?;
    check_trajectories(spec, code, budget)?;
    let decisions = Decisions::build(spec, code, budget)?;
    match (&code.decoder, spec.destinations()) {
        (Decoder::MaximumLikelihood { ties }, &[j]) => {
            let correct = decisions.winning_mass(j, *ties);
            Ok((1.0 - correct / code.joint_message_count() as f64).max(0.0))
        }
        _ => Ok(error_by_paths(spec, code, &decisions)),
    }
}

fn error_by_paths(spec: &NetworkSpec, code: &Code, decisions: &Decisions) -> f64 {
    let walker = Walker::new(spec, code);
    let total = code.joint_message_count();
    let per_message: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|wi| {
            let w = walker.messages(wi);
            let mut err = 0.0;
            walker.walk(&w, &|_, _| true, &mut |path, p| {
                if decisions.path_has_error(&walker, spec, code, path) {
                    err += p;
                }
            });
            err
        })
        .collect();
    per_message.iter().sum::<f64>() / total as f64
}

#[derive(Clone, Copy)]
enum Getter {
    Msg(usize),
    In(usize, usize),
    Out(usize, usize),
    Est(usize, usize),
}

fn axis_catalog(spec: &NetworkSpec, code: &Code) -> HashMap<String, (Getter, usize)> {
    let mut m = HashMap::new();
    for i in 0..spec.node_count() {
        m.insert(message_axis(i), (Getter::Msg(i), code.message_sizes[i]));
        for k in 0..code.n {
            m.insert(input_axis(i, k), (Getter::In(i, k), spec.input_sizes()[i]));
            m.insert(output_axis(i, k), (Getter::Out(i, k), spec.output_sizes()[i]));
        }
    }
    for (i, j) in Code::decoded_pairs(spec) {
        m.insert(estimate_axis(i, j), (Getter::Est(i, j), code.estimate_size(i)));
    }
    m
}

/// Exact marginal of the induced law on the named axes (see the `*_axis`
/// helpers for names).
pub fn induced_marginal(
    spec: &NetworkSpec,
    code: &Code,
    keep: &[impl AsRef<str>],
    budget: usize,
) -> Result<JointPmf, CodeError> {
    code.validate(spec)?;
    let catalog = axis_catalog(spec, code);
    let mut axes = Vec::with_capacity(keep.len());
    let mut getters = Vec::with_capacity(keep.len());
    for name in keep {
        let name = name.as_ref();
        let &(g, size) = catalog
            .get(name)
            .ok_or_else(|| CodeError::InvalidCode(format!("no variable named `{name}` in this code")))?;
        axes.push(Axis::new(name, size));
        getters.push(g);
    }
    let cells = axes.iter().map(|a| a.size() as u128).product::<u128>();
    if cells > budget as u128 {
        return Err(CodeError::BudgetExhausted { cells, budget });
    }
    check_trajectories(spec, code, budget)?;
    let decisions = Decisions::build(spec, code, budget)?;
    let walker = Walker::new(spec, code);
    let total = code.joint_message_count();
    let weight = 1.0 / total as f64;
    let mut values = vec![0.0; cells as usize];
    for wi in 0..total {
        let w = walker.messages(wi);
        walker.walk(&w, &|_, _| true, &mut |path, p| {
            let mut idx = 0;
            for (a, g) in axes.iter().zip(&getters) {
                let v = match *g {
                    Getter::Msg(i) => path.w[i],
                    Getter::In(i, k) => walker.in_digit(path.xs[k], i),
                    Getter::Out(i, k) => walker.out_digit(path.ys[k], i),
                    Getter::Est(i, j) => {
                        decisions.estimate_key(code, j, walker.observation(j, path.w[j], path.ys), i)
                    }
                };
                idx = idx * a.size() + v;
            }
            values[idx] += p * weight;
        });
    }
    Ok(JointPmf::from_factor(Factor::new(axes, values)?)?)
}

/// Exact induced law over `(W_I, X_I^n, Y_I^n, Ŵ)`, or over the variables of
/// the nodes outside `cut` (`W_{T^c}, X_{T^c}^n, Y_{T^c}^n` and the
/// estimates formed at `T^c`) when a cut is given.
pub fn induced_distribution(
    spec: &NetworkSpec,
    code: &Code,
    marginal_cut: Option<Cut>,
    budget: usize,
) -> Result<JointPmf, CodeError> {
    let nodes: Vec<usize> = match marginal_cut {
        Some(cut) => {
            spec.check_cut(cut)?;
            cut.complement(spec.node_count())
        }
        None => (0..spec.node_count()).collect(),
    };
    let mut keep: Vec<String> = nodes.iter().map(|&i| message_axis(i)).collect();
    for k in 0..code.n {
        for &i in &nodes {
            keep.push(input_axis(i, k));
            keep.push(output_axis(i, k));
        }
    }
    for (i, j) in Code::decoded_pairs(spec) {
        if nodes.contains(&j) {
            keep.push(estimate_axis(i, j));
        }
    }
    induced_marginal(spec, code, &keep, budget)
}

/// Largest deviation, over time slots and histories, from the memoryless
/// factorization `p(u^{k-1}, x_k, y_k) = p(u^{k-1}, x_k)·q(y_k | x_k)`.
pub fn factorization_residual(spec: &NetworkSpec, code: &Code, budget: usize) -> Result<f64, CodeError> {
    code.validate(spec)?;
    check_trajectories(spec, code, budget)?;
    let walker = Walker::new(spec, code);
    let total = code.joint_message_count();
    let weight = 1.0 / total as f64;
    let n = code.n;
    let mut prefix: Vec<HashMap<Vec<usize>, f64>> = vec![HashMap::new(); n];
    let mut with_output: Vec<HashMap<(Vec<usize>, usize), f64>> = vec![HashMap::new(); n];
    for wi in 0..total {
        let w = walker.messages(wi);
        walker.walk(&w, &|_, _| true, &mut |path, p| {
            let mut key = vec![wi];
            for k in 0..n {
                key.push(path.xs[k]);
                *prefix[k].entry(key.clone()).or_insert(0.0) += p * weight;
                *with_output[k].entry((key.clone(), path.ys[k])).or_insert(0.0) += p * weight;
                key.push(path.ys[k]);
            }
        });
    }
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for (key, &m) in &prefix[k] {
            let x = *key.last().expect("prefix ends with an input");
            for (y, &q) in spec.channel_row(x).iter().enumerate() {
                let joint = with_output[k].get(&(key.clone(), y)).copied().unwrap_or(0.0);
                worst = worst.max((joint - m * q).abs());
            }
        }
    }
    Ok(worst)
}

/// Monte Carlo error estimate with a 95% normal-approximation interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorEstimate {
    pub point: f64,
    pub half_width: f64,
    pub trials: u64,
    pub seed: u64,
}

impl ErrorEstimate {
    pub fn lower(&self) -> f64 {
        (self.point - self.half_width).max(0.0)
    }

    pub fn upper(&self) -> f64 {
        (self.point + self.half_width).min(1.0)
    }
}

/// ML decision at `destination` computed on demand: the likelihood of each
/// candidate message tuple is obtained by walking only the trajectories that
/// reproduce the observed outputs.
fn ml_decide(walker: &Walker, code: &Code, ties: TieRule, destination: usize, w_j: usize, ys_j: &[usize]) -> Choice {
    let mut best = Best::default();
    for wi in 0..code.joint_message_count() {
        let w = walker.messages(wi);
        if w[destination] != w_j {
            continue;
        }
        let mut mass = 0.0;
        walker.walk(&w, &|k, y| walker.out_digit(y, destination) == ys_j[k], &mut |_, p| mass += p);
        if mass > 0.0 {
            best.offer(mass, wi);
        }
    }
    let best = (best.mass > 0.0).then_some(best);
    match best {
        Some(b) if !(b.tie && ties == TieRule::Declare) => Choice::Joint(b.w),
        Some(_) => Choice::Declared,
        None => match ties {
            TieRule::Declare => Choice::Declared,
            TieRule::SmallestIndex => Choice::Joint(0),
        },
    }
}

fn sample_trial(walker: &Walker, spec: &NetworkSpec, code: &Code, seed: u64, t: u64) -> bool {
    let mut rng = stream(seed, Purpose::Trial, t, 0);
    let w: Vec<usize> = code.message_sizes.iter().map(|&s| rng.random_range(0..s)).collect();
    let n = code.n;
    let mut past = vec![Vec::with_capacity(n); spec.node_count()];
    let mut ys = Vec::with_capacity(n);
    for k in 0..n {
        let x = walker.input_at(k, &w, &past);
        let row = &walker.rows[x];
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut y = row.last().expect("rows are normalized").0;
        for &(cand, q) in row {
            acc += q;
            if u < acc {
                y = cand;
                break;
            }
        }
        ys.push(y);
        for (i, p) in past.iter_mut().enumerate() {
            p.push(walker.out_digit(y, i));
        }
    }
    spec.destinations().iter().any(|&j| {
        let ys_j = &past[j];
        let wrong = |i: usize, est: usize| i != j && est != w[i];
        match &code.decoder {
            Decoder::Tables { tables } => {
                let ny = spec.output_sizes()[j];
                let key = ys_j.iter().fold(w[j], |acc, &y| acc * ny + y);
                tables.iter().any(|t| t.destination == j && wrong(t.source, t.values[key]))
            }
            Decoder::MaximumLikelihood { ties } => match ml_decide(walker, code, *ties, j, w[j], ys_j) {
                Choice::Declared => spec.sources().iter().any(|&i| i != j),
                Choice::Joint(wi) => {
                    let est = walker.messages(wi);
                    spec.sources().iter().any(|&i| wrong(i, est[i]))
                }
            },
        }
    })
}

/// Monte Carlo estimate of the error probability. Trial `t` uses its own
/// random stream, so the result is identical for any thread count.
pub fn monte_carlo_error(spec: &NetworkSpec, code: &Code, trials: u64, seed: u64) -> Result<ErrorEstimate, CodeError> {
    code.validate(spec)?;
    if trials == 0 {
        return Err(CodeError::InvalidCode("at least one trial is required".into()));
    }
    let walker = Walker::new(spec, code);
    let errors: u64 =
        (0..trials).into_par_iter().map(|t| u64::from(sample_trial(&walker, spec, code, seed, t))).sum();
    let point = errors as f64 / trials as f64;
    let half_width = 1.96 * (point * (1.0 - point) / trials as f64).sqrt();
    Ok(ErrorEstimate { point, half_width, trials, seed })
}

#[cfg(test)]
mod tests {
    use super::super::{generate_random_code, repetition_code, DecoderKind, Encoder, DEFAULT_BUDGET_CELLS};
    use super::*;
    use crate::fixtures;
    use crate::network::build_feedback_version;
    use crate::prob::measures::markov_residual;

    const B: usize = DEFAULT_BUDGET_CELLS;

    fn noiseless_bit() -> NetworkSpec {
        crate::network::schema::parse_network(
            r#"{"nodes": 2, "sources": [1], "destinations": [2],
                "channel": {"kind": "product_links", "links": [
                  {"from": 1, "to": 2, "input_size": 2, "output_size": 2, "probabilities": [1, 0, 0, 1]}]}}"#,
        )
        .unwrap()
    }

    fn identity_code(n: usize) -> Code {
        Code {
            n,
            rates: vec![1.0, 0.0],
            message_sizes: vec![1 << n, 1],
            encoders: vec![
                Encoder::Blind {
                    table: (0..n).map(|k| (0..1 << n).map(|w| (w >> (n - 1 - k)) & 1).collect()).collect(),
                },
                Encoder::Blind { table: vec![vec![0]; n] },
            ],
            decoder: Decoder::MaximumLikelihood { ties: TieRule::SmallestIndex },
        }
    }

    #[test]
    fn identity_code_on_noiseless_link() {
        let spec = noiseless_bit();
        let code = identity_code(1);
        assert_eq!(exact_error_probability(&spec, &code, B).unwrap(), 0.0);
        let p = induced_distribution(&spec, &code, None, B).unwrap();
        assert!(p.values().iter().all(|&v| v == 0.0 || v == 0.5));
        let est = p.marginalize(&["W1", "Wh1_2"]).unwrap();
        assert_eq!(est.get(&[("W1", 1), ("Wh1_2", 1)]).unwrap(), 0.5);
        let mc = monte_carlo_error(&spec, &code, 1000, 9).unwrap();
        assert_eq!((mc.point, mc.half_width), (0.0, 0.0));
    }

    #[test]
    fn single_message_codes_never_err() {
        let spec = fixtures::load("line3").unwrap();
        let code = generate_random_code(&spec, &[0.0, 0.0, 0.0], 3, 5, DecoderKind::Ml).unwrap();
        assert_eq!(exact_error_probability(&spec, &code, B).unwrap(), 0.0);
    }

    #[test]
    fn repetition_code_error_matches_per_bit_analysis() {
        let spec = fixtures::load("bec2").unwrap();
        let code = repetition_code(&spec, 12, 4).unwrap();
        let exact = exact_error_probability(&spec, &code, B).unwrap();
        let oracle = 1.0 - (1.0 - 0.5f64.powi(4)).powi(3);
        assert!((exact - oracle).abs() < 1e-12, "{exact} vs {oracle}");
        let mc = monte_carlo_error(&spec, &code, 20_000, 1).unwrap();
        assert!((mc.point - exact).abs() <= 3.0 * mc.half_width, "{mc:?}");
        assert_eq!(mc, monte_carlo_error(&spec, &code, 20_000, 1).unwrap());
    }

    #[test]
    fn induced_law_is_memoryless() {
        let spec = fixtures::load("bsc2").unwrap();
        let code = generate_random_code(&spec, &[0.5, 0.0], 2, 2, DecoderKind::Ml).unwrap();
        assert!(factorization_residual(&spec, &code, B).unwrap() <= 1e-12);
        let p = induced_distribution(&spec, &code, None, B).unwrap();
        let r = markov_residual(&p, &["W1", "X1_1", "Y2_1"], &["X1_2"], &["Y2_2"]).unwrap();
        assert!(r <= 1e-12);
        let line = fixtures::load("line3").unwrap();
        let code = generate_random_code(&line, &[0.5, 0.0, 0.0], 2, 7, DecoderKind::Ml).unwrap();
        assert!(factorization_residual(&line, &code, B).unwrap() <= 1e-12);
    }

    #[test]
    fn feedback_encoders_change_the_law() {
        // Node 2 forwards what it heard in the previous slot; without
        // feedback it always sends 0.
        let spec = fixtures::load("line3").unwrap();
        let blind = generate_random_code(&spec, &[0.5, 0.0, 0.0], 2, 0, DecoderKind::Ml).unwrap();
        let mut relay = blind.clone();
        relay.encoders[1] = Encoder::Feedback { table: vec![vec![0], vec![0, 1]] };
        relay.validate(&spec).unwrap();
        let mut silent = blind.clone();
        silent.encoders[1] = Encoder::Blind { table: vec![vec![0], vec![0]] };
        let a = induced_marginal(&spec, &relay, &["X2_2"], B).unwrap();
        let b = induced_marginal(&spec, &silent, &["X2_2"], B).unwrap();
        assert!((b.values()[0] - 1.0).abs() < 1e-12 && b.values()[1] == 0.0);
        assert!(a.values()[1] > 0.0);
    }

    #[test]
    fn feedback_version_leaves_blind_codes_unchanged() {
        let spec = fixtures::load("line3").unwrap();
        let fb = build_feedback_version(&spec).unwrap();
        for seed in 0..3 {
            let code = generate_random_code(&spec, &[0.5, 0.0, 0.0], 2, seed, DecoderKind::Ml).unwrap();
            let a = exact_error_probability(&spec, &code, B).unwrap();
            let b = exact_error_probability(&fb, &code, B).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn cut_marginal_keeps_complement_variables() {
        let spec = fixtures::load("line3").unwrap();
        let code = generate_random_code(&spec, &[0.5, 0.0, 0.0], 1, 0, DecoderKind::Ml).unwrap();
        let p = induced_distribution(&spec, &code, Some(Cut::from_nodes(&[0])), B).unwrap();
        assert_eq!(p.names(), ["W2", "W3", "Wh1_3", "X2_1", "X3_1", "Y2_1", "Y3_1"]);
        assert!(matches!(
            induced_distribution(&spec, &code, None, 4),
            Err(CodeError::BudgetExhausted { .. })
        ));
    }

    #[test]
    fn winning_mass_matches_path_by_path_error() {
        for (name, rates, n) in [("bec2", vec![0.5, 0.0], 6), ("line3", vec![0.5, 0.0, 0.0], 4)] {
            let spec = fixtures::load(name).unwrap();
            for seed in 0..4 {
                let code = generate_random_code(&spec, &rates, n, seed, DecoderKind::Ml).unwrap();
                let fast = exact_error_probability(&spec, &code, B).unwrap();
                let slow = error_by_paths(&spec, &code, &Decisions::build(&spec, &code, B).unwrap());
                assert!((fast - slow).abs() < 1e-12, "{name} {seed}: {fast} vs {slow}");
            }
        }
        let spec = fixtures::load("bec2").unwrap();
        let code = repetition_code(&spec, 8, 2).unwrap();
        let slow = error_by_paths(&spec, &code, &Decisions::build(&spec, &code, B).unwrap());
        assert!((exact_error_probability(&spec, &code, B).unwrap() - slow).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_agrees_with_exact_on_random_codes() {
        let spec = fixtures::load("bec2").unwrap();
        for seed in 0..3 {
            let code = generate_random_code(&spec, &[0.5, 0.0], 6, seed, DecoderKind::Ml).unwrap();
            let exact = exact_error_probability(&spec, &code, B).unwrap();
            let mc = monte_carlo_error(&spec, &code, 20_000, seed).unwrap();
            assert!((mc.point - exact).abs() <= 4.0 * mc.half_width.max(1e-3), "{exact} {mc:?}");
        }
    }
}
