//! λ-tilted per-letter laws of a code across a cut.
//!
//! Two independent evaluations are kept side by side. The direct route
//! sums, for every time `k`, the tilting weights of all histories
//! `(x_I^{k−1}, y_{T^c}^{k−1})` from scratch in the linear domain, feeding
//! each step the tilted channel `s(y_{T^c} | x_{T^c})` of the earlier steps.
//! The recursive route carries `log f_k` forward one time slot at a time and
//! normalizes with log-sum-exp. Agreement of the two is the tilt identity.

use std::f64::consts::LN_2;

use serde::Serialize;

use super::ConverseError;
use crate::code::{input_axis, output_axis};
use crate::network::{input_axis_name, marginal_channel, output_axis_name, Cut, NetworkSpec};
use crate::prob::measures::divergence_terms;
use crate::prob::{Axis, JointPmf, ZeroMassPolicy};

/// Flat layout of one time slot: joint input `x` and complement output `y`.
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    pub a: usize,
    pub b: usize,
    /// `q(y_{T^c} | x_I)`, row-major `[x][y]`.
    pub q: Vec<f64>,
    /// `x_{T^c}` sub-index of each joint input.
    pub xtc: Vec<usize>,
    pub ntc: usize,
}

impl Layout {
    fn new(spec: &NetworkSpec, cut: Cut) -> Result<Self, ConverseError> {
        let q = marginal_channel(spec, cut)?;
        let tc = cut.complement(spec.node_count());
        Ok(Self {
            a: q.n_from(),
            b: q.n_to(),
            q: q.rows().to_vec(),
            xtc: spec.input_split(cut).into_iter().map(|(_, c)| c).collect(),
            ntc: spec.input_size_of(&tc),
        })
    }

    fn q(&self, x: usize, y: usize) -> f64 {
        self.q[x * self.b + y]
    }

    /// `s(y | x_{T^c})` rows from a per-letter input law; zero-mass rows are
    /// uniform. Returns the rows and the number substituted.
    fn complement_channel(&self, input: &[f64]) -> (Vec<f64>, usize) {
        let mut rows = vec![0.0; self.ntc * self.b];
        for x in 0..self.a {
            for y in 0..self.b {
                rows[self.xtc[x] * self.b + y] += input[x] * self.q(x, y);
            }
        }
        let mut substituted = 0;
        for row in rows.chunks_mut(self.b) {
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                row.iter_mut().for_each(|v| *v /= sum);
            } else {
                substituted += 1;
                row.iter_mut().for_each(|v| *v = 1.0 / self.b as f64);
            }
        }
        (rows, substituted)
    }

    /// `p(x, y) = input(x) q(y|x)`.
    fn compose(&self, input: &[f64]) -> Vec<f64> {
        (0..self.a * self.b).map(|c| input[c / self.b] * self.q[c]).collect()
    }

    /// `D_λ(J_{Y|X_I} ‖ J_{Y|X_{T^c}} | J_{X_I})` for a joint `J` over `(x, y)`.
    fn cut_divergence(&self, joint: &[f64], lambda: f64) -> f64 {
        let mut jx = vec![0.0; self.a];
        let mut jtc = vec![0.0; self.ntc * self.b];
        let mut jtc_x = vec![0.0; self.ntc];
        for x in 0..self.a {
            for y in 0..self.b {
                let m = joint[x * self.b + y];
                jx[x] += m;
                jtc[self.xtc[x] * self.b + y] += m;
                jtc_x[self.xtc[x]] += m;
            }
        }
        let terms = (0..self.a * self.b).map(|c| {
            let (x, y) = (c / self.b, c % self.b);
            let m = joint[c];
            let num = if jx[x] > 0.0 { m / jx[x] } else { 0.0 };
            let t = self.xtc[x];
            let den = if jtc_x[t] > 0.0 { jtc[t * self.b + y] / jtc_x[t] } else { 0.0 };
            (m, num, den)
        });
        divergence_terms(terms, lambda)
    }
}

/// The tilted per-letter laws of a code across one cut at one order λ.
#[derive(Clone, Debug, Serialize)]
pub struct TiltedSequence {
    pub lambda: f64,
    pub cut_bitmask: u32,
    pub n: usize,
    /// Per-time tilted joints `s^{(λ)}_k(x_I, y_{T^c})`, direct route.
    pub joints: Vec<JointPmf>,
    /// Per-letter tilted inputs `p^{(λ)}_k(x_I)`, recursive route.
    pub inputs: Vec<JointPmf>,
    /// The code's own per-time joints `p(x_{I,k}, y_{T^c,k})`.
    pub induced_joints: Vec<JointPmf>,
    /// `log2 Σ f_k` for `k = 0..=n`.
    pub log_normalizers: Vec<f64>,
    /// `log2 Σ_x p^{(λ)}_k(x) Σ_y q(y|x)^λ s(y|x_{T^c})^{1−λ}` for each `k`.
    pub log_ratios: Vec<f64>,
    /// Time-shared joint `(1/n) Σ_k p^{(λ)}_k q`.
    pub aggregate: JointPmf,
    /// Largest L1 distance between a direct-route joint and the
    /// recursive-route input composed with the channel.
    pub tilt_l1: f64,
    /// Largest L1 distance between a tilted joint and the induced one
    /// (zero at λ = 1).
    pub induced_l1: f64,
    /// `|Σ f_n / Π_k ratio_k − 1|`.
    pub telescoping_residual: f64,
    /// Largest cell deviation between the time-shared joint and its input
    /// marginal composed with the channel.
    pub aggregate_residual: f64,
    /// Zero-mass histories whose input kernel had to be substituted.
    pub substituted_histories: usize,
    /// Largest change of any tilted law when those substitutions switch
    /// from uniform rows to point masses.
    pub substitution_sensitivity: f64,
    #[serde(skip)]
    pub(crate) layout: Layout,
    /// `s(y | x_{T^c})` per time, direct route, rows `[x_tc][y]`.
    #[serde(skip)]
    pub(crate) channels: Vec<Vec<f64>>,
    /// Tilted channel rows at inputs of zero tilted mass, taken uniform.
    pub substituted_channel_rows: usize,
    /// The induced law over `(x_1, y_1, …, x_n, y_n)`.
    #[serde(skip)]
    induced: Vec<f64>,
}

/// Input kernels `p(x_k | x^{k−1}, y^{k−1})` for every history, one table per
/// time, rows `[h][x]`.
fn input_kernels(
    induced: &[f64],
    lay: &Layout,
    n: usize,
    policy: ZeroMassPolicy,
) -> Result<(Vec<Vec<f64>>, usize), ConverseError> {
    let ab = lay.a * lay.b;
    let mut kernels = Vec::with_capacity(n);
    let mut substituted = 0;
    let mut worst: f64 = 0.0;
    for k in 1..=n {
        let tail = ab.pow((n - k) as u32);
        // p(x^k, y^k) over (AB)^k cells.
        let m: Vec<f64> = induced.chunks(tail).map(|c| c.iter().sum()).collect();
        let histories = ab.pow((k - 1) as u32);
        let mut rows = vec![0.0; histories * lay.a];
        for h in 0..histories {
            for x in 0..lay.a {
                let px: f64 = m[(h * lay.a + x) * lay.b..(h * lay.a + x + 1) * lay.b].iter().sum();
                rows[h * lay.a + x] = px;
                for y in 0..lay.b {
                    worst = worst.max((m[(h * lay.a + x) * lay.b + y] - px * lay.q(x, y)).abs());
                }
            }
            let row = &mut rows[h * lay.a..(h + 1) * lay.a];
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                row.iter_mut().for_each(|v| *v /= sum);
            } else {
                substituted += 1;
                match policy {
                    ZeroMassPolicy::PointMass => {
                        row.iter_mut().for_each(|v| *v = 0.0);
                        row[0] = 1.0;
                    }
                    _ => row.iter_mut().for_each(|v| *v = 1.0 / lay.a as f64),
                }
            }
        }
        kernels.push(rows);
    }
    if worst > super::CHAIN_TOLERANCE {
        return Err(ConverseError::NonMemorylessInput { residual: worst });
    }
    Ok((kernels, substituted))
}

/// One factor of the tilting weight, with `0` whenever `p(x|h) q(y|x) = 0`.
fn tilt_factor(p: f64, q: f64, s: f64, lambda: f64) -> f64 {
    if p * q == 0.0 {
        0.0
    } else {
        p * q.powf(lambda) * s.powf(1.0 - lambda)
    }
}

/// Direct route: per-time tilted inputs by exhaustive summation over
/// histories, and the tilted channels they induce.
fn direct_route(kernels: &[Vec<f64>], lay: &Layout, lambda: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, usize) {
    let ab = lay.a * lay.b;
    let mut inputs: Vec<Vec<f64>> = Vec::new();
    let mut channels: Vec<Vec<f64>> = Vec::new();
    let mut substituted = 0;
    for k in 0..kernels.len() {
        let histories = ab.pow(k as u32);
        let mut num = vec![0.0; lay.a];
        let mut den = 0.0;
        let mut digits = vec![0usize; k];
        for h in 0..histories {
            let mut rest = h;
            for d in (0..k).rev() {
                digits[d] = rest % ab;
                rest /= ab;
            }
            let mut weight = 1.0;
            let mut prefix = 0;
            for (l, &cell) in digits.iter().enumerate() {
                let (x, y) = (cell / lay.b, cell % lay.b);
                let s = channels[l][lay.xtc[x] * lay.b + y];
                weight *= tilt_factor(kernels[l][prefix * lay.a + x], lay.q(x, y), s, lambda);
                if weight == 0.0 {
                    break;
                }
                prefix = prefix * ab + cell;
            }
            if weight == 0.0 {
                continue;
            }
            den += weight;
            for (x, v) in num.iter_mut().enumerate() {
                *v += weight * kernels[k][h * lay.a + x];
            }
        }
        let input: Vec<f64> = num.iter().map(|v| v / den).collect();
        let (ch, sub) = lay.complement_channel(&input);
        substituted += sub;
        channels.push(ch);
        inputs.push(input);
    }
    (inputs, channels, substituted)
}

struct Recursive {
    inputs: Vec<Vec<f64>>,
    log_normalizers: Vec<f64>,
    log_ratios: Vec<f64>,
}

/// Recursive route: `log f_k` carried forward over histories.
fn recursive_route(kernels: &[Vec<f64>], lay: &Layout, lambda: f64) -> Recursive {
    let ab = lay.a * lay.b;
    let mut log_f = vec![0.0f64];
    let mut out = Recursive { inputs: Vec::new(), log_normalizers: vec![0.0], log_ratios: Vec::new() };
    for kernel in kernels {
        let top = log_f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut input = vec![0.0; lay.a];
        let mut total = 0.0;
        for (h, &lf) in log_f.iter().enumerate() {
            let e = (lf - top).exp();
            total += e;
            for (x, v) in input.iter_mut().enumerate() {
                *v += e * kernel[h * lay.a + x];
            }
        }
        input.iter_mut().for_each(|v| *v /= total);
        let (channel, _) = lay.complement_channel(&input);
        let mut next = vec![f64::NEG_INFINITY; log_f.len() * ab];
        for (h, &lf) in log_f.iter().enumerate() {
            if lf == f64::NEG_INFINITY {
                continue;
            }
            for x in 0..lay.a {
                let p = kernel[h * lay.a + x];
                for y in 0..lay.b {
                    let q = lay.q(x, y);
                    if p * q == 0.0 {
                        continue;
                    }
                    let s = channel[lay.xtc[x] * lay.b + y];
                    next[(h * lay.a + x) * lay.b + y] = lf + p.ln() + lambda * q.ln() + (1.0 - lambda) * s.ln();
                }
            }
        }
        let top = next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = next.iter().map(|&v| (v - top).exp()).sum();
        out.log_normalizers.push((top + sum.ln()) / LN_2);
        let ratio: f64 = (0..lay.a * lay.b)
            .map(|c| {
                let (x, y) = (c / lay.b, c % lay.b);
                tilt_factor(input[x], lay.q(x, y), channel[lay.xtc[x] * lay.b + y], lambda)
            })
            .sum();
        out.log_ratios.push(ratio.log2());
        out.inputs.push(input);
        log_f = next;
    }
    out
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Tilts the code-induced law over `(X_I^n, Y_{T^c}^n)` (axes named as in
/// [`crate::code::induced_marginal`]) at order `λ ≥ 1`.
///
/// Input kernels at zero-mass histories are taken uniform; the whole
/// computation is repeated with point-mass substitutes and the largest
/// resulting change is reported.
pub fn build_tilted_sequence(
    spec: &NetworkSpec,
    induced: &JointPmf,
    cut: Cut,
    lambda: f64,
    n: usize,
    budget: usize,
) -> Result<TiltedSequence, ConverseError> {
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(ConverseError::LambdaOutOfRange { lambda, range: "[1, inf)" });
    }
    let lay = Layout::new(spec, cut)?;
    let tc = cut.complement(spec.node_count());
    let cells = ((lay.a * lay.b) as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if cells > budget as u128 {
        return Err(ConverseError::BudgetExhausted { cells, budget });
    }
    let mut order = Vec::new();
    for k in 0..n {
        for i in 0..spec.node_count() {
            order.push(Axis::new(input_axis(i, k), spec.input_sizes()[i]));
        }
        for &j in &tc {
            order.push(Axis::new(output_axis(j, k), spec.output_sizes()[j]));
        }
    }
    let values = induced.values_in_order(&order)?;

    let (kernels, substituted_histories) = input_kernels(&values, &lay, n, ZeroMassPolicy::Uniform)?;
    let (direct, channels, substituted_channel_rows) = direct_route(&kernels, &lay, lambda);
    let rec = recursive_route(&kernels, &lay, lambda);

    let (alt_kernels, _) = input_kernels(&values, &lay, n, ZeroMassPolicy::PointMass)?;
    let (alt_direct, _, _) = direct_route(&alt_kernels, &lay, lambda);
    let alt_rec = recursive_route(&alt_kernels, &lay, lambda);
    let substitution_sensitivity = (0..n)
        .map(|k| l1(&direct[k], &alt_direct[k]).max(l1(&rec.inputs[k], &alt_rec.inputs[k])))
        .fold(0.0, f64::max);

    let mut joint_axes: Vec<Axis> = (0..spec.node_count())
        .map(|i| Axis::new(input_axis_name(i), spec.input_sizes()[i]))
        .collect();
    joint_axes.extend(tc.iter().map(|&j| Axis::new(output_axis_name(j), spec.output_sizes()[j])));
    let input_axes = spec.input_axes();
    let pmf = |axes: &[Axis], v: Vec<f64>| JointPmf::new(axes.to_vec(), v);

    let ab = lay.a * lay.b;
    let mut joints = Vec::with_capacity(n);
    let mut inputs = Vec::with_capacity(n);
    let mut induced_joints = Vec::with_capacity(n);
    let mut tilt_l1: f64 = 0.0;
    let mut induced_l1: f64 = 0.0;
    let mut mixture = vec![0.0; ab];
    for k in 0..n {
        let s_joint = lay.compose(&direct[k]);
        let p_joint = lay.compose(&rec.inputs[k]);
        let stride = ab.pow((n - k - 1) as u32);
        let mut own = vec![0.0; ab];
        for (c, &v) in values.iter().enumerate() {
            own[(c / stride) % ab] += v;
        }
        tilt_l1 = tilt_l1.max(l1(&s_joint, &p_joint));
        induced_l1 = induced_l1.max(l1(&s_joint, &own));
        for (m, v) in mixture.iter_mut().zip(&p_joint) {
            *m += v / n as f64;
        }
        joints.push(pmf(&joint_axes, s_joint)?);
        inputs.push(pmf(&input_axes, rec.inputs[k].clone())?);
        induced_joints.push(pmf(&joint_axes, own)?);
    }
    let mut mixed_input = vec![0.0; lay.a];
    for input in &rec.inputs {
        for (m, v) in mixed_input.iter_mut().zip(input) {
            *m += v / n as f64;
        }
    }
    let aggregate_residual = lay
        .compose(&mixed_input)
        .iter()
        .zip(&mixture)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let telescoped: f64 = rec.log_ratios.iter().sum();
    let telescoping_residual = ((rec.log_normalizers[n] - telescoped) * LN_2).exp_m1().abs();

    Ok(TiltedSequence {
        lambda,
        cut_bitmask: cut.bitmask(),
        n,
        joints,
        inputs,
        induced_joints,
        log_normalizers: rec.log_normalizers,
        log_ratios: rec.log_ratios,
        aggregate: pmf(&joint_axes, mixture)?,
        tilt_l1,
        induced_l1,
        telescoping_residual,
        aggregate_residual,
        substituted_histories,
        substitution_sensitivity,
        layout: lay,
        channels,
        substituted_channel_rows,
        induced: values,
    })
}

impl TiltedSequence {
    /// `s(y_{T^c} | x_{T^c})` at 0-based time `k`, direct route.
    pub(crate) fn channel_row(&self, k: usize, x_tc: usize) -> &[f64] {
        let b = self.layout.b;
        &self.channels[k][x_tc * b..(x_tc + 1) * b]
    }

    /// `(1/(λ−1)) log2 Σ p(x^n, y^n) Π_k (q(y_k|x_k) / s(y_k|x_{T^c,k}))^{λ−1}`.
    pub fn product_form(&self) -> f64 {
        let lay = &self.layout;
        let ab = lay.a * lay.b;
        let n = self.n;
        let terms = self.induced.iter().enumerate().map(|(c, &m)| {
            let (mut num, mut den) = (1.0, 1.0);
            let mut rest = c;
            for k in (0..n).rev() {
                let cell = rest % ab;
                rest /= ab;
                let (x, y) = (cell / lay.b, cell % lay.b);
                num *= lay.q(x, y);
                den *= self.channels[k][lay.xtc[x] * lay.b + y];
            }
            (m, num, den)
        });
        divergence_terms(terms, self.lambda)
    }

    /// `Σ_k D_λ(q ‖ s_k | p^{(λ)}_k)`, with `s_k` from the direct route.
    pub fn channel_sum(&self) -> f64 {
        let lay = &self.layout;
        (0..self.n)
            .map(|k| {
                let input = self.inputs[k].values();
                let terms = (0..lay.a * lay.b).map(|c| {
                    let (x, y) = (c / lay.b, c % lay.b);
                    let q = lay.q(x, y);
                    (input[x] * q, q, self.channels[k][lay.xtc[x] * lay.b + y])
                });
                divergence_terms(terms, self.lambda)
            })
            .sum()
    }

    /// `Σ_k D_λ(p^{(λ)}_{Y|X_I,k} ‖ p^{(λ)}_{Y|X_{T^c},k} | p^{(λ)}_{X_I,k})`.
    pub fn letter_sum(&self) -> f64 {
        let lay = &self.layout;
        self.inputs.iter().map(|input| lay.cut_divergence(&lay.compose(input.values()), self.lambda)).sum()
    }

    /// The same divergence for the time-shared joint.
    pub fn aggregate_divergence(&self) -> f64 {
        self.layout.cut_divergence(self.aggregate.values(), self.lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{generate_random_code, induced_marginal, DecoderKind, DEFAULT_BUDGET_CELLS};
    use crate::fixtures;
    use crate::prob::l1_distance;

    fn tilted(name: &str, rate: f64, n: usize, seed: u64, cut: u32, lambda: f64) -> TiltedSequence {
        let spec = fixtures::load(name).unwrap();
        let rates: Vec<f64> = (0..spec.node_count()).map(|i| if spec.is_source(i) { rate } else { 0.0 }).collect();
        let code = generate_random_code(&spec, &rates, n, seed, DecoderKind::Ml).unwrap();
        let cut = Cut::from_bitmask(cut);
        let mut keep = Vec::new();
        for k in 0..n {
            for i in 0..spec.node_count() {
                keep.push(input_axis(i, k));
            }
            for j in cut.complement(spec.node_count()) {
                keep.push(output_axis(j, k));
            }
        }
        let p = induced_marginal(&spec, &code, &keep, DEFAULT_BUDGET_CELLS).unwrap();
        build_tilted_sequence(&spec, &p, cut, lambda, n, DEFAULT_BUDGET_CELLS).unwrap()
    }

    #[test]
    fn order_one_reproduces_the_code() {
        let t = tilted("bsc2", 1.0, 2, 7, 0b01, 1.0);
        assert!(t.induced_l1 <= 1e-12, "{}", t.induced_l1);
        for (a, b) in t.joints.iter().zip(&t.induced_joints) {
            assert!(l1_distance(a, b).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn first_slot_is_untilted() {
        let t = tilted("bsc2", 1.0, 1, 3, 0b01, 2.0);
        assert!(l1_distance(&t.joints[0], &t.induced_joints[0]).unwrap() <= 1e-12);
    }

    #[test]
    fn routes_agree_and_telescope() {
        for (name, cut) in [("bsc2", 0b01), ("erasure_relay3", 0b001), ("erasure_relay3", 0b011)] {
            for lambda in [1.1, 2.0, 4.0] {
                let t = tilted(name, 0.5, 2, 11, cut, lambda);
                assert!(t.tilt_l1 <= 1e-9, "{name} {lambda}: {}", t.tilt_l1);
                assert!(t.telescoping_residual <= 1e-9);
                assert!(t.aggregate_residual <= 1e-12);
                assert!(t.substitution_sensitivity <= 1e-12);
            }
        }
    }

    #[test]
    fn second_slot_is_genuinely_tilted() {
        // Some code has a second input that depends on the first, so the
        // tilt must move the second-slot law away from the induced one.
        let moved = (0..16)
            .map(|seed| {
                let t = tilted("bsc2", 1.0, 2, seed, 0b01, 4.0);
                assert!((t.product_form() - t.channel_sum()).abs() <= 1e-9);
                assert!((t.channel_sum() - t.letter_sum()).abs() <= 1e-9);
                l1_distance(&t.joints[1], &t.induced_joints[1]).unwrap()
            })
            .fold(0.0, f64::max);
        assert!(moved > 1e-3, "{moved}");
    }
}
