//! The full chain from an error-probability bound down to a single-letter
//! Rényi divergence, evaluated term by term on one code.

use serde::{Serialize, Serializer};

use super::simulate::Names;
use super::{
    build_simulating_distribution, conditional, factor_renyi, fano_parts, verify_lemma1, ConverseError, SimulationReport,
    CHAIN_TOLERANCE,
};
use crate::code::{estimate_axis, Code};
use crate::network::{Cut, NetworkSpec};

/// How a chain step relates to the step before it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

impl Serialize for Relation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainStep {
    pub name: &'static str,
    /// Value in bits.
    #[serde(serialize_with = "crate::nonfinite::float")]
    pub value: f64,
    /// Relation to the previous step; ignored for the first.
    pub relation: Relation,
}

/// Every term of the converse chain for one code, cut, destination and order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub cut_bitmask: u32,
    /// 1-based label of the destination.
    pub d: usize,
    pub lambda: f64,
    pub n: usize,
    pub eps_bar: f64,
    /// `Pr{Ŵ_{T,d} ≠ W_T}` under the code.
    pub alpha: f64,
    pub rate_bound_bits: f64,
    #[serde(serialize_with = "crate::nonfinite::float")]
    pub lhs_bits: f64,
    pub chain: Vec<ChainStep>,
    /// `next − prev` for `≤` steps and `−|next − prev|` for `=` steps.
    #[serde(serialize_with = "crate::nonfinite::floats")]
    pub slacks: Vec<f64>,
    pub simulation: SimulationReport,
    pub passed: bool,
}

fn slack(prev: f64, next: f64, relation: Relation) -> f64 {
    if prev == next {
        return 0.0;
    }
    match relation {
        Relation::Le => next - prev,
        Relation::Eq => -(next - prev).abs(),
    }
}

fn union(parts: &[&[String]]) -> Vec<String> {
    parts.iter().flat_map(|p| p.iter().cloned()).collect()
}

/// Evaluates the converse chain for `code` across `cut`, seen from the
/// destination `destination ∉ cut` (0-based), at order `λ > 1` with the
/// error bound `ε̄ ∈ [0, 1)`.
///
/// The chain passes when every `≤` step holds and every `=` step agrees to
/// within [`CHAIN_TOLERANCE`]. A code whose error towards `destination`
/// exceeds `ε̄` fails the first step.
pub fn single_letter_certificate(
    spec: &NetworkSpec,
    code: &Code,
    cut: Cut,
    destination: usize,
    lambda: f64,
    eps_bar: f64,
    budget: usize,
) -> Result<Certificate, ConverseError> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(ConverseError::LambdaOutOfRange { lambda, range: "(1, inf)" });
    }
    if !(0.0..1.0).contains(&eps_bar) {
        return Err(ConverseError::InvalidEpsilon(eps_bar));
    }
    spec.check_cut(cut)?;
    if destination >= spec.node_count() || !spec.is_destination(destination) || cut.contains(destination) {
        return Err(ConverseError::InvalidDestination { node: destination + 1 });
    }
    code.validate(spec)?;

    let sim = build_simulating_distribution(spec, code, cut, lambda, budget)?;
    let simulation = verify_lemma1(spec, code, &sim)?;
    let names = Names::new(spec, code, cut);
    let (p, s) = (sim.p.factor(), sim.s.factor());
    let n = code.n;
    let all = names.all_nodes();

    let t_sources: Vec<usize> = names.t.iter().copied().filter(|&i| spec.is_source(i)).collect();
    let w_t = names.messages(&t_sources);
    let w_tc = names.messages(&names.tc);
    let w_all = names.all_messages();
    let to_d: Vec<String> = t_sources.iter().map(|&i| estimate_axis(i, destination)).collect();
    let crossing = Names::estimates(&names.crossing_pairs());
    let y_tc = names.outputs(&names.tc, 0..n);
    let x_all = names.inputs(&all, 0..n);
    let x_tc = names.inputs(&names.tc, 0..n);

    let rate_bits: f64 = t_sources.iter().map(|&i| (code.message_sizes[i] as f64).log2()).sum();
    let weight = lambda / (lambda - 1.0) / std::f64::consts::LN_2;
    let rate_bound = rate_bits + weight * (-eps_bar).ln_1p();

    let (alpha, fano_rhs, lhs) = if t_sources.is_empty() {
        (0.0, 0.0, 0.0)
    } else {
        let out = fano_parts(p, &w_t, &to_d, &s.marginal(&to_d)?, lambda)?;
        (out.alpha, out.rhs, out.lhs)
    };

    let p_wi = p.marginal(&w_all)?;
    let p_wt = p.marginal(&w_t)?;

    let msg_est = union(&[&w_all, &crossing]);
    let p_msg_est = p.marginal(&msg_est)?;
    let dpi_messages = factor_renyi(&p_msg_est, &p_wt.product(&s.marginal(&union(&[&w_tc, &crossing]))?)?, lambda)?;
    let s_est_given_wtc = conditional(s, &crossing, &w_tc)?;
    let property_i = factor_renyi(&p_msg_est, &p_wi.product(&s_est_given_wtc)?, lambda)?;

    let msg_est_out = union(&[&w_all, &crossing, &y_tc]);
    let p_meo = p.marginal(&msg_est_out)?;
    let s_est_out = conditional(s, &union(&[&crossing, &y_tc]), &w_tc)?;
    let dpi_outputs = factor_renyi(&p_meo, &p_wi.product(&s_est_out)?, lambda)?;
    let p_est_given = conditional(p, &crossing, &union(&[&w_tc, &y_tc]))?;
    let s_out = conditional(s, &y_tc, &w_tc)?;
    let property_ii = factor_renyi(&p_meo, &p_wi.product(&s_out)?.product(&p_est_given)?, lambda)?;

    let numerator = p.marginal(&union(&[&msg_est_out, &x_all]))?;
    let mut den = p_wi.product(&p_est_given)?.product(&conditional(s, &union(&[&x_tc, &y_tc]), &w_tc)?)?;
    for k in 0..n {
        let x_t_k = names.inputs(&names.t, k..k + 1);
        if x_t_k.is_empty() {
            continue;
        }
        let given = union(&[
            &w_all,
            &names.inputs(&all, 0..k),
            &names.outputs(&names.tc, 0..k),
            &names.inputs(&names.tc, k..k + 1),
        ]);
        den = den.product(&conditional(p, &x_t_k, &given)?)?;
    }
    let dpi_inputs = factor_renyi(&numerator, &den, lambda)?;

    let tilted = &sim.tilted;
    let steps = [
        ("rate_bound", rate_bound, Relation::Le),
        ("fano_rhs", fano_rhs, Relation::Le),
        ("lhs", lhs, Relation::Le),
        ("dpi_messages", dpi_messages, Relation::Le),
        ("property_i", property_i, Relation::Eq),
        ("dpi_outputs", dpi_outputs, Relation::Le),
        ("property_ii", property_ii, Relation::Eq),
        ("dpi_inputs", dpi_inputs, Relation::Le),
        ("product_form", tilted.product_form(), Relation::Eq),
        ("channel_sum", tilted.channel_sum(), Relation::Eq),
        ("letter_sum", tilted.letter_sum(), Relation::Eq),
        ("n_times_aggregate", n as f64 * tilted.aggregate_divergence(), Relation::Le),
    ];
    let chain: Vec<ChainStep> =
        steps.iter().map(|&(name, value, relation)| ChainStep { name, value, relation }).collect();
    let slacks: Vec<f64> = chain.windows(2).map(|w| slack(w[0].value, w[1].value, w[1].relation)).collect();
    let passed = slacks.iter().all(|&s| s >= -CHAIN_TOLERANCE) && simulation.passed;
    Ok(Certificate {
        cut_bitmask: cut.bitmask(),
        d: destination + 1,
        lambda,
        n,
        eps_bar,
        alpha,
        rate_bound_bits: rate_bound,
        lhs_bits: lhs,
        chain,
        slacks,
        simulation,
        passed,
    })
}
