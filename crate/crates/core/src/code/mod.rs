//! Block codes on a network.
//!
//! A code fixes a blocklength `n`, one message set per node (singletons at
//! non-sources), per-node per-time encoders and a decoding rule for every
//! (source, destination) pair. Messages are uniform and independent.
//!
//! Node indices in code tables are 0-based.

mod enumerate;
mod experiment;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{NetworkError, NetworkSpec};
use crate::prob::ProbError;
use crate::rng::{stream, Purpose};

pub use enumerate::{
    exact_error_probability, factorization_residual, induced_distribution, induced_marginal, message_axis,
    estimate_axis, input_axis, output_axis, monte_carlo_error, trajectory_count, ErrorEstimate,
};
pub(crate) use enumerate::Decisions;
pub use experiment::{phase_transition_experiment, ExperimentCell, ExperimentConfig, Method};

/// Largest message set, in bits, a code may carry per node.
pub const MAX_MESSAGE_BITS: u32 = 24;
/// Default tensor and enumeration budget in cells.
pub const DEFAULT_BUDGET_CELLS: usize = 1_000_000;
/// Relative tolerance under which two likelihoods count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("rate vector has {got} entries for {expected} nodes")]
    RateLength { expected: usize, got: usize },
    #[error("rate {rate} at node {node} is not a finite nonnegative number")]
    InvalidRate { node: usize, rate: f64 },
    #[error("node {node} is not a source but has rate {rate}")]
    RateAtNonSource { node: usize, rate: f64 },
    #[error("node {node} needs {bits:.3} message bits; the limit is {MAX_MESSAGE_BITS}")]
    TooManyMessages { node: usize, bits: f64 },
    #[error("blocklength must be positive")]
    ZeroBlocklength,
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("{cells} cells exceed the budget of {budget}")]
    BudgetExhausted { cells: u128, budget: usize },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// `⌈2^{nR}⌉`, with `nR` within 1e-9 of an integer treated as that integer
/// so that, e.g., `n = 12, R = 0.25` gives exactly 8 messages.
pub fn message_size(n: usize, rate: f64, node: usize) -> Result<usize, CodeError> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(CodeError::InvalidRate { node, rate });
    }
    let bits = n as f64 * rate;
    let nearest = bits.round();
    let exact = (bits - nearest).abs() <= 1e-9 * nearest.max(1.0);
    let bits_needed = if exact { nearest } else { bits };
    if bits_needed > MAX_MESSAGE_BITS as f64 {
        return Err(CodeError::TooManyMessages { node, bits });
    }
    if exact {
        Ok(1usize << nearest as u32)
    } else {
        Ok(bits.exp2().ceil() as usize)
    }
}

/// Message set sizes for a rate tuple; non-sources must have rate 0.
pub fn message_sizes(spec: &NetworkSpec, n: usize, rates: &[f64]) -> Result<Vec<usize>, CodeError> {
    if n == 0 {
        return Err(CodeError::ZeroBlocklength);
    }
    if rates.len() != spec.node_count() {
        return Err(CodeError::RateLength { expected: spec.node_count(), got: rates.len() });
    }
    rates
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            if r != 0.0 && !spec.is_source(i) {
                return Err(CodeError::RateAtNonSource { node: i, rate: r });
            }
            message_size(n, r, i)
        })
        .collect()
}

/// Encoder of one node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Encoder {
    /// `x_{i,k} = table[k][w_i]`.
    Blind { table: Vec<Vec<usize>> },
    /// `x_{i,k} = table[k][w_i·|Y_i|^k + y_i^k]`, where the past outputs
    /// `y_{i,1..k}` form a mixed-radix number with `y_{i,1}` most
    /// significant (`k` is 0-based, so the first table has `|W_i|` entries).
    Feedback { table: Vec<Vec<usize>> },
}

impl Encoder {
    /// Input symbol at 0-based time `k`, given the node's past outputs.
    pub fn symbol(&self, k: usize, w: usize, past: &[usize], output_size: usize) -> usize {
        match self {
            Encoder::Blind { table } => table[k][w],
            Encoder::Feedback { table } => {
                let idx = past[..k].iter().fold(w, |acc, &y| acc * output_size + y);
                table[k][idx]
            }
        }
    }

    fn uses_feedback(&self) -> bool {
        matches!(self, Encoder::Feedback { .. })
    }
}

/// What a maximum-likelihood decoder does when several message tuples
/// share the largest likelihood.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    /// The smallest joint message index wins.
    SmallestIndex,
    /// The decoder outputs the failure symbol `|W_i|`.
    Declare,
}

/// Table `ψ_{i,j}: W_j × Y_j^n → W_i ∪ {failure}` for one pair.
///
/// Entries are indexed by `w_j·|Y_j|^n + y_j^n` (mixed radix, first time
/// most significant). The value `|W_i|` is the failure symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderTable {
    pub source: usize,
    pub destination: usize,
    pub values: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decoder {
    /// Every destination jointly decodes all source messages by maximizing
    /// the exact likelihood of what it observes, `p(w_j, y_j^n | w_S)`.
    MaximumLikelihood { ties: TieRule },
    Tables { tables: Vec<DecoderTable> },
}

/// Which decoder [`generate_random_code`] attaches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecoderKind {
    Ml,
    /// ML decisions written out as explicit tables.
    Table,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Code {
    pub n: usize,
    pub rates: Vec<f64>,
    pub message_sizes: Vec<usize>,
    pub encoders: Vec<Encoder>,
    pub decoder: Decoder,
}

impl Code {
    /// Size of the alphabet of `Ŵ_{i,j}`: `|W_i|`, plus one when the decoder
    /// can output the failure symbol.
    pub fn estimate_size(&self, source: usize) -> usize {
        let w = self.message_sizes[source];
        match &self.decoder {
            Decoder::MaximumLikelihood { ties: TieRule::SmallestIndex } => w,
            Decoder::MaximumLikelihood { ties: TieRule::Declare } => w + 1,
            Decoder::Tables { tables } => {
                if tables.iter().any(|t| t.source == source && t.values.contains(&w)) {
                    w + 1
                } else {
                    w
                }
            }
        }
    }

    /// `(source, destination)` pairs that carry a decoder; a node never
    /// decodes its own message.
    pub fn decoded_pairs(spec: &NetworkSpec) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for &i in spec.sources() {
            for &j in spec.destinations() {
                if i != j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn uses_feedback(&self) -> bool {
        self.encoders.iter().any(Encoder::uses_feedback)
    }

    pub fn joint_message_count(&self) -> usize {
        self.message_sizes.iter().product()
    }

    /// Checks table shapes and symbol ranges against `spec`.
    pub fn validate(&self, spec: &NetworkSpec) -> Result<(), CodeError> {
        let bad = |m: String| Err(CodeError::InvalidCode(m));
        let nodes = spec.node_count();
        if self.n == 0 {
            return Err(CodeError::ZeroBlocklength);
        }
        let expected = message_sizes(spec, self.n, &self.rates)?;
        if expected != self.message_sizes {
            return bad(format!("message sizes {:?} do not match rates (expected {expected:?})", self.message_sizes));
        }
        if self.encoders.len() != nodes {
            return bad(format!("{} encoders for {nodes} nodes", self.encoders.len()));
        }
        for (i, enc) in self.encoders.iter().enumerate() {
            let (table, feedback) = match enc {
                Encoder::Blind { table } => (table, false),
                Encoder::Feedback { table } => (table, true),
            };
            if table.len() != self.n {
                return bad(format!("node {i}: {} encoder tables for blocklength {}", table.len(), self.n));
            }
            for (k, t) in table.iter().enumerate() {
                let want = if feedback {
                    (spec.output_sizes()[i] as u128).checked_pow(k as u32).map(|p| p * self.message_sizes[i] as u128)
                } else {
                    Some(self.message_sizes[i] as u128)
                };
                if want != Some(t.len() as u128) {
                    return bad(format!("node {i}, time {}: table has {} entries", k + 1, t.len()));
                }
                if let Some(&x) = t.iter().find(|&&x| x >= spec.input_sizes()[i]) {
                    return bad(format!("node {i}, time {}: symbol {x} outside input alphabet", k + 1));
                }
            }
        }
        if let Decoder::Tables { tables } = &self.decoder {
            for (i, j) in Self::decoded_pairs(spec) {
                let Some(t) = tables.iter().find(|t| t.source == i && t.destination == j) else {
                    return bad(format!("no decoder table for source {i} at destination {j}"));
                };
                let want = (spec.output_sizes()[j] as u128)
                    .checked_pow(self.n as u32)
                    .map(|p| p * self.message_sizes[j] as u128);
                if want != Some(t.values.len() as u128) {
                    return bad(format!("decoder ({i},{j}) has {} entries", t.values.len()));
                }
                if t.values.iter().any(|&v| v > self.message_sizes[i]) {
                    return bad(format!("decoder ({i},{j}) outputs a value above the failure symbol"));
                }
            }
        }
        Ok(())
    }

    /// Serializes the code tables for replay.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("codes serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, CodeError> {
        serde_json::from_str(text).map_err(|e| CodeError::InvalidCode(e.to_string()))
    }
}

/// Code with encoder tables drawn i.i.d. uniform over each node's input
/// alphabet (feedback-blind). Node `i` at time `k` draws from its own
/// stream, so tables do not depend on the order of generation.
pub fn generate_random_code(
    spec: &NetworkSpec,
    rates: &[f64],
    n: usize,
    seed: u64,
    decoder: DecoderKind,
) -> Result<Code, CodeError> {
    let sizes = message_sizes(spec, n, rates)?;
    let encoders = (0..spec.node_count())
        .map(|i| {
            let table = (0..n)
                .map(|k| {
                    let mut rng = stream(seed, Purpose::Encoder, i as u64, k as u64);
                    (0..sizes[i]).map(|_| rng.random_range(0..spec.input_sizes()[i])).collect()
                })
                .collect();
            Encoder::Blind { table }
        })
        .collect();
    let code = Code {
        n,
        rates: rates.to_vec(),
        message_sizes: sizes,
        encoders,
        decoder: Decoder::MaximumLikelihood { ties: TieRule::SmallestIndex },
    };
    match decoder {
        DecoderKind::Ml => Ok(code),
        DecoderKind::Table => tabulate_decoder(spec, &code, DEFAULT_BUDGET_CELLS),
    }
}

/// Replaces an ML decoder by explicit tables with the same decisions.
pub fn tabulate_decoder(spec: &NetworkSpec, code: &Code, budget: usize) -> Result<Code, CodeError> {
    let decisions = enumerate::Decisions::build(spec, code, budget)?;
    let mut tables = Vec::new();
    for (i, j) in Code::decoded_pairs(spec) {
        let ny = spec.output_sizes()[j];
        let len = (ny as u128).checked_pow(code.n as u32).map(|p| p * code.message_sizes[j] as u128);
        let len = match len {
            Some(l) if l <= budget as u128 => l as usize,
            other => {
                return Err(CodeError::BudgetExhausted { cells: other.unwrap_or(u128::MAX), budget });
            }
        };
        let mut values = Vec::with_capacity(len);
        let mut ys = vec![0; code.n];
        for idx in 0..len {
            let mut rest = idx;
            for k in (0..code.n).rev() {
                ys[k] = rest % ny;
                rest /= ny;
            }
            values.push(decisions.estimate(spec, code, j, rest, &ys, i));
        }
        tables.push(DecoderTable { source: i, destination: j, values });
    }
    Ok(Code { decoder: Decoder::Tables { tables }, ..code.clone() })
}

/// Repetition code for a single source: the message is `n / copies` bits,
/// bit `b` (most significant first) is sent on `copies` consecutive slots as
/// input symbol 0 or 1, other nodes send symbol 0. ML decoding declares a
/// failure on ties, so a bit whose copies are all lost counts as an error.
pub fn repetition_code(spec: &NetworkSpec, n: usize, copies: usize) -> Result<Code, CodeError> {
    let bad = |m: &str| Err(CodeError::InvalidCode(m.to_string()));
    if copies == 0 || n % copies != 0 {
        return bad("blocklength must be a multiple of the repetition count");
    }
    let [source] = spec.sources() else {
        return bad("repetition codes need exactly one source");
    };
    let source = *source;
    if spec.input_sizes()[source] < 2 {
        return bad("source input alphabet must have at least two symbols");
    }
    let bits = n / copies;
    if bits as u32 > MAX_MESSAGE_BITS {
        return Err(CodeError::TooManyMessages { node: source, bits: bits as f64 });
    }
    let mut rates = vec![0.0; spec.node_count()];
    rates[source] = bits as f64 / n as f64;
    let sizes = message_sizes(spec, n, &rates)?;
    let encoders = (0..spec.node_count())
        .map(|i| {
            let table = (0..n)
                .map(|k| {
                    (0..sizes[i])
                        .map(|w| if i == source { (w >> (bits - 1 - k / copies)) & 1 } else { 0 })
                        .collect()
                })
                .collect();
            Encoder::Blind { table }
        })
        .collect();
    Ok(Code {
        n,
        rates,
        message_sizes: sizes,
        encoders,
        decoder: Decoder::MaximumLikelihood { ties: TieRule::Declare },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn message_sizes_round_exact_products() {
        assert_eq!(message_size(12, 0.25, 0).unwrap(), 8);
        assert_eq!(message_size(4, 0.75, 0).unwrap(), 8);
        assert_eq!(message_size(3, 0.1, 0).unwrap(), 2);
        assert_eq!(message_size(5, 0.0, 0).unwrap(), 1);
        assert_eq!(message_size(10, 0.1 + 0.2 - 0.2, 0).unwrap(), 2);
        assert!(matches!(message_size(100, 1.0, 0), Err(CodeError::TooManyMessages { .. })));
        assert!(matches!(message_size(1, -0.1, 0), Err(CodeError::InvalidRate { .. })));
    }

    #[test]
    fn non_sources_cannot_carry_rate() {
        let spec = fixtures::load("bsc2").unwrap();
        assert!(matches!(message_sizes(&spec, 2, &[0.5, 0.5]), Err(CodeError::RateAtNonSource { node: 1, .. })));
    }

    #[test]
    fn random_codes_replay_and_validate() {
        let spec = fixtures::load("line3").unwrap();
        let a = generate_random_code(&spec, &[0.5, 0.0, 0.0], 4, 3, DecoderKind::Ml).unwrap();
        let b = generate_random_code(&spec, &[0.5, 0.0, 0.0], 4, 3, DecoderKind::Ml).unwrap();
        assert_eq!(a, b);
        a.validate(&spec).unwrap();
        let c = generate_random_code(&spec, &[0.5, 0.0, 0.0], 4, 4, DecoderKind::Ml).unwrap();
        assert_ne!(a.encoders, c.encoders);
        assert_eq!(Code::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn repetition_code_layout() {
        let spec = fixtures::load("bec2").unwrap();
        let code = repetition_code(&spec, 12, 4).unwrap();
        code.validate(&spec).unwrap();
        assert_eq!(code.message_sizes, vec![8, 1]);
        let Encoder::Blind { table } = &code.encoders[0] else { panic!() };
        // w = 5 = 101b.
        let sent: Vec<usize> = (0..12).map(|k| table[k][5]).collect();
        assert_eq!(sent, [1, 1, 1, 1, 0, 0, 0, 0, 1, 1, 1, 1]);
    }

    #[test]
    fn table_decoder_matches_ml_decisions() {
        let spec = fixtures::load("bsc2").unwrap();
        let ml = generate_random_code(&spec, &[0.5, 0.0], 4, 1, DecoderKind::Ml).unwrap();
        let tab = generate_random_code(&spec, &[0.5, 0.0], 4, 1, DecoderKind::Table).unwrap();
        tab.validate(&spec).unwrap();
        let a = exact_error_probability(&spec, &ml, DEFAULT_BUDGET_CELLS).unwrap();
        let b = exact_error_probability(&spec, &tab, DEFAULT_BUDGET_CELLS).unwrap();
        assert!((a - b).abs() < 1e-15, "{a} vs {b}");
    }
}
