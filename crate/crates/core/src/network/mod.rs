//! Network specifications: nodes, multicast demand, and the memoryless
//! channel `q(y_1..y_N | x_1..x_N)`.
//!
//! Nodes are 0-based throughout the library API (node `i` carries axes
//! `X{i+1}` and `Y{i+1}`); the JSON schema and the CLI use 1-based ids.
//! Joint input and output symbols are mixed-radix integers with node 1 as
//! the most significant digit.

pub mod schema;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::prob::{Axis, CondKernel, Factor, JointPmf, ProbError, NORMALIZATION_TOL};

/// Largest supported node count (axis names must sort in node order).
pub const MAX_NODES: usize = 9;

/// Problems found by [`validate_network`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    NoNodes,
    TooManyNodes { nodes: usize },
    MissingSources,
    MissingDestinations,
    NodeOutOfRange { role: &'static str, node: usize },
    AlphabetCount { which: &'static str, expected: usize, got: usize },
    EmptyAlphabet { which: &'static str, node: usize },
    ShapeMismatch { expected: usize, got: usize },
    NegativeProbability { index: usize, value: f64 },
    NotNormalized { row: usize, sum: f64 },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::NoNodes => write!(f, "network has no nodes"),
            Diagnostic::TooManyNodes { nodes } => {
                write!(f, "{nodes} nodes exceeds the supported maximum of {MAX_NODES}")
            }
            Diagnostic::MissingSources => write!(f, "source set is empty"),
            Diagnostic::MissingDestinations => write!(f, "destination set is empty"),
            Diagnostic::NodeOutOfRange { role, node } => write!(f, "{role} node {} out of range", node + 1),
            Diagnostic::AlphabetCount { which, expected, got } => {
                write!(f, "expected {expected} {which} alphabet sizes, got {got}")
            }
            Diagnostic::EmptyAlphabet { which, node } => {
                write!(f, "{which} alphabet of node {} is empty", node + 1)
            }
            Diagnostic::ShapeMismatch { expected, got } => {
                write!(f, "channel has {got} entries, expected {expected}")
            }
            Diagnostic::NegativeProbability { index, value } => {
                write!(f, "channel entry {index} is {value}")
            }
            Diagnostic::NotNormalized { row, sum } => write!(f, "channel row {row} sums to {sum}"),
        }
    }
}

/// Errors raised by network construction and analysis.
#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("invalid network: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("cut {bitmask:#b} refers to nodes outside a {nodes}-node network")]
    InvalidCut { bitmask: u32, nodes: usize },
    #[error("link alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("invalid probability {value} on edge {from}->{to}")]
    InvalidProbability { from: usize, to: usize, value: f64 },
    #[error("feedback version requires exactly one destination, found {0}")]
    MultipleDestinations(usize),
    #[error("input distribution is not a product over nodes (residual {residual:e})")]
    NotProductForm { residual: f64 },
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// A node subset `T`, stored as a bitmask (bit `i` is node `i`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Cut(u32);

impl Cut {
    pub fn from_bitmask(bits: u32) -> Self {
        Cut(bits)
    }

    pub fn from_nodes(nodes: &[usize]) -> Self {
        Cut(nodes.iter().fold(0, |m, &i| m | (1 << i)))
    }

    pub fn bitmask(self) -> u32 {
        self.0
    }

    pub fn contains(self, node: usize) -> bool {
        self.0 >> node & 1 == 1
    }

    /// Members of `T` among `0..n`.
    pub fn nodes(self, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| self.contains(i)).collect()
    }

    /// Members of `T^c` among `0..n`.
    pub fn complement(self, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| !self.contains(i)).collect()
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let members: Vec<String> = (0..32).filter(|&i| self.contains(i)).map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", members.join(","))
    }
}

/// One point-to-point link of an independent-DMC network.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub input_size: usize,
    pub output_size: usize,
    /// Row-major `q(y|x)`, `input_size × output_size`.
    pub probabilities: Vec<f64>,
}

impl Link {
    /// The link kernel with axes `X` and `Y`.
    pub fn kernel(&self) -> Result<CondKernel, ProbError> {
        CondKernel::new(
            vec![Axis::new("X", self.input_size)],
            vec![Axis::new("Y", self.output_size)],
            self.probabilities.clone(),
        )
    }
}

/// Per-link kernels of a network whose channel is a product of independent
/// links. Pairs without an entry are zero-capacity (singleton alphabets).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkChannelTable {
    pub node_count: usize,
    pub links: Vec<Link>,
}

impl LinkChannelTable {
    pub fn link(&self, from: usize, to: usize) -> Option<&Link> {
        self.links.iter().find(|l| l.from == from && l.to == to)
    }
}

/// Unvalidated network description.
#[derive(Clone, Debug, PartialEq)]
pub struct RawNetwork {
    pub node_count: usize,
    pub sources: Vec<usize>,
    pub destinations: Vec<usize>,
    pub input_sizes: Vec<usize>,
    pub output_sizes: Vec<usize>,
    /// Row-major `q(y_I | x_I)` over mixed-radix joint symbols.
    pub channel: Vec<f64>,
}

/// Checks every structural and stochastic invariant; empty iff valid.
pub fn validate_network(raw: &RawNetwork) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let n = raw.node_count;
    if n == 0 {
        out.push(Diagnostic::NoNodes);
    }
    if n > MAX_NODES {
        out.push(Diagnostic::TooManyNodes { nodes: n });
    }
    if raw.sources.is_empty() {
        out.push(Diagnostic::MissingSources);
    }
    if raw.destinations.is_empty() {
        out.push(Diagnostic::MissingDestinations);
    }
    for &node in &raw.sources {
        if node >= n {
            out.push(Diagnostic::NodeOutOfRange { role: "source", node });
        }
    }
    for &node in &raw.destinations {
        if node >= n {
            out.push(Diagnostic::NodeOutOfRange { role: "destination", node });
        }
    }
    for (which, sizes) in [("input", &raw.input_sizes), ("output", &raw.output_sizes)] {
        if sizes.len() != n {
            out.push(Diagnostic::AlphabetCount { which, expected: n, got: sizes.len() });
        }
        for (node, &s) in sizes.iter().enumerate() {
            if s == 0 {
                out.push(Diagnostic::EmptyAlphabet { which, node });
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    let nx: usize = raw.input_sizes.iter().product();
    let ny: usize = raw.output_sizes.iter().product();
    if raw.channel.len() != nx * ny {
        out.push(Diagnostic::ShapeMismatch { expected: nx * ny, got: raw.channel.len() });
        return out;
    }
    for (index, &value) in raw.channel.iter().enumerate() {
        if !(value >= 0.0) || !value.is_finite() {
            out.push(Diagnostic::NegativeProbability { index, value });
        }
    }
    for (row, chunk) in raw.channel.chunks(ny).enumerate() {
        let sum: f64 = chunk.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            out.push(Diagnostic::NotNormalized { row, sum });
        }
    }
    out
}

/// A validated network.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec {
    node_count: usize,
    sources: Vec<usize>,
    destinations: Vec<usize>,
    input_sizes: Vec<usize>,
    output_sizes: Vec<usize>,
    channel: Vec<f64>,
    links: Option<LinkChannelTable>,
}

pub fn input_axis_name(node: usize) -> String {
    format!("X{}", node + 1)
}

pub fn output_axis_name(node: usize) -> String {
    format!("Y{}", node + 1)
}

fn mixed_radix_digits(mut idx: usize, sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for d in (0..sizes.len()).rev() {
        out[d] = idx % sizes[d];
        idx /= sizes[d];
    }
    out
}

fn mixed_radix_index(digits: &[usize], sizes: &[usize]) -> usize {
    digits.iter().zip(sizes).fold(0, |acc, (&d, &s)| acc * s + d)
}

impl NetworkSpec {
    pub fn new(raw: RawNetwork) -> Result<Self, NetworkError> {
        let diags = validate_network(&raw);
        if !diags.is_empty() {
            return Err(NetworkError::Invalid(diags));
        }
        let mut sources = raw.sources;
        sources.sort_unstable();
        sources.dedup();
        let mut destinations = raw.destinations;
        destinations.sort_unstable();
        destinations.dedup();
        Ok(Self {
            node_count: raw.node_count,
            sources,
            destinations,
            input_sizes: raw.input_sizes,
            output_sizes: raw.output_sizes,
            channel: raw.channel,
            links: None,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn destinations(&self) -> &[usize] {
        &self.destinations
    }

    pub fn is_source(&self, node: usize) -> bool {
        self.sources.contains(&node)
    }

    pub fn is_destination(&self, node: usize) -> bool {
        self.destinations.contains(&node)
    }

    pub fn input_sizes(&self) -> &[usize] {
        &self.input_sizes
    }

    pub fn output_sizes(&self) -> &[usize] {
        &self.output_sizes
    }

    pub fn joint_input_size(&self) -> usize {
        self.input_sizes.iter().product()
    }

    pub fn joint_output_size(&self) -> usize {
        self.output_sizes.iter().product()
    }

    /// Row `q(· | x_I)` for a joint input symbol.
    pub fn channel_row(&self, x: usize) -> &[f64] {
        let w = self.joint_output_size();
        &self.channel[x * w..(x + 1) * w]
    }

    /// Flat `q(y_I | x_I)` rows.
    pub fn channel_rows(&self) -> &[f64] {
        &self.channel
    }

    /// Per-link kernels when the network was built from independent links.
    pub fn links(&self) -> Option<&LinkChannelTable> {
        self.links.as_ref()
    }

    pub fn input_digits(&self, x: usize) -> Vec<usize> {
        mixed_radix_digits(x, &self.input_sizes)
    }

    pub fn output_digits(&self, y: usize) -> Vec<usize> {
        mixed_radix_digits(y, &self.output_sizes)
    }

    pub fn input_index(&self, digits: &[usize]) -> usize {
        mixed_radix_index(digits, &self.input_sizes)
    }

    pub fn output_index(&self, digits: &[usize]) -> usize {
        mixed_radix_index(digits, &self.output_sizes)
    }

    pub fn input_axes(&self) -> Vec<Axis> {
        (0..self.node_count).map(|i| Axis::new(input_axis_name(i), self.input_sizes[i])).collect()
    }

    pub fn output_axes(&self) -> Vec<Axis> {
        (0..self.node_count).map(|i| Axis::new(output_axis_name(i), self.output_sizes[i])).collect()
    }

    /// The channel as a kernel from `X1..XN` to `Y1..YN`.
    pub fn channel(&self) -> CondKernel {
        CondKernel::new(self.input_axes(), self.output_axes(), self.channel.clone())
            .expect("validated channel")
    }

    pub fn check_cut(&self, cut: Cut) -> Result<(), NetworkError> {
        if cut.bitmask() >> self.node_count != 0 {
            return Err(NetworkError::InvalidCut { bitmask: cut.bitmask(), nodes: self.node_count });
        }
        Ok(())
    }

    /// Mixed-radix index of the sub-tuple of `digits` at `nodes` using `sizes`.
    pub(crate) fn sub_index(digits: &[usize], sizes: &[usize], nodes: &[usize]) -> usize {
        nodes.iter().fold(0, |acc, &i| acc * sizes[i] + digits[i])
    }

    /// For each joint input symbol, its `(x_T, x_{T^c})` sub-indices.
    pub fn input_split(&self, cut: Cut) -> Vec<(usize, usize)> {
        let t = cut.nodes(self.node_count);
        let tc = cut.complement(self.node_count);
        (0..self.joint_input_size())
            .map(|x| {
                let d = self.input_digits(x);
                (Self::sub_index(&d, &self.input_sizes, &t), Self::sub_index(&d, &self.input_sizes, &tc))
            })
            .collect()
    }

    /// For each joint output symbol, its `(y_T, y_{T^c})` sub-indices.
    pub fn output_split(&self, cut: Cut) -> Vec<(usize, usize)> {
        let t = cut.nodes(self.node_count);
        let tc = cut.complement(self.node_count);
        (0..self.joint_output_size())
            .map(|y| {
                let d = self.output_digits(y);
                (Self::sub_index(&d, &self.output_sizes, &t), Self::sub_index(&d, &self.output_sizes, &tc))
            })
            .collect()
    }

    /// Product of alphabet sizes over `nodes`.
    pub fn input_size_of(&self, nodes: &[usize]) -> usize {
        nodes.iter().map(|&i| self.input_sizes[i]).product()
    }

    pub fn output_size_of(&self, nodes: &[usize]) -> usize {
        nodes.iter().map(|&i| self.output_sizes[i]).product()
    }

    /// Product input distribution from per-node marginals.
    pub fn product_input(&self, marginals: &[Vec<f64>]) -> Result<JointPmf, NetworkError> {
        if marginals.len() != self.node_count {
            return Err(ProbError::ShapeMismatch { expected: self.node_count, got: marginals.len() }.into());
        }
        let mut f = Factor::scalar(1.0);
        for (i, m) in marginals.iter().enumerate() {
            f = f.product(&Factor::new(vec![Axis::new(input_axis_name(i), self.input_sizes[i])], m.clone())?)?;
        }
        Ok(JointPmf::from_factor(f)?)
    }

    /// Uniform product input.
    pub fn uniform_input(&self) -> JointPmf {
        JointPmf::uniform(self.input_axes()).expect("nonempty alphabets")
    }
}

/// The marginal channel `q(y_{T^c} | x_I)`.
pub fn marginal_channel(spec: &NetworkSpec, cut: Cut) -> Result<CondKernel, NetworkError> {
    spec.check_cut(cut)?;
    let f = spec.channel().to_factor();
    let mut keep: Vec<String> = (0..spec.node_count).map(input_axis_name).collect();
    keep.extend(cut.complement(spec.node_count).into_iter().map(output_axis_name));
    let m = f.marginal(&keep)?;
    let from: Vec<String> = (0..spec.node_count).map(input_axis_name).collect();
    Ok(CondKernel::from_factor(&m, &from)?)
}

fn check_nodes(n: usize, nodes: &[usize], role: &'static str) -> Result<(), NetworkError> {
    if let Some(&node) = nodes.iter().find(|&&i| i >= n) {
        return Err(NetworkError::Invalid(vec![Diagnostic::NodeOutOfRange { role, node }]));
    }
    Ok(())
}

/// Network whose channel is the product of independent point-to-point links.
///
/// Node `i` transmits the tuple of its outgoing link inputs (ordered by
/// receiving node) and observes the tuple of its incoming link outputs
/// (ordered by sending node). Absent links are singletons.
pub fn build_independent_dmc_network(
    links: LinkChannelTable,
    sources: &[usize],
    destinations: &[usize],
) -> Result<NetworkSpec, NetworkError> {
    let n = links.node_count;
    check_nodes(n, sources, "source")?;
    check_nodes(n, destinations, "destination")?;
    let mut sorted = links.links.clone();
    sorted.sort_by_key(|l| (l.from, l.to));
    for w in sorted.windows(2) {
        if (w[0].from, w[0].to) == (w[1].from, w[1].to) {
            return Err(NetworkError::AlphabetMismatch(format!(
                "link {}->{} defined twice",
                w[0].from + 1,
                w[0].to + 1
            )));
        }
    }
    for l in &sorted {
        if l.from >= n || l.to >= n || l.from == l.to {
            return Err(NetworkError::AlphabetMismatch(format!("invalid link {}->{}", l.from + 1, l.to + 1)));
        }
        if l.input_size == 0 || l.output_size == 0 || l.probabilities.len() != l.input_size * l.output_size {
            return Err(NetworkError::AlphabetMismatch(format!(
                "link {}->{} declares {}x{} but has {} entries",
                l.from + 1,
                l.to + 1,
                l.input_size,
                l.output_size,
                l.probabilities.len()
            )));
        }
        l.kernel()?;
    }
    // Outgoing links per node (sorted by receiver), incoming per node (sorted by sender).
    let outgoing: Vec<Vec<&Link>> = (0..n).map(|i| sorted.iter().filter(|l| l.from == i).collect()).collect();
    let input_sizes: Vec<usize> = outgoing.iter().map(|ls| ls.iter().map(|l| l.input_size).product()).collect();
    let mut incoming: Vec<Vec<&Link>> = (0..n).map(|j| sorted.iter().filter(|l| l.to == j).collect()).collect();
    incoming.iter_mut().for_each(|ls| ls.sort_by_key(|l| l.from));
    let output_sizes: Vec<usize> = incoming.iter().map(|ls| ls.iter().map(|l| l.output_size).product()).collect();

    let nx: usize = input_sizes.iter().product();
    let mut channel = Vec::with_capacity(nx * output_sizes.iter().product::<usize>());
    for x in 0..nx {
        let xd = mixed_radix_digits(x, &input_sizes);
        // Per-link input symbol.
        let mut link_input = std::collections::HashMap::new();
        for i in 0..n {
            let sizes: Vec<usize> = outgoing[i].iter().map(|l| l.input_size).collect();
            for (l, d) in outgoing[i].iter().zip(mixed_radix_digits(xd[i], &sizes)) {
                link_input.insert((l.from, l.to), d);
            }
        }
        let mut row = vec![1.0];
        for ls in &incoming {
            for l in ls {
                let xi = link_input[&(l.from, l.to)];
                let lrow = &l.probabilities[xi * l.output_size..(xi + 1) * l.output_size];
                row = row.iter().flat_map(|&a| lrow.iter().map(move |&b| a * b)).collect();
            }
        }
        channel.extend(row);
    }
    let mut spec = NetworkSpec::new(RawNetwork {
        node_count: n,
        sources: sources.to_vec(),
        destinations: destinations.to_vec(),
        input_sizes,
        output_sizes,
        channel,
    })?;
    spec.links = Some(LinkChannelTable { node_count: n, links: sorted });
    Ok(spec)
}

/// One broadcast edge of a wireless erasure network.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErasureEdge {
    pub from: usize,
    pub to: usize,
    pub erasure: f64,
}

/// Wireless erasure network.
///
/// Node `i` broadcasts one symbol of `input_sizes[i]`. Each edge `(i,j)`
/// independently delivers it, or the erasure symbol `input_sizes[i]`, with
/// probability `erasure`. Node `j` observes its incoming edges in edge-list
/// order; destinations additionally observe the full erasure pattern as a
/// final digit in `0..2^|E|` (bit set = erased, first edge most
/// significant).
pub fn build_erasure_network(
    node_count: usize,
    input_sizes: &[usize],
    edges: &[ErasureEdge],
    sources: &[usize],
    destinations: &[usize],
) -> Result<NetworkSpec, NetworkError> {
    let n = node_count;
    check_nodes(n, sources, "source")?;
    check_nodes(n, destinations, "destination")?;
    if input_sizes.len() != n {
        return Err(NetworkError::Invalid(vec![Diagnostic::AlphabetCount {
            which: "input",
            expected: n,
            got: input_sizes.len(),
        }]));
    }
    for (k, e) in edges.iter().enumerate() {
        if !(0.0..=1.0).contains(&e.erasure) {
            return Err(NetworkError::InvalidProbability { from: e.from + 1, to: e.to + 1, value: e.erasure });
        }
        if e.from >= n || e.to >= n || e.from == e.to {
            return Err(NetworkError::AlphabetMismatch(format!("invalid edge {}->{}", e.from + 1, e.to + 1)));
        }
        if edges[..k].iter().any(|f| (f.from, f.to) == (e.from, e.to)) {
            return Err(NetworkError::AlphabetMismatch(format!("edge {}->{} listed twice", e.from + 1, e.to + 1)));
        }
    }
    let m = edges.len();
    if m > 16 {
        return Err(NetworkError::AlphabetMismatch(format!("{m} edges exceeds the supported maximum of 16")));
    }
    let patterns = 1usize << m;
    // Per node: (edge index, symbol count) digits followed by an optional pattern digit.
    let digits_of: Vec<Vec<(Option<usize>, usize)>> = (0..n)
        .map(|j| {
            let mut d: Vec<(Option<usize>, usize)> = edges
                .iter()
                .enumerate()
                .filter(|(_, e)| e.to == j)
                .map(|(k, e)| (Some(k), input_sizes[e.from] + 1))
                .collect();
            if destinations.contains(&j) {
                d.push((None, patterns));
            }
            d
        })
        .collect();
    let output_sizes: Vec<usize> = digits_of.iter().map(|d| d.iter().map(|x| x.1).product()).collect();
    let nx: usize = input_sizes.iter().product();
    let ny: usize = output_sizes.iter().product();
    let mut channel = vec![0.0; nx * ny];
    for x in 0..nx {
        let xd = mixed_radix_digits(x, input_sizes);
        for pattern in 0..patterns {
            let erased = |k: usize| pattern >> (m - 1 - k) & 1 == 1;
            let prob: f64 = edges
                .iter()
                .enumerate()
                .map(|(k, e)| if erased(k) { e.erasure } else { 1.0 - e.erasure })
                .product();
            if prob == 0.0 {
                continue;
            }
            let yd: Vec<usize> = digits_of
                .iter()
                .map(|ds| {
                    ds.iter().fold(0, |acc, &(edge, size)| {
                        let v = match edge {
                            Some(k) if erased(k) => size - 1,
                            Some(k) => xd[edges[k].from],
                            None => pattern,
                        };
                        acc * size + v
                    })
                })
                .collect();
            channel[x * ny + mixed_radix_index(&yd, &output_sizes)] += prob;
        }
    }
    NetworkSpec::new(RawNetwork {
        node_count: n,
        sources: sources.to_vec(),
        destinations: destinations.to_vec(),
        input_sizes: input_sizes.to_vec(),
        output_sizes,
        channel,
    })
}

/// Feedback version: every node's output becomes `(Y_i, Y_d)` where `d` is
/// the single destination. The copy is the low-order digit.
pub fn build_feedback_version(spec: &NetworkSpec) -> Result<NetworkSpec, NetworkError> {
    if spec.destinations.len() != 1 {
        return Err(NetworkError::MultipleDestinations(spec.destinations.len()));
    }
    let d = spec.destinations[0];
    let yd = spec.output_sizes[d];
    let output_sizes: Vec<usize> = spec.output_sizes.iter().map(|&s| s * yd).collect();
    let ny_new: usize = output_sizes.iter().product();
    let nx = spec.joint_input_size();
    let mut channel = vec![0.0; nx * ny_new];
    for x in 0..nx {
        for (y, &q) in spec.channel_row(x).iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            let digits = spec.output_digits(y);
            let dup: Vec<usize> = digits.iter().map(|&v| v * yd + digits[d]).collect();
            channel[x * ny_new + mixed_radix_index(&dup, &output_sizes)] += q;
        }
    }
    let mut out = NetworkSpec::new(RawNetwork {
        node_count: spec.node_count,
        sources: spec.sources.clone(),
        destinations: spec.destinations.clone(),
        input_sizes: spec.input_sizes.clone(),
        output_sizes,
        channel,
    })?;
    out.links = spec.links.clone();
    Ok(out)
}

/// All cuts `T` with `T^c ∩ D ≠ ∅`, ordered by bitmask.
pub fn enumerate_cuts(spec: &NetworkSpec) -> Vec<Cut> {
    let full = 1u32 << spec.node_count;
    (0..full)
        .map(Cut::from_bitmask)
        .filter(|c| spec.destinations.iter().any(|&d| !c.contains(d)))
        .collect()
}

/// Channel-level determinism of `Y_T` given `(X_I, Y_{T^c})`: true iff for
/// every input and every supported `y_{T^c}` exactly one `y_T` has positive
/// probability.
pub fn check_determinism(spec: &NetworkSpec, cuts: &[Cut]) -> Result<Vec<bool>, NetworkError> {
    cuts.iter()
        .map(|&cut| {
            spec.check_cut(cut)?;
            let split = spec.output_split(cut);
            let ntc = spec.output_size_of(&cut.complement(spec.node_count));
            for x in 0..spec.joint_input_size() {
                let mut seen = vec![usize::MAX; ntc];
                for (y, &q) in spec.channel_row(x).iter().enumerate() {
                    if q > 0.0 {
                        let (yt, ytc) = split[y];
                        if seen[ytc] == usize::MAX {
                            seen[ytc] = yt;
                        } else if seen[ytc] != yt {
                            return Ok(false);
                        }
                    }
                }
            }
            Ok(true)
        })
        .collect()
}

/// Determinism verdicts for the region cuts and, separately, for all `2^N`
/// subsets.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeterminismReport {
    pub region_cuts: Vec<(Cut, bool)>,
    pub all_cuts: Vec<(Cut, bool)>,
}

impl DeterminismReport {
    pub fn region_cuts_deterministic(&self) -> bool {
        self.region_cuts.iter().all(|c| c.1)
    }

    pub fn all_cuts_deterministic(&self) -> bool {
        self.all_cuts.iter().all(|c| c.1)
    }
}

pub fn determinism_report(spec: &NetworkSpec) -> Result<DeterminismReport, NetworkError> {
    let region = enumerate_cuts(spec);
    let all: Vec<Cut> = (0..1u32 << spec.node_count).map(Cut::from_bitmask).collect();
    Ok(DeterminismReport {
        region_cuts: region.iter().copied().zip(check_determinism(spec, &region)?).collect(),
        all_cuts: all.iter().copied().zip(check_determinism(spec, &all)?).collect(),
    })
}

/// Per-node marginals of an input pmf over `X1..XN`, after checking that it
/// is a product of them.
pub fn product_marginals(spec: &NetworkSpec, p: &JointPmf) -> Result<Vec<Vec<f64>>, NetworkError> {
    if p.axes() != spec.input_axes().as_slice() {
        return Err(ProbError::AxisMismatch("input pmf must be over X1..XN".into()).into());
    }
    let marginals: Vec<Vec<f64>> = (0..spec.node_count)
        .map(|i| Ok(p.marginal(&[input_axis_name(i)])?.values().to_vec()))
        .collect::<Result<_, ProbError>>()?;
    let prod = spec.product_input(&marginals)?;
    let residual = prod.max_abs_diff(p)?;
    if residual > NORMALIZATION_TOL {
        return Err(NetworkError::NotProductForm { residual });
    }
    Ok(marginals)
}
