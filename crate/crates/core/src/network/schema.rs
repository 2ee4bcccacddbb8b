//! JSON network files.
//!
//! ```json
//! {
//!   "nodes": 3,
//!   "sources": [1],
//!   "destinations": [3],
//!   "feedback": false,
//!   "channel": { "kind": "product_links", "links": [
//!     { "from": 1, "to": 2, "input_size": 2, "output_size": 2,
//!       "probabilities": [0.9, 0.1, 0.1, 0.9] } ] }
//! }
//! ```
//!
//! Node ids are 1-based. Probabilities may be numbers or decimal strings.
//! Channel kinds:
//! - `dense`: `shape` is `[|X_1|..|X_N|, |Y_1|..|Y_N|]` and `probabilities`
//!   the row-major table `q(y_I | x_I)`;
//! - `product_links`: independent point-to-point links;
//! - `erasure`: `input_sizes` plus `edges` `{from, to, erasure}`.
//!
//! `feedback: true` replaces the network by its feedback version.

use serde::Deserialize;
use thiserror::Error;

use super::{
    build_erasure_network, build_feedback_version, build_independent_dmc_network, ErasureEdge, Link,
    LinkChannelTable, NetworkError, NetworkSpec, RawNetwork,
};

/// Errors from reading a network file.
#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("line {line}, column {column}, at `{path}`: {message}")]
    Json { path: String, line: usize, column: usize, message: String },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Number {
    Float(f64),
    Text(String),
}

fn probabilities<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    let raw = Vec::<Number>::deserialize(d)?;
    raw.into_iter()
        .map(|n| match n {
            Number::Float(v) => Ok(v),
            Number::Text(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|e| serde::de::Error::custom(format!("`{s}` is not a decimal number: {e}"))),
        })
        .collect()
}

fn probability<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    match Number::deserialize(d)? {
        Number::Float(v) => Ok(v),
        Number::Text(s) => s
            .trim()
            .parse::<f64>()
            .map_err(|e| serde::de::Error::custom(format!("`{s}` is not a decimal number: {e}"))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    nodes: usize,
    sources: Vec<usize>,
    destinations: Vec<usize>,
    #[serde(default)]
    feedback: bool,
    channel: ChannelFile,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ChannelFile {
    Dense {
        shape: Vec<usize>,
        #[serde(deserialize_with = "probabilities")]
        probabilities: Vec<f64>,
    },
    ProductLinks {
        links: Vec<LinkFile>,
    },
    Erasure {
        input_sizes: Vec<usize>,
        edges: Vec<EdgeFile>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkFile {
    from: usize,
    to: usize,
    input_size: usize,
    output_size: usize,
    #[serde(deserialize_with = "probabilities")]
    probabilities: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeFile {
    from: usize,
    to: usize,
    #[serde(deserialize_with = "probability")]
    erasure: f64,
}

fn zero_based(field: &str, ids: &[usize], n: usize) -> Result<Vec<usize>, SchemaError> {
    ids.iter()
        .map(|&id| {
            if id == 0 || id > n {
                Err(SchemaError::Field {
                    field: field.to_string(),
                    message: format!("node id {id} outside 1..={n}"),
                })
            } else {
                Ok(id - 1)
            }
        })
        .collect()
}

/// Parses and validates a network file.
pub fn parse_network(text: &str) -> Result<NetworkSpec, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: NetworkFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        SchemaError::Json { path, line: inner.line(), column: inner.column(), message: inner.to_string() }
    })?;
    let n = file.nodes;
    let sources = zero_based("sources", &file.sources, n)?;
    let destinations = zero_based("destinations", &file.destinations, n)?;
    let spec = match file.channel {
        ChannelFile::Dense { shape, probabilities } => {
            if shape.len() != 2 * n {
                return Err(SchemaError::Field {
                    field: "channel.shape".into(),
                    message: format!("expected {} entries (inputs then outputs), got {}", 2 * n, shape.len()),
                });
            }
            NetworkSpec::new(RawNetwork {
                node_count: n,
                sources,
                destinations,
                input_sizes: shape[..n].to_vec(),
                output_sizes: shape[n..].to_vec(),
                channel: probabilities,
            })?
        }
        ChannelFile::ProductLinks { links } => {
            let mut out = Vec::with_capacity(links.len());
            for (k, l) in links.into_iter().enumerate() {
                let ends = zero_based(&format!("channel.links[{k}]"), &[l.from, l.to], n)?;
                out.push(Link {
                    from: ends[0],
                    to: ends[1],
                    input_size: l.input_size,
                    output_size: l.output_size,
                    probabilities: l.probabilities,
                });
            }
            build_independent_dmc_network(LinkChannelTable { node_count: n, links: out }, &sources, &destinations)?
        }
        ChannelFile::Erasure { input_sizes, edges } => {
            let mut out = Vec::with_capacity(edges.len());
            for (k, e) in edges.into_iter().enumerate() {
                let ends = zero_based(&format!("channel.edges[{k}]"), &[e.from, e.to], n)?;
                out.push(ErasureEdge { from: ends[0], to: ends[1], erasure: e.erasure });
            }
            build_erasure_network(n, &input_sizes, &out, &sources, &destinations)?
        }
    };
    if file.feedback {
        Ok(build_feedback_version(&spec)?)
    } else {
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_with_string_probabilities() {
        let text = r#"{"nodes": 2, "sources": [1], "destinations": [2],
            "channel": {"kind": "dense", "shape": [2, 1, 1, 2],
                        "probabilities": ["0.9", "0.1", 0.1, 0.9]}}"#;
        let spec = parse_network(text).unwrap();
        assert_eq!(spec.channel_row(1), &[0.1, 0.9]);
        assert_eq!(spec.sources(), &[0]);
    }

    #[test]
    fn malformed_field_reports_path_and_line() {
        let text = "{\"nodes\": 2,\n \"sources\": [1],\n \"destinations\": [2],\n \"channel\": {\"kind\": \"dense\", \"shape\": [2, 1, 1, 2], \"probabilities\": [0.9, \"x\", 0.1, 0.9]}}";
        match parse_network(text) {
            Err(SchemaError::Json { path, line, .. }) => {
                // Internally tagged enums buffer their content, so the path
                // stops at the enclosing object.
                assert!(path.starts_with("channel"), "{path}");
                assert_eq!(line, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_channel_is_a_network_error() {
        let text = r#"{"nodes": 2, "sources": [1], "destinations": [2],
            "channel": {"kind": "dense", "shape": [2, 1, 1, 2], "probabilities": [0.8, 0.1, 0.1, 0.9]}}"#;
        assert!(matches!(parse_network(text), Err(SchemaError::Network(NetworkError::Invalid(_)))));
        let text = r#"{"nodes": 2, "sources": [3], "destinations": [2],
            "channel": {"kind": "dense", "shape": [2, 1, 1, 2], "probabilities": [0.9, 0.1, 0.1, 0.9]}}"#;
        assert!(matches!(parse_network(text), Err(SchemaError::Field { .. })));
    }
}
