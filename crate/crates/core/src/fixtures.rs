//! Bundled example networks.

use crate::network::schema::parse_network;
use crate::network::NetworkSpec;

/// Point-to-point BSC(0.1).
pub const BSC2: &str = include_str!("../fixtures/bsc2.json");
/// Point-to-point BEC(0.5), outputs `{0, 1, e}`.
pub const BEC2: &str = include_str!("../fixtures/bec2.json");
/// Line network 1→2→3 of BSC(0.1) links.
pub const LINE3: &str = include_str!("../fixtures/line3.json");
/// Feedback version of [`LINE3`].
pub const LINE3_FEEDBACK: &str = include_str!("../fixtures/line3_feedback.json");
/// Erasure relay 1→2→3 with erasure probability 0.5 per edge.
pub const ERASURE_RELAY3: &str = include_str!("../fixtures/erasure_relay3.json");

/// All fixtures by name.
pub const ALL: [(&str, &str); 5] = [
    ("bsc2", BSC2),
    ("bec2", BEC2),
    ("line3", LINE3),
    ("line3_feedback", LINE3_FEEDBACK),
    ("erasure_relay3", ERASURE_RELAY3),
];

/// Parses a bundled fixture by name.
pub fn load(name: &str) -> Option<NetworkSpec> {
    ALL.iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_network(text).expect("bundled fixtures are valid"))
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_fixtures_parse() {
        for (name, _) in super::ALL {
            assert!(super::load(name).is_some(), "{name}");
        }
    }
}
