//! Finite-alphabet toolkit for discrete memoryless multimessage multicast
//! networks: rate regions given by cuts, Rényi-divergence converse
//! certificates built from tilted simulating distributions, and exact or
//! Monte Carlo simulation of small codes.

pub mod cli;
pub mod code;
pub mod converse;
pub mod fixtures;
pub mod network;
mod nonfinite;
pub mod prob;
pub mod regions;
pub mod rng;
pub mod suites;
