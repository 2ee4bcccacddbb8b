//! Numerical audit of the strong-converse argument on concrete codes.
//!
//! The pieces, in the order the argument uses them:
//!
//! * [`prop2_bound`]: the Rényi replacement for Fano's inequality, which
//!   lower-bounds `D_λ(p_{U,V} ‖ p_U q_V)` by `log|W| + λ/(λ−1)·log(1−α)`.
//! * [`build_tilted_sequence`]: the λ-tilted per-letter input laws of a
//!   code across a cut, computed along two independent routes.
//! * [`build_simulating_distribution`] and [`verify_lemma1`]: the auxiliary
//!   law `s` that mimics the code on the complement of the cut, with its five
//!   defining properties checked numerically.
//! * [`single_letter_certificate`]: every intermediate quantity of the chain
//!   from the error probability down to a single-letter Rényi divergence.
//! * [`prop3_gap`] and [`lambda_schedule`]: the approximation of the Rényi
//!   quantity by mutual information as `λ ↓ 1`.

mod certificate;
mod simulate;
mod tilt;

use serde::Serialize;
use thiserror::Error;

use crate::code::CodeError;
use crate::network::NetworkError;
use crate::prob::measures::divergence_terms;
use crate::prob::{Factor, JointPmf, ProbError};

pub use certificate::{single_letter_certificate, Certificate, ChainStep, Relation};
pub use simulate::{build_simulating_distribution, verify_lemma1, SimulationReport, SimulatingDistribution};
pub use tilt::{build_tilted_sequence, TiltedSequence};

/// Slack allowed on every inequality and identity of the chain.
pub const CHAIN_TOLERANCE: f64 = 1e-9;
/// Conditioning cells at or below this mass are treated as null.
pub const NULL_MASS: f64 = 1e-12;
/// Largest order for which the Rényi-to-mutual-information bound applies.
pub const CONTINUITY_MAX_LAMBDA: f64 = 1.25;

#[derive(Debug, Error)]
pub enum ConverseError {
    #[error("marginal of U is not uniform (largest deviation {deviation:e})")]
    NonUniformMarginal { deviation: f64 },
    #[error("Pr{{U != V}} = 1; the bound needs alpha < 1")]
    AlphaOne,
    #[error("order lambda = {lambda} outside {range}")]
    LambdaOutOfRange { lambda: f64, range: &'static str },
    #[error("node {node} is not a destination outside the cut")]
    InvalidDestination { node: usize },
    #[error("error bound {0} outside [0, 1)")]
    InvalidEpsilon(f64),
    #[error("input law violates the memoryless factorization (residual {residual:e})")]
    NonMemorylessInput { residual: f64 },
    #[error("{cells} cells exceed the budget of {budget}")]
    BudgetExhausted { cells: u128, budget: usize },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// `D_λ(a‖b)` for factors over the same axes, where `b` need not be
/// normalized off the support of `a`.
pub(crate) fn factor_renyi(a: &Factor, b: &Factor, lambda: f64) -> Result<f64, ProbError> {
    let b = if a.axes() == b.axes() { b.clone() } else { b.expand(a.axes())? };
    a.require_same_axes(&b)?;
    Ok(divergence_terms(a.values().iter().zip(b.values()).map(|(&p, &q)| (p, p, q)), lambda))
}

/// `a(target | given)` as a factor over `target ∪ given`; rows with zero
/// mass are zero.
pub(crate) fn conditional(a: &Factor, target: &[String], given: &[String]) -> Result<Factor, ProbError> {
    let mut all: Vec<&str> = target.iter().map(String::as_str).collect();
    all.extend(given.iter().map(String::as_str));
    a.marginal(&all)?.divide(&a.marginal(given)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FanoOutcome {
    /// `D_λ(p_{U,V} ‖ p_U q_V)` in bits.
    #[serde(serialize_with = "crate::nonfinite::float")]
    pub lhs: f64,
    /// `log|W| + λ/(λ−1)·log(1−α)`.
    pub rhs: f64,
    pub alpha: f64,
    #[serde(serialize_with = "crate::nonfinite::float")]
    pub slack: f64,
    pub holds: bool,
}

/// Shared core of [`prop2_bound`]: `U` and `V` are tuples of axes matched
/// position by position. A `V` alphabet may exceed its `U` partner (a
/// decoder's failure symbol); such symbols never equal `U`.
pub(crate) fn fano_parts(
    p_uv: &Factor,
    u: &[String],
    v: &[String],
    q_v: &Factor,
    lambda: f64,
) -> Result<FanoOutcome, ConverseError> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(ConverseError::LambdaOutOfRange { lambda, range: "(1, inf)" });
    }
    if u.len() != v.len() {
        return Err(ProbError::AxisMismatch("U and V tuples differ in length".into()).into());
    }
    let mut names: Vec<&str> = u.iter().map(String::as_str).collect();
    names.extend(v.iter().map(String::as_str));
    let p_uv = p_uv.marginal(&names)?;
    let p_u = p_uv.marginal(u)?;
    let size = p_u.len() as f64;
    let deviation = p_u.values().iter().map(|&m| (m - 1.0 / size).abs()).fold(0.0, f64::max);
    if deviation > crate::prob::NORMALIZATION_TOL {
        return Err(ConverseError::NonUniformMarginal { deviation });
    }
    let u_pos: Vec<usize> = u.iter().map(|n| p_uv.axes().iter().position(|a| a.name() == n).unwrap()).collect();
    let v_pos: Vec<usize> = v.iter().map(|n| p_uv.axes().iter().position(|a| a.name() == n).unwrap()).collect();
    let mut alpha = 0.0;
    for (flat, &m) in p_uv.values().iter().enumerate() {
        if m > 0.0 {
            let a = p_uv.assignment(flat);
            if u_pos.iter().zip(&v_pos).any(|(&i, &j)| a[i] != a[j]) {
                alpha += m;
            }
        }
    }
    let alpha = alpha.min(1.0);
    if alpha >= 1.0 {
        return Err(ConverseError::AlphaOne);
    }
    let lhs = factor_renyi(&p_uv, &p_u.product(q_v)?, lambda)?;
    let rhs = size.log2() + lambda / (lambda - 1.0) * (-alpha).ln_1p() / std::f64::consts::LN_2;
    let slack = lhs - rhs;
    Ok(FanoOutcome { lhs, rhs, alpha, slack, holds: slack >= -CHAIN_TOLERANCE })
}

/// Checks `D_λ(p_{U,V} ‖ p_U q_V) ≥ log|W| + λ/(λ−1)·log(1−α)` for a joint
/// law of a uniform `U` and a guess `V`, where `α = Pr{U ≠ V}`.
pub fn prop2_bound(p_uv: &JointPmf, u: &str, v: &str, q_v: &JointPmf, lambda: f64) -> Result<FanoOutcome, ConverseError> {
    fano_parts(p_uv.factor(), &[u.to_string()], &[v.to_string()], q_v.factor(), lambda)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContinuityOutcome {
    /// `D_λ(p_{X,Y|Z} ‖ p_{X|Z} p_{Y|Z} | p_Z)`.
    #[serde(serialize_with = "crate::nonfinite::float")]
    pub d_lambda: f64,
    /// The same at λ = 1, i.e. `I(X;Y|Z)`.
    #[serde(serialize_with = "crate::nonfinite::float")]
    pub d_one: f64,
    /// `8(λ−1)(|X||Y|)^5`.
    pub remainder: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Compares the conditional Rényi dependence of `x` and `y` given `z` with
/// the conditional mutual information plus the remainder `8(λ−1)(|X||Y|)^5`.
pub fn prop3_gap(p_xyz: &JointPmf, x: &[&str], y: &[&str], z: &[&str], lambda: f64) -> Result<ContinuityOutcome, ConverseError> {
    if !(lambda > 1.0 && lambda <= CONTINUITY_MAX_LAMBDA) {
        return Err(ConverseError::LambdaOutOfRange { lambda, range: "(1, 5/4]" });
    }
    let mut all: Vec<&str> = x.to_vec();
    all.extend_from_slice(y);
    all.extend_from_slice(z);
    let p = p_xyz.factor().marginal(&all)?;
    let xz: Vec<&str> = x.iter().chain(z).copied().collect();
    let yz: Vec<&str> = y.iter().chain(z).copied().collect();
    // p_{X|Z} p_{Y|Z} p_Z = p_{XZ} p_{YZ} / p_Z.
    let product = p.marginal(&xz)?.product(&p.marginal(&yz)?)?.divide(&p.marginal(z)?)?;
    let d_lambda = factor_renyi(&p, &product, lambda)?;
    let d_one = factor_renyi(&p, &product, 1.0)?;
    let size = |names: &[&str]| -> f64 { names.iter().map(|n| p.axis(n).map_or(1, |a| a.size()) as f64).product() };
    let remainder = 8.0 * (lambda - 1.0) * (size(x) * size(y)).powi(5);
    let bound = d_one + remainder;
    Ok(ContinuityOutcome { d_lambda, d_one, remainder, bound, holds: d_lambda <= bound + CHAIN_TOLERANCE })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LambdaSchedule {
    pub n: usize,
    pub lambda: f64,
    /// False when `λ_n > 5/4`, i.e. `n < 16`, where [`prop3_gap`] no longer
    /// applies.
    pub within_continuity_window: bool,
}

/// `λ_n = 1 + 1/√n`.
pub fn lambda_schedule(n: usize) -> LambdaSchedule {
    let n = n.max(1);
    let lambda = 1.0 + 1.0 / (n as f64).sqrt();
    LambdaSchedule { n, lambda, within_continuity_window: lambda <= CONTINUITY_MAX_LAMBDA }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{make_joint, Axis};

    fn uv(values: Vec<f64>, w: usize) -> JointPmf {
        make_joint(vec![Axis::new("U", w), Axis::new("V", w)], values).unwrap()
    }

    #[test]
    fn fano_equality_case() {
        let p = uv(vec![0.5, 0.0, 0.0, 0.5], 2);
        let q = JointPmf::uniform(vec![Axis::new("V", 2)]).unwrap();
        let out = prop2_bound(&p, "U", "V", &q, 2.0).unwrap();
        assert!((out.lhs - 1.0).abs() < 1e-12);
        assert!((out.rhs - 1.0).abs() < 1e-12);
        assert_eq!(out.alpha, 0.0);
    }

    #[test]
    fn fano_half_error() {
        let p = uv(vec![0.25; 4], 2);
        let q = JointPmf::uniform(vec![Axis::new("V", 2)]).unwrap();
        let out = prop2_bound(&p, "U", "V", &q, 2.0).unwrap();
        assert!((out.rhs + 1.0).abs() < 1e-12);
        assert!(out.lhs >= 0.0 && out.holds);
    }

    #[test]
    fn fano_rejects_bad_inputs() {
        let q = JointPmf::uniform(vec![Axis::new("V", 2)]).unwrap();
        let skew = uv(vec![0.6, 0.1, 0.1, 0.2], 2);
        assert!(matches!(prop2_bound(&skew, "U", "V", &q, 2.0), Err(ConverseError::NonUniformMarginal { .. })));
        let wrong = uv(vec![0.0, 0.5, 0.5, 0.0], 2);
        assert!(matches!(prop2_bound(&wrong, "U", "V", &q, 2.0), Err(ConverseError::AlphaOne)));
        let ok = uv(vec![0.5, 0.0, 0.0, 0.5], 2);
        assert!(matches!(prop2_bound(&ok, "U", "V", &q, 1.0), Err(ConverseError::LambdaOutOfRange { .. })));
    }

    #[test]
    fn continuity_remainder_and_independence() {
        let p = JointPmf::uniform(vec![Axis::new("X", 2), Axis::new("Y", 2), Axis::new("Z", 2)]).unwrap();
        let out = prop3_gap(&p, &["X"], &["Y"], &["Z"], 1.25).unwrap();
        assert_eq!(out.remainder, 2048.0);
        assert!(out.d_lambda.abs() < 1e-12 && out.d_one.abs() < 1e-12);
        assert!(matches!(prop3_gap(&p, &["X"], &["Y"], &["Z"], 1.3), Err(ConverseError::LambdaOutOfRange { .. })));
    }

    #[test]
    fn schedule_gate() {
        assert_eq!(lambda_schedule(16).lambda, 1.25);
        assert!(lambda_schedule(16).within_continuity_window);
        let four = lambda_schedule(4);
        assert_eq!(four.lambda, 1.5);
        assert!(!four.within_continuity_window);
        assert!((lambda_schedule(1_000_000).lambda - 1.001).abs() < 1e-15);
    }
}
