//! Information measures in bits.
//!
//! Conventions: `0·log 0 = 0` and `0·log(0/0) = 0`. Divergences return
//! `f64::INFINITY` when the first argument puts mass where the second has
//! none. Rényi divergences are evaluated as
//! `ln(1 + Σ m·expm1((λ−1)·ln(p/q)) / Σ m) / ((λ−1)·ln 2)` so that
//! orders close to 1 keep full relative precision. Dividing by `Σ m`
//! rather than assuming it is 1 keeps its rounding error from being
//! amplified by `1/(λ−1)`.

use std::collections::BTreeSet;
use std::f64::consts::LN_2;

use super::{CondKernel, Factor, JointPmf, ProbError, ZeroMassPolicy};

/// Core Rényi/KL evaluation over `(mass, p, q)` triples, where `mass` is the
/// weight carried by the term and `p/q` its likelihood ratio.
pub(crate) fn divergence_terms(terms: impl Iterator<Item = (f64, f64, f64)>, lambda: f64) -> f64 {
    let t = lambda - 1.0;
    let mut acc = 0.0;
    let mut mass = 0.0;
    for (m, p, q) in terms {
        if m <= 0.0 {
            continue;
        }
        if q <= 0.0 {
            return f64::INFINITY;
        }
        let log_ratio = p.ln() - q.ln();
        mass += m;
        acc += if t == 0.0 { m * log_ratio } else { m * (t * log_ratio).exp_m1() };
    }
    if t == 0.0 {
        acc / LN_2
    } else if mass == 0.0 {
        0.0
    } else {
        (acc / mass).ln_1p() / (t * LN_2)
    }
}

/// `D_λ(p‖q)` on raw vectors (λ = 1 is relative entropy).
pub(crate) fn renyi_bits(p: &[f64], q: &[f64], lambda: f64) -> f64 {
    divergence_terms(p.iter().zip(q).map(|(&a, &b)| (a, a, b)), lambda)
}

/// Entropy of a raw vector.
pub(crate) fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.log2()).sum::<f64>()
}

fn check_lambda(lambda: f64) -> Result<(), ProbError> {
    if lambda >= 1.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(ProbError::InvalidLambda(lambda))
    }
}

fn disjoint(sets: &[&[&str]]) -> Result<(), ProbError> {
    let mut seen = BTreeSet::new();
    for set in sets {
        for &name in *set {
            if !seen.insert(name) {
                return Err(ProbError::AxisOverlap(name.to_string()));
            }
        }
    }
    Ok(())
}

fn names<'a>(sets: &[&[&'a str]]) -> Vec<&'a str> {
    sets.iter().flat_map(|s| s.iter().copied()).collect()
}

/// `m` restricted to `keep`, broadcast back onto `m`'s axes.
fn marginal_on(m: &Factor, keep: &[&str]) -> Result<Vec<f64>, ProbError> {
    Ok(m.marginal(keep)?.expand(m.axes())?.into_values())
}

/// Entropy of the full joint.
pub fn entropy(p: &JointPmf) -> f64 {
    entropy_bits(p.values())
}

/// `H(target | given)`.
pub fn conditional_entropy(p: &JointPmf, target: &[&str], given: &[&str]) -> Result<f64, ProbError> {
    disjoint(&[target, given])?;
    let m = p.marginal(&names(&[target, given]))?;
    let mg = marginal_on(&m, given)?;
    let h = m
        .values()
        .iter()
        .zip(&mg)
        .filter(|(&v, _)| v > 0.0)
        .map(|(&v, &g)| -v * (v / g).log2())
        .sum::<f64>();
    Ok(h)
}

/// `I(a; b)`.
pub fn mutual_information(p: &JointPmf, a: &[&str], b: &[&str]) -> Result<f64, ProbError> {
    conditional_mutual_information(p, a, b, &[])
}

/// `I(a; b | given)`, evaluated as a single sum of
/// `p(a,b,c)·log[p(a,b,c)p(c) / (p(a,c)p(b,c))]`.
pub fn conditional_mutual_information(
    p: &JointPmf,
    a: &[&str],
    b: &[&str],
    given: &[&str],
) -> Result<f64, ProbError> {
    disjoint(&[a, b, given])?;
    let m = p.marginal(&names(&[a, b, given]))?;
    let mc = marginal_on(&m, given)?;
    let mac = marginal_on(&m, &names(&[a, given]))?;
    let mbc = marginal_on(&m, &names(&[b, given]))?;
    let mut acc = 0.0;
    for (i, &v) in m.values().iter().enumerate() {
        if v > 0.0 {
            acc += v * ((v * mc[i]) / (mac[i] * mbc[i])).log2();
        }
    }
    Ok(acc)
}

/// `D(p‖q)`; both pmfs must have identical axes.
pub fn relative_entropy(p: &JointPmf, q: &JointPmf) -> Result<f64, ProbError> {
    p.require_same_axes(q)?;
    Ok(renyi_bits(p.values(), q.values(), 1.0))
}

/// Conditional relative entropy `Σ_z r(z) D(p_{T|z} ‖ q_{T|z})` where the
/// conditionals are read off the joints `p` and `q` (marginalized to
/// `target ∪ given`). Zero-mass conditioning rows become uniform; they only
/// matter where `r` charges a cell the joints do not.
pub fn relative_entropy_given(
    p: &JointPmf,
    q: &JointPmf,
    target: &[&str],
    given: &[&str],
    r: &JointPmf,
) -> Result<f64, ProbError> {
    disjoint(&[target, given])?;
    let keep = names(&[target, given]);
    let pk = super::condition_with(&p.marginalize(&keep)?, given, ZeroMassPolicy::Uniform)?.0;
    let qk = super::condition_with(&q.marginalize(&keep)?, given, ZeroMassPolicy::Uniform)?.0;
    conditional_relative_entropy(&pk, &qk, r)
}

fn check_kernels(p: &CondKernel, q: &CondKernel, r: &JointPmf) -> Result<(), ProbError> {
    if p.from_axes() != q.from_axes() || p.to_axes() != q.to_axes() {
        return Err(ProbError::AxisMismatch("kernels have different axes".into()));
    }
    if r.axes() != p.from_axes() {
        return Err(ProbError::AxisMismatch("weighting pmf must be over the kernel inputs".into()));
    }
    Ok(())
}

fn kernel_terms<'a>(
    p: &'a CondKernel,
    q: &'a CondKernel,
    r: &'a JointPmf,
) -> impl Iterator<Item = (f64, f64, f64)> + 'a {
    let w = p.n_to();
    p.rows()
        .iter()
        .zip(q.rows())
        .enumerate()
        .map(move |(i, (&a, &b))| (r.values()[i / w] * a, a, b))
}

/// `D(p_{Y|Z} ‖ q_{Y|Z} | r_Z)`.
pub fn conditional_relative_entropy(p: &CondKernel, q: &CondKernel, r: &JointPmf) -> Result<f64, ProbError> {
    check_kernels(p, q, r)?;
    Ok(divergence_terms(kernel_terms(p, q, r), 1.0))
}

/// `D_λ(p‖q)` for `λ ≥ 1`; both pmfs must have identical axes.
pub fn renyi_divergence(p: &JointPmf, q: &JointPmf, lambda: f64) -> Result<f64, ProbError> {
    check_lambda(lambda)?;
    p.require_same_axes(q)?;
    Ok(renyi_bits(p.values(), q.values(), lambda))
}

/// `D_λ(p_{Y|Z} ‖ q_{Y|Z} | r_Z)`, i.e.
/// `(1/(λ−1)) log Σ_z r(z) Σ_y p(y|z)^λ q(y|z)^{1−λ}` for λ > 1 and the
/// conditional relative entropy at λ = 1.
pub fn conditional_renyi_divergence(
    p: &CondKernel,
    q: &CondKernel,
    r: &JointPmf,
    lambda: f64,
) -> Result<f64, ProbError> {
    check_lambda(lambda)?;
    check_kernels(p, q, r)?;
    Ok(divergence_terms(kernel_terms(p, q, r), lambda))
}

/// `Σ |p − q|`.
pub fn l1_distance(p: &JointPmf, q: &JointPmf) -> Result<f64, ProbError> {
    p.require_same_axes(q)?;
    Ok(p.values().iter().zip(q.values()).map(|(a, b)| (a - b).abs()).sum())
}

/// `max |p(x,y,z)p(y) − p(x,y)p(y,z)|` over all cells of the `(x,y,z)`
/// marginal; zero iff `x → y → z` is a Markov chain under `p`.
pub fn markov_residual(p: &JointPmf, x: &[&str], y: &[&str], z: &[&str]) -> Result<f64, ProbError> {
    disjoint(&[x, y, z])?;
    let m = p.marginal(&names(&[x, y, z]))?;
    let my = marginal_on(&m, y)?;
    let mxy = marginal_on(&m, &names(&[x, y]))?;
    let myz = marginal_on(&m, &names(&[y, z]))?;
    Ok(m
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| (v * my[i] - mxy[i] * myz[i]).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{condition, make_joint, Axis};

    fn bin(name: &str, a: f64) -> JointPmf {
        make_joint(vec![Axis::new(name, 2)], vec![a, 1.0 - a]).unwrap()
    }

    fn hb(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    fn bsc_joint(eps: f64) -> JointPmf {
        make_joint(
            vec![Axis::new("X", 2), Axis::new("Y", 2)],
            vec![0.5 * (1.0 - eps), 0.5 * eps, 0.5 * eps, 0.5 * (1.0 - eps)],
        )
        .unwrap()
    }

    #[test]
    fn entropy_hand_values() {
        let det = make_joint(vec![Axis::new("X", 2), Axis::new("Y", 2)], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(conditional_entropy(&det, &["Y"], &["X"]).unwrap(), 0.0);
        let ind = make_joint(vec![Axis::new("X", 2), Axis::new("Y", 2)], vec![0.2, 0.2, 0.3, 0.3]).unwrap();
        assert!((conditional_entropy(&ind, &["Y"], &["X"]).unwrap() - 1.0).abs() < 1e-15);
        let h = conditional_entropy(&bsc_joint(0.1), &["Y"], &["X"]).unwrap();
        // 0.1·log2(10) + 0.9·log2(10/9)
        assert!((h - 0.468_995_593_589_281).abs() < 1e-12);
        assert!(matches!(
            conditional_entropy(&bsc_joint(0.1), &["X"], &["X"]),
            Err(ProbError::AxisOverlap(_))
        ));
    }

    #[test]
    fn mutual_information_hand_values() {
        let i = mutual_information(&bsc_joint(0.1), &["X"], &["Y"]).unwrap();
        assert!((i - (1.0 - hb(0.1))).abs() < 1e-12);
        assert!((i - 0.531_004_406_410_719).abs() < 1e-12);
        // Y = X uniform bit, Z independent.
        let xyz = make_joint(
            vec![Axis::new("X", 2), Axis::new("Y", 2), Axis::new("Z", 2)],
            vec![0.15, 0.35, 0.0, 0.0, 0.0, 0.0, 0.15, 0.35],
        )
        .unwrap();
        assert!((conditional_mutual_information(&xyz, &["X"], &["Y"], &["Z"]).unwrap() - 1.0).abs() < 1e-12);
        assert!(conditional_mutual_information(&xyz, &["X"], &["Z"], &["Y"]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn relative_entropy_hand_values() {
        let p = bin("X", 0.5);
        let q = bin("X", 0.25);
        // 0.5·log2(2) + 0.5·log2(2/3)
        let d = relative_entropy(&p, &q).unwrap();
        assert!((d - (1.0 - 0.5 * 3f64.log2())).abs() < 1e-15);
        assert!((d - 0.2075).abs() < 1e-4);
        assert_eq!(relative_entropy(&p, &p).unwrap(), 0.0);
        assert_eq!(relative_entropy(&bin("X", 1.0), &bin("X", 0.0)).unwrap(), f64::INFINITY);
        assert!(relative_entropy(&p, &bin("Y", 0.5)).is_err());
    }

    #[test]
    fn renyi_hand_values() {
        let p = bin("X", 0.5);
        let q = bin("X", 0.25);
        // Σ p²/q = 0.25/0.25 + 0.25/0.75 = 4/3
        let d2 = renyi_divergence(&p, &q, 2.0).unwrap();
        assert!((d2 - (4.0f64 / 3.0).log2()).abs() < 1e-15);
        assert_eq!(renyi_divergence(&p, &q, 1.0).unwrap(), relative_entropy(&p, &q).unwrap());
        assert_eq!(renyi_divergence(&p, &p, 2.0).unwrap(), 0.0);
        assert!(matches!(renyi_divergence(&p, &q, 0.5), Err(ProbError::InvalidLambda(_))));
        assert_eq!(renyi_divergence(&bin("X", 0.5), &bin("X", 1.0), 3.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn renyi_near_one_keeps_precision() {
        let p = bin("X", 0.3);
        let q = bin("X", 0.6);
        let kl = relative_entropy(&p, &q).unwrap();
        let near = renyi_divergence(&p, &q, 1.0 + 1e-10).unwrap();
        assert!((near - kl).abs() < 1e-9);
    }

    #[test]
    fn conditional_renyi_composes_rows() {
        let pj = make_joint(vec![Axis::new("Z", 2), Axis::new("X", 2)], vec![0.25, 0.25, 0.1, 0.4]).unwrap();
        let qj = make_joint(vec![Axis::new("Z", 2), Axis::new("X", 2)], vec![0.1, 0.4, 0.25, 0.25]).unwrap();
        let pk = condition(&pj, &["Z"]).unwrap();
        let qk = condition(&qj, &["Z"]).unwrap();
        let r = bin("Z", 0.5);
        for lambda in [1.5, 2.0, 3.0] {
            let d1 = renyi_divergence(&bin("X", 0.5), &bin("X", 0.2), lambda).unwrap();
            let d2 = renyi_divergence(&bin("X", 0.2), &bin("X", 0.5), lambda).unwrap();
            let t = lambda - 1.0;
            let expected = (((t * d1).exp2() + (t * d2).exp2()) / 2.0).log2() / t;
            let got = conditional_renyi_divergence(&pk, &qk, &r, lambda).unwrap();
            assert!((got - expected).abs() < 1e-14, "lambda {lambda}: {got} vs {expected}");
        }
        assert_eq!(conditional_renyi_divergence(&pk, &pk, &r, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn conditional_renyi_singleton_given_matches_unconditional() {
        let pj = make_joint(vec![Axis::new("Z", 1), Axis::new("X", 3)], vec![0.2, 0.3, 0.5]).unwrap();
        let qj = make_joint(vec![Axis::new("Z", 1), Axis::new("X", 3)], vec![0.4, 0.4, 0.2]).unwrap();
        let r = make_joint(vec![Axis::new("Z", 1)], vec![1.0]).unwrap();
        let got = conditional_renyi_divergence(
            &condition(&pj, &["Z"]).unwrap(),
            &condition(&qj, &["Z"]).unwrap(),
            &r,
            2.5,
        )
        .unwrap();
        let want = renyi_divergence(&pj, &qj, 2.5).unwrap();
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn conditional_relative_entropy_from_joints() {
        let pj = make_joint(vec![Axis::new("Z", 2), Axis::new("X", 2)], vec![0.25, 0.25, 0.1, 0.4]).unwrap();
        let qj = make_joint(vec![Axis::new("Z", 2), Axis::new("X", 2)], vec![0.1, 0.4, 0.25, 0.25]).unwrap();
        let r = bin("Z", 0.3);
        let direct = relative_entropy_given(&pj, &qj, &["X"], &["Z"], &r).unwrap();
        let expected = 0.3 * relative_entropy(&bin("X", 0.5), &bin("X", 0.2)).unwrap()
            + 0.7 * relative_entropy(&bin("X", 0.2), &bin("X", 0.5)).unwrap();
        assert!((direct - expected).abs() < 1e-14);
    }

    #[test]
    fn l1_hand_values() {
        assert!((l1_distance(&bin("X", 0.5), &bin("X", 0.25)).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(l1_distance(&bin("X", 1.0), &bin("X", 0.0)).unwrap(), 2.0);
    }

    #[test]
    fn markov_residual_cases() {
        // X = Z = same bit, Y independent: chain violated.
        let bad = make_joint(
            vec![Axis::new("X", 2), Axis::new("Y", 2), Axis::new("Z", 2)],
            vec![0.25, 0.0, 0.25, 0.0, 0.0, 0.25, 0.0, 0.25],
        )
        .unwrap();
        assert!(markov_residual(&bad, &["X"], &["Y"], &["Z"]).unwrap() > 0.01);
        // r(x,y)·q(z|y)
        let r = [0.1, 0.2, 0.3, 0.4];
        let q = [[0.9, 0.1], [0.35, 0.65]];
        let mut v = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    v.push(r[2 * x + y] * q[y][z]);
                }
            }
        }
        let good = make_joint(vec![Axis::new("X", 2), Axis::new("Y", 2), Axis::new("Z", 2)], v).unwrap();
        assert!(markov_residual(&good, &["X"], &["Y"], &["Z"]).unwrap() <= 1e-12);
    }
}
