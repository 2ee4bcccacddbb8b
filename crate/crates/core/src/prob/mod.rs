//! Dense probability tensors over named finite axes.
//!
//! Every tensor stores its axes sorted by name and its values in row-major
//! order (the last axis varies fastest). [`Factor`] is the unnormalized
//! workhorse used for intermediate products; [`JointPmf`] and [`CondKernel`]
//! add the normalization invariants. Information measures live in
//! [`measures`].

pub mod measures;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;

use serde::Serialize;
use thiserror::Error;

pub use measures::{
    conditional_entropy, conditional_mutual_information, conditional_relative_entropy,
    conditional_renyi_divergence, entropy, l1_distance, markov_residual, mutual_information,
    relative_entropy, relative_entropy_given, renyi_divergence,
};

/// Normalization tolerance for pmfs and kernel rows.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Errors raised by tensor construction and the information measures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbError {
    #[error("values sum to {sum}, expected 1 within {NORMALIZATION_TOL}")]
    NotNormalized { sum: f64 },
    #[error("row {row} sums to {sum}, expected 1 within {NORMALIZATION_TOL}")]
    RowNotNormalized { row: usize, sum: f64 },
    #[error("negative or non-finite mass {value} at flat index {index}")]
    NegativeMass { index: usize, value: f64 },
    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("unknown axis `{0}`")]
    UnknownAxis(String),
    #[error("duplicate axis `{0}`")]
    DuplicateAxis(String),
    #[error("axis `{0}` appears in more than one argument set")]
    AxisOverlap(String),
    #[error("axis mismatch: {0}")]
    AxisMismatch(String),
    #[error("axis `{0}` has an empty alphabet")]
    EmptyAlphabet(String),
    #[error("invalid Renyi order {0}; orders must satisfy lambda >= 1")]
    InvalidLambda(f64),
    #[error("conditioning event has zero mass at {} row(s) (first: {})", rows.len(), rows[0])]
    ZeroMassConditioning { rows: Vec<usize> },
    #[error("tensor with {cells} cells exceeds the budget of {budget}")]
    TooLarge { cells: usize, budget: usize },
}

/// A named finite alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Axis {
    name: String,
    size: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, size: usize) -> Self {
        Self { name: name.into(), size }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.size)
    }
}

/// Number of cells in the product alphabet of `axes`.
pub fn cell_count(axes: &[Axis]) -> usize {
    axes.iter().map(Axis::size).product()
}

fn row_major_strides(axes: &[Axis]) -> Vec<usize> {
    let mut strides = vec![1; axes.len()];
    for i in (0..axes.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * axes[i + 1].size;
    }
    strides
}

/// For every cell of `src`, the flat index of the matching cell of `tgt`.
///
/// Every axis of `tgt` must occur in `src` with the same size; axes of `src`
/// missing from `tgt` are ignored (summed over or broadcast, depending on the
/// caller).
fn projection(src: &[Axis], tgt: &[Axis]) -> Result<Vec<usize>, ProbError> {
    let tgt_strides = row_major_strides(tgt);
    let mut stride_in_tgt = vec![0usize; src.len()];
    for (t, axis) in tgt.iter().enumerate() {
        let pos = src
            .iter()
            .position(|a| a.name == axis.name)
            .ok_or_else(|| ProbError::UnknownAxis(axis.name.clone()))?;
        if src[pos].size != axis.size {
            return Err(ProbError::AxisMismatch(format!(
                "axis `{}` has size {} and {}",
                axis.name, src[pos].size, axis.size
            )));
        }
        stride_in_tgt[pos] = tgt_strides[t];
    }
    let total = cell_count(src);
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; src.len()];
    let mut idx = 0usize;
    for _ in 0..total {
        out.push(idx);
        for d in (0..src.len()).rev() {
            digits[d] += 1;
            idx += stride_in_tgt[d];
            if digits[d] < src[d].size {
                break;
            }
            idx -= stride_in_tgt[d] * src[d].size;
            digits[d] = 0;
        }
    }
    Ok(out)
}

fn lookup<'a>(axes: &'a [Axis], names: &[impl AsRef<str>]) -> Result<Vec<Axis>, ProbError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(names.len());
    for n in names {
        let n = n.as_ref();
        if !seen.insert(n) {
            continue;
        }
        let axis = axes
            .iter()
            .find(|a| a.name == n)
            .ok_or_else(|| ProbError::UnknownAxis(n.to_string()))?;
        out.push(axis.clone());
    }
    out.sort();
    Ok(out)
}

/// Sorted union of two axis lists; shared names must agree in size.
fn union_axes(a: &[Axis], b: &[Axis]) -> Result<Vec<Axis>, ProbError> {
    let mut out: Vec<Axis> = a.to_vec();
    for axis in b {
        match out.iter().find(|x| x.name == axis.name) {
            Some(x) if x.size != axis.size => {
                return Err(ProbError::AxisMismatch(format!(
                    "axis `{}` has size {} and {}",
                    axis.name, x.size, axis.size
                )))
            }
            Some(_) => {}
            None => out.push(axis.clone()),
        }
    }
    out.sort();
    Ok(out)
}

/// A nonnegative-or-arbitrary real tensor over named axes (no normalization
/// invariant). Axis order is canonical.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Factor {
    axes: Vec<Axis>,
    values: Vec<f64>,
}

impl Factor {
    /// Builds a factor from values laid out row-major in the given axis order.
    pub fn new(axes: Vec<Axis>, values: Vec<f64>) -> Result<Self, ProbError> {
        let mut seen = BTreeSet::new();
        for a in &axes {
            if a.size == 0 {
                return Err(ProbError::EmptyAlphabet(a.name.clone()));
            }
            if !seen.insert(a.name.as_str()) {
                return Err(ProbError::DuplicateAxis(a.name.clone()));
            }
        }
        let expected = cell_count(&axes);
        if values.len() != expected {
            return Err(ProbError::ShapeMismatch { expected, got: values.len() });
        }
        let mut sorted = axes.clone();
        sorted.sort();
        if sorted == axes {
            return Ok(Self { axes, values });
        }
        // Gather: for each canonical cell, find its position in the input layout.
        let map = projection(&sorted, &axes)?;
        let values = map.into_iter().map(|i| values[i]).collect();
        Ok(Self { axes: sorted, values })
    }

    /// Builds a factor by evaluating `f` on every assignment (canonical order).
    pub fn from_fn(axes: Vec<Axis>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self, ProbError> {
        let mut sorted = axes;
        sorted.sort();
        let len = cell_count(&sorted);
        let mut values = Vec::with_capacity(len);
        let mut digits = vec![0usize; sorted.len()];
        for _ in 0..len {
            values.push(f(&digits));
            for d in (0..sorted.len()).rev() {
                digits[d] += 1;
                if digits[d] < sorted[d].size {
                    break;
                }
                digits[d] = 0;
            }
        }
        Self::new(sorted, values)
    }

    /// A factor with no axes holding a single value.
    pub fn scalar(value: f64) -> Self {
        Self { axes: Vec::new(), values: vec![value] }
    }

    /// Constant factor over `axes`.
    pub fn filled(axes: Vec<Axis>, value: f64) -> Result<Self, ProbError> {
        let len = cell_count(&axes);
        Self::new(axes, vec![value; len])
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn axis(&self, name: &str) -> Option<&Axis> {
        self.axes.iter().find(|a| a.name == name)
    }

    pub fn has_axis(&self, name: &str) -> bool {
        self.axis(name).is_some()
    }

    pub fn names(&self) -> Vec<String> {
        self.axes.iter().map(|a| a.name.clone()).collect()
    }

    /// Flat index of an assignment given in canonical axis order.
    pub fn index_of(&self, assignment: &[usize]) -> usize {
        debug_assert_eq!(assignment.len(), self.axes.len());
        assignment
            .iter()
            .zip(&self.axes)
            .fold(0, |acc, (&v, a)| acc * a.size + v)
    }

    /// Assignment (canonical axis order) of a flat index.
    pub fn assignment(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.axes.len()];
        for d in (0..self.axes.len()).rev() {
            out[d] = flat % self.axes[d].size;
            flat /= self.axes[d].size;
        }
        out
    }

    /// Value at a named assignment; every axis must be given.
    pub fn get(&self, assignment: &[(&str, usize)]) -> Result<f64, ProbError> {
        let mut digits = vec![usize::MAX; self.axes.len()];
        for &(name, v) in assignment {
            let pos = self
                .axes
                .iter()
                .position(|a| a.name == name)
                .ok_or_else(|| ProbError::UnknownAxis(name.to_string()))?;
            digits[pos] = v;
        }
        if let Some(pos) = digits.iter().position(|&d| d == usize::MAX) {
            return Err(ProbError::AxisMismatch(format!(
                "assignment misses axis `{}`",
                self.axes[pos].name
            )));
        }
        Ok(self.values[self.index_of(&digits)])
    }

    /// Sums out every axis not in `keep`.
    pub fn marginal(&self, keep: &[impl AsRef<str>]) -> Result<Factor, ProbError> {
        let tgt = lookup(&self.axes, keep)?;
        if tgt.len() == self.axes.len() {
            return Ok(self.clone());
        }
        let map = projection(&self.axes, &tgt)?;
        let mut values = vec![0.0; cell_count(&tgt)];
        for (v, &t) in self.values.iter().zip(&map) {
            values[t] += v;
        }
        Ok(Factor { axes: tgt, values })
    }

    /// Sums out the listed axes.
    pub fn sum_out(&self, drop: &[impl AsRef<str>]) -> Result<Factor, ProbError> {
        for d in drop {
            if !self.has_axis(d.as_ref()) {
                return Err(ProbError::UnknownAxis(d.as_ref().to_string()));
            }
        }
        let keep: Vec<&str> = self
            .axes
            .iter()
            .map(|a| a.name.as_str())
            .filter(|n| !drop.iter().any(|d| d.as_ref() == *n))
            .collect();
        self.marginal(&keep)
    }

    /// Broadcasts onto a superset of axes.
    pub fn expand(&self, axes: &[Axis]) -> Result<Factor, ProbError> {
        let tgt = union_axes(axes, &[])?;
        let tgt = union_axes(&tgt, &self.axes)?;
        if tgt.len() == self.axes.len() {
            return Ok(self.clone());
        }
        let map = projection(&tgt, &self.axes)?;
        let values = map.into_iter().map(|i| self.values[i]).collect();
        Ok(Factor { axes: tgt, values })
    }

    /// Combines two factors cellwise over the union of their axes.
    pub fn zip_with(&self, other: &Factor, f: impl Fn(f64, f64) -> f64) -> Result<Factor, ProbError> {
        let axes = union_axes(&self.axes, &other.axes)?;
        let ma = projection(&axes, &self.axes)?;
        let mb = projection(&axes, &other.axes)?;
        let values = ma
            .iter()
            .zip(&mb)
            .map(|(&i, &j)| f(self.values[i], other.values[j]))
            .collect();
        Ok(Factor { axes, values })
    }

    /// Pointwise product over the union of axes.
    pub fn product(&self, other: &Factor) -> Result<Factor, ProbError> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Pointwise quotient with the convention x/0 = 0.
    pub fn divide(&self, other: &Factor) -> Result<Factor, ProbError> {
        self.zip_with(other, |a, b| if b == 0.0 { 0.0 } else { a / b })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Factor {
        Factor { axes: self.axes.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Renames axes; `f` returns the new name for each old name.
    pub fn rename(&self, f: impl Fn(&str) -> String) -> Result<Factor, ProbError> {
        let axes: Vec<Axis> = self.axes.iter().map(|a| Axis::new(f(&a.name), a.size)).collect();
        Factor::new(axes, self.values.clone())
    }

    /// Values laid out row-major in the order of `order`, which must be a
    /// permutation of this factor's axes.
    pub fn values_in_order(&self, order: &[Axis]) -> Result<Vec<f64>, ProbError> {
        if order.len() != self.axes.len() {
            return Err(ProbError::AxisMismatch("order is not a permutation of the axes".into()));
        }
        let map = projection(order, &self.axes)?;
        Ok(map.into_iter().map(|i| self.values[i]).collect())
    }

    /// Largest absolute cellwise difference; axes must match exactly.
    pub fn max_abs_diff(&self, other: &Factor) -> Result<f64, ProbError> {
        self.require_same_axes(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub(crate) fn require_same_axes(&self, other: &Factor) -> Result<(), ProbError> {
        if self.axes != other.axes {
            return Err(ProbError::AxisMismatch(format!(
                "[{}] vs [{}]",
                join_axes(&self.axes),
                join_axes(&other.axes)
            )));
        }
        Ok(())
    }

    pub(crate) fn into_values(self) -> Vec<f64> {
        self.values
    }
}

fn join_axes(axes: &[Axis]) -> String {
    axes.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn check_mass(values: &[f64]) -> Result<(), ProbError> {
    for (index, &value) in values.iter().enumerate() {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(ProbError::NegativeMass { index, value });
        }
    }
    Ok(())
}

/// A normalized joint probability mass function.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct JointPmf(Factor);

impl JointPmf {
    /// Validating constructor (values row-major in the given axis order).
    pub fn new(axes: Vec<Axis>, values: Vec<f64>) -> Result<Self, ProbError> {
        Self::from_factor(Factor::new(axes, values)?)
    }

    /// Validates nonnegativity and normalization of a factor.
    pub fn from_factor(f: Factor) -> Result<Self, ProbError> {
        check_mass(&f.values)?;
        let sum = f.total();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ProbError::NotNormalized { sum });
        }
        Ok(Self(f))
    }

    /// Normalizes a nonnegative factor with positive total mass.
    pub fn normalized(f: Factor) -> Result<Self, ProbError> {
        check_mass(&f.values)?;
        let sum = f.total();
        if !(sum > 0.0) {
            return Err(ProbError::NotNormalized { sum });
        }
        Ok(Self(f.map(|v| v / sum)))
    }

    /// Uniform distribution over `axes`.
    pub fn uniform(axes: Vec<Axis>) -> Result<Self, ProbError> {
        let len = cell_count(&axes);
        Self::new(axes, vec![1.0 / len as f64; len])
    }

    /// Point mass at a canonical-order assignment.
    pub fn point_mass(axes: Vec<Axis>, assignment: &[usize]) -> Result<Self, ProbError> {
        let mut f = Factor::filled(axes, 0.0)?;
        let idx = f.index_of(assignment);
        f.values[idx] = 1.0;
        Self::from_factor(f)
    }

    /// Marginal on `keep`.
    pub fn marginalize(&self, keep: &[impl AsRef<str>]) -> Result<JointPmf, ProbError> {
        Ok(JointPmf(self.0.marginal(keep)?))
    }

    pub fn factor(&self) -> &Factor {
        &self.0
    }

    pub fn into_factor(self) -> Factor {
        self.0
    }

    /// Product with independent pmf over disjoint axes.
    pub fn independent(&self, other: &JointPmf) -> Result<JointPmf, ProbError> {
        for a in other.axes() {
            if self.has_axis(&a.name) {
                return Err(ProbError::AxisOverlap(a.name.clone()));
            }
        }
        Ok(JointPmf(self.0.product(&other.0)?))
    }

    /// Renames axes (see [`Factor::rename`]).
    pub fn rename(&self, f: impl Fn(&str) -> String) -> Result<JointPmf, ProbError> {
        Ok(JointPmf(self.0.rename(f)?))
    }
}

impl Deref for JointPmf {
    type Target = Factor;
    fn deref(&self) -> &Factor {
        &self.0
    }
}

/// Validating constructor for a joint pmf.
pub fn make_joint(axes: Vec<Axis>, values: Vec<f64>) -> Result<JointPmf, ProbError> {
    JointPmf::new(axes, values)
}

/// Marginal of `p` on `keep`.
pub fn marginalize(p: &JointPmf, keep: &[impl AsRef<str>]) -> Result<JointPmf, ProbError> {
    p.marginalize(keep)
}

/// A row-stochastic map from assignments of `from` axes to pmfs over `to` axes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CondKernel {
    from: Vec<Axis>,
    to: Vec<Axis>,
    rows: Vec<f64>,
}

impl CondKernel {
    /// Rows indexed by canonical `from` assignment, columns by canonical `to`
    /// assignment. The axis lists are sorted by the constructor, so callers
    /// passing unsorted lists must lay values out in their own order; use
    /// [`CondKernel::from_factor`] for arbitrary layouts.
    pub fn new(from: Vec<Axis>, to: Vec<Axis>, rows: Vec<f64>) -> Result<Self, ProbError> {
        let mut all = from.clone();
        all.extend(to.iter().cloned());
        let f = Factor::new(all, rows)?;
        let from_names: Vec<String> = from.iter().map(|a| a.name.clone()).collect();
        Self::from_factor(&f, &from_names)
    }

    /// Reads a kernel from a factor holding `k(to | from)` in every cell.
    pub fn from_factor(f: &Factor, from: &[impl AsRef<str>]) -> Result<Self, ProbError> {
        let from_axes = lookup(f.axes(), from)?;
        let to_axes: Vec<Axis> = f
            .axes()
            .iter()
            .filter(|a| !from_axes.iter().any(|b| b.name == a.name))
            .cloned()
            .collect();
        let mut order = from_axes.clone();
        order.extend(to_axes.iter().cloned());
        let rows = f.values_in_order(&order)?;
        check_mass(&rows)?;
        let width = cell_count(&to_axes);
        for (row, chunk) in rows.chunks(width).enumerate() {
            let sum: f64 = chunk.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(ProbError::RowNotNormalized { row, sum });
            }
        }
        Ok(Self { from: from_axes, to: to_axes, rows })
    }

    pub fn from_axes(&self) -> &[Axis] {
        &self.from
    }

    pub fn to_axes(&self) -> &[Axis] {
        &self.to
    }

    pub fn n_from(&self) -> usize {
        cell_count(&self.from)
    }

    pub fn n_to(&self) -> usize {
        cell_count(&self.to)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.n_to();
        &self.rows[i * w..(i + 1) * w]
    }

    /// All rows, flattened.
    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    /// The kernel as a factor over `from ∪ to`.
    pub fn to_factor(&self) -> Factor {
        let mut order = self.from.clone();
        order.extend(self.to.iter().cloned());
        Factor::new(order, self.rows.clone()).expect("kernel axes are valid")
    }

    /// Joint pmf `p(from)·k(to|from)`; `p` must be over exactly the `from` axes.
    pub fn compose(&self, p: &JointPmf) -> Result<JointPmf, ProbError> {
        if p.axes() != self.from.as_slice() {
            return Err(ProbError::AxisMismatch(format!(
                "input pmf over [{}], kernel expects [{}]",
                join_axes(p.axes()),
                join_axes(&self.from)
            )));
        }
        JointPmf::from_factor(p.factor().product(&self.to_factor())?)
    }
}

/// What [`condition_with`] does at conditioning assignments of zero mass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroMassPolicy {
    /// Return [`ProbError::ZeroMassConditioning`] listing the rows.
    Reject,
    /// Substitute the uniform row.
    Uniform,
    /// Substitute a point mass on the first target assignment.
    PointMass,
}

/// Conditional kernel of the remaining axes given `given`.
pub fn condition(p: &JointPmf, given: &[impl AsRef<str>]) -> Result<CondKernel, ProbError> {
    condition_with(p, given, ZeroMassPolicy::Reject).map(|(k, _)| k)
}

/// Like [`condition`] but applies `policy` to zero-mass rows and reports
/// which rows were substituted.
pub fn condition_with(
    p: &JointPmf,
    given: &[impl AsRef<str>],
    policy: ZeroMassPolicy,
) -> Result<(CondKernel, Vec<usize>), ProbError> {
    let from = lookup(p.axes(), given)?;
    let to: Vec<Axis> =
        p.axes().iter().filter(|a| !from.iter().any(|b| b.name == a.name)).cloned().collect();
    let mut order = from.clone();
    order.extend(to.iter().cloned());
    let mut rows = p.values_in_order(&order)?;
    let width = cell_count(&to);
    let mut zero_rows = Vec::new();
    for (r, chunk) in rows.chunks_mut(width).enumerate() {
        let sum: f64 = chunk.iter().sum();
        if sum > 0.0 {
            chunk.iter_mut().for_each(|v| *v /= sum);
            continue;
        }
        zero_rows.push(r);
        match policy {
            ZeroMassPolicy::Reject => {}
            ZeroMassPolicy::Uniform => chunk.iter_mut().for_each(|v| *v = 1.0 / width as f64),
            ZeroMassPolicy::PointMass => {
                chunk.iter_mut().for_each(|v| *v = 0.0);
                chunk[0] = 1.0;
            }
        }
    }
    if policy == ZeroMassPolicy::Reject && !zero_rows.is_empty() {
        return Err(ProbError::ZeroMassConditioning { rows: zero_rows });
    }
    Ok((CondKernel { from, to, rows }, zero_rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy(values: [f64; 4]) -> JointPmf {
        make_joint(vec![Axis::new("X", 2), Axis::new("Y", 2)], values.to_vec()).unwrap()
    }

    #[test]
    fn make_joint_validates() {
        let u = make_joint(vec![Axis::new("X", 2)], vec![0.5, 0.5]).unwrap();
        assert_eq!(u.values(), &[0.5, 0.5]);
        assert!(matches!(
            make_joint(vec![Axis::new("X", 2)], vec![0.5, 0.6]),
            Err(ProbError::NotNormalized { .. })
        ));
        assert!(matches!(
            make_joint(vec![Axis::new("X", 2)], vec![1.5, -0.5]),
            Err(ProbError::NegativeMass { index: 1, .. })
        ));
        assert!(matches!(
            make_joint(vec![Axis::new("X", 3)], vec![0.5, 0.5]),
            Err(ProbError::ShapeMismatch { expected: 3, got: 2 })
        ));
        let pair = xy([0.25; 4]);
        assert_eq!(pair.marginalize(&["Y"]).unwrap().values(), &[0.5, 0.5]);
    }

    #[test]
    fn canonical_order_permutes_values() {
        // Given as (Y, X); canonical is (X, Y).
        let p = make_joint(vec![Axis::new("Y", 2), Axis::new("X", 3)], vec![0.1, 0.2, 0.3, 0.0, 0.15, 0.25])
            .unwrap();
        assert_eq!(p.names(), vec!["X", "Y"]);
        assert_eq!(p.get(&[("X", 1), ("Y", 1)]).unwrap(), 0.15);
        assert_eq!(p.get(&[("X", 2), ("Y", 0)]).unwrap(), 0.3);
    }

    #[test]
    fn marginal_of_hand_example() {
        let p = xy([0.1, 0.2, 0.3, 0.4]);
        let m = p.marginalize(&["X"]).unwrap();
        assert!((m.values()[0] - 0.3).abs() < 1e-15);
        assert!((m.values()[1] - 0.7).abs() < 1e-15);
        assert!(matches!(p.marginalize(&["Z"]), Err(ProbError::UnknownAxis(_))));
    }

    #[test]
    fn diagonal_marginal_is_uniform() {
        let p = xy([0.5, 0.0, 0.0, 0.5]);
        assert_eq!(p.marginalize(&["Y"]).unwrap().values(), &[0.5, 0.5]);
    }

    #[test]
    fn condition_rows_hand_example() {
        let k = condition(&xy([0.1, 0.2, 0.3, 0.4]), &["X"]).unwrap();
        assert!((k.row(0)[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((k.row(0)[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((k.row(1)[0] - 3.0 / 7.0).abs() < 1e-15);
        assert!((k.row(1)[1] - 4.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn condition_identity_and_independence() {
        let k = condition(&xy([0.5, 0.0, 0.0, 0.5]), &["X"]).unwrap();
        assert_eq!(k.rows(), &[1.0, 0.0, 0.0, 1.0]);
        let p = make_joint(
            vec![Axis::new("X", 2), Axis::new("Y", 3)],
            vec![0.3 * 0.2, 0.3 * 0.5, 0.3 * 0.3, 0.7 * 0.2, 0.7 * 0.5, 0.7 * 0.3],
        )
        .unwrap();
        let k = condition(&p, &["X"]).unwrap();
        for r in 0..2 {
            for (a, b) in k.row(r).iter().zip([0.2, 0.5, 0.3]) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_mass_rows_are_flagged_or_substituted() {
        let p = xy([0.5, 0.5, 0.0, 0.0]);
        match condition(&p, &["X"]) {
            Err(ProbError::ZeroMassConditioning { rows }) => assert_eq!(rows, vec![1]),
            other => panic!("unexpected {other:?}"),
        }
        let (k, rows) = condition_with(&p, &["X"], ZeroMassPolicy::Uniform).unwrap();
        assert_eq!(rows, vec![1]);
        assert_eq!(k.row(1), &[0.5, 0.5]);
        let (k, _) = condition_with(&p, &["X"], ZeroMassPolicy::PointMass).unwrap();
        assert_eq!(k.row(1), &[1.0, 0.0]);
    }

    #[test]
    fn kernel_compose_round_trip() {
        let p = xy([0.1, 0.2, 0.3, 0.4]);
        let k = condition(&p, &["X"]).unwrap();
        let back = k.compose(&p.marginalize(&["X"]).unwrap()).unwrap();
        assert!(back.max_abs_diff(&p).unwrap() < 1e-15);
    }

    #[test]
    fn kernel_rejects_bad_rows() {
        let err = CondKernel::new(vec![Axis::new("X", 2)], vec![Axis::new("Y", 2)], vec![0.5, 0.4, 0.5, 0.5]);
        assert!(matches!(err, Err(ProbError::RowNotNormalized { row: 0, .. })));
    }

    #[test]
    fn expand_and_product_broadcast() {
        let a = Factor::new(vec![Axis::new("A", 2)], vec![1.0, 2.0]).unwrap();
        let b = Factor::new(vec![Axis::new("B", 3)], vec![1.0, 10.0, 100.0]).unwrap();
        let ab = a.product(&b).unwrap();
        assert_eq!(ab.values(), &[1.0, 10.0, 100.0, 2.0, 20.0, 200.0]);
        let e = a.expand(&[Axis::new("B", 3)]).unwrap();
        assert_eq!(e.values(), &[1.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
        assert!(a.product(&Factor::new(vec![Axis::new("A", 3)], vec![0.0; 3]).unwrap()).is_err());
    }
}
