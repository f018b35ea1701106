//! Edge functions: odd-degree polynomials vanishing at the origin.
//!
//! The admissible class asks for four things of `f`: analytic on the reals,
//! `f(0) = 0`, at least one Taylor coefficient of order above one, and range
//! equal to the whole real line. Polynomials make the first automatic; the
//! last is decided from the parity of the degree, never numerically.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Dag, EdgeKey, NodeId};

/// Largest admissible polynomial degree.
pub const DEFAULT_DEGREE_CAP: usize = 9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FunctionError {
    #[error("non-finite argument {0}")]
    NonFinite(f64),
    #[error("inversion is only supported for odd monomials a*x^n")]
    InversionUnsupported,
    #[error("degree {0} is not an odd integer >= 3")]
    BadDegree(usize),
}

/// The first admissibility property a function fails.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassViolation {
    #[error("coefficient a_{index} is not finite")]
    NonFiniteCoefficient { index: usize },
    #[error("f(0) = {0} but must vanish at the origin")]
    ZeroViolation(f64),
    #[error("no nonzero coefficient of order above one (function is linear)")]
    PurelyLinear,
    #[error("degree {0} is even or the leading coefficient vanishes, so the range is not the real line")]
    NotSurjective(usize),
    #[error("degree {degree} exceeds the cap of {cap}")]
    DegreeCap { degree: usize, cap: usize },
}

/// Polynomial `sum_n a_n x^n`, stored with `a_0` at index 0 and no trailing zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFunction {
    taylor: Vec<f64>,
}

impl EdgeFunction {
    /// From `a_1..a_d`; the constant term is zero.
    pub fn new(coefficients: impl Into<Vec<f64>>) -> Self {
        let mut taylor = vec![0.0];
        taylor.extend(coefficients.into());
        Self::from_taylor(taylor)
    }

    /// From `a_0..a_d`.
    pub fn from_taylor(taylor: impl Into<Vec<f64>>) -> Self {
        let mut taylor = taylor.into();
        if taylor.is_empty() {
            taylor.push(0.0);
        }
        while taylor.len() > 1 && taylor[taylor.len() - 1] == 0.0 {
            taylor.pop();
        }
        EdgeFunction { taylor }
    }

    pub fn monomial(coefficient: f64, power: usize) -> Self {
        let mut taylor = vec![0.0; power + 1];
        taylor[power] = coefficient;
        Self::from_taylor(taylor)
    }

    /// `a_1..a_d`.
    pub fn coefficients(&self) -> &[f64] {
        &self.taylor[1..]
    }

    pub fn taylor(&self) -> &[f64] {
        &self.taylor
    }

    pub fn constant(&self) -> f64 {
        self.taylor[0]
    }

    pub fn degree(&self) -> usize {
        self.taylor.len() - 1
    }

    /// Horner evaluation without argument checks; non-finite values propagate.
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        self.taylor.iter().rev().fold(0.0, |acc, &a| acc * x + a)
    }

    #[inline]
    pub fn apply_derivative(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for n in (1..self.taylor.len()).rev() {
            acc = acc * x + n as f64 * self.taylor[n];
        }
        acc
    }

    pub fn eval(&self, x: f64) -> Result<f64, FunctionError> {
        if !x.is_finite() {
            return Err(FunctionError::NonFinite(x));
        }
        Ok(self.apply(x))
    }

    pub fn derivative(&self, x: f64) -> Result<f64, FunctionError> {
        if !x.is_finite() {
            return Err(FunctionError::NonFinite(x));
        }
        Ok(self.apply_derivative(x))
    }

    pub fn validate_class(&self) -> Result<(), ClassViolation> {
        self.validate_class_with_cap(DEFAULT_DEGREE_CAP)
    }

    pub fn validate_class_with_cap(&self, cap: usize) -> Result<(), ClassViolation> {
        if let Some(index) = self.taylor.iter().position(|a| !a.is_finite()) {
            return Err(ClassViolation::NonFiniteCoefficient { index });
        }
        if self.taylor[0] != 0.0 {
            return Err(ClassViolation::ZeroViolation(self.taylor[0]));
        }
        if self.taylor.iter().skip(2).all(|&a| a == 0.0) {
            return Err(ClassViolation::PurelyLinear);
        }
        // Trailing zeros are trimmed, so the leading coefficient is nonzero here.
        let degree = self.degree();
        if degree % 2 == 0 {
            return Err(ClassViolation::NotSurjective(degree));
        }
        if degree > cap {
            return Err(ClassViolation::DegreeCap { degree, cap });
        }
        Ok(())
    }

    /// `Some((a, n))` if the function is exactly `a x^n`.
    pub fn as_monomial(&self) -> Option<(f64, usize)> {
        let d = self.degree();
        let a = self.taylor[d];
        (a != 0.0 && self.taylor[..d].iter().all(|&c| c == 0.0)).then_some((a, d))
    }

    /// Real inverse of an odd monomial: `sign(y/a) |y/a|^(1/n)`.
    pub fn invert_monomial(&self, y: f64) -> Result<f64, FunctionError> {
        let (a, n) = self.as_monomial().ok_or(FunctionError::InversionUnsupported)?;
        if n % 2 == 0 {
            return Err(FunctionError::InversionUnsupported);
        }
        if !y.is_finite() {
            return Err(FunctionError::NonFinite(y));
        }
        let r = y / a;
        Ok(if n == 3 { r.cbrt() } else { r.signum() * r.abs().powf(1.0 / n as f64) })
    }

    /// `gamma * f(x)`.
    pub fn scaled(&self, gamma: f64) -> Self {
        Self::from_taylor(self.taylor.iter().map(|a| a * gamma).collect::<Vec<_>>())
    }

    /// `f(c x)`, i.e. `a_n <- a_n c^n`.
    pub fn precomposed_scale(&self, c: f64) -> Self {
        let mut p = 1.0;
        let taylor = self
            .taylor
            .iter()
            .map(|a| {
                let v = a * p;
                p *= c;
                v
            })
            .collect::<Vec<_>>();
        Self::from_taylor(taylor)
    }

    /// `self(inner(x))` as a polynomial.
    pub fn compose(&self, inner: &EdgeFunction) -> Self {
        let mut result = vec![0.0];
        for &a in self.taylor.iter().rev() {
            result = poly_mul(&result, &inner.taylor);
            result[0] += a;
        }
        Self::from_taylor(result)
    }
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (j, &b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

impl fmt::Display for EdgeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, &a) in self.taylor.iter().enumerate().rev() {
            if a == 0.0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if a < 0.0 { '-' } else { '+' })?;
            } else if a < 0.0 {
                write!(f, "-")?;
            }
            first = false;
            let m = a.abs();
            match n {
                0 => write!(f, "{m}")?,
                1 if m == 1.0 => write!(f, "x")?,
                1 => write!(f, "{m}x")?,
                _ if m == 1.0 => write!(f, "x^{n}")?,
                _ => write!(f, "{m}x^{n}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct FunctionRepr {
    #[serde(default, skip_serializing_if = "is_zero")]
    constant: f64,
    coefficients: Vec<f64>,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl Serialize for EdgeFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FunctionRepr { constant: self.constant(), coefficients: self.coefficients().to_vec() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for EdgeFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = FunctionRepr::deserialize(d)?;
        let mut taylor = vec![r.constant];
        taylor.extend(r.coefficients);
        Ok(EdgeFunction::from_taylor(taylor))
    }
}

/// Seeded random member of the class: every coefficient `a_1..a_d` has
/// magnitude uniform in `[0.1, 2]` and a random sign.
pub fn random_function(seed: u64, degree: usize) -> Result<EdgeFunction, FunctionError> {
    if degree < 3 || degree % 2 == 0 {
        return Err(FunctionError::BadDegree(degree));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coefficients: Vec<f64> = (0..degree)
        .map(|_| {
            let m = rng.gen_range(0.1..=2.0);
            if rng.gen_bool(0.5) { m } else { -m }
        })
        .collect();
    Ok(EdgeFunction::new(coefficients))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FunctionSetError {
    #[error("edge {tail} -> {head} has no function")]
    Missing { head: NodeId, tail: NodeId },
    #[error("function given for {tail} -> {head}, which is not an edge")]
    Extra { head: NodeId, tail: NodeId },
    #[error("f_{{{head},{tail}}}: {violation}")]
    Class { head: NodeId, tail: NodeId, violation: ClassViolation },
}

/// One function per edge, keyed by `(head, tail)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FunctionSet {
    functions: BTreeMap<EdgeKey, EdgeFunction>,
}

impl FunctionSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fills every edge of `dag` with `make(edge_index, key)`.
    pub fn for_dag(dag: &Dag, mut make: impl FnMut(usize, EdgeKey) -> EdgeFunction) -> Self {
        let functions =
            dag.edges().iter().enumerate().map(|(k, e)| (e.key(), make(k, e.key()))).collect();
        FunctionSet { functions }
    }

    /// Independent seeded random functions of the given odd degree on every edge.
    pub fn random(dag: &Dag, seed: u64, degree: usize) -> Result<Self, FunctionError> {
        let mut functions = BTreeMap::new();
        for (k, e) in dag.edges().iter().enumerate() {
            let edge_seed = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64 + 1);
            functions.insert(e.key(), random_function(edge_seed, degree)?);
        }
        Ok(FunctionSet { functions })
    }

    /// Inserts `f_{head,tail}`, returning the previous function if any.
    pub fn insert(
        &mut self,
        head: impl Into<NodeId>,
        tail: impl Into<NodeId>,
        f: EdgeFunction,
    ) -> Option<EdgeFunction> {
        self.functions.insert((head.into(), tail.into()), f)
    }

    pub fn with(mut self, head: usize, tail: usize, f: EdgeFunction) -> Self {
        self.insert(head, tail, f);
        self
    }

    pub fn get(&self, head: NodeId, tail: NodeId) -> Option<&EdgeFunction> {
        self.functions.get(&(head, tail))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EdgeKey, &EdgeFunction)> {
        self.functions.iter()
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Keys must be exactly the edges of `dag` and each function admissible.
    pub fn validate(&self, dag: &Dag) -> Result<(), FunctionSetError> {
        self.validate_with_cap(dag, DEFAULT_DEGREE_CAP)
    }

    pub fn validate_with_cap(&self, dag: &Dag, cap: usize) -> Result<(), FunctionSetError> {
        for e in dag.edges() {
            let f = self
                .functions
                .get(&e.key())
                .ok_or(FunctionSetError::Missing { head: e.head, tail: e.tail })?;
            f.validate_class_with_cap(cap).map_err(|violation| FunctionSetError::Class {
                head: e.head,
                tail: e.tail,
                violation,
            })?;
        }
        if let Some(&(head, tail)) = self.functions.keys().find(|(h, t)| dag.edge(*h, *t).is_none()) {
            return Err(FunctionSetError::Extra { head, tail });
        }
        Ok(())
    }

    /// Edges on which the two sets differ.
    pub fn differing_edges(&self, other: &FunctionSet) -> Vec<EdgeKey> {
        let mut keys: Vec<EdgeKey> = self.functions.keys().chain(other.functions.keys()).copied().collect();
        keys.sort();
        keys.dedup();
        keys.into_iter().filter(|k| self.functions.get(k) != other.functions.get(k)).collect()
    }
}

#[derive(Serialize)]
struct EntryRef<'a> {
    head: NodeId,
    tail: NodeId,
    #[serde(flatten)]
    function: &'a EdgeFunction,
}

impl Serialize for FunctionSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.functions.iter().map(|(&(head, tail), function)| EntryRef { head, tail, function }))
    }
}
