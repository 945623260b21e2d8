//! Sparse multivariate polynomials with arbitrary-precision integer
//! coefficients.
//!
//! Only the operations the transfer-matrix pipeline needs are provided:
//! addition, multiplication and exact division by a monomial, and
//! floating-point evaluation.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exponent vector of a monomial `z_1^e_1 ⋯ z_d^e_d`.
///
/// `Ord` follows the canonical term order: graded lexicographic with the
/// leading (highest) term first, e.g. `x^2 < x*y < y^2 < x < y < 1`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(z)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, &zi)| zi.powi(e as i32))
            .product()
    }

    fn to_text(&self, labels: &[String]) -> String {
        self.0
            .iter()
            .zip(labels)
            .filter(|(&e, _)| e > 0)
            .map(|(e, l)| format!("{l}^{e}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .degree()
            .cmp(&self.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::term(Monomial::one(nvars), 1)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::term(Monomial::var(nvars, i), 1)
    }

    pub fn term(m: Monomial, c: impl Into<BigInt>) -> Self {
        let mut p = Poly::zero(m.nvars());
        p.add_term(m, c.into());
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, merging
    /// repeated monomials.
    pub fn from_terms<I, C>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, C)>,
        C: Into<BigInt>,
    {
        let mut p = Poly::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    got: e.len(),
                });
            }
            p.add_term(Monomial(e), c.into());
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn coefficient_sum(&self) -> BigInt {
        self.terms.values().sum()
    }

    pub fn has_nonnegative_coefficients(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// Total degrees present, ascending.
    pub fn degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.terms.keys().map(Monomial::degree).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn is_homogeneous_of_degree(&self, degree: u32) -> bool {
        self.terms.keys().all(|m| m.degree() == degree)
    }

    /// Adds `c * m` in place, dropping the term if it cancels.
    pub fn add_term(&mut self, m: Monomial, c: BigInt) {
        debug_assert_eq!(m.nvars(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_nvars(&self, other: usize) -> Result<()> {
        if self.nvars != other {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: other,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Poly) -> Result<Poly> {
        self.check_nvars(other.nvars)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    /// `c * m * self`.
    pub fn mul_monomial(&self, m: &Monomial, c: impl Into<BigInt>) -> Result<Poly> {
        self.check_nvars(m.nvars())?;
        let c = c.into();
        let mut out = Poly::zero(self.nvars);
        if c.is_zero() {
            return Ok(out);
        }
        for (t, tc) in &self.terms {
            let e = t.0.iter().zip(&m.0).map(|(a, b)| a + b).collect();
            out.terms.insert(Monomial(e), tc * &c);
        }
        Ok(out)
    }

    /// Exact division by a monomial; every term must be divisible.
    pub fn div_monomial(&self, m: &Monomial) -> Result<Poly> {
        self.check_nvars(m.nvars())?;
        let mut out = Poly::zero(self.nvars);
        for (t, c) in &self.terms {
            if !m.divides(t) {
                let labels = default_labels(self.nvars);
                return Err(Error::NotDivisible {
                    term: t.to_text(&labels),
                    divisor: m.to_text(&labels),
                });
            }
            let e = t.0.iter().zip(&m.0).map(|(a, b)| a - b).collect();
            out.terms.insert(Monomial(e), c.clone());
        }
        Ok(out)
    }

    /// Evaluates at a point with nonnegative coordinates, accumulating terms
    /// in canonical order.
    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        self.check_nvars(z.len())?;
        if z.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonPositiveWeight(z.to_vec()));
        }
        let mut sum = 0.0;
        for (m, c) in &self.terms {
            let c = c.to_f64().unwrap_or(f64::INFINITY);
            sum += c * m.eval(z);
        }
        if sum.is_finite() {
            Ok(sum)
        } else {
            Err(Error::EvalOverflow)
        }
    }

    /// Canonical text form: `c * x^2 y^1 + ...`, zero exponents omitted,
    /// a bare coefficient for the constant term and `0` for the zero
    /// polynomial.
    pub fn to_text(&self, labels: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(m, c)| {
                let factors = m.to_text(labels);
                if factors.is_empty() {
                    c.to_string()
                } else {
                    format!("{c} * {factors}")
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn parse(text: &str, labels: &[String]) -> Result<Poly> {
        let nvars = labels.len();
        let bad = |msg: String| Error::Malformed(format!("polynomial `{text}`: {msg}"));
        let text = text.trim();
        let mut p = Poly::zero(nvars);
        if text == "0" {
            return Ok(p);
        }
        for term in text.split(" + ") {
            let (coef, factors) = match term.split_once(" * ") {
                Some((c, f)) => (c, Some(f)),
                None => (term, None),
            };
            let c: BigInt = coef
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad coefficient `{coef}`")))?;
            if c.is_zero() {
                return Err(bad("zero coefficient".into()));
            }
            let mut e = vec![0u32; nvars];
            if let Some(factors) = factors {
                for f in factors.split_whitespace() {
                    let (label, exp) = f
                        .split_once('^')
                        .ok_or_else(|| bad(format!("bad factor `{f}`")))?;
                    let i = labels
                        .iter()
                        .position(|l| l == label)
                        .ok_or_else(|| bad(format!("unknown variable `{label}`")))?;
                    let exp: u32 = exp
                        .parse()
                        .map_err(|_| bad(format!("bad exponent in `{f}`")))?;
                    if exp == 0 || e[i] != 0 {
                        return Err(bad(format!("non-canonical factor `{f}`")));
                    }
                    e[i] = exp;
                }
            }
            let m = Monomial(e);
            if p.terms.contains_key(&m) {
                return Err(bad("repeated monomial".into()));
            }
            p.terms.insert(m, c);
        }
        Ok(p)
    }
}

/// `z1, z2, …` labels for messages when no lattice labels are at hand.
pub fn default_labels(nvars: usize) -> Vec<String> {
    (1..=nvars).map(|i| format!("z{i}")).collect()
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text(&default_labels(self.nvars)))
    }
}
