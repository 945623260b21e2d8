//! Primitivity and certified dominant eigenvalues.
//!
//! For an irreducible nonnegative matrix `M` and a positive vector `v`,
//! `min_i (Mv)_i / v_i <= λ₁ <= max_i (Mv)_i / v_i` (Collatz–Wielandt).
//! Power iteration drives the two sides together; the final bracket is
//! widened to absorb floating-point error in both the matrix entries and the
//! products.

use crate::error::{Error, Result};
use crate::gmatrix::GMatrix;
use crate::walks::check_positive;

/// Default relative bracket width.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
/// Default cap on power-iteration steps.
pub const DEFAULT_MAX_ITERATIONS: usize = 1_000_000;

/// Square boolean matrix stored as bit rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoolMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BoolMatrix {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BoolMatrix {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let n = rows.len();
        let mut b = BoolMatrix::new(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                b.set(i, j, v);
            }
        }
        Ok(b)
    }

    pub fn identity(n: usize) -> Self {
        let mut b = BoolMatrix::new(n);
        for i in 0..n {
            b.set(i, i, true);
        }
        b
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let w = &mut self.bits[i * self.words + j / 64];
        if v {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    /// Boolean product: `(AB)_ij = OR_k A_ik AND B_kj`.
    pub fn mul(&self, other: &BoolMatrix) -> BoolMatrix {
        assert_eq!(self.n, other.n, "boolean matrices of different sizes");
        let mut out = BoolMatrix::new(self.n);
        for i in 0..self.n {
            let mut acc = vec![0u64; self.words];
            for k in 0..self.n {
                if self.get(i, k) {
                    for (a, b) in acc.iter_mut().zip(other.row(k)) {
                        *a |= b;
                    }
                }
            }
            out.bits[i * self.words..(i + 1) * self.words].copy_from_slice(&acc);
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> BoolMatrix {
        let mut result = BoolMatrix::identity(self.n);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn all_true(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j)))
    }
}

/// Nonzero pattern of `g`; since coefficients are nonnegative this is the
/// pattern of `g(z)` for every positive `z`.
pub fn structure_matrix(g: &GMatrix) -> BoolMatrix {
    let rows: Vec<Vec<bool>> = g
        .entries
        .iter()
        .map(|row| row.iter().map(|p| !p.is_zero()).collect())
        .collect();
    BoolMatrix::from_rows(&rows).expect("matrix rows are square")
}

/// A nonnegative `t × t` matrix is primitive iff its `(t² − 2t + 2)`-th
/// power is positive.
pub fn is_primitive(b: &BoolMatrix) -> bool {
    let t = b.size() as u64;
    if t == 0 {
        return false;
    }
    b.pow(t * t + 2 - 2 * t).all_true()
}

/// Two-sided enclosure `lower <= λ <= upper` with its point estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifiedBound {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    pub tolerance: f64,
}

impl CertifiedBound {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn relative_width(&self) -> f64 {
        self.width() / self.value
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// Applies an increasing map to all three values.
    pub fn map_monotone(&self, f: impl Fn(f64) -> f64) -> CertifiedBound {
        CertifiedBound {
            value: f(self.value),
            lower: f(self.lower),
            upper: f(self.upper),
            ..*self
        }
    }

    /// Widens the bracket by a relative amount `rel` on both sides.
    pub fn inflate(&self, rel: f64) -> CertifiedBound {
        CertifiedBound {
            lower: self.lower * (1.0 - rel),
            upper: self.upper * (1.0 + rel),
            ..*self
        }
    }
}

/// Dense nonnegative matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct NumMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl NumMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(NumMatrix { n, data })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    fn mul_vec(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    pub fn mul(&self, other: &NumMatrix) -> NumMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        NumMatrix { n, data }
    }

    pub fn max_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Relative error bound for one length-`n` dot product of nonnegative
/// numbers: `n` roundings, doubled for safety.
fn dot_slack(n: usize) -> f64 {
    2.0 * (n as f64 + 2.0) * f64::EPSILON
}

/// Certified dominant eigenvalue of an irreducible nonnegative matrix.
pub fn dominant_eigenvalue(m: &NumMatrix, tol: f64) -> Result<CertifiedBound> {
    dominant_eigenvalue_with(m, tol, DEFAULT_MAX_ITERATIONS)
}

pub fn dominant_eigenvalue_with(m: &NumMatrix, tol: f64, max_iterations: usize) -> Result<CertifiedBound> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    if m.n == 0 {
        return Err(Error::Precondition("empty matrix".to_string()));
    }
    if m.data.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Precondition("matrix entries must be finite and nonnegative".to_string()));
    }
    let start = vec![1.0; m.n];
    match power_iteration(m, tol, max_iterations, start) {
        Err(Error::NoConvergence { .. }) => {
            // Perturbed restart breaks symmetric stalls.
            let start: Vec<f64> = (0..m.n).map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749).fract()).collect();
            power_iteration(m, tol, max_iterations, start)
        }
        other => other,
    }
}

fn power_iteration(m: &NumMatrix, tol: f64, max_iterations: usize, mut v: Vec<f64>) -> Result<CertifiedBound> {
    let slack = dot_slack(m.n);
    let mut w = vec![0.0; m.n];
    let mut best_width = f64::INFINITY;
    let mut stalled = 0usize;
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    for it in 1..=max_iterations {
        m.mul_vec(&v, &mut w);
        let mut ratio_lo = f64::INFINITY;
        let mut ratio_hi: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (a, b) in w.iter().zip(&v) {
            if *a <= 0.0 {
                return Err(Error::ZeroVector);
            }
            let r = a / b;
            ratio_lo = ratio_lo.min(r);
            ratio_hi = ratio_hi.max(r);
            scale = scale.max(*a);
        }
        if !scale.is_finite() {
            return Err(Error::EvalOverflow);
        }
        // Each ratio carries the dot-product error plus one division.
        let l = ratio_lo * (1.0 - slack);
        let h = ratio_hi * (1.0 + slack);
        // Every iterate gives a valid bracket; keep the tightest.
        lo = f64::max(lo, l);
        hi = f64::min(hi, h);
        let value = (lo * hi).sqrt();
        let width = (hi - lo) / value;
        if width <= tol {
            return Ok(CertifiedBound {
                value,
                lower: lo,
                upper: hi,
                iterations: it,
                tolerance: tol,
            });
        }
        if width < best_width * (1.0 - 1e-3) {
            best_width = width;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > 1000 {
                break;
            }
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / scale;
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iterations,
        lower: lo,
        upper: hi,
    })
}

#[derive(Clone, Debug)]
struct CompiledEntry {
    terms: Vec<(f64, Vec<u32>)>,
}

/// Numeric evaluator for one matrix: primitivity is certified once at
/// construction, and entries are compiled to floating-point terms.
#[derive(Clone, Debug)]
pub struct Evaluator {
    t: usize,
    nvars: usize,
    gap: usize,
    entries: Vec<CompiledEntry>,
    /// Relative error bound of entry evaluation.
    eval_slack: f64,
    pub tolerance: f64,
}

impl Evaluator {
    pub fn new(g: &GMatrix) -> Result<Self> {
        if !is_primitive(&structure_matrix(g)) {
            return Err(Error::NotPrimitive);
        }
        let mut entries = Vec::with_capacity(g.size() * g.size());
        let mut max_cost = 0usize;
        for p in g.entries.iter().flatten() {
            let terms: Vec<(f64, Vec<u32>)> = p
                .terms()
                .map(|(mono, c)| {
                    let cf = num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::INFINITY);
                    (cf, mono.exponents().to_vec())
                })
                .collect();
            // Coefficient conversion, one multiplication per degree, one
            // addition per term.
            let cost = terms.len() + g.step_gap() + 2;
            max_cost = max_cost.max(cost);
            entries.push(CompiledEntry { terms });
        }
        Ok(Evaluator {
            t: g.size(),
            nvars: g.num_vars(),
            gap: g.step_gap(),
            entries,
            eval_slack: 2.0 * max_cost as f64 * f64::EPSILON,
            tolerance: DEFAULT_TOLERANCE,
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn size(&self) -> usize {
        self.t
    }

    pub fn num_vars(&self) -> usize {
        self.nvars
    }

    pub fn step_gap(&self) -> usize {
        self.gap
    }

    /// Numeric `G(z)` for nonnegative `z`, together with the relative error
    /// bound of each entry.
    pub fn matrix_at(&self, z: &[f64]) -> Result<(NumMatrix, f64)> {
        if z.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: z.len(),
            });
        }
        if z.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonPositiveWeight(z.to_vec()));
        }
        let data = self
            .entries
            .iter()
            .map(|e| {
                e.terms
                    .iter()
                    .map(|(c, exps)| {
                        exps.iter()
                            .zip(z)
                            .fold(*c, |acc, (&k, &x)| (0..k).fold(acc, |a, _| a * x))
                    })
                    .sum::<f64>()
            })
            .collect::<Vec<_>>();
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::EvalOverflow);
        }
        Ok((NumMatrix { n: self.t, data }, self.eval_slack))
    }

    /// Certified `λ₁(G(z))` for strictly positive `z`.
    pub fn lambda(&self, z: &[f64]) -> Result<CertifiedBound> {
        check_positive(z, self.nvars)?;
        self.lambda_nonnegative(z)
    }

    pub(crate) fn lambda_nonnegative(&self, z: &[f64]) -> Result<CertifiedBound> {
        let (m, slack) = self.matrix_at(z)?;
        // Entry errors of relative size `slack` move λ₁ by at most that
        // factor (monotonicity and homogeneity of λ₁ in the entries).
        let b = dominant_eigenvalue(&m, self.tolerance)?;
        Ok(b.inflate(slack))
    }

    /// Certified `λ₁(G(z))^{1/(n−m)}`, an upper bound on the weighted
    /// connective constant at `z`.
    pub fn mu(&self, z: &[f64]) -> Result<CertifiedBound> {
        let gap = self.gap as f64;
        let lam = self.lambda(z)?;
        let root = lam.map_monotone(|x| x.powf(1.0 / gap));
        // powf is faithfully rounded; widen by a few ulps.
        Ok(root.inflate(4.0 * f64::EPSILON))
    }
}

/// Certified upper bound on the weighted connective constant at `z`.
pub fn mu_upper_bound(g: &GMatrix, z: &[f64]) -> Result<CertifiedBound> {
    Evaluator::new(g)?.mu(z)
}
