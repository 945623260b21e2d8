//! Certified bounds on anchored sums of weighted self-avoiding trails, and
//! the Kotecký–Preiss criterion for a gas of edge-disjoint circuits on the
//! square lattice with horizontal weight `ε` and vertical weight `α`.
//!
//! The anchored sum `Σ_{ℓ≥1} c_ℓ(z)`, with `c_ℓ` the largest weighted count
//! of ℓ-step trails from any vertex class, is split into lengths `ℓ ≤ L`,
//! enumerated exactly, and a tail bounded through powers of the numeric
//! transfer matrix together with submultiplicativity
//! `c_{a+b} ≤ c_a · c_b`.

use std::fmt;

use crate::error::{Error, Result};
use crate::gmatrix::GMatrix;
use crate::lattice::LatticeSpec;
use crate::poly::Poly;
use crate::scan::positive_directions;
use crate::spectral::{Evaluator, NumMatrix};
use crate::walks::{length_polynomials, Mode, DEFAULT_BUDGET};

/// Default cap on the block length `q₀` searched for the tail.
pub const DEFAULT_MAX_BLOCKS: usize = 64;

/// Relative widening applied to floating-point results that feed the tail
/// bound; far above the accumulated rounding of the few hundred operations
/// involved.
const ROUNDING: f64 = 1e-12;

/// Number of transfer-matrix powers summed explicitly in the tail before
/// switching to the geometric bound.
const EXPLICIT_HORIZON: usize = 512;

#[inline]
fn up(x: f64) -> f64 {
    x * (1.0 + ROUNDING)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KPInstance {
    pub epsilon: f64,
    pub alpha: f64,
    pub kp_t: f64,
}

impl KPInstance {
    pub fn new(epsilon: f64, alpha: f64, kp_t: f64) -> Result<Self> {
        if !(kp_t > 0.0 && kp_t.is_finite()) {
            return Err(Error::Precondition(format!("t must be positive, got {kp_t}")));
        }
        if !epsilon.is_finite() || !alpha.is_finite() {
            return Err(Error::Precondition("ε and α must be finite".to_string()));
        }
        Ok(KPInstance { epsilon, alpha, kp_t })
    }

    /// `(|ε| e^t, |α| e^t)`, rounded upward.
    pub fn weights(&self) -> Vec<f64> {
        let e = up(self.kp_t.exp());
        vec![up(self.epsilon.abs() * e), up(self.alpha.abs() * e)]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedAnchoredBound {
    /// `Σ_{ℓ=1}^{L} c_ℓ(z)` from enumeration.
    pub exact_partial: f64,
    /// Upper bound on the lengths beyond `L`, plus rounding allowance.
    pub tail_bound: f64,
    pub total: f64,
    pub max_len: usize,
    pub converged: bool,
    /// Block length `q₀` with max row sum `ρ < 1` of `G^{q₀}`.
    pub blocks: Option<usize>,
    pub rho: f64,
    /// Point at which the tail was bounded.
    pub tail_point: Vec<f64>,
}

/// Enumerated trail polynomials and the transfer matrix needed to bound
/// anchored trail sums; reusable across many weight points.
#[derive(Clone, Debug)]
pub struct AnchoredSat {
    ev: Evaluator,
    /// `polys[k][ℓ]` for vertex class `k`, `ℓ = 0..=L`.
    polys: Vec<Vec<Poly>>,
    class_sizes: Vec<u64>,
    class_weights: Vec<Vec<u32>>,
    m: usize,
    gap: usize,
    max_len: usize,
    max_terms: usize,
}

impl AnchoredSat {
    /// Enumerates trails up to length `max_len` and compiles `g`, which must
    /// be a primitive trail matrix of `lattice`.
    pub fn new(lattice: &LatticeSpec, g: &GMatrix, max_len: usize) -> Result<Self> {
        if g.mode != Mode::Sat {
            return Err(Error::Precondition("anchored trail sums need a trail (sat) matrix".to_string()));
        }
        if g.lattice_name != lattice.name()
            || g.scheme != lattice.scheme()
            || g.num_vars() != lattice.num_edge_classes()
        {
            return Err(Error::Precondition(format!(
                "matrix was built for {}/{}, not {}/{}",
                g.lattice_name,
                g.scheme,
                lattice.name(),
                lattice.scheme()
            )));
        }
        let gap = g.step_gap();
        if max_len < g.m.max(gap - 1) || max_len == 0 {
            return Err(Error::Precondition(format!(
                "L = {max_len} must be at least max(1, m, n − m − 1)"
            )));
        }
        let ev = Evaluator::new(g)?;
        let polys = (0..lattice.num_vertex_classes())
            .map(|k| length_polynomials(lattice, k, max_len, Mode::Sat, DEFAULT_BUDGET))
            .collect::<Result<Vec<_>>>()?;
        let max_terms = polys.iter().flatten().map(Poly::num_terms).max().unwrap_or(0);
        Ok(AnchoredSat {
            ev,
            polys,
            class_sizes: g.partition.classes().iter().map(|c| c.size).collect(),
            class_weights: g
                .partition
                .classes()
                .iter()
                .map(|c| c.weight.exponents().to_vec())
                .collect(),
            m: g.m,
            gap,
            max_len,
            max_terms,
        })
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.ev
    }

    /// Trail polynomials from class `k` by length.
    pub fn polynomials(&self, k: usize) -> &[Poly] {
        &self.polys[k]
    }

    fn check_point(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.ev.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.ev.num_vars(),
                got: z.len(),
            });
        }
        if z.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonPositiveWeight(z.to_vec()));
        }
        Ok(())
    }

    /// `max_k` of the weighted count of ℓ-step trails from class `k` whose
    /// edge-class counts are at least `min_exponents`.
    fn length_value(&self, l: usize, z: &[f64], min_exponents: &[u32]) -> Result<f64> {
        let mut best: f64 = 0.0;
        for polys in &self.polys {
            let p = &polys[l];
            let v = if min_exponents.iter().all(|&e| e == 0) {
                p.eval(z)?
            } else {
                let kept = p
                    .terms()
                    .filter(|(mono, _)| mono.exponents().iter().zip(min_exponents).all(|(a, b)| a >= b))
                    .map(|(mono, c)| (mono.exponents().to_vec(), c.clone()));
                Poly::from_terms(p.nvars(), kept)?.eval(z)?
            };
            best = best.max(v);
        }
        Ok(best)
    }

    /// `Σ_{ℓ=1}^{L} c_ℓ(z)`, summed in increasing `ℓ`.
    pub fn exact_partial(&self, z: &[f64]) -> Result<f64> {
        self.check_point(z)?;
        let zero = vec![0; z.len()];
        let mut sum = 0.0;
        for l in 1..=self.max_len {
            sum += self.length_value(l, z, &zero)?;
        }
        Ok(sum)
    }

    /// Rigorous upper bound on `Σ_{ℓ≥1} c_ℓ(z)` for strictly positive `z`
    /// with `λ₁(G(z)) < 1`.
    pub fn bound(&self, z: &[f64], max_blocks: usize) -> Result<CertifiedAnchoredBound> {
        self.check_point(z)?;
        if z.iter().any(|v| *v <= 0.0) {
            return Err(Error::NonPositiveWeight(z.to_vec()));
        }
        let lam = self.ev.lambda(z)?;
        if lam.upper >= 1.0 {
            return Err(Error::Precondition(format!(
                "λ₁ at the weight point is not certified below 1 (upper bound {})",
                lam.upper
            )));
        }
        self.restricted_bound(z, &vec![0; z.len()], z, max_blocks)
    }

    /// Upper bound on the anchored sum restricted to trails using at least
    /// `min_exponents[i]` edges of each class `i`, for `z ≥ 0`.
    ///
    /// Lengths up to `L` are enumerated with the restriction applied. The
    /// tail is bounded at an auxiliary point `tail_point ≥ z`: a restricted
    /// trail with counts `e` satisfies
    /// `z^e ≤ Π_i (z_i / z'_i)^{min_i} · z'^e`, so the unrestricted tail at
    /// `z'` times that factor bounds the restricted tail at `z`.
    pub fn restricted_bound(
        &self,
        z: &[f64],
        min_exponents: &[u32],
        tail_point: &[f64],
        max_blocks: usize,
    ) -> Result<CertifiedAnchoredBound> {
        self.check_point(z)?;
        self.check_point(tail_point)?;
        if min_exponents.len() != z.len() {
            return Err(Error::DimensionMismatch {
                expected: z.len(),
                got: min_exponents.len(),
            });
        }
        if z.iter().zip(tail_point).any(|(a, b)| a > b || *b <= 0.0) {
            return Err(Error::Precondition("tail point must be positive and dominate z".to_string()));
        }
        let mut exact = 0.0;
        for l in 1..=self.max_len {
            exact += self.length_value(l, z, min_exponents)?;
        }
        let tail = self.tail(tail_point, max_blocks)?;
        let (converged, blocks, rho, tail_value) = match tail {
            Some((q0, rho, value)) => (true, Some(q0), rho, value),
            None => (false, None, f64::NAN, f64::INFINITY),
        };
        let mut factor = 1.0;
        for ((a, b), &e) in z.iter().zip(tail_point).zip(min_exponents) {
            factor *= (up(a / b)).min(1.0).powi(e as i32);
        }
        let scaled_tail = if factor == 0.0 { 0.0 } else { up(factor * tail_value) };
        // Rounding of the enumerated part: one multiplication per degree and
        // one addition per term and per length.
        let ops = (self.max_len + self.max_terms + 4) as f64;
        let allowance = 4.0 * ops * f64::EPSILON * (exact + scaled_tail);
        let tail_bound = up(scaled_tail + allowance);
        Ok(CertifiedAnchoredBound {
            exact_partial: exact,
            tail_bound,
            total: exact + tail_bound,
            max_len: self.max_len,
            converged,
            blocks,
            rho,
            tail_point: tail_point.to_vec(),
        })
    }

    /// Upper bound on `Σ_{ℓ>L} c_ℓ(z)`, or `None` when no block length up to
    /// `max_blocks` contracts.
    ///
    /// With `U = G(z)`, `a_r = |P_r| w(γ_r)(z)` and `s_q = aᵀ U^q 1`, every
    /// length `m + q(n−m)` satisfies `Σ_k c_k ≤ s_q`; the lengths in between
    /// are covered by `c_{ℓ+j} ≤ c_ℓ c_j` for `0 ≤ j < n−m`. The `s_q` are
    /// computed explicitly up to a horizon `Q`; beyond it
    /// `s_{Q+k} ≤ s_Q R_k`, where `R_k` is the max row sum of `U^k`, and
    /// `R_k ≤ ρ^{⌊k/q₀⌋} R_{k mod q₀}` with `ρ = R_{q₀} < 1` closes the sum
    /// as a geometric series.
    fn tail(&self, z: &[f64], max_blocks: usize) -> Result<Option<(usize, f64, f64)>> {
        let (g, slack) = self.ev.matrix_at(z)?;
        let t = g.n;
        let u = NumMatrix {
            n: t,
            data: g.data.iter().map(|x| x * (1.0 + slack) * (1.0 + ROUNDING)).collect(),
        };
        // R_0 = 1 (identity), R_q for q ≥ 1, each inflated upward.
        let mut row_sums = vec![1.0];
        let mut power = u.clone();
        let mut q0 = None;
        for q in 1..=max_blocks.max(1) {
            if q > 1 {
                power = power.mul(&u);
                for x in power.data.iter_mut() {
                    *x = up(*x);
                }
            }
            let r = up(power.max_row_sum());
            row_sums.push(r);
            if r < 1.0 {
                q0 = Some(q);
                break;
            }
        }
        let Some(q0) = q0 else { return Ok(None) };
        let rho = row_sums[q0];

        let zero = vec![0; z.len()];
        let mut c = Vec::with_capacity(self.gap);
        c.push(1.0);
        for j in 1..self.gap {
            c.push(up(self.length_value(j, z, &zero)?));
        }
        let c_full: f64 = up(c.iter().sum());

        let base = |q: usize| self.m + q * self.gap;
        let first_len = self.max_len + 1;
        // First q whose block reaches past L, and first q lying entirely past L.
        let q_start = (0..).find(|&q| base(q) + self.gap > first_len).expect("unbounded search");
        let q_full = (0..).find(|&q| base(q) >= first_len).expect("unbounded search");
        let horizon = q_full + EXPLICIT_HORIZON;

        let mut v: Vec<f64> = self
            .class_sizes
            .iter()
            .zip(&self.class_weights)
            .map(|(size, exps)| {
                let w = exps.iter().zip(z).fold(1.0, |acc, (&e, &x)| acc * x.powi(e as i32));
                up(*size as f64 * w)
            })
            .collect();
        let mut sum = 0.0;
        for q in 0..horizon {
            if q >= q_start {
                let s_q = up(v.iter().sum::<f64>());
                let cj: f64 = (0..self.gap).filter(|&j| base(q) + j >= first_len).map(|j| c[j]).sum();
                sum += up(s_q * up(cj));
            }
            v = (0..t)
                .map(|s| up((0..t).map(|r| v[r] * u.get(r, s)).sum::<f64>()))
                .collect();
        }
        let s_horizon = up(v.iter().sum::<f64>());
        let r_sum: f64 = up(row_sums[..q0].iter().sum());
        let geometric = up(up(s_horizon * r_sum) / (1.0 - rho)) * c_full;
        sum += up(geometric);
        Ok(Some((q0, rho, up(sum))))
    }
}

/// Rigorous upper bound on the anchored trail sum `Σ_{ℓ≥1} c_ℓ(z)`.
pub fn anchored_sat_bound(
    lattice: &LatticeSpec,
    g: &GMatrix,
    z: &[f64],
    max_len: usize,
    max_blocks: usize,
) -> Result<CertifiedAnchoredBound> {
    AnchoredSat::new(lattice, g, max_len)?.bound(z, max_blocks)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Satisfied,
    NotSatisfied,
    Indeterminate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Satisfied => "satisfied",
            Verdict::NotSatisfied => "not-satisfied",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KpCertificate {
    pub instance: KPInstance,
    pub z: Vec<f64>,
    pub bound: Option<CertifiedAnchoredBound>,
    pub verdict: Verdict,
    pub note: String,
}

impl KpCertificate {
    pub fn satisfied(&self) -> bool {
        self.verdict == Verdict::Satisfied
    }

    /// Plain-text audit record.
    pub fn to_record(&self) -> String {
        let fmt_vec = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        out.push_str(&format!("epsilon {:e}\n", self.instance.epsilon));
        out.push_str(&format!("alpha {:e}\n", self.instance.alpha));
        out.push_str(&format!("t {:e}\n", self.instance.kp_t));
        out.push_str(&format!("z {}\n", fmt_vec(&self.z)));
        if let Some(b) = &self.bound {
            out.push_str(&format!("L {}\n", b.max_len));
            out.push_str(&format!("tail_point {}\n", fmt_vec(&b.tail_point)));
            out.push_str(&format!("blocks {}\n", b.blocks.map_or("none".to_string(), |q| q.to_string())));
            out.push_str(&format!("exact_partial {:e}\n", b.exact_partial));
            out.push_str(&format!("tail_bound {:e}\n", b.tail_bound));
            out.push_str(&format!("total {:e}\n", b.total));
        }
        out.push_str(&format!("verdict {}\n", self.verdict));
        if !self.note.is_empty() {
            out.push_str(&format!("note {}\n", self.note));
        }
        out
    }
}

/// Every circuit uses at least two edges of each direction on the square
/// lattice.
const CIRCUIT_MIN_EXPONENTS: [u32; 2] = [2, 2];

/// Upper bound on the weighted sum of circuits through a fixed edge at
/// weights `z ≥ 0`.
///
/// Such a circuit is a trail from an endpoint of that edge with at least two
/// horizontal and two vertical steps, so the restricted anchored trail sum
/// bounds it. The auxiliary tail point is chosen from a fixed candidate set
/// (scalings of `z` and points inside the frontier `λ₁ = 1`) to minimise the
/// total; `None` when no candidate lies strictly inside the frontier.
pub fn circuit_bound(sat: &AnchoredSat, z: &[f64], max_blocks: usize) -> Result<Option<CertifiedAnchoredBound>> {
    if z.len() != CIRCUIT_MIN_EXPONENTS.len() {
        return Err(Error::DimensionMismatch {
            expected: CIRCUIT_MIN_EXPONENTS.len(),
            got: z.len(),
        });
    }
    let ev = sat.evaluator();
    let gap = ev.step_gap() as f64;
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    if z.iter().all(|v| *v > 0.0) {
        for s in [1.0, 1.05, 1.1, 1.25, 1.5, 2.0, 3.0, 5.0] {
            candidates.push(z.iter().map(|v| v * s).collect());
        }
    }
    for u in positive_directions(z.len(), 32) {
        let Ok(lam) = ev.lambda(&u) else { continue };
        let scale = lam.value.powf(-1.0 / gap);
        for f in [0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 0.98] {
            candidates.push(u.iter().zip(z).map(|(a, b)| (a * scale * f).max(*b)).collect());
        }
    }
    let mut best: Option<CertifiedAnchoredBound> = None;
    for zp in candidates {
        if zp.iter().any(|v| !(*v > 0.0)) {
            continue;
        }
        match ev.lambda(&zp) {
            Ok(l) if l.upper < 1.0 => {}
            _ => continue,
        }
        let b = sat.restricted_bound(z, &CIRCUIT_MIN_EXPONENTS, &zp, max_blocks)?;
        if b.converged && best.as_ref().is_none_or(|cur| b.total < cur.total) {
            best = Some(b);
        }
    }
    Ok(best)
}

/// Checks the Kotecký–Preiss criterion with `a(γ) = t · |γ|` through the
/// sufficient condition that the weighted sum of circuits through any fixed
/// edge, at weights `(|ε| e^t, |α| e^t)`, is at most `t`. Never reports
/// `Satisfied` unless the certified total is at most `t`.
pub fn kp_check(inst: &KPInstance, sat: &AnchoredSat, max_blocks: usize) -> Result<KpCertificate> {
    let z = inst.weights();
    let bound = circuit_bound(sat, &z, max_blocks)?;
    let (verdict, note) = match &bound {
        None => (
            Verdict::Indeterminate,
            "no tail point inside the convergence region dominates the weights".to_string(),
        ),
        Some(b) if b.total <= inst.kp_t => (Verdict::Satisfied, String::new()),
        Some(_) => (Verdict::NotSatisfied, "certified total exceeds t".to_string()),
    };
    Ok(KpCertificate {
        instance: *inst,
        z,
        bound,
        verdict,
        note,
    })
}

/// Result of the search for `ε₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct Epsilon0 {
    pub epsilon0: f64,
    /// Every checked `ε` with the verdicts at `+ε` and `−ε`.
    pub checked: Vec<(f64, Verdict, Verdict)>,
    pub certificate_pos: KpCertificate,
    pub certificate_neg: KpCertificate,
}

/// Evaluates `Σ_i coeffs[i] ε^i`.
pub fn eval_f(coeffs: &[f64], eps: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * eps + c)
}

/// Largest `ε` on a halving-then-bisection search grid such that the
/// criterion is certified at both `ε` and `−ε` with `α = f(±ε)`. Only the
/// listed grid points are certified.
pub fn find_epsilon0(
    f_coeffs: &[f64],
    kp_t: f64,
    sat: &AnchoredSat,
    max_blocks: usize,
    bisection_steps: usize,
) -> Result<Epsilon0> {
    let f0 = eval_f(f_coeffs, 0.0).abs();
    if !(f0 < 1.0 && f0 * kp_t.exp() < 1.0) {
        return Err(Error::Precondition(format!(
            "need |f(0)| e^t < 1, got |f(0)| = {f0}, t = {kp_t}"
        )));
    }
    let mut checked = Vec::new();
    let mut check = |eps: f64| -> Result<(bool, KpCertificate, KpCertificate)> {
        let pos = kp_check(&KPInstance::new(eps, eval_f(f_coeffs, eps), kp_t)?, sat, max_blocks)?;
        let neg = kp_check(&KPInstance::new(-eps, eval_f(f_coeffs, -eps), kp_t)?, sat, max_blocks)?;
        checked.push((eps, pos.verdict, neg.verdict));
        Ok((pos.satisfied() && neg.satisfied(), pos, neg))
    };

    let mut hi = None;
    let mut found = None;
    let mut eps = 1.0;
    for _ in 0..=40 {
        let (ok, pos, neg) = check(eps)?;
        if ok {
            found = Some((eps, pos, neg));
            break;
        }
        hi = Some(eps);
        eps *= 0.5;
    }
    let Some((mut lo, mut pos, mut neg)) = found else {
        return Err(Error::Precondition("no positive ε was certified".to_string()));
    };
    if let Some(mut hi) = hi {
        for _ in 0..bisection_steps {
            let mid = 0.5 * (lo + hi);
            let (ok, p, n) = check(mid)?;
            if ok {
                lo = mid;
                pos = p;
                neg = n;
            } else {
                hi = mid;
            }
        }
    }
    Ok(Epsilon0 {
        epsilon0: lo,
        checked,
        certificate_pos: pos,
        certificate_neg: neg,
    })
}
