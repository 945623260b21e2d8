//! Exploring the weight space: grid scans of λ₁, the frontier λ₁ = 1,
//! membership in the convergence domain of the generating function, and
//! validation against closed forms.

mod closed_form;
mod validate;

pub use closed_form::{closed_form, closed_form_oracle, find_closed_form, ClosedForm, CLOSED_FORMS};
pub use validate::{validate, CheckOutcome, ValidationReport};

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{CertifiedBound, Evaluator};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, samples: usize) -> Result<Self> {
        if !(min > 0.0 && min.is_finite() && max.is_finite()) {
            return Err(Error::InvalidGrid(format!("axis minimum must be positive, got {min}")));
        }
        if max < min {
            return Err(Error::InvalidGrid(format!("axis maximum {max} is below minimum {min}")));
        }
        if samples < 2 {
            return Err(Error::InvalidGrid("each axis needs at least 2 samples".to_string()));
        }
        Ok(Axis { min, max, samples })
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.samples {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.samples - 1) as f64
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    /// `min:max:samples`
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidGrid(format!("axis `{s}` is not min:max:samples"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        Axis::new(
            parts[0].trim().parse().map_err(|_| bad())?,
            parts[1].trim().parse().map_err(|_| bad())?,
            parts[2].trim().parse().map_err(|_| bad())?,
        )
    }
}

/// A rectangular grid, one axis per weight variable.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Self {
        GridSpec { axes }
    }

    pub fn uniform(d: usize, axis: Axis) -> Self {
        GridSpec { axes: vec![axis; d] }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.samples).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point `index` in row-major order (the last axis varies fastest).
    pub fn point(&self, mut index: usize) -> Vec<f64> {
        let mut z = vec![0.0; self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            z[k] = axis.value(index % axis.samples);
            index /= axis.samples;
        }
        z
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridRow {
    pub index: usize,
    pub z: Vec<f64>,
    /// Certified λ₁ at `z`, or the reason it could not be computed.
    pub lambda: std::result::Result<CertifiedBound, String>,
}

/// Certified λ₁ at every grid point, in row-major order.
pub fn grid_scan(ev: &Evaluator, spec: &GridSpec) -> Result<Vec<GridRow>> {
    if spec.axes.len() != ev.num_vars() {
        return Err(Error::DimensionMismatch {
            expected: ev.num_vars(),
            got: spec.axes.len(),
        });
    }
    Ok((0..spec.len())
        .into_par_iter()
        .map(|index| {
            let z = spec.point(index);
            let lambda = ev.lambda(&z).map_err(|e| e.to_string());
            GridRow { index, z, lambda }
        })
        .collect())
}

/// A point with λ₁ = 1 on the ray through `direction`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontierPoint {
    pub direction: Vec<f64>,
    pub z: Vec<f64>,
    /// Certified λ₁ re-evaluated at `z`.
    pub lambda: CertifiedBound,
}

impl FrontierPoint {
    /// Enclosure of `λ₁(z) − 1`.
    pub fn residual(&self) -> (f64, f64) {
        (self.lambda.lower - 1.0, self.lambda.upper - 1.0)
    }

    /// Largest possible `|λ₁(z) − 1|`.
    pub fn residual_bound(&self) -> f64 {
        let (lo, hi) = self.residual();
        lo.abs().max(hi.abs())
    }
}

fn check_direction(u: &[f64], d: usize) -> Result<()> {
    if u.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: u.len(),
        });
    }
    if u.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::NonPositiveWeight(u.to_vec()));
    }
    Ok(())
}

/// Frontier points along each direction. Because `λ₁(cz) = c^{n−m} λ₁(z)`,
/// the point `u · λ₁(u)^{−1/(n−m)}` lies exactly on the frontier.
pub fn ray_frontier(ev: &Evaluator, directions: &[Vec<f64>]) -> Result<Vec<FrontierPoint>> {
    let gap = ev.step_gap() as f64;
    directions
        .par_iter()
        .map(|u| {
            check_direction(u, ev.num_vars())?;
            let lam = ev.lambda(u)?;
            let c = lam.value.powf(-1.0 / gap);
            let z: Vec<f64> = u.iter().map(|x| x * c).collect();
            let lambda = ev.lambda(&z)?;
            Ok(FrontierPoint {
                direction: u.clone(),
                z,
                lambda,
            })
        })
        .collect()
}

/// Frontier point along `u` by bisection on the ray parameter, using only
/// certified comparisons against 1. Independent of the scaling identity.
pub fn bisect_along_ray(ev: &Evaluator, u: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    check_direction(u, ev.num_vars())?;
    let at = |c: f64| -> Result<CertifiedBound> {
        let z: Vec<f64> = u.iter().map(|x| x * c).collect();
        ev.lambda(&z)
    };
    let (mut lo, mut hi) = (1.0, 1.0);
    while at(lo)?.upper >= 1.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::Precondition("no subcritical point on ray".into()));
        }
    }
    while at(hi)?.lower <= 1.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Precondition("no supercritical point on ray".into()));
        }
    }
    while (hi - lo) > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let b = at(mid)?;
        if b.upper < 1.0 {
            lo = mid;
        } else if b.lower > 1.0 {
            hi = mid;
        } else {
            // Bracket straddles 1: mid is within eigenvalue tolerance.
            lo = mid;
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    Ok(u.iter().map(|x| x * c).collect())
}

/// Unit vectors strictly inside the positive orthant: `count` midpoint
/// samples per hyperspherical angle, `count^{d−1}` directions in total.
pub fn positive_directions(d: usize, count: usize) -> Vec<Vec<f64>> {
    if d == 0 || count == 0 {
        return Vec::new();
    }
    if d == 1 {
        return vec![vec![1.0]];
    }
    let angles = d - 1;
    let total = count.pow(angles as u32);
    (0..total)
        .map(|mut idx| {
            let mut theta = vec![0.0; angles];
            for a in theta.iter_mut().rev() {
                *a = (idx % count) as f64 + 0.5;
                *a *= FRAC_PI_2 / count as f64;
                idx /= count;
            }
            // x_1 = cos θ1, x_2 = sin θ1 cos θ2, …, x_d = sin θ1 ⋯ sin θ_{d−1}
            let mut u = Vec::with_capacity(d);
            let mut s = 1.0;
            for &a in &theta {
                u.push(s * a.cos());
                s *= a.sin();
            }
            u.push(s);
            u
        })
        .collect()
}

/// Three-valued answer for domain membership.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside,
    Unknown,
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Membership::Inside => "inside",
            Membership::Outside => "outside",
            Membership::Unknown => "unknown",
        })
    }
}

/// Whether `x` lies in the region where the generating function is
/// certified to converge absolutely: `λ₁(|x|) < 1`, with zero coordinates
/// lifted to machine epsilon (sound because λ₁ is monotone).
pub fn domain_contains(ev: &Evaluator, x: &[f64]) -> Result<(Membership, CertifiedBound)> {
    if x.len() != ev.num_vars() {
        return Err(Error::DimensionMismatch {
            expected: ev.num_vars(),
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonPositiveWeight(x.to_vec()));
    }
    let z: Vec<f64> = x.iter().map(|v| v.abs().max(f64::EPSILON)).collect();
    let lam = ev.lambda(&z)?;
    let verdict = if lam.upper < 1.0 {
        Membership::Inside
    } else if lam.lower > 1.0 {
        Membership::Outside
    } else {
        Membership::Unknown
    };
    Ok((verdict, lam))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmatrix::build_gmatrix;
    use crate::lattice::builtin_lattice;
    use crate::walks::Mode;

    fn square12() -> Evaluator {
        let g = build_gmatrix(&builtin_lattice("square", "general").unwrap(), 1, 2, Mode::Saw).unwrap();
        Evaluator::new(&g).unwrap()
    }

    #[test]
    fn grid_contains_anchors() {
        let ev = square12();
        let axis = Axis::new(1.0 / 3.0, 1.0, 4).unwrap();
        let spec = GridSpec::uniform(2, axis);
        let rows = grid_scan(&ev, &spec).unwrap();
        assert_eq!(rows.len(), 16);
        assert!(rows.iter().enumerate().all(|(i, r)| r.index == i));
        let last = rows.last().unwrap();
        assert_eq!(last.z, vec![1.0, 1.0]);
        assert!(last.lambda.as_ref().unwrap().contains(3.0));
        let first = &rows[0];
        let b = first.lambda.as_ref().unwrap();
        assert!((b.value - 1.0).abs() < 1e-12);
        // Row-major: the last axis varies fastest.
        assert_eq!(rows[1].z[0], rows[0].z[0]);
        assert!(rows[1].z[1] > rows[0].z[1]);
    }

    #[test]
    fn grid_monotone() {
        let ev = square12();
        let spec = GridSpec::new(vec![Axis::new(0.1, 1.0, 5).unwrap(), Axis::new(0.2, 2.0, 6).unwrap()]);
        let rows = grid_scan(&ev, &spec).unwrap();
        for a in &rows {
            for b in &rows {
                if a.z.iter().zip(&b.z).all(|(x, y)| x <= y) {
                    assert!(a.lambda.as_ref().unwrap().lower <= b.lambda.as_ref().unwrap().upper);
                }
            }
        }
    }

    #[test]
    fn invalid_axes() {
        assert!("0:1:10".parse::<Axis>().is_err());
        assert!("0.1:1:1".parse::<Axis>().is_err());
        assert!("1:0.5:3".parse::<Axis>().is_err());
        assert_eq!("0.1:1:3".parse::<Axis>().unwrap(), Axis::new(0.1, 1.0, 3).unwrap());
    }

    #[test]
    fn isotropic_frontier_point() {
        let ev = square12();
        let u = vec![std::f64::consts::FRAC_1_SQRT_2; 2];
        let p = &ray_frontier(&ev, &[u.clone()]).unwrap()[0];
        for c in &p.z {
            assert!((c - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(p.residual_bound() < 1e-9);
        let b = bisect_along_ray(&ev, &u, 1e-13).unwrap();
        for (a, c) in b.iter().zip(&p.z) {
            assert!((a - c).abs() < 1e-10);
        }
    }

    #[test]
    fn frontier_symmetric_under_swap() {
        let ev = square12();
        let dirs = positive_directions(2, 16);
        let pts = ray_frontier(&ev, &dirs).unwrap();
        for (i, p) in pts.iter().enumerate() {
            let q = &pts[dirs.len() - 1 - i];
            assert!((p.z[0] - q.z[1]).abs() < 1e-12);
            assert!((p.z[1] - q.z[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn hexagonal_frontier() {
        let g = build_gmatrix(&builtin_lattice("hexagonal", "xy-equal").unwrap(), 1, 2, Mode::Saw).unwrap();
        let ev = Evaluator::new(&g).unwrap();
        let p = &ray_frontier(&ev, &[vec![1.0, 1.0]]).unwrap()[0];
        assert!((p.z[0] - 0.5).abs() < 1e-12 && (p.z[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn directions_are_unit_and_positive() {
        for d in 1..=4 {
            let dirs = positive_directions(d, 5);
            assert_eq!(dirs.len(), 5usize.pow(d as u32 - 1));
            for u in dirs {
                let norm: f64 = u.iter().map(|x| x * x).sum();
                assert!((norm - 1.0).abs() < 1e-12);
                assert!(u.iter().all(|x| *x > 0.0));
            }
        }
    }

    #[test]
    fn membership() {
        let ev = square12();
        assert_eq!(domain_contains(&ev, &[0.1, 0.1]).unwrap().0, Membership::Inside);
        assert_eq!(domain_contains(&ev, &[0.5, 0.5]).unwrap().0, Membership::Outside);
        assert_eq!(domain_contains(&ev, &[-0.1, 0.1]).unwrap().0, Membership::Inside);
        assert_eq!(domain_contains(&ev, &[0.0, 1.1]).unwrap().0, Membership::Outside);
        assert_eq!(domain_contains(&ev, &[0.0, 0.0]).unwrap().0, Membership::Inside);
        assert_eq!(domain_contains(&ev, &[1.0 / 3.0, 1.0 / 3.0]).unwrap().0, Membership::Unknown);
    }
}
