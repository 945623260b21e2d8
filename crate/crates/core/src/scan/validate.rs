use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{closed_form, find_closed_form, ray_frontier, ClosedForm};
use crate::error::Result;
use crate::gmatrix::GMatrix;
use crate::spectral::Evaluator;

/// Absolute slack allowed on top of the certified bracket when comparing
/// against a closed form.
pub const CLOSED_FORM_SLACK: f64 = 1e-8;
/// Absolute slack for the scaling and reciprocal identities.
pub const IDENTITY_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    /// `None` when the check was skipped.
    pub passed: Option<bool>,
    pub trials: usize,
    pub failures: usize,
    /// Largest observed `|difference| − allowed`, negative when all pass.
    pub worst_margin: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    /// True when no executed check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed != Some(false))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed {} trials {}", self.seed, self.trials)?;
        for c in &self.checks {
            let status = match c.passed {
                Some(true) => "pass",
                Some(false) => "FAIL",
                None => "skip",
            };
            writeln!(
                f,
                "{status}  {:<14} {}/{} ok  worst margin {:.3e}  {}",
                c.name,
                c.trials - c.failures,
                c.trials,
                c.worst_margin,
                c.detail
            )?;
        }
        Ok(())
    }
}

fn random_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    // (0, 1]
    (0..d).map(|_| 1.0 - rng.gen::<f64>()).collect()
}

struct Tally {
    name: &'static str,
    trials: usize,
    failures: usize,
    worst: f64,
    errors: Vec<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            trials: 0,
            failures: 0,
            worst: f64::NEG_INFINITY,
            errors: Vec::new(),
        }
    }

    fn record(&mut self, diff: f64, allowed: f64) {
        self.trials += 1;
        let margin = diff - allowed;
        self.worst = self.worst.max(margin);
        if !(margin <= 0.0) {
            self.failures += 1;
        }
    }

    fn error(&mut self, e: impl ToString) {
        self.trials += 1;
        self.failures += 1;
        if self.errors.len() < 3 {
            self.errors.push(e.to_string());
        }
    }

    fn finish(self, detail: String) -> CheckOutcome {
        let detail = if self.errors.is_empty() {
            detail
        } else {
            format!("{detail}; errors: {}", self.errors.join(" | "))
        };
        CheckOutcome {
            name: self.name.to_string(),
            passed: Some(self.failures == 0),
            trials: self.trials,
            failures: self.failures,
            worst_margin: self.worst,
            detail,
        }
    }
}

/// Randomised consistency checks of a matrix: agreement with a known
/// closed form, the scaling identity `λ₁(cz) = c^{n−m} λ₁(z)`, and that the
/// isotropic frontier point is the reciprocal of the isotropic bound.
///
/// `row` overrides the closed form looked up from the matrix metadata.
pub fn validate(g: &GMatrix, trials: usize, seed: u64, row: Option<&str>) -> Result<ValidationReport> {
    let ev = Evaluator::new(g)?;
    let d = g.num_vars();
    let gap = g.step_gap() as i32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let form: Option<&ClosedForm> = match row {
        Some(id) => Some(closed_form(id)?),
        None => find_closed_form(&g.lattice_name, &g.scheme, g.mode, g.m, g.n),
    };

    let mut checks = Vec::new();
    match form {
        Some(form) => {
            let mut tally = Tally::new("closed-form");
            for _ in 0..trials {
                let z = random_point(&mut rng, d);
                match (ev.mu(&z), form.eval(&z)) {
                    (Ok(b), Ok(want)) => tally.record((b.value - want).abs(), b.width() + CLOSED_FORM_SLACK),
                    (Err(e), _) | (_, Err(e)) => tally.error(e),
                }
            }
            checks.push(tally.finish(format!("against `{}`", form.id)));
        }
        None => checks.push(CheckOutcome {
            name: "closed-form".to_string(),
            passed: None,
            trials: 0,
            failures: 0,
            worst_margin: f64::NAN,
            detail: "no closed form known for this instance".to_string(),
        }),
    }

    let mut tally = Tally::new("scaling");
    for _ in 0..trials {
        let z = random_point(&mut rng, d);
        let c = 2.0 * (1.0 - rng.gen::<f64>());
        let cz: Vec<f64> = z.iter().map(|x| c * x).collect();
        match (ev.lambda(&z), ev.lambda(&cz)) {
            (Ok(a), Ok(b)) => {
                let k = c.powi(gap);
                tally.record((b.value - k * a.value).abs(), b.width() + k * a.width() + IDENTITY_SLACK);
            }
            (Err(e), _) | (_, Err(e)) => tally.error(e),
        }
    }
    checks.push(tally.finish("λ₁(cz) against c^(n−m) λ₁(z)".to_string()));

    let mut tally = Tally::new("reciprocal");
    let ones = vec![1.0; d];
    let iso = vec![1.0 / (d as f64).sqrt(); d];
    match (ev.mu(&ones), ray_frontier(&ev, &[iso])) {
        (Ok(mu), Ok(points)) => {
            let s = points[0].z[0];
            // s · μ(1) = 1; the bracket of μ bounds the error of s.
            tally.record((s * mu.value - 1.0).abs(), mu.relative_width() + IDENTITY_SLACK);
            if let Some(form) = form {
                if let Ok(want) = form.eval(&ones) {
                    tally.record((s - 1.0 / want).abs(), s * mu.relative_width() + IDENTITY_SLACK);
                }
            }
        }
        (Err(e), _) | (_, Err(e)) => tally.error(e),
    }
    checks.push(tally.finish("isotropic frontier point against 1/μ(1,…,1)".to_string()));

    Ok(ValidationReport { seed, trials, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmatrix::build_gmatrix;
    use crate::lattice::builtin_lattice;
    use crate::walks::Mode;

    #[test]
    fn square_passes() {
        let g = build_gmatrix(&builtin_lattice("square", "general").unwrap(), 1, 2, Mode::Saw).unwrap();
        let r = validate(&g, 100, 7, None).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.checks.iter().all(|c| c.passed == Some(true)));
    }

    #[test]
    fn mismatched_row_fails() {
        let g = build_gmatrix(&builtin_lattice("square", "general").unwrap(), 1, 2, Mode::Saw).unwrap();
        let r = validate(&g, 20, 7, Some("square-saw-1-4")).unwrap();
        assert!(!r.passed(), "{r}");
        assert_eq!(r.checks[0].passed, Some(false));
    }

    #[test]
    fn reproducible() {
        let g = build_gmatrix(&builtin_lattice("square", "general").unwrap(), 1, 3, Mode::Sat).unwrap();
        assert_eq!(validate(&g, 10, 3, None).unwrap(), validate(&g, 10, 3, None).unwrap());
    }
}
