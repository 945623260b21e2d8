//! Known closed forms for `λ₁(G(m, n))^{1/(n−m)}` on small instances.

use crate::error::{Error, Result};
use crate::walks::Mode;

/// One closed-form expression and the instances it describes.
#[derive(Clone, Copy, Debug)]
pub struct ClosedForm {
    pub id: &'static str,
    pub lattice: &'static str,
    pub scheme: &'static str,
    pub modes: &'static [Mode],
    pub m: usize,
    pub n: usize,
    pub nvars: usize,
    formula: fn(f64, f64) -> f64,
}

impl ClosedForm {
    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: z.len(),
            });
        }
        Ok((self.formula)(z[0], z[1]))
    }

    pub fn applies_to(&self, lattice: &str, scheme: &str, mode: Mode, m: usize, n: usize) -> bool {
        self.lattice == lattice && self.scheme == scheme && self.modes.contains(&mode) && self.m == m && self.n == n
    }
}

const BOTH: &[Mode] = &[Mode::Saw, Mode::Sat];
const SAW: &[Mode] = &[Mode::Saw];
const SAT: &[Mode] = &[Mode::Sat];

fn square_12(x: f64, y: f64) -> f64 {
    0.5 * (x + y + (x * x + 14.0 * x * y + y * y).sqrt())
}

fn square_13(x: f64, y: f64) -> f64 {
    let r = (x * x + 14.0 * x * y + y * y).sqrt();
    (0.5 * (x * x + 8.0 * x * y + y * y + (x + y) * r)).sqrt()
}

fn square_saw_14(x: f64, y: f64) -> f64 {
    let disc = x.powi(6)
        + 24.0 * x.powi(5) * y
        + 136.0 * x.powi(4) * y * y
        + 254.0 * x.powi(3) * y.powi(3)
        + 136.0 * x * x * y.powi(4)
        + 24.0 * x * y.powi(5)
        + y.powi(6);
    (0.5 * (x.powi(3) + 12.0 * x * y * (x + y) + y.powi(3) + disc.sqrt())).cbrt()
}

fn square_sat_14(x: f64, y: f64) -> f64 {
    let r = (x * x + 14.0 * x * y + y * y).sqrt();
    (0.5 * (x.powi(3) + 12.0 * x * y * (x + y) + y.powi(3) + (x * x + 5.0 * x * y + y * y) * r)).cbrt()
}

fn cubic_12(x: f64, z: f64) -> f64 {
    0.5 * (3.0 * x + z + (9.0 * x * x + 26.0 * x * z + z * z).sqrt())
}

fn cubic_13(x: f64, z: f64) -> f64 {
    let r = (9.0 * x * x + 26.0 * x * z + z * z).sqrt();
    (0.5 * (9.0 * x * x + 16.0 * x * z + z * z + (3.0 * x + z) * r)).sqrt()
}

fn triangular_saw_13(x: f64, z: f64) -> f64 {
    let disc = 81.0 * x.powi(4) + 182.0 * x.powi(3) * z + 143.0 * x * x * z * z + 34.0 * x * z.powi(3) + z.powi(4);
    (0.5 * (9.0 * x * x + 15.0 * x * z + z * z + disc.sqrt())).sqrt()
}

fn hexagonal_12(x: f64, z: f64) -> f64 {
    0.5 * (x + (x * (x + 8.0 * z)).sqrt())
}

fn hexagonal_13(x: f64, z: f64) -> f64 {
    (0.5 * (x * x + 4.0 * x * z + x * (x * (x + 8.0 * z)).sqrt())).sqrt()
}

fn hexagonal_14(x: f64, z: f64) -> f64 {
    (0.5 * (x.powi(3) + 6.0 * x * x * z + x * (x + 2.0 * z) * (x * (x + 8.0 * z)).sqrt())).cbrt()
}

macro_rules! form {
    ($id:expr, $lattice:expr, $scheme:expr, $modes:expr, $m:expr, $n:expr, $f:expr) => {
        ClosedForm {
            id: $id,
            lattice: $lattice,
            scheme: $scheme,
            modes: $modes,
            m: $m,
            n: $n,
            nvars: 2,
            formula: $f,
        }
    };
}

/// All known closed forms. Variables follow the lattice's edge-class label
/// order: `(x, y)` on the square lattice, `(x, z)` elsewhere.
pub const CLOSED_FORMS: &[ClosedForm] = &[
    form!("square-1-2", "square", "general", BOTH, 1, 2, square_12),
    form!("square-1-3", "square", "general", BOTH, 1, 3, square_13),
    form!("square-saw-1-4", "square", "general", SAW, 1, 4, square_saw_14),
    form!("square-sat-1-4", "square", "general", SAT, 1, 4, square_sat_14),
    form!("cubic-1-2", "cubic", "xy-equal", BOTH, 1, 2, cubic_12),
    form!("cubic-2-3", "cubic", "xy-equal", BOTH, 2, 3, cubic_12),
    form!("cubic-1-3", "cubic", "xy-equal", BOTH, 1, 3, cubic_13),
    form!("triangular-1-2", "triangular", "xz", BOTH, 1, 2, cubic_12),
    form!("triangular-saw-1-3", "triangular", "xz", SAW, 1, 3, triangular_saw_13),
    form!("triangular-sat-1-3", "triangular", "xz", SAT, 1, 3, cubic_13),
    form!("hexagonal-1-2", "hexagonal", "xy-equal", BOTH, 1, 2, hexagonal_12),
    form!("hexagonal-1-3", "hexagonal", "xy-equal", BOTH, 1, 3, hexagonal_13),
    form!("hexagonal-1-4", "hexagonal", "xy-equal", BOTH, 1, 4, hexagonal_14),
];

pub fn closed_form(id: &str) -> Result<&'static ClosedForm> {
    CLOSED_FORMS
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| Error::UnknownClosedForm(id.to_string()))
}

/// Evaluates the closed form with the given id at `z`.
pub fn closed_form_oracle(id: &str, z: &[f64]) -> Result<f64> {
    closed_form(id)?.eval(z)
}

/// The closed form describing an instance, if one is known.
pub fn find_closed_form(lattice: &str, scheme: &str, mode: Mode, m: usize, n: usize) -> Option<&'static ClosedForm> {
    CLOSED_FORMS.iter().find(|c| c.applies_to(lattice, scheme, mode, m, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_values() {
        assert!((closed_form_oracle("square-1-2", &[1.0, 1.0]).unwrap() - 3.0).abs() < 1e-15);
        assert!((closed_form_oracle("cubic-1-2", &[1.0, 1.0]).unwrap() - 5.0).abs() < 1e-15);
        assert!((closed_form_oracle("hexagonal-1-2", &[1.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn coinciding_rows() {
        for (x, z) in [(0.3, 0.9), (1.0, 0.1), (2.5, 4.0)] {
            let a = closed_form_oracle("cubic-1-2", &[x, z]).unwrap();
            let b = closed_form_oracle("cubic-2-3", &[x, z]).unwrap();
            assert_eq!(a, b);
            let c = closed_form_oracle("triangular-sat-1-3", &[x, z]).unwrap();
            let d = closed_form_oracle("cubic-1-3", &[x, z]).unwrap();
            assert_eq!(c, d);
        }
    }

    #[test]
    fn homogeneous_of_degree_one() {
        for c in CLOSED_FORMS {
            let a = c.eval(&[0.3, 0.7]).unwrap();
            let b = c.eval(&[0.6, 1.4]).unwrap();
            assert!((b - 2.0 * a).abs() < 1e-13, "{}", c.id);
        }
    }

    #[test]
    fn lookup() {
        assert_eq!(find_closed_form("square", "general", Mode::Sat, 1, 4).unwrap().id, "square-sat-1-4");
        assert!(find_closed_form("square", "general", Mode::Saw, 2, 4).is_none());
        assert!(matches!(closed_form_oracle("nope", &[1.0, 1.0]), Err(Error::UnknownClosedForm(_))));
        assert!(closed_form_oracle("square-1-2", &[1.0]).is_err());
    }
}
