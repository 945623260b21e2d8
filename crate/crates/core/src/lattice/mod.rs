//! Periodic lattices described by vertex classes, step rules, a translation
//! basis and weight-preserving symmetry coset representatives.
//!
//! Vertices are integer coordinate vectors. Two vertices belong to the same
//! vertex class when their difference lies in the integer span of the
//! translation basis; every class has a fixed representative, and walks
//! always start at one of these representatives.

mod builtin;
mod check;
mod file;

use std::fmt;

use crate::error::{Error, Result};
use crate::walks::{Step, Walk};

pub use builtin::{builtin_lattice, BUILTIN_LATTICES};
pub use check::{check_lattice, Diagnostic, LatticeReport};
pub use file::{load_lattice, parse_lattice, LatticeFile};

/// Largest supported embedding dimension.
pub const MAX_DIM: usize = 4;

/// An integer lattice coordinate. Components beyond the lattice dimension
/// are always zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Point(pub [i32; MAX_DIM]);

impl Point {
    pub const ORIGIN: Point = Point([0; MAX_DIM]);

    pub fn from_slice(coords: &[i32]) -> Result<Self> {
        if coords.len() > MAX_DIM {
            return Err(Error::DimensionMismatch {
                expected: MAX_DIM,
                got: coords.len(),
            });
        }
        let mut p = [0; MAX_DIM];
        p[..coords.len()].copy_from_slice(coords);
        Ok(Point(p))
    }

    pub fn coords(&self, dim: usize) -> &[i32] {
        &self.0[..dim]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    #[inline]
    pub fn add(self, other: Point) -> Point {
        let mut p = self.0;
        for (a, b) in p.iter_mut().zip(other.0) {
            *a += b;
        }
        Point(p)
    }

    #[inline]
    pub fn sub(self, other: Point) -> Point {
        let mut p = self.0;
        for (a, b) in p.iter_mut().zip(other.0) {
            *a -= b;
        }
        Point(p)
    }

    #[inline]
    pub fn neg(self) -> Point {
        Point(self.0.map(|c| -c))
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Trailing zero padding is not significant; print at least two components.
        let used = self
            .0
            .iter()
            .rposition(|&c| c != 0)
            .map_or(0, |i| i + 1)
            .max(2);
        write!(f, "(")?;
        for (i, c) in self.0[..used].iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// An outgoing edge of a vertex class: the offset to the neighbor and the
/// edge class (weight variable index) of the edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepRule {
    pub offset: Point,
    pub edge_class: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexClassSpec {
    pub representative: Point,
    pub steps: Vec<StepRule>,
}

/// An affine lattice map `p -> linear * p + shift`, used as a coset
/// representative of a weight-preserving symmetry modulo translations.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymmetryRep {
    pub linear: [[i32; MAX_DIM]; MAX_DIM],
    pub shift: Point,
}

impl SymmetryRep {
    pub fn identity() -> Self {
        let mut linear = [[0; MAX_DIM]; MAX_DIM];
        for (i, row) in linear.iter_mut().enumerate() {
            row[i] = 1;
        }
        SymmetryRep {
            linear,
            shift: Point::ORIGIN,
        }
    }

    /// Builds a symmetry from row-major `dim x dim` rows and a shift.
    pub fn new(rows: &[&[i32]], shift: &[i32]) -> Result<Self> {
        let dim = rows.len();
        if dim > MAX_DIM || shift.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidLattice(format!(
                "symmetry must be {dim}x{dim} with a length-{dim} shift"
            )));
        }
        let mut linear = Self::identity().linear;
        for (i, row) in rows.iter().enumerate() {
            linear[i][..dim].copy_from_slice(row);
        }
        Ok(SymmetryRep {
            linear,
            shift: Point::from_slice(shift)?,
        })
    }

    /// Linear part applied to a displacement.
    #[inline]
    pub fn apply_vector(&self, v: Point) -> Point {
        let mut out = [0; MAX_DIM];
        for (i, row) in self.linear.iter().enumerate() {
            out[i] = row.iter().zip(v.0).map(|(a, b)| a * b).sum();
        }
        Point(out)
    }

    #[inline]
    pub fn apply_point(&self, p: Point) -> Point {
        self.apply_vector(p).add(self.shift)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SymmetryRep) -> SymmetryRep {
        let mut linear = [[0; MAX_DIM]; MAX_DIM];
        for (i, row) in linear.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..MAX_DIM)
                    .map(|k| self.linear[i][k] * other.linear[k][j])
                    .sum();
            }
        }
        SymmetryRep {
            linear,
            shift: self.apply_point(other.shift),
        }
    }

    pub fn rows(&self, dim: usize) -> Vec<Vec<i32>> {
        self.linear[..dim].iter().map(|r| r[..dim].to_vec()).collect()
    }
}

impl fmt::Debug for SymmetryRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymmetryRep")
            .field("linear", &self.linear)
            .field("shift", &self.shift)
            .finish()
    }
}

/// A lattice satisfying the finiteness and connectivity conditions needed by
/// the transfer-matrix method. Immutable once constructed.
#[derive(Clone, Debug)]
pub struct LatticeSpec {
    name: String,
    scheme: String,
    dim: usize,
    edge_class_labels: Vec<String>,
    vertex_classes: Vec<VertexClassSpec>,
    translation_basis: Vec<Point>,
    symmetries: Vec<SymmetryRep>,
    // Cached inverse of the translation basis: adjugate and determinant.
    adjugate: [[i64; MAX_DIM]; MAX_DIM],
    det: i64,
    // step_targets[k][j] = class of representative_k + steps[j].offset,
    // or None when the target is not a lattice vertex.
    step_targets: Vec<Vec<Option<usize>>>,
}

impl PartialEq for LatticeSpec {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.scheme == other.scheme
            && self.dim == other.dim
            && self.edge_class_labels == other.edge_class_labels
            && self.vertex_classes == other.vertex_classes
            && self.translation_basis == other.translation_basis
            && self.symmetries == other.symmetries
    }
}

impl LatticeSpec {
    /// Assembles a lattice. Only structural shape is validated here; use
    /// [`check_lattice`] for the full set of lattice conditions.
    pub fn new(
        name: impl Into<String>,
        scheme: impl Into<String>,
        dim: usize,
        edge_class_labels: Vec<String>,
        vertex_classes: Vec<VertexClassSpec>,
        translation_basis: Vec<Point>,
        symmetries: Vec<SymmetryRep>,
    ) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidLattice(format!(
                "dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        if translation_basis.len() != dim {
            return Err(Error::InvalidLattice(format!(
                "translation basis has {} vectors, expected {dim}",
                translation_basis.len()
            )));
        }
        let outside = |p: &Point| p.0[dim..].iter().any(|&c| c != 0);
        let bad_point = translation_basis.iter().any(outside)
            || vertex_classes.iter().any(|vc| {
                outside(&vc.representative) || vc.steps.iter().any(|s| outside(&s.offset))
            });
        if bad_point {
            return Err(Error::InvalidLattice(format!(
                "coordinates exceed the lattice dimension {dim}"
            )));
        }

        let mut basis = [[0i64; MAX_DIM]; MAX_DIM];
        for (i, v) in translation_basis.iter().enumerate() {
            for j in 0..dim {
                basis[i][j] = v.0[j] as i64;
            }
        }
        let det = determinant(&basis, dim);
        let adjugate = adjugate(&basis, dim);

        let mut lattice = LatticeSpec {
            name: name.into(),
            scheme: scheme.into(),
            dim,
            edge_class_labels,
            vertex_classes,
            translation_basis,
            symmetries,
            adjugate,
            det,
            step_targets: Vec::new(),
        };
        lattice.step_targets = lattice
            .vertex_classes
            .iter()
            .map(|vc| {
                vc.steps
                    .iter()
                    .map(|s| lattice.classify_vertex(vc.representative.add(s.offset)).ok())
                    .collect()
            })
            .collect();
        Ok(lattice)
    }

    /// Same lattice with a different symmetry list (and scheme label).
    pub fn with_symmetries(&self, scheme: impl Into<String>, symmetries: Vec<SymmetryRep>) -> Self {
        let mut out = self.clone();
        out.scheme = scheme.into();
        out.symmetries = symmetries;
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scheme(&self) -> &str {
        &self.scheme
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vertex classes `K`.
    pub fn num_vertex_classes(&self) -> usize {
        self.vertex_classes.len()
    }

    /// Number of edge classes `d` (weight variables).
    pub fn num_edge_classes(&self) -> usize {
        self.edge_class_labels.len()
    }

    pub fn edge_class_labels(&self) -> &[String] {
        &self.edge_class_labels
    }

    pub fn vertex_classes(&self) -> &[VertexClassSpec] {
        &self.vertex_classes
    }

    pub fn representative(&self, class: usize) -> Point {
        self.vertex_classes[class].representative
    }

    pub fn translation_basis(&self) -> &[Point] {
        &self.translation_basis
    }

    pub fn translation_determinant(&self) -> i64 {
        self.det
    }

    pub fn symmetries(&self) -> &[SymmetryRep] {
        &self.symmetries
    }

    pub fn steps(&self, class: usize) -> &[StepRule] {
        &self.vertex_classes[class].steps
    }

    /// Vertex class reached by taking step `step` from a vertex of `class`.
    #[inline]
    pub fn step_target(&self, class: usize, step: usize) -> Option<usize> {
        self.step_targets[class][step]
    }

    /// True when `v` lies in the integer span of the translation basis.
    pub fn is_translation(&self, v: Point) -> bool {
        if self.det == 0 {
            return v.is_zero();
        }
        (0..self.dim).all(|j| {
            let numer: i64 = (0..self.dim)
                .map(|i| v.0[i] as i64 * self.adjugate[i][j])
                .sum();
            numer % self.det == 0
        })
    }

    /// The unique vertex class `k` with `coord - representative_k` a
    /// lattice translation.
    pub fn classify_vertex(&self, coord: Point) -> Result<usize> {
        self.vertex_classes
            .iter()
            .position(|vc| self.is_translation(coord.sub(vc.representative)))
            .ok_or_else(|| Error::NotOnLattice(coord.to_string()))
    }

    /// Outgoing edges at `coord` as `(target, edge class)` pairs, in step
    /// declaration order.
    pub fn neighbor_steps(&self, coord: Point) -> Result<Vec<(Point, usize)>> {
        let class = self.classify_vertex(coord)?;
        Ok(self
            .steps(class)
            .iter()
            .map(|s| (coord.add(s.offset), s.edge_class))
            .collect())
    }

    /// Index of the step rule of `class` with the given offset.
    #[inline]
    pub fn find_step(&self, class: usize, offset: Point) -> Option<usize> {
        self.vertex_classes[class]
            .steps
            .iter()
            .position(|s| s.offset == offset)
    }

    /// Maps `walk` through `sym` and re-anchors the image at its class
    /// representative. Edge classes are carried over unchanged, so the image
    /// is only meaningful for weight-preserving symmetries.
    pub fn apply_symmetry(&self, sym: &SymmetryRep, walk: &Walk) -> Result<Walk> {
        let start = sym.apply_point(self.representative(walk.start_class));
        let start_class = self.classify_vertex(start)?;
        let steps = walk
            .steps
            .iter()
            .map(|s| Step {
                offset: sym.apply_vector(s.offset),
                edge_class: s.edge_class,
            })
            .collect();
        Ok(Walk { start_class, steps })
    }
}

fn determinant(m: &[[i64; MAX_DIM]; MAX_DIM], n: usize) -> i64 {
    if n == 0 {
        return 1;
    }
    if n == 1 {
        return m[0][0];
    }
    let mut det = 0;
    for col in 0..n {
        if m[0][col] == 0 {
            continue;
        }
        let minor = minor(m, n, 0, col);
        let sign = if col % 2 == 0 { 1 } else { -1 };
        det += sign * m[0][col] * determinant(&minor, n - 1);
    }
    det
}

fn minor(m: &[[i64; MAX_DIM]; MAX_DIM], n: usize, row: usize, col: usize) -> [[i64; MAX_DIM]; MAX_DIM] {
    let mut out = [[0; MAX_DIM]; MAX_DIM];
    let mut oi = 0;
    for i in (0..n).filter(|&i| i != row) {
        let mut oj = 0;
        for j in (0..n).filter(|&j| j != col) {
            out[oi][oj] = m[i][j];
            oj += 1;
        }
        oi += 1;
    }
    out
}

// adj[j][i] = (-1)^(i+j) * det(minor(i, j)), so that m * adj = det * I.
fn adjugate(m: &[[i64; MAX_DIM]; MAX_DIM], n: usize) -> [[i64; MAX_DIM]; MAX_DIM] {
    let mut adj = [[0; MAX_DIM]; MAX_DIM];
    if n == 1 {
        adj[0][0] = 1;
        return adj;
    }
    for i in 0..n {
        for j in 0..n {
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            adj[j][i] = sign * determinant(&minor(m, n, i, j), n - 1);
        }
    }
    adj
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i32]) -> Point {
        Point::from_slice(c).unwrap()
    }

    #[test]
    fn adjugate_inverts_basis() {
        let mut m = [[0i64; MAX_DIM]; MAX_DIM];
        m[0][0] = 2;
        m[0][1] = 1;
        m[1][0] = 1;
        m[1][1] = -1;
        let det = determinant(&m, 2);
        assert_eq!(det, -3);
        let adj = adjugate(&m, 2);
        for i in 0..2 {
            for j in 0..2 {
                let prod: i64 = (0..2).map(|k| m[i][k] * adj[k][j]).sum();
                assert_eq!(prod, if i == j { det } else { 0 });
            }
        }
    }

    #[test]
    fn hexagonal_classification() {
        let hex = builtin_lattice("hexagonal", "general").unwrap();
        assert_eq!(hex.classify_vertex(p(&[0, 0])).unwrap(), 0);
        assert_eq!(hex.classify_vertex(p(&[2, 1])).unwrap(), 0);
        assert_eq!(hex.classify_vertex(p(&[1, 0])).unwrap(), 1);
        assert_eq!(hex.classify_vertex(p(&[2, -1])).unwrap(), 1);
        // Hexagon centres, e.g. (2, 0), are not vertices.
        assert!(matches!(
            hex.classify_vertex(p(&[2, 0])),
            Err(Error::NotOnLattice(_))
        ));
    }

    #[test]
    fn classify_matches_integer_solve() {
        // Brute-force oracle: search small integer combinations of the basis.
        let hex = builtin_lattice("hexagonal", "general").unwrap();
        for a in -4..=4 {
            for b in -4..=4 {
                let v = p(&[a, b]);
                let mut expected = None;
                for k in 0..2 {
                    let d = v.sub(hex.representative(k));
                    for i in -10..=10 {
                        for j in -10..=10 {
                            if 2 * i + j == d.0[0] && i - j == d.0[1] {
                                expected = Some(k);
                            }
                        }
                    }
                }
                assert_eq!(hex.classify_vertex(v).ok(), expected, "at {v}");
            }
        }
    }

    #[test]
    fn neighbor_steps_examples() {
        let sq = builtin_lattice("square", "general").unwrap();
        let n = sq.neighbor_steps(p(&[5, -2])).unwrap();
        assert_eq!(n.len(), 4);
        for (t, _) in &n {
            let d = t.sub(p(&[5, -2]));
            assert_eq!(d.0.iter().map(|c| c.abs()).sum::<i32>(), 1);
        }

        let hex = builtin_lattice("hexagonal", "general").unwrap();
        assert_eq!(hex.neighbor_steps(p(&[0, 0])).unwrap().len(), 3);
        let targets: Vec<Point> = hex
            .neighbor_steps(p(&[1, 0]))
            .unwrap()
            .into_iter()
            .map(|(t, _)| t)
            .collect();
        assert_eq!(targets, vec![p(&[0, 0]), p(&[1, -1]), p(&[2, 1])]);
        assert!(hex.neighbor_steps(p(&[2, 0])).is_err());
    }

    #[test]
    fn symmetry_on_walks() {
        let sq = builtin_lattice("square", "general").unwrap();
        let east_north = Walk {
            start_class: 0,
            steps: vec![
                Step { offset: p(&[1, 0]), edge_class: 0 },
                Step { offset: p(&[0, 1]), edge_class: 1 },
            ],
        };
        let id = SymmetryRep::identity();
        assert_eq!(sq.apply_symmetry(&id, &east_north).unwrap(), east_north);

        let neg = SymmetryRep::new(&[&[-1, 0], &[0, -1]], &[0, 0]).unwrap();
        let image = sq.apply_symmetry(&neg, &east_north).unwrap();
        assert_eq!(image.steps[0].offset, p(&[-1, 0]));
        assert_eq!(image.steps[1].offset, p(&[0, -1]));
        assert_eq!(image.exponents(2), east_north.exponents(2));
    }

    #[test]
    fn hexagonal_swap_exchanges_classes() {
        // Worked by hand: (0,0) -> (1,0) maps to (1,0) -> (0,0).
        let hex = builtin_lattice("hexagonal", "general").unwrap();
        let swap = hex.symmetries()[1];
        let walk = Walk {
            start_class: 0,
            steps: vec![Step { offset: p(&[1, 0]), edge_class: 0 }],
        };
        let image = hex.apply_symmetry(&swap, &walk).unwrap();
        assert_eq!(image.start_class, 1);
        assert_eq!(image.steps[0].offset, p(&[-1, 0]));
        let end = hex.representative(1).add(image.steps[0].offset);
        assert_eq!(hex.classify_vertex(end).unwrap(), 0);
    }

    #[test]
    fn point_display() {
        assert_eq!(p(&[1, -2]).to_string(), "(1,-2)");
        assert_eq!(p(&[0, 0, 3]).to_string(), "(0,0,3)");
    }
}
