//! TOML lattice definitions.
//!
//! ```toml
//! name = "square"
//! scheme = "general"
//! dim = 2
//! edge_class_labels = ["x", "y"]
//! translation_basis = [[1, 0], [0, 1]]
//!
//! [[vertex_class]]
//! representative = [0, 0]
//! # each step is [offset..., edge_class]
//! steps = [[1, 0, 0], [-1, 0, 0], [0, 1, 1], [0, -1, 1]]
//!
//! [[symmetry]]
//! linear = [[1, 0], [0, 1]]
//! shift = [0, 0]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_lattice, LatticeSpec, Point, StepRule, SymmetryRep, VertexClassSpec};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeFile {
    pub name: String,
    pub scheme: String,
    pub dim: usize,
    pub edge_class_labels: Vec<String>,
    pub translation_basis: Vec<Vec<i32>>,
    pub vertex_class: Vec<VertexClassEntry>,
    pub symmetry: Vec<SymmetryEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexClassEntry {
    pub representative: Vec<i32>,
    pub steps: Vec<Vec<i32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryEntry {
    pub linear: Vec<Vec<i32>>,
    pub shift: Vec<i32>,
}

impl LatticeFile {
    pub fn from_lattice(lattice: &LatticeSpec) -> Self {
        let dim = lattice.dim();
        LatticeFile {
            name: lattice.name().to_string(),
            scheme: lattice.scheme().to_string(),
            dim,
            edge_class_labels: lattice.edge_class_labels().to_vec(),
            translation_basis: lattice
                .translation_basis()
                .iter()
                .map(|t| t.coords(dim).to_vec())
                .collect(),
            vertex_class: lattice
                .vertex_classes()
                .iter()
                .map(|vc| VertexClassEntry {
                    representative: vc.representative.coords(dim).to_vec(),
                    steps: vc
                        .steps
                        .iter()
                        .map(|s| {
                            let mut row = s.offset.coords(dim).to_vec();
                            row.push(s.edge_class as i32);
                            row
                        })
                        .collect(),
                })
                .collect(),
            symmetry: lattice
                .symmetries()
                .iter()
                .map(|s| SymmetryEntry {
                    linear: s.rows(dim),
                    shift: s.shift.coords(dim).to_vec(),
                })
                .collect(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("lattice file serializes")
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidLattice(e.message().to_string()))
    }

    /// Converts to a [`LatticeSpec`] without running [`check_lattice`].
    pub fn into_lattice(self) -> Result<LatticeSpec> {
        let dim = self.dim;
        let vec_of = |v: &[i32], what: &str| -> Result<Point> {
            if v.len() != dim {
                return Err(Error::InvalidLattice(format!(
                    "{what} has {} components, expected {dim}",
                    v.len()
                )));
            }
            Point::from_slice(v)
        };
        let basis = self
            .translation_basis
            .iter()
            .map(|t| vec_of(t, "translation vector"))
            .collect::<Result<Vec<_>>>()?;
        let mut classes = Vec::with_capacity(self.vertex_class.len());
        for vc in &self.vertex_class {
            let representative = vec_of(&vc.representative, "representative")?;
            let mut steps = Vec::with_capacity(vc.steps.len());
            for s in &vc.steps {
                if s.len() != dim + 1 {
                    return Err(Error::InvalidLattice(format!(
                        "step {s:?} must have {dim} offset components and an edge class"
                    )));
                }
                let edge_class = usize::try_from(s[dim])
                    .map_err(|_| Error::InvalidLattice(format!("negative edge class in {s:?}")))?;
                steps.push(StepRule {
                    offset: Point::from_slice(&s[..dim])?,
                    edge_class,
                });
            }
            classes.push(VertexClassSpec {
                representative,
                steps,
            });
        }
        let mut symmetries = Vec::with_capacity(self.symmetry.len());
        for s in &self.symmetry {
            let rows: Vec<&[i32]> = s.linear.iter().map(|r| r.as_slice()).collect();
            if rows.len() != dim {
                return Err(Error::InvalidLattice(format!(
                    "symmetry linear part must have {dim} rows"
                )));
            }
            symmetries.push(SymmetryRep::new(&rows, &s.shift)?);
        }
        LatticeSpec::new(
            self.name,
            self.scheme,
            dim,
            self.edge_class_labels,
            classes,
            basis,
            symmetries,
        )
    }
}

/// Parses a TOML lattice definition and requires it to pass
/// [`check_lattice`].
pub fn parse_lattice(text: &str) -> Result<LatticeSpec> {
    let lattice = LatticeFile::parse(text)?.into_lattice()?;
    let report = check_lattice(&lattice);
    if !report.ok() {
        let msg = report
            .failures()
            .map(|d| format!("{}: {}", d.check, d.detail))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::InvalidLattice(msg));
    }
    Ok(lattice)
}

pub fn load_lattice(path: impl AsRef<Path>) -> Result<LatticeSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_lattice(&text)
}
