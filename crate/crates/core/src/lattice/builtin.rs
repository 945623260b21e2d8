use super::{LatticeSpec, Point, StepRule, SymmetryRep, VertexClassSpec, MAX_DIM};
use crate::error::{Error, Result};

/// Supported `(name, scheme)` pairs.
pub const BUILTIN_LATTICES: &[(&str, &str)] = &[
    ("square", "general"),
    ("cubic", "general"),
    ("cubic", "xy-equal"),
    ("triangular", "general"),
    ("triangular", "xz"),
    ("hexagonal", "general"),
    ("hexagonal", "xy-equal"),
];

pub fn builtin_lattice(name: &str, scheme: &str) -> Result<LatticeSpec> {
    match (name, scheme) {
        ("square", "general") => square(),
        ("cubic", "general") => cubic(false),
        ("cubic", "xy-equal") => cubic(true),
        ("triangular", "general") => triangular(false),
        ("triangular", "xz") => triangular(true),
        ("hexagonal", "general") => hexagonal(false),
        ("hexagonal", "xy-equal") => hexagonal(true),
        _ => Err(Error::UnknownLattice {
            name: name.to_string(),
            scheme: scheme.to_string(),
        }),
    }
}

fn pt(c: &[i32]) -> Point {
    Point::from_slice(c).expect("builtin coordinates fit")
}

fn step(offset: &[i32], edge_class: usize) -> StepRule {
    StepRule {
        offset: pt(offset),
        edge_class,
    }
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn unit_basis(dim: usize) -> Vec<Point> {
    (0..dim)
        .map(|i| {
            let mut p = [0; MAX_DIM];
            p[i] = 1;
            Point(p)
        })
        .collect()
}

fn linear(rows: &[&[i32]]) -> SymmetryRep {
    let shift = vec![0; rows.len()];
    SymmetryRep::new(rows, &shift).expect("builtin symmetry shape")
}

/// All sign flips `diag(±1, …, ±1)`, optionally composed with the swap of
/// the first two coordinates.
fn sign_symmetries(dim: usize, with_swap: bool) -> Vec<SymmetryRep> {
    let mut out = Vec::new();
    let swaps: &[bool] = if with_swap { &[false, true] } else { &[false] };
    for &swap in swaps {
        for mask in 0..(1u32 << dim) {
            let mut rows = vec![vec![0; dim]; dim];
            for (i, row) in rows.iter_mut().enumerate() {
                let col = match (swap, i) {
                    (true, 0) => 1,
                    (true, 1) => 0,
                    _ => i,
                };
                row[col] = if mask & (1 << i) != 0 { -1 } else { 1 };
            }
            let refs: Vec<&[i32]> = rows.iter().map(|r| r.as_slice()).collect();
            out.push(linear(&refs));
        }
    }
    out
}

fn square() -> Result<LatticeSpec> {
    LatticeSpec::new(
        "square",
        "general",
        2,
        labels(&["x", "y"]),
        vec![VertexClassSpec {
            representative: Point::ORIGIN,
            steps: vec![
                step(&[1, 0], 0),
                step(&[-1, 0], 0),
                step(&[0, 1], 1),
                step(&[0, -1], 1),
            ],
        }],
        unit_basis(2),
        sign_symmetries(2, false),
    )
}

fn cubic(xy_equal: bool) -> Result<LatticeSpec> {
    let (scheme, names, z_class) = if xy_equal {
        ("xy-equal", &["x", "z"][..], 1)
    } else {
        ("general", &["x", "y", "z"][..], 2)
    };
    let y_class = if xy_equal { 0 } else { 1 };
    LatticeSpec::new(
        "cubic",
        scheme,
        3,
        labels(names),
        vec![VertexClassSpec {
            representative: Point::ORIGIN,
            steps: vec![
                step(&[1, 0, 0], 0),
                step(&[-1, 0, 0], 0),
                step(&[0, 1, 0], y_class),
                step(&[0, -1, 0], y_class),
                step(&[0, 0, 1], z_class),
                step(&[0, 0, -1], z_class),
            ],
        }],
        unit_basis(3),
        sign_symmetries(3, xy_equal),
    )
}

fn triangular(xz: bool) -> Result<LatticeSpec> {
    let (scheme, names, y_class, z_class) = if xz {
        ("xz", &["x", "z"][..], 0, 1)
    } else {
        ("general", &["x", "y", "z"][..], 1, 2)
    };
    let mut symmetries = vec![linear(&[&[1, 0], &[0, 1]]), linear(&[&[-1, 0], &[0, -1]])];
    if xz {
        symmetries.push(linear(&[&[0, 1], &[1, 0]]));
        symmetries.push(linear(&[&[0, -1], &[-1, 0]]));
    }
    LatticeSpec::new(
        "triangular",
        scheme,
        2,
        labels(names),
        vec![VertexClassSpec {
            representative: Point::ORIGIN,
            steps: vec![
                step(&[1, 0], 0),
                step(&[-1, 0], 0),
                step(&[0, 1], y_class),
                step(&[0, -1], y_class),
                step(&[1, 1], z_class),
                step(&[-1, -1], z_class),
            ],
        }],
        unit_basis(2),
        symmetries,
    )
}

/// Honeycomb lattice on Z^2: (0,0) and (1,0) represent the two vertex
/// classes, translations are generated by (2,1) and (1,-1). Each undirected
/// edge is labelled by its direction up to sign.
fn hexagonal(xy_equal: bool) -> Result<LatticeSpec> {
    let (scheme, names, y_class, z_class) = if xy_equal {
        ("xy-equal", &["x", "z"][..], 0, 1)
    } else {
        ("general", &["x", "y", "z"][..], 1, 2)
    };
    let swap = SymmetryRep::new(&[&[-1, 0], &[0, -1]], &[1, 0])?;
    LatticeSpec::new(
        "hexagonal",
        scheme,
        2,
        labels(names),
        vec![
            VertexClassSpec {
                representative: pt(&[0, 0]),
                steps: vec![step(&[1, 0], 0), step(&[0, 1], y_class), step(&[-1, -1], z_class)],
            },
            VertexClassSpec {
                representative: pt(&[1, 0]),
                steps: vec![step(&[-1, 0], 0), step(&[0, -1], y_class), step(&[1, 1], z_class)],
            },
        ],
        vec![pt(&[2, 1]), pt(&[1, -1])],
        vec![SymmetryRep::identity(), swap],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::check_lattice;

    #[test]
    fn every_builtin_passes_checks() {
        for &(name, scheme) in BUILTIN_LATTICES {
            let lattice = builtin_lattice(name, scheme).unwrap();
            let report = check_lattice(&lattice);
            assert!(report.ok(), "{name}/{scheme}: {report}");
            assert!(report.is_undirected(), "{name}/{scheme} should be undirected");
        }
    }

    #[test]
    fn shapes() {
        let sq = builtin_lattice("square", "general").unwrap();
        assert_eq!(sq.num_vertex_classes(), 1);
        assert_eq!(sq.num_edge_classes(), 2);
        assert_eq!(sq.steps(0).len(), 4);
        assert_eq!(sq.symmetries().len(), 4);

        let tri = builtin_lattice("triangular", "xz").unwrap();
        assert_eq!(tri.steps(0).len(), 6);
        assert_eq!(tri.symmetries().len(), 4);

        assert_eq!(builtin_lattice("cubic", "general").unwrap().symmetries().len(), 8);
        assert_eq!(builtin_lattice("cubic", "xy-equal").unwrap().symmetries().len(), 16);

        let hex = builtin_lattice("hexagonal", "general").unwrap();
        assert_eq!(hex.num_vertex_classes(), 2);
        assert_eq!(hex.num_edge_classes(), 3);
        let offsets: Vec<Point> = hex.steps(0).iter().map(|s| s.offset).collect();
        assert_eq!(offsets, vec![pt(&[1, 0]), pt(&[0, 1]), pt(&[-1, -1])]);
        let targets: Vec<Point> = hex
            .steps(1)
            .iter()
            .map(|s| hex.representative(1).add(s.offset))
            .collect();
        assert_eq!(targets, vec![pt(&[0, 0]), pt(&[1, -1]), pt(&[2, 1])]);
    }

    #[test]
    fn unknown_pair() {
        assert!(matches!(
            builtin_lattice("square", "xz"),
            Err(Error::UnknownLattice { .. })
        ));
    }
}
