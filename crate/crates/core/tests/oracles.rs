//! Library enumeration against brute-force references.

mod common;

use common::*;
use saw_bounds::cluster::AnchoredSat;
use saw_bounds::walks::{length_polynomials, DEFAULT_BUDGET};
use saw_bounds::{build_gmatrix, builtin_lattice, Mode};

#[test]
fn square_walk_and_trail_polynomials() {
    let lattice = builtin_lattice("square", "general").unwrap();
    for (mode, trails) in [(Mode::Saw, false), (Mode::Sat, true)] {
        let want = walk_counts(&square_neighbours, 2, (0, 0), 7, trails);
        let got = length_polynomials(&lattice, 0, 7, mode, DEFAULT_BUDGET).unwrap();
        for (l, (g, w)) in got.iter().zip(&want).enumerate() {
            assert_eq!(&counts_of(g), w, "{mode} length {l}");
        }
    }
}

#[test]
fn square_saw_totals() {
    let want = walk_counts(&square_neighbours, 2, (0, 0), 6, false);
    let totals: Vec<u64> = want.iter().skip(1).map(total).collect();
    assert_eq!(totals, [4, 12, 36, 100, 284, 780]);
}

#[test]
fn hexagonal_walks_per_class() {
    let lattice = builtin_lattice("hexagonal", "general").unwrap();
    for (class, start) in [(0, (0, 0)), (1, (1, 0))] {
        let want = walk_counts(&hexagonal_neighbours, 3, start, 6, false);
        let got = length_polynomials(&lattice, class, 6, Mode::Saw, DEFAULT_BUDGET).unwrap();
        for l in 0..=6 {
            assert_eq!(counts_of(&got[l]), want[l], "class {class} length {l}");
        }
    }
}

#[test]
fn hexagonal_trails_per_class() {
    let lattice = builtin_lattice("hexagonal", "general").unwrap();
    for (class, start) in [(0, (0, 0)), (1, (1, 0))] {
        let want = walk_counts(&hexagonal_neighbours, 3, start, 8, true);
        let got = length_polynomials(&lattice, class, 8, Mode::Sat, DEFAULT_BUDGET).unwrap();
        for l in 0..=8 {
            assert_eq!(counts_of(&got[l]), want[l], "class {class} length {l}");
        }
    }
}

/// At unit weights each row of G sums to the number of extensions of the
/// class representative.
#[test]
fn square_row_sums_count_extensions() {
    let lattice = builtin_lattice("square", "general").unwrap();
    for (mode, trails) in [(Mode::Saw, false), (Mode::Sat, true)] {
        for (m, n) in [(1, 3), (2, 4), (3, 5), (2, 6)] {
            let g = build_gmatrix(&lattice, m, n, mode).unwrap();
            for (r, class) in g.partition.classes().iter().enumerate() {
                let path: Vec<P> = class
                    .rep
                    .vertices(&lattice)
                    .iter()
                    .map(|p| (p.0[0] as i64, p.0[1] as i64))
                    .collect();
                let want = extension_count(&square_neighbours, 2, &path, n - m, trails);
                let got: f64 = (0..g.size()).map(|s| g.entry(r, s).eval(&[1.0, 1.0]).unwrap()).sum();
                assert_eq!(got, want as f64, "{mode} ({m},{n}) row {r}");
            }
        }
    }
}

#[test]
fn exact_partial_matches_brute_force() {
    let lattice = builtin_lattice("square", "general").unwrap();
    let g = build_gmatrix(&lattice, 1, 2, Mode::Sat).unwrap();
    let reference = walk_counts(&square_neighbours, 2, (0, 0), 8, true);
    let mut r = rng(5);
    for max_len in 1..=8 {
        let sat = AnchoredSat::new(&lattice, &g, max_len).unwrap();
        for _ in 0..10 {
            let z = unit_point(&mut r, 2);
            let mut want = 0.0;
            for counts in &reference[1..=max_len] {
                want += poly_of(2, counts).eval(&z).unwrap();
            }
            assert_eq!(sat.exact_partial(&z).unwrap(), want, "L = {max_len}, z = {z:?}");
        }
    }
}
