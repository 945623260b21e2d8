//! Brute-force reference enumerators, written against hard-coded neighbour
//! rules rather than the library's lattice descriptions.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saw_bounds::Poly;

pub type P = (i64, i64);
/// Exponent vector → number of walks.
pub type Counts = BTreeMap<Vec<u32>, u64>;

/// Square lattice: horizontal edges are class 0, vertical edges class 1.
pub fn square_neighbours(p: P) -> Vec<(P, usize)> {
    let (x, y) = p;
    vec![((x + 1, y), 0), ((x - 1, y), 0), ((x, y + 1), 1), ((x, y - 1), 1)]
}

/// Honeycomb as a brick wall: rows are paths, and every vertex with even
/// coordinate sum has a rung upwards. Edge classes are the three edge
/// directions of the honeycomb.
pub fn hexagonal_neighbours(p: P) -> Vec<(P, usize)> {
    let (x, y) = p;
    if (x + y).rem_euclid(2) == 0 {
        vec![((x + 1, y), 0), ((x - 1, y), 1), ((x, y + 1), 2)]
    } else {
        vec![((x - 1, y), 0), ((x + 1, y), 1), ((x, y - 1), 2)]
    }
}

fn edge(a: P, b: P) -> (P, P) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

struct Search<'a> {
    nbrs: &'a dyn Fn(P) -> Vec<(P, usize)>,
    trails: bool,
    visited: HashSet<P>,
    used: HashSet<(P, P)>,
    exps: Vec<u32>,
}

impl Search<'_> {
    fn new<'a>(nbrs: &'a dyn Fn(P) -> Vec<(P, usize)>, nvars: usize, trails: bool, path: &[P]) -> Search<'a> {
        let mut s = Search {
            nbrs,
            trails,
            visited: path.iter().copied().collect(),
            used: HashSet::new(),
            exps: vec![0; nvars],
        };
        for w in path.windows(2) {
            s.used.insert(edge(w[0], w[1]));
        }
        s
    }

    fn allowed(&self, from: P, to: P) -> bool {
        if self.trails {
            !self.used.contains(&edge(from, to))
        } else {
            !self.visited.contains(&to)
        }
    }

    fn walk(&mut self, at: P, depth: usize, max: usize, out: &mut Vec<Counts>) {
        *out[depth].entry(self.exps.clone()).or_insert(0) += 1;
        if depth == max {
            return;
        }
        for (to, class) in (self.nbrs)(at) {
            if !self.allowed(at, to) {
                continue;
            }
            let fresh = self.visited.insert(to);
            self.used.insert(edge(at, to));
            self.exps[class] += 1;
            self.walk(to, depth + 1, max, out);
            self.exps[class] -= 1;
            self.used.remove(&edge(at, to));
            if fresh {
                self.visited.remove(&to);
            }
        }
    }
}

/// Counts by exponent vector of walks (or trails) from `start`, for every
/// length `0..=max_len`.
pub fn walk_counts(nbrs: &dyn Fn(P) -> Vec<(P, usize)>, nvars: usize, start: P, max_len: usize, trails: bool) -> Vec<Counts> {
    let mut out = vec![Counts::new(); max_len + 1];
    Search::new(nbrs, nvars, trails, &[start]).walk(start, 0, max_len, &mut out);
    out
}

/// Number of ways to extend the walk `path` by exactly `extra` steps.
pub fn extension_count(nbrs: &dyn Fn(P) -> Vec<(P, usize)>, nvars: usize, path: &[P], extra: usize, trails: bool) -> u64 {
    let mut out = vec![Counts::new(); extra + 1];
    let end = *path.last().unwrap();
    Search::new(nbrs, nvars, trails, path).walk(end, 0, extra, &mut out);
    out[extra].values().sum()
}

pub fn total(c: &Counts) -> u64 {
    c.values().sum()
}

pub fn counts_of(p: &Poly) -> Counts {
    p.terms()
        .map(|(m, c)| (m.exponents().to_vec(), u64::try_from(c).expect("count fits in u64")))
        .collect()
}

pub fn poly_of(nvars: usize, c: &Counts) -> Poly {
    Poly::from_terms(nvars, c.iter().map(|(e, n)| (e.clone(), *n))).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in `(0, 1]^d`.
pub fn unit_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| 1.0 - rng.gen::<f64>()).collect()
}
