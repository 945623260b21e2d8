//! The symbolic transfer matrix `G(m, n)`.
//!
//! Entry `(r, s)` sums the weights of all n-step walks that start with the
//! canonical representative of partition class `r` and whose last `m` steps,
//! translated back to a class representative, fall into class `s`; each row
//! is then divided by the weight of its representative.

mod file;

pub use file::{load_gmatrix, parse_gmatrix, save_gmatrix, FORMAT_VERSION};

use std::fmt;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::poly::Poly;
use crate::walks::{extend_dfs, partition_walks, Budget, Canonicalizer, Mode, Partition, WalkKey};

pub use crate::walks::DEFAULT_BUDGET;

#[derive(Clone, Debug, PartialEq)]
pub struct GMatrix {
    pub lattice_name: String,
    pub scheme: String,
    pub mode: Mode,
    pub m: usize,
    pub n: usize,
    pub dim: usize,
    pub labels: Vec<String>,
    pub partition: Partition,
    /// Row-major, `t × t`.
    pub entries: Vec<Vec<Poly>>,
}

impl GMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn num_vars(&self) -> usize {
        self.labels.len()
    }

    /// `n − m`, the degree of every entry.
    pub fn step_gap(&self) -> usize {
        self.n - self.m
    }

    pub fn entry(&self, r: usize, s: usize) -> &Poly {
        &self.entries[r][s]
    }
}

pub fn build_gmatrix(lattice: &LatticeSpec, m: usize, n: usize, mode: Mode) -> Result<GMatrix> {
    build_gmatrix_with_budget(lattice, m, n, mode, DEFAULT_BUDGET)
}

/// Builds `G(m, n)`; `budget` caps the total number of walk extensions
/// explored across all rows.
pub fn build_gmatrix_with_budget(
    lattice: &LatticeSpec,
    m: usize,
    n: usize,
    mode: Mode,
    budget: u64,
) -> Result<GMatrix> {
    if m >= n {
        return Err(Error::InvalidStepCounts { m, n });
    }
    let partition = partition_walks(lattice, m, mode, budget)?;
    if partition.is_empty() {
        return Err(Error::Precondition(format!("no {m}-step walks on this lattice")));
    }
    let canon = Canonicalizer::new(lattice)?;
    let d = lattice.num_edge_classes();
    let t = partition.len();
    let budget = Budget::new(budget);

    let rows = partition
        .classes()
        .par_iter()
        .map(|class| -> Result<Vec<Poly>> {
            // (tail class, full weight) -> number of walks
            let mut acc: Vec<FxHashMap<Vec<u32>, u64>> = vec![FxHashMap::default(); t];
            let mut tail_cache: FxHashMap<WalkKey, usize> = FxHashMap::default();
            extend_dfs(lattice, mode, &class.rep, n - m, &budget, |path| {
                if path.len() < n {
                    return Ok(());
                }
                let tail_start = path.classes[n - m];
                let tail_steps = &path.steps[n - m..];
                let raw = WalkKey {
                    start_class: tail_start,
                    offsets: tail_steps
                        .iter()
                        .flat_map(|s| s.offset.coords(lattice.dim()).iter().copied())
                        .collect(),
                };
                let s = match tail_cache.get(&raw) {
                    Some(&s) => s,
                    None => {
                        let key = partition.class_key(&canon, tail_start, tail_steps);
                        let s = partition.index_of_key(&key).ok_or_else(|| {
                            Error::Precondition(
                                "a walk tail matches no partition class; the symmetry list is inconsistent"
                                    .to_string(),
                            )
                        })?;
                        tail_cache.insert(raw, s);
                        s
                    }
                };
                let bucket = &mut acc[s];
                match bucket.get_mut(path.exponents.as_slice()) {
                    Some(c) => *c += 1,
                    None => {
                        bucket.insert(path.exponents.clone(), 1);
                    }
                }
                Ok(())
            })?;
            acc.into_iter()
                .map(|bucket| Poly::from_terms(d, bucket)?.div_monomial(&class.weight))
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(GMatrix {
        lattice_name: lattice.name().to_string(),
        scheme: lattice.scheme().to_string(),
        mode,
        m,
        n,
        dim: lattice.dim(),
        labels: lattice.edge_class_labels().to_vec(),
        partition,
        entries: rows,
    })
}

/// Derived summary of a matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixInfo {
    pub lattice_name: String,
    pub scheme: String,
    pub mode: Mode,
    pub m: usize,
    pub n: usize,
    pub t: usize,
    pub labels: Vec<String>,
    pub nonzero: Vec<Vec<bool>>,
    /// Distinct total degrees over all entry monomials.
    pub degrees: Vec<u32>,
    pub homogeneous: bool,
    pub class_sizes: Vec<u64>,
    pub num_terms: usize,
}

pub fn matrix_info(g: &GMatrix) -> MatrixInfo {
    let mut degrees: Vec<u32> = g.entries.iter().flatten().flat_map(|p| p.degrees()).collect();
    degrees.sort_unstable();
    degrees.dedup();
    let gap = g.step_gap() as u32;
    MatrixInfo {
        lattice_name: g.lattice_name.clone(),
        scheme: g.scheme.clone(),
        mode: g.mode,
        m: g.m,
        n: g.n,
        t: g.size(),
        labels: g.labels.clone(),
        nonzero: g
            .entries
            .iter()
            .map(|row| row.iter().map(|p| !p.is_zero()).collect())
            .collect(),
        homogeneous: degrees.iter().all(|&d| d == gap),
        degrees,
        class_sizes: g.partition.classes().iter().map(|c| c.size).collect(),
        num_terms: g.entries.iter().flatten().map(|p| p.num_terms()).sum(),
    }
}

impl MatrixInfo {
    pub fn nonzero_count(&self) -> usize {
        self.nonzero.iter().flatten().filter(|b| **b).count()
    }
}

impl fmt::Display for MatrixInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lattice     {}/{}", self.lattice_name, self.scheme)?;
        writeln!(f, "mode        {}", self.mode)?;
        writeln!(f, "steps       m={} n={}", self.m, self.n)?;
        writeln!(f, "variables   {}", self.labels.join(" "))?;
        writeln!(f, "t           {}", self.t)?;
        writeln!(f, "nonzero     {} of {}", self.nonzero_count(), self.t * self.t)?;
        writeln!(f, "terms       {}", self.num_terms)?;
        let degrees: Vec<String> = self.degrees.iter().map(u32::to_string).collect();
        writeln!(
            f,
            "degrees     {} ({})",
            degrees.join(","),
            if self.homogeneous { "homogeneous" } else { "NOT homogeneous" }
        )?;
        let sizes: Vec<String> = self.class_sizes.iter().map(u64::to_string).collect();
        writeln!(f, "class sizes {}", sizes.join(" "))?;
        writeln!(f, "pattern")?;
        for row in &self.nonzero {
            let line: String = row.iter().map(|&b| if b { '#' } else { '.' }).collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{builtin_lattice, BUILTIN_LATTICES};
    use crate::poly::Monomial;

    fn poly(d: usize, terms: &[(&[u32], i64)]) -> Poly {
        Poly::from_terms(d, terms.iter().map(|(e, c)| (e.to_vec(), *c))).unwrap()
    }

    #[test]
    fn square_one_two() {
        let sq = builtin_lattice("square", "general").unwrap();
        let g = build_gmatrix(&sq, 1, 2, Mode::Saw).unwrap();
        assert_eq!(g.size(), 2);
        // class 0 is the horizontal orbit, class 1 the vertical one.
        assert_eq!(g.partition.classes()[0].weight, Monomial::new(vec![1, 0]));
        let x = poly(2, &[(&[1, 0], 1)]);
        let y = poly(2, &[(&[0, 1], 1)]);
        assert_eq!(g.entries[0][0], x);
        assert_eq!(g.entries[0][1], y.mul_monomial(&Monomial::one(2), 2).unwrap());
        assert_eq!(g.entries[1][0], x.mul_monomial(&Monomial::one(2), 2).unwrap());
        assert_eq!(g.entries[1][1], y);
        for row in &g.entries {
            let s: f64 = row.iter().map(|p| p.eval(&[1.0, 1.0]).unwrap()).sum();
            assert_eq!(s, 3.0);
        }
    }

    #[test]
    fn hexagonal_one_two() {
        let hex = builtin_lattice("hexagonal", "general").unwrap();
        let g = build_gmatrix(&hex, 1, 2, Mode::Saw).unwrap();
        assert_eq!(g.size(), 3);
        let v = |i: usize| {
            let mut e = vec![0; 3];
            e[i] = 1;
            Poly::term(Monomial::new(e), 1)
        };
        let idx: Vec<usize> = (0..3)
            .map(|i| {
                let mut e = vec![0; 3];
                e[i] = 1;
                let w = Monomial::new(e);
                g.partition.classes().iter().position(|c| c.weight == w).unwrap()
            })
            .collect();
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { Poly::zero(3) } else { v(b) };
                assert_eq!(g.entries[idx[a]][idx[b]], want, "({a},{b})");
            }
        }
    }

    #[test]
    fn m_zero_rows_are_single_steps() {
        for &(name, scheme) in BUILTIN_LATTICES {
            let l = builtin_lattice(name, scheme).unwrap();
            let g = build_gmatrix(&l, 0, 1, Mode::Saw).unwrap();
            assert_eq!(g.size(), l.num_vertex_classes());
            for k in 0..l.num_vertex_classes() {
                for s in 0..g.size() {
                    let mut want = Poly::zero(l.num_edge_classes());
                    for (j, rule) in l.steps(k).iter().enumerate() {
                        if l.step_target(k, j) == Some(s) {
                            want.add_term(Monomial::var(l.num_edge_classes(), rule.edge_class), 1.into());
                        }
                    }
                    assert_eq!(g.entries[k][s], want, "{name}/{scheme} ({k},{s})");
                }
            }
        }
    }

    #[test]
    fn rejects_m_not_below_n() {
        let sq = builtin_lattice("square", "general").unwrap();
        assert!(matches!(
            build_gmatrix(&sq, 2, 2, Mode::Saw),
            Err(Error::InvalidStepCounts { m: 2, n: 2 })
        ));
        assert!(matches!(
            build_gmatrix(&sq, 2, 1, Mode::Saw),
            Err(Error::InvalidStepCounts { .. })
        ));
    }

    #[test]
    fn budget_is_enforced() {
        let sq = builtin_lattice("square", "general").unwrap();
        assert!(matches!(
            build_gmatrix_with_budget(&sq, 1, 8, Mode::Saw, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn info_summary() {
        let sq = builtin_lattice("square", "general").unwrap();
        let g = build_gmatrix(&sq, 1, 2, Mode::Saw).unwrap();
        let info = matrix_info(&g);
        assert_eq!(info.t, 2);
        assert_eq!(info.nonzero_count(), 4);
        assert_eq!(info.class_sizes, vec![2, 2]);
        let g3 = build_gmatrix(&sq, 1, 3, Mode::Saw).unwrap();
        let info = matrix_info(&g3);
        assert_eq!(info.t, 2);
        assert!(info.homogeneous);
        assert_eq!(info.degrees, vec![2]);
    }

    #[test]
    fn deterministic_under_parallelism() {
        let tri = builtin_lattice("triangular", "xz").unwrap();
        let a = build_gmatrix(&tri, 2, 4, Mode::Sat).unwrap();
        let b = build_gmatrix(&tri, 2, 4, Mode::Sat).unwrap();
        assert_eq!(a, b);
    }
}
