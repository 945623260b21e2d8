//! Self-avoiding walks and trails started at vertex-class representatives:
//! enumeration, canonical forms under weight-preserving symmetries, and the
//! partition of m-step walks into symmetry classes.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, Point, SymmetryRep};
use crate::poly::{Monomial, Poly};

/// Default cap on enumerated walks / explored extensions.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

/// Self-avoiding walks (distinct vertices) or self-avoiding trails
/// (distinct undirected edges).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Saw,
    Sat,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Saw => "saw",
            Mode::Sat => "sat",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "saw" => Ok(Mode::Saw),
            "sat" => Ok(Mode::Sat),
            _ => Err(Error::Precondition(format!("unknown walk mode `{s}` (use saw or sat)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub offset: Point,
    pub edge_class: usize,
}

/// A walk starting at the representative of `start_class`, stored as step
/// offsets. Absolute vertices are recomputed on demand.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Walk {
    pub start_class: usize,
    pub steps: Vec<Step>,
}

impl Walk {
    pub fn empty(start_class: usize) -> Self {
        Walk {
            start_class,
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Number of steps in each edge class.
    pub fn exponents(&self, num_edge_classes: usize) -> Vec<u32> {
        let mut e = vec![0; num_edge_classes];
        for s in &self.steps {
            e[s.edge_class] += 1;
        }
        e
    }

    pub fn weight(&self, num_edge_classes: usize) -> Monomial {
        Monomial::new(self.exponents(num_edge_classes))
    }

    pub fn key(&self, dim: usize) -> WalkKey {
        WalkKey {
            start_class: self.start_class,
            offsets: self
                .steps
                .iter()
                .flat_map(|s| s.offset.coords(dim).iter().copied())
                .collect(),
        }
    }

    pub fn vertices(&self, lattice: &LatticeSpec) -> Vec<Point> {
        let mut v = lattice.representative(self.start_class);
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(v);
        for s in &self.steps {
            v = v.add(s.offset);
            out.push(v);
        }
        out
    }

    /// Checks that every step is an edge of the lattice with the declared
    /// edge class and that the walk is self-avoiding in the given mode.
    pub fn validate(&self, lattice: &LatticeSpec, mode: Mode) -> Result<()> {
        if self.start_class >= lattice.num_vertex_classes() {
            return Err(Error::InvalidWalk(format!("no vertex class {}", self.start_class)));
        }
        let mut path = Path::new(lattice, self.start_class, mode);
        for s in &self.steps {
            let class = path.end_class();
            let j = lattice.find_step(class, s.offset).ok_or_else(|| {
                Error::InvalidWalk(format!("{} is not a step from class {class}", s.offset))
            })?;
            if lattice.steps(class)[j].edge_class != s.edge_class {
                return Err(Error::InvalidWalk(format!(
                    "step {} has edge class {}, not {}",
                    s.offset,
                    lattice.steps(class)[j].edge_class,
                    s.edge_class
                )));
            }
            if !path.try_push(lattice, j)? {
                return Err(Error::InvalidWalk(format!(
                    "step {} revisits a {}",
                    s.offset,
                    if mode == Mode::Saw { "vertex" } else { "edge" }
                )));
            }
        }
        Ok(())
    }

    /// One-line dump: the start class followed by `(offset…,edge_class)`
    /// tuples, e.g. `0 (1,0,0) (0,1,1)`.
    pub fn to_dump(&self, dim: usize) -> String {
        let mut out = self.start_class.to_string();
        for s in &self.steps {
            out.push_str(" (");
            for c in s.offset.coords(dim) {
                out.push_str(&c.to_string());
                out.push(',');
            }
            out.push_str(&s.edge_class.to_string());
            out.push(')');
        }
        out
    }

    pub fn parse_dump(line: &str, dim: usize) -> Result<Walk> {
        let bad = || Error::Malformed(format!("walk `{line}`"));
        let mut tokens = line.split_whitespace();
        let start_class = tokens.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let mut steps = Vec::new();
        for tok in tokens {
            let inner = tok
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(bad)?;
            let nums = inner
                .split(',')
                .map(|c| c.parse::<i32>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            if nums.len() != dim + 1 || nums[dim] < 0 {
                return Err(bad());
            }
            steps.push(Step {
                offset: Point::from_slice(&nums[..dim])?,
                edge_class: nums[dim] as usize,
            });
        }
        Ok(Walk { start_class, steps })
    }
}

/// Ordering key of a walk: lexicographic on `(start_class, offsets)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WalkKey {
    pub start_class: usize,
    pub offsets: Vec<i32>,
}

/// Applies a lattice's symmetry list to walks. Start-class images are
/// tabulated once per symmetry.
#[derive(Clone, Debug)]
pub struct Canonicalizer {
    dim: usize,
    maps: Vec<(SymmetryRep, Vec<usize>)>,
}

impl Canonicalizer {
    pub fn new(lattice: &LatticeSpec) -> Result<Self> {
        let mut maps = Vec::with_capacity(lattice.symmetries().len());
        for sym in lattice.symmetries() {
            let classes = (0..lattice.num_vertex_classes())
                .map(|k| lattice.classify_vertex(sym.apply_point(lattice.representative(k))))
                .collect::<Result<Vec<_>>>()?;
            maps.push((*sym, classes));
        }
        Ok(Canonicalizer {
            dim: lattice.dim(),
            maps,
        })
    }

    fn image_key(&self, map: &(SymmetryRep, Vec<usize>), start_class: usize, steps: &[Step]) -> WalkKey {
        let (sym, classes) = map;
        let mut offsets = Vec::with_capacity(steps.len() * self.dim);
        for s in steps {
            offsets.extend_from_slice(sym.apply_vector(s.offset).coords(self.dim));
        }
        WalkKey {
            start_class: classes[start_class],
            offsets,
        }
    }

    /// Smallest key over the images of the walk under every listed symmetry.
    pub fn key_of(&self, start_class: usize, steps: &[Step]) -> WalkKey {
        self.maps
            .iter()
            .map(|m| self.image_key(m, start_class, steps))
            .min()
            .unwrap_or_else(|| WalkKey {
                start_class,
                offsets: steps
                    .iter()
                    .flat_map(|s| s.offset.coords(self.dim).iter().copied())
                    .collect(),
            })
    }

    /// The symmetry image with the smallest key (a member of the orbit).
    pub fn canonical_form(&self, walk: &Walk) -> Walk {
        let best = self
            .maps
            .iter()
            .min_by_key(|m| self.image_key(m, walk.start_class, &walk.steps));
        match best {
            None => walk.clone(),
            Some((sym, classes)) => Walk {
                start_class: classes[walk.start_class],
                steps: walk
                    .steps
                    .iter()
                    .map(|s| Step {
                        offset: sym.apply_vector(s.offset),
                        edge_class: s.edge_class,
                    })
                    .collect(),
            },
        }
    }
}

/// Canonical key of a walk: the minimum key over all symmetry images.
pub fn canonical_key(lattice: &LatticeSpec, walk: &Walk) -> Result<WalkKey> {
    Ok(Canonicalizer::new(lattice)?.key_of(walk.start_class, &walk.steps))
}

/// Number of steps per edge class.
pub fn weight_exponents(walk: &Walk, num_edge_classes: usize) -> Vec<u32> {
    walk.exponents(num_edge_classes)
}

/// Shared counter for enumeration budgets; safe to share across threads.
#[derive(Debug)]
pub struct Budget {
    limit: u64,
    used: AtomicU64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget {
            limit,
            used: AtomicU64::new(0),
        }
    }

    #[inline]
    pub fn tick(&self) -> Result<()> {
        if self.used.fetch_add(1, Ordering::Relaxed) >= self.limit {
            return Err(Error::BudgetExceeded { budget: self.limit });
        }
        Ok(())
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed).min(self.limit)
    }
}

/// A walk under construction with its visited vertex / edge set, supporting
/// push and pop for depth-first search.
#[derive(Debug)]
pub(crate) struct Path {
    mode: Mode,
    pub vertices: Vec<Point>,
    pub classes: Vec<usize>,
    pub steps: Vec<Step>,
    pub exponents: Vec<u32>,
    seen_vertices: FxHashSet<Point>,
    seen_edges: FxHashSet<(Point, Point)>,
}

#[inline]
fn edge_key(a: Point, b: Point) -> (Point, Point) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Path {
    pub fn new(lattice: &LatticeSpec, start_class: usize, mode: Mode) -> Self {
        let start = lattice.representative(start_class);
        let mut seen_vertices = FxHashSet::default();
        if mode == Mode::Saw {
            seen_vertices.insert(start);
        }
        Path {
            mode,
            vertices: vec![start],
            classes: vec![start_class],
            steps: Vec::new(),
            exponents: vec![0; lattice.num_edge_classes()],
            seen_vertices,
            seen_edges: FxHashSet::default(),
        }
    }

    /// Replays a known-valid walk.
    pub fn from_walk(lattice: &LatticeSpec, walk: &Walk, mode: Mode) -> Result<Self> {
        walk.validate(lattice, mode)?;
        let mut path = Path::new(lattice, walk.start_class, mode);
        for s in &walk.steps {
            let j = lattice
                .find_step(path.end_class(), s.offset)
                .expect("validated walk");
            path.try_push(lattice, j)?;
        }
        Ok(path)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    #[inline]
    pub fn end(&self) -> Point {
        *self.vertices.last().expect("path has a start vertex")
    }

    #[inline]
    pub fn end_class(&self) -> usize {
        *self.classes.last().expect("path has a start vertex")
    }

    /// Appends step rule `j` of the current end class if it keeps the path
    /// self-avoiding; returns whether the step was taken.
    #[inline]
    pub fn try_push(&mut self, lattice: &LatticeSpec, j: usize) -> Result<bool> {
        let class = self.end_class();
        let rule = lattice.steps(class)[j];
        let from = self.end();
        let to = from.add(rule.offset);
        match self.mode {
            Mode::Saw => {
                if !self.seen_vertices.insert(to) {
                    return Ok(false);
                }
            }
            Mode::Sat => {
                if !self.seen_edges.insert(edge_key(from, to)) {
                    return Ok(false);
                }
            }
        }
        let target = lattice
            .step_target(class, j)
            .ok_or_else(|| Error::NotOnLattice(to.to_string()))?;
        self.vertices.push(to);
        self.classes.push(target);
        self.steps.push(Step {
            offset: rule.offset,
            edge_class: rule.edge_class,
        });
        self.exponents[rule.edge_class] += 1;
        Ok(true)
    }

    #[inline]
    pub fn pop(&mut self) {
        let step = self.steps.pop().expect("pop on a non-empty path");
        let to = self.vertices.pop().expect("vertex per step");
        self.classes.pop();
        self.exponents[step.edge_class] -= 1;
        match self.mode {
            Mode::Saw => {
                self.seen_vertices.remove(&to);
            }
            Mode::Sat => {
                self.seen_edges.remove(&edge_key(self.end(), to));
            }
        }
    }
}

/// Depth-first extension of `prefix` by up to `extra` steps with an
/// explicit stack. `visit` sees every extended path (lengths
/// `prefix.len() + 1 ..= prefix.len() + extra`).
pub(crate) fn extend_dfs<F>(
    lattice: &LatticeSpec,
    mode: Mode,
    prefix: &Walk,
    extra: usize,
    budget: &Budget,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(&Path) -> Result<()>,
{
    let mut path = Path::from_walk(lattice, prefix, mode)?;
    if extra == 0 {
        return Ok(());
    }
    let target_len = prefix.len() + extra;
    // next[i] = next step rule to try at extension depth i.
    let mut next: Vec<usize> = vec![0];
    while let Some(top) = next.last_mut() {
        let class = path.end_class();
        let j = *top;
        if j >= lattice.steps(class).len() {
            next.pop();
            if !next.is_empty() {
                path.pop();
            }
            continue;
        }
        *top += 1;
        if !path.try_push(lattice, j)? {
            continue;
        }
        budget.tick()?;
        visit(&path)?;
        if path.len() < target_len {
            next.push(0);
        } else {
            path.pop();
        }
    }
    Ok(())
}

/// All m-step walks of the given mode from each vertex-class
/// representative, generated breadth-first. Ordered by start class, then by
/// step declaration order.
pub fn enumerate_walks(lattice: &LatticeSpec, m: usize, mode: Mode, budget: u64) -> Result<Vec<Walk>> {
    let budget = Budget::new(budget);
    let mut out = Vec::new();
    for k in 0..lattice.num_vertex_classes() {
        budget.tick()?;
        // Frontier entries: walk, its vertices, its end class.
        let mut frontier = vec![(Walk::empty(k), vec![lattice.representative(k)], k)];
        for _ in 0..m {
            let mut next = Vec::with_capacity(frontier.len() * 3);
            for (walk, vertices, class) in &frontier {
                let end = *vertices.last().expect("non-empty");
                for (j, rule) in lattice.steps(*class).iter().enumerate() {
                    let to = end.add(rule.offset);
                    let ok = match mode {
                        Mode::Saw => !vertices.contains(&to),
                        Mode::Sat => !vertices
                            .windows(2)
                            .any(|w| edge_key(w[0], w[1]) == edge_key(end, to)),
                    };
                    if !ok {
                        continue;
                    }
                    budget.tick()?;
                    let target = lattice
                        .step_target(*class, j)
                        .ok_or_else(|| Error::NotOnLattice(to.to_string()))?;
                    let mut w = walk.clone();
                    w.steps.push(Step {
                        offset: rule.offset,
                        edge_class: rule.edge_class,
                    });
                    let mut v = vertices.clone();
                    v.push(to);
                    next.push((w, v, target));
                }
            }
            frontier = next;
        }
        out.extend(frontier.into_iter().map(|(w, _, _)| w));
    }
    Ok(out)
}

/// Generating polynomials of walks from representative `class` by length:
/// entry `l` is `sum over l-step walks of z^N(walk)` for `l = 0..=max_len`.
pub fn length_polynomials(
    lattice: &LatticeSpec,
    class: usize,
    max_len: usize,
    mode: Mode,
    budget: u64,
) -> Result<Vec<Poly>> {
    let d = lattice.num_edge_classes();
    let budget = Budget::new(budget);
    let mut counts: Vec<FxHashMap<Vec<u32>, u64>> = vec![FxHashMap::default(); max_len + 1];
    extend_dfs(lattice, mode, &Walk::empty(class), max_len, &budget, |path| {
        let bucket = &mut counts[path.len()];
        match bucket.get_mut(path.exponents.as_slice()) {
            Some(c) => *c += 1,
            None => {
                bucket.insert(path.exponents.clone(), 1);
            }
        }
        Ok(())
    })?;
    let mut out = Vec::with_capacity(max_len + 1);
    out.push(Poly::one(d));
    for bucket in counts.into_iter().skip(1) {
        out.push(Poly::from_terms(d, bucket)?);
    }
    Ok(out)
}

/// Weighted sum over n-step walks from representative `class`.
pub fn weighted_count(
    lattice: &LatticeSpec,
    n: usize,
    class: usize,
    mode: Mode,
    z: &[f64],
    budget: u64,
) -> Result<f64> {
    check_positive(z, lattice.num_edge_classes())?;
    let polys = length_polynomials(lattice, class, n, mode, budget)?;
    polys[n].eval(z)
}

pub(crate) fn check_positive(z: &[f64], d: usize) -> Result<()> {
    if z.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: z.len(),
        });
    }
    if z.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::NonPositiveWeight(z.to_vec()));
    }
    Ok(())
}

/// One class of the partition: its canonical representative, the number of
/// member walks and the representative's weight monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionClass {
    pub rep: Walk,
    pub size: u64,
    pub weight: Monomial,
}

/// Partition of the m-step walks from all representatives into symmetry
/// orbits, ordered by ascending canonical key.
///
/// For `m = 0` the partition has one class per vertex class, without
/// symmetry reduction.
#[derive(Clone, Debug)]
pub struct Partition {
    m: usize,
    mode: Mode,
    classes: Vec<PartitionClass>,
    index: HashMap<WalkKey, usize>,
}

impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.mode == other.mode && self.classes == other.classes
    }
}

impl Partition {
    /// Rebuilds a partition from stored classes. Each representative must
    /// be in canonical form (its own key is the class key).
    pub fn from_classes(m: usize, mode: Mode, dim: usize, classes: Vec<PartitionClass>) -> Result<Self> {
        let mut index = HashMap::with_capacity(classes.len());
        for (i, c) in classes.iter().enumerate() {
            if c.rep.len() != m {
                return Err(Error::Malformed(format!(
                    "class {i} representative has {} steps, expected {m}",
                    c.rep.len()
                )));
            }
            if index.insert(c.rep.key(dim), i).is_some() {
                return Err(Error::Malformed(format!("class {i} repeats a representative")));
            }
        }
        Ok(Partition {
            m,
            mode,
            classes,
            index,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn classes(&self) -> &[PartitionClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn total_walks(&self) -> u64 {
        self.classes.iter().map(|c| c.size).sum()
    }

    pub fn class_key(&self, canon: &Canonicalizer, start_class: usize, steps: &[Step]) -> WalkKey {
        if self.m == 0 {
            WalkKey {
                start_class,
                offsets: Vec::new(),
            }
        } else {
            canon.key_of(start_class, steps)
        }
    }

    pub fn index_of_key(&self, key: &WalkKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Index of the class containing `walk`.
    pub fn classify(&self, canon: &Canonicalizer, walk: &Walk) -> Option<usize> {
        self.index_of_key(&self.class_key(canon, walk.start_class, &walk.steps))
    }
}

/// Groups the m-step walks into canonical-key fibres.
pub fn partition_walks(lattice: &LatticeSpec, m: usize, mode: Mode, budget: u64) -> Result<Partition> {
    let canon = Canonicalizer::new(lattice)?;
    let d = lattice.num_edge_classes();
    let dim = lattice.dim();
    let walks = enumerate_walks(lattice, m, mode, budget)?;
    let mut fibres: BTreeMap<WalkKey, (Walk, u64)> = BTreeMap::new();
    for w in walks {
        let (key, rep) = if m == 0 {
            (w.key(dim), w)
        } else {
            let rep = canon.canonical_form(&w);
            (rep.key(dim), rep)
        };
        fibres.entry(key).or_insert((rep, 0)).1 += 1;
    }
    let classes = fibres
        .into_values()
        .map(|(rep, size)| PartitionClass {
            weight: rep.weight(d),
            rep,
            size,
        })
        .collect();
    Partition::from_classes(m, mode, dim, classes)
}
