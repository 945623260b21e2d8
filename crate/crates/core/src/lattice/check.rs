use std::collections::VecDeque;
use std::fmt;

use super::{determinant, LatticeSpec, SymmetryRep, MAX_DIM};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub check: &'static str,
    pub passed: bool,
    /// Informational checks do not affect [`LatticeReport::ok`].
    pub required: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LatticeReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl LatticeReport {
    pub fn ok(&self) -> bool {
        self.diagnostics.iter().all(|d| d.passed || !d.required)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.required && !d.passed)
    }

    pub fn is_undirected(&self) -> bool {
        self.diagnostics
            .iter()
            .any(|d| d.check == "undirected" && d.passed)
    }

    pub fn get(&self, check: &str) -> Option<&Diagnostic> {
        self.diagnostics.iter().find(|d| d.check == check)
    }

    fn push(&mut self, check: &'static str, required: bool, violations: Vec<String>) {
        self.diagnostics.push(Diagnostic {
            check,
            passed: violations.is_empty(),
            required,
            detail: if violations.is_empty() {
                "ok".to_string()
            } else {
                violations.join("; ")
            },
        });
    }
}

impl fmt::Display for LatticeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.diagnostics {
            let status = match (d.passed, d.required) {
                (true, _) => "pass",
                (false, true) => "FAIL",
                (false, false) => "note",
            };
            writeln!(f, "{status:>4}  {:<22} {}", d.check, d.detail)?;
        }
        Ok(())
    }
}

/// Validates the lattice conditions (finitely many vertex classes, finite
/// degree, strong connectivity of the quotient graph), the translation
/// basis, and that each listed symmetry is an edge-class preserving lattice
/// automorphism whose list is closed under composition modulo translations.
pub fn check_lattice(lattice: &LatticeSpec) -> LatticeReport {
    let mut report = LatticeReport::default();
    let d = lattice.num_edge_classes();
    let k_count = lattice.num_vertex_classes();

    let mut v = Vec::new();
    if k_count == 0 {
        v.push("no vertex classes".to_string());
    }
    for (k, vc) in lattice.vertex_classes().iter().enumerate() {
        if vc.steps.is_empty() {
            v.push(format!("class {k} has no outgoing steps"));
        }
    }
    report.push("vertex-classes", true, v);

    let mut v = Vec::new();
    if d == 0 {
        v.push("no edge classes".to_string());
    }
    for (k, vc) in lattice.vertex_classes().iter().enumerate() {
        for s in &vc.steps {
            if s.offset.is_zero() {
                v.push(format!("class {k} has a zero step"));
            }
            if s.edge_class >= d {
                v.push(format!(
                    "class {k} step {} uses edge class {} >= {d}",
                    s.offset, s.edge_class
                ));
            }
        }
        for (i, a) in vc.steps.iter().enumerate() {
            if vc.steps[..i].iter().any(|b| b.offset == a.offset) {
                v.push(format!("class {k} repeats step {}", a.offset));
            }
        }
    }
    report.push("edge-classes", true, v);

    let rank_ok = lattice.translation_determinant() != 0;
    report.push(
        "translation-rank",
        true,
        if rank_ok {
            vec![]
        } else {
            vec!["translation basis has determinant 0".to_string()]
        },
    );
    if !rank_ok {
        // Classification is meaningless without a full-rank basis.
        return report;
    }

    let mut v = Vec::new();
    for k in 0..k_count {
        match lattice.classify_vertex(lattice.representative(k)) {
            Ok(c) if c == k => {}
            Ok(c) => v.push(format!("representatives {c} and {k} are translates")),
            Err(e) => v.push(e.to_string()),
        }
    }
    report.push("representatives", true, v);

    let mut v = Vec::new();
    for (k, vc) in lattice.vertex_classes().iter().enumerate() {
        for (j, s) in vc.steps.iter().enumerate() {
            if lattice.step_target(k, j).is_none() {
                v.push(format!(
                    "step {} from class {k} leaves the lattice",
                    s.offset
                ));
            }
        }
    }
    let targets_ok = v.is_empty();
    report.push("step-targets", true, v);

    let mut v = Vec::new();
    if targets_ok && k_count > 0 {
        for start in 0..k_count {
            let reached = reachable(lattice, start);
            if let Some(miss) = reached.iter().position(|r| !r) {
                v.push(format!("class {miss} unreachable from class {start}"));
            }
        }
    }
    report.push("strong-connectivity", true, v);

    let mut v = Vec::new();
    for (k, vc) in lattice.vertex_classes().iter().enumerate() {
        for (j, s) in vc.steps.iter().enumerate() {
            let Some(target) = lattice.step_target(k, j) else { continue };
            let back = lattice.steps(target).iter().find(|b| b.offset == s.offset.neg());
            match back {
                Some(b) if b.edge_class == s.edge_class => {}
                Some(_) => v.push(format!("reverse of {} from class {k} changes edge class", s.offset)),
                None => v.push(format!("step {} from class {k} has no reverse", s.offset)),
            }
        }
    }
    report.push("undirected", false, v);

    let identity = SymmetryRep::identity();
    let mut v = Vec::new();
    if !lattice.symmetries().iter().any(|s| same_coset(lattice, s, &identity)) {
        v.push("identity is missing".to_string());
    }
    report.push("symmetry-identity", true, v);

    let mut auto_violations = Vec::new();
    let mut class_violations = Vec::new();
    for (i, sym) in lattice.symmetries().iter().enumerate() {
        check_automorphism(lattice, i, sym, &mut auto_violations, &mut class_violations);
    }
    report.push("symmetry-automorphism", true, auto_violations);
    report.push("symmetry-weights", true, class_violations);

    let mut v = Vec::new();
    let syms = lattice.symmetries();
    for (i, a) in syms.iter().enumerate() {
        for (j, b) in syms.iter().enumerate() {
            let c = a.compose(b);
            if !syms.iter().any(|s| same_coset(lattice, s, &c)) {
                v.push(format!("symmetry {i} ∘ {j} is not listed"));
            }
        }
    }
    report.push("symmetry-closure", true, v);

    report
}

fn reachable(lattice: &LatticeSpec, start: usize) -> Vec<bool> {
    let mut seen = vec![false; lattice.num_vertex_classes()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(k) = queue.pop_front() {
        for j in 0..lattice.steps(k).len() {
            if let Some(t) = lattice.step_target(k, j) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
    }
    seen
}

fn same_coset(lattice: &LatticeSpec, a: &SymmetryRep, b: &SymmetryRep) -> bool {
    let dim = lattice.dim();
    (0..dim).all(|i| a.linear[i][..dim] == b.linear[i][..dim])
        && lattice.is_translation(a.shift.sub(b.shift))
}

fn check_automorphism(
    lattice: &LatticeSpec,
    index: usize,
    sym: &SymmetryRep,
    auto: &mut Vec<String>,
    classes: &mut Vec<String>,
) {
    let dim = lattice.dim();
    let mut m = [[0i64; MAX_DIM]; MAX_DIM];
    for i in 0..dim {
        for j in 0..dim {
            m[i][j] = sym.linear[i][j] as i64;
        }
    }
    let det = determinant(&m, dim);
    if det.abs() != 1 {
        auto.push(format!("symmetry {index} has determinant {det}"));
        return;
    }
    for t in lattice.translation_basis() {
        if !lattice.is_translation(sym.apply_vector(*t)) {
            auto.push(format!("symmetry {index} maps translation {t} off the translation group"));
        }
    }
    let mut image_classes = Vec::new();
    for k in 0..lattice.num_vertex_classes() {
        let image = sym.apply_point(lattice.representative(k));
        let Ok(target) = lattice.classify_vertex(image) else {
            auto.push(format!(
                "symmetry {index} maps representative {k} to non-vertex {image}"
            ));
            continue;
        };
        image_classes.push(target);
        for s in lattice.steps(k) {
            let offset = sym.apply_vector(s.offset);
            match lattice.steps(target).iter().find(|r| r.offset == offset) {
                None => auto.push(format!(
                    "symmetry {index} maps step {} of class {k} to non-edge {offset}",
                    s.offset
                )),
                Some(r) if r.edge_class != s.edge_class => classes.push(format!(
                    "symmetry {index} maps a {} edge to a {} edge",
                    lattice.edge_class_labels()[s.edge_class],
                    lattice.edge_class_labels()[r.edge_class]
                )),
                Some(_) => {}
            }
        }
    }
    image_classes.sort_unstable();
    image_classes.dedup();
    if image_classes.len() != lattice.num_vertex_classes() {
        auto.push(format!("symmetry {index} does not permute the vertex classes"));
    }
}
