//! End-to-end acceptance checks. Runs without the libtest harness so that
//! the one-line verdict of each criterion is always printed.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use saw_bounds::cluster::{find_epsilon0, kp_check, AnchoredSat, KPInstance, DEFAULT_MAX_BLOCKS};
use saw_bounds::gmatrix::FORMAT_VERSION;
use saw_bounds::scan::{bisect_along_ray, positive_directions, ray_frontier, CLOSED_FORMS};
use saw_bounds::spectral::{is_primitive, structure_matrix, BoolMatrix};
use saw_bounds::walks::{length_polynomials, DEFAULT_BUDGET};
use saw_bounds::{build_gmatrix, builtin_lattice, load_gmatrix, save_gmatrix, Error, Evaluator, GMatrix, Mode, Poly};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Every matrix that has a closed form, with the form's id.
fn closed_form_matrices() -> Result<Vec<(&'static str, GMatrix)>, String> {
    let mut out = Vec::new();
    for form in CLOSED_FORMS {
        let lattice = ok(builtin_lattice(form.lattice, form.scheme))?;
        for &mode in form.modes {
            out.push((form.id, ok(build_gmatrix(&lattice, form.m, form.n, mode))?));
        }
    }
    Ok(out)
}

fn closed_form_agreement() -> Outcome {
    let mut r = rng(1);
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for (id, g) in closed_form_matrices()? {
        let form = ok(saw_bounds::scan::closed_form(id))?;
        let ev = ok(Evaluator::new(&g))?;
        for _ in 0..50 {
            let z = unit_point(&mut r, g.num_vars());
            let b = ok(ev.mu(&z))?;
            let want = ok(form.eval(&z))?;
            let margin = (b.value - want).abs() - (b.width() + 1e-8);
            worst = worst.max(margin);
            ensure!(margin <= 0.0, "{id} ({}) at {z:?}: {} vs {want}", g.mode, b.value);
        }
        count += 1;
    }
    Ok(format!("{count} instances x 50 points, worst margin {worst:.2e}"))
}

fn isotropic_anchors() -> Outcome {
    let cases = [
        ("square", "general", Mode::Saw, 2, 3.0),
        ("square", "general", Mode::Sat, 2, 3.0),
        ("cubic", "xy-equal", Mode::Saw, 2, 5.0),
        ("hexagonal", "xy-equal", Mode::Saw, 2, 2.0),
    ];
    let mut worst: f64 = 0.0;
    for (name, scheme, mode, d, want) in cases {
        let g = ok(build_gmatrix(&ok(builtin_lattice(name, scheme))?, 1, 2, mode))?;
        let b = ok(Evaluator::new(&g).and_then(|ev| ev.mu(&vec![1.0; d])))?;
        let err = (b.value - want).abs();
        worst = worst.max(err);
        ensure!(err <= 1e-9, "{name} {mode}: {} != {want}", b.value);
    }
    Ok(format!("max deviation {worst:.2e}"))
}

fn scaling_identity() -> Outcome {
    let cases = [("square", "general", 1, 2), ("square", "general", 1, 3), ("cubic", "general", 1, 2)];
    let mut r = rng(3);
    let mut worst = f64::NEG_INFINITY;
    for (name, scheme, m, n) in cases {
        let g = ok(build_gmatrix(&ok(builtin_lattice(name, scheme))?, m, n, Mode::Saw))?;
        let ev = ok(Evaluator::new(&g))?;
        for _ in 0..100 {
            let z = unit_point(&mut r, g.num_vars());
            let c = 2.0 * unit_point(&mut r, 1)[0];
            let cz: Vec<f64> = z.iter().map(|x| c * x).collect();
            let a = ok(ev.lambda(&z))?;
            let b = ok(ev.lambda(&cz))?;
            let k = c.powi((n - m) as i32);
            let margin = (b.value - k * a.value).abs() - (b.width() + k * a.width() + 1e-9);
            worst = worst.max(margin);
            ensure!(margin <= 0.0, "{name} ({m},{n}) z={z:?} c={c}");
        }
    }
    Ok(format!("3 instances x 100 points, worst margin {worst:.2e}"))
}

fn reciprocal_frontier() -> Outcome {
    let g = ok(build_gmatrix(&ok(builtin_lattice("square", "general"))?, 1, 2, Mode::Saw))?;
    let ev = ok(Evaluator::new(&g))?;
    let s = 0.5f64.sqrt();
    let iso = ok(ray_frontier(&ev, &[vec![s, s]]))?;
    for x in &iso[0].z {
        ensure!((x - 1.0 / 3.0).abs() <= 1e-9, "isotropic frontier point {:?}", iso[0].z);
    }
    let dirs = positive_directions(2, 64);
    ensure!(dirs.len() == 64, "expected 64 directions, got {}", dirs.len());
    let points = ok(ray_frontier(&ev, &dirs))?;
    let mut worst_lambda: f64 = 0.0;
    let mut worst_bisect: f64 = 0.0;
    for p in &points {
        let l = ok(ev.lambda(&p.z))?;
        worst_lambda = worst_lambda.max((l.value - 1.0).abs());
        ensure!((l.value - 1.0).abs() <= 1e-9, "λ₁ = {} at {:?}", l.value, p.z);
        let b = ok(bisect_along_ray(&ev, &p.direction, 1e-12))?;
        for (x, y) in b.iter().zip(&p.z) {
            worst_bisect = worst_bisect.max((x - y).abs());
            ensure!((x - y).abs() <= 1e-9, "bisection {b:?} vs ray formula {:?}", p.z);
        }
    }
    Ok(format!(
        "isotropic point (1/3, 1/3); 64 rays, max |λ₁ − 1| {worst_lambda:.2e}, max bisection gap {worst_bisect:.2e}"
    ))
}

fn primitivity() -> Outcome {
    let mats = closed_form_matrices()?;
    for (id, g) in &mats {
        ensure!(is_primitive(&structure_matrix(g)), "{id} ({}) not primitive", g.mode);
    }
    let period_two = ok(BoolMatrix::from_rows(&[vec![false, true], vec![true, false]]))?;
    ensure!(!is_primitive(&period_two), "period-2 pattern reported primitive");
    Ok(format!("{} matrices primitive; period-2 pattern rejected", mats.len()))
}

fn enumeration_oracle() -> Outcome {
    let start = Instant::now();
    let square = ok(builtin_lattice("square", "general"))?;
    let got = ok(length_polynomials(&square, 0, 6, Mode::Saw, DEFAULT_BUDGET))?;
    let want = walk_counts(&square_neighbours, 2, (0, 0), 6, false);
    let mut totals = Vec::new();
    for n in 1..=6 {
        ensure!(counts_of(&got[n]) == want[n], "square n={n}");
        totals.push(total(&want[n]));
    }
    let hex = ok(builtin_lattice("hexagonal", "general"))?;
    for (class, start_at) in [(0, (0, 0)), (1, (1, 0))] {
        let got = ok(length_polynomials(&hex, class, 6, Mode::Saw, DEFAULT_BUDGET))?;
        let want = walk_counts(&hexagonal_neighbours, 3, start_at, 6, false);
        for n in 1..=6 {
            ensure!(counts_of(&got[n]) == want[n], "hexagonal class {class} n={n}");
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("square counts {totals:?}; hexagonal both classes; {elapsed:.2?}"))
}

fn homogeneity_and_chaining() -> Outcome {
    let mats = closed_form_matrices()?;
    for (id, g) in &mats {
        let gap = g.step_gap() as u32;
        ensure!(
            g.entries.iter().flatten().all(|p| p.is_zero() || p.is_homogeneous_of_degree(gap)),
            "{id} ({}) has an entry of the wrong degree",
            g.mode
        );
    }
    let square = ok(builtin_lattice("square", "general"))?;
    let g12 = ok(build_gmatrix(&square, 1, 2, Mode::Saw))?;
    let g13 = ok(build_gmatrix(&square, 1, 3, Mode::Saw))?;
    let t = g12.size();
    ensure!(g13.size() == t, "partitions differ");
    let mut r = rng(7);
    for _ in 0..20 {
        let z = unit_point(&mut r, 2);
        let a: Vec<Vec<f64>> = g12.entries.iter().map(|row| row.iter().map(|p| p.eval(&z).unwrap()).collect()).collect();
        for i in 0..t {
            for j in 0..t {
                let sq: f64 = (0..t).map(|k| a[i][k] * a[k][j]).sum();
                let long = ok(g13.entry(i, j).eval(&z))?;
                ensure!(long <= sq * (1.0 + 1e-12), "G(1,3)[{i}][{j}] = {long} > {sq} at {z:?}");
            }
        }
    }
    Ok(format!("{} matrices homogeneous; chaining at 20 points", mats.len()))
}

fn submultiplicativity() -> Outcome {
    let mut r = rng(8);
    let mut checks = 0;
    for name in ["square", "hexagonal"] {
        let lattice = ok(builtin_lattice(name, "general"))?;
        let d = lattice.num_edge_classes();
        let polys: Vec<Vec<Poly>> = (0..lattice.num_vertex_classes())
            .map(|k| length_polynomials(&lattice, k, 8, Mode::Saw, DEFAULT_BUDGET))
            .collect::<Result<_, _>>()
            .map_err(|e: Error| e.to_string())?;
        for _ in 0..10 {
            let z = unit_point(&mut r, d);
            let c: Vec<Vec<f64>> = polys.iter().map(|ps| ps.iter().map(|p| p.eval(&z).unwrap()).collect()).collect();
            for n1 in 1..8 {
                for n2 in 1..=(8 - n1) {
                    let c2 = c.iter().map(|ck| ck[n2]).fold(0.0, f64::max);
                    for (k, ck) in c.iter().enumerate() {
                        ensure!(
                            ck[n1 + n2] <= ck[n1] * c2 * (1.0 + 1e-12),
                            "{name} k={k} n1={n1} n2={n2} at {z:?}"
                        );
                        checks += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{checks} inequalities"))
}

fn kp_certification() -> Outcome {
    let start = Instant::now();
    let square = ok(builtin_lattice("square", "general"))?;
    let g = ok(build_gmatrix(&square, 1, 2, Mode::Sat))?;
    let sat = ok(AnchoredSat::new(&square, &g, 10))?;
    let inst = ok(KPInstance::new(0.01, 0.5, 0.1))?;
    let cert = ok(kp_check(&inst, &sat, DEFAULT_MAX_BLOCKS))?;
    let total = cert.bound.as_ref().map_or(f64::NAN, |b| b.total);
    ensure!(cert.satisfied() && total <= 0.1, "verdict {} with total {total}", cert.verdict);

    let eps0 = ok(find_epsilon0(&[0.5], 0.1, &sat, DEFAULT_MAX_BLOCKS, 8))?;
    ensure!(eps0.epsilon0 > 0.0, "ε₀ = {}", eps0.epsilon0);

    let reference = walk_counts(&square_neighbours, 2, (0, 0), 8, true);
    let mut r = rng(9);
    for max_len in 1..=8 {
        let short = ok(AnchoredSat::new(&square, &g, max_len))?;
        for _ in 0..10 {
            let z = unit_point(&mut r, 2);
            let mut want = 0.0;
            for counts in &reference[1..=max_len] {
                want += ok(poly_of(2, counts).eval(&z))?;
            }
            let got = ok(short.exact_partial(&z))?;
            ensure!(got == want, "L={max_len} at {z:?}: {got} vs {want}");
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!(
        "total {total:.4} <= 0.1 at L=10; ε₀ = {:.4e}; partial sums exact for L<=8; {elapsed:.2?}",
        eps0.epsilon0
    ))
}

fn persistence() -> Outcome {
    let dir = ok(tempfile::tempdir())?;
    let cases = [("square", "general", Mode::Saw, 4), ("hexagonal", "xy-equal", Mode::Sat, 3)];
    for (name, scheme, mode, n) in cases {
        let g = ok(build_gmatrix(&ok(builtin_lattice(name, scheme))?, 1, n, mode))?;
        let path = dir.path().join(format!("{name}.mat"));
        ok(save_gmatrix(&g, &path))?;
        let back = ok(load_gmatrix(&path))?;
        ensure!(back == g, "{name} round trip differs");

        let text = ok(std::fs::read_to_string(&path))?;
        let corrupt = dir.path().join("corrupt.mat");
        let truncated = &text[..text.len() / 2];
        let edited = text.replacen("\n0 0 ", "\n0 0 9", 1);
        let bumped = text.replacen(
            &format!("format_version {FORMAT_VERSION}"),
            &format!("format_version {}", FORMAT_VERSION + 1),
            1,
        );
        ensure!(edited != text && bumped != text, "corruption did not apply");
        for bad in [truncated, edited.as_str(), bumped.as_str()] {
            ok(std::fs::write(&corrupt, bad))?;
            ensure!(load_gmatrix(&corrupt).is_err(), "{name}: corrupted file accepted");
        }
    }
    Ok("square (1,4) saw and hexagonal (1,3) sat round trip; 3 corruptions rejected each".to_string())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("closed-form agreement", closed_form_agreement),
        ("isotropic anchors", isotropic_anchors),
        ("scaling identity", scaling_identity),
        ("reciprocal and frontier", reciprocal_frontier),
        ("primitivity", primitivity),
        ("enumeration oracle", enumeration_oracle),
        ("homogeneity and chaining", homogeneity_and_chaining),
        ("submultiplicativity", submultiplicativity),
        ("cluster-expansion certificate", kp_certification),
        ("persistence", persistence),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
