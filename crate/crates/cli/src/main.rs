//! `saw-bounds`: build transfer matrices, evaluate certified connective
//! constant bounds, map convergence domains and check cluster-expansion
//! criteria from the command line.
//!
//! Numeric results are written as CSV (or JSON with `--json`) and always
//! carry the certified bracket next to the point value. Exit status is 0 on
//! success, 1 when a computation fails or a check does not pass, and 2 on
//! invalid usage.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use saw_bounds::cluster::{find_epsilon0, kp_check, AnchoredSat, KPInstance, Verdict, DEFAULT_MAX_BLOCKS};
use saw_bounds::gmatrix::build_gmatrix_with_budget;
use saw_bounds::lattice::{load_lattice, LatticeFile, BUILTIN_LATTICES};
use saw_bounds::scan::{domain_contains, grid_scan, positive_directions, ray_frontier, validate, Axis, GridSpec};
use saw_bounds::spectral::DEFAULT_TOLERANCE;
use saw_bounds::walks::{enumerate_walks, length_polynomials, DEFAULT_BUDGET};
use saw_bounds::{
    builtin_lattice, build_gmatrix, check_lattice, load_gmatrix, matrix_info, save_gmatrix, Error, Evaluator, GMatrix,
    LatticeSpec, Mode,
};

use output::{int, num, text, Format, Table};
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(name = "saw-bounds", version, about = "Certified upper bounds on weighted connective constants")]
struct Cli {
    /// Emit JSON instead of CSV.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "SAW_BOUNDS_THREADS")]
    threads: Option<usize>,

    /// Relative tolerance of the eigenvalue bracket.
    #[arg(long, global = true, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List built-in lattices, export one as TOML, or check a lattice file.
    Lattices(LatticesArgs),
    /// Count or list walks.
    #[command(subcommand)]
    Walks(WalksCommand),
    /// Build or inspect a transfer matrix.
    #[command(subcommand)]
    Matrix(MatrixCommand),
    /// Certified upper bound on the connective constant at a weight point.
    Bound(PointArgs),
    /// Evaluate the dominant eigenvalue over a grid or along rays.
    #[command(subcommand)]
    Scan(ScanCommand),
    /// Whether a weight point lies in the certified convergence domain.
    Domain(PointArgs),
    /// Run closed-form, scaling and reciprocal consistency checks.
    Validate(ValidateArgs),
    /// Kotecký–Preiss criterion for the anisotropic contour model.
    #[command(subcommand)]
    Kp(KpCommand),
}

#[derive(Args, Debug, Clone)]
struct LatticeArgs {
    /// Built-in lattice name.
    #[arg(long, default_value = "square", conflicts_with = "lattice_file")]
    lattice: String,

    /// Weighting scheme of the built-in lattice.
    #[arg(long, default_value = "general", conflicts_with = "lattice_file")]
    scheme: String,

    /// Lattice description in TOML.
    #[arg(long, value_name = "FILE")]
    lattice_file: Option<PathBuf>,
}

impl LatticeArgs {
    fn load(&self) -> Result<LatticeSpec> {
        let lattice = match &self.lattice_file {
            Some(p) => load_lattice(p)?,
            None => builtin_lattice(&self.lattice, &self.scheme)?,
        };
        Ok(lattice)
    }
}

#[derive(Args, Debug, Clone)]
struct BuildArgs {
    #[command(flatten)]
    lattice: LatticeArgs,

    /// Walk kind: saw (self-avoiding walks) or sat (self-avoiding trails).
    #[arg(long, default_value = "saw")]
    mode: Mode,

    /// Prefix length.
    #[arg(short, default_value_t = 1)]
    m: usize,

    /// Extension length; must exceed `m`.
    #[arg(short, default_value_t = 2)]
    n: usize,

    /// Maximum number of walk extensions to explore.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

impl BuildArgs {
    fn build(&self) -> Result<GMatrix> {
        let lattice = self.lattice.load()?;
        Ok(build_gmatrix_with_budget(&lattice, self.m, self.n, self.mode, self.budget)?)
    }
}

#[derive(Args, Debug, Clone)]
struct MatrixSource {
    /// Saved matrix file; otherwise the matrix is built from the lattice flags.
    #[arg(long, value_name = "FILE")]
    matrix: Option<PathBuf>,

    #[command(flatten)]
    build: BuildArgs,
}

impl MatrixSource {
    fn load(&self) -> Result<GMatrix> {
        match &self.matrix {
            Some(p) => Ok(load_gmatrix(p)?),
            None => self.build.build(),
        }
    }
}

#[derive(Args, Debug)]
struct LatticesArgs {
    /// Print the TOML description of the lattice named by --lattice/--scheme.
    #[arg(long)]
    export: bool,

    #[arg(long, default_value = "square")]
    lattice: String,

    #[arg(long, default_value = "general")]
    scheme: String,

    /// Check a lattice file and report each condition.
    #[arg(long, value_name = "FILE", conflicts_with = "export")]
    check: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum WalksCommand {
    /// Walk counts by length and starting vertex class.
    Count {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, default_value = "saw")]
        mode: Mode,
        /// Longest length counted.
        #[arg(short)]
        n: usize,
        /// Also evaluate the weighted count at these comma-separated weights.
        #[arg(short, value_delimiter = ',', allow_hyphen_values = true)]
        z: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// List every walk of a given length from each vertex class.
    Dump {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, default_value = "saw")]
        mode: Mode,
        #[arg(short)]
        n: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
}

#[derive(Subcommand, Debug)]
enum MatrixCommand {
    /// Build a matrix and save it.
    Build {
        #[command(flatten)]
        build: BuildArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Summarise a saved matrix.
    Info {
        file: PathBuf,
        /// Also print every entry polynomial.
        #[arg(long)]
        entries: bool,
    },
}

#[derive(Args, Debug)]
struct PointArgs {
    #[command(flatten)]
    source: MatrixSource,

    /// Comma-separated weights in edge-class label order.
    #[arg(short, required = true, value_delimiter = ',', allow_hyphen_values = true)]
    z: Vec<f64>,
}

#[derive(Subcommand, Debug)]
enum ScanCommand {
    /// Evaluate λ₁ on a rectangular grid.
    Grid {
        #[command(flatten)]
        source: MatrixSource,
        /// Axis as min:max:samples; give one per variable, or one for all.
        #[arg(long = "axis", required = true)]
        axes: Vec<Axis>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Points where λ₁ = 1 along positive directions.
    Frontier {
        #[command(flatten)]
        source: MatrixSource,
        /// Directions per angular coordinate.
        #[arg(long, default_value_t = 64)]
        rays: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    source: MatrixSource,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Closed form to compare against (default: looked up from the matrix).
    #[arg(long)]
    row: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct KpSetup {
    /// Trail matrix prefix length.
    #[arg(short, default_value_t = 1)]
    m: usize,
    /// Trail matrix extension length.
    #[arg(short, default_value_t = 2)]
    n: usize,
    /// Longest enumerated trail length.
    #[arg(long, default_value_t = 10)]
    max_len: usize,
    /// Cap on the block length used for the tail estimate.
    #[arg(long, default_value_t = DEFAULT_MAX_BLOCKS)]
    max_blocks: usize,
    /// Contour activity parameter t.
    #[arg(long = "kp-t", default_value_t = 0.1)]
    kp_t: f64,
    /// Write the plain-text certificate here.
    #[arg(long, value_name = "FILE")]
    certificate: Option<PathBuf>,
}

impl KpSetup {
    fn prepare(&self) -> Result<AnchoredSat> {
        let lattice = builtin_lattice("square", "general")?;
        let g = build_gmatrix(&lattice, self.m, self.n, Mode::Sat)?;
        Ok(AnchoredSat::new(&lattice, &g, self.max_len)?)
    }
}

#[derive(Subcommand, Debug)]
enum KpCommand {
    /// Check the criterion at one (ε, α).
    Check {
        #[arg(long, allow_hyphen_values = true)]
        epsilon: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[command(flatten)]
        setup: KpSetup,
    },
    /// Search for ε₀ with α = f(ε), f given by polynomial coefficients.
    Epsilon0 {
        /// Coefficients of f in increasing degree, comma-separated.
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
        f: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        bisection_steps: usize,
        #[command(flatten)]
        setup: KpSetup,
    },
}

/// Errors that stem from invalid flags rather than from a computation.
fn is_usage_error(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<Error>(),
        Some(
            Error::InvalidStepCounts { .. }
                | Error::InvalidGrid(_)
                | Error::DimensionMismatch { .. }
                | Error::UnknownLattice { .. }
                | Error::UnknownClosedForm(_)
                | Error::NonPositiveWeight(_)
        )
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage_error(&e) { 2 } else { 1 })
        }
    }
}

/// Runs one command; `Ok(false)` means it ran but a check did not pass.
fn run(cli: &Cli) -> Result<bool> {
    let format = if cli.json { Format::Json } else { Format::Csv };
    let evaluator = |g: &GMatrix| -> Result<Evaluator> { Ok(Evaluator::new(g)?.with_tolerance(cli.tolerance)) };

    match &cli.command {
        Command::Lattices(args) => lattices(args, format),
        Command::Walks(WalksCommand::Count {
            lattice,
            mode,
            n,
            z,
            budget,
        }) => {
            let lattice = lattice.load()?;
            let mut columns = vec!["class".to_string(), "length".to_string(), "count".to_string()];
            if z.is_some() {
                columns.push("weighted".to_string());
            }
            let mut table = Table::new(columns);
            for class in 0..lattice.num_vertex_classes() {
                let polys = length_polynomials(&lattice, class, *n, *mode, *budget)?;
                for (len, p) in polys.iter().enumerate().skip(1) {
                    let count = p.coefficient_sum();
                    let mut row = vec![int(class as u64), int(len as u64), text(count.to_string())];
                    if let Some(z) = z {
                        if z.len() != lattice.num_edge_classes() {
                            return Err(Error::DimensionMismatch {
                                expected: lattice.num_edge_classes(),
                                got: z.len(),
                            }
                            .into());
                        }
                        row.push(num(p.eval(z)?));
                    }
                    table.push(row);
                }
            }
            table.emit(format, None)?;
            Ok(true)
        }
        Command::Walks(WalksCommand::Dump {
            lattice,
            mode,
            n,
            output,
            budget,
        }) => {
            let lattice = lattice.load()?;
            let walks = enumerate_walks(&lattice, *n, *mode, *budget)?;
            let mut out = String::new();
            for w in &walks {
                out.push_str(&w.to_dump(lattice.dim()));
                out.push('\n');
            }
            write_text(output.as_deref(), &out)?;
            Ok(true)
        }
        Command::Matrix(MatrixCommand::Build { build, output }) => {
            let g = build.build()?;
            save_gmatrix(&g, output)?;
            info_table(&g).emit(format, None)?;
            Ok(true)
        }
        Command::Matrix(MatrixCommand::Info { file, entries }) => {
            let g = load_gmatrix(file)?;
            if *entries {
                let mut table = Table::new(["row", "col", "entry"]);
                for (r, row) in g.entries.iter().enumerate() {
                    for (s, p) in row.iter().enumerate() {
                        table.push(vec![int(r as u64), int(s as u64), text(p.to_text(&g.labels))]);
                    }
                }
                table.emit(format, None)?;
            } else {
                info_table(&g).emit(format, None)?;
            }
            Ok(true)
        }
        Command::Bound(args) => {
            let g = args.source.load()?;
            let ev = evaluator(&g)?;
            let mu = ev.mu(&args.z)?;
            let lambda = ev.lambda(&args.z)?;
            let mut columns: Vec<String> = g.labels.clone();
            columns.extend(
                ["mu", "mu_lower", "mu_upper", "lambda", "lambda_lower", "lambda_upper", "iterations"].map(String::from),
            );
            let mut table = Table::new(columns);
            let mut row: Vec<_> = args.z.iter().map(|&x| num(x)).collect();
            row.extend([
                num(mu.value),
                num(mu.lower),
                num(mu.upper),
                num(lambda.value),
                num(lambda.lower),
                num(lambda.upper),
                int(lambda.iterations as u64),
            ]);
            table.push(row);
            table.emit(format, None)?;
            Ok(true)
        }
        Command::Domain(args) => {
            let g = args.source.load()?;
            let ev = evaluator(&g)?;
            let (membership, lambda) = domain_contains(&ev, &args.z)?;
            let mut columns: Vec<String> = g.labels.clone();
            columns.extend(["membership", "lambda", "lambda_lower", "lambda_upper"].map(String::from));
            let mut table = Table::new(columns);
            let mut row: Vec<_> = args.z.iter().map(|&x| num(x)).collect();
            row.extend([
                text(membership.to_string()),
                num(lambda.value),
                num(lambda.lower),
                num(lambda.upper),
            ]);
            table.push(row);
            table.emit(format, None)?;
            Ok(true)
        }
        Command::Scan(ScanCommand::Grid { source, axes, output }) => {
            let g = source.load()?;
            let ev = evaluator(&g)?;
            let spec = match axes.len() {
                1 => GridSpec::uniform(g.num_vars(), axes[0]),
                _ => GridSpec::new(axes.clone()),
            };
            let rows = grid_scan(&ev, &spec)?;
            let mut columns = vec!["index".to_string()];
            columns.extend(g.labels.iter().cloned());
            columns.extend(["lambda", "lambda_lower", "lambda_upper", "error"].map(String::from));
            let mut table = Table::new(columns);
            for r in rows {
                let mut row = vec![int(r.index as u64)];
                row.extend(r.z.iter().map(|&x| num(x)));
                match r.lambda {
                    Ok(b) => row.extend([num(b.value), num(b.lower), num(b.upper), text("")]),
                    Err(e) => row.extend([num(f64::NAN), num(f64::NAN), num(f64::NAN), text(e)]),
                }
                table.push(row);
            }
            table.emit(format, output.as_deref())?;
            Ok(true)
        }
        Command::Scan(ScanCommand::Frontier { source, rays, output }) => {
            let g = source.load()?;
            let ev = evaluator(&g)?;
            let dirs = positive_directions(g.num_vars(), *rays);
            let points = ray_frontier(&ev, &dirs)?;
            let mut columns = vec!["ray".to_string()];
            columns.extend(g.labels.iter().map(|l| format!("dir_{l}")));
            columns.extend(g.labels.iter().cloned());
            columns.extend(["lambda", "lambda_lower", "lambda_upper"].map(String::from));
            let mut table = Table::new(columns);
            for (i, p) in points.iter().enumerate() {
                let mut row = vec![int(i as u64)];
                row.extend(p.direction.iter().map(|&x| num(x)));
                row.extend(p.z.iter().map(|&x| num(x)));
                row.extend([num(p.lambda.value), num(p.lambda.lower), num(p.lambda.upper)]);
                table.push(row);
            }
            table.emit(format, output.as_deref())?;
            Ok(true)
        }
        Command::Validate(args) => {
            let g = args.source.load()?;
            let report = validate(&g, args.trials, args.seed, args.row.as_deref())?;
            let mut table = Table::new(["check", "status", "trials", "failures", "worst_margin", "detail"]);
            for c in &report.checks {
                let status = match c.passed {
                    Some(true) => "pass",
                    Some(false) => "fail",
                    None => "skip",
                };
                table.push(vec![
                    text(c.name.clone()),
                    text(status),
                    int(c.trials as u64),
                    int(c.failures as u64),
                    num(c.worst_margin),
                    text(c.detail.clone()),
                ]);
            }
            table.emit(format, None)?;
            Ok(report.passed())
        }
        Command::Kp(KpCommand::Check { epsilon, alpha, setup }) => {
            let inst = KPInstance::new(*epsilon, *alpha, setup.kp_t)?;
            let sat = setup.prepare()?;
            let cert = kp_check(&inst, &sat, setup.max_blocks)?;
            if let Some(p) = &setup.certificate {
                write_text(Some(p), &cert.to_record())?;
            }
            let mut table = Table::new([
                "epsilon",
                "alpha",
                "kp_t",
                "verdict",
                "exact_partial",
                "tail_bound",
                "total",
                "max_len",
            ]);
            let b = cert.bound.as_ref();
            table.push(vec![
                num(inst.epsilon),
                num(inst.alpha),
                num(inst.kp_t),
                text(cert.verdict.to_string()),
                num(b.map_or(f64::NAN, |b| b.exact_partial)),
                num(b.map_or(f64::NAN, |b| b.tail_bound)),
                num(b.map_or(f64::NAN, |b| b.total)),
                int(setup.max_len as u64),
            ]);
            table.emit(format, None)?;
            Ok(cert.satisfied())
        }
        Command::Kp(KpCommand::Epsilon0 {
            f,
            bisection_steps,
            setup,
        }) => {
            let sat = setup.prepare()?;
            let res = find_epsilon0(f, setup.kp_t, &sat, setup.max_blocks, *bisection_steps)?;
            if let Some(p) = &setup.certificate {
                let record = format!(
                    "epsilon0 {:e}\n[positive]\n{}[negative]\n{}",
                    res.epsilon0,
                    res.certificate_pos.to_record(),
                    res.certificate_neg.to_record()
                );
                write_text(Some(p), &record)?;
            }
            let mut table = Table::new(["epsilon", "verdict_pos", "verdict_neg", "certified"]);
            for (eps, pos, neg) in &res.checked {
                table.push(vec![
                    num(*eps),
                    text(pos.to_string()),
                    text(neg.to_string()),
                    Value::Bool(*pos == Verdict::Satisfied && *neg == Verdict::Satisfied),
                ]);
            }
            table.emit(format, None)?;
            eprintln!("epsilon0 = {:e}", res.epsilon0);
            Ok(true)
        }
    }
}

fn info_table(g: &GMatrix) -> Table {
    let info = matrix_info(g);
    let mut table = Table::new([
        "lattice",
        "scheme",
        "mode",
        "m",
        "n",
        "t",
        "variables",
        "nonzero",
        "homogeneous",
        "degrees",
        "class_sizes",
        "terms",
    ]);
    let join = |v: Vec<String>| v.join(" ");
    table.push(vec![
        text(info.lattice_name.clone()),
        text(info.scheme.clone()),
        text(info.mode.to_string()),
        int(info.m as u64),
        int(info.n as u64),
        int(info.t as u64),
        text(info.labels.join(" ")),
        int(info.nonzero_count() as u64),
        Value::Bool(info.homogeneous),
        text(join(info.degrees.iter().map(|d| d.to_string()).collect())),
        text(join(info.class_sizes.iter().map(|d| d.to_string()).collect())),
        int(info.num_terms as u64),
    ]);
    table
}

fn lattices(args: &LatticesArgs, format: Format) -> Result<bool> {
    if let Some(path) = &args.check {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let lattice = LatticeFile::parse(&text)?.into_lattice()?;
        let report = check_lattice(&lattice);
        print!("{report}");
        return Ok(report.ok());
    }
    if args.export {
        let lattice = builtin_lattice(&args.lattice, &args.scheme)?;
        print!("{}", LatticeFile::from_lattice(&lattice).to_toml());
        return Ok(true);
    }
    let mut table = Table::new([
        "lattice",
        "scheme",
        "dim",
        "vertex_classes",
        "variables",
        "symmetries",
    ]);
    for (name, scheme) in BUILTIN_LATTICES {
        let l = builtin_lattice(name, scheme)?;
        table.push(vec![
            text(*name),
            text(*scheme),
            int(l.dim() as u64),
            int(l.num_vertex_classes() as u64),
            text(l.edge_class_labels().join(" ")),
            int(l.symmetries().len() as u64),
        ]);
    }
    table.emit(format, None)?;
    Ok(true)
}

fn write_text(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}
