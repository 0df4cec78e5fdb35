//! Command-line front end.
//!
//! Every command prints one JSON [`RunReport`] on stdout. Exit codes:
//! 0 success, 2 input error, 3 no class membership, 4 failed precondition,
//! 5 convergence or structure failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::canonical::canonical_pair_form;
use crate::cayley::{cayley_to_selfadjoint, cayley_to_unitary, densify_g, pick_alpha, CayleyParams};
use crate::classes::{self, classify, StructureClass};
use crate::densify_jl::{densify_j, densify_l, sum_of_four};
use crate::densify_n::densify_n;
use crate::error::Error;
use crate::generate::{self, Pair};
use crate::linalg;
use crate::matrix::{self, c64, ComplexMatrix, MatrixJson};
use crate::product::IndefiniteProduct;
use crate::rng::stream;
use crate::tolerance::{SearchConfig, ToleranceConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_MEMBERSHIP: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;
pub const EXIT_CONVERGENCE: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "indefinite", version, about = "Structured matrices under indefinite scalar products")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Base seed for randomized searches and generators.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub eq_tol: Option<f64>,
    #[arg(long, global = true)]
    pub rank_tol: Option<f64>,
    #[arg(long, global = true)]
    pub gap_tol: Option<f64>,
    #[arg(long, global = true)]
    pub cluster_tol: Option<f64>,
    /// Worker threads for coefficient searches (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report `wall_time_ms` as 0 so reports are byte-reproducible.
    #[arg(long, global = true)]
    pub no_timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Class memberships and residuals of A with respect to B.
    Classify(PairArgs),
    /// Diagonalizable perturbation of A inside its class.
    Densify {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, ignore_case = true)]
        class: Option<ClassArg>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Selfadjoint and skewadjoint parts of A.
    Split(PairArgs),
    /// Projection of A onto J(B) or L(B) (B unitary).
    Project {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, ignore_case = true)]
        class: Option<ClassArg>,
    },
    /// Canonical pair form of a B-selfadjoint A.
    Canonical(PairArgs),
    /// Cayley transform between J(B) and G(B).
    Cayley {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum, default_value_t = Direction::ToUnitary)]
        direction: Direction,
        /// Nonreal pole as `re,im`.
        #[arg(long, value_parser = parse_complex)]
        w: Option<Complex64>,
        /// Unimodular scale as `re,im`; chosen from the spectrum when omitted
        /// for the inverse direction.
        #[arg(long, value_parser = parse_complex)]
        alpha: Option<Complex64>,
    },
    /// A as a sum of four B-normal matrices with distinct eigenvalues.
    Sum4(PairArgs),
    /// Write a test pair (A, B) to JSON files.
    Generate {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long)]
        n: usize,
        /// Eigenvalue for Jordan-based pairs; drawn from the seed when omitted.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        /// Sign of the form for Jordan-based pairs.
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        sign: i8,
        /// Pair wrapped by `random_congruence`.
        #[arg(long, value_enum, default_value_t = GenKind::JordanPair)]
        base: GenKind,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// File name prefix; defaults to the kind.
        #[arg(long)]
        prefix: Option<String>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    /// Matrix A (JSON).
    pub a: PathBuf,
    /// Form B (JSON).
    pub b: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "UPPER")]
pub enum ClassArg {
    J,
    L,
    G,
    N,
}

impl From<ClassArg> for StructureClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::J => StructureClass::J,
            ClassArg::L => StructureClass::L,
            ClassArg::G => StructureClass::G,
            ClassArg::N => StructureClass::N,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ToUnitary,
    ToSelfadjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    JordanPair,
    UnitaryExample,
    NormalExample,
    RandomCongruence,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("invalid number {t:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(c64(num(re)?, 0.0)),
        [re, im] => Ok(c64(num(re)?, num(im)?)),
        _ => Err(format!("expected `re` or `re,im`, got {s:?}")),
    }
}

/// Config file contents; every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub eps: Option<f64>,
    pub class: Option<StructureClass>,
    pub eq_tol: Option<f64>,
    pub rank_tol: Option<f64>,
    pub gap_tol: Option<f64>,
    pub cluster_tol: Option<f64>,
    pub no_timing: Option<bool>,
}

#[derive(Debug, Clone)]
struct Settings {
    tol: ToleranceConfig,
    search: SearchConfig,
    eps: Option<f64>,
    class: Option<StructureClass>,
    no_timing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<String>,
    pub seed: u64,
    pub tolerances: ToleranceConfig,
    pub result: Value,
    pub wall_time_ms: f64,
}

/// Failure of a command, with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    pub detail: Value,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
            detail: Value::Null,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Dimension(_) | Error::DegenerateForm { .. } | Error::UnsupportedForm { .. } => EXIT_INPUT,
            Error::Precondition(_) | Error::ResolventSingular(_) | Error::Singular { .. } => EXIT_PRECONDITION,
            Error::SearchExhausted { .. }
            | Error::Convergence { .. }
            | Error::IllConditionedStructure(_)
            | Error::Structure(_)
            | Error::NotInCentralizer { .. }
            | Error::BudgetTooTight(_)
            | Error::EigenFailure => EXIT_CONVERGENCE,
        };
        let detail = match e.best_candidate() {
            Some(best) => json!({ "best_candidate": best }),
            None => Value::Null,
        };
        Failure {
            code,
            message: e.to_string(),
            detail,
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn mat(a: &ComplexMatrix) -> Value {
    to_value(&MatrixJson::from(a))
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    matrix::from_json_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

pub fn write_matrix(path: &Path, a: &ComplexMatrix) -> Result<(), Failure> {
    fs::write(path, matrix::to_json_string(a) + "\n")
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn resolve(common: &CommonArgs, eps: Option<f64>, class: Option<ClassArg>) -> Result<Settings, Failure> {
    let file = match &common.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<ConfigFile>(&text)
                .map_err(|e| Failure::input(format!("invalid config {}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };
    let d = ToleranceConfig::default();
    let tol = ToleranceConfig {
        eq_tol: common.eq_tol.or(file.eq_tol).unwrap_or(d.eq_tol),
        rank_tol: common.rank_tol.or(file.rank_tol).unwrap_or(d.rank_tol),
        gap_tol: common.gap_tol.or(file.gap_tol).unwrap_or(d.gap_tol),
        cluster_tol: common.cluster_tol.or(file.cluster_tol).unwrap_or(d.cluster_tol),
    };
    tol.validate().map_err(|e| Failure::input(e.to_string()))?;
    let search = SearchConfig {
        seed: common.seed.or(file.seed).unwrap_or(0),
        threads: common.threads.or(file.threads).unwrap_or(1).max(1),
    };
    Ok(Settings {
        tol,
        search,
        eps: eps.or(file.eps),
        class: class.map(StructureClass::from).or(file.class),
        no_timing: common.no_timing || file.no_timing.unwrap_or(false),
    })
}

fn load_pair(pair: &PairArgs, tol: &ToleranceConfig) -> Result<(ComplexMatrix, IndefiniteProduct), Failure> {
    let a = read_matrix(&pair.a)?;
    let b = read_matrix(&pair.b)?;
    let p = IndefiniteProduct::new(b, tol)?;
    if a.nrows() != p.dim() || a.ncols() != p.dim() {
        return Err(Failure::input(format!(
            "A is {}x{} but B is {n}x{n}",
            a.nrows(),
            a.ncols(),
            n = p.dim()
        )));
    }
    Ok((a, p))
}

fn paths(pair: &PairArgs) -> Vec<String> {
    vec![pair.a.display().to_string(), pair.b.display().to_string()]
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Classify(_) => "classify",
        Command::Densify { .. } => "densify",
        Command::Split(_) => "split",
        Command::Project { .. } => "project",
        Command::Canonical(_) => "canonical",
        Command::Cayley { .. } => "cayley",
        Command::Sum4(_) => "sum4",
        Command::Generate { .. } => "generate",
    }
}

/// Runs a parsed command line. Returns the report and the exit code; failed
/// commands still produce a report whose `result` holds the error.
pub fn run(cli: &Cli) -> (RunReport, i32) {
    let start = Instant::now();
    let (eps, class) = match &cli.command {
        Command::Densify { eps, class, .. } => (*eps, *class),
        Command::Project { class, .. } => (None, *class),
        _ => (None, None),
    };
    let inputs = match &cli.command {
        Command::Classify(p) | Command::Split(p) | Command::Canonical(p) | Command::Sum4(p) => paths(p),
        Command::Densify { pair, .. } | Command::Project { pair, .. } | Command::Cayley { pair, .. } => paths(pair),
        Command::Generate { .. } => Vec::new(),
    };
    let settings = resolve(&cli.common, eps, class);
    let (tol, seed, no_timing) = match &settings {
        Ok(s) => (s.tol, s.search.seed, s.no_timing),
        Err(_) => (ToleranceConfig::default(), cli.common.seed.unwrap_or(0), cli.common.no_timing),
    };
    let outcome = settings.and_then(|s| dispatch(&cli.command, &s));
    let (result, code) = match outcome {
        Ok((value, code)) => (value, code),
        Err(f) => (
            json!({ "error": { "exit_code": f.code, "message": f.message, "detail": f.detail } }),
            f.code,
        ),
    };
    let wall_time_ms = if no_timing {
        0.0
    } else {
        start.elapsed().as_secs_f64() * 1e3
    };
    let report = RunReport {
        command: command_name(&cli.command).to_string(),
        inputs,
        seed,
        tolerances: tol,
        result,
        wall_time_ms,
    };
    (report, code)
}

fn dispatch(cmd: &Command, s: &Settings) -> Result<(Value, i32), Failure> {
    let cfg = &s.tol;
    match cmd {
        Command::Classify(pair) => {
            let (a, p) = load_pair(pair, cfg)?;
            let report = classify(&a, &p, cfg)?;
            let code = if report.memberships.is_empty() {
                EXIT_NO_MEMBERSHIP
            } else {
                EXIT_OK
            };
            Ok((to_value(&report), code))
        }
        Command::Densify { pair, .. } => {
            let class = s.class.ok_or_else(|| Failure::input("densify needs --class"))?;
            let eps = s.eps.ok_or_else(|| Failure::input("densify needs --eps"))?;
            let (a, p) = load_pair(pair, cfg)?;
            let r = match class {
                StructureClass::J => densify_j(&a, &p, eps, cfg, &s.search)?,
                StructureClass::L => densify_l(&a, &p, eps, cfg, &s.search)?,
                StructureClass::G => densify_g(&a, &p, eps, cfg, &s.search)?,
                StructureClass::N => densify_n(&a, &p, eps, cfg, &s.search)?,
            };
            Ok((to_value(&r), EXIT_OK))
        }
        Command::Split(pair) => {
            let (a, p) = load_pair(pair, cfg)?;
            let (sa, k) = classes::toeplitz_split(&a, &p)?;
            let value = json!({
                "s": mat(&sa),
                "k": mat(&k),
                "res_j_s": classes::res_j(&sa, &p)?,
                "res_l_k": classes::res_l(&k, &p)?,
                "reconstruction": linalg::norm2(&(&sa + &k - &a)),
            });
            Ok((value, EXIT_OK))
        }
        Command::Project { pair, .. } => {
            let class = s.class.unwrap_or(StructureClass::J);
            let (a, p) = load_pair(pair, cfg)?;
            let projected = match class {
                StructureClass::J => classes::project_j(&a, &p)?,
                StructureClass::L => classes::project_l(&a, &p)?,
                other => return Err(Failure::input(format!("project supports J and L, got {other}"))),
            };
            let value = json!({
                "class": class,
                "projected": mat(&projected),
                "distance": linalg::norm2(&(&a - &projected)),
                "class_residual": classes::class_residual(&projected, &p, class)?,
            });
            Ok((value, EXIT_OK))
        }
        Command::Canonical(pair) => {
            let (a, p) = load_pair(pair, cfg)?;
            let form = canonical_pair_form(&a, &p, cfg)?;
            Ok((to_value(&form), EXIT_OK))
        }
        Command::Cayley {
            pair,
            direction,
            w,
            alpha,
        } => {
            let (a, p) = load_pair(pair, cfg)?;
            let d = CayleyParams::default();
            let w = w.unwrap_or(d.w);
            let (out, prm, class) = match direction {
                Direction::ToUnitary => {
                    let prm = CayleyParams::new(w, alpha.unwrap_or(d.alpha))?;
                    (cayley_to_unitary(&a, &p, &prm, cfg)?, prm, StructureClass::G)
                }
                Direction::ToSelfadjoint => {
                    let alpha = match alpha {
                        Some(al) => *al,
                        None => pick_alpha(&a)?,
                    };
                    let prm = CayleyParams::new(w, alpha)?;
                    (cayley_to_selfadjoint(&a, &p, &prm, cfg)?, prm, StructureClass::J)
                }
            };
            let value = json!({
                "direction": direction,
                "params": prm,
                "matrix": mat(&out),
                "class": class,
                "class_residual": classes::class_residual(&out, &p, class)?,
            });
            Ok((value, EXIT_OK))
        }
        Command::Sum4(pair) => {
            let (a, p) = load_pair(pair, cfg)?;
            let sum = sum_of_four(&a, &p, cfg, &s.search)?;
            let err = linalg::norm2(&(sum.sum() - &a)) / linalg::norm2(&a).max(f64::MIN_POSITIVE);
            let value = json!({
                "parts": sum,
                "relative_reconstruction_error": err,
            });
            Ok((value, EXIT_OK))
        }
        Command::Generate {
            kind,
            n,
            lambda,
            sign,
            base,
            out_dir,
            prefix,
        } => {
            let pair = generate_pair(*kind, *n, *lambda, *sign, *base, s.search.seed, cfg)?;
            let prefix = prefix.clone().unwrap_or_else(|| {
                to_value(kind).as_str().map(str::to_owned).unwrap_or_else(|| "pair".into())
            });
            fs::create_dir_all(out_dir)
                .map_err(|e| Failure::input(format!("cannot create {}: {e}", out_dir.display())))?;
            let a_path = out_dir.join(format!("{prefix}_A.json"));
            let b_path = out_dir.join(format!("{prefix}_B.json"));
            write_matrix(&a_path, &pair.a)?;
            write_matrix(&b_path, &pair.b)?;
            let p = pair.product(cfg)?;
            let value = json!({
                "kind": kind,
                "n": n,
                "a_path": a_path.display().to_string(),
                "b_path": b_path.display().to_string(),
                "memberships": classify(&pair.a, &p, cfg)?.memberships,
            });
            Ok((value, EXIT_OK))
        }
    }
}

/// Builds a generated pair. `lambda` defaults to an integer in `-3..=3` drawn
/// from the seed.
pub fn generate_pair(
    kind: GenKind,
    n: usize,
    lambda: Option<f64>,
    sign: i8,
    base: GenKind,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<Pair, Failure> {
    if n == 0 {
        return Err(Failure::input("n must be at least 1"));
    }
    if sign != 1 && sign != -1 {
        return Err(Failure::input(format!("sign must be 1 or -1, got {sign}")));
    }
    let mut rng = stream(seed);
    let lambda = lambda.unwrap_or_else(|| rng.gen_range(-3i32..=3) as f64);
    let sign = sign as f64;
    let pair = match kind {
        GenKind::JordanPair => generate::jordan_pair(n, lambda, sign)?,
        GenKind::UnitaryExample => generate::unitary_example(n, lambda, sign, cfg)?,
        GenKind::NormalExample => {
            let blocks = generate::random_normal_blocks(&mut rng, n, 3);
            generate::normal_example(&blocks)?
        }
        GenKind::RandomCongruence => {
            if base == GenKind::RandomCongruence {
                return Err(Failure::input("random_congruence cannot wrap itself"));
            }
            let inner = generate_pair(base, n, Some(lambda), sign as i8, base, rng.gen(), cfg)?;
            generate::random_congruence(&mut rng, &inner, 100.0, cfg)?
        }
    };
    Ok(pair)
}

/// Parses `args`, runs the command and prints the report. Returns the exit
/// code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (report, code) = run(&cli);
    if let Some(err) = report.result.get("error") {
        eprintln!("error: {}", err["message"].as_str().unwrap_or("unknown"));
    }
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    code
}
