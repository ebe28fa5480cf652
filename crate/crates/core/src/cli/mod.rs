//! Command-line front end.
//!
//! Exit codes: 0 success, 1 analysis-level failure, 2 input error.

pub mod document;
pub mod examples;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::compatibility::{feasibility_oracle, incompatibility_estimate, EstimatorConfig, OracleConfig};
use crate::dichotomic::{self, DichotomicPair, RegionConfig, RowVerdict, WSearchConfig};
use crate::linalg::DEFAULT_TOL;
use crate::measurements::{Povm, AXIS_X, AXIS_Y, AXIS_Z};
use crate::naimark::{self, NaimarkExtension};
use document::{matrix_to_rows, NaimarkInfo, Observable, PovmDocument};
use report::{CheckReport, MethodReport, Witness};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ANALYSIS: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

pub const REGION_HEADER: [&str; 7] = [
    "lambda1",
    "lambda2",
    "w_search",
    "oracle",
    "closed_form",
    "residual",
    "theta",
];

#[derive(Debug, Parser)]
#[command(
    name = "naimark-lab",
    version,
    about = "Compatibility analysis of quantum measurements via Naimark extensions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check every observable in a document against the POVM invariants.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Decide whether the observables in a document are compatible.
    Check(CheckArgs),
    /// Build and verify a projective extension of one observable.
    Naimark(NaimarkArgs),
    /// Scan the compatibility region of two unsharp spins.
    Region(RegionArgs),
    /// Reproduce the worked examples.
    Examples {
        #[arg(long, value_enum, default_value_t = Which::All)]
        which: Which,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    WSearch,
    Oracle,
    GEstimate,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    #[value(name = "4")]
    Four,
    All,
}

#[derive(Debug, clap::Args)]
struct CheckArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::All)]
    method: Method,
    #[arg(long, env = "NAIMARK_LAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Certification tolerance for the W search and the g-estimate.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Random restarts for the W search and the g-estimate.
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Objective evaluations per restart.
    #[arg(long, default_value_t = 5000)]
    budget: usize,
    /// Ancilla dimension for the g-estimate (default: largest outcome count).
    #[arg(long)]
    anc_dim: Option<usize>,
}

#[derive(Debug, clap::Args)]
struct NaimarkArgs {
    file: PathBuf,
    /// Observable to extend; may be omitted when the document holds one.
    #[arg(long)]
    observable: Option<String>,
    /// Write the extension as a document.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Debug, clap::Args)]
struct RegionArgs {
    /// Two spin axes among x, y, z.
    #[arg(long, default_value = "x,y")]
    axes: String,
    /// Points per axis, spanning [0, 1].
    #[arg(long, default_value_t = 11)]
    grid: usize,
    /// W-search evaluations per restart.
    #[arg(long, default_value_t = 5000)]
    budget: usize,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, env = "NAIMARK_LAB_SEED", default_value_t = 0)]
    seed: u64,
    /// CSV output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                return EXIT_INPUT;
            }
            let _ = write!(out, "{text}");
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Validate { file, tol } => cmd_validate(&file, tol, out),
        Command::Check(args) => cmd_check(&args, out),
        Command::Naimark(args) => cmd_naimark(&args, out),
        Command::Region(args) => cmd_region(&args, out),
        Command::Examples { which } => cmd_examples(which, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }

    fn analysis(message: impl ToString) -> Self {
        Failure {
            code: EXIT_ANALYSIS,
            message: message.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::analysis(format!("write failed: {e}"))
    }
}

type CmdResult = Result<u8, Failure>;

fn load(path: &Path) -> Result<PovmDocument, Failure> {
    PovmDocument::read(path).map_err(Failure::input)
}

/// Expands and validates every observable; any failure is an input error.
fn load_povms(doc: &PovmDocument, tol: f64) -> Result<Vec<(String, Povm)>, Failure> {
    doc.observables
        .iter()
        .map(|obs| {
            obs.to_povm(doc.dim, tol)
                .map(|p| (obs.name.clone(), p))
                .map_err(|e| Failure::input(format!("observable {}: {e}", obs.name)))
        })
        .collect()
}

fn cmd_validate(path: &Path, tol: f64, out: &mut dyn Write) -> CmdResult {
    let doc = load(path)?;
    let mut all_valid = true;
    for obs in &doc.observables {
        match obs.to_povm(doc.dim, tol) {
            Ok(povm) => {
                let anc = naimark::minimal_ancilla_dim(&povm);
                writeln!(
                    out,
                    "{}: valid ({} outcomes, dimension {}, minimal ancilla {}{})",
                    obs.name,
                    povm.len(),
                    povm.dim(),
                    anc.dim,
                    if anc.already_projective {
                        ", already projective"
                    } else {
                        ""
                    }
                )?;
            }
            Err(e) => {
                all_valid = false;
                writeln!(out, "{}: invalid: {e}", obs.name)?;
            }
        }
    }
    Ok(if all_valid { EXIT_OK } else { EXIT_ANALYSIS })
}

fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> CmdResult {
    let doc = load(&args.file)?;
    let named = load_povms(&doc, DEFAULT_TOL)?;
    let povms: Vec<Povm> = named.iter().map(|(_, p)| p.clone()).collect();
    let mut report = CheckReport::new(&args.file, &named, args.seed, args.tol);

    if povms.len() < 2 {
        report.note = Some("a single observable is trivially compatible".into());
    } else {
        let wanted = |m: Method| args.method == Method::All || args.method == m;
        if wanted(Method::WSearch) {
            report.methods.push(check_w_search(&povms, args));
        }
        if wanted(Method::Oracle) {
            report.methods.push(check_oracle(&povms));
        }
        if wanted(Method::GEstimate) {
            report.methods.push(check_g_estimate(&povms, args));
        }
    }

    match args.format {
        Format::Machine => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        )?,
        Format::Human => write!(out, "{}", report.render_human())?,
    }
    Ok(if report.methods.iter().any(|m| m.error.is_some()) {
        EXIT_ANALYSIS
    } else {
        EXIT_OK
    })
}

fn check_w_search(povms: &[Povm], args: &CheckArgs) -> MethodReport {
    let mut m = MethodReport::new("w-search");
    if povms.len() != 2 || povms.iter().any(|p| p.len() != 2) {
        m.verdict = RowVerdict::NotApplicable.as_str().into();
        m.note = Some("the W conditions cover pairs of two-outcome observables".into());
        return m;
    }
    let pair = match DichotomicPair::new(povms[0].clone(), povms[1].clone(), DEFAULT_TOL) {
        Ok(p) => p,
        Err(e) => {
            m.error = Some(e.to_string());
            return m;
        }
    };
    let config = WSearchConfig {
        restarts: args.restarts,
        budget: args.budget,
        tol: args.tol,
        seed: args.seed,
    };
    let search = dichotomic::find_w(&pair, &config);
    m.metric = Some(("residual".into(), search.best_residual));
    m.evaluations = Some(search.evaluations);
    match search.candidate {
        Some(c) => {
            m.verdict = RowVerdict::Compatible.as_str().into();
            match dichotomic::joint_from_w(&pair, &c.w, args.tol) {
                Ok(joint) => m.witness = Some(Witness::from_joint(&joint, Some(&c.w))),
                Err(e) => m.error = Some(e.to_string()),
            }
        }
        None => {
            m.verdict = RowVerdict::Inconclusive.as_str().into();
            m.note = Some("no W found; the conditions are sufficient only".into());
        }
    }
    m
}

fn check_oracle(povms: &[Povm]) -> MethodReport {
    let mut m = MethodReport::new("oracle");
    match feasibility_oracle(povms, &OracleConfig::default()) {
        Ok(r) => {
            m.verdict = match r.status {
                crate::compatibility::FeasibilityStatus::Feasible => RowVerdict::Compatible,
                crate::compatibility::FeasibilityStatus::Infeasible => RowVerdict::Incompatible,
                crate::compatibility::FeasibilityStatus::Inconclusive => RowVerdict::Inconclusive,
            }
            .as_str()
            .into();
            m.metric = Some(("residual".into(), r.residual));
            m.evaluations = Some(r.iterations);
            m.witness = r.joint.as_ref().map(|j| Witness::from_joint(j, None));
        }
        Err(e) => m.error = Some(e.to_string()),
    }
    m
}

fn check_g_estimate(povms: &[Povm], args: &CheckArgs) -> MethodReport {
    let mut m = MethodReport::new("g-estimate");
    let config = EstimatorConfig {
        restarts: args.restarts,
        budget: args.budget,
        seed: args.seed,
        tol: args.tol,
        anc_dim: args.anc_dim,
    };
    match incompatibility_estimate(povms, &config) {
        Ok(est) => {
            let certified = est.certifies_compatibility(args.tol);
            m.verdict = if certified {
                RowVerdict::Compatible
            } else {
                RowVerdict::Inconclusive
            }
            .as_str()
            .into();
            m.metric = Some(("g".into(), est.value));
            m.evaluations = Some(est.evaluations);
            m.converged = Some(est.converged);
            m.note = Some(if certified {
                format!("commuting extensions found with ancilla dimension {}", est.anc_dim)
            } else {
                format!(
                    "estimate over extensions with ancilla dimension {}; a positive value does not prove incompatibility",
                    est.anc_dim
                )
            });
        }
        Err(e) => m.error = Some(e.to_string()),
    }
    m
}

fn cmd_naimark(args: &NaimarkArgs, out: &mut dyn Write) -> CmdResult {
    let doc = load(&args.file)?;
    let obs = match &args.observable {
        Some(name) => doc
            .observable(name)
            .ok_or_else(|| Failure::input(format!("no observable named {name:?}")))?,
        None if doc.observables.len() == 1 => &doc.observables[0],
        None => {
            return Err(Failure::input(
                "the document holds several observables; pass --observable",
            ))
        }
    };
    let povm = obs
        .to_povm(doc.dim, DEFAULT_TOL)
        .map_err(|e| Failure::input(format!("observable {}: {e}", obs.name)))?;

    let (construction, ext) = if povm.len() == 2 {
        (
            "dichotomic",
            naimark::dichotomic_extension(&povm, &crate::linalg::identity(povm.dim()), DEFAULT_TOL),
        )
    } else {
        ("general", naimark::general_extension(&povm, None, DEFAULT_TOL))
    };
    let ext: NaimarkExtension = ext.map_err(Failure::analysis)?;
    let verdict = naimark::verify_extension(&ext, &povm, args.tol).map_err(Failure::analysis)?;
    let minimal = naimark::minimal_ancilla_dim(&povm);

    let mut extended = PovmDocument::new(
        ext.sys_dim() * ext.anc_dim(),
        vec![Observable::from_effects(
            format!("{}_extension", obs.name),
            ext.projectors(),
        )],
    );
    extended.naimark = Some(NaimarkInfo {
        source: obs.name.clone(),
        system_dim: ext.sys_dim(),
        anc_dim: ext.anc_dim(),
        ancilla_state: matrix_to_rows(ext.ancilla_state()),
    });
    if let Some(path) = &args.out {
        std::fs::write(path, extended.to_json())
            .map_err(|e| Failure::analysis(format!("cannot write {}: {e}", path.display())))?;
    }

    let summary = report::NaimarkReport {
        schema_version: report::REPORT_SCHEMA.into(),
        observable: obs.name.clone(),
        construction: construction.into(),
        outcomes: povm.len(),
        system_dim: ext.sys_dim(),
        anc_dim: ext.anc_dim(),
        minimal_anc_dim: minimal.dim,
        already_projective: minimal.already_projective,
        projector_dim: ext.sys_dim() * ext.anc_dim(),
        deltas: verdict.deltas.clone(),
        max_delta: verdict.max_delta,
        tol: args.tol,
        passed: verdict.passed,
        out: args.out.as_ref().map(|p| p.display().to_string()),
    };
    match args.format {
        Format::Machine => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&summary).expect("report serializes")
        )?,
        Format::Human => write!(out, "{}", summary.render_human())?,
    }
    Ok(if verdict.passed { EXIT_OK } else { EXIT_ANALYSIS })
}

fn parse_axis(text: &str) -> Option<[f64; 3]> {
    match text.trim() {
        "x" => Some(AXIS_X),
        "y" => Some(AXIS_Y),
        "z" => Some(AXIS_Z),
        _ => None,
    }
}

fn cmd_region(args: &RegionArgs, out: &mut dyn Write) -> CmdResult {
    let axes: Vec<[f64; 3]> = args
        .axes
        .split(',')
        .map(parse_axis)
        .collect::<Option<Vec<_>>>()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Failure::input(format!("--axes expects two of x, y, z, got {:?}", args.axes)))?;
    if args.grid < 2 {
        return Err(Failure::input("--grid must be at least 2"));
    }
    let values = dichotomic::unit_grid(args.grid);
    let grid: Vec<(f64, f64)> = values
        .iter()
        .flat_map(|&a| values.iter().map(move |&b| (a, b)))
        .collect();
    let config = RegionConfig {
        w_search: WSearchConfig {
            restarts: args.restarts,
            budget: args.budget,
            seed: args.seed,
            ..WSearchConfig::default()
        },
        oracle: OracleConfig::default(),
    };
    let rows = dichotomic::region_scan(axes[0], axes[1], &grid, &config).map_err(Failure::input)?;

    let mut buffer = Vec::new();
    {
        let mut writer = csv::Writer::from_writer(&mut buffer);
        writer.write_record(REGION_HEADER).map_err(Failure::analysis)?;
        for row in &rows {
            writer
                .write_record([
                    row.lambda1.to_string(),
                    row.lambda2.to_string(),
                    row.w_search.as_str().to_string(),
                    row.oracle.as_str().to_string(),
                    row.closed_form.as_str().to_string(),
                    row.residual.to_string(),
                    row.theta.map(|t| t.to_string()).unwrap_or_default(),
                ])
                .map_err(Failure::analysis)?;
        }
        writer.flush()?;
    }
    match &args.out {
        Some(path) => std::fs::write(path, &buffer)
            .map_err(|e| Failure::analysis(format!("cannot write {}: {e}", path.display())))?,
        None => out.write_all(&buffer)?,
    }
    Ok(EXIT_OK)
}

fn cmd_examples(which: Which, out: &mut dyn Write) -> CmdResult {
    let numbers: Vec<u8> = match which {
        Which::One => vec![1],
        Which::Two => vec![2],
        Which::Three => vec![3],
        Which::Four => vec![4],
        Which::All => vec![1, 2, 3, 4],
    };
    let mut all_passed = true;
    for n in numbers {
        let outcome = examples::run_example(n).map_err(Failure::analysis)?;
        writeln!(out, "example {n}: {}", outcome.title)?;
        for check in &outcome.checks {
            let mark = if check.passed { "ok  " } else { "FAIL" };
            writeln!(out, "  [{mark}] {}", check.description)?;
            if !check.passed {
                writeln!(out, "         expected {}, computed {}", check.expected, check.computed)?;
            }
        }
        all_passed &= outcome.passed();
    }
    Ok(if all_passed { EXIT_OK } else { EXIT_ANALYSIS })
}
