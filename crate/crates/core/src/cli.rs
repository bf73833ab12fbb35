//! Command-line driver: argument parsing, dispatch and rendering.
//!
//! [`run`] never exits the process; it returns the rendered output and the
//! exit code so the binary stays trivial and the driver is testable.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad input, 3 refusal
//! (non-integer `n`), 4 numerical failure.

use std::ffi::OsString;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::diffop::PolySpace;
use crate::discrepancy::{discrepancy_report, family_case};
use crate::elliptic::{invariants_from_lattice, LatticeInvariants, RectangularLattice, Weierstrass};
use crate::error::{Error, Result};
use crate::integral::check_commutator;
use crate::model::{
    build_operator, build_sl2_form, conjugated_operator, coupling_map_with, CouplingConstants, CouplingConvention,
    CouplingFamily,
};
use crate::oracle::{residual, OracleConfig, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOLERANCE};
use crate::sl2::{check_preserves, commutation_defect};
use crate::spectrum::{trace_branches, G2Path};
use crate::spectrum::{eigen_residual, family_eigenpairs};

/// Version of the JSON layout, bumped on incompatible changes.
pub const SCHEMA_VERSION: u32 = 1;

/// Relative size below which a floating-point operator identity counts as exact.
const IDENTITY_TOL: f64 = 1e-10;

#[derive(Parser, Debug)]
#[command(name = "bc1", version, about = "Spectra and checks for the BC1 elliptic quantum model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Oracle tolerance on the relative residual.
    #[arg(long, env = "BC1_TOLERANCE", default_value_t = DEFAULT_TOLERANCE, global = true)]
    pub tolerance: f64,
    /// Seed of the oracle sample points.
    #[arg(long, default_value_t = DEFAULT_SEED, global = true)]
    pub seed: u64,
    /// Oracle sample points per eigenfunction.
    #[arg(long, default_value_t = DEFAULT_SAMPLES, global = true)]
    pub samples: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Either `--g2 --g3` or `--tau-im` (real period 1).
#[derive(Args, Debug, Clone)]
pub struct InvariantArgs {
    #[arg(long, requires = "g3", conflicts_with = "tau_im", allow_hyphen_values = true)]
    pub g2: Option<Complex64>,
    #[arg(long, requires = "g2", conflicts_with = "tau_im", allow_hyphen_values = true)]
    pub g3: Option<Complex64>,
    #[arg(long, required_unless_present = "g2")]
    pub tau_im: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Roots e1, e2, e3 of 4t³ − g2 t − g3.
    Roots {
        #[command(flatten)]
        inv: InvariantArgs,
    },
    /// Eigenvalues and polynomial eigenfunctions on P_n.
    Spectrum {
        /// e.g. `first:mu=0.25,n=1`, `second:mu=0.3,n=2,k=1`, `third:nu=0.7,n=1,k=3`
        family: String,
        #[command(flatten)]
        inv: InvariantArgs,
    },
    /// Operator identities, particular integral and oracle residuals.
    Verify {
        family: String,
        #[command(flatten)]
        inv: InvariantArgs,
        /// Use the printed general coupling map and list every printed variant.
        #[arg(long)]
        as_printed: bool,
        #[arg(long, allow_hyphen_values = true)]
        kappa2: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        kappa3: Option<f64>,
    },
    /// Follow the eigenvalue branches along a path in the g2 plane.
    Sweep {
        family: String,
        #[arg(long, allow_hyphen_values = true)]
        g3: Complex64,
        /// `circle:center=0,radius=1[,turns=1]` or `segment:from=1,to=4`
        /// (complex values as `1.5-2i`).
        #[arg(long)]
        path: String,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Oracle adjudication of the conflicting printed formulas.
    Discrepancies,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub family: Option<String>,
    pub g2: Option<Complex64>,
    pub g3: Option<Complex64>,
    pub tau_im: Option<f64>,
    pub path: Option<String>,
    pub steps: Option<usize>,
    pub format: Format,
    pub tolerance: f64,
    pub seed: u64,
    pub samples: usize,
    pub as_printed: bool,
    pub kappa2: Option<f64>,
    pub kappa3: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// The measured quantity, where there is one.
    pub value: Option<f64>,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, value: Option<f64>, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            value,
            detail: detail.into(),
        }
    }

    fn skipped(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: Status::Skipped,
            value: None,
            detail: detail.into(),
        }
    }
}

/// Rendered output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonIntegerN(_) => 3,
        Error::Parse { .. } | Error::Config(_) | Error::InvalidRootIndex(_) | Error::InvalidLattice(_) => 2,
        _ => 4,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            return if code == 0 {
                Outcome { stdout: text, stderr: String::new(), code }
            } else {
                Outcome { stdout: String::new(), stderr: text, code }
            };
        }
    };
    match execute(&cli) {
        Ok((stdout, ok)) => Outcome { stdout, stderr: String::new(), code: if ok { 0 } else { 1 } },
        Err(e) => Outcome {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: exit_code(&e),
        },
    }
}

/// A finished command before rendering.
struct Report {
    results: Value,
    checks: Vec<Check>,
    discrepancies: Value,
    /// CSV header and rows.
    table: (Vec<String>, Vec<Vec<String>>),
    /// Extra CSV line after the table, written as a `# ` comment.
    footer: Option<Value>,
}

fn execute(cli: &Cli) -> Result<(String, bool)> {
    let common = &cli.common;
    if !(common.tolerance.is_finite() && common.tolerance > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {}", common.tolerance)));
    }
    if common.samples == 0 {
        return Err(Error::Config("samples must be positive".into()));
    }
    let cfg = OracleConfig {
        tolerance: common.tolerance,
        samples: common.samples,
        seed: common.seed,
        ..OracleConfig::default()
    };
    let mut config = RunConfig {
        command: "",
        family: None,
        g2: None,
        g3: None,
        tau_im: None,
        path: None,
        steps: None,
        format: common.format,
        tolerance: common.tolerance,
        seed: common.seed,
        samples: common.samples,
        as_printed: false,
        kappa2: None,
        kappa3: None,
    };
    let set_inv = |config: &mut RunConfig, inv: &InvariantArgs| {
        config.g2 = inv.g2;
        config.g3 = inv.g3;
        config.tau_im = inv.tau_im;
    };
    let report = match &cli.command {
        Command::Roots { inv } => {
            config.command = "roots";
            set_inv(&mut config, inv);
            cmd_roots(&Invariants::resolve(inv)?)
        }
        Command::Spectrum { family, inv } => {
            config.command = "spectrum";
            config.family = Some(family.clone());
            set_inv(&mut config, inv);
            cmd_spectrum(&family.parse()?, &Invariants::resolve(inv)?, &cfg)?
        }
        Command::Verify { family, inv, as_printed, kappa2, kappa3 } => {
            config.command = "verify";
            config.family = Some(family.clone());
            set_inv(&mut config, inv);
            config.as_printed = *as_printed;
            config.kappa2 = *kappa2;
            config.kappa3 = *kappa3;
            let overrides = (*kappa2, *kappa3);
            cmd_verify(&family.parse()?, &Invariants::resolve(inv)?, &cfg, *as_printed, overrides)?
        }
        Command::Sweep { family, g3, path, steps } => {
            config.command = "sweep";
            config.family = Some(family.clone());
            config.g3 = Some(*g3);
            config.path = Some(path.clone());
            config.steps = Some(*steps);
            cmd_sweep(&family.parse()?, *g3, &parse_path(path)?, *steps)?
        }
        Command::Discrepancies => {
            config.command = "discrepancies";
            config.tau_im = Some(crate::discrepancy::REPORT_TAU_IM);
            cmd_discrepancies(&cfg)?
        }
    };
    let ok = report.checks.iter().all(|c| c.status != Status::Fail);
    let text = match common.format {
        Format::Json => render_json(&config, &report),
        Format::Csv => render_csv(&report)?,
    };
    Ok((text, ok))
}

fn render_json(config: &RunConfig, r: &Report) -> String {
    let doc = json!({
        "config": config,
        "results": r.results,
        "checks": r.checks,
        "discrepancies": r.discrepancies,
        "version": { "schema": SCHEMA_VERSION, "crate": env!("CARGO_PKG_VERSION") },
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn render_csv(r: &Report) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Config(format!("csv output: {e}"));
    w.write_record(&r.table.0).map_err(io)?;
    for row in &r.table.1 {
        w.write_record(row).map_err(io)?;
    }
    let mut out = String::from_utf8(w.into_inner().map_err(|e| Error::Config(e.to_string()))?)
        .expect("csv writes the UTF-8 it was given");
    if let Some(f) = &r.footer {
        out.push_str("# ");
        out.push_str(&f.to_string());
        out.push('\n');
    }
    Ok(out)
}

/// Resolved invariants plus the lattice when the oracle can run.
struct Invariants {
    inv: LatticeInvariants<Complex64>,
    wp: std::result::Result<Weierstrass, String>,
    periods: Option<RectangularLattice>,
}

impl Invariants {
    fn resolve(args: &InvariantArgs) -> Result<Self> {
        if let Some(t) = args.tau_im {
            let lat = RectangularLattice::new(t)?;
            let inv = invariants_from_lattice(&lat)?;
            let wp = Weierstrass::new(&inv, lat)?;
            return Ok(Invariants { inv, wp: Ok(wp), periods: Some(lat) });
        }
        let (Some(g2), Some(g3)) = (args.g2, args.g3) else {
            return Err(Error::Config("give either --g2 and --g3, or --tau-im".into()));
        };
        let inv = LatticeInvariants::from_invariants(g2, g3);
        let lat = RectangularLattice::from_invariants(&inv);
        let periods = lat.as_ref().ok().copied();
        let wp = lat
            .and_then(|l| Weierstrass::new(&inv, l))
            .map_err(|e| e.to_string());
        Ok(Invariants { inv, wp, periods })
    }
}

/// Same digits as the JSON output (shortest round-trip form).
fn num(x: f64) -> String {
    serde_json::to_string(&x).expect("floats serialize")
}

fn re_im(z: Complex64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn cmd_roots(inv: &Invariants) -> Report {
    let i = &inv.inv;
    let rows: Vec<Value> = i
        .roots
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let r = (4.0 * e * e * e - i.g2 * e - i.g3).norm();
            json!({ "index": k + 1, "root": e, "residual": r })
        })
        .collect();
    let table_rows = i
        .roots
        .iter()
        .zip(&rows)
        .enumerate()
        .map(|(k, (e, row))| {
            let [re, im] = re_im(*e);
            vec![(k + 1).to_string(), re, im, row["residual"].to_string()]
        })
        .collect();
    let periods = inv.periods.map(|l| json!({ "real_period": l.real_period, "tau_im": l.tau_im }));
    Report {
        results: json!({
            "g2": i.g2,
            "g3": i.g3,
            "discriminant": i.discriminant,
            "degenerate": i.degenerate,
            "roots": rows,
            "periods": periods,
        }),
        checks: vec![Check::new(
            "root-residual",
            i.root_residual() <= 1e-12 * (1.0 + i.g2.norm().max(i.g3.norm())),
            Some(i.root_residual()),
            "max |4e³ − g2·e − g3|",
        )],
        discrepancies: json!([]),
        table: (
            ["index", "root_re", "root_im", "residual"].map(String::from).to_vec(),
            table_rows,
        ),
        footer: None,
    }
}

fn oracle_couplings(
    fam: &CouplingFamily<Complex64>,
    as_printed: bool,
    overrides: (Option<f64>, Option<f64>),
) -> CouplingConstants<Complex64> {
    let convention = if as_printed { CouplingConvention::AsPrinted } else { CouplingConvention::Validated };
    let mut k = coupling_map_with(fam, convention);
    if let Some(v) = overrides.0 {
        k.kappa2 = Complex64::new(v, 0.0);
    }
    if let Some(v) = overrides.1 {
        k.kappa3 = Complex64::new(v, 0.0);
    }
    k
}

/// Eigenpairs with τ-space and x-space residuals; shared by `spectrum` and `verify`.
fn spectrum_rows(
    fam: &CouplingFamily<Complex64>,
    inv: &Invariants,
    cfg: &OracleConfig,
    couplings: &CouplingConstants<Complex64>,
) -> Result<(Vec<Value>, Vec<Vec<String>>, Vec<Check>)> {
    let n = fam.require_integer_n()?;
    let op = build_operator(fam, &inv.inv)?;
    let pairs = family_eigenpairs(fam, &inv.inv)?;
    let mut rows = Vec::new();
    let mut table = Vec::new();
    let mut checks = Vec::new();
    let mut worst_tau = 0.0f64;
    for (idx, e) in pairs.iter().enumerate() {
        let tau_res = eigen_residual(&op, e.h_eigenvalue, &e.poly);
        worst_tau = worst_tau.max(tau_res);
        let oracle = match &inv.wp {
            Ok(wp) => Some(residual(fam, &inv.inv, wp, &e.poly, e.energy, couplings, cfg)?),
            Err(_) => None,
        };
        let name = format!("oracle-residual[{}]", idx + 1);
        checks.push(match (&oracle, &inv.wp) {
            (Some(r), _) => {
                let at = r
                    .residuals
                    .iter()
                    .zip(&r.sample_points)
                    .max_by(|a, b| a.0.total_cmp(b.0))
                    .map(|(_, x)| *x)
                    .unwrap_or_default();
                Check::new(
                    name,
                    r.pass,
                    Some(r.max),
                    format!("max |HΨ − EΨ|/|Ψ| = {:.3e} at x = {at:.6} (κ₂ = {}, κ₃ = {})", r.max, couplings.kappa2.re, couplings.kappa3.re),
                )
            }
            (None, Err(reason)) => Check::skipped(name, reason.clone()),
            (None, Ok(_)) => unreachable!(),
        });
        let mut coeffs: Vec<Complex64> = e.poly.coeffs().to_vec();
        coeffs.resize(n + 1, Complex64::new(0.0, 0.0));
        rows.push(json!({
            "index": idx + 1,
            "lambda": e.h_eigenvalue,
            "energy": e.energy,
            "poly": coeffs,
            "algebraic_multiplicity": e.algebraic_multiplicity,
            "geometric_multiplicity": e.geometric_multiplicity,
            "jordan": e.algebraic_multiplicity > e.geometric_multiplicity,
            "eigenspace": e.eigenspace.iter().map(|p| p.coeffs().to_vec()).collect::<Vec<_>>(),
            "tau_residual": tau_res,
            "oracle": oracle,
        }));
        let mut line = vec![(idx + 1).to_string()];
        line.extend(re_im(e.h_eigenvalue));
        line.extend(re_im(e.energy));
        line.push(e.algebraic_multiplicity.to_string());
        line.push(e.geometric_multiplicity.to_string());
        line.push((e.algebraic_multiplicity > e.geometric_multiplicity).to_string());
        line.push(num(tau_res));
        line.push(opt(oracle.as_ref().map(|r| r.max)));
        for c in &coeffs {
            line.extend(re_im(*c));
        }
        table.push(line);
    }
    checks.insert(
        0,
        Check::new("tau-eigen-residual", worst_tau < IDENTITY_TOL, Some(worst_tau), "max ‖hP − λP‖ / ((1+|λ|)‖P‖)"),
    );
    Ok((rows, table, checks))
}

fn spectrum_header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = [
        "index",
        "lambda_re",
        "lambda_im",
        "energy_re",
        "energy_im",
        "algebraic_multiplicity",
        "geometric_multiplicity",
        "jordan",
        "tau_residual",
        "oracle_residual",
    ]
    .map(String::from)
    .to_vec();
    for j in 0..=n {
        h.push(format!("p{j}_re"));
        h.push(format!("p{j}_im"));
    }
    h
}

fn cmd_spectrum(fam: &CouplingFamily<Complex64>, inv: &Invariants, cfg: &OracleConfig) -> Result<Report> {
    let n = fam.require_integer_n()?;
    let couplings = oracle_couplings(fam, false, (None, None));
    let (rows, table, checks) = spectrum_rows(fam, inv, cfg, &couplings)?;
    Ok(Report {
        results: json!({
            "family": crate::discrepancy::label(fam),
            "n": n,
            "couplings": { "kappa2": couplings.kappa2, "kappa3": couplings.kappa3 },
            "eigenpairs": rows,
        }),
        checks,
        discrepancies: json!([]),
        table: (spectrum_header(n), table),
        footer: None,
    })
}

fn cmd_verify(
    fam: &CouplingFamily<Complex64>,
    inv: &Invariants,
    cfg: &OracleConfig,
    as_printed: bool,
    overrides: (Option<f64>, Option<f64>),
) -> Result<Report> {
    let n = fam.require_integer_n()?;
    let i = &inv.inv;
    let op = build_operator(fam, i)?;
    let scale = op.max_abs().max(1.0);
    let mut checks = Vec::new();

    let lowered = build_sl2_form(fam, i)?.lower();
    let d = (lowered.clone() - op.clone()).max_abs() / scale;
    checks.push(Check::new("sl2-form", d <= IDENTITY_TOL, Some(d), "lowered sl(2) form vs explicit operator"));

    let conj = conjugated_operator(fam, i)?;
    let d = (conj - op.clone()).max_abs() / scale;
    checks.push(Check::new("gauge-conjugation", d <= IDENTITY_TOL, Some(d), "conjugated Hamiltonian vs explicit operator"));

    let p = check_preserves(&op, PolySpace::new(n));
    let leak = p.leakage.norm() / scale;
    checks.push(Check::new("invariant-subspace", leak <= IDENTITY_TOL, Some(leak), format!("leakage out of P_{n}")));

    let defect = commutation_defect(fam.n(), n + 2);
    checks.push(Check::new(
        "commutation-relations",
        defect.is_none(),
        None,
        match defect {
            None => format!("sl(2) relations hold on τ^0..τ^{}", n + 2),
            Some((rel, m)) => format!("{rel} fails on τ^{m}"),
        },
    ));

    let cc = check_commutator(fam, i)?;
    let worst = cc.max_image() / scale;
    let beyond = cc.beyond.image.max_abs() / scale;
    checks.push(Check::new(
        "particular-integral",
        worst <= IDENTITY_TOL,
        Some(worst),
        format!("[h, i_par] on P_{n}; image of τ^{} has size {beyond:.3e}", n + 1),
    ));

    let couplings = oracle_couplings(fam, as_printed, overrides);
    let (rows, _, spectrum_checks) = spectrum_rows(fam, inv, cfg, &couplings)?;
    checks.extend(spectrum_checks);

    let discrepancies = match (&inv.wp, as_printed) {
        (Ok(wp), true) => serde_json::to_value(vec![family_case(fam, i, wp, cfg)?]).expect("serializable"),
        _ => json!([]),
    };
    let table = checks
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                serde_json::to_value(c.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                opt(c.value),
                c.detail.clone(),
            ]
        })
        .collect();
    Ok(Report {
        results: json!({
            "family": crate::discrepancy::label(fam),
            "n": n,
            "couplings": { "kappa2": couplings.kappa2, "kappa3": couplings.kappa3 },
            "convention": if as_printed { "as-printed" } else { "validated" },
            "eigenpairs": rows,
        }),
        checks,
        discrepancies,
        table: (["check", "status", "value", "detail"].map(String::from).to_vec(), table),
        footer: None,
    })
}

/// `circle:center=C,radius=R[,turns=T]` or `segment:from=A,to=B`.
pub fn parse_path(s: &str) -> Result<G2Path> {
    let expected = "`circle:center=<c>,radius=<r>[,turns=<t>]` or `segment:from=<a>,to=<b>`";
    let (kind, rest) = s.split_once(':').ok_or_else(|| Error::parse(s, expected))?;
    let mut kv = std::collections::BTreeMap::new();
    for item in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| Error::parse(item, "`key=value`"))?;
        kv.insert(k.trim(), v.trim());
    }
    let complex = |key: &str| -> Result<Complex64> {
        let v = kv.get(key).ok_or_else(|| Error::parse(s, &format!("a `{key}=` entry")))?;
        v.parse::<Complex64>().map_err(|_| Error::parse(v, "complex number such as 1.5-2i"))
    };
    match kind.trim() {
        "circle" => {
            let radius = complex("radius")?;
            if radius.im != 0.0 || !(radius.re > 0.0) {
                return Err(Error::parse(s, "positive real radius"));
            }
            let turns = match kv.get("turns") {
                Some(t) => t.parse().map_err(|_| Error::parse(t, "nonnegative integer turns"))?,
                None => 1,
            };
            Ok(G2Path::Circle { center: complex("center")?, radius: radius.re, turns })
        }
        "segment" => Ok(G2Path::Segment { from: complex("from")?, to: complex("to")? }),
        _ => Err(Error::parse(s, expected)),
    }
}

fn cmd_sweep(fam: &CouplingFamily<Complex64>, g3: Complex64, path: &G2Path, steps: usize) -> Result<Report> {
    if steps == 0 {
        return Err(Error::Config("steps must be positive".into()));
    }
    fam.require_integer_n()?;
    let trace = trace_branches(fam, path, g3, steps)?;
    let mut points = Vec::new();
    let mut table = Vec::new();
    for (step, (g2, energies)) in trace.g2.iter().zip(&trace.branches).enumerate() {
        points.push(json!({ "step": step, "g2": g2, "energies": energies }));
        for (b, e) in energies.iter().enumerate() {
            let mut row = vec![step.to_string()];
            row.extend(re_im(*g2));
            row.push((b + 1).to_string());
            row.extend(re_im(*e));
            table.push(row);
        }
    }
    let summary = json!({
        "closed": path.is_closed(),
        "permutation": trace.permutation.as_ref().map(|p| p.iter().map(|b| b + 1).collect::<Vec<_>>()),
        "cycles": trace.cycle_notation(),
        "refinements": trace.refinements,
        "points": trace.g2.len(),
    });
    Ok(Report {
        results: json!({
            "family": crate::discrepancy::label(fam),
            "g3": g3,
            "summary": summary,
            "points": points,
        }),
        checks: Vec::new(),
        discrepancies: json!([]),
        table: (
            ["step", "g2_re", "g2_im", "branch", "energy_re", "energy_im"].map(String::from).to_vec(),
            table,
        ),
        footer: Some(summary),
    })
}

fn cmd_discrepancies(cfg: &OracleConfig) -> Result<Report> {
    let report = discrepancy_report(cfg)?;
    let mut table = Vec::new();
    for item in &report.items {
        for case in &item.cases {
            for v in &case.variants {
                let [k2, k3] = v.couplings.clone().unwrap_or_default();
                table.push(vec![
                    item.id.to_string(),
                    case.family.clone(),
                    v.label.clone(),
                    k2,
                    k3,
                    v.matches_conjugation.map(|b| b.to_string()).unwrap_or_default(),
                    v.max_residual.clone(),
                    v.pass.to_string(),
                ]);
            }
        }
    }
    let consistent: Vec<Value> = report
        .items
        .iter()
        .map(|i| json!({ "id": i.id, "consistent": i.consistent }))
        .collect();
    Ok(Report {
        results: json!({
            "tau_im": report.tau_im,
            "tolerance": report.tolerance,
            "samples": report.samples,
            "seed": report.seed,
            "consistent": consistent,
        }),
        checks: Vec::new(),
        discrepancies: serde_json::to_value(&report.items).expect("serializable"),
        table: (
            ["id", "family", "variant", "kappa2", "kappa3", "matches_conjugation", "max_residual", "pass"]
                .map(String::from)
                .to_vec(),
            table,
        ),
        footer: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_ok(args: &[&str]) -> Value {
        let mut full = vec!["bc1"];
        full.extend_from_slice(args);
        let out = run(full);
        assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
        serde_json::from_str(&out.stdout).unwrap()
    }

    fn complex(v: &Value) -> Complex64 {
        Complex64::new(v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
    }

    #[test]
    fn roots_examples() {
        let v = run_ok(&["roots", "--g2", "4", "--g3", "0"]);
        let roots: Vec<Complex64> = v["results"]["roots"].as_array().unwrap().iter().map(|r| complex(&r["root"])).collect();
        for (r, want) in roots.iter().zip([1.0, 0.0, -1.0]) {
            assert!((r - want).norm() < 1e-14, "{roots:?}");
        }
        let v = run_ok(&["roots", "--tau-im", "1.0"]);
        assert!(complex(&v["results"]["roots"][1]["root"]).norm() < 1e-12);
        let v = run_ok(&["roots", "--g2", "0", "--g3", "4"]);
        for r in v["results"]["roots"].as_array().unwrap() {
            assert!((complex(&r["root"]).powu(3) - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn path_parsing() {
        assert_eq!(
            parse_path("circle:center=0,radius=1").unwrap(),
            G2Path::circle(Complex64::new(0.0, 0.0), 1.0)
        );
        assert_eq!(
            parse_path("segment:from=1,to=4-2i").unwrap(),
            G2Path::Segment { from: Complex64::new(1.0, 0.0), to: Complex64::new(4.0, -2.0) }
        );
        assert!(parse_path("spiral:x=1").is_err());
        assert!(parse_path("circle:center=0,radius=-1").is_err());
    }

    #[test]
    fn exit_codes() {
        let out = run(["bc1", "spectrum", "first:mu=0.25,n=1.5", "--tau-im", "1"]);
        assert_eq!(out.code, 3);
        assert!(out.stderr.contains("quasi-exact"), "{}", out.stderr);
        assert_eq!(run(["bc1", "spectrum", "first:mu=x,n=1", "--tau-im", "1"]).code, 2);
        assert_eq!(run(["bc1", "roots"]).code, 2);
        assert_eq!(run(["bc1", "roots", "--g2", "1", "--g3", "0", "--tau-im", "1"]).code, 2);
        assert_eq!(run(["bc1", "--tolerance", "-1", "roots", "--tau-im", "1"]).code, 2);
    }
}
