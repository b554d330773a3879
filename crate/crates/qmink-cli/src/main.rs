//! qmink: construct and verify the quantum Minkowski structures, run the
//! deformed differential calculus, and solve the Dirac eigenproblem in
//! truncated momentum representations.

use clap::{Args, Parser, Subcommand};
use qmink_core::catalog::CaseSpec;
use qmink_core::diracsolve::{self, RepKind, RepParams};
use qmink_core::matrixcore::{mat_to_json, CMat, C64};
use qmink_core::qalgebra;
use qmink_core::text;
use qmink_core::verify::{self, ClaimFilter};
use qmink_core::QminkError;

const EXIT_VERIFY_FAIL: i32 = 1;
const EXIT_BAD_INPUT: i32 = 2;
const EXIT_UNSUPPORTED: i32 = 3;

#[derive(Parser)]
#[command(
    name = "qmink",
    about = "Quantum Minkowski spaces: structures, calculus, Dirac operator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CaseArgs {
    /// Case family 1-7
    #[arg(long)]
    case: u8,
    /// Deformation parameter t (cases 1, 5, 7)
    #[arg(long)]
    t: Option<f64>,
    /// Deformation parameter c (cases 2, 3, 4, 6, 7)
    #[arg(long)]
    c: Option<f64>,
    /// Deformation parameter r (cases 3, 7)
    #[arg(long)]
    r: Option<f64>,
    /// Sign s = +1 or -1
    #[arg(long, default_value_t = 1)]
    s: i8,
}

impl CaseArgs {
    fn to_spec(&self) -> CaseSpec {
        let mut spec = CaseSpec::new(self.case).with_s(self.s);
        if let Some(t) = self.t {
            spec = spec.with_t(t);
        }
        if let Some(c) = self.c {
            spec = spec.with_c(c);
        }
        if let Some(r) = self.r {
            spec = spec.with_r(r);
        }
        spec
    }
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print a structure tensor (g, ginv, R, K, A, A0..A3, gamma0..gamma3,
    /// sigma0..sigma3, V, Vinv, F00..F33, ...)
    Dump {
        #[command(flatten)]
        case: CaseArgs,
        /// Tensor name
        #[arg(long)]
        tensor: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the verification suite over the default parameter grid
    Verify {
        /// Restrict to one case family
        #[arg(long)]
        case: Option<u8>,
        /// Claim filter: all | spectral
        #[arg(long, default_value = "all")]
        claims: String,
        /// Comparison tolerance (also via env QMINK_TOL)
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Normal form of the partial derivative d_i applied to an expression
    Derive {
        #[command(flatten)]
        case: CaseArgs,
        /// Polynomial in x0..x3, e.g. "x0^2 + (2+3i)*x1*x3"
        expr: String,
        /// Derivative index i in 0..3
        index: u8,
    },
    /// Solve the Dirac eigenproblem in a truncated momentum representation
    Dirac {
        #[command(flatten)]
        case: CaseArgs,
        /// Representation kind: 1a | 1b | 2a | 2b
        #[arg(long)]
        rep: String,
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        #[arg(long, default_value_t = 0.0)]
        b: f64,
        #[arg(long, default_value_t = 0.0)]
        d: f64,
        /// Truncation size
        #[arg(long = "N", default_value_t = 12)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

/// Up to 12 significant digits, trailing zeros trimmed.
fn sig12(x: f64) -> String {
    if x == 0.0 || x == -0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let dec = (11 - mag).clamp(0, 320) as usize;
    let s = format!("{x:.dec$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Complex number as a+bi with 12 significant digits.
fn fmt_c12(z: C64) -> String {
    if z.im == 0.0 {
        sig12(z.re)
    } else if z.re == 0.0 {
        format!("{}i", sig12(z.im))
    } else if z.im < 0.0 {
        format!("{}-{}i", sig12(z.re), sig12(-z.im))
    } else {
        format!("{}+{}i", sig12(z.re), sig12(z.im))
    }
}

/// Aligned ASCII rendering of a complex matrix.
fn format_matrix(m: &CMat) -> String {
    let cells: Vec<Vec<String>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| fmt_c12(m[(i, j)])).collect())
        .collect();
    let widths: Vec<usize> = (0..m.ncols())
        .map(|j| cells.iter().map(|row| row[j].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &cells {
        out.push('[');
        for (j, cell) in row.iter().enumerate() {
            if j > 0 {
                out.push_str("  ");
            }
            out.push_str(&format!("{:>width$}", cell, width = widths[j]));
        }
        out.push_str("]\n");
    }
    out
}

fn error_exit(e: &QminkError) -> i32 {
    match e {
        QminkError::UnsupportedCase(_) => EXIT_UNSUPPORTED,
        _ => EXIT_BAD_INPUT,
    }
}

fn build(spec: &CaseSpec) -> Result<qmink_core::StructureSet, QminkError> {
    let ld = qmink_core::build_lorentz_data(spec)?;
    qmink_core::build_structures(&ld)
}

fn cmd_dump(case: &CaseArgs, tensor: &str, format: Format) -> i32 {
    let ss = match build(&case.to_spec()) {
        Ok(ss) => ss,
        Err(e) => {
            eprintln!("error: {e}");
            return error_exit(&e);
        }
    };
    match qmink_core::structures::tensor_by_name(&ss, tensor) {
        Some(m) => {
            match format {
                Format::Text => print!("{}", format_matrix(&m)),
                Format::Json => {
                    println!(
                        "{}",
                        serde_json::json!({ "tensor": tensor, "value": mat_to_json(&m) })
                    );
                }
            }
            0
        }
        None => {
            eprintln!("error: unknown tensor '{tensor}'");
            EXIT_BAD_INPUT
        }
    }
}

fn cmd_verify(case: Option<u8>, claims: &str, tol: Option<f64>, format: Format) -> i32 {
    let claims = match claims {
        "all" => ClaimFilter::All,
        "spectral" => ClaimFilter::Spectral,
        other => {
            eprintln!("error: unknown claim filter '{other}' (use all | spectral)");
            return EXIT_BAD_INPUT;
        }
    };
    let tol = tol
        .or_else(|| {
            std::env::var("QMINK_TOL")
                .ok()
                .and_then(|v| v.parse::<f64>().ok())
        })
        .unwrap_or(1e-9);
    if tol <= 0.0 {
        eprintln!("error: tolerance must be positive");
        return EXIT_BAD_INPUT;
    }
    let grid = case.map(|id| {
        verify::default_grid()
            .into_iter()
            .filter(|spec| spec.case_id == id)
            .collect::<Vec<_>>()
    });
    if let Some(g) = &grid {
        if g.is_empty() {
            eprintln!("error: no grid points for case {}", case.unwrap());
            return EXIT_BAD_INPUT;
        }
    }
    let results = verify::run_verify(grid, tol, claims);
    let ok = verify::all_passed(&results);
    match format {
        Format::Text => {
            for r in &results {
                if r.passed {
                    println!("PASS {} (residual {:.3e})", r.name, r.residual);
                } else {
                    println!("FAIL {} (residual {:.3e}) {}", r.name, r.residual, r.detail);
                }
            }
            let n_pass = results.iter().filter(|r| r.passed).count();
            println!("{n_pass}/{} checks passed", results.len());
        }
        Format::Json => {
            let arr: Vec<_> = results
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "name": r.name,
                        "passed": r.passed,
                        "residual": r.residual,
                        "detail": r.detail,
                    })
                })
                .collect();
            println!(
                "{}",
                serde_json::json!({ "passed": ok, "checks": arr })
            );
        }
    }
    if ok {
        0
    } else {
        EXIT_VERIFY_FAIL
    }
}

fn cmd_derive(case: &CaseArgs, expr: &str, index: u8) -> i32 {
    if index > 3 {
        eprintln!("error: derivative index must be 0..3");
        return EXIT_BAD_INPUT;
    }
    let ss = match build(&case.to_spec()) {
        Ok(ss) => ss,
        Err(e) => {
            eprintln!("error: {e}");
            return error_exit(&e);
        }
    };
    let poly = match text::parse_poly(expr) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_BAD_INPUT;
        }
    };
    let rt = match qalgebra::build_rewrite_table(&ss.r) {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: {e}");
            return error_exit(&e);
        }
    };
    match qalgebra::derive(index, &poly, &ss, &rt) {
        Ok(d) => {
            println!("{}", text::print_poly(&d));
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            error_exit(&e)
        }
    }
}

fn parse_rep(rep: &str) -> Option<RepKind> {
    match rep {
        "1a" => Some(RepKind::OneA),
        "1b" => Some(RepKind::OneB),
        "2a" => Some(RepKind::TwoA),
        "2b" => Some(RepKind::TwoB),
        _ => None,
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_dirac(
    case: &CaseArgs,
    rep: &str,
    a: f64,
    b: f64,
    d: f64,
    n: usize,
    format: Format,
) -> i32 {
    let Some(kind) = parse_rep(rep) else {
        eprintln!("error: unknown representation '{rep}' (use 1a | 1b | 2a | 2b)");
        return EXIT_BAD_INPUT;
    };
    if n < 4 {
        eprintln!("error: truncation N must be at least 4");
        return EXIT_BAD_INPUT;
    }
    let spec = case.to_spec();
    let expected_case = match kind {
        RepKind::OneA | RepKind::OneB => 1,
        RepKind::TwoA | RepKind::TwoB => 2,
    };
    if spec.case_id != expected_case {
        let e = QminkError::UnsupportedCase(format!(
            "representation {rep} belongs to case {expected_case}, not case {}",
            spec.case_id
        ));
        eprintln!("error: {e}");
        return error_exit(&e);
    }
    let ss = match build(&spec) {
        Ok(ss) => ss,
        Err(e) => {
            eprintln!("error: {e}");
            return error_exit(&e);
        }
    };
    let run = || -> Result<(f64, usize, f64, Vec<qmink_core::SpectrumReport>), QminkError> {
        let trep = diracsolve::build_rep(kind, RepParams::new(a, b, d), n, &spec)?;
        let mass = diracsolve::mass_of(&trep, &ss)?;
        let (_, solutions) = diracsolve::solve_dirac(&trep, &ss)?;
        let (fit, spectra) = diracsolve::solution_spectra(&trep, &ss)?;
        Ok((mass, solutions.len(), fit, spectra))
    };
    match run() {
        Ok((mass, solution_dim, fit, spectra)) => {
            match format {
                Format::Json => {
                    let spectra_json: Vec<_> = spectra
                        .iter()
                        .enumerate()
                        .map(|(t, rep)| {
                            serde_json::json!({
                                "t": t,
                                "eigenvalues": rep
                                    .eigenvalues
                                    .iter()
                                    .map(|z| serde_json::json!([z.re, z.im]))
                                    .collect::<Vec<_>>(),
                                "all_real": rep.all_real,
                                "diagonalizable": rep.diagonalizable,
                            })
                        })
                        .collect();
                    println!(
                        "{}",
                        serde_json::json!({
                            "case": spec.case_id,
                            "params": {
                                "t": spec.t, "c": spec.c, "r": spec.r, "s": spec.s,
                                "a": a, "b": b, "d": d,
                            },
                            "rep": rep,
                            "N": n,
                            "mass": mass,
                            "solution_dim": solution_dim,
                            "restriction_residual": fit,
                            "spectra": spectra_json,
                        })
                    );
                }
                Format::Text => {
                    println!("case {} rep {rep} N={n}", spec.case_id);
                    println!("mass = {}", sig12(mass));
                    println!("solution dimension = {solution_dim}");
                    println!("restriction residual = {fit:.3e}");
                    for (t, srep) in spectra.iter().enumerate() {
                        let eigs: Vec<String> =
                            srep.eigenvalues.iter().map(|&z| fmt_c12(z)).collect();
                        println!(
                            "P~{t}: all_real={} diagonalizable={} eigenvalues: {}",
                            srep.all_real,
                            srep.diagonalizable,
                            eigs.join(", ")
                        );
                    }
                }
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            error_exit(&e)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Dump { case, tensor, format } => cmd_dump(case, tensor, *format),
        Command::Verify { case, claims, tol, format } => cmd_verify(*case, claims, *tol, *format),
        Command::Derive { case, expr, index } => cmd_derive(case, expr, *index),
        Command::Dirac { case, rep, a, b, d, n, format } => {
            cmd_dirac(case, rep, *a, *b, *d, *n, *format)
        }
    };
    std::process::exit(code);
}
