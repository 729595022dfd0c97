//! Command implementations behind the `maass` binary. Each returns either a
//! structured outcome for the caller to print, or a `CmdError` carrying the
//! process exit code: 2 for parse/usage failures, 3 for invariant violations,
//! 4 for domain errors. Check failures are reported in the outcome and exit
//! with code 1, not as errors.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use num::complex::Complex64;
use thiserror::Error;

use maass_core::analytic::{eval_series, t_down, t_up, tail_bound, AnalyticError, DomainPoint};
use maass_core::{
    build_constraints, check_symmetry, compare_report, is_maass, maass_lift, restrict_coeffs,
    solve_null_space, Embedding, Prime, QuadSpace, Weight,
};

use crate::formats::{
    self, parse_coeffs, parse_embedding, parse_seed, write_coeffs, FormatError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;

#[derive(Debug, Error)]
pub enum CmdError {
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("{path}: {source}")]
    Format {
        path: String,
        #[source]
        source: FormatError,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invariant(String),
    #[error("{0}")]
    Domain(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Io { .. } | CmdError::Usage(_) => EXIT_PARSE,
            CmdError::Format { source, .. } => match source {
                FormatError::Parse { .. } => EXIT_PARSE,
                FormatError::Invariant { .. } => EXIT_INVARIANT,
            },
            CmdError::Invariant(_) => EXIT_INVARIANT,
            CmdError::Domain(_) => EXIT_DOMAIN,
        }
    }
}

fn read(path: &Path) -> Result<String, CmdError> {
    fs::read_to_string(path).map_err(|e| CmdError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

fn write(path: &Path, text: &str) -> Result<(), CmdError> {
    fs::write(path, text).map_err(|e| CmdError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

fn format_err(path: &Path, source: FormatError) -> CmdError {
    CmdError::Format {
        path: path.display().to_string(),
        source,
    }
}

/// The checkers enumerate the whole box densely; refuse sizes that could
/// only end in an apparent hang.
const MAX_BOX_VOLUME: i128 = 10_000_000;

fn check_box_volume(a_max: i64, b_max: i64) -> Result<(), CmdError> {
    if (a_max as i128 + 1) * (b_max as i128 + 1) > MAX_BOX_VOLUME {
        return Err(CmdError::Usage(format!(
            "box {a_max} x {b_max} is too large to enumerate (volume limit {MAX_BOX_VOLUME})"
        )));
    }
    Ok(())
}

fn resolve_weight(arg: Option<u32>, file: Option<u32>) -> Result<Weight, CmdError> {
    let k = arg
        .or(file)
        .ok_or_else(|| CmdError::Usage("no weight given: pass -k or store `k` in the file".into()))?;
    Weight::new(k).map_err(|e| CmdError::Invariant(e.to_string()))
}

/// Primes from `--primes`, else `MAASS_PRIMES`, else `{2, 3}`.
pub fn resolve_primes(flag: Option<&str>) -> Result<Vec<Prime>, CmdError> {
    let spec = match flag {
        Some(s) => s.to_string(),
        None => std::env::var("MAASS_PRIMES").unwrap_or_else(|_| "2,3".into()),
    };
    let mut primes = Vec::new();
    for token in spec.split(|c: char| c == ',' || c.is_whitespace()) {
        if token.is_empty() {
            continue;
        }
        let p: u64 = token
            .parse()
            .map_err(|_| CmdError::Usage(format!("bad prime `{token}`")))?;
        primes.push(Prime::new(p).map_err(|e| CmdError::Usage(e.to_string()))?);
    }
    if primes.is_empty() {
        return Err(CmdError::Usage("empty prime set".into()));
    }
    primes.sort();
    primes.dedup();
    Ok(primes)
}

pub fn cmd_lift(
    seed_path: &Path,
    k: Option<u32>,
    a_max: i64,
    b_max: i64,
    out_path: &Path,
) -> Result<(), CmdError> {
    if a_max < 0 || b_max < 0 {
        return Err(CmdError::Usage("box bounds must be non-negative".into()));
    }
    check_box_volume(a_max, b_max)?;
    let (seed, file_k) = parse_seed(&read(seed_path)?).map_err(|e| format_err(seed_path, e))?;
    let k = resolve_weight(k, file_k)?;
    let lifted = maass_lift(&seed, k, a_max, b_max);
    write(out_path, &write_coeffs(&lifted))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Maass,
    Sym,
    Both,
}

pub struct CheckOutcome {
    pub passed: bool,
    pub lines: Vec<String>,
}

pub fn cmd_check(
    coeff_path: &Path,
    k: Option<u32>,
    mode: CheckMode,
    primes: &[Prime],
) -> Result<CheckOutcome, CmdError> {
    let f = parse_coeffs(&read(coeff_path)?).map_err(|e| format_err(coeff_path, e))?;
    check_box_volume(f.region().a_max, f.region().b_max)?;
    let k = resolve_weight(k, f.weight_hint().map(|w| w.get()))?;
    let mut lines = Vec::new();
    let mut passed = true;
    if matches!(mode, CheckMode::Maass | CheckMode::Both) {
        let report = is_maass(&f, k);
        for v in &report.violations {
            lines.push(format!(
                "maass violation: l={} X={} lhs={} rhs={}",
                v.l,
                v.primitive,
                formats::format_rational(&v.lhs),
                formats::format_rational(&v.rhs)
            ));
        }
        passed &= report.passed();
    }
    if matches!(mode, CheckMode::Sym | CheckMode::Both) {
        let report = check_symmetry(&f, k, primes);
        for d in &report.defects {
            lines.push(format!(
                "sym defect: p={} X={} defect={}",
                d.p,
                d.at,
                formats::format_rational(&d.value)
            ));
        }
        passed &= report.passed();
    }
    Ok(CheckOutcome { passed, lines })
}

pub struct SolveOutcome {
    pub report_lines: Vec<String>,
    pub passed: bool,
}

pub fn cmd_solve(
    gram: Vec<Vec<i64>>,
    k: u32,
    primes: &[Prime],
    a_max: i64,
    b_max: i64,
    out_dir: &Path,
) -> Result<SolveOutcome, CmdError> {
    if a_max < 1 || b_max < 1 {
        return Err(CmdError::Usage("box bounds must be at least 1".into()));
    }
    check_box_volume(a_max, b_max)?;
    let qs = Arc::new(QuadSpace::new(gram).map_err(|e| CmdError::Invariant(e.to_string()))?);
    let k = Weight::new(k).map_err(|e| CmdError::Invariant(e.to_string()))?;
    fs::create_dir_all(out_dir).map_err(|e| CmdError::Io {
        path: out_dir.display().to_string(),
        msg: e.to_string(),
    })?;
    let sys = build_constraints(&qs, k, primes, a_max, b_max);
    let solution = solve_null_space(&sys);
    for (i, f) in solution.basis.iter().enumerate() {
        let path = out_dir.join(format!("basis_{i:05}.coeff"));
        write(&path, &write_coeffs(f))?;
    }
    let report = compare_report(&sys, &solution, primes);
    let mut text = String::new();
    let _ = writeln!(text, "columns {}", report.columns);
    let _ = writeln!(text, "rows {}", report.rows);
    let _ = writeln!(text, "rank {}", report.rank);
    let _ = writeln!(text, "nullity {}", report.nullity);
    let _ = writeln!(text, "lift_dim {}", report.lift_dim);
    let _ = writeln!(text, "lift_dim_equals_nullity {}", report.lift_dim_equals_nullity);
    let _ = writeln!(text, "containment_defects {}", report.containment_defects.len());
    let _ = writeln!(text, "interior_box {} {}", report.interior_a, report.interior_b);
    let _ = writeln!(text, "interior_violations {}", report.interior_violations.len());
    write(&out_dir.join("report.txt"), &text)?;
    Ok(SolveOutcome {
        report_lines: text.lines().map(String::from).collect(),
        passed: report.passed(),
    })
}

pub fn cmd_restrict(
    coeff_path: &Path,
    embedding_path: &Path,
    out_path: &Path,
) -> Result<(), CmdError> {
    let f = parse_coeffs(&read(coeff_path)?).map_err(|e| format_err(coeff_path, e))?;
    let emb_file =
        parse_embedding(&read(embedding_path)?).map_err(|e| format_err(embedding_path, e))?;
    if f.qs().gram() != emb_file.source_gram.as_slice() {
        return Err(CmdError::Invariant(
            "embedding source Gram matrix does not match the coefficient file".into(),
        ));
    }
    let emb = Embedding::new(f.qs(), emb_file.matrix)
        .map_err(|e| CmdError::Invariant(e.to_string()))?;
    let restricted = restrict_coeffs(&f, &emb);
    write(out_path, &write_coeffs(&restricted))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalOp {
    Id,
    TUp,
    TDown,
}

pub struct EvalOutcome {
    pub value: Complex64,
    pub printed: String,
    /// up/down agreement when the operator pair was compared
    pub comparison: Option<ComparisonOutcome>,
}

pub struct ComparisonOutcome {
    pub difference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn domain_err(e: AnalyticError) -> CmdError {
    CmdError::Domain(e.to_string())
}

/// Evaluates the expansion (or an up/down operator value) at a point given as
/// `2(m + 2)` reals: `tau`, the `m` fiber coordinates and `z`, each as
/// `re im`. For the operator ops the mirror value is also computed and
/// compared against `tolerance` (default: twice the tail bound plus 1e-12,
/// only available on the `w = 0` slice).
pub fn cmd_eval(
    coeff_path: &Path,
    k: Option<u32>,
    op: EvalOp,
    p: Option<u64>,
    point: &[f64],
    tolerance: Option<f64>,
) -> Result<EvalOutcome, CmdError> {
    let f = parse_coeffs(&read(coeff_path)?).map_err(|e| format_err(coeff_path, e))?;
    let m = f.qs().rank();
    if point.len() != 2 * (m + 2) {
        return Err(CmdError::Usage(format!(
            "point needs {} reals (tau, {} fiber coordinates, z as re/im pairs), got {}",
            2 * (m + 2),
            m,
            point.len()
        )));
    }
    let tau = Complex64::new(point[0], point[1]);
    let w: Vec<Complex64> = (0..m)
        .map(|i| Complex64::new(point[2 + 2 * i], point[3 + 2 * i]))
        .collect();
    let z = Complex64::new(point[2 * m + 2], point[2 * m + 3]);
    let at = DomainPoint::new(f.qs(), tau, w, z).map_err(domain_err)?;

    let value = match op {
        EvalOp::Id => eval_series(&f, &at),
        EvalOp::TUp | EvalOp::TDown => {
            let k = resolve_weight(k, f.weight_hint().map(|x| x.get()))?;
            let p = p.ok_or_else(|| CmdError::Usage("operator evaluation needs -p <prime>".into()))?;
            let p = Prime::new(p).map_err(|e| CmdError::Usage(e.to_string()))?;
            let up = t_up(&f, k, p, &at).map_err(domain_err)?;
            let down = t_down(&f, k, p, &at).map_err(domain_err)?;
            let tol = match tolerance {
                Some(t) => Some(t),
                None => match tail_bound(f.region(), f.qs(), k, p, &at) {
                    Ok(bound) => Some(2.0 * bound + 1e-12),
                    // no certified bound off the w = 0 slice
                    Err(AnalyticError::NonzeroFiber) => None,
                    Err(e) => return Err(domain_err(e)),
                },
            };
            let comparison = tol.map(|tolerance| {
                let difference = (up - down).norm();
                ComparisonOutcome {
                    difference,
                    tolerance,
                    passed: difference <= tolerance,
                }
            });
            let value = match op {
                EvalOp::TUp => up,
                _ => down,
            };
            return Ok(EvalOutcome {
                value,
                printed: print_complex(value),
                comparison,
            });
        }
    };
    Ok(EvalOutcome {
        value,
        printed: print_complex(value),
        comparison: None,
    })
}

/// `re im` with 15 significant digits.
fn print_complex(v: Complex64) -> String {
    format!("{:.14e} {:.14e}", v.re, v.im)
}
