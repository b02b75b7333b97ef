//! Command implementations behind the `sparsecert` binary.
//!
//! Each command returns its standard-output text so that it can be tested
//! without spawning a process. Exit codes: 0 pass, 1 failure or error,
//! 2 usage error, 3 enumeration budget exceeded.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::bounds::{bound_report, report_from_profile, BoundKind, BoundRegistry};
use crate::error::{Error, Result};
use crate::format::{fmt17, format_matrix, parse_matrix, parse_report_k_max, report_json, report_text};
use crate::gram::gram_matrix;
use crate::matgen::{FamilyRegistry, GeneratorSpec, LaplacianKind};
use crate::matrix::MeasurementMatrix;
use crate::oracle::{check_uniqueness_bruteforce, cross_validate, validate_k_max, OracleConfig};
use crate::recon::{reconstructor, run_trials};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Environment variable that sets the worker thread count.
pub const THREADS_ENV: &str = "SPARSECERT_THREADS";

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        Error::Usage(_) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

/// Generator flags as they arrive from the command line.
#[derive(Debug, Clone, Default)]
pub struct GenOptions {
    pub family: String,
    pub n: usize,
    pub m: Option<usize>,
    pub seed: u64,
    pub rows: Option<Vec<usize>>,
    pub laplacian: Option<PathBuf>,
    pub laplacian_kind: Option<String>,
}

impl GenOptions {
    pub fn to_spec(&self) -> Result<GeneratorSpec> {
        let m = match (self.m, &self.rows) {
            (Some(m), _) => m,
            (None, Some(rows)) => rows.len(),
            (None, None) if self.family == "simplex_etf" => self.n.saturating_sub(1),
            (None, None) => self.n,
        };
        let mut spec = GeneratorSpec::new(&self.family, self.n, m).seed(self.seed);
        if let Some(rows) = &self.rows {
            if self.m.is_some_and(|m| m != rows.len()) {
                return Err(Error::BadSelection(format!(
                    "--m {} disagrees with {} listed rows",
                    m,
                    rows.len()
                )));
            }
            spec = spec.rows(rows.clone());
        }
        if let Some(p) = &self.laplacian {
            spec = spec.laplacian(p.clone());
        }
        if let Some(kind) = &self.laplacian_kind {
            spec.laplacian_kind = LaplacianKind::parse(kind)?;
        }
        Ok(spec)
    }
}

pub fn parse_row_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad row index '{t}'")))
        })
        .collect()
}

pub fn generate(spec: &GeneratorSpec) -> Result<MeasurementMatrix> {
    FamilyRegistry::default().generate(spec)
}

/// `gen`: the matrix file text.
pub fn cmd_gen(opts: &GenOptions) -> Result<String> {
    Ok(format_matrix(&generate(&opts.to_spec()?)?))
}

/// A matrix together with where it came from.
pub struct LoadedMatrix {
    pub matrix: MeasurementMatrix,
    pub descriptor: String,
    pub generator: Option<GeneratorSpec>,
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn load_text(text: &str, source: &str) -> Result<LoadedMatrix> {
    Ok(LoadedMatrix {
        matrix: parse_matrix(text)?,
        descriptor: format!("{source} sha256:{}", digest(text.as_bytes())),
        generator: None,
    })
}

pub fn load_file(path: &Path) -> Result<LoadedMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    load_text(&text, &format!("file:{}", path.display()))
}

pub fn load_generated(opts: &GenOptions) -> Result<LoadedMatrix> {
    let spec = opts.to_spec()?;
    Ok(LoadedMatrix {
        matrix: generate(&spec)?,
        descriptor: format!("generated {}", spec.descriptor()),
        generator: Some(spec),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Structured,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Self::Text),
            "structured" | "json" => Ok(Self::Structured),
            _ => Err(Error::Unknown {
                what: "report format",
                name: s.to_string(),
            }),
        }
    }
}

/// `analyze`: bound report for a loaded matrix. `include_profile` adds the
/// sorted row profiles to the structured output.
pub fn cmd_analyze(input: &LoadedMatrix, format: ReportFormat, include_profile: bool) -> Result<String> {
    let normalized = input.matrix.normalize_columns()?;
    let profile = gram_matrix(&normalized)?;
    let report = report_from_profile(&profile, normalized.rows(), input.descriptor.clone())?;
    Ok(match format {
        ReportFormat::Text => report_text(&report),
        ReportFormat::Structured => report_json(
            &report,
            input.generator.as_ref(),
            include_profile.then_some(&profile),
        ),
    })
}

pub enum VerifyTarget {
    /// Check one sparsity level.
    Fixed(usize),
    /// Every `K` up to the `k_max` values listed in a report file.
    Report(PathBuf),
    /// Compute the report first, then check it.
    Own,
}

fn fmt_witness(w: &[usize]) -> String {
    let s: Vec<String> = w.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", s.join(","))
}

/// `verify`: returns the table text and whether every check passed.
pub fn cmd_verify(input: &LoadedMatrix, target: &VerifyTarget, cfg: &OracleConfig) -> Result<(String, bool)> {
    let a = input.matrix.normalize_columns()?;
    let mut out = String::new();
    let _ = writeln!(out, "matrix  {}", input.descriptor);
    let _ = writeln!(out, "{:<18} {:>4} {:>6} {:>24} {:>12}  witness", "bound", "K", "result", "worst_sigma_min", "subsets");
    let passed = match target {
        VerifyTarget::Fixed(k) => {
            let v = check_uniqueness_bruteforce(&a, *k, cfg)?;
            let _ = writeln!(
                out,
                "{:<18} {:>4} {:>6} {:>24} {:>12}  {}",
                "fixed",
                k,
                if v.all_invertible { "pass" } else { "FAIL" },
                fmt17(v.worst_sigma_min),
                v.combos_checked,
                fmt_witness(&v.witness)
            );
            v.all_invertible
        }
        VerifyTarget::Report(_) | VerifyTarget::Own => {
            let table = match target {
                VerifyTarget::Report(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                    validate_k_max(&a, &parse_report_k_max(&text)?, cfg)?
                }
                _ => cross_validate(&a, &bound_report(&a, input.descriptor.clone())?, cfg)?,
            };
            for row in &table.rows {
                let mut extra = String::new();
                if let Some(d) = row.discs_exclude_origin {
                    let _ = write!(extra, "  discs_exclude_origin={d}");
                }
                if let Some(s) = row.certificate_sound {
                    let _ = write!(extra, " certificate_sound={s}");
                }
                let _ = writeln!(
                    out,
                    "{:<18} {:>4} {:>6} {:>24} {:>12}  {}{}",
                    row.kind.as_str(),
                    row.k,
                    if row.passed() { "pass" } else { "FAIL" },
                    fmt17(row.verdict.worst_sigma_min),
                    row.verdict.combos_checked,
                    fmt_witness(&row.verdict.witness),
                    extra
                );
            }
            if table.rows.is_empty() {
                let _ = writeln!(out, "(no certified sparsity levels to check)");
            }
            table.passed()
        }
    };
    let _ = writeln!(out, "verdict {}", if passed { "PASS" } else { "FAIL" });
    Ok((out, passed))
}

/// `recon`: seeded reconstruction experiment summary.
pub fn cmd_recon(input: &LoadedMatrix, k: usize, trials: usize, seed: u64, method: &str) -> Result<String> {
    let a = input.matrix.normalize_columns()?;
    let solver = reconstructor(method)?;
    if method == "ls" && k > a.rows() / 2 {
        return Err(Error::InvalidArgument(format!(
            "ls trials need K <= floor(M/2) = {}",
            a.rows() / 2
        )));
    }
    let report = bound_report(&a, input.descriptor.clone())?;
    let summary = run_trials(&a, solver.as_ref(), k, trials, seed)?;
    let mut out = String::new();
    let _ = writeln!(out, "{:<23} {}", "matrix", input.descriptor);
    let _ = writeln!(out, "{:<23} {}", "method", summary.method);
    let _ = writeln!(out, "{:<23} {}", "sparsity", summary.sparsity);
    let _ = writeln!(out, "{:<23} {}", "trials", summary.trials);
    let _ = writeln!(out, "{:<23} {seed}", "seed");
    let _ = writeln!(out, "{:<23} {}", "success_rate", fmt17(summary.success_rate()));
    let _ = writeln!(out, "{:<23} {}", "mean_residual", fmt17(summary.mean_residual));
    let _ = writeln!(out, "{:<23} {}", "max_rel_error", fmt17(summary.max_relative_error));
    for kind in BoundKind::ALL {
        let b = report.get(kind).expect("all kinds evaluated");
        let _ = writeln!(out, "{:<23} {}", format!("k_max.{}", kind.as_str()), b.k_max);
    }
    Ok(out)
}

/// Registered strategy names, one group per line.
pub fn cmd_list() -> String {
    format!(
        "bounds: {}\nfamilies: {}\nmethods: ls, omp\n",
        BoundRegistry::default().names().join(", "),
        FamilyRegistry::default().names().join(", ")
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_list_parsing() {
        assert_eq!(parse_row_list("1,2, 3").unwrap(), vec![1, 2, 3]);
        assert!(parse_row_list("1,x").is_err());
    }

    #[test]
    fn m_defaults() {
        let o = GenOptions {
            family: "simplex_etf".into(),
            n: 5,
            ..Default::default()
        };
        assert_eq!(o.to_spec().unwrap().m, 4);
        let o = GenOptions {
            family: "partial_dft".into(),
            n: 8,
            rows: Some(vec![0, 1, 2]),
            m: Some(4),
            ..Default::default()
        };
        assert!(matches!(o.to_spec(), Err(Error::BadSelection(_))));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::BudgetExceeded { required: 2, budget: 1 }), EXIT_BUDGET);
        assert_eq!(exit_code(&Error::ZeroColumn(0)), EXIT_FAIL);
    }
}
