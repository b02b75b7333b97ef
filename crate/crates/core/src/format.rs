//! Text formats: the `CSMAT v1` matrix file and bound reports.
//!
//! Matrix file:
//!
//! ```text
//! CSMAT v1 <real|complex> <M> <N>
//! <N whitespace-separated entries>     (M lines)
//! ```
//!
//! Entries are written in scientific notation with 17 significant digits,
//! which round-trips every `f64` exactly. Complex entries are `a+bi` or
//! `a-bi` with no internal spaces.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::bounds::{BoundKind, BoundReport, SparsityBound};
use crate::error::{Error, Result};
use crate::gram::GramProfile;
use crate::matgen::GeneratorSpec;
use crate::matrix::{Field, MeasurementMatrix, C64};

pub const MAGIC: &str = "CSMAT";
pub const VERSION: &str = "v1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits in scientific notation; `inf`, `-inf`, `nan`
/// for non-finite values.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_entry(z: C64, field: Field) -> String {
    match field {
        Field::Real => fmt17(z.re),
        Field::Complex => {
            let sign = if z.im.is_sign_negative() { '-' } else { '+' };
            format!("{}{}{}i", fmt17(z.re), sign, fmt17(z.im.abs()))
        }
    }
}

pub fn format_matrix(a: &MeasurementMatrix) -> String {
    let field = a.field();
    let mut out = format!("{MAGIC} {VERSION} {} {} {}\n", field.as_str(), a.rows(), a.cols());
    for r in 0..a.rows() {
        let line: Vec<String> = (0..a.cols()).map(|c| fmt_entry(a.data()[(r, c)], field)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

fn parse_real(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad number '{tok}'"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite entry '{tok}'"),
        });
    }
    Ok(v)
}

fn parse_complex(tok: &str, line: usize) -> Result<C64> {
    let bad = || Error::Parse {
        line,
        msg: format!("bad complex entry '{tok}'"),
    };
    let body = tok.strip_suffix('i').ok_or_else(bad)?;
    let bytes = body.as_bytes();
    // The split is the last sign that is neither leading nor part of an exponent.
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re = parse_real(&body[..split], line)?;
    let im_mag = parse_real(&body[split + 1..], line)?;
    if im_mag.is_sign_negative() {
        return Err(bad());
    }
    let im = if bytes[split] == b'-' { -im_mag } else { im_mag };
    Ok(C64::new(re, im))
}

pub fn parse_matrix(text: &str) -> Result<MeasurementMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty input".into(),
    })?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let header_err = |msg: &str| Error::Parse {
        line: 1,
        msg: msg.to_string(),
    };
    if parts.len() != 5 || parts[0] != MAGIC || parts[1] != VERSION {
        return Err(header_err("expected 'CSMAT v1 <real|complex> <M> <N>'"));
    }
    let field = match parts[2] {
        "real" => Field::Real,
        "complex" => Field::Complex,
        _ => return Err(header_err("field must be 'real' or 'complex'")),
    };
    let rows: usize = parts[3].parse().map_err(|_| header_err("bad row count"))?;
    let cols: usize = parts[4].parse().map_err(|_| header_err("bad column count"))?;
    if rows == 0 || cols == 0 {
        return Err(header_err("dimensions must be positive"));
    }

    let mut entries = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (idx, l) in lines {
        let line = idx + 1;
        seen += 1;
        if seen > rows {
            return Err(Error::Parse {
                line,
                msg: format!("more than {rows} data rows"),
            });
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != cols {
            return Err(Error::Parse {
                line,
                msg: format!("expected {cols} entries, found {}", toks.len()),
            });
        }
        for t in toks {
            entries.push(match field {
                Field::Real => C64::new(parse_real(t, line)?, 0.0),
                Field::Complex => parse_complex(t, line)?,
            });
        }
    }
    if seen != rows {
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: format!("expected {rows} data rows, found {seen}"),
        });
    }
    MeasurementMatrix::from_row_major(rows, cols, &entries, field)
}

/// JSON number with 17 significant digits, or a string for non-finite
/// values.
struct Num(f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(fmt17(self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_str(&fmt17(self.0))
        }
    }
}

#[derive(Serialize)]
struct StatOut {
    name: &'static str,
    value: Num,
}

#[derive(Serialize)]
struct BoundOut {
    kind: &'static str,
    real_limit: Num,
    k_max: usize,
    k_evaluated: usize,
    statistics: Vec<StatOut>,
}

#[derive(Serialize)]
struct MatrixOut<'a> {
    descriptor: &'a str,
    rows: usize,
    cols: usize,
}

#[derive(Serialize)]
struct OrderingOut {
    classical_le_whole_matrix_avg: bool,
    whole_matrix_avg_le_gershgorin: bool,
    classical_le_gershgorin: bool,
    ordering_ok: bool,
    two_row_vs_gershgorin: &'static str,
    all_bounds_equal: bool,
}

#[derive(Serialize)]
struct ReportOut<'a> {
    tool: &'static str,
    version: &'static str,
    matrix: MatrixOut<'a>,
    generator: Option<&'a GeneratorSpec>,
    mu: Num,
    bounds: Vec<BoundOut>,
    ordering: OrderingOut,
    convention_notes: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<Vec<Vec<Num>>>,
}

fn ordering_word(o: Ordering) -> &'static str {
    match o {
        Ordering::Less => "less",
        Ordering::Equal => "equal",
        Ordering::Greater => "greater",
    }
}

fn bound_out(b: &SparsityBound) -> BoundOut {
    BoundOut {
        kind: b.kind.as_str(),
        real_limit: Num(b.real_limit),
        k_max: b.k_max,
        k_evaluated: b.k_evaluated,
        statistics: b
            .statistics
            .iter()
            .map(|s| StatOut {
                name: s.name,
                value: Num(s.value),
            })
            .collect(),
    }
}

/// Machine-readable report (pretty-printed JSON, stable key order).
pub fn report_json(
    report: &BoundReport,
    generator: Option<&GeneratorSpec>,
    profile: Option<&GramProfile>,
) -> String {
    let k = |kind| report.get(kind).map(|b| b.k_max).unwrap_or(0);
    let (c, a, g) = (
        k(BoundKind::Classical),
        k(BoundKind::WholeMatrixAvg),
        k(BoundKind::Gershgorin),
    );
    let out = ReportOut {
        tool: "sparsecert",
        version: TOOL_VERSION,
        matrix: MatrixOut {
            descriptor: &report.matrix_descriptor,
            rows: report.rows,
            cols: report.cols,
        },
        generator,
        mu: Num(report.mu),
        bounds: report.bounds.iter().map(bound_out).collect(),
        ordering: OrderingOut {
            classical_le_whole_matrix_avg: c <= a,
            whole_matrix_avg_le_gershgorin: a <= g,
            classical_le_gershgorin: c <= g,
            ordering_ok: report.ordering_ok,
            two_row_vs_gershgorin: ordering_word(report.two_row_vs_gershgorin),
            all_bounds_equal: report.all_equal(),
        },
        convention_notes: &report.convention_notes,
        profile: profile.map(|p| {
            p.profiles()
                .iter()
                .map(|row| row.iter().map(|&v| Num(v)).collect())
                .collect()
        }),
    };
    let mut s = serde_json::to_string_pretty(&out).expect("report serializes");
    s.push('\n');
    s
}

/// `(kind, k_max)` pairs read back from a JSON report.
pub fn parse_report_k_max(text: &str) -> Result<Vec<(BoundKind, usize)>> {
    let bad = |msg: String| Error::Parse { line: 0, msg };
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let bounds = v
        .get("bounds")
        .and_then(|b| b.as_array())
        .ok_or_else(|| bad("report has no 'bounds' array".into()))?;
    bounds
        .iter()
        .map(|b| {
            let kind = b
                .get("kind")
                .and_then(|k| k.as_str())
                .ok_or_else(|| bad("bound without 'kind'".into()))?;
            let k_max = b
                .get("k_max")
                .and_then(|k| k.as_u64())
                .ok_or_else(|| bad("bound without 'k_max'".into()))?;
            Ok((BoundKind::parse(kind)?, k_max as usize))
        })
        .collect()
}

fn fmt_limit(x: f64) -> String {
    if x.is_finite() { format!("{x:.4}") } else { fmt17(x) }
}

/// Human-readable comparison table.
pub fn report_text(report: &BoundReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "matrix      {}", report.matrix_descriptor);
    let _ = writeln!(s, "shape       {} x {}", report.rows, report.cols);
    let _ = writeln!(s, "mu          {}", fmt17(report.mu));
    let _ = writeln!(s);
    let _ = writeln!(s, "{:<18} {:>12} {:>6}  statistics", "bound", "K <", "k_max");
    for b in &report.bounds {
        let stats: Vec<String> = b
            .statistics
            .iter()
            .map(|st| {
                if st.name == "excluded_row" {
                    format!("{}={}", st.name, st.value as usize)
                } else {
                    format!("{}={}", st.name, fmt_limit(st.value))
                }
            })
            .collect();
        let _ = writeln!(
            s,
            "{:<18} {:>12} {:>6}  {}",
            b.kind.as_str(),
            fmt_limit(b.real_limit),
            b.k_max,
            stats.join(" ")
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "ordering classical <= whole_matrix_avg <= gershgorin: {}",
        if report.ordering_ok { "ok" } else { "VIOLATED" }
    );
    let _ = writeln!(
        s,
        "two_row vs gershgorin: {}",
        ordering_word(report.two_row_vs_gershgorin)
    );
    if report.all_equal() {
        let _ = writeln!(s, "note: all bounds equal");
    }
    for n in &report.convention_notes {
        let _ = writeln!(s, "convention: {n}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fmt17_examples() {
        assert_eq!(fmt17(1.0), "1.0000000000000000e0");
        assert_eq!(fmt17(-0.25), "-2.5000000000000000e-1");
        assert_eq!(fmt17(f64::INFINITY), "inf");
    }

    #[test]
    fn complex_entry_parsing() {
        assert_eq!(parse_complex("1e-3-2.5e+2i", 1).unwrap(), C64::new(1e-3, -250.0));
        assert_eq!(parse_complex("-1+0i", 1).unwrap(), C64::new(-1.0, 0.0));
        let z = parse_complex("0e0-0e0i", 1).unwrap();
        assert!(z.im.is_sign_negative());
        assert!(parse_complex("1+2", 1).is_err());
        assert!(parse_complex("1+-2i", 1).is_err());
        assert!(parse_complex("3i", 1).is_err());
    }

    #[test]
    fn header_and_body_errors() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("CSMAT v2 real 1 1\n1\n").is_err());
        assert!(parse_matrix("CSMAT v1 real 2 2\n1 2\n").is_err());
        assert!(parse_matrix("CSMAT v1 real 1 2\n1\n").is_err());
        assert!(parse_matrix("CSMAT v1 real 1 1\n1\n2\n").is_err());
        assert!(parse_matrix("CSMAT v1 real 1 1\nnan\n").is_err());
        assert!(parse_matrix("CSMAT v1 quaternion 1 1\n1\n").is_err());
        let a = parse_matrix("CSMAT v1 real 1 2\n3 4\n\n").unwrap();
        assert_eq!(a.cols(), 2);
    }

    #[test]
    fn report_reads_back() {
        let r = crate::bounds::bound_report(&MeasurementMatrix::identity(4), "id").unwrap();
        let json = report_json(&r, None, None);
        let ks = parse_report_k_max(&json).unwrap();
        assert_eq!(ks.len(), 4);
        assert!(ks.iter().all(|&(_, k)| k == 2));
        assert!(json.contains("\"real_limit\": \"inf\""));
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![
            any::<f64>().prop_filter("finite", |x| x.is_finite()),
            Just(0.0),
            Just(-0.0),
            Just(f64::MIN_POSITIVE),
        ]
    }

    proptest! {
        #[test]
        fn matrix_file_round_trips_bit_exactly(
            rows in 1usize..4,
            cols in 1usize..4,
            complex in any::<bool>(),
            vals in prop::collection::vec((finite(), finite()), 16),
        ) {
            let field = if complex { Field::Complex } else { Field::Real };
            let entries: Vec<C64> = vals[..rows * cols]
                .iter()
                .map(|&(re, im)| C64::new(re, if complex { im } else { 0.0 }))
                .collect();
            let a = MeasurementMatrix::from_row_major(rows, cols, &entries, field).unwrap();
            let text = format_matrix(&a);
            let b = parse_matrix(&text).unwrap();
            for (x, y) in a.data().iter().zip(b.data().iter()) {
                prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
            prop_assert_eq!(format_matrix(&b), text);
        }
    }
}
