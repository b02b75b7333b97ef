//! Brute-force ground truth for the uniqueness certificates.
//!
//! Every `K`-sparse solution of `y = A x` is unique iff every set of `2K`
//! columns of `A` is linearly independent, i.e. iff `spark(A) > 2K`. The
//! functions here check that directly by enumerating column subsets, which
//! is only feasible for small instances; an explicit budget guards the
//! enumeration.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::bounds::{BoundKind, BoundReport};
use crate::error::{Error, Result};
use crate::matgen::rng_from_seed;
use crate::matrix::{MeasurementMatrix, C64};

pub const DEFAULT_BUDGET: u128 = 2_000_000;
/// Relative rank threshold: `sigma_min > RELATIVE_TOL * sigma_max(A)`.
pub const RELATIVE_TOL: f64 = 1e-10;
/// Largest `N` accepted by [`spark`].
pub const SPARK_MAX_COLS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Absolute singular-value threshold; `None` means
    /// `RELATIVE_TOL * sigma_max(A)`.
    pub tol: Option<f64>,
    pub budget: u128,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            tol: None,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl OracleConfig {
    pub fn resolve_tol(&self, a: &MeasurementMatrix) -> f64 {
        self.tol.unwrap_or_else(|| RELATIVE_TOL * sigma_max(a.data()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleVerdict {
    pub k_tested: usize,
    pub all_invertible: bool,
    pub worst_sigma_min: f64,
    /// Lexicographically smallest subset attaining `worst_sigma_min`.
    pub witness: Vec<usize>,
    pub combos_checked: u128,
    /// `false` for sampled runs, which certify nothing.
    pub exhaustive: bool,
}

impl OracleVerdict {
    pub fn is_probabilistic(&self) -> bool {
        !self.exhaustive
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
pub fn unrank_combination(mut rank: u128, n: usize, k: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        let remaining = k - slot - 1;
        loop {
            let block = binomial(n - next - 1, remaining);
            if rank < block {
                break;
            }
            rank -= block;
            next += 1;
        }
        out.push(next);
        next += 1;
    }
    out
}

pub fn sigma_max(m: &DMatrix<C64>) -> f64 {
    m.singular_values().max()
}

/// Smallest singular value, zero when there are more columns than rows.
pub fn sigma_min(m: &DMatrix<C64>) -> f64 {
    if m.ncols() > m.nrows() {
        return 0.0;
    }
    m.singular_values().min()
}

fn check_budget(required: u128, budget: u128) -> Result<()> {
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(())
}

struct Scan {
    worst: (f64, u128),
    discs_all_exclude: bool,
    unsound: usize,
    count: u128,
}

/// Walks every `size`-subset. With `discs`, also checks Gershgorin disc
/// exclusion on each subset's Gram matrix and counts subsets where the discs
/// exclude the origin yet `sigma_min <= 1e-12`.
fn scan(a: &MeasurementMatrix, size: usize, discs: bool) -> Scan {
    let n = a.cols();
    let total = u64::try_from(binomial(n, size)).expect("enumeration within budget");
    (0..total)
        .into_par_iter()
        .map(|r| {
            let r = r as u128;
            let cols = unrank_combination(r, n, size);
            let sub = a.select_columns(&cols);
            let s = sigma_min(&sub);
            let (ok, unsound) = if discs {
                let ok = discs_exclude_origin(&gershgorin_discs(&(sub.adjoint() * &sub)));
                (ok, usize::from(ok && s <= 1e-12))
            } else {
                (true, 0)
            };
            Scan {
                worst: (s, r),
                discs_all_exclude: ok,
                unsound,
                count: 1,
            }
        })
        .reduce(
            || Scan {
                worst: (f64::INFINITY, u128::MAX),
                discs_all_exclude: true,
                unsound: 0,
                count: 0,
            },
            |x, y| Scan {
                worst: if y.worst.0.total_cmp(&x.worst.0).then(y.worst.1.cmp(&x.worst.1)).is_lt() {
                    y.worst
                } else {
                    x.worst
                },
                discs_all_exclude: x.discs_all_exclude && y.discs_all_exclude,
                unsound: x.unsound + y.unsound,
                count: x.count + y.count,
            },
        )
}

fn verdict_from_scan(a: &MeasurementMatrix, k: usize, s: &Scan, tol: f64) -> OracleVerdict {
    OracleVerdict {
        k_tested: k,
        all_invertible: s.worst.0 > tol,
        worst_sigma_min: s.worst.0,
        witness: unrank_combination(s.worst.1, a.cols(), 2 * k),
        combos_checked: s.count,
        exhaustive: true,
    }
}

fn check_k(a: &MeasurementMatrix, k: usize, budget: u128) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    check_budget(binomial(a.cols(), 2 * k), budget)?;
    if 2 * k > a.rows() || 2 * k > a.cols() {
        return Err(Error::RankImpossible {
            two_k: 2 * k,
            rows: a.rows(),
        });
    }
    Ok(())
}

/// Enumerates every `2K`-column submatrix and records the smallest
/// singular value seen. `all_invertible` certifies uniqueness of every
/// `K`-sparse solution.
pub fn check_uniqueness_bruteforce(
    a: &MeasurementMatrix,
    k: usize,
    cfg: &OracleConfig,
) -> Result<OracleVerdict> {
    check_k(a, k, cfg.budget)?;
    let tol = cfg.resolve_tol(a);
    let s = scan(a, 2 * k, false);
    Ok(verdict_from_scan(a, k, &s, tol))
}

/// Random `2K`-subsets instead of all of them. The verdict is marked
/// non-exhaustive: a pass here is evidence, not a certificate.
pub fn check_uniqueness_sampled(
    a: &MeasurementMatrix,
    k: usize,
    samples: usize,
    seed: u64,
    tol: Option<f64>,
) -> Result<OracleVerdict> {
    check_k(a, k, u128::MAX)?;
    let tol = tol.unwrap_or_else(|| RELATIVE_TOL * sigma_max(a.data()));
    let mut rng = rng_from_seed(seed);
    let total = binomial(a.cols(), 2 * k);
    let mut worst = (f64::INFINITY, u128::MAX);
    for _ in 0..samples {
        let r = rng.random_range(0..total);
        let s = sigma_min(&a.select_columns(&unrank_combination(r, a.cols(), 2 * k)));
        if s < worst.0 || (s == worst.0 && r < worst.1) {
            worst = (s, r);
        }
    }
    Ok(OracleVerdict {
        k_tested: k,
        all_invertible: worst.0 > tol,
        worst_sigma_min: worst.0,
        witness: if samples == 0 { Vec::new() } else { unrank_combination(worst.1, a.cols(), 2 * k) },
        combos_checked: samples as u128,
        exhaustive: false,
    })
}

/// Smallest number of linearly dependent columns; `N + 1` when all
/// columns are independent.
pub fn spark(a: &MeasurementMatrix, tol: f64, budget: u128) -> Result<usize> {
    let n = a.cols();
    let top = a.rows().min(n);
    let required = (1..=top).fold(0u128, |acc, s| acc.saturating_add(binomial(n, s)));
    if n > SPARK_MAX_COLS {
        return Err(Error::BudgetExceeded {
            required,
            budget: binomial(SPARK_MAX_COLS, SPARK_MAX_COLS / 2),
        });
    }
    check_budget(required, budget)?;
    for size in 1..=top {
        let dependent = (0..binomial(n, size) as u64)
            .into_par_iter()
            .any(|r| sigma_min(&a.select_columns(&unrank_combination(r as u128, n, size))) <= tol);
        if dependent {
            return Ok(size);
        }
    }
    Ok(if n > a.rows() { a.rows() + 1 } else { n + 1 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: C64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscSet {
    pub discs: Vec<Disc>,
}

impl DiscSet {
    /// Whether `z` lies in the union of discs, with slack `tol`.
    pub fn contains(&self, z: C64, tol: f64) -> bool {
        self.discs.iter().any(|d| (z - d.center).norm() <= d.radius + tol)
    }
}

/// One disc per row: centered at the diagonal entry, radius the sum of the
/// row's off-diagonal magnitudes.
pub fn gershgorin_discs(h: &DMatrix<C64>) -> DiscSet {
    assert!(h.is_square(), "Gershgorin discs need a square matrix");
    let discs = (0..h.nrows())
        .map(|i| Disc {
            center: h[(i, i)],
            radius: (0..h.ncols()).filter(|&j| j != i).map(|j| h[(i, j)].norm()).sum(),
        })
        .collect();
    DiscSet { discs }
}

/// True iff no disc reaches the origin, which rules out a zero eigenvalue.
pub fn discs_exclude_origin(d: &DiscSet) -> bool {
    d.discs.iter().all(|disc| disc.center.norm() > disc.radius)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRow {
    pub kind: BoundKind,
    pub k: usize,
    pub verdict: OracleVerdict,
    /// Gershgorin rows only: every enumerated `2K` Gram submatrix has all
    /// discs clear of the origin.
    pub discs_exclude_origin: Option<bool>,
    /// Gershgorin rows only: no subset had discs clear of the origin while
    /// being numerically singular.
    pub certificate_sound: Option<bool>,
}

impl ValidationRow {
    pub fn passed(&self) -> bool {
        self.verdict.all_invertible
            && self.discs_exclude_origin.unwrap_or(true)
            && self.certificate_sound.unwrap_or(true)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationTable {
    pub rows: Vec<ValidationRow>,
}

impl ValidationTable {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(ValidationRow::passed)
    }
}

/// Runs the brute-force check for every bound kind and every
/// `K = 1..=k_max` it certifies. `a` should be the column-normalized
/// matrix the report was computed from.
pub fn cross_validate(
    a: &MeasurementMatrix,
    report: &BoundReport,
    cfg: &OracleConfig,
) -> Result<ValidationTable> {
    let ks: Vec<(BoundKind, usize)> = report.bounds.iter().map(|b| (b.kind, b.k_max)).collect();
    validate_k_max(a, &ks, cfg)
}

/// Same as [`cross_validate`] for explicit `(kind, k_max)` pairs.
pub fn validate_k_max(
    a: &MeasurementMatrix,
    ks: &[(BoundKind, usize)],
    cfg: &OracleConfig,
) -> Result<ValidationTable> {
    for &(_, k_max) in ks {
        for k in 1..=k_max {
            check_k(a, k, cfg.budget)?;
        }
    }
    let tol = cfg.resolve_tol(a);
    let mut plain: BTreeMap<usize, OracleVerdict> = BTreeMap::new();
    let mut with_discs: BTreeMap<usize, (OracleVerdict, bool, bool)> = BTreeMap::new();
    let mut rows = Vec::new();
    for &(kind, k_max) in ks {
        for k in 1..=k_max {
            let row = if kind == BoundKind::Gershgorin {
                let (verdict, discs_ok, sound) = with_discs
                    .entry(k)
                    .or_insert_with(|| {
                        let s = scan(a, 2 * k, true);
                        (verdict_from_scan(a, k, &s, tol), s.discs_all_exclude, s.unsound == 0)
                    })
                    .clone();
                ValidationRow {
                    kind,
                    k,
                    verdict,
                    discs_exclude_origin: Some(discs_ok),
                    certificate_sound: Some(sound),
                }
            } else {
                let verdict = match with_discs.get(&k) {
                    Some((v, _, _)) => v.clone(),
                    None => plain
                        .entry(k)
                        .or_insert_with(|| verdict_from_scan(a, k, &scan(a, 2 * k, false), tol))
                        .clone(),
                };
                ValidationRow {
                    kind,
                    k,
                    verdict,
                    discs_exclude_origin: None,
                    certificate_sound: None,
                }
            };
            rows.push(row);
        }
    }
    Ok(ValidationTable { rows })
}
