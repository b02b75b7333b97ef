//! Sparsity levels `K` for which every `K`-sparse solution is unique.
//!
//! Each rule is a [`UniquenessBound`] strategy producing a per-`K` right-hand
//! side; `K` is certified while `K < rhs(K)`. The rules are evaluated by
//! checking `K = 1, 2, ...` in order and stopping at the first failure, or
//! when `2K` would exceed the number of rows or columns (a `2K`-column
//! submatrix can only have rank `2K` when `2K <= M` and `2K <= N`).
//!
//! | name               | right-hand side                          |
//! |--------------------|------------------------------------------|
//! | `classical`        | `(1 + 1/mu) / 2`                         |
//! | `whole_matrix_avg` | `(1 + 1/alpha(2K-1)) / 2`                |
//! | `two_row`          | `(1 + beta(K-1)) / (beta(K-1) + gamma(K))` |
//! | `gershgorin`       | `(1 + 1/beta(2K-1)) / 2`                 |
//!
//! The Gershgorin rule certifies that every `2K x 2K` Gram submatrix is
//! strictly diagonally dominant, hence invertible.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::gram::{gram_matrix, GramProfile};
use crate::matrix::MeasurementMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundKind {
    Classical,
    Gershgorin,
    WholeMatrixAvg,
    TwoRow,
}

impl BoundKind {
    pub const ALL: [BoundKind; 4] = [
        BoundKind::Classical,
        BoundKind::Gershgorin,
        BoundKind::WholeMatrixAvg,
        BoundKind::TwoRow,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Classical => "classical",
            BoundKind::Gershgorin => "gershgorin",
            BoundKind::WholeMatrixAvg => "whole_matrix_avg",
            BoundKind::TwoRow => "two_row",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == name)
            .ok_or_else(|| Error::Unknown {
                what: "bound",
                name: name.to_string(),
            })
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A named statistic that entered a bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Statistic {
    pub name: &'static str,
    pub value: f64,
}

impl Statistic {
    fn new(name: &'static str, value: f64) -> Self {
        Self { name, value }
    }
}

/// Right-hand side of a rule at one `K`, with the statistics it used.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleValue {
    pub rhs: f64,
    pub statistics: Vec<Statistic>,
}

/// Outcome of one per-`K` inequality test.
#[derive(Debug, Clone, PartialEq)]
pub struct KCheck {
    pub k: usize,
    pub value: RuleValue,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsityBound {
    pub kind: BoundKind,
    /// The right-hand side evaluated at `k_evaluated`; may be `+inf`.
    pub real_limit: f64,
    pub k_max: usize,
    /// The `K` at which `real_limit` and `statistics` were taken: `k_max`,
    /// `k_max + 1` when the rank cap ended the iteration, or 1 when nothing
    /// passed. Zero when no `K` could be evaluated.
    pub k_evaluated: usize,
    pub statistics: Vec<Statistic>,
}

/// Largest `K` for which a `2K`-column submatrix can be full rank.
pub fn rank_cap(n: usize, m: usize) -> usize {
    (m / 2).min(n / 2)
}

/// One sparsity-uniqueness rule.
pub trait UniquenessBound: Send + Sync {
    fn kind(&self) -> BoundKind;

    fn name(&self) -> &'static str {
        self.kind().as_str()
    }

    /// Right-hand side of the per-`K` inequality `K < rhs`.
    fn rule(&self, profile: &GramProfile, k: usize) -> Result<RuleValue>;

    /// Every per-`K` test from 1 up to the rank cap, without early exit.
    fn trace(&self, profile: &GramProfile, m: usize) -> Result<Vec<KCheck>> {
        (1..=rank_cap(profile.n(), m))
            .map(|k| {
                let value = self.rule(profile, k)?;
                Ok(KCheck {
                    k,
                    passed: (k as f64) < value.rhs,
                    value,
                })
            })
            .collect()
    }

    /// Checks `K = 1, 2, ...` and reports the last consecutive passing `K`.
    fn evaluate(&self, profile: &GramProfile, m: usize) -> Result<SparsityBound> {
        let cap = rank_cap(profile.n(), m);
        let mut last: Option<(usize, RuleValue)> = None;
        let mut first_fail: Option<RuleValue> = None;
        for k in 1..=cap {
            let value = self.rule(profile, k)?;
            if (k as f64) < value.rhs {
                last = Some((k, value));
            } else {
                first_fail = Some(value);
                break;
            }
        }
        let (k_max, k_evaluated, value) = match (last, first_fail) {
            // Stopped by the rank cap rather than a failing test: report the
            // next K's right-hand side when its statistics exist.
            (Some((k, v)), None) => match self.rule(profile, k + 1) {
                Ok(next) => (k, k + 1, Some(next)),
                Err(_) => (k, k, Some(v)),
            },
            (Some((k, v)), Some(_)) => (k, k, Some(v)),
            (None, Some(v)) => (0, 1, Some(v)),
            // Nothing testable under the caps; report K = 1 if it is defined.
            (None, None) => match self.rule(profile, 1) {
                Ok(v) => (0, 1, Some(v)),
                Err(_) => (0, 0, None),
            },
        };
        let (real_limit, statistics) = match value {
            Some(v) => (v.rhs, v.statistics),
            None => (f64::INFINITY, Vec::new()),
        };
        Ok(SparsityBound {
            kind: self.kind(),
            real_limit,
            k_max,
            k_evaluated,
            statistics,
        })
    }
}

fn half_one_plus_inverse(stat: f64) -> f64 {
    if stat == 0.0 {
        f64::INFINITY
    } else {
        0.5 * (1.0 + 1.0 / stat)
    }
}

/// Coherence-only limit `K < (1 + 1/mu) / 2`.
pub fn classical_bound(mu: f64, n: usize, m: usize) -> Result<SparsityBound> {
    if !(0.0..=1.0 + 1e-10).contains(&mu) {
        return Err(Error::InvalidMu(mu));
    }
    let real_limit = half_one_plus_inverse(mu);
    let cap = rank_cap(n, m);
    let k_max = if real_limit.is_infinite() {
        cap
    } else {
        // Largest integer strictly below the limit.
        let below = (real_limit.ceil() - 1.0).max(0.0) as usize;
        below.min(cap)
    };
    Ok(SparsityBound {
        kind: BoundKind::Classical,
        real_limit,
        k_max,
        k_evaluated: k_max.max(1),
        statistics: vec![Statistic::new("mu", mu)],
    })
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Classical;

impl UniquenessBound for Classical {
    fn kind(&self) -> BoundKind {
        BoundKind::Classical
    }

    fn rule(&self, profile: &GramProfile, _k: usize) -> Result<RuleValue> {
        let mu = profile.mu();
        Ok(RuleValue {
            rhs: half_one_plus_inverse(mu),
            statistics: vec![Statistic::new("mu", mu)],
        })
    }

    fn evaluate(&self, profile: &GramProfile, m: usize) -> Result<SparsityBound> {
        classical_bound(profile.mu(), profile.n(), m)
    }
}

/// Disc-based limit using the worst single row's `2K-1` largest values.
#[derive(Debug, Default, Clone, Copy)]
pub struct Gershgorin;

impl UniquenessBound for Gershgorin {
    fn kind(&self) -> BoundKind {
        BoundKind::Gershgorin
    }

    fn rule(&self, profile: &GramProfile, k: usize) -> Result<RuleValue> {
        let beta = profile.beta(2 * k - 1)?;
        Ok(RuleValue {
            rhs: half_one_plus_inverse(beta),
            statistics: vec![Statistic::new("beta(2K-1)", beta)],
        })
    }
}

/// Limit using the mean of the `2K-1` largest values anywhere in the matrix.
#[derive(Debug, Default, Clone, Copy)]
pub struct WholeMatrixAvg;

impl UniquenessBound for WholeMatrixAvg {
    fn kind(&self) -> BoundKind {
        BoundKind::WholeMatrixAvg
    }

    fn rule(&self, profile: &GramProfile, k: usize) -> Result<RuleValue> {
        let alpha = profile.alpha(2 * k - 1)?;
        Ok(RuleValue {
            rhs: half_one_plus_inverse(alpha),
            statistics: vec![Statistic::new("alpha(2K-1)", alpha)],
        })
    }
}

/// Limit combining the best row's `K-1` values with a second row's `K`
/// values.
#[derive(Debug, Default, Clone, Copy)]
pub struct TwoRow;

impl UniquenessBound for TwoRow {
    fn kind(&self) -> BoundKind {
        BoundKind::TwoRow
    }

    fn rule(&self, profile: &GramProfile, k: usize) -> Result<RuleValue> {
        let (beta, row) = profile.beta_argmax(k - 1)?;
        let gamma = profile.gamma(k, row)?;
        let denom = beta + gamma;
        let rhs = if denom == 0.0 {
            f64::INFINITY
        } else {
            (1.0 + beta) / denom
        };
        let mut statistics = vec![Statistic::new("beta(K-1)", beta), Statistic::new("gamma(K)", gamma)];
        if let Some(r) = row {
            statistics.push(Statistic::new("excluded_row", r as f64));
        }
        Ok(RuleValue { rhs, statistics })
    }
}

pub fn gershgorin_bound(profile: &GramProfile, m: usize) -> Result<SparsityBound> {
    Gershgorin.evaluate(profile, m)
}

pub fn alpha_bound(profile: &GramProfile, m: usize) -> Result<SparsityBound> {
    WholeMatrixAvg.evaluate(profile, m)
}

pub fn two_row_bound(profile: &GramProfile, m: usize) -> Result<SparsityBound> {
    TwoRow.evaluate(profile, m)
}

/// Rules addressable by name.
pub struct BoundRegistry {
    rules: Vec<Box<dyn UniquenessBound>>,
}

impl Default for BoundRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Classical));
        r.register(Box::new(Gershgorin));
        r.register(Box::new(WholeMatrixAvg));
        r.register(Box::new(TwoRow));
        r
    }
}

impl BoundRegistry {
    pub fn empty() -> Self {
        Self { rules: Vec::new() }
    }

    /// Adds a rule, replacing any existing rule of the same name.
    pub fn register(&mut self, rule: Box<dyn UniquenessBound>) {
        self.rules.retain(|r| r.name() != rule.name());
        self.rules.push(rule);
    }

    pub fn get(&self, name: &str) -> Result<&dyn UniquenessBound> {
        self.rules
            .iter()
            .find(|r| r.name() == name)
            .map(|r| r.as_ref())
            .ok_or_else(|| Error::Unknown {
                what: "bound",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.rules.iter().map(|r| r.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn UniquenessBound> {
        self.rules.iter().map(|r| r.as_ref())
    }
}

pub const CONVENTION_NOTES: [&str; 4] = [
    "profiles exclude the Gram diagonal (A^H A - I)",
    "alpha(p): mean of the p largest off-diagonal |G| over the whole matrix, both G[i][j] and G[j][i] counted (convention: this-artifact)",
    "gamma(p): largest row mean of the top p profile values over rows other than the lowest-index row attaining beta(K-1); no exclusion at K = 1 (convention: this-artifact)",
    "every k_max is capped by floor(M/2) and floor(N/2); when a cap ends the iteration, real_limit is the right-hand side at k_max + 1 if its statistics exist",
];

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub matrix_descriptor: String,
    pub rows: usize,
    pub cols: usize,
    pub mu: f64,
    pub bounds: Vec<SparsityBound>,
    pub ordering_ok: bool,
    /// How the two-row limit compares with the Gershgorin limit; the two
    /// are not ordered in general.
    pub two_row_vs_gershgorin: Ordering,
    pub convention_notes: Vec<String>,
}

impl BoundReport {
    pub fn get(&self, kind: BoundKind) -> Option<&SparsityBound> {
        self.bounds.iter().find(|b| b.kind == kind)
    }

    /// All four rules give the same `k_max` and real limits within `1e-9`.
    pub fn all_equal(&self) -> bool {
        let Some(first) = self.bounds.first() else {
            return true;
        };
        self.bounds.iter().all(|b| {
            b.k_max == first.k_max
                && (b.real_limit == first.real_limit || (b.real_limit - first.real_limit).abs() <= 1e-9)
        })
    }
}

/// `classical <= whole_matrix_avg <= gershgorin` on `k_max`.
pub fn ordering_holds(bounds: &[SparsityBound]) -> bool {
    let k = |kind| bounds.iter().find(|b| b.kind == kind).map(|b| b.k_max);
    match (
        k(BoundKind::Classical),
        k(BoundKind::WholeMatrixAvg),
        k(BoundKind::Gershgorin),
    ) {
        (Some(c), Some(a), Some(g)) => c <= a && a <= g && c <= g,
        _ => false,
    }
}

pub fn report_from_profile(
    profile: &GramProfile,
    rows: usize,
    descriptor: impl Into<String>,
) -> Result<BoundReport> {
    let registry = BoundRegistry::default();
    let bounds = BoundKind::ALL
        .iter()
        .map(|k| registry.get(k.as_str())?.evaluate(profile, rows))
        .collect::<Result<Vec<_>>>()?;
    let ordering_ok = ordering_holds(&bounds);
    let mut report = BoundReport {
        matrix_descriptor: descriptor.into(),
        rows,
        cols: profile.n(),
        mu: profile.mu(),
        bounds,
        ordering_ok,
        two_row_vs_gershgorin: Ordering::Equal,
        convention_notes: CONVENTION_NOTES.iter().map(|s| s.to_string()).collect(),
    };
    let tr = report.get(BoundKind::TwoRow).unwrap();
    let gb = report.get(BoundKind::Gershgorin).unwrap();
    report.two_row_vs_gershgorin = tr
        .k_max
        .cmp(&gb.k_max)
        .then(tr.real_limit.total_cmp(&gb.real_limit));
    Ok(report)
}

/// Normalizes `a`, builds its Gram profile and evaluates all four rules.
pub fn bound_report(a: &MeasurementMatrix, descriptor: impl Into<String>) -> Result<BoundReport> {
    let normalized = a.normalize_columns()?;
    let profile = gram_matrix(&normalized)?;
    report_from_profile(&profile, a.rows(), descriptor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgen::simplex_etf;

    #[test]
    fn classical_strict_inequality() {
        let b = classical_bound(0.2, 100, 100).unwrap();
        assert!((b.real_limit - 3.0).abs() < 1e-15);
        assert_eq!(b.k_max, 2);
    }

    #[test]
    fn classical_paper_dft_instance() {
        // mu chosen so that (1 + 1/mu) / 2 = 16.63.
        let mu = 1.0 / (2.0 * 16.63 - 1.0);
        let b = classical_bound(mu, 128, 124).unwrap();
        assert!((b.real_limit - 16.63).abs() < 1e-12);
        assert_eq!(b.k_max, 16);
    }

    #[test]
    fn classical_zero_mu_uses_caps() {
        let b = classical_bound(0.0, 10, 10).unwrap();
        assert!(b.real_limit.is_infinite());
        assert_eq!(b.k_max, 5);
        assert_eq!(classical_bound(0.0, 7, 10).unwrap().k_max, 3);
    }

    #[test]
    fn classical_rejects_bad_mu() {
        assert!(matches!(classical_bound(-0.1, 4, 4), Err(Error::InvalidMu(_))));
        assert!(matches!(classical_bound(1.1, 4, 4), Err(Error::InvalidMu(_))));
        assert_eq!(classical_bound(1.0, 4, 4).unwrap().k_max, 0);
    }

    #[test]
    fn identity_report_hits_caps() {
        let r = bound_report(&MeasurementMatrix::identity(8), "identity").unwrap();
        for b in &r.bounds {
            assert_eq!(b.k_max, 4, "{}", b.kind);
            assert!(b.real_limit.is_infinite());
        }
        assert!(r.ordering_ok);
    }

    #[test]
    fn etf_rules_coincide() {
        let r = bound_report(&simplex_etf(5).unwrap(), "etf").unwrap();
        assert!((r.mu - 0.25).abs() < 1e-12);
        for b in &r.bounds {
            assert_eq!(b.k_max, 2, "{}", b.kind);
            assert!((b.real_limit - 2.5).abs() < 1e-9, "{} {}", b.kind, b.real_limit);
        }
        assert!(r.all_equal());
    }

    #[test]
    fn registry_lookup_and_replace() {
        let mut reg = BoundRegistry::default();
        assert_eq!(reg.names(), vec!["classical", "gershgorin", "whole_matrix_avg", "two_row"]);
        assert!(reg.get("nope").is_err());
        reg.register(Box::new(Gershgorin));
        assert_eq!(reg.names().len(), 4);
        assert_eq!(BoundKind::parse("two_row").unwrap(), BoundKind::TwoRow);
    }

    #[test]
    fn antipodal_pair_certifies_nothing() {
        // mu = 1 and M = 1: nothing passes and the cap is zero.
        let r = bound_report(&simplex_etf(2).unwrap(), "etf2").unwrap();
        for b in &r.bounds {
            assert_eq!(b.k_max, 0, "{}", b.kind);
        }
    }
}
