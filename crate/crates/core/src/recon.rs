//! Forward model `y = A x` and sparse reconstruction.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matgen::rng_from_seed;
use crate::matrix::{Field, MeasurementMatrix, C64};

/// Rank threshold for a support submatrix, relative to its largest
/// singular value.
pub const SUPPORT_RANK_TOL: f64 = 1e-10;
/// Correlations within this of the maximum count as ties in OMP.
pub const OMP_TIE_TOL: f64 = 1e-12;
/// Relative error below which a trial counts as a success.
pub const SUCCESS_REL_ERR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    len: usize,
    support: Vec<usize>,
    values: Vec<C64>,
}

impl SparseVector {
    /// Entries are sorted by index; duplicates and out-of-range indices are
    /// rejected.
    pub fn new(len: usize, entries: impl IntoIterator<Item = (usize, C64)>) -> Result<Self> {
        let mut pairs: Vec<(usize, C64)> = entries.into_iter().collect();
        pairs.sort_by_key(|p| p.0);
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument(format!("duplicate index {}", w[0].0)));
        }
        if let Some(p) = pairs.iter().find(|p| p.0 >= len) {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: p.0 + 1,
            });
        }
        let (support, values) = pairs.into_iter().unzip();
        Ok(Self { len, support, values })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            support: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Number of stored entries, `||x||_0` when none of them is zero.
    pub fn nnz(&self) -> usize {
        self.support.len()
    }

    pub fn to_dense(&self) -> DVector<C64> {
        let mut v = DVector::zeros(self.len);
        for (&i, &x) in self.support.iter().zip(&self.values) {
            v[i] = x;
        }
        v
    }
}

/// `y = A x`, touching only the columns in the support of `x`.
pub fn measure(a: &MeasurementMatrix, x: &SparseVector) -> Result<DVector<C64>> {
    if x.len() != a.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.cols(),
            got: x.len(),
        });
    }
    let mut y = DVector::zeros(a.rows());
    for (&k, &v) in x.support().iter().zip(x.values()) {
        y.axpy(v, &a.data().column(k), C64::new(1.0, 0.0));
    }
    Ok(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    LeastSquares,
    Omp,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::LeastSquares => "ls",
            Method::Omp => "omp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconResult {
    pub estimate: SparseVector,
    /// `||y - A * estimate||_2`, recomputed from the estimate.
    pub residual_norm: f64,
    pub method: Method,
    pub iterations: usize,
    /// Residual norm after each OMP step (a single entry for least squares).
    pub residual_history: Vec<f64>,
}

fn residual(a: &MeasurementMatrix, y: &DVector<C64>, x: &SparseVector) -> Result<DVector<C64>> {
    Ok(y - measure(a, x)?)
}

fn check_y(a: &MeasurementMatrix, y: &DVector<C64>) -> Result<()> {
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: y.len(),
        });
    }
    Ok(())
}

/// Minimizes `||y - A_K x_K||` over the given support via a QR
/// factorization of `A_K`.
fn solve_on_support(a: &MeasurementMatrix, y: &DVector<C64>, support: &[usize]) -> Result<SparseVector> {
    if support.is_empty() {
        return Ok(SparseVector::zeros(a.cols()));
    }
    if support.len() > a.rows() {
        return Err(Error::RankDeficientSupport(support.to_vec()));
    }
    let ak = a.select_columns(support);
    let sv = ak.singular_values();
    if !(sv.min() > SUPPORT_RANK_TOL * sv.max()) {
        return Err(Error::RankDeficientSupport(support.to_vec()));
    }
    let qr = ak.qr();
    let rhs = qr.q().adjoint() * y;
    let coeffs = qr
        .r()
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::RankDeficientSupport(support.to_vec()))?;
    SparseVector::new(a.cols(), support.iter().copied().zip(coeffs.iter().copied()))
}

pub fn least_squares_on_support(
    a: &MeasurementMatrix,
    y: &DVector<C64>,
    support: &[usize],
) -> Result<ReconResult> {
    check_y(a, y)?;
    if let Some(&k) = support.iter().find(|&&k| k >= a.cols()) {
        return Err(Error::DimensionMismatch {
            expected: a.cols(),
            got: k + 1,
        });
    }
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let estimate = solve_on_support(a, y, &sorted)?;
    let residual_norm = residual(a, y, &estimate)?.norm();
    Ok(ReconResult {
        estimate,
        residual_norm,
        method: Method::LeastSquares,
        iterations: 1,
        residual_history: vec![residual_norm],
    })
}

/// Orthogonal matching pursuit: greedily adds the column most correlated
/// with the residual and refits on the whole support. Correlations are raw
/// inner products, so `a` should have unit-norm columns.
pub fn omp(a: &MeasurementMatrix, y: &DVector<C64>, k: usize, residual_tol: f64) -> Result<ReconResult> {
    check_y(a, y)?;
    if k > a.rows() {
        return Err(Error::InvalidArgument(format!(
            "sparsity {k} exceeds the {} available measurements",
            a.rows()
        )));
    }
    let mut support: Vec<usize> = Vec::with_capacity(k);
    let mut estimate = SparseVector::zeros(a.cols());
    let mut r = y.clone();
    let mut history = Vec::with_capacity(k);
    let mut iterations = 0;
    while support.len() < k && r.norm() > residual_tol {
        let corr: Vec<f64> = (0..a.cols())
            .map(|j| {
                if support.contains(&j) {
                    f64::NEG_INFINITY
                } else {
                    a.data().column(j).dotc(&r).norm()
                }
            })
            .collect();
        let best = corr.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if best == f64::NEG_INFINITY {
            break;
        }
        let pick = corr
            .iter()
            .position(|&c| c >= best - OMP_TIE_TOL)
            .expect("maximum is attained");
        support.push(pick);
        let mut sorted = support.clone();
        sorted.sort_unstable();
        estimate = solve_on_support(a, y, &sorted)?;
        r = residual(a, y, &estimate)?;
        history.push(r.norm());
        iterations += 1;
    }
    let residual_norm = residual(a, y, &estimate)?.norm();
    Ok(ReconResult {
        estimate,
        residual_norm,
        method: Method::Omp,
        iterations,
        residual_history: history,
    })
}

/// What a reconstruction strategy may use besides `A` and `y`.
#[derive(Debug, Clone, Copy)]
pub struct ReconProblem<'a> {
    pub sparsity: usize,
    /// The true support, when an oracle provides it.
    pub oracle_support: Option<&'a [usize]>,
    pub residual_tol: f64,
}

pub trait Reconstructor: Send + Sync {
    fn name(&self) -> &'static str;
    fn reconstruct(&self, a: &MeasurementMatrix, y: &DVector<C64>, problem: &ReconProblem<'_>) -> Result<ReconResult>;
}

/// Least squares on the oracle-provided support.
#[derive(Debug, Default, Clone, Copy)]
pub struct OracleLeastSquares;

impl Reconstructor for OracleLeastSquares {
    fn name(&self) -> &'static str {
        "ls"
    }

    fn reconstruct(&self, a: &MeasurementMatrix, y: &DVector<C64>, problem: &ReconProblem<'_>) -> Result<ReconResult> {
        let support = problem
            .oracle_support
            .ok_or_else(|| Error::InvalidArgument("least squares needs the true support".into()))?;
        least_squares_on_support(a, y, support)
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct MatchingPursuit;

impl Reconstructor for MatchingPursuit {
    fn name(&self) -> &'static str {
        "omp"
    }

    fn reconstruct(&self, a: &MeasurementMatrix, y: &DVector<C64>, problem: &ReconProblem<'_>) -> Result<ReconResult> {
        omp(a, y, problem.sparsity, problem.residual_tol)
    }
}

pub fn reconstructor(name: &str) -> Result<Box<dyn Reconstructor>> {
    match name {
        "ls" => Ok(Box::new(OracleLeastSquares)),
        "omp" => Ok(Box::new(MatchingPursuit)),
        _ => Err(Error::Unknown {
            what: "reconstruction method",
            name: name.to_string(),
        }),
    }
}

/// A random `k`-sparse vector: uniform support, standard normal values
/// (complex normal when `field` is complex).
pub fn random_sparse<R: Rng>(rng: &mut R, n: usize, k: usize, field: Field) -> Result<SparseVector> {
    if k > n {
        return Err(Error::InvalidArgument(format!("sparsity {k} exceeds length {n}")));
    }
    let support = rand::seq::index::sample(rng, n, k).into_vec();
    let mut entries = Vec::with_capacity(k);
    for idx in support {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = match field {
            Field::Real => 0.0,
            Field::Complex => StandardNormal.sample(rng),
        };
        entries.push((idx, C64::new(re, im)));
    }
    SparseVector::new(n, entries)
}

pub fn relative_error(estimate: &SparseVector, truth: &SparseVector) -> f64 {
    let t = truth.to_dense();
    let diff = (estimate.to_dense() - &t).norm();
    let scale = t.norm();
    if scale == 0.0 { diff } else { diff / scale }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub method: &'static str,
    pub sparsity: usize,
    pub trials: usize,
    pub successes: usize,
    pub mean_residual: f64,
    pub max_relative_error: f64,
}

impl TrialSummary {
    pub fn success_rate(&self) -> f64 {
        if self.trials == 0 { 0.0 } else { self.successes as f64 / self.trials as f64 }
    }
}

/// Seeded measure-then-reconstruct trials. A trial whose reconstruction
/// errors out counts as a failure.
pub fn run_trials(
    a: &MeasurementMatrix,
    method: &dyn Reconstructor,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<TrialSummary> {
    let mut rng = rng_from_seed(seed);
    let mut successes = 0;
    let mut residual_sum = 0.0;
    let mut max_err: f64 = 0.0;
    for _ in 0..trials {
        let x = random_sparse(&mut rng, a.cols(), k, a.field())?;
        let y = measure(a, &x)?;
        let problem = ReconProblem {
            sparsity: k,
            oracle_support: Some(x.support()),
            residual_tol: 0.0,
        };
        match method.reconstruct(a, &y, &problem) {
            Ok(res) => {
                let err = relative_error(&res.estimate, &x);
                max_err = max_err.max(err);
                residual_sum += res.residual_norm;
                if err < SUCCESS_REL_ERR {
                    successes += 1;
                }
            }
            Err(Error::RankDeficientSupport(_)) => max_err = f64::INFINITY,
            Err(e) => return Err(e),
        }
    }
    Ok(TrialSummary {
        method: method.name(),
        sparsity: k,
        trials,
        successes,
        mean_residual: if trials == 0 { 0.0 } else { residual_sum / trials as f64 },
        max_relative_error: max_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgen::{gaussian, GeneratorSpec};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn measure_basics() {
        let a = MeasurementMatrix::identity(4);
        assert_eq!(measure(&a, &SparseVector::zeros(4)).unwrap(), DVector::zeros(4));
        let x = SparseVector::new(4, [(2, c(5.0))]).unwrap();
        let y = measure(&a, &x).unwrap();
        assert_eq!(y, DVector::from_vec(vec![c(0.0), c(0.0), c(5.0), c(0.0)]));
        assert!(matches!(measure(&a, &SparseVector::zeros(5)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn measure_matches_dense_product() {
        let a = gaussian(&GeneratorSpec::new("gaussian", 12, 6).seed(2)).unwrap();
        let x = SparseVector::new(12, [(0, c(1.5)), (7, C64::new(-0.5, 2.0)), (11, c(3.0))]).unwrap();
        let dense = a.data() * x.to_dense();
        assert!((measure(&a, &x).unwrap() - dense).norm() < 1e-12);
    }

    #[test]
    fn sparse_vector_validation() {
        assert!(SparseVector::new(3, [(1, c(1.0)), (1, c(2.0))]).is_err());
        assert!(SparseVector::new(3, [(3, c(1.0))]).is_err());
        let v = SparseVector::new(5, [(4, c(1.0)), (0, c(2.0))]).unwrap();
        assert_eq!(v.support(), &[0, 4]);
        assert_eq!(v.values(), &[c(2.0), c(1.0)]);
    }

    #[test]
    fn least_squares_recovers_and_handles_enlarged_support() {
        let a = gaussian(&GeneratorSpec::new("gaussian", 20, 10).seed(4)).unwrap();
        let x = SparseVector::new(20, [(3, c(1.0)), (9, c(-2.0)), (15, c(0.5))]).unwrap();
        let y = measure(&a, &x).unwrap();
        let r = least_squares_on_support(&a, &y, &[15, 3, 9]).unwrap();
        assert!(relative_error(&r.estimate, &x) < 1e-10);
        let r = least_squares_on_support(&a, &y, &[0, 3, 9, 12, 15]).unwrap();
        assert!(relative_error(&r.estimate, &x) < 1e-10);
        assert!(r.residual_norm < 1e-10);
    }

    #[test]
    fn least_squares_rejects_duplicate_columns() {
        let a = MeasurementMatrix::from_real_rows(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        let y = DVector::from_vec(vec![c(1.0), c(0.0)]);
        assert!(matches!(
            least_squares_on_support(&a, &y, &[0, 2]),
            Err(Error::RankDeficientSupport(_))
        ));
    }

    #[test]
    fn residual_orthogonal_to_support() {
        let a = gaussian(&GeneratorSpec::new("gaussian", 16, 8).seed(9)).unwrap();
        let y = DVector::from_fn(8, |i, _| C64::new((i as f64).sin(), 0.0));
        let support = [1, 4, 6];
        let res = least_squares_on_support(&a, &y, &support).unwrap();
        let r = y - measure(&a, &res.estimate).unwrap();
        for &k in &support {
            assert!(a.data().column(k).dotc(&r).norm() <= 1e-9);
        }
    }

    #[test]
    fn omp_single_atom() {
        let a = gaussian(&GeneratorSpec::new("gaussian", 10, 6).seed(1)).unwrap();
        let y = a.column(3);
        let r = omp(&a, &y, 1, 0.0).unwrap();
        assert_eq!(r.estimate.support(), &[3]);
        assert!(r.residual_norm < 1e-12);
    }

    #[test]
    fn omp_tie_goes_to_lowest_index() {
        let a = MeasurementMatrix::identity(3);
        let y = DVector::from_vec(vec![c(0.0), c(1.0), c(1.0)]);
        let r = omp(&a, &y, 1, 0.0).unwrap();
        assert_eq!(r.estimate.support(), &[1]);
    }

    #[test]
    fn omp_residual_is_monotone() {
        let a = gaussian(&GeneratorSpec::new("gaussian", 40, 20).seed(3)).unwrap();
        let mut rng = rng_from_seed(5);
        let x = random_sparse(&mut rng, 40, 6, Field::Real).unwrap();
        let y = measure(&a, &x).unwrap();
        let r = omp(&a, &y, 8, 0.0).unwrap();
        assert!(r.residual_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn omp_rejects_excess_sparsity() {
        let a = MeasurementMatrix::identity(3);
        assert!(omp(&a, &DVector::zeros(3), 4, 0.0).is_err());
    }

    #[test]
    fn trials_on_identity() {
        let a = MeasurementMatrix::identity(8);
        let s = run_trials(&a, &OracleLeastSquares, 2, 10, 1).unwrap();
        assert_eq!(s.success_rate(), 1.0);
        assert!(reconstructor("bp").is_err());
    }
}
