//! Deterministic measurement-matrix generators.
//!
//! Randomness (row subsets and Gaussian entries) comes from a ChaCha8 stream
//! seeded with [`rand::SeedableRng::seed_from_u64`]. Row subsets are drawn
//! with `rand::seq::index::sample` and then sorted; Gaussian entries are
//! standard normals (`rand_distr::StandardNormal`) drawn in row-major order.
//! The same [`GeneratorSpec`] always yields the same matrix, bit for bit.

use std::f64::consts::PI;
use std::path::PathBuf;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{Field, MeasurementMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianKind {
    #[default]
    Combinatorial,
    Normalized,
}

impl LaplacianKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "combinatorial" => Ok(Self::Combinatorial),
            "normalized" => Ok(Self::Normalized),
            _ => Err(Error::Unknown {
                what: "laplacian kind",
                name: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorSpec {
    pub family: String,
    /// Number of columns (transform size for the partial families).
    pub n: usize,
    /// Number of rows; ignored when `row_selection` is given.
    pub m: usize,
    pub seed: u64,
    pub row_selection: Option<Vec<usize>>,
    pub laplacian_source: Option<PathBuf>,
    pub laplacian_kind: LaplacianKind,
}

impl GeneratorSpec {
    pub fn new(family: &str, n: usize, m: usize) -> Self {
        Self {
            family: family.to_string(),
            n,
            m,
            seed: 0,
            row_selection: None,
            laplacian_source: None,
            laplacian_kind: LaplacianKind::Combinatorial,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn rows(mut self, rows: Vec<usize>) -> Self {
        self.row_selection = Some(rows);
        self
    }

    pub fn laplacian(mut self, path: impl Into<PathBuf>) -> Self {
        self.laplacian_source = Some(path.into());
        self
    }

    /// Short provenance string, e.g. `gaussian n=16 m=8 seed=3`.
    pub fn descriptor(&self) -> String {
        let mut s = format!("{} n={} m={} seed={}", self.family, self.n, self.m, self.seed);
        if let Some(rows) = &self.row_selection {
            let list: Vec<String> = rows.iter().map(|r| r.to_string()).collect();
            s.push_str(&format!(" rows={}", list.join(",")));
        }
        if let Some(p) = &self.laplacian_source {
            s.push_str(&format!(" laplacian={}", p.display()));
        }
        s
    }
}

/// Seeded ChaCha8 stream used by every generator.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rows `0..n` without the listed ones.
pub fn complement_rows(n: usize, removed: &[usize]) -> Vec<usize> {
    (0..n).filter(|r| !removed.contains(r)).collect()
}

/// The explicit selection if present (validated), else a sorted uniform
/// random `m`-subset of `0..n`.
fn select_rows(spec: &GeneratorSpec, n: usize) -> Result<Vec<usize>> {
    match &spec.row_selection {
        Some(rows) => {
            let mut rows = rows.clone();
            rows.sort_unstable();
            if rows.is_empty() {
                return Err(Error::BadSelection("empty row selection".into()));
            }
            if let Some(w) = rows.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::BadSelection(format!("duplicate row {}", w[0])));
            }
            if let Some(&r) = rows.last().filter(|&&r| r >= n) {
                return Err(Error::BadSelection(format!("row {r} out of range 0..{n}")));
            }
            Ok(rows)
        }
        None => {
            if spec.m == 0 || spec.m > n {
                return Err(Error::BadSelection(format!(
                    "cannot select {} rows out of {n}",
                    spec.m
                )));
            }
            let mut rng = rng_from_seed(spec.seed);
            let mut rows = rand::seq::index::sample(&mut rng, n, spec.m).into_vec();
            rows.sort_unstable();
            Ok(rows)
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    Ok(())
}

/// Rows of the unitary DFT, `exp(-2 pi i m k / N) / sqrt(N)`, columns
/// normalized afterwards.
pub fn partial_dft(spec: &GeneratorSpec) -> Result<MeasurementMatrix> {
    check_n(spec.n)?;
    let n = spec.n;
    let rows = select_rows(spec, n)?;
    let scale = 1.0 / (n as f64).sqrt();
    let data = DMatrix::from_fn(rows.len(), n, |i, k| {
        // Reduce the phase index mod N before scaling to keep the angle small.
        let idx = (rows[i] * k) % n;
        C64::from_polar(scale, -2.0 * PI * idx as f64 / n as f64)
    });
    MeasurementMatrix::new(data, Field::Complex)?.normalize_columns()
}

/// Rows of the orthonormal DCT-II, `c_m cos(pi m (2k + 1) / (2N))`.
pub fn partial_dct(spec: &GeneratorSpec) -> Result<MeasurementMatrix> {
    check_n(spec.n)?;
    let n = spec.n;
    let rows = select_rows(spec, n)?;
    let nf = n as f64;
    let data = DMatrix::from_fn(rows.len(), n, |i, k| {
        let m = rows[i];
        let c = if m == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        C64::new(c * (PI * m as f64 * (2 * k + 1) as f64 / (2.0 * nf)).cos(), 0.0)
    });
    MeasurementMatrix::new(data, Field::Real)?.normalize_columns()
}

/// i.i.d. standard normal `M x N` matrix with normalized columns.
pub fn gaussian(spec: &GeneratorSpec) -> Result<MeasurementMatrix> {
    check_n(spec.n)?;
    if spec.m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let mut rng = rng_from_seed(spec.seed);
    let entries: Vec<f64> = (0..spec.m * spec.n).map(|_| StandardNormal.sample(&mut rng)).collect();
    MeasurementMatrix::from_real_rows(spec.m, spec.n, &entries)?.normalize_columns()
}

/// Checks symmetry and zero row sums within `1e-8`.
pub fn validate_laplacian(l: &DMatrix<f64>) -> Result<()> {
    if !l.is_square() || l.nrows() == 0 {
        return Err(Error::NotALaplacian(format!("shape {}x{}", l.nrows(), l.ncols())));
    }
    let n = l.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (l[(i, j)] - l[(j, i)]).abs() > 1e-8 {
                return Err(Error::NotALaplacian(format!("asymmetric at ({i}, {j})")));
            }
        }
        let row_sum: f64 = l.row(i).sum();
        if row_sum.abs() > 1e-8 {
            return Err(Error::NotALaplacian(format!("row {i} sums to {row_sum}")));
        }
    }
    Ok(())
}

/// Eigenvectors of the graph Laplacian as columns, ordered by ascending
/// eigenvalue, each with its first nonzero coordinate made positive.
pub fn gft_basis(laplacian: &DMatrix<f64>, kind: LaplacianKind) -> Result<(Vec<f64>, DMatrix<f64>)> {
    validate_laplacian(laplacian)?;
    let n = laplacian.nrows();
    let l = match kind {
        LaplacianKind::Combinatorial => laplacian.clone(),
        LaplacianKind::Normalized => {
            let inv_sqrt: Vec<f64> = (0..n)
                .map(|i| {
                    let d = laplacian[(i, i)];
                    if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }
                })
                .collect();
            DMatrix::from_fn(n, n, |i, j| inv_sqrt[i] * laplacian[(i, j)] * inv_sqrt[j])
        }
    };
    let eig = SymmetricEigen::try_new(l, 1e-14, 10_000).ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut basis = eig.eigenvectors.select_columns(&order);
    for mut col in basis.column_iter_mut() {
        if let Some(&first) = col.iter().find(|x| x.abs() > 1e-12) {
            if first < 0.0 {
                col.neg_mut();
            }
        }
    }
    Ok((values, basis))
}

/// Vertex-sampled GFT: rows of the eigenvector matrix at the selected
/// vertices, columns normalized.
pub fn partial_gft_from_laplacian(
    laplacian: &DMatrix<f64>,
    spec: &GeneratorSpec,
) -> Result<MeasurementMatrix> {
    let (_, basis) = gft_basis(laplacian, spec.laplacian_kind)?;
    let rows = select_rows(spec, basis.nrows())?;
    let data = basis.select_rows(&rows).map(|x| C64::new(x, 0.0));
    MeasurementMatrix::new(data, Field::Real)?.normalize_columns()
}

pub fn partial_gft(spec: &GeneratorSpec) -> Result<MeasurementMatrix> {
    let path = spec
        .laplacian_source
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("partial_gft requires a Laplacian file".into()))?;
    let text = std::fs::read_to_string(path)?;
    let lap = crate::format::parse_matrix(&text)?;
    if lap.field() != Field::Real {
        return Err(Error::NotALaplacian("Laplacian must be real".into()));
    }
    let real = lap.data().map(|z| z.re);
    partial_gft_from_laplacian(&real, spec)
}

/// Combinatorial Laplacian of the path graph on `n` vertices.
pub fn path_laplacian(n: usize) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        l[(i, i)] += 1.0;
        l[(i + 1, i + 1)] += 1.0;
        l[(i, i + 1)] = -1.0;
        l[(i + 1, i)] = -1.0;
    }
    l
}

/// Regular simplex: `n` unit vectors in `n - 1` dimensions with pairwise
/// inner products `-1 / (n - 1)`.
///
/// Column `i` is the centered basis vector `e_i - 1/n` expressed in the
/// Helmert basis of the hyperplane orthogonal to the all-ones vector.
pub fn simplex_etf(n: usize) -> Result<MeasurementMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument("simplex ETF needs n >= 2".into()));
    }
    let data = DMatrix::from_fn(n - 1, n, |r, i| {
        let j = r + 1;
        let scale = 1.0 / ((j * (j + 1)) as f64).sqrt();
        let v = match i.cmp(&j) {
            std::cmp::Ordering::Less => 1.0,
            std::cmp::Ordering::Equal => -(j as f64),
            std::cmp::Ordering::Greater => 0.0,
        };
        C64::new(v * scale, 0.0)
    });
    MeasurementMatrix::new(data, Field::Real)?.normalize_columns()
}

/// A named matrix family.
pub trait MatrixFamily: Send + Sync {
    fn name(&self) -> &'static str;
    fn generate(&self, spec: &GeneratorSpec) -> Result<MeasurementMatrix>;
}

macro_rules! family {
    ($ty:ident, $name:literal, $f:expr) => {
        #[derive(Debug, Default, Clone, Copy)]
        pub struct $ty;

        impl MatrixFamily for $ty {
            fn name(&self) -> &'static str {
                $name
            }

            fn generate(&self, spec: &GeneratorSpec) -> Result<MeasurementMatrix> {
                $f(spec)
            }
        }
    };
}

family!(PartialDft, "partial_dft", partial_dft);
family!(PartialDct, "partial_dct", partial_dct);
family!(Gaussian, "gaussian", gaussian);
family!(PartialGft, "partial_gft", partial_gft);
family!(SimplexEtf, "simplex_etf", |s: &GeneratorSpec| simplex_etf(s.n));

pub struct FamilyRegistry {
    families: Vec<Box<dyn MatrixFamily>>,
}

impl Default for FamilyRegistry {
    fn default() -> Self {
        Self {
            families: vec![
                Box::new(PartialDft),
                Box::new(PartialDct),
                Box::new(Gaussian),
                Box::new(PartialGft),
                Box::new(SimplexEtf),
            ],
        }
    }
}

impl FamilyRegistry {
    pub fn register(&mut self, family: Box<dyn MatrixFamily>) {
        self.families.retain(|f| f.name() != family.name());
        self.families.push(family);
    }

    pub fn get(&self, name: &str) -> Result<&dyn MatrixFamily> {
        self.families
            .iter()
            .find(|f| f.name() == name)
            .map(|f| f.as_ref())
            .ok_or_else(|| Error::Unknown {
                what: "matrix family",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.families.iter().map(|f| f.name()).collect()
    }

    pub fn generate(&self, spec: &GeneratorSpec) -> Result<MeasurementMatrix> {
        self.get(&spec.family)?.generate(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::gram_matrix;

    fn max_pairwise(a: &MeasurementMatrix) -> f64 {
        let n = a.cols();
        let mut mu: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let ip: C64 = a.column(i).iter().zip(a.column(j).iter()).map(|(x, y)| x.conj() * y).sum();
                mu = mu.max(ip.norm());
            }
        }
        mu
    }

    #[test]
    fn full_dft_is_orthonormal() {
        let a = partial_dft(&GeneratorSpec::new("partial_dft", 4, 4)).unwrap();
        assert!(max_pairwise(&a) < 1e-12);
        let a = partial_dft(&GeneratorSpec::new("partial_dft", 8, 0).rows((0..8).collect())).unwrap();
        assert!(gram_matrix(&a).unwrap().mu() < 1e-10);
    }

    #[test]
    fn full_dct_is_orthonormal() {
        let a = partial_dct(&GeneratorSpec::new("partial_dct", 8, 8)).unwrap();
        assert!(gram_matrix(&a).unwrap().mu() < 1e-10);
    }

    #[test]
    fn dct_mu_matches_pairwise_loop() {
        let a = partial_dct(&GeneratorSpec::new("partial_dct", 16, 12).seed(1)).unwrap();
        let mu = gram_matrix(&a).unwrap().mu();
        assert!((mu - max_pairwise(&a)).abs() < 1e-14);
        assert!(mu > 0.0);
    }

    #[test]
    fn bad_selections() {
        let base = GeneratorSpec::new("partial_dft", 8, 3);
        for rows in [vec![1, 1, 2], vec![0, 8], vec![]] {
            assert!(matches!(partial_dft(&base.clone().rows(rows)), Err(Error::BadSelection(_))));
        }
        assert!(matches!(partial_dct(&GeneratorSpec::new("partial_dct", 8, 9)), Err(Error::BadSelection(_))));
    }

    #[test]
    fn seeded_selection_is_deterministic() {
        let spec = GeneratorSpec::new("partial_dct", 32, 20).seed(11);
        assert_eq!(partial_dct(&spec).unwrap(), partial_dct(&spec).unwrap());
        let other = partial_dct(&spec.clone().seed(12)).unwrap();
        assert_ne!(partial_dct(&spec).unwrap(), other);
    }

    #[test]
    fn gaussian_is_deterministic_and_normalized() {
        let spec = GeneratorSpec::new("gaussian", 16, 16).seed(5);
        let a = gaussian(&spec).unwrap();
        assert_eq!(a, gaussian(&spec).unwrap());
        for norm in a.column_norms() {
            assert!((norm - 1.0).abs() < 1e-12);
        }
        assert!(max_pairwise(&a) < 1.0);
    }

    #[test]
    fn gaussian_5x8_seed7_unit_columns() {
        let a = gaussian(&GeneratorSpec::new("gaussian", 8, 5).seed(7)).unwrap();
        assert!(a.is_normalized());
        for norm in a.column_norms() {
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn simplex_pairwise_products() {
        for n in [2usize, 3, 5, 9] {
            let a = simplex_etf(n).unwrap();
            assert_eq!(a.rows(), n - 1);
            let g = gram_matrix(&a).unwrap();
            let target = -1.0 / (n - 1) as f64;
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { target };
                    assert!((g.gram()[(i, j)].re - want).abs() < 1e-12);
                }
            }
        }
        assert!((gram_matrix(&simplex_etf(2).unwrap()).unwrap().mu() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn path_graph_gft() {
        let l = path_laplacian(4);
        let a = partial_gft_from_laplacian(&l, &GeneratorSpec::new("partial_gft", 4, 4)).unwrap();
        assert!(gram_matrix(&a).unwrap().mu() < 1e-10);

        let l = path_laplacian(8);
        let spec = GeneratorSpec::new("partial_gft", 8, 6).rows(complement_rows(8, &[2, 5]));
        let a = partial_gft_from_laplacian(&l, &spec).unwrap();
        let g = gram_matrix(&a).unwrap();
        for i in 0..8 {
            assert!((g.gram()[(i, i)].re - 1.0).abs() < 1e-10);
            for j in 0..8 {
                assert!((g.gram()[(i, j)] - g.gram()[(j, i)].conj()).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn gft_basis_sorted_and_signed() {
        let (vals, basis) = gft_basis(&path_laplacian(6), LaplacianKind::Combinatorial).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert!(vals[0].abs() < 1e-12);
        for col in basis.column_iter() {
            let first = col.iter().find(|x| x.abs() > 1e-12).unwrap();
            assert!(*first > 0.0);
        }
        let (vals, _) = gft_basis(&path_laplacian(6), LaplacianKind::Normalized).unwrap();
        assert!(vals.iter().all(|&v| v > -1e-12 && v < 2.0 + 1e-12));
    }

    #[test]
    fn rejects_non_laplacian() {
        let mut l = path_laplacian(3);
        l[(0, 0)] = 5.0;
        assert!(matches!(validate_laplacian(&l), Err(Error::NotALaplacian(_))));
        let mut l = path_laplacian(3);
        l[(0, 2)] = 0.5;
        l[(0, 0)] -= 0.5;
        assert!(matches!(validate_laplacian(&l), Err(Error::NotALaplacian(_))));
    }

    #[test]
    fn registry_dispatch() {
        let reg = FamilyRegistry::default();
        assert_eq!(reg.names().len(), 5);
        let a = reg.generate(&GeneratorSpec::new("simplex_etf", 4, 0)).unwrap();
        assert_eq!(a.cols(), 4);
        assert!(reg.get("hadamard").is_err());
    }
}
