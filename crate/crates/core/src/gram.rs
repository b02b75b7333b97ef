//! Normalized Gram matrix `A^H A` and the coherence statistics built on it.
//!
//! For each row `m` the off-diagonal magnitudes `|G[m][k]|`, `k != m`, are
//! sorted in descending order to form the row profile `s(m, 1) >= s(m, 2) >= ...`.
//! The diagonal is excluded throughout: with unit-norm columns it is
//! identically one and carries no coherence information.
//!
//! * `mu`          largest off-diagonal magnitude.
//! * `beta(p)`     max over rows of the mean of that row's `p` largest values.
//! * `alpha(p)`    mean of the `p` largest off-diagonal magnitudes anywhere in
//!   `G`, both `G[i][j]` and `G[j][i]` counted.
//! * `gamma(p, r)` like `beta(p)` but with row `r` left out, so that it is
//!   taken on a second row.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{Field, MeasurementMatrix, C64};

#[derive(Debug, Clone)]
pub struct GramProfile {
    gram: DMatrix<C64>,
    profile: Vec<Vec<f64>>,
    global: Vec<f64>,
    mu: f64,
}

/// Computes `A^H A` for a column-normalized matrix along with its sorted
/// row profiles.
pub fn gram_matrix(a: &MeasurementMatrix) -> Result<GramProfile> {
    if !a.is_normalized() {
        return Err(Error::NotNormalized);
    }
    Ok(GramProfile::from_gram(hermitian_gram(a)))
}

/// `A^H A` with exact Hermitian symmetry and a real diagonal.
fn hermitian_gram(a: &MeasurementMatrix) -> DMatrix<C64> {
    let data = a.data();
    let re = data.map(|z| z.re);
    let re_t = re.transpose();
    let n = a.cols();
    let mut g_re = &re_t * &re;
    let mut g_im = DMatrix::<f64>::zeros(n, n);
    if a.field() == Field::Complex {
        let im = data.map(|z| z.im);
        let im_t = im.transpose();
        g_re += &im_t * &im;
        g_im = &re_t * &im - &im_t * &re;
    }
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(g_re[(i, i)], 0.0)
        } else if i < j {
            C64::new(g_re[(i, j)], g_im[(i, j)])
        } else {
            C64::new(g_re[(j, i)], -g_im[(j, i)])
        }
    })
}

fn sort_descending(v: &mut [f64]) {
    v.sort_unstable_by(|a, b| b.total_cmp(a));
}

impl GramProfile {
    /// Builds the profile from an already-formed square Gram matrix.
    pub fn from_gram(gram: DMatrix<C64>) -> Self {
        assert!(gram.is_square(), "Gram matrix must be square");
        let n = gram.nrows();
        let profile: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|m| {
                let mut row: Vec<f64> = (0..n).filter(|&k| k != m).map(|k| gram[(m, k)].norm()).collect();
                sort_descending(&mut row);
                row
            })
            .collect();
        let mu = profile
            .iter()
            .filter_map(|r| r.first().copied())
            .fold(0.0, f64::max);
        let mut global: Vec<f64> = profile.iter().flatten().copied().collect();
        global.par_sort_unstable_by(|a, b| b.total_cmp(a));
        Self {
            gram,
            profile,
            global,
            mu,
        }
    }

    pub fn n(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<C64> {
        &self.gram
    }

    /// Sorted off-diagonal magnitudes of row `m`.
    pub fn row_profile(&self, m: usize) -> &[f64] {
        &self.profile[m]
    }

    pub fn profiles(&self) -> &[Vec<f64>] {
        &self.profile
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn coherence(&self) -> f64 {
        self.mu
    }

    fn row_mean(&self, m: usize, p: usize) -> f64 {
        self.profile[m][..p].iter().sum::<f64>() / p as f64
    }

    fn check_row_p(&self, p: usize) -> Result<()> {
        let available = self.n().saturating_sub(1);
        if p > available {
            return Err(Error::ProfileTooShort {
                requested: p,
                available,
            });
        }
        Ok(())
    }

    /// Largest row mean of the top `p` profile values, and the lowest-index
    /// row attaining it. `p = 0` gives `(0, None)`.
    pub fn beta_argmax(&self, p: usize) -> Result<(f64, Option<usize>)> {
        self.check_row_p(p)?;
        if p == 0 {
            return Ok((0.0, None));
        }
        Ok(self.best_row_mean(p, None).expect("p >= 1 implies n >= 2"))
    }

    pub fn beta(&self, p: usize) -> Result<f64> {
        self.beta_argmax(p).map(|(v, _)| v)
    }

    pub fn alpha(&self, p: usize) -> Result<f64> {
        if p > self.global.len() {
            return Err(Error::ProfileTooShort {
                requested: p,
                available: self.global.len(),
            });
        }
        if p == 0 {
            return Ok(0.0);
        }
        Ok(self.global[..p].iter().sum::<f64>() / p as f64)
    }

    pub fn gamma(&self, p: usize, exclude_row: Option<usize>) -> Result<f64> {
        if self.n() <= 1 {
            return Err(Error::NoRowsLeft);
        }
        self.check_row_p(p)?;
        if p == 0 {
            return Ok(0.0);
        }
        self.best_row_mean(p, exclude_row)
            .map(|(v, _)| v)
            .ok_or(Error::NoRowsLeft)
    }

    fn best_row_mean(&self, p: usize, exclude_row: Option<usize>) -> Option<(f64, Option<usize>)> {
        let mut best: Option<(f64, usize)> = None;
        for m in 0..self.n() {
            if Some(m) == exclude_row {
                continue;
            }
            let v = self.row_mean(m, p);
            if best.is_none_or(|(b, _)| v > b) {
                best = Some((v, m));
            }
        }
        best.map(|(v, m)| (v, Some(m)))
    }
}
