//! Least squares on (already demeaned) regressors and the CR1 sandwich.

use crate::error::{Error, Result};
use crate::linalg::{norm2, Matrix, OrderedQr};
use crate::scalar::Scalar;

/// Condition estimate above which a fit is flagged as ill-conditioned.
pub const CONDITION_WARN: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct OlsFit<T> {
    /// Regressors actually used (collinear columns removed).
    pub x: Matrix<T>,
    pub coef: Vec<T>,
    pub residuals: Vec<T>,
    /// `(XᵀX)⁻¹` for the kept columns.
    pub bread: Matrix<T>,
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
    pub condition_estimate: T,
}

impl<T: Scalar> OlsFit<T> {
    pub fn nobs(&self) -> usize {
        self.x.nrows()
    }

    pub fn rank(&self) -> usize {
        self.kept.len()
    }
}

/// Relative tolerance below which a column counts as collinear.
pub fn rank_tolerance<T: Scalar>() -> T {
    T::epsilon().sqrt() * T::lit(10.0)
}

/// OLS via ordered Householder QR. `reference_norms` are the column norms
/// before any fixed-effect absorption.
pub fn ols_fit<T: Scalar>(x: &Matrix<T>, y: &[T], reference_norms: &[T]) -> Result<OlsFit<T>> {
    if x.nrows() != y.len() {
        return Err(Error::Input(format!(
            "design has {} rows but outcome has {}",
            x.nrows(),
            y.len()
        )));
    }
    let qr = OrderedQr::new(x, reference_norms, rank_tolerance());
    let kept_x = x.select_columns(&qr.kept);
    let coef = qr.solve(y);
    let fitted = kept_x.matvec(&coef);
    let residuals = y.iter().zip(&fitted).map(|(&a, &b)| a - b).collect();
    Ok(OlsFit {
        bread: qr.xtx_inverse(),
        condition_estimate: qr.condition_estimate(),
        x: kept_x,
        coef,
        residuals,
        kept: qr.kept,
        dropped: qr.dropped,
    })
}

/// Convenience: reference norms equal to the current column norms.
pub fn column_norms<T: Scalar>(x: &Matrix<T>) -> Vec<T> {
    x.columns().map(norm2).collect()
}

/// CR1 cluster-robust covariance:
/// `G/(G-1) · (N-1)/(N-K) · (XᵀX)⁻¹ (Σ_g X_gᵀ u_g u_gᵀ X_g) (XᵀX)⁻¹`.
///
/// `clusters` holds a dense cluster code per row.
pub fn cluster_robust_vcov<T: Scalar>(fit: &OlsFit<T>, clusters: &[usize]) -> Result<Matrix<T>> {
    let n = fit.nobs();
    let k = fit.rank();
    if clusters.len() != n {
        return Err(Error::Input(format!(
            "{} cluster labels for {n} observations",
            clusters.len()
        )));
    }
    let g = clusters.iter().max().map_or(0, |m| m + 1);
    let mut scores = vec![vec![T::zero(); k]; g];
    let mut present = vec![false; g];
    for (i, &c) in clusters.iter().enumerate() {
        present[c] = true;
        let u = fit.residuals[i];
        for (j, s) in scores[c].iter_mut().enumerate() {
            *s += fit.x[(i, j)] * u;
        }
    }
    let g_count = present.iter().filter(|&&p| p).count();
    if g_count < 2 {
        return Err(Error::Inference(format!(
            "clustered covariance needs at least 2 clusters, found {g_count}"
        )));
    }
    if n <= k {
        return Err(Error::Inference(format!("{n} observations for {k} regressors")));
    }
    let mut meat = Matrix::zeros(k, k);
    for s in scores.iter() {
        for a in 0..k {
            for b in 0..k {
                meat[(a, b)] += s[a] * s[b];
            }
        }
    }
    let mut v = fit.bread.matmul(&meat).matmul(&fit.bread);
    let gf = T::from_usize_lossy(g_count);
    let nf = T::from_usize_lossy(n);
    let kf = T::from_usize_lossy(k);
    v.scale(gf / (gf - T::one()) * (nf - T::one()) / (nf - kf));
    v.symmetrize();
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_design(n: usize, k: usize, seed: u64) -> (Matrix<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cols = vec![vec![1.0f64; n]];
        for _ in 1..k {
            cols.push((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
        }
        let x = Matrix::from_columns(n, cols);
        let y = (0..n)
            .map(|i| x[(i, 0)] * 0.5 + x[(i, 1)] * 2.0 + rng.random_range(-1.0..1.0) * (1.0 + x[(i, 1)].abs()))
            .collect();
        (x, y)
    }

    /// HC1 written out directly: N/(N-K) (XᵀX)⁻¹ Σ x_i x_iᵀ u_i² (XᵀX)⁻¹.
    fn hc1(x: &Matrix<f64>, u: &[f64]) -> nalgebra::DMatrix<f64> {
        let n = x.nrows();
        let k = x.ncols();
        let xm = nalgebra::DMatrix::from_fn(n, k, |i, j| x[(i, j)]);
        let xtx_inv = (xm.transpose() * &xm).try_inverse().unwrap();
        let mut meat = nalgebra::DMatrix::zeros(k, k);
        for i in 0..n {
            let xi = xm.row(i).transpose();
            meat += &xi * xi.transpose() * (u[i] * u[i]);
        }
        &xtx_inv * meat * &xtx_inv * (n as f64 / (n - k) as f64)
    }

    #[test]
    fn singleton_clusters_equal_hc1() {
        let (x, y) = random_design(60, 3, 11);
        let fit = ols_fit(&x, &y, &column_norms(&x)).unwrap();
        let clusters: Vec<usize> = (0..60).collect();
        let v = cluster_robust_vcov(&fit, &clusters).unwrap();
        let oracle = hc1(&x, &fit.residuals);
        for i in 0..3 {
            for j in 0..3 {
                assert!((v[(i, j)] - oracle[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn duplicated_rows_change_only_small_sample_factor() {
        let (x, y) = random_design(40, 2, 5);
        let clusters: Vec<usize> = (0..40).map(|i| i / 4).collect();
        let fit = ols_fit(&x, &y, &column_norms(&x)).unwrap();
        let v = cluster_robust_vcov(&fit, &clusters).unwrap();

        let x2 = Matrix::from_columns(
            80,
            x.columns().map(|c| c.iter().chain(c.iter()).copied().collect()).collect(),
        );
        let y2: Vec<f64> = y.iter().chain(y.iter()).copied().collect();
        let c2: Vec<usize> = clusters.iter().chain(clusters.iter()).copied().collect();
        let fit2 = ols_fit(&x2, &y2, &column_norms(&x2)).unwrap();
        let v2 = cluster_robust_vcov(&fit2, &c2).unwrap();

        for j in 0..2 {
            assert!((fit.coef[j] - fit2.coef[j]).abs() < 1e-12);
        }
        // undo the (N-1)/(N-K) factors by hand and compare
        let f1 = 39.0 / 38.0;
        let f2 = 79.0 / 78.0;
        for i in 0..2 {
            for j in 0..2 {
                assert!((v[(i, j)] / f1 - v2[(i, j)] / f2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_cluster_is_rejected() {
        let (x, y) = random_design(10, 2, 1);
        let fit = ols_fit(&x, &y, &column_norms(&x)).unwrap();
        assert!(matches!(cluster_robust_vcov(&fit, &[0; 10]), Err(Error::Inference(_))));
    }

    #[test]
    fn vcov_symmetric_psd_diagonal() {
        let (x, y) = random_design(200, 4, 3);
        let fit = ols_fit(&x, &y, &column_norms(&x)).unwrap();
        let clusters: Vec<usize> = (0..200).map(|i| i % 17).collect();
        let v = cluster_robust_vcov(&fit, &clusters).unwrap();
        assert!(v.asymmetry() <= 1e-12);
        assert!(v.diagonal().iter().all(|&d| d >= 0.0));
    }
}
