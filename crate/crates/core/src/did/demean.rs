//! Absorbing categorical fixed effects by alternating group demeaning.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// One categorical fixed-effect dimension: a level code per row.
#[derive(Debug, Clone)]
pub struct FeGroup {
    pub name: String,
    pub codes: Vec<usize>,
    pub levels: usize,
}

impl FeGroup {
    pub fn new(name: impl Into<String>, codes: Vec<usize>) -> Result<Self> {
        let name = name.into();
        let levels = codes.iter().max().map_or(0, |m| m + 1);
        if levels == 0 {
            return Err(Error::Input(format!("fixed effect `{name}` has no levels")));
        }
        Ok(Self { name, codes, levels })
    }

    /// Intercept-only grouping.
    pub fn constant(nrows: usize) -> Self {
        Self {
            name: "intercept".into(),
            codes: vec![0; nrows],
            levels: 1,
        }
    }

    fn counts(&self) -> Vec<usize> {
        let mut c = vec![0usize; self.levels];
        for &g in &self.codes {
            c[g] += 1;
        }
        c
    }
}

#[derive(Debug, Clone)]
pub struct Demeaned<T> {
    pub matrix: Matrix<T>,
    pub sweeps: usize,
}

/// Subtract group means for every group in turn, repeating until a full sweep
/// changes no entry by more than `tol`. All columns are swept together so the
/// same linear operator is applied to each of them.
pub fn within_transform<T: Scalar>(
    x: &Matrix<T>,
    groups: &[FeGroup],
    tol: T,
    max_iter: usize,
) -> Result<Demeaned<T>> {
    let n = x.nrows();
    for g in groups {
        if g.codes.len() != n {
            return Err(Error::Input(format!(
                "fixed effect `{}` has {} labels for {n} rows",
                g.name,
                g.codes.len()
            )));
        }
        if g.levels == 0 {
            return Err(Error::Input(format!("fixed effect `{}` has no levels", g.name)));
        }
    }
    if x.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("matrix to demean contains non-finite values".into()));
    }
    let mut m = x.clone();
    if groups.is_empty() {
        return Ok(Demeaned { matrix: m, sweeps: 0 });
    }
    let inv_counts: Vec<Vec<T>> = groups
        .iter()
        .map(|g| {
            g.counts()
                .into_iter()
                .map(|c| if c == 0 { T::zero() } else { T::one() / T::from_usize_lossy(c) })
                .collect()
        })
        .collect();

    if groups.len() == 1 {
        demean_pass(&mut m, &groups[0], &inv_counts[0]);
        return Ok(Demeaned { matrix: m, sweeps: 1 });
    }

    // below a few ulps of the data scale sweeps only shuffle rounding error
    let scale = x.as_slice().iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let tol = tol.max(T::lit(16.0) * T::epsilon() * scale);
    let mut last_change = T::infinity();
    for sweep in 1..=max_iter {
        let mut change = T::zero();
        for (g, inv) in groups.iter().zip(&inv_counts) {
            change = change.max(demean_pass(&mut m, g, inv));
        }
        last_change = change;
        if change < tol {
            return Ok(Demeaned { matrix: m, sweeps: sweep });
        }
    }
    Err(Error::NonConvergence {
        routine: "within_transform",
        iterations: max_iter,
        residual: residual_norm(&m, groups).to_f64_lossy().max(last_change.to_f64_lossy()),
    })
}

/// One demeaning pass for one group; returns the largest absolute adjustment.
fn demean_pass<T: Scalar>(m: &mut Matrix<T>, g: &FeGroup, inv_counts: &[T]) -> T {
    let mut sums = vec![T::zero(); g.levels];
    let mut worst = T::zero();
    for j in 0..m.ncols() {
        sums.iter_mut().for_each(|s| *s = T::zero());
        let col = m.col_mut(j);
        for (v, &c) in col.iter().zip(&g.codes) {
            sums[c] += *v;
        }
        for (s, &ic) in sums.iter_mut().zip(inv_counts) {
            *s *= ic;
            worst = worst.max(s.abs());
        }
        for (v, &c) in col.iter_mut().zip(&g.codes) {
            *v -= sums[c];
        }
    }
    worst
}

/// Euclidean norm of all remaining group means, a measure of how far the
/// matrix is from the orthogonal complement of the indicator spaces.
pub fn residual_norm<T: Scalar>(m: &Matrix<T>, groups: &[FeGroup]) -> T {
    let mut acc = T::zero();
    for g in groups {
        let counts = g.counts();
        for j in 0..m.ncols() {
            let mut sums = vec![T::zero(); g.levels];
            for (v, &c) in m.col(j).iter().zip(&g.codes) {
                sums[c] += *v;
            }
            for (s, &c) in sums.iter().zip(&counts) {
                if c > 0 {
                    let mean = *s / T::from_usize_lossy(c);
                    acc += mean * mean;
                }
            }
        }
    }
    acc.sqrt()
}

/// Largest absolute group mean of any column for any group.
pub fn max_group_mean<T: Scalar>(m: &Matrix<T>, groups: &[FeGroup]) -> T {
    let mut worst = T::zero();
    for g in groups {
        let counts = g.counts();
        for j in 0..m.ncols() {
            let mut sums = vec![T::zero(); g.levels];
            for (v, &c) in m.col(j).iter().zip(&g.codes) {
                sums[c] += *v;
            }
            for (s, &c) in sums.iter().zip(&counts) {
                if c > 0 {
                    worst = worst.max((*s / T::from_usize_lossy(c)).abs());
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_group_is_one_pass() {
        let x = Matrix::from_columns(4, vec![vec![1.0, 3.0, 10.0, 20.0]]);
        let g = FeGroup::new("u", vec![0, 0, 1, 1]).unwrap();
        let d = within_transform(&x, &[g], 1e-10, 100).unwrap();
        assert_eq!(d.sweeps, 1);
        assert_eq!(d.matrix.col(0), &[-1.0, 1.0, -5.0, 5.0]);
    }

    #[test]
    fn within_constant_column_vanishes() {
        // constant within units and within periods => zero after demeaning
        let unit = FeGroup::new("u", vec![0, 0, 1, 1, 2, 2]).unwrap();
        let period = FeGroup::new("t", vec![0, 1, 0, 1, 0, 1]).unwrap();
        let x = Matrix::from_columns(6, vec![vec![2.0f64, 2.0, 5.0, 5.0, -1.0, -1.0]]);
        let d = within_transform(&x, &[unit, period], 1e-12, 100).unwrap();
        assert!(d.matrix.col(0).iter().all(|v| v.abs() < 1e-12));
    }

    /// Residual-maker oracle: project out explicit dummy columns by solving the
    /// normal equations with nalgebra.
    fn dummy_residuals(col: &[f64], groups: &[Vec<usize>]) -> Vec<f64> {
        let n = col.len();
        let mut dummies: Vec<Vec<f64>> = vec![vec![1.0; n]];
        for codes in groups {
            let levels = codes.iter().max().unwrap() + 1;
            for l in 1..levels {
                dummies.push(codes.iter().map(|&c| (c == l) as u8 as f64).collect());
            }
        }
        let k = dummies.len();
        let d = nalgebra::DMatrix::from_fn(n, k, |i, j| dummies[j][i]);
        let y = nalgebra::DVector::from_column_slice(col);
        let beta = d.clone().svd(true, true).solve(&y, 1e-12).unwrap();
        (y - d * beta).iter().copied().collect()
    }

    #[test]
    fn crossed_groups_match_dummy_regression() {
        // 6×2 matrix, two crossed groups, unbalanced cell pattern
        let unit = vec![0, 0, 1, 1, 2, 2];
        let period = vec![0, 1, 0, 1, 1, 0];
        let age = vec![0, 0, 1, 1, 1, 0];
        let c0 = vec![1.0, 4.0, 2.0, 7.0, -3.0, 0.5];
        let c1 = vec![0.3, -1.0, 2.2, 0.1, 5.0, 1.5];
        let x = Matrix::from_columns(6, vec![c0.clone(), c1.clone()]);
        let groups = vec![
            FeGroup::new("u", unit.clone()).unwrap(),
            FeGroup::new("t", period.clone()).unwrap(),
            FeGroup::new("a", age.clone()).unwrap(),
        ];
        let d = within_transform(&x, &groups, 1e-13, 100_000).unwrap();
        for (j, c) in [c0, c1].iter().enumerate() {
            let oracle = dummy_residuals(c, &[unit.clone(), period.clone(), age.clone()]);
            for (a, b) in d.matrix.col(j).iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
        assert!(max_group_mean(&d.matrix, &groups) < 10.0 * 1e-13);
    }

    #[test]
    fn non_convergence_reports_residual() {
        let unit = FeGroup::new("u", vec![0, 0, 1, 1, 2, 2]).unwrap();
        let other = FeGroup::new("a", vec![0, 1, 1, 2, 2, 0]).unwrap();
        let x = Matrix::from_columns(6, vec![vec![1.0, 0.0, 3.0, 0.0, 2.0, 9.0]]);
        let err = within_transform(&x, &[unit, other], 1e-300, 2).unwrap_err();
        match err {
            Error::NonConvergence { iterations, residual, .. } => {
                assert_eq!(iterations, 2);
                assert!(residual > 0.0);
            }
            e => panic!("{e:?}"),
        }
    }
}
