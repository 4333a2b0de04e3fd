//! Small dense linear algebra: a column-major matrix and an ordered
//! Householder QR that drops numerically collinear columns.

use crate::scalar::Scalar;

/// Dense column-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![T::zero(); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_columns(nrows: usize, columns: Vec<Vec<T>>) -> Self {
        let ncols = columns.len();
        let mut data = Vec::with_capacity(nrows * ncols);
        for c in columns {
            assert_eq!(c.len(), nrows, "column length mismatch");
            data.extend(c);
        }
        Self { nrows, ncols, data }
    }

    pub fn from_row_major(nrows: usize, ncols: usize, values: &[T]) -> Self {
        assert_eq!(values.len(), nrows * ncols);
        let mut m = Self::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                m[(i, j)] = values[i * ncols + j];
            }
        }
        m
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[T]> {
        (0..self.ncols).map(move |j| self.col(j))
    }

    /// Keep only the listed columns, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_columns(self.nrows, idx.iter().map(|&j| self.col(j).to_vec()).collect())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ncols, self.nrows);
        for j in 0..self.ncols {
            for i in 0..self.nrows {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.ncols, rhs.nrows, "inner dimension mismatch");
        let mut out = Self::zeros(self.nrows, rhs.ncols);
        for j in 0..rhs.ncols {
            let rc = rhs.col(j);
            let oc = out.col_mut(j);
            for (k, &b) in rc.iter().enumerate() {
                if b == T::zero() {
                    continue;
                }
                let ac = &self.data[k * self.nrows..(k + 1) * self.nrows];
                for (o, &a) in oc.iter_mut().zip(ac) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.ncols, v.len());
        let mut out = vec![T::zero(); self.nrows];
        for (j, &b) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.col(j)) {
                *o += a * b;
            }
        }
        out
    }

    /// `selfᵀ v`
    pub fn tr_matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.nrows, v.len());
        self.columns().map(|c| dot(c, v)).collect()
    }

    pub fn scale(&mut self, s: T) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.nrows.min(self.ncols)).map(|i| self[(i, i)]).collect()
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.nrows {
            for j in 0..self.ncols.min(self.nrows) {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Overwrite with `(A + Aᵀ)/2`.
    pub fn symmetrize(&mut self) {
        let half = T::lit(0.5);
        for i in 0..self.nrows {
            for j in (i + 1)..self.ncols {
                let v = (self[(i, j)] + self[(j, i)]) * half;
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[j * self.nrows + i]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[j * self.nrows + i]
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm2<T: Scalar>(a: &[T]) -> T {
    // scaled to avoid overflow on long columns
    let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    let s = a.iter().fold(T::zero(), |acc, &v| {
        let r = v / scale;
        acc + r * r
    });
    scale * s.sqrt()
}

/// Householder QR of a tall matrix, processing columns in order and
/// skipping any column whose remaining norm is below `rank_tol` times its
/// reference norm. Earlier columns therefore win when a set is collinear.
#[derive(Debug, Clone)]
pub struct OrderedQr<T> {
    /// Indices (into the input) of the columns that were kept.
    pub kept: Vec<usize>,
    /// Indices of columns dropped as collinear with earlier ones.
    pub dropped: Vec<usize>,
    /// Upper-triangular factor for the kept columns (rank × rank).
    pub r: Matrix<T>,
    reflectors: Vec<(Vec<T>, T)>,
    nrows: usize,
}

impl<T: Scalar> OrderedQr<T> {
    /// `reference_norms[j]` is the scale against which column `j` is judged
    /// negligible; pass the pre-transformation norms when the matrix has been
    /// demeaned so that a column wiped out by demeaning is recognised.
    pub fn new(a: &Matrix<T>, reference_norms: &[T], rank_tol: T) -> Self {
        let n = a.nrows();
        let k = a.ncols();
        assert_eq!(reference_norms.len(), k);
        let mut work = a.clone();
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        let mut reflectors: Vec<(Vec<T>, T)> = Vec::new();
        let mut r_cols: Vec<Vec<T>> = Vec::new();

        for j in 0..k {
            let rank = kept.len();
            let col = work.col(j);
            let tail_norm = if rank < n { norm2(&col[rank..]) } else { T::zero() };
            let reference = reference_norms[j].max(norm2(a.col(j)));
            if rank >= n || reference == T::zero() || tail_norm <= rank_tol * reference {
                dropped.push(j);
                continue;
            }
            // reflector v with H = I - tau v vᵀ mapping col[rank..] to alpha e1
            let x0 = col[rank];
            let alpha = if x0 >= T::zero() { -tail_norm } else { tail_norm };
            let mut v: Vec<T> = col[rank..].to_vec();
            v[0] = x0 - alpha;
            let vnorm2 = dot(&v, &v);
            let tau = if vnorm2 == T::zero() {
                T::zero()
            } else {
                T::lit(2.0) / vnorm2
            };
            // apply to this and later columns
            for jj in j..k {
                let c = &mut work.col_mut(jj)[rank..];
                let s = dot(&v, c) * tau;
                for (ci, &vi) in c.iter_mut().zip(&v) {
                    *ci -= s * vi;
                }
            }
            let mut rc = work.col(j)[..=rank].to_vec();
            rc[rank] = alpha;
            r_cols.push(rc);
            reflectors.push((v, tau));
            kept.push(j);
        }

        let rank = kept.len();
        let mut r = Matrix::zeros(rank, rank);
        for (jj, rc) in r_cols.iter().enumerate() {
            for (i, &v) in rc.iter().enumerate() {
                r[(i, jj)] = v;
            }
        }
        Self {
            kept,
            dropped,
            r,
            reflectors,
            nrows: n,
        }
    }

    pub fn rank(&self) -> usize {
        self.kept.len()
    }

    /// `Qᵀ y`
    pub fn qt_mul(&self, y: &[T]) -> Vec<T> {
        assert_eq!(y.len(), self.nrows);
        let mut out = y.to_vec();
        for (p, (v, tau)) in self.reflectors.iter().enumerate() {
            let c = &mut out[p..];
            let s = dot(v, c) * *tau;
            for (ci, &vi) in c.iter_mut().zip(v) {
                *ci -= s * vi;
            }
        }
        out
    }

    /// Least-squares coefficients for the kept columns.
    pub fn solve(&self, y: &[T]) -> Vec<T> {
        let qty = self.qt_mul(y);
        back_substitute(&self.r, &qty[..self.rank()])
    }

    /// `(XᵀX)⁻¹ = R⁻¹ R⁻ᵀ` for the kept columns.
    pub fn xtx_inverse(&self) -> Matrix<T> {
        let rinv = upper_inverse(&self.r);
        let mut out = rinv.matmul(&rinv.transpose());
        out.symmetrize();
        out
    }

    /// Ratio of the largest to the smallest |R_ii|; a cheap condition estimate.
    pub fn condition_estimate(&self) -> T {
        let d: Vec<T> = self.r.diagonal().iter().map(|v| v.abs()).collect();
        let max = d.iter().fold(T::zero(), |m, &v| m.max(v));
        let min = d.iter().fold(T::infinity(), |m, &v| m.min(v));
        if d.is_empty() || min == T::zero() {
            T::infinity()
        } else {
            max / min
        }
    }
}

pub fn back_substitute<T: Scalar>(r: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = r.ncols();
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in (i + 1)..n {
            s -= r[(i, j)] * x[j];
        }
        x[i] = s / r[(i, i)];
    }
    x
}

/// Inverse of an upper-triangular matrix.
pub fn upper_inverse<T: Scalar>(r: &Matrix<T>) -> Matrix<T> {
    let n = r.ncols();
    let mut inv = Matrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        let col = back_substitute(r, &e);
        inv.col_mut(j).copy_from_slice(&col);
    }
    inv
}

/// Solve a small symmetric positive definite system via Cholesky.
/// Returns `None` when the matrix is not numerically positive definite.
pub fn cholesky_solve<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let n = a.nrows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= T::zero() {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let t = l[(i, k)] * y[k];
            y[i] -= t;
        }
        y[i] /= l[(i, i)];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let t = l[(k, i)] * y[k];
            y[i] -= t;
        }
        y[i] /= l[(i, i)];
    }
    Some(y)
}
