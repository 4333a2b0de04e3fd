//! Ridge-regularised least squares over the probability simplex,
//! solved by Frank–Wolfe with away steps and exact line search.
//!
//! Minimises `f(x) = ‖A x − b‖² + η ‖x‖²` subject to `x ≥ 0, Σx = 1`.

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct FrankWolfeConfig {
    /// Stop once the Frank–Wolfe duality gap falls to this value.
    pub tol: f64,
    pub max_iter: usize,
    /// Record the objective after every iteration.
    pub trace: bool,
}

impl Default for FrankWolfeConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100_000,
            trace: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
    /// Duality gap `∇f(x)·(x − s)` at exit; an upper bound on `f(x) − f*`.
    pub gap: T,
    pub iterations: usize,
    pub trace: Vec<T>,
}

pub struct SimplexLeastSquares<'a, T> {
    pub a: &'a Matrix<T>,
    pub b: &'a [T],
    pub eta: T,
}

impl<'a, T: Scalar> SimplexLeastSquares<'a, T> {
    pub fn objective(&self, x: &[T]) -> T {
        let ax = self.a.matvec(x);
        let r: T = ax.iter().zip(self.b).map(|(&p, &q)| (p - q) * (p - q)).sum();
        r + self.eta * dot(x, x)
    }

    /// Solve from `init` (uniform weights when `None`).
    pub fn solve(&self, init: Option<&[T]>, cfg: &FrankWolfeConfig) -> Result<SimplexSolution<T>> {
        let n = self.a.ncols();
        if n == 0 {
            return Err(Error::Input("simplex problem with no variables".into()));
        }
        if self.b.len() != self.a.nrows() {
            return Err(Error::Input("target length does not match matrix rows".into()));
        }
        let mut x = match init {
            Some(v) => {
                if v.len() != n {
                    return Err(Error::Input("initial weights have the wrong length".into()));
                }
                v.to_vec()
            }
            None => vec![T::one() / T::from_usize_lossy(n); n],
        };
        let two = T::lit(2.0);
        let tol = T::lit(cfg.tol);
        let mut ax = self.a.matvec(&x);
        let mut resid = vec![T::zero(); self.b.len()];
        let mut grad = vec![T::zero(); n];
        let mut trace = Vec::new();
        let mut gap = T::infinity();

        for it in 0..cfg.max_iter {
            for ((r, &p), &q) in resid.iter_mut().zip(&ax).zip(self.b) {
                *r = p - q;
            }
            // half gradient Aᵀ(Ax − b) + η x
            for (j, g) in grad.iter_mut().enumerate() {
                *g = dot(self.a.col(j), &resid) + self.eta * x[j];
            }
            let gx = dot(&grad, &x);
            let (s, gs) = argmin(&grad);
            gap = two * (gx - gs);
            if gap <= tol {
                return Ok(self.finish(x, gap, it, trace));
            }
            let (v, gv) = grad
                .iter()
                .enumerate()
                .filter(|(j, _)| x[*j] > T::zero())
                .fold((usize::MAX, T::neg_infinity()), |best, (j, &g)| if g > best.1 { (j, g) } else { best });
            let away_gain = gv - gx;
            let use_away = v != usize::MAX && away_gain > gx - gs && x[v] < T::one();

            // direction d and A d
            let (mut d, ad, step_max): (Vec<T>, Vec<T>, T) = if use_away {
                let d: Vec<T> = x.iter().enumerate().map(|(j, &xj)| if j == v { xj - T::one() } else { xj }).collect();
                let ad = ax.iter().zip(self.a.col(v)).map(|(&p, &c)| p - c).collect();
                (d, ad, x[v] / (T::one() - x[v]))
            } else {
                let d: Vec<T> = x.iter().enumerate().map(|(j, &xj)| if j == s { T::one() - xj } else { -xj }).collect();
                let ad = self.a.col(s).iter().zip(&ax).map(|(&c, &p)| c - p).collect();
                (d, ad, T::one())
            };
            let num = -dot(&grad, &d);
            let den = dot(&ad, &ad) + self.eta * dot(&d, &d);
            let step = if den > T::zero() { (num / den).min(step_max).max(T::zero()) } else { step_max };
            if step == T::zero() {
                // no progress possible along either direction
                return Ok(self.finish(x, gap, it, trace));
            }
            for (xj, dj) in x.iter_mut().zip(d.iter_mut()) {
                *xj += step * *dj;
                if *xj < T::zero() {
                    *xj = T::zero();
                }
            }
            if use_away && step == step_max {
                x[v] = T::zero();
            }
            for (p, &q) in ax.iter_mut().zip(&ad) {
                *p += step * q;
            }
            if it % 256 == 255 {
                let s: T = x.iter().copied().sum();
                x.iter_mut().for_each(|v| *v /= s);
                ax = self.a.matvec(&x);
            }
            if cfg.trace {
                trace.push(self.objective(&x));
            }
        }
        Err(Error::NonConvergence {
            routine: "frank_wolfe",
            iterations: cfg.max_iter,
            residual: gap.to_f64_lossy(),
        })
    }

    fn finish(&self, mut x: Vec<T>, gap: T, iterations: usize, trace: Vec<T>) -> SimplexSolution<T> {
        let s: T = x.iter().copied().sum();
        x.iter_mut().for_each(|v| *v /= s);
        SimplexSolution {
            objective: self.objective(&x),
            x,
            gap,
            iterations,
            trace,
        }
    }
}

/// Smallest entry; ties resolve to the lowest index.
fn argmin<T: Scalar>(v: &[T]) -> (usize, T) {
    v.iter()
        .enumerate()
        .fold((0, T::infinity()), |best, (j, &g)| if g < best.1 { (j, g) } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(rows: usize, cols: usize, seed: u64) -> (Matrix<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Matrix::from_columns(
            rows,
            (0..cols).map(|_| (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect()).collect(),
        );
        let b = (0..rows).map(|_| rng.random_range(-0.5..0.5)).collect();
        (a, b)
    }

    #[test]
    fn stays_on_simplex_and_decreases() {
        for seed in 0..10 {
            let (a, b) = random_problem(12, 30, seed);
            let p = SimplexLeastSquares { a: &a, b: &b, eta: 0.01 };
            let sol = p
                .solve(None, &FrankWolfeConfig { trace: true, ..Default::default() })
                .unwrap();
            assert!(sol.x.iter().all(|&v| v >= 0.0));
            assert!((sol.x.iter().sum::<f64>() - 1.0).abs() < 1e-8);
            for w in sol.trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-14, "objective rose: {} -> {}", w[0], w[1]);
            }
            assert!(sol.gap <= 1e-8);
        }
    }

    #[test]
    fn vertex_optimum_found() {
        // b equals column 2 exactly: optimum is e_2 with no ridge
        let (a, _) = random_problem(8, 5, 3);
        let b = a.col(2).to_vec();
        let p = SimplexLeastSquares { a: &a, b: &b, eta: 0.0 };
        let sol = p.solve(None, &FrankWolfeConfig::default()).unwrap();
        assert!(sol.x[2] > 0.999, "{:?}", sol.x);
    }

    #[test]
    fn optimum_beats_random_feasible_points() {
        let (a, b) = random_problem(10, 6, 17);
        let p = SimplexLeastSquares { a: &a, b: &b, eta: 0.05 };
        let sol = p.solve(None, &FrankWolfeConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let mut w: Vec<f64> = (0..6).map(|_| -rng.random::<f64>().ln()).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            assert!(p.objective(&w) >= sol.objective - 1e-8);
        }
    }

    #[test]
    fn iteration_cap_reports_gap() {
        let (a, b) = random_problem(10, 40, 5);
        let p = SimplexLeastSquares { a: &a, b: &b, eta: 0.0 };
        let err = p
            .solve(None, &FrankWolfeConfig { tol: 1e-300, max_iter: 3, trace: false })
            .unwrap_err();
        assert!(matches!(err, Error::NonConvergence { routine: "frank_wolfe", .. }));
    }
}
