//! Synthetic difference-in-differences with leave-one-unit-out jackknife SEs.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::panel::PanelDataset;
use crate::scalar::Scalar;
use crate::stats::{mean, sample_sd};

use super::result::{Diagnostics, EstimateResult};
use super::simplex::{FrankWolfeConfig, SimplexLeastSquares};

pub const SDID: &str = "sdid";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdidConfig {
    /// Unit-weight ridge ζ; `None` uses `(N_tr·T_post)^{1/4}·σ̂`.
    pub zeta: Option<f64>,
    /// Ridge on the time weights, in the same units as `zeta`.
    pub zeta_time: f64,
    pub fw_tol: f64,
    pub fw_max_iter: usize,
}

impl Default for SdidConfig {
    fn default() -> Self {
        Self {
            zeta: None,
            zeta_time: 0.0,
            fw_tol: 1e-8,
            fw_max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdidWeights<T> {
    pub control_units: Vec<String>,
    pub unit_weights: Vec<T>,
    pub pre_periods: Vec<i64>,
    pub time_weights: Vec<T>,
    pub zeta: T,
    pub unit_iterations: usize,
    pub time_iterations: usize,
}

/// Outcome matrix `ln(Y+1)` with units as rows, split by treatment.
struct Wide<T> {
    treated: Vec<Vec<T>>,
    control: Vec<Vec<T>>,
    control_ids: Vec<String>,
}

fn widen<T: Scalar>(ds: &PanelDataset<T>) -> Result<Wide<T>> {
    if !ds.is_balanced() {
        return Err(Error::Input("synthetic DiD needs a balanced panel".into()));
    }
    let col: HashMap<i64, usize> = ds.periods().iter().enumerate().map(|(j, &p)| (p, j)).collect();
    let t = ds.periods().len();
    let mut rows: HashMap<&str, (Vec<T>, bool)> = HashMap::new();
    for o in ds.observations() {
        rows.entry(o.unit_id.as_str())
            .or_insert_with(|| (vec![T::zero(); t], o.treated))
            .0[col[&o.period]] = o.outcome.ln_1p();
    }
    let mut w = Wide {
        treated: Vec::new(),
        control: Vec::new(),
        control_ids: Vec::new(),
    };
    for id in ds.unit_ids() {
        let (row, treated) = rows.remove(id).expect("unit present");
        if treated {
            w.treated.push(row);
        } else {
            w.control.push(row);
            w.control_ids.push(id.to_string());
        }
    }
    Ok(w)
}

/// Noise scale: sample sd of control first differences within the pre-period.
fn first_difference_sd<T: Scalar>(control: &[Vec<T>], t0: usize) -> T {
    let diffs: Vec<T> = control
        .iter()
        .flat_map(|r| r[..t0].windows(2).map(|w| w[1] - w[0]))
        .collect();
    if diffs.len() < 2 {
        T::zero()
    } else {
        sample_sd(&diffs)
    }
}

fn centered<T: Scalar>(v: Vec<T>) -> Vec<T> {
    let m = mean(&v);
    v.into_iter().map(|x| x - m).collect()
}

/// Synthetic DiD: simplex unit weights matching the treated pre-period
/// path up to a level shift, simplex time weights matching the control
/// post-period mean up to a level shift, then the doubly weighted DiD.
///
/// The SE is the leave-one-unit-out jackknife with weights held fixed
/// (control weights renormalised after removing a control).
pub fn synthetic_did<T: Scalar>(
    ds: &PanelDataset<T>,
    cfg: &SdidConfig,
) -> Result<(EstimateResult<T>, SdidWeights<T>)> {
    let policy = ds.policy_period();
    let t0 = ds.periods().iter().filter(|&&p| p < policy).count();
    let t_all = ds.periods().len();
    let t1 = t_all - t0;
    if t0 < 2 {
        return Err(Error::Input(format!("synthetic DiD needs at least 2 pre-periods, have {t0}")));
    }
    let w = widen(ds)?;
    let (n_tr, n_co) = (w.treated.len(), w.control.len());
    if n_co < 2 {
        return Err(Error::Input(format!("synthetic DiD needs at least 2 control units, have {n_co}")));
    }
    if n_tr == 0 {
        return Err(Error::Input("synthetic DiD needs treated units".into()));
    }
    let fw = FrankWolfeConfig {
        tol: cfg.fw_tol,
        max_iter: cfg.fw_max_iter,
        trace: false,
    };

    let zeta = match cfg.zeta {
        Some(z) if z >= 0.0 => T::lit(z),
        Some(z) => return Err(Error::Input(format!("ridge zeta must be nonnegative, got {z}"))),
        None => {
            T::from_usize_lossy(n_tr * t1).powf(T::lit(0.25)) * first_difference_sd(&w.control, t0)
        }
    };

    // unit weights: pre-period paths demeaned over time absorb the intercept
    let tr_path: Vec<T> = (0..t0)
        .map(|t| w.treated.iter().map(|r| r[t]).sum::<T>() / T::from_usize_lossy(n_tr))
        .collect();
    let a_unit = Matrix::from_columns(t0, w.control.iter().map(|r| centered(r[..t0].to_vec())).collect());
    let b_unit = centered(tr_path);
    let omega = SimplexLeastSquares {
        a: &a_unit,
        b: &b_unit,
        eta: zeta * zeta * T::from_usize_lossy(t0),
    }
    .solve(None, &fw)?;

    // time weights: control pre-period values demeaned across controls
    let post_mean = |r: &[T]| r[t0..].iter().copied().sum::<T>() / T::from_usize_lossy(t1);
    let a_time = Matrix::from_columns(
        n_co,
        (0..t0).map(|t| centered(w.control.iter().map(|r| r[t]).collect())).collect(),
    );
    let b_time = centered(w.control.iter().map(|r| post_mean(r)).collect());
    let zt = T::lit(cfg.zeta_time);
    let lambda = SimplexLeastSquares {
        a: &a_time,
        b: &b_time,
        eta: zt * zt * T::from_usize_lossy(n_co),
    }
    .solve(None, &fw)?;

    // a_i = post mean − λ-weighted pre value; τ = mean_tr(a) − ω·a_co
    let contrast = |r: &[T]| post_mean(r) - r[..t0].iter().zip(&lambda.x).map(|(&y, &l)| y * l).sum::<T>();
    let a_tr: Vec<T> = w.treated.iter().map(|r| contrast(r)).collect();
    let a_co: Vec<T> = w.control.iter().map(|r| contrast(r)).collect();
    let om = &omega.x;
    let sum_tr: T = a_tr.iter().copied().sum();
    let synth: T = om.iter().zip(&a_co).map(|(&o, &a)| o * a).sum();
    let tau = sum_tr / T::from_usize_lossy(n_tr) - synth;

    let mut notes = Vec::new();
    let var = if n_tr < 2 {
        notes.push("jackknife undefined with a single treated unit".to_string());
        T::nan()
    } else {
        let mut loo = Vec::with_capacity(n_tr + n_co);
        let tr_less = T::from_usize_lossy(n_tr - 1);
        for &a in &a_tr {
            loo.push((sum_tr - a) / tr_less - synth);
        }
        let tr_mean = sum_tr / T::from_usize_lossy(n_tr);
        let mut skipped = 0usize;
        for (&o, &a) in om.iter().zip(&a_co) {
            let rest = T::one() - o;
            if rest <= T::epsilon() {
                skipped += 1;
                continue;
            }
            loo.push(tr_mean - (synth - o * a) / rest);
        }
        if skipped > 0 {
            notes.push(format!("{skipped} control units carry all weight; their jackknife replicates were skipped"));
        }
        let n = T::from_usize_lossy(loo.len());
        let m = mean(&loo);
        loo.iter().map(|&v| (v - m) * (v - m)).sum::<T>() * (n - T::one()) / n
    };
    let mut vcov = Matrix::zeros(1, 1);
    vcov[(0, 0)] = var;
    notes.push(format!(
        "zeta {:.6e}; Frank-Wolfe gaps {:.3e} (units) {:.3e} (time)",
        zeta.to_f64_lossy(),
        omega.gap.to_f64_lossy(),
        lambda.gap.to_f64_lossy()
    ));

    let result = EstimateResult {
        spec: SDID.into(),
        names: vec![SDID.into()],
        coef: vec![tau],
        vcov,
        nobs: ds.len(),
        cluster_count: n_tr + n_co,
        reference_label: None,
        diagnostics: Diagnostics {
            notes,
            ..Diagnostics::default()
        },
    };
    let weights = SdidWeights {
        control_units: w.control_ids,
        unit_weights: omega.x,
        pre_periods: ds.periods()[..t0].to_vec(),
        time_weights: lambda.x,
        zeta,
        unit_iterations: omega.iterations,
        time_iterations: lambda.iterations,
    };
    Ok((result, weights))
}
