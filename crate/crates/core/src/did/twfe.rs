//! Two-way (and three-way) fixed-effects OLS with clustered inference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm2, Matrix};
use crate::panel::{encode_labels, PanelDataset};
use crate::scalar::Scalar;

use super::demean::{within_transform, FeGroup};
use super::ols::{cluster_robust_vcov, ols_fit, CONDITION_WARN};
use super::result::{Diagnostics, EstimateResult};

/// Which fixed effects are absorbed. With none selected an intercept is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedEffects {
    pub unit: bool,
    pub period: bool,
    pub age: bool,
}

impl Default for FixedEffects {
    fn default() -> Self {
        Self {
            unit: true,
            period: true,
            age: false,
        }
    }
}

impl FixedEffects {
    pub const NONE: Self = Self {
        unit: false,
        period: false,
        age: false,
    };

    pub fn with_age(mut self) -> Self {
        self.age = true;
        self
    }
}

impl std::str::FromStr for FixedEffects {
    type Err = Error;
    /// Comma-separated subset of `unit,period,age`, or `none`.
    fn from_str(s: &str) -> Result<Self> {
        let mut fe = Self::NONE;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "unit" => fe.unit = true,
                "period" => fe.period = true,
                "age" => fe.age = true,
                "none" => {}
                other => return Err(Error::Input(format!("unknown fixed effect `{other}`"))),
            }
        }
        Ok(fe)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterBy {
    ClusterId,
    Unit,
}

impl std::str::FromStr for ClusterBy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cluster_id" | "cluster" => Ok(ClusterBy::ClusterId),
            "unit_id" | "unit" => Ok(ClusterBy::Unit),
            other => Err(Error::Input(format!("unknown cluster variable `{other}`"))),
        }
    }
}

/// Estimation settings shared by every regression-based estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub fixed_effects: FixedEffects,
    pub cluster: ClusterBy,
    pub demean_tol: f64,
    pub demean_max_iter: usize,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            fixed_effects: FixedEffects::default(),
            cluster: ClusterBy::ClusterId,
            demean_tol: 1e-10,
            demean_max_iter: 10_000,
        }
    }
}

/// Named treatment regressors plus the categorical fixed-effect labels.
#[derive(Debug, Clone)]
pub struct DesignMatrix<T> {
    pub names: Vec<String>,
    pub columns: Matrix<T>,
    pub fe_groups: Vec<FeGroup>,
}

impl<T: Scalar> DesignMatrix<T> {
    /// Build from named columns evaluated on `ds` rows in order.
    pub fn from_panel(ds: &PanelDataset<T>, columns: Vec<(String, Vec<T>)>, fe: FixedEffects) -> Result<Self> {
        let n = ds.len();
        let mut names = Vec::with_capacity(columns.len());
        let mut cols = Vec::with_capacity(columns.len());
        for (name, c) in columns {
            if c.len() != n {
                return Err(Error::Input(format!("column `{name}` has {} rows, panel has {n}", c.len())));
            }
            names.push(name);
            cols.push(c);
        }
        Ok(Self {
            names,
            columns: Matrix::from_columns(n, cols),
            fe_groups: fe_groups(ds, fe)?,
        })
    }

    /// The single `D_it = Treated_i × Post_t` regressor.
    pub fn treatment(ds: &PanelDataset<T>, fe: FixedEffects) -> Result<Self> {
        Self::from_panel(ds, vec![(TREAT_POST.into(), indicator(ds, |o| o.treat_post()))], fe)
    }
}

pub const TREAT_POST: &str = "treat_post";

pub(crate) fn indicator<T: Scalar>(
    ds: &PanelDataset<T>,
    f: impl Fn(&crate::panel::PanelObservation<T>) -> bool,
) -> Vec<T> {
    ds.observations()
        .iter()
        .map(|o| if f(o) { T::one() } else { T::zero() })
        .collect()
}

fn fe_groups<T: Scalar>(ds: &PanelDataset<T>, fe: FixedEffects) -> Result<Vec<FeGroup>> {
    let obs = ds.observations();
    let mut groups = Vec::new();
    if fe.unit {
        let (codes, _) = encode_labels(obs.iter().map(|o| o.unit_id.as_str()));
        groups.push(FeGroup::new("unit", codes)?);
    }
    if fe.period {
        let (codes, _) = encode_labels(obs.iter().map(|o| o.period));
        groups.push(FeGroup::new("period", codes)?);
    }
    if fe.age {
        let (codes, _) = encode_labels(obs.iter().map(|o| o.age_years));
        groups.push(FeGroup::new("age", codes)?);
    }
    if groups.is_empty() {
        groups.push(FeGroup::constant(obs.len()));
    }
    Ok(groups)
}

pub(crate) fn cluster_codes<T: Scalar>(ds: &PanelDataset<T>, by: ClusterBy) -> Vec<usize> {
    let obs = ds.observations();
    match by {
        ClusterBy::ClusterId => encode_labels(obs.iter().map(|o| o.cluster_id.as_str())).0,
        ClusterBy::Unit => encode_labels(obs.iter().map(|o| o.unit_id.as_str())).0,
    }
}

/// OLS of `ln(Y+1)` on the design's regressors after absorbing its fixed
/// effects, with CR1 covariance clustered per `opts.cluster`.
///
/// Regressors collinear with earlier ones (or wiped out by the fixed
/// effects) are dropped and listed in `diagnostics.dropped`; if nothing
/// identifiable remains the fit fails with [`Error::RankDeficient`].
pub fn twfe_ols<T: Scalar>(
    ds: &PanelDataset<T>,
    design: &DesignMatrix<T>,
    opts: &EstimateOptions,
) -> Result<EstimateResult<T>> {
    let n = ds.len();
    if design.columns.nrows() != n {
        return Err(Error::Input("design rows do not match the panel".into()));
    }
    let k = design.columns.ncols();
    if k == 0 {
        return Err(Error::Input("design has no regressors".into()));
    }
    let y = ds.log_outcomes();
    let mut stacked: Vec<Vec<T>> = design.columns.columns().map(<[T]>::to_vec).collect();
    stacked.push(y);
    let stacked = Matrix::from_columns(n, stacked);
    let demeaned = within_transform(
        &stacked,
        &design.fe_groups,
        T::lit(opts.demean_tol),
        opts.demean_max_iter,
    )?;
    let xd = demeaned.matrix.select_columns(&(0..k).collect::<Vec<_>>());
    let yd = demeaned.matrix.col(k).to_vec();
    let refs: Vec<T> = design.columns.columns().map(norm2).collect();
    let fit = ols_fit(&xd, &yd, &refs)?;

    if fit.rank() == 0 {
        return Err(Error::RankDeficient {
            columns: design.names.clone(),
        });
    }
    let dropped: Vec<String> = fit.dropped.iter().map(|&j| design.names[j].clone()).collect();
    if !dropped.is_empty() {
        log::warn!("dropping collinear regressors: {}", dropped.join(", "));
    }
    let clusters = cluster_codes(ds, opts.cluster);
    let vcov = cluster_robust_vcov(&fit, &clusters)?;
    let cluster_count = clusters.iter().max().map_or(0, |m| m + 1);
    let cond = fit.condition_estimate.to_f64_lossy();
    let mut notes = Vec::new();
    if cond > CONDITION_WARN {
        notes.push(format!("ill-conditioned design (condition estimate {cond:.3e})"));
        log::warn!("ill-conditioned design (condition estimate {cond:.3e})");
    }
    Ok(EstimateResult {
        spec: "twfe".into(),
        names: fit.kept.iter().map(|&j| design.names[j].clone()).collect(),
        coef: fit.coef,
        vcov,
        nobs: n,
        cluster_count,
        reference_label: None,
        diagnostics: Diagnostics {
            dropped,
            fe_sweeps: demeaned.sweeps,
            condition_estimate: cond,
            bins: Vec::new(),
            notes,
        },
    })
}

/// `twfe_ols` with the single treatment regressor `D_it`.
pub fn twfe_did<T: Scalar>(ds: &PanelDataset<T>, opts: &EstimateOptions) -> Result<EstimateResult<T>> {
    let design = DesignMatrix::treatment(ds, opts.fixed_effects)?;
    twfe_ols(ds, &design, opts)
}
