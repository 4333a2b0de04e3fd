//! Two-unit taste-depreciation path `Sales_t = A·e^{−r·t}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{PanelDataset, PanelObservation};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DepreciationSpec {
    pub a_treated: f64,
    pub a_control: f64,
    pub rate: f64,
    /// Periods `0..horizon`.
    pub horizon: usize,
    /// Pseudo policy period; defaults to the middle of the horizon.
    pub policy_period: Option<i64>,
}

impl Default for DepreciationSpec {
    fn default() -> Self {
        Self {
            a_treated: 20.0,
            a_control: 10.0,
            rate: 0.5,
            horizon: 25,
            policy_period: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepreciationPath<T> {
    pub periods: Vec<i64>,
    pub policy_period: i64,
    pub sales_treated: Vec<T>,
    pub sales_control: Vec<T>,
    pub log_treated: Vec<T>,
    pub log_control: Vec<T>,
}

impl<T: Scalar> DepreciationPath<T> {
    /// `ln(1+S_treated) − ln(1+S_control)` per period.
    pub fn log_gap(&self) -> Vec<T> {
        self.log_treated.iter().zip(&self.log_control).map(|(&a, &b)| a - b).collect()
    }

    /// The two series as a balanced panel (`treated` and `control` units).
    pub fn panel(&self) -> Result<PanelDataset<T>> {
        let mut rows = Vec::with_capacity(2 * self.periods.len());
        for (unit, treated, sales) in [("treated", true, &self.sales_treated), ("control", false, &self.sales_control)] {
            for (&t, &y) in self.periods.iter().zip(sales) {
                rows.push(PanelObservation {
                    unit_id: unit.into(),
                    period: t,
                    outcome: y,
                    treated,
                    post: t >= self.policy_period,
                    age_years: 0,
                    cluster_id: unit.into(),
                    popular_unit: treated,
                    popular_artist: treated,
                    dose_decile: None,
                });
            }
        }
        PanelDataset::new(rows, self.policy_period, false)
    }
}

pub fn simulate_depreciation<T: Scalar>(spec: &DepreciationSpec) -> Result<DepreciationPath<T>> {
    if spec.horizon < 2 {
        return Err(Error::Input("depreciation horizon needs at least 2 periods".into()));
    }
    if !(spec.a_treated >= 0.0 && spec.a_control >= 0.0 && spec.rate >= 0.0) {
        return Err(Error::Input("levels and decay rate must be nonnegative".into()));
    }
    let policy = spec.policy_period.unwrap_or(spec.horizon as i64 / 2);
    if !(0..spec.horizon as i64).contains(&policy) {
        return Err(Error::Input(format!("policy period {policy} outside the horizon")));
    }
    let periods: Vec<i64> = (0..spec.horizon as i64).collect();
    let path = |a: f64| -> Vec<T> { periods.iter().map(|&t| T::lit(a * (-spec.rate * t as f64).exp())).collect() };
    let sales_treated = path(spec.a_treated);
    let sales_control = path(spec.a_control);
    let log = |v: &[T]| v.iter().map(|s| s.ln_1p()).collect();
    Ok(DepreciationPath {
        log_treated: log(&sales_treated),
        log_control: log(&sales_control),
        sales_treated,
        sales_control,
        periods,
        policy_period: policy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_levels_and_constant_ratio() {
        let p = simulate_depreciation::<f64>(&DepreciationSpec::default()).unwrap();
        assert_eq!((p.sales_treated[0], p.sales_control[0]), (20.0, 10.0));
        for (a, b) in p.sales_treated.iter().zip(&p.sales_control) {
            assert!((a / b - 2.0).abs() < 1e-12);
        }
        assert!((p.log_gap()[0] - (21f64.ln() - 11f64.ln())).abs() < 1e-15);
        assert_eq!(p.policy_period, 12);
    }

    #[test]
    fn log_gap_shrinks_monotonically() {
        let p = simulate_depreciation::<f64>(&DepreciationSpec::default()).unwrap();
        let g = p.log_gap();
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        let panel = p.panel().unwrap();
        assert_eq!(panel.len(), 50);
    }
}
