//! Heterogeneity-robust switcher estimator for a single common adoption date.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::panel::PanelDataset;
use crate::scalar::Scalar;
use crate::stats::{mean, sample_variance};

use super::result::{Diagnostics, EstimateResult};

pub const DID_M: &str = "did_m";

/// Instantaneous switcher effect at the adoption date: the mean change in
/// `ln(Y+1)` from `P-1` to `P` among treated units minus the same among
/// controls. Units lacking either period are skipped. The standard error
/// is the unit-clustered (influence-function) variance of a difference in
/// means.
///
/// Under dynamic effects this is the switch-period effect only and need not
/// match the pooled post-period TWFE coefficient.
pub fn did_m<T: Scalar>(ds: &PanelDataset<T>) -> Result<EstimateResult<T>> {
    let policy = ds.policy_period();
    let pre = policy - 1;
    if !ds.periods().contains(&pre) {
        return Err(Error::Input(format!(
            "no period {pre} immediately before the adoption period {policy}"
        )));
    }
    let mut at: HashMap<&str, (Option<T>, Option<T>, bool)> = HashMap::new();
    let mut order: Vec<&str> = Vec::new();
    for o in ds.observations() {
        if o.period != pre && o.period != policy {
            continue;
        }
        let e = at.entry(o.unit_id.as_str()).or_insert_with(|| {
            order.push(o.unit_id.as_str());
            (None, None, o.treated)
        });
        let y = o.outcome.ln_1p();
        if o.period == pre {
            e.0 = Some(y);
        } else {
            e.1 = Some(y);
        }
    }
    let (mut d_tr, mut d_co) = (Vec::new(), Vec::new());
    let mut skipped = 0usize;
    for u in &order {
        match at[u] {
            (Some(a), Some(b), treated) => {
                if treated {
                    d_tr.push(b - a)
                } else {
                    d_co.push(b - a)
                }
            }
            _ => skipped += 1,
        }
    }
    if d_tr.len() < 2 || d_co.len() < 2 {
        return Err(Error::Input(format!(
            "need at least 2 treated and 2 control units observed at both {pre} and {policy} (have {} and {})",
            d_tr.len(),
            d_co.len()
        )));
    }
    let est = mean(&d_tr) - mean(&d_co);
    let var = sample_variance(&d_tr) / T::from_usize_lossy(d_tr.len())
        + sample_variance(&d_co) / T::from_usize_lossy(d_co.len());
    let mut vcov = Matrix::zeros(1, 1);
    vcov[(0, 0)] = var;
    let mut notes = Vec::new();
    if skipped > 0 {
        notes.push(format!("{skipped} units lack period {pre} or {policy} and were skipped"));
    }
    let n_units = d_tr.len() + d_co.len();
    Ok(EstimateResult {
        spec: DID_M.into(),
        names: vec![DID_M.into()],
        coef: vec![est],
        vcov,
        nobs: 2 * n_units,
        cluster_count: n_units,
        reference_label: None,
        diagnostics: Diagnostics {
            notes,
            ..Diagnostics::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::did::twfe::{twfe_ols, DesignMatrix, EstimateOptions, FixedEffects};
    use crate::theory::{simulate_panel, SimPanelSpec};

    #[test]
    fn zero_effect_is_near_zero() {
        let (ds, _) = simulate_panel::<f64>(&SimPanelSpec {
            n_treated: 500,
            n_control: 500,
            noise_sd: 0.05,
            beta_true: 0.0,
            seed: 2,
            ..SimPanelSpec::default()
        })
        .unwrap();
        let r = did_m(&ds).unwrap();
        assert!(r.coef[0].abs() < 4.0 * r.se(0));
    }

    #[test]
    fn needs_pre_period() {
        let (ds, _) = simulate_panel::<f64>(&SimPanelSpec::default()).unwrap();
        let rows: Vec<_> = ds
            .observations()
            .iter()
            .filter(|o| o.period >= ds.policy_period())
            .cloned()
            .collect();
        let post_only = PanelDataset::new(rows, ds.policy_period(), false).unwrap();
        assert!(matches!(did_m(&post_only), Err(Error::Input(_))));
    }

    #[test]
    fn heterogeneous_effects_correlated_with_fe() {
        // effects rise with the unit FE and treated units have higher FEs
        let spec = SimPanelSpec {
            n_treated: 800,
            n_control: 800,
            noise_sd: 0.05,
            beta_true: 0.04,
            effect_fe_slope: 0.03,
            treated_fe_shift: 1.0,
            seed: 8,
            ..SimPanelSpec::default()
        };
        let (ds, truth) = simulate_panel::<f64>(&spec).unwrap();
        let dm = did_m(&ds).unwrap();
        assert!((dm.coef[0] - truth.switch_att).abs() < 4.0 * dm.se(0));

        // pooled OLS of ln(Y+1) on D_it alone, with only an intercept
        let naive = twfe_ols(
            &ds,
            &DesignMatrix::treatment(&ds, FixedEffects::NONE).unwrap(),
            &EstimateOptions {
                fixed_effects: FixedEffects::NONE,
                ..EstimateOptions::default()
            },
        )
        .unwrap();
        assert!((naive.coef[0] - truth.switch_att).abs() > 0.3);
    }
}
