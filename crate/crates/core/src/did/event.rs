//! Event-study regression on leads and lags of treatment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::PanelDataset;
use crate::scalar::Scalar;

use super::result::{BinInfo, EstimateResult};
use super::twfe::{indicator, twfe_ols, DesignMatrix, EstimateOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventWindow {
    pub k_min: i64,
    pub k_max: i64,
    /// Event time whose coefficient is normalised to zero.
    pub reference_k: i64,
}

impl Default for EventWindow {
    fn default() -> Self {
        Self {
            k_min: -9,
            k_max: 8,
            reference_k: -1,
        }
    }
}

pub fn event_label(k: i64) -> String {
    format!("k={k}")
}

/// Fit `ln(Y+1) = Σ_{k≠ref} β_k Treated_i·1[t - P = k] + FE`.
///
/// Observations whose event time falls outside the window carry no event
/// dummy. Every coefficient is relative to `reference_k`.
pub fn event_study<T: Scalar>(
    ds: &PanelDataset<T>,
    window: EventWindow,
    opts: &EstimateOptions,
) -> Result<EstimateResult<T>> {
    let EventWindow {
        k_min,
        k_max,
        reference_k,
    } = window;
    if k_min > k_max {
        return Err(Error::Input(format!("empty event window [{k_min}, {k_max}]")));
    }
    if !(k_min..=k_max).contains(&reference_k) {
        return Err(Error::Input(format!(
            "reference event time {reference_k} outside window [{k_min}, {k_max}]"
        )));
    }
    let policy = ds.policy_period();
    let (first, last) = (ds.periods()[0], *ds.periods().last().expect("nonempty"));
    if policy + k_min < first || policy + k_max > last {
        return Err(Error::Input(format!(
            "event window [{k_min}, {k_max}] around period {policy} not covered by periods {first}..={last}"
        )));
    }

    let mut columns = Vec::new();
    let mut bins = Vec::new();
    for k in k_min..=k_max {
        let n_treated = ds
            .observations()
            .iter()
            .filter(|o| o.treated && ds.event_time(o) == k)
            .count();
        bins.push(BinInfo {
            name: event_label(k),
            k,
            n_treated_in_bin: n_treated,
            is_reference: k == reference_k,
            observed_as_treatment: n_treated > 0,
        });
        if k != reference_k {
            columns.push((
                event_label(k),
                indicator(ds, |o| o.treated && o.period - policy == k),
            ));
        }
    }
    let design = DesignMatrix::from_panel(ds, columns, opts.fixed_effects)?;
    let mut res = twfe_ols(ds, &design, opts)?;
    res.spec = "event_study".into();
    res.reference_label = Some(event_label(reference_k));
    res.diagnostics.bins = bins;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::{simulate_panel, SimPanelSpec};

    fn spec(seed: u64) -> SimPanelSpec {
        SimPanelSpec {
            n_treated: 60,
            n_control: 60,
            periods: 18,
            policy_period: 9,
            noise_sd: 0.1,
            seed,
            ..SimPanelSpec::default()
        }
    }

    #[test]
    fn reference_outside_window_is_rejected() {
        let (ds, _) = simulate_panel::<f64>(&spec(1)).unwrap();
        let w = EventWindow {
            reference_k: 12,
            ..EventWindow::default()
        };
        assert!(matches!(event_study(&ds, w, &EstimateOptions::default()), Err(Error::Input(_))));
    }

    #[test]
    fn window_must_be_covered() {
        let (ds, _) = simulate_panel::<f64>(&spec(1)).unwrap();
        let w = EventWindow {
            k_min: -12,
            ..EventWindow::default()
        };
        assert!(event_study(&ds, w, &EstimateOptions::default()).is_err());
    }

    #[test]
    fn reparameterisation_shifts_by_old_k0() {
        let (ds, _) = simulate_panel::<f64>(&spec(3)).unwrap();
        let opts = EstimateOptions::default();
        let base = event_study(&ds, EventWindow::default(), &opts).unwrap();
        let alt = event_study(
            &ds,
            EventWindow {
                reference_k: 0,
                ..EventWindow::default()
            },
            &opts,
        )
        .unwrap();
        let b0 = base.coef_of("k=0").unwrap();
        for k in -9..=8 {
            let old = if k == -1 { 0.0 } else { base.coef_of(&event_label(k)).unwrap() };
            let new = if k == 0 { 0.0 } else { alt.coef_of(&event_label(k)).unwrap() };
            assert!((new - (old - b0)).abs() < 1e-9, "k={k}: {new} vs {}", old - b0);
        }
        assert_eq!(base.names.len(), 17);
        assert!(base.index("k=-1").is_none());
        assert_eq!(base.reference_label.as_deref(), Some("k=-1"));
    }
}
