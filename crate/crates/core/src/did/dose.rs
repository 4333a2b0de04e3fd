//! Decile dose-response regression.

use crate::error::{Error, Result};
use crate::panel::PanelDataset;
use crate::scalar::Scalar;

use super::result::{BinInfo, EstimateResult};
use super::twfe::{indicator, twfe_ols, DesignMatrix, EstimateOptions};

pub const N_DECILES: u8 = 10;

pub fn decile_label(k: u8) -> String {
    format!("decile_{k}")
}

/// Regress `ln(Y+1)` on indicators of each observation's measured decile,
/// omitting `reference_decile`.
///
/// Deciles that no treated post-policy observation occupies are flagged in
/// `diagnostics.bins` (`observed_as_treatment = false`); their coefficients
/// are not driven by treatment variation. Indicator columns that are empty
/// or collinear are dropped.
pub fn dose_response<T: Scalar>(
    ds: &PanelDataset<T>,
    reference_decile: u8,
    opts: &EstimateOptions,
) -> Result<EstimateResult<T>> {
    if !(1..=N_DECILES).contains(&reference_decile) {
        return Err(Error::Input(format!("reference decile {reference_decile} outside 1..=10")));
    }
    let obs = ds.observations();
    if obs.iter().all(|o| o.dose_decile.is_none()) {
        return Err(Error::Input("dose_decile column is empty".into()));
    }
    if let Some(row) = obs.iter().position(|o| o.dose_decile.is_none()) {
        return Err(Error::Data(format!(
            "row {row} (unit {}) has no dose_decile; every observation needs a measured decile",
            obs[row].unit_id
        )));
    }

    let mut columns = Vec::new();
    let mut bins = Vec::new();
    for k in 1..=N_DECILES {
        let n_treated = obs
            .iter()
            .filter(|o| o.treat_post() && o.dose_decile == Some(k))
            .count();
        bins.push(BinInfo {
            name: decile_label(k),
            k: k as i64,
            n_treated_in_bin: n_treated,
            is_reference: k == reference_decile,
            observed_as_treatment: n_treated > 0,
        });
        if k != reference_decile && obs.iter().any(|o| o.dose_decile == Some(k)) {
            columns.push((decile_label(k), indicator(ds, |o| o.dose_decile == Some(k))));
        }
    }
    if columns.is_empty() {
        return Err(Error::Input("no decile besides the reference is observed".into()));
    }
    let design = DesignMatrix::from_panel(ds, columns, opts.fixed_effects)?;
    let mut res = twfe_ols(ds, &design, opts)?;
    res.spec = "dose_response".into();
    res.reference_label = Some(decile_label(reference_decile));
    let unobserved: Vec<String> = bins
        .iter()
        .filter(|b| !b.observed_as_treatment && !b.is_reference)
        .map(|b| b.name.clone())
        .collect();
    if !unobserved.is_empty() {
        res.diagnostics.notes.push(format!(
            "never observed as treatment (expected indistinguishable from zero): {}",
            unobserved.join(", ")
        ));
    }
    res.diagnostics.bins = bins;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::did::twfe::twfe_did;
    use crate::theory::{simulate_panel, SimPanelSpec};

    fn single_dose_panel(decile: u8) -> PanelDataset<f64> {
        let (ds, _) = simulate_panel::<f64>(&SimPanelSpec {
            n_treated: 40,
            n_control: 40,
            noise_sd: 0.2,
            beta_true: 0.05,
            seed: 9,
            ..SimPanelSpec::default()
        })
        .unwrap();
        let rows = ds
            .observations()
            .iter()
            .cloned()
            .map(|mut o| {
                o.dose_decile = Some(if o.treat_post() { decile } else { 1 });
                o
            })
            .collect();
        PanelDataset::new(rows, ds.policy_period(), false).unwrap()
    }

    #[test]
    fn single_dose_collapses_to_twfe() {
        let ds = single_dose_panel(7);
        let opts = EstimateOptions::default();
        let dose = dose_response(&ds, 1, &opts).unwrap();
        let twfe = twfe_did(&ds, &opts).unwrap();
        assert_eq!(dose.names, vec!["decile_7".to_string()]);
        assert!((dose.coef[0] - twfe.coef[0]).abs() < 1e-12);
        assert!((dose.se(0) - twfe.se(0)).abs() < 1e-12);
        let unobs = dose.diagnostics.bins.iter().filter(|b| !b.observed_as_treatment).count();
        assert_eq!(unobs, 9);
    }

    #[test]
    fn relabeling_permutes_coefficients() {
        let (ds, _) = simulate_panel::<f64>(&SimPanelSpec {
            n_treated: 80,
            n_control: 80,
            noise_sd: 0.1,
            dose_effects: Some((0..10).map(|k| 0.006 * k as f64).collect()),
            seed: 4,
            ..SimPanelSpec::default()
        })
        .unwrap();
        let opts = EstimateOptions::default();
        let base = dose_response(&ds, 1, &opts).unwrap();
        // swap labels 3 <-> 8
        let swap = |d: u8| match d {
            3 => 8,
            8 => 3,
            x => x,
        };
        let rows = ds
            .observations()
            .iter()
            .cloned()
            .map(|mut o| {
                o.dose_decile = o.dose_decile.map(swap);
                o
            })
            .collect();
        let swapped = PanelDataset::new(rows, ds.policy_period(), false).unwrap();
        let alt = dose_response(&swapped, 1, &opts).unwrap();
        for k in 2..=10u8 {
            let a = base.coef_of(&decile_label(k)).unwrap();
            let b = alt.coef_of(&decile_label(swap(k))).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_decile_column_is_input_error() {
        let (ds, _) = simulate_panel::<f64>(&SimPanelSpec::default()).unwrap();
        let rows = ds
            .observations()
            .iter()
            .cloned()
            .map(|mut o| {
                o.dose_decile = None;
                o
            })
            .collect();
        let ds = PanelDataset::new(rows, ds.policy_period(), false).unwrap();
        assert!(matches!(
            dose_response(&ds, 1, &EstimateOptions::default()),
            Err(Error::Input(_))
        ));
    }
}
