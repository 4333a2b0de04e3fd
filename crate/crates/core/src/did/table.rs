//! Plot-ready per-bin tables for event-study and dose-response fits.

use serde::Serialize;

use crate::error::Result;
use crate::scalar::Scalar;

use super::result::EstimateResult;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinRow {
    pub k: i64,
    pub estimate: f64,
    pub lo95: f64,
    pub hi95: f64,
    pub n_treated_in_bin: usize,
}

/// One row per estimated bin, ordered by `k`. The reference bin and bins
/// dropped as collinear carry no coefficient and are omitted.
pub fn bin_rows<T: Scalar>(result: &EstimateResult<T>) -> Vec<BinRow> {
    result
        .diagnostics
        .bins
        .iter()
        .filter(|b| !b.is_reference)
        .filter_map(|b| {
            let i = result.index(&b.name)?;
            let (lo, hi) = result.ci95(i);
            Some(BinRow {
                k: b.k,
                estimate: result.coef[i].to_f64_lossy(),
                lo95: lo.to_f64_lossy(),
                hi95: hi.to_f64_lossy(),
                n_treated_in_bin: b.n_treated_in_bin,
            })
        })
        .collect()
}

/// Write `k,estimate,lo95,hi95,n_treated_in_bin` CSV.
pub fn emit_bin_table<T: Scalar, W: std::io::Write>(result: &EstimateResult<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in bin_rows(result) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::did::{event_study, EstimateOptions, EventWindow};
    use crate::stats::Z95;
    use crate::theory::{simulate_panel, SimPanelSpec};

    #[test]
    fn event_table_omits_reference() {
        let (ds, _) = simulate_panel::<f64>(&SimPanelSpec {
            n_treated: 30,
            n_control: 30,
            seed: 4,
            ..SimPanelSpec::default()
        })
        .unwrap();
        let res = event_study(&ds, EventWindow::default(), &EstimateOptions::default()).unwrap();
        let rows = bin_rows(&res);
        assert_eq!(rows.len(), 17);
        assert!(rows.iter().all(|r| r.k != -1));
        for (r, name) in rows.iter().zip(&res.names) {
            let se = res.se_of(name).unwrap();
            assert!((r.lo95 - (r.estimate - Z95 * se)).abs() < 1e-9);
        }
        let mut buf = Vec::new();
        emit_bin_table(&res, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,estimate,lo95,hi95,n_treated_in_bin\n"));
        assert_eq!(text.lines().count(), 18);
        assert!(!text.lines().any(|l| l.starts_with("-1,")));
    }
}
