use crate::error::{Error, Result};
use crate::panel::{PanelDataset, PopularityFlag};
use crate::scalar::Scalar;

use super::result::EstimateResult;
use super::twfe::{indicator, twfe_ols, DesignMatrix, EstimateOptions, TREAT_POST};

/// Regressor names for a moderator: `(D×M, Post×M)`.
pub fn interaction_names(moderator: PopularityFlag) -> (String, String) {
    let m = moderator.column();
    (format!("{TREAT_POST}_x_{m}"), format!("post_x_{m}"))
}

/// Treatment effect heterogeneity by a binary moderator:
/// regressors `D_it`, `D_it × M_i` and `Post_t × M_i`.
pub fn interaction_did<T: Scalar>(
    ds: &PanelDataset<T>,
    moderator: PopularityFlag,
    opts: &EstimateOptions,
) -> Result<EstimateResult<T>> {
    let treated_levels: std::collections::BTreeSet<bool> = ds
        .observations()
        .iter()
        .filter(|o| o.treated)
        .map(|o| moderator.get(o))
        .collect();
    if treated_levels.len() < 2 {
        return Err(Error::Input(format!(
            "moderator `{}` takes a single value among treated units",
            moderator.column()
        )));
    }
    let design = interaction_design(ds, moderator, opts)?;
    let mut res = twfe_ols(ds, &design, opts)?;
    res.spec = format!("interaction_{}", moderator.column());
    Ok(res)
}

/// The interaction design without the two-level check; a constant
/// moderator leaves only `D_it` identifiable.
pub fn interaction_design<T: Scalar>(
    ds: &PanelDataset<T>,
    moderator: PopularityFlag,
    opts: &EstimateOptions,
) -> Result<DesignMatrix<T>> {
    let (dm, pm) = interaction_names(moderator);
    DesignMatrix::from_panel(
        ds,
        vec![
            (TREAT_POST.into(), indicator(ds, |o| o.treat_post())),
            (dm, indicator(ds, |o| o.treat_post() && moderator.get(o))),
            (pm, indicator(ds, |o| o.post && moderator.get(o))),
        ],
        opts.fixed_effects,
    )
}
