//! Planted-effect panel generator used as the estimator oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{PanelDataset, PanelObservation};
use crate::scalar::Scalar;

/// Data-generating process for a simulated unit×period panel.
///
/// Outside decay mode the log-outcome is
/// `L_it = alpha + u_i + g_t + effect_it + e_it` and the stored outcome is
/// `Y_it = exp(L_it) − 1`, so `ln(Y+1)` recovers `L_it` exactly.
///
/// The treatment effect of a treated unit at event time `k ≥ 0` is, in
/// order of precedence: `dose_effects[d−1]` for its post-policy decile `d`;
/// `popular_effect` for popular units; `event_effects[min(k, len−1)]`;
/// otherwise `beta_true`. `effect_fe_slope·u_i` is added on top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimPanelSpec {
    pub n_treated: usize,
    pub n_control: usize,
    /// Periods `0..periods`.
    pub periods: usize,
    pub policy_period: i64,
    pub alpha: f64,
    pub unit_fe_sd: f64,
    pub period_fe_sd: f64,
    pub noise_sd: f64,
    /// AR(1) coefficient of the noise within each unit (stationary start).
    pub noise_ar1: f64,
    pub beta_true: f64,
    pub event_effects: Option<Vec<f64>>,
    /// Ten per-decile effects. Treated units draw a post-policy decile
    /// uniformly; every other observation sits in decile 1.
    pub dose_effects: Option<Vec<f64>>,
    pub popular_effect: Option<f64>,
    pub effect_fe_slope: f64,
    /// Added to the unit effect of treated units.
    pub treated_fe_shift: f64,
    /// Decay mode: `Y_it = A·e^{−rate·(t + decay_offset)}·e^{u_i + D·effect + e_it}`
    /// with `A` from `decay_levels` (treated, control).
    pub decay_rate: Option<f64>,
    pub decay_offset: f64,
    pub decay_levels: (f64, f64),
    /// Release dates are spread uniformly over this many months before period 0.
    pub max_release_offset_months: u32,
    pub seed: u64,
}

impl Default for SimPanelSpec {
    fn default() -> Self {
        Self {
            n_treated: 50,
            n_control: 50,
            periods: 18,
            policy_period: 9,
            alpha: 5.0,
            unit_fe_sd: 0.5,
            period_fe_sd: 0.1,
            noise_sd: 0.1,
            noise_ar1: 0.0,
            beta_true: 0.05,
            event_effects: None,
            dose_effects: None,
            popular_effect: None,
            effect_fe_slope: 0.0,
            treated_fe_shift: 0.0,
            decay_rate: None,
            decay_offset: 0.0,
            decay_levels: (20.0, 10.0),
            max_release_offset_months: 120,
            seed: 0,
        }
    }
}

/// The planted parameters behind one simulated panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTruth {
    pub beta_true: f64,
    /// Mean effect over treated post-policy observations.
    pub att: f64,
    /// Mean effect over treated units at the policy period.
    pub switch_att: f64,
    /// Mean treated effect per event time `0..periods−policy`.
    pub effect_by_event_time: Vec<f64>,
    /// `dose_effects[k] − dose_effects[0]`, the decile-1-relative contrasts.
    pub dose_contrasts: Option<Vec<f64>>,
    /// Log-outcomes that fell below zero and were clamped.
    pub clamped: usize,
    pub seed: u64,
}

impl SimPanelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_treated == 0 || self.n_control == 0 {
            return Err(Error::Input("need at least one treated and one control unit".into()));
        }
        if self.periods < 2 {
            return Err(Error::Input("need at least two periods".into()));
        }
        if self.policy_period < 1 || self.policy_period >= self.periods as i64 {
            return Err(Error::Input(format!(
                "policy period {} must be interior to 0..{}",
                self.policy_period, self.periods
            )));
        }
        for (name, v) in [
            ("unit_fe_sd", self.unit_fe_sd),
            ("period_fe_sd", self.period_fe_sd),
            ("noise_sd", self.noise_sd),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Input(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        if !(self.noise_ar1.abs() < 1.0) {
            return Err(Error::Input(format!("noise_ar1 must lie in (-1, 1), got {}", self.noise_ar1)));
        }
        if let Some(d) = &self.dose_effects {
            if d.len() != 10 {
                return Err(Error::Input(format!("dose_effects needs 10 entries, got {}", d.len())));
            }
        }
        if matches!(&self.event_effects, Some(e) if e.is_empty()) {
            return Err(Error::Input("event_effects is empty".into()));
        }
        if let Some(r) = self.decay_rate {
            if !(r >= 0.0) || self.decay_levels.0 <= 0.0 || self.decay_levels.1 <= 0.0 {
                return Err(Error::Input("decay mode needs a nonnegative rate and positive levels".into()));
            }
        }
        Ok(())
    }

    fn base_effect(&self, popular: bool, k: usize) -> f64 {
        match (&self.popular_effect, &self.event_effects) {
            (Some(p), _) if popular => *p,
            (_, Some(e)) => e[k.min(e.len() - 1)],
            _ => self.beta_true,
        }
    }
}

fn gauss(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    if sd == 0.0 {
        0.0
    } else {
        Normal::new(0.0, sd).expect("finite sd").sample(rng)
    }
}

/// Draw a panel from `spec`. Bit-reproducible for a fixed seed.
///
/// Units are `tr00000..` (treated) then `co00000..`; each unit is its own
/// cluster. Every second unit is popular; artists group consecutive pairs of
/// units and alternate in popularity.
pub fn simulate_panel<T: Scalar>(spec: &SimPanelSpec) -> Result<(PanelDataset<T>, SimTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_units = spec.n_treated + spec.n_control;
    let t_n = spec.periods;
    let policy = spec.policy_period;
    let post_len = t_n - policy as usize;

    let period_fe: Vec<f64> = (0..t_n).map(|_| gauss(&mut rng, spec.period_fe_sd)).collect();
    let innov_sd = spec.noise_sd * (1.0 - spec.noise_ar1 * spec.noise_ar1).sqrt();

    let mut rows = Vec::with_capacity(n_units * t_n);
    let mut clamped = 0usize;
    let mut effect_sum_by_k = vec![0.0; post_len];

    for idx in 0..n_units {
        let treated = idx < spec.n_treated;
        let local = if treated { idx } else { idx - spec.n_treated };
        let unit_id = format!("{}{local:05}", if treated { "tr" } else { "co" });
        let popular_unit = local % 2 == 1;
        let popular_artist = (local / 2) % 2 == 1;
        let u = gauss(&mut rng, spec.unit_fe_sd) + if treated { spec.treated_fe_shift } else { 0.0 };
        let release_offset = rng.random_range(0..=spec.max_release_offset_months);
        let post_decile: u8 = if spec.dose_effects.is_some() && treated {
            rng.random_range(1..=10)
        } else {
            1
        };
        let mut e = gauss(&mut rng, spec.noise_sd);
        for t in 0..t_n {
            if t > 0 {
                e = spec.noise_ar1 * e + gauss(&mut rng, innov_sd);
            }
            let period = t as i64;
            let post = period >= policy;
            let effect = if treated && post {
                let k = (period - policy) as usize;
                let base = match &spec.dose_effects {
                    Some(d) => d[post_decile as usize - 1],
                    None => spec.base_effect(popular_unit, k),
                };
                let eff = base + spec.effect_fe_slope * u;
                effect_sum_by_k[k] += eff;
                eff
            } else {
                0.0
            };
            let outcome = match spec.decay_rate {
                Some(rate) => {
                    let a = if treated { spec.decay_levels.0 } else { spec.decay_levels.1 };
                    a * (-rate * (t as f64 + spec.decay_offset)).exp() * (u + period_fe[t] + effect + e).exp()
                }
                None => {
                    let mut l = spec.alpha + u + period_fe[t] + effect + e;
                    if l < 0.0 {
                        l = 0.0;
                        clamped += 1;
                    }
                    l.exp_m1()
                }
            };
            rows.push(PanelObservation {
                unit_id: unit_id.clone(),
                period,
                outcome: T::lit(outcome),
                treated,
                post,
                age_years: (release_offset + t as u32) / 12,
                cluster_id: unit_id.clone(),
                popular_unit,
                popular_artist,
                dose_decile: spec
                    .dose_effects
                    .as_ref()
                    .map(|_| if treated && post { post_decile } else { 1 }),
            });
        }
    }
    if clamped > 0 {
        log::warn!("{clamped} simulated log-outcomes below zero were clamped");
    }
    let n_tr = spec.n_treated as f64;
    let effect_by_event_time: Vec<f64> = effect_sum_by_k.iter().map(|s| s / n_tr).collect();
    let truth = SimTruth {
        beta_true: spec.beta_true,
        att: effect_by_event_time.iter().sum::<f64>() / post_len as f64,
        switch_att: effect_by_event_time[0],
        effect_by_event_time,
        dose_contrasts: spec
            .dose_effects
            .as_ref()
            .map(|d| d.iter().map(|v| v - d[0]).collect()),
        clamped,
        seed: spec.seed,
    };
    Ok((PanelDataset::new(rows, policy, false)?, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::did::{twfe_did, EstimateOptions};

    #[test]
    fn noiseless_twfe_recovers_beta() {
        let spec = SimPanelSpec {
            noise_sd: 0.0,
            beta_true: 0.05,
            seed: 1,
            ..SimPanelSpec::default()
        };
        let (ds, truth) = simulate_panel::<f64>(&spec).unwrap();
        let r = twfe_did(&ds, &EstimateOptions::default()).unwrap();
        assert!((r.coef[0] - 0.05).abs() < 1e-10, "{}", r.coef[0]);
        assert!((truth.att - 0.05).abs() < 1e-15);
        assert_eq!(ds.len(), 100 * 18);
    }

    #[test]
    fn bit_reproducible() {
        let spec = SimPanelSpec {
            seed: 77,
            noise_ar1: 0.5,
            ..SimPanelSpec::default()
        };
        let (a, ta) = simulate_panel::<f64>(&spec).unwrap();
        let (b, tb) = simulate_panel::<f64>(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        let (c, _) = simulate_panel::<f64>(&SimPanelSpec { seed: 78, ..spec }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn decay_mode_produces_negative_pretrends() {
        use crate::did::{event_study, EventWindow};
        let spec = SimPanelSpec {
            n_treated: 200,
            n_control: 200,
            beta_true: 0.0,
            noise_sd: 0.01,
            unit_fe_sd: 0.0,
            period_fe_sd: 0.0,
            decay_rate: Some(0.5),
            decay_offset: 0.0,
            seed: 3,
            ..SimPanelSpec::default()
        };
        let (ds, _) = simulate_panel::<f64>(&spec).unwrap();
        let r = event_study(&ds, EventWindow::default(), &EstimateOptions::default()).unwrap();
        // relative to k=-1, earlier leads sit above zero: the gap is closing
        let lead = r.coef_of("k=-9").unwrap();
        assert!(lead > 0.0, "lead {lead}");
        let lag = r.coef_of("k=8").unwrap();
        assert!(lag < 0.0, "lag {lag}");
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in [
            SimPanelSpec { n_treated: 0, ..SimPanelSpec::default() },
            SimPanelSpec { policy_period: 0, ..SimPanelSpec::default() },
            SimPanelSpec { noise_ar1: 1.0, ..SimPanelSpec::default() },
            SimPanelSpec { dose_effects: Some(vec![0.0; 3]), ..SimPanelSpec::default() },
        ] {
            assert!(matches!(simulate_panel::<f64>(&bad), Err(Error::Input(_))));
        }
    }

    #[test]
    fn dose_mode_deciles() {
        let (ds, truth) = simulate_panel::<f64>(&SimPanelSpec {
            dose_effects: Some((0..10).map(|k| 0.006 * k as f64 + 0.01).collect()),
            seed: 2,
            ..SimPanelSpec::default()
        })
        .unwrap();
        assert!(ds.observations().iter().all(|o| o.dose_decile.is_some()));
        assert!(ds
            .observations()
            .iter()
            .filter(|o| !o.treat_post())
            .all(|o| o.dose_decile == Some(1)));
        let c = truth.dose_contrasts.unwrap();
        assert!(c[0] == 0.0 && (c[9] - 0.054).abs() < 1e-12);
    }
}
