//! Closed-form demand under a noisy match-value signal.
//!
//! A consumer with prior mean `p` sees a signal of informativeness `θ` and
//! buys when the perceived value `θ·m + (1−θ)·p` reaches the threshold `τ`,
//! with `m ~ Uniform(0, 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandParams<T> {
    /// Prior mean of the match value, in (0, 1).
    pub prior: T,
    /// Signal informativeness, in (0, 1].
    pub theta: T,
    /// Purchase threshold, in (0, 1).
    pub tau: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandRegime {
    /// `τ ≤ (1−θ)p`: every consumer buys.
    AllBuy,
    Interior,
    /// `τ ≥ θ + (1−θ)p`: nobody buys.
    NoneBuy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparativeStatics<T> {
    pub d_demand_d_theta: T,
    pub d2_demand_d_theta_d_prior: T,
}

impl<T: Scalar> DemandParams<T> {
    pub fn new(prior: T, theta: T, tau: T) -> Result<Self> {
        let (zero, one) = (T::zero(), T::one());
        let open = |v: T| v > zero && v < one;
        if !open(prior) {
            return Err(Error::Input(format!("prior p must lie in (0,1), got {prior}")));
        }
        if !(theta > zero && theta <= one) {
            return Err(Error::Input(format!("informativeness theta must lie in (0,1], got {theta}")));
        }
        if !open(tau) {
            return Err(Error::Input(format!("threshold tau must lie in (0,1), got {tau}")));
        }
        Ok(Self { prior, theta, tau })
    }

    /// Lower and upper ends `((1−θ)p, θ+(1−θ)p)` of the interior regime.
    pub fn interior_bounds(&self) -> (T, T) {
        let lo = (T::one() - self.theta) * self.prior;
        (lo, lo + self.theta)
    }

    pub fn regime(&self) -> DemandRegime {
        let (lo, hi) = self.interior_bounds();
        if self.tau <= lo {
            DemandRegime::AllBuy
        } else if self.tau >= hi {
            DemandRegime::NoneBuy
        } else {
            DemandRegime::Interior
        }
    }
}

/// Share of consumers who buy: `1 − (τ − (1−θ)p)/θ`, clamped to `[0, 1]`.
pub fn demand<T: Scalar>(params: &DemandParams<T>) -> T {
    match params.regime() {
        DemandRegime::AllBuy => T::one(),
        DemandRegime::NoneBuy => T::zero(),
        DemandRegime::Interior => {
            let (lo, _) = params.interior_bounds();
            T::one() - (params.tau - lo) / params.theta
        }
    }
}

/// `dD/dθ = (τ − p)/θ²` and `∂²D/∂θ∂p = −1/θ²`; defined in the interior only.
pub fn demand_comparative_statics<T: Scalar>(params: &DemandParams<T>) -> Result<ComparativeStatics<T>> {
    if params.regime() != DemandRegime::Interior {
        return Err(Error::Input(format!(
            "comparative statics need the interior regime, got {:?}",
            params.regime()
        )));
    }
    let t2 = params.theta * params.theta;
    Ok(ComparativeStatics {
        d_demand_d_theta: (params.tau - params.prior) / t2,
        d2_demand_d_theta_d_prior: -T::one() / t2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(prior: f64, theta: f64, tau: f64) -> DemandParams<f64> {
        DemandParams::new(prior, theta, tau).unwrap()
    }

    #[test]
    fn worked_values() {
        assert!((demand(&p(0.5, 0.5, 0.6)) - 0.3).abs() < 1e-15);
        assert!((demand(&p(0.3, 1.0, 0.6)) - 0.4).abs() < 1e-15);
        let q = p(0.4, 0.5, 0.5 + 0.5 * 0.4);
        assert_eq!(q.regime(), DemandRegime::NoneBuy);
        assert_eq!(demand(&q), 0.0);
        let cs = demand_comparative_statics(&p(0.5, 0.5, 0.6)).unwrap();
        assert!((cs.d_demand_d_theta - 0.4).abs() < 1e-12);
        assert!((cs.d2_demand_d_theta_d_prior + 4.0).abs() < 1e-12);
    }

    #[test]
    fn theta_doubling_quarters_derivatives() {
        let a = demand_comparative_statics(&p(0.5, 0.3, 0.55)).unwrap();
        let b = demand_comparative_statics(&p(0.5, 0.6, 0.55)).unwrap();
        assert!((b.d_demand_d_theta - a.d_demand_d_theta / 4.0).abs() < 1e-12);
        assert!((b.d2_demand_d_theta_d_prior - a.d2_demand_d_theta_d_prior / 4.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_and_boundary_errors() {
        assert!(DemandParams::new(0.0, 0.5, 0.5).is_err());
        assert!(DemandParams::new(0.5, 0.0, 0.5).is_err());
        assert!(DemandParams::new(0.5, 1.2, 0.5).is_err());
        assert!(DemandParams::new(0.5, 0.5, 1.0).is_err());
        assert!(demand_comparative_statics(&p(0.9, 0.1, 0.05)).is_err());
    }

    #[test]
    fn continuous_at_both_boundaries() {
        for &(prior, theta) in &[(0.2, 0.3), (0.7, 0.9), (0.5, 0.05)] {
            let q = p(prior, theta, 0.5);
            let (lo, hi) = q.interior_bounds();
            let d = 1e-13 * theta;
            for (b, inside, outside) in [(lo, lo + d, lo - d), (hi, hi - d, hi + d)] {
                if b <= 0.0 || b >= 1.0 || outside <= 0.0 || outside >= 1.0 {
                    continue;
                }
                let d_in = demand(&p(prior, theta, inside));
                let d_out = demand(&p(prior, theta, outside));
                assert!((d_in - d_out).abs() < 1e-12, "jump at {b}");
            }
        }
    }

    proptest! {
        #[test]
        fn clamped_to_unit_interval(prior in 0.01f64..0.99, theta in 0.01f64..=1.0, tau in 0.01f64..0.99) {
            let d = demand(&p(prior, theta, tau));
            prop_assert!((0.0..=1.0).contains(&d));
        }
    }
}
