use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::stats::Z95;

/// Per-bin bookkeeping for event-study and dose-response fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinInfo {
    /// Coefficient name, or the reference label for the omitted bin.
    pub name: String,
    /// Event time or decile.
    pub k: i64,
    pub n_treated_in_bin: usize,
    pub is_reference: bool,
    /// False when no treated post-policy observation falls in the bin, so the
    /// coefficient is not identified from treatment variation.
    pub observed_as_treatment: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Regressors removed as collinear.
    pub dropped: Vec<String>,
    /// Demeaning sweeps used.
    pub fe_sweeps: usize,
    pub condition_estimate: f64,
    pub bins: Vec<BinInfo>,
    pub notes: Vec<String>,
}

/// Coefficients, their covariance and bookkeeping for one fitted specification.
#[derive(Debug, Clone)]
pub struct EstimateResult<T> {
    pub spec: String,
    pub names: Vec<String>,
    pub coef: Vec<T>,
    pub vcov: Matrix<T>,
    pub nobs: usize,
    pub cluster_count: usize,
    /// Normalised-away coefficient (e.g. `k=-1` or `decile_1`).
    pub reference_label: Option<String>,
    pub diagnostics: Diagnostics,
}

impl<T: Scalar> EstimateResult<T> {
    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn coef_of(&self, name: &str) -> Option<T> {
        self.index(name).map(|i| self.coef[i])
    }

    pub fn se(&self, i: usize) -> T {
        self.vcov[(i, i)].max(T::zero()).sqrt()
    }

    pub fn se_of(&self, name: &str) -> Option<T> {
        self.index(name).map(|i| self.se(i))
    }

    pub fn ci95(&self, i: usize) -> (T, T) {
        let h = T::lit(Z95) * self.se(i);
        (self.coef[i] - h, self.coef[i] + h)
    }

    /// JSON shape `{spec, coef:{name:{est,se,ci95}}, nobs, clusters, reference}`
    /// plus diagnostics.
    pub fn to_json(&self) -> Value {
        let mut coef = Map::new();
        for (i, name) in self.names.iter().enumerate() {
            let (lo, hi) = self.ci95(i);
            coef.insert(
                name.clone(),
                json!({
                    "est": self.coef[i].to_f64_lossy(),
                    "se": self.se(i).to_f64_lossy(),
                    "ci95": [lo.to_f64_lossy(), hi.to_f64_lossy()],
                }),
            );
        }
        json!({
            "spec": self.spec,
            "coef": coef,
            "nobs": self.nobs,
            "clusters": self.cluster_count,
            "reference": self.reference_label,
            "diagnostics": self.diagnostics,
        })
    }
}
