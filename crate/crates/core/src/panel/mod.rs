//! Panel data: catalog types, dataset construction rules and the
//! long-format unit × period dataset every estimator consumes.

mod catalog;
mod io;

pub use catalog::{
    assign_treatment, link_representative_track, lower_median, mark_popular_artists,
    mark_popular_units, screen_duration_range, select_artist_title_representative, Recording,
    Track, TreatmentStatus, DEFAULT_MAX_DURATION_RANGE_S,
};
pub use io::{read_panel_csv, write_panel_csv, PANEL_CSV_HEADER};

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `ln(y + 1)`, the outcome transform of the log-linear specifications.
pub fn log1_outcome<T: Scalar>(y: T) -> Result<T> {
    if !(y >= T::zero()) {
        return Err(Error::Input(format!("outcome must be nonnegative, got {y}")));
    }
    Ok(y.ln_1p())
}

/// One unit-period row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelObservation<T> {
    pub unit_id: String,
    pub period: i64,
    pub outcome: T,
    pub treated: bool,
    pub post: bool,
    pub age_years: u32,
    pub cluster_id: String,
    pub popular_unit: bool,
    pub popular_artist: bool,
    pub dose_decile: Option<u8>,
}

impl<T: Scalar> PanelObservation<T> {
    /// `Treated_i × Post_t`
    #[inline]
    pub fn treat_post(&self) -> bool {
        self.treated && self.post
    }
}

/// Which popularity indicator to split or interact on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopularityFlag {
    Unit,
    Artist,
}

impl PopularityFlag {
    pub fn column(self) -> &'static str {
        match self {
            PopularityFlag::Unit => "popular_unit",
            PopularityFlag::Artist => "popular_artist",
        }
    }

    pub fn get<T>(self, o: &PanelObservation<T>) -> bool {
        match self {
            PopularityFlag::Unit => o.popular_unit,
            PopularityFlag::Artist => o.popular_artist,
        }
    }
}

impl std::str::FromStr for PopularityFlag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" | "popular_unit" => Ok(PopularityFlag::Unit),
            "artist" | "popular_artist" => Ok(PopularityFlag::Artist),
            other => Err(Error::Input(format!("unknown popularity flag `{other}`"))),
        }
    }
}

/// Long-format panel with a single common policy period.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset<T> {
    observations: Vec<PanelObservation<T>>,
    periods: Vec<i64>,
    policy_period: i64,
    balanced: bool,
}

impl<T: Scalar> PanelDataset<T> {
    /// Validate and build a dataset. Units missing periods are rejected
    /// unless `allow_unbalanced` is set.
    pub fn new(
        observations: Vec<PanelObservation<T>>,
        policy_period: i64,
        allow_unbalanced: bool,
    ) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::Data("panel has no observations".into()));
        }
        let periods: Vec<i64> = observations
            .iter()
            .map(|o| o.period)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if !periods.contains(&policy_period) {
            return Err(Error::Data(format!(
                "policy period {policy_period} is not one of the panel periods"
            )));
        }

        let mut seen: HashMap<(&str, i64), usize> = HashMap::with_capacity(observations.len());
        let mut treated_of: HashMap<&str, bool> = HashMap::new();
        let mut per_unit: HashMap<&str, usize> = HashMap::new();
        for (row, o) in observations.iter().enumerate() {
            if !o.outcome.is_finite() || o.outcome < T::zero() {
                return Err(Error::Data(format!(
                    "row {row}: outcome must be finite and nonnegative, got {}",
                    o.outcome
                )));
            }
            if let Some(d) = o.dose_decile {
                if !(1..=10).contains(&d) {
                    return Err(Error::Data(format!("row {row}: dose_decile {d} outside 1..10")));
                }
            }
            if o.post != (o.period >= policy_period) {
                return Err(Error::Data(format!(
                    "row {row}: post={} inconsistent with period {} and policy period {policy_period}",
                    o.post as u8, o.period
                )));
            }
            if let Some(prev) = seen.insert((o.unit_id.as_str(), o.period), row) {
                return Err(Error::Data(format!(
                    "duplicate (unit_id, period) = ({}, {}) at rows {prev} and {row}",
                    o.unit_id, o.period
                )));
            }
            match treated_of.insert(o.unit_id.as_str(), o.treated) {
                Some(t) if t != o.treated => {
                    return Err(Error::Data(format!(
                        "unit {} switches treated status across rows",
                        o.unit_id
                    )))
                }
                _ => {}
            }
            *per_unit.entry(o.unit_id.as_str()).or_default() += 1;
        }
        let balanced = per_unit.values().all(|&c| c == periods.len());
        if !balanced && !allow_unbalanced {
            let mut short: Vec<&str> = per_unit
                .iter()
                .filter(|(_, &c)| c != periods.len())
                .map(|(u, _)| *u)
                .collect();
            short.sort_unstable();
            short.truncate(5);
            return Err(Error::Data(format!(
                "unbalanced panel: units [{}] miss periods (pass --allow-unbalanced to accept)",
                short.join(", ")
            )));
        }
        Ok(Self {
            observations,
            periods,
            policy_period,
            balanced,
        })
    }

    pub fn observations(&self) -> &[PanelObservation<T>] {
        &self.observations
    }

    pub fn periods(&self) -> &[i64] {
        &self.periods
    }

    pub fn policy_period(&self) -> i64 {
        self.policy_period
    }

    pub fn is_balanced(&self) -> bool {
        self.balanced
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Unit ids in order of first appearance.
    pub fn unit_ids(&self) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        self.observations
            .iter()
            .filter(|o| seen.insert(o.unit_id.as_str()))
            .map(|o| o.unit_id.as_str())
            .collect()
    }

    /// Rows satisfying `keep`, sharing this dataset's periods and policy date.
    pub fn filter(&self, mut keep: impl FnMut(&PanelObservation<T>) -> bool) -> Self {
        let observations: Vec<_> = self.observations.iter().filter(|o| keep(o)).cloned().collect();
        Self {
            observations,
            periods: self.periods.clone(),
            policy_period: self.policy_period,
            balanced: self.balanced,
        }
    }

    /// Transformed outcomes `ln(Y + 1)`.
    pub fn log_outcomes(&self) -> Vec<T> {
        self.observations.iter().map(|o| o.outcome.ln_1p()).collect()
    }

    /// Event time `period - policy_period`.
    pub fn event_time(&self, o: &PanelObservation<T>) -> i64 {
        o.period - self.policy_period
    }
}

/// Partition a dataset into `(unpopular, popular)` halves by a popularity flag.
pub fn split_by_popularity<T: Scalar>(
    ds: &PanelDataset<T>,
    flag: PopularityFlag,
) -> (PanelDataset<T>, PanelDataset<T>) {
    (ds.filter(|o| !flag.get(o)), ds.filter(|o| flag.get(o)))
}

/// Dense integer codes for a categorical label vector, in first-seen order.
pub fn encode_labels<K: std::hash::Hash + Eq + Clone>(labels: impl IntoIterator<Item = K>) -> (Vec<usize>, usize) {
    let mut map: HashMap<K, usize> = HashMap::new();
    let codes = labels
        .into_iter()
        .map(|l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect();
    (codes, map.len())
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    pub fn obs(unit: &str, period: i64, policy: i64, y: f64, treated: bool) -> PanelObservation<f64> {
        PanelObservation {
            unit_id: unit.to_string(),
            period,
            outcome: y,
            treated,
            post: period >= policy,
            age_years: 0,
            cluster_id: unit.to_string(),
            popular_unit: false,
            popular_artist: false,
            dose_decile: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::obs;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn log1_outcome_values() {
        assert_eq!(log1_outcome(0.0_f64).unwrap(), 0.0);
        assert!((log1_outcome(std::f64::consts::E - 1.0).unwrap() - 1.0).abs() < 1e-15);
        // ln(1183) from a 30-digit evaluation
        assert!((log1_outcome(1182.0_f64).unwrap() - 7.075_808_863_978_387).abs() < 1e-12);
        assert!(log1_outcome(-1.0_f64).is_err());
    }

    proptest! {
        #[test]
        fn log1_outcome_strictly_increasing(a in 0.0f64..1e6, d in 1e-6f64..1e3) {
            prop_assert!(log1_outcome(a + d).unwrap() > log1_outcome(a).unwrap());
        }
    }

    fn two_by_two() -> Vec<PanelObservation<f64>> {
        vec![
            obs("a", 0, 1, 1.0, true),
            obs("a", 1, 1, 2.0, true),
            obs("b", 0, 1, 1.0, false),
            obs("b", 1, 1, 1.5, false),
        ]
    }

    #[test]
    fn rejects_duplicates_and_imbalance() {
        let mut rows = two_by_two();
        rows.push(obs("a", 1, 1, 3.0, true));
        assert!(matches!(PanelDataset::new(rows, 1, false), Err(Error::Data(_))));

        let mut rows = two_by_two();
        rows.pop();
        assert!(PanelDataset::new(rows.clone(), 1, false).is_err());
        let ds = PanelDataset::new(rows, 1, true).unwrap();
        assert!(!ds.is_balanced());
    }

    #[test]
    fn rejects_policy_outside_periods_and_bad_post() {
        assert!(PanelDataset::new(two_by_two(), 5, false).is_err());
        let mut rows = two_by_two();
        rows[0].post = true;
        assert!(PanelDataset::new(rows, 1, false).is_err());
    }

    #[test]
    fn split_partitions() {
        let mut rows = two_by_two();
        rows[0].popular_unit = true;
        rows[1].popular_unit = true;
        let ds = PanelDataset::new(rows, 1, false).unwrap();
        let (lo, hi) = split_by_popularity(&ds, PopularityFlag::Unit);
        assert_eq!(lo.len() + hi.len(), ds.len());
        assert!(hi.observations().iter().all(|o| o.unit_id == "a"));
        assert!(lo.observations().iter().all(|o| o.unit_id == "b"));
    }

    #[test]
    fn split_all_popular() {
        let mut rows = two_by_two();
        for r in &mut rows {
            r.popular_artist = true;
        }
        let ds = PanelDataset::new(rows, 1, false).unwrap();
        let (lo, hi) = split_by_popularity(&ds, PopularityFlag::Artist);
        assert!(lo.is_empty());
        assert_eq!(hi.len(), 4);
    }
}
