//! Recording/track catalog types and the rules that turn them into panel units.

use std::cmp::Ordering;
use std::collections::HashMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::median;

/// Track-duration spread at or above which a recording is suspected of
/// containing hidden tracks.
pub const DEFAULT_MAX_DURATION_RANGE_S: f64 = 5.0;

/// A store-facing instance of a recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub track_id: String,
    pub isrc: String,
    pub duration_s: f64,
    pub release_date: NaiveDate,
    /// Preview length before the policy change, if known.
    pub preview_len_pre_s: Option<f64>,
    /// Preview length after the policy change, if known.
    pub preview_len_post_s: Option<f64>,
}

impl Track {
    pub fn new(
        track_id: impl Into<String>,
        isrc: impl Into<String>,
        duration_s: f64,
        release_date: NaiveDate,
    ) -> Result<Self> {
        if !(duration_s > 0.0) || !duration_s.is_finite() {
            return Err(Error::Input(format!("track duration must be positive, got {duration_s}")));
        }
        Ok(Self {
            track_id: track_id.into(),
            isrc: isrc.into(),
            duration_s,
            release_date,
            preview_len_pre_s: None,
            preview_len_post_s: None,
        })
    }

    pub fn with_previews(mut self, pre_s: f64, post_s: f64) -> Result<Self> {
        for (what, v) in [("pre", pre_s), ("post", post_s)] {
            if !(v >= 0.0) || v > self.duration_s {
                return Err(Error::Input(format!(
                    "{what}-policy preview length {v} outside [0, {}]",
                    self.duration_s
                )));
            }
        }
        self.preview_len_pre_s = Some(pre_s);
        self.preview_len_post_s = Some(post_s);
        Ok(self)
    }
}

/// Lower-middle order statistic: the exact median for odd counts and the
/// smaller middle value for even counts, so it is always an observed value.
pub fn lower_median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[(v.len() - 1) / 2]
}

/// A specific mixed performance identified by an ISRC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recording {
    pub isrc: String,
    pub tracks: Vec<Track>,
    pub first_release_year: i32,
    /// Lower-middle median of the member track durations.
    pub duration_s: f64,
    pub sales_2009: u64,
}

impl Recording {
    pub fn new(
        isrc: impl Into<String>,
        tracks: Vec<Track>,
        first_release_year: i32,
        sales_2009: u64,
    ) -> Result<Self> {
        if tracks.is_empty() {
            return Err(Error::Input("a recording needs at least one track".into()));
        }
        let durations: Vec<f64> = tracks.iter().map(|t| t.duration_s).collect();
        Ok(Self {
            isrc: isrc.into(),
            duration_s: lower_median(&durations),
            tracks,
            first_release_year,
            sales_2009,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TreatmentStatus {
    Treated,
    Control,
    Ambiguous,
}

/// The track standing in for a recording: one whose duration equals the
/// (lower-middle) median, earliest release date first, then smallest id.
pub fn link_representative_track(recording: &Recording) -> &Track {
    let durations: Vec<f64> = recording.tracks.iter().map(|t| t.duration_s).collect();
    let med = lower_median(&durations);
    recording
        .tracks
        .iter()
        .filter(|t| t.duration_s == med)
        .min_by(|a, b| {
            a.release_date
                .cmp(&b.release_date)
                .then_with(|| a.track_id.cmp(&b.track_id))
        })
        .expect("median is attained by some track")
}

/// True when the spread of track durations is strictly below `max_range_s`.
pub fn screen_duration_range(recording: &Recording, max_range_s: f64) -> bool {
    let (lo, hi) = recording
        .tracks
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
            (lo.min(t.duration_s), hi.max(t.duration_s))
        });
    hi - lo < max_range_s
}

pub fn assign_treatment(recording: &Recording) -> Result<TreatmentStatus> {
    let mut all_same = true;
    let mut all_longer = true;
    for t in &recording.tracks {
        let (pre, post) = match (t.preview_len_pre_s, t.preview_len_post_s) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::Input(format!(
                    "track {} of {} lacks a preview length",
                    t.track_id, recording.isrc
                )))
            }
        };
        all_same &= pre == post;
        all_longer &= post > pre;
    }
    Ok(if all_same {
        TreatmentStatus::Control
    } else if all_longer {
        TreatmentStatus::Treated
    } else {
        TreatmentStatus::Ambiguous
    })
}

/// Representative recording of an artist-title: most January 2010 sales,
/// then earliest first release year, then smallest ISRC.
pub fn select_artist_title_representative<'a>(
    recordings: &'a [Recording],
    jan2010_sales: &HashMap<String, u64>,
) -> Result<&'a Recording> {
    recordings
        .iter()
        .min_by(|a, b| {
            let sa = jan2010_sales.get(&a.isrc).copied().unwrap_or(0);
            let sb = jan2010_sales.get(&b.isrc).copied().unwrap_or(0);
            sb.cmp(&sa)
                .then_with(|| a.first_release_year.cmp(&b.first_release_year))
                .then_with(|| a.isrc.cmp(&b.isrc))
        })
        .ok_or_else(|| Error::Input("artist-title has no recordings".into()))
}

/// `popular_unit` flags: sales at or above the median.
pub fn mark_popular_units(sales_2009: &HashMap<String, f64>) -> HashMap<String, bool> {
    let values: Vec<f64> = sales_2009.values().copied().collect();
    let med = median(&values);
    sales_2009
        .iter()
        .map(|(u, &s)| (u.clone(), s >= med))
        .collect()
}

/// `popular_artist` flags: the unit's artist has mean recording sales at or
/// above the median of artist means.
pub fn mark_popular_artists(
    artist_of: &HashMap<String, String>,
    sales_2009: &HashMap<String, f64>,
) -> Result<HashMap<String, bool>> {
    let mut sums: HashMap<&str, (f64, usize)> = HashMap::new();
    for (unit, artist) in artist_of {
        let s = *sales_2009
            .get(unit)
            .ok_or_else(|| Error::Input(format!("no 2009 sales for unit {unit}")))?;
        let e = sums.entry(artist.as_str()).or_default();
        e.0 += s;
        e.1 += 1;
    }
    let means: HashMap<&str, f64> = sums.into_iter().map(|(a, (s, n))| (a, s / n as f64)).collect();
    let all: Vec<f64> = means.values().copied().collect();
    let med = median(&all);
    Ok(artist_of
        .iter()
        .map(|(u, a)| (u.clone(), means[a.as_str()].partial_cmp(&med) != Some(Ordering::Less)))
        .collect())
}
