//! Compression-based repetition measure: encoded length of a clip's PCM
//! bytes under a lossless codec, duration normalisation and decile bins.

mod lzw;
mod rle;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats::pearson;

pub use lzw::{lzw_decode, lzw_encode, Lzw};
pub use rle::{rle_decode_binary, rle_decode_pedagogical, rle_encode_binary, rle_encode_pedagogical, BinaryRle};

/// A lossless byte codec.
pub trait Codec: Send + Sync {
    fn name(&self) -> &str;
    fn encode(&self, data: &[u8]) -> Vec<u8>;
    fn decode(&self, code: &[u8]) -> Result<Vec<u8>>;
}

/// Look up a shipped codec by name (`lzw` or `rle`).
pub fn codec_by_name(name: &str) -> Result<Box<dyn Codec>> {
    match name {
        "lzw" => Ok(Box::new(Lzw)),
        "rle" => Ok(Box::new(BinaryRle)),
        other => Err(Error::Input(format!("unknown codec `{other}` (expected lzw or rle)"))),
    }
}

/// Little-endian 16-bit PCM: `round(x·32768)` saturated to the `i16` range.
pub fn serialize_pcm16<T: Scalar>(clip: &AudioClip<T>) -> Vec<u8> {
    clip.samples()
        .iter()
        .flat_map(|s| {
            ((s.to_f64_lossy() * 32768.0).round().clamp(-32768.0, 32767.0) as i16).to_le_bytes()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedLengthReport {
    pub unit_id: String,
    pub codec: String,
    /// Compressed payload size in bytes; container metadata is never counted.
    pub payload_bytes: usize,
    pub duration_s: f64,
    /// `payload_bytes / duration_s`.
    pub normalized: f64,
    pub decile: Option<u8>,
}

/// Encode the clip's 16-bit PCM bytes and verify the codec reproduces them.
pub fn encoded_length<T: Scalar>(unit_id: &str, clip: &AudioClip<T>, codec: &dyn Codec) -> Result<EncodedLengthReport> {
    let raw = serialize_pcm16(clip);
    let code = codec.encode(&raw);
    let back = codec.decode(&code)?;
    if back != raw {
        return Err(Error::Codec {
            codec: codec.name().into(),
            reason: format!("round trip altered the {}-byte input", raw.len()),
        });
    }
    let duration_s = clip.duration_s();
    Ok(EncodedLengthReport {
        unit_id: unit_id.into(),
        codec: codec.name().into(),
        payload_bytes: code.len(),
        duration_s,
        normalized: code.len() as f64 / duration_s,
        decile: None,
    })
}

/// Preview lengths admitted to the dose construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PreviewLength {
    Short30,
    Long90,
}

/// Tolerance, in seconds, for classifying a preview as 30 s or 90 s long.
pub const PREVIEW_LENGTH_TOL_S: f64 = 0.5;

/// `None` for previews that are neither 30 nor 90 seconds long.
pub fn classify_preview(duration_s: f64) -> Option<PreviewLength> {
    if (duration_s - 30.0).abs() <= PREVIEW_LENGTH_TOL_S {
        Some(PreviewLength::Short30)
    } else if (duration_s - 90.0).abs() <= PREVIEW_LENGTH_TOL_S {
        Some(PreviewLength::Long90)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecileBins<T> {
    /// `n_bins − 1` upper boundaries; boundary `k` is the `⌈k·n/n_bins⌉`-th
    /// smallest value.
    pub boundaries: Vec<T>,
    /// Bin of each input value, `1..=n_bins`; a value equal to a boundary
    /// falls in the lower bin.
    pub labels: Vec<u8>,
    /// Some boundaries coincide, so some bins are empty.
    pub degenerate: bool,
}

pub fn decile_bin<T: Scalar>(values: &[T], n_bins: usize) -> Result<DecileBins<T>> {
    if values.is_empty() {
        return Err(Error::Input("cannot bin an empty set of values".into()));
    }
    if !(1..=255).contains(&n_bins) {
        return Err(Error::Input(format!("bin count {n_bins} outside 1..=255")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("values to bin must be finite".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = sorted.len();
    let boundaries: Vec<T> = (1..n_bins).map(|k| sorted[(k * n).div_ceil(n_bins).max(1) - 1]).collect();
    let degenerate = boundaries.windows(2).any(|w| w[0] == w[1]);
    if degenerate {
        log::warn!("decile boundaries coincide; some bins are empty");
    }
    let labels = values
        .iter()
        .map(|v| 1 + boundaries.partition_point(|b| b < v) as u8)
        .collect();
    Ok(DecileBins {
        boundaries,
        labels,
        degenerate,
    })
}

/// Pearson correlation between normalised encoded length and sales over
/// units present in both; units without sales are skipped.
pub fn repetition_sales_correlation(reports: &[EncodedLengthReport], sales: &HashMap<String, f64>) -> Result<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = reports
        .iter()
        .filter_map(|r| sales.get(&r.unit_id).map(|&s| (r.normalized, s)))
        .unzip();
    pearson(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn clip(samples: Vec<f64>) -> AudioClip<f64> {
        AudioClip::new(samples, 8000).unwrap()
    }

    #[test]
    fn silence_is_far_shorter_than_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 30 * 8000;
        let silence = encoded_length("s", &clip(vec![0.0; n]), &Lzw).unwrap();
        let noise = encoded_length("n", &clip((0..n).map(|_| rng.random_range(-0.9..0.9)).collect()), &Lzw).unwrap();
        assert!((silence.payload_bytes as f64) < 0.05 * noise.payload_bytes as f64);
        assert!((noise.normalized - noise.payload_bytes as f64 / 30.0).abs() < 1e-9);
    }

    #[test]
    fn doubled_clip_compresses_repetition() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let base: Vec<f64> = (0..30 * 8000).map(|_| rng.random_range(-0.5..0.5)).collect();
        let one = encoded_length("a", &clip(base.clone()), &Lzw).unwrap();
        let twice = encoded_length("a", &clip([base.clone(), base].concat()), &Lzw).unwrap();
        assert!(twice.payload_bytes < 2 * one.payload_bytes);
        let again = encoded_length("a", &clip(vec![0.25; 100]), &Lzw).unwrap();
        assert_eq!(again, encoded_length("a", &clip(vec![0.25; 100]), &Lzw).unwrap());
    }

    #[test]
    fn pcm_serialisation_saturates() {
        let b = serialize_pcm16(&clip(vec![-1.0, 1.0, 0.5]));
        assert_eq!(b, [0x00, 0x80, 0xFF, 0x7F, 0x00, 0x40]);
    }

    #[test]
    fn deciles_of_one_to_hundred() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        let d = decile_bin(&v, 10).unwrap();
        assert!(d.labels[..10].iter().all(|&l| l == 1));
        assert!(d.labels[90..].iter().all(|&l| l == 10));
        for k in 0..10 {
            assert!(d.labels[10 * k..10 * k + 10].iter().all(|&l| l as usize == k + 1));
        }
        assert!(!d.degenerate);
    }

    #[test]
    fn equal_values_are_degenerate() {
        let d = decile_bin(&[3.0f64; 25], 10).unwrap();
        assert!(d.labels.iter().all(|&l| l == 1));
        assert!(d.degenerate);
        assert!(matches!(decile_bin::<f64>(&[], 10), Err(Error::Input(_))));
    }

    #[test]
    fn preview_filter() {
        assert_eq!(classify_preview(30.0), Some(PreviewLength::Short30));
        assert_eq!(classify_preview(89.8), Some(PreviewLength::Long90));
        assert_eq!(classify_preview(60.0), None);
    }

    #[test]
    fn sales_correlation() {
        let reps: Vec<EncodedLengthReport> = (0..5)
            .map(|i| EncodedLengthReport {
                unit_id: format!("u{i}"),
                codec: "lzw".into(),
                payload_bytes: 0,
                duration_s: 30.0,
                normalized: i as f64,
                decile: None,
            })
            .collect();
        let up: HashMap<String, f64> = (0..5).map(|i| (format!("u{i}"), 2.0 * i as f64)).collect();
        let down: HashMap<String, f64> = (0..5).map(|i| (format!("u{i}"), -(i as f64))).collect();
        assert!((repetition_sales_correlation(&reps, &up).unwrap() - 1.0).abs() < 1e-12);
        assert!((repetition_sales_correlation(&reps, &down).unwrap() + 1.0).abs() < 1e-12);
        let flat: HashMap<String, f64> = (0..5).map(|i| (format!("u{i}"), 1.0)).collect();
        assert!(matches!(
            repetition_sales_correlation(&reps, &flat),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn independent_draws_are_uncorrelated() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x: Vec<f64> = (0..10_000).map(|_| rng.random()).collect();
        let y: Vec<f64> = (0..10_000).map(|_| rng.random()).collect();
        assert!(pearson(&x, &y).unwrap().abs() < 0.05);
    }

    proptest! {
        #[test]
        fn labels_invariant_to_permutation_and_monotone_maps(
            v in proptest::collection::vec(-1e3f64..1e3, 1..300),
            seed in any::<u64>(),
        ) {
            let base = decile_bin(&v, 10).unwrap();
            let mapped: Vec<f64> = v.iter().map(|x| 3.0 * x + 7.0).collect();
            prop_assert_eq!(&decile_bin(&mapped, 10).unwrap().labels, &base.labels);
            let cubed: Vec<f64> = v.iter().map(|x| x * x * x).collect();
            prop_assert_eq!(&decile_bin(&cubed, 10).unwrap().labels, &base.labels);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx: Vec<usize> = (0..v.len()).collect();
            for i in (1..idx.len()).rev() {
                idx.swap(i, rng.random_range(0..=i));
            }
            let permuted: Vec<f64> = idx.iter().map(|&i| v[i]).collect();
            let pl = decile_bin(&permuted, 10).unwrap().labels;
            for (j, &i) in idx.iter().enumerate() {
                prop_assert_eq!(pl[j], base.labels[i]);
            }
        }
    }
}
