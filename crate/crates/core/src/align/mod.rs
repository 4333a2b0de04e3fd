//! Locate an excerpt inside its source recording by normalised
//! cross-correlation.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative tolerance under which two correlation values count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub offset_samples: usize,
    pub offset_s: f64,
    pub peak_corr: f64,
    /// Best correlation more than `exclusion_radius` samples from the peak;
    /// `None` when no such lag exists.
    pub runner_up_corr: Option<f64>,
    pub exclusion_radius: usize,
}

/// Pearson correlation between the excerpt and every equally long window
/// of the recording, indexed by lag. Windows with zero variance score 0.
///
/// Sliding dot products use one FFT pair; window moments use prefix sums.
/// Accumulation is in `f64` regardless of `T`.
pub fn normalized_cross_correlation<T: Scalar>(excerpt: &[T], recording: &[T]) -> Result<Vec<f64>> {
    let (m, n) = (excerpt.len(), recording.len());
    if m == 0 || m > n {
        return Err(Error::Input(format!(
            "excerpt of {m} samples must be nonempty and no longer than the recording ({n})"
        )));
    }
    let x: Vec<f64> = excerpt.iter().map(|v| v.to_f64_lossy()).collect();
    let r: Vec<f64> = recording.iter().map(|v| v.to_f64_lossy()).collect();
    let mx = x.iter().sum::<f64>() / m as f64;
    let xc: Vec<f64> = x.iter().map(|v| v - mx).collect();
    let ex = xc.iter().map(|v| v * v).sum::<f64>();
    if ex <= 0.0 {
        return Err(Error::Degenerate("excerpt has no variation".into()));
    }

    let size = (n + m - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut fr: Vec<Complex<f64>> = r.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fr.resize(size, Complex::new(0.0, 0.0));
    let mut fx: Vec<Complex<f64>> = xc.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fx.resize(size, Complex::new(0.0, 0.0));
    fwd.process(&mut fr);
    fwd.process(&mut fx);
    for (a, b) in fr.iter_mut().zip(&fx) {
        *a *= b.conj();
    }
    inv.process(&mut fr);
    let scale = 1.0 / size as f64;

    let mut s1 = vec![0.0; n + 1];
    let mut s2 = vec![0.0; n + 1];
    for (i, &v) in r.iter().enumerate() {
        s1[i + 1] = s1[i] + v;
        s2[i + 1] = s2[i] + v * v;
    }
    let lags = n - m + 1;
    let mf = m as f64;
    // windows whose variance is this far below the recording's mean power are silent
    let floor = 1e-10 * mf * (s2[n] / n as f64);
    Ok((0..lags)
        .map(|t| {
            let sum = s1[t + m] - s1[t];
            let sq = s2[t + m] - s2[t];
            let energy = sq - sum * sum / mf;
            if energy <= floor || energy <= 0.0 {
                0.0
            } else {
                (fr[t].re * scale / (ex * energy).sqrt()).clamp(-1.0, 1.0)
            }
        })
        .collect())
}

/// Earliest lag whose correlation is within [`TIE_TOLERANCE`] (relative) of
/// the global maximum.
pub fn earliest_max(corr: &[f64]) -> usize {
    let max = corr.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = max - TIE_TOLERANCE * max.abs();
    corr.iter().position(|&c| c >= floor).expect("nonempty correlation")
}

pub fn cross_correlate<T: Scalar>(excerpt: &AudioClip<T>, recording: &AudioClip<T>) -> Result<AlignmentResult> {
    let sr = recording.sample_rate_hz();
    if excerpt.sample_rate_hz() != sr {
        return Err(Error::Input(format!(
            "sample rates differ: excerpt {} Hz, recording {sr} Hz",
            excerpt.sample_rate_hz()
        )));
    }
    if excerpt.len() > recording.len() {
        return Err(Error::Input(format!(
            "excerpt ({:.3} s) is longer than the recording ({:.3} s)",
            excerpt.duration_s(),
            recording.duration_s()
        )));
    }
    let corr = normalized_cross_correlation(excerpt.samples(), recording.samples())?;
    let best = earliest_max(&corr);
    let radius = excerpt.len().min((0.05 * sr as f64).round() as usize);
    let runner_up = corr
        .iter()
        .enumerate()
        .filter(|(t, _)| t.abs_diff(best) > radius)
        .map(|(_, &c)| c)
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.max(c))));
    Ok(AlignmentResult {
        offset_samples: best,
        offset_s: best as f64 / sr as f64,
        peak_corr: corr[best],
        runner_up_corr: runner_up,
        exclusion_radius: radius,
    })
}
