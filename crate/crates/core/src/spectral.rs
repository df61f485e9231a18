//! Discrete Fourier analysis of observable series: one-sided magnitude
//! spectra on the angular-frequency axis and peak extraction.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::observables::ObservableSeries;

/// Minimum series length accepted for a spectrum.
const MIN_SPECTRUM_LEN: usize = 16;
/// Local maxima closer than this many bins to a stronger accepted peak are
/// treated as window sidelobes of that peak, not peaks of their own.
const PEAK_SEPARATION_BINS: usize = 6;

#[derive(Debug, Clone)]
pub struct SpectrumMeta {
    pub n_steps: usize,
    pub dt: f64,
    pub detrended: bool,
    /// Description of the amplitude convention.
    pub normalization: &'static str,
}

/// One-sided magnitude spectrum. Bin `k` sits at angular frequency
/// `2 pi k / (n dt)`; the axis spans `[0, pi/dt]`.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub angular_frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl SpectrumResult {
    pub fn bin_width(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.meta.n_steps as f64 * self.meta.dt)
    }
}

/// Raw one-sided complex FFT bins (no amplitude normalization); detrending is
/// applied first when requested. Linearity holds on these intermediates.
pub fn complex_half_spectrum(
    series: &ObservableSeries<f64>,
    detrend: bool,
) -> Result<Vec<Complex64>> {
    let n = series.values.len();
    if n < MIN_SPECTRUM_LEN {
        return Err(Error::InvalidGrid(format!(
            "spectrum needs at least {MIN_SPECTRUM_LEN} samples, got {n}"
        )));
    }
    let mean = if detrend {
        series.values.iter().sum::<f64>() / n as f64
    } else {
        0.0
    };
    let mut buf: Vec<Complex64> = series
        .values
        .iter()
        .map(|&x| Complex64::new(x - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.truncate(n / 2 + 1);
    Ok(buf)
}

/// One-sided magnitude spectrum with the time mean subtracted when `detrend`
/// is set. Amplitudes carry the `2/n` one-sided convention, so a unit
/// cosine at an on-bin frequency reports amplitude 1 (DC and Nyquist carry
/// `1/n`).
pub fn power_spectrum(series: &ObservableSeries<f64>, detrend: bool) -> Result<SpectrumResult> {
    let n = series.values.len();
    let bins = complex_half_spectrum(series, detrend)?;
    let dt = series.grid.dt;
    let mut angular_frequencies = Vec::with_capacity(bins.len());
    let mut amplitudes = Vec::with_capacity(bins.len());
    for (k, z) in bins.iter().enumerate() {
        angular_frequencies.push(2.0 * std::f64::consts::PI * k as f64 / (n as f64 * dt));
        let one_sided = if k == 0 || (n % 2 == 0 && k == n / 2) {
            1.0
        } else {
            2.0
        };
        amplitudes.push(one_sided * z.norm() / n as f64);
    }
    Ok(SpectrumResult {
        angular_frequencies,
        amplitudes,
        meta: SpectrumMeta {
            n_steps: n,
            dt,
            detrended: detrend,
            normalization: "one-sided, 2/n (1/n at DC and Nyquist); unit cosine -> 1",
        },
    })
}

/// A spectral peak after parabolic refinement of the bin position.
#[derive(Debug, Clone, Copy)]
pub struct Peak {
    pub frequency: f64,
    pub amplitude: f64,
}

/// Local maxima with amplitude at least `rel_threshold` times the spectrum
/// maximum, strongest first. Candidates within a few bins of an already
/// accepted stronger peak are suppressed as sidelobes; positions are refined
/// by parabolic interpolation across the three nearest bins.
pub fn find_peaks(spec: &SpectrumResult, rel_threshold: f64) -> Result<Vec<Peak>> {
    if spec.amplitudes.is_empty() {
        return Err(Error::InvalidInput("empty spectrum".into()));
    }
    if !(rel_threshold > 0.0 && rel_threshold <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rel_threshold must lie in (0, 1], got {rel_threshold}"
        )));
    }
    let a = &spec.amplitudes;
    let max = a.iter().copied().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Ok(Vec::new());
    }
    let floor = rel_threshold * max;
    let mut candidates: Vec<usize> = (1..a.len().saturating_sub(1))
        .filter(|&k| a[k] > a[k - 1] && a[k] >= a[k + 1] && a[k] >= floor)
        .collect();
    candidates.sort_by(|&i, &k| a[k].total_cmp(&a[i]).then(i.cmp(&k)));
    let mut accepted: Vec<usize> = Vec::new();
    for k in candidates {
        if accepted
            .iter()
            .all(|&p| k.abs_diff(p) > PEAK_SEPARATION_BINS)
        {
            accepted.push(k);
        }
    }
    let bin = spec.bin_width();
    let peaks = accepted
        .into_iter()
        .map(|k| {
            let (am, a0, ap) = (a[k - 1], a[k], a[k + 1]);
            let denom = am - 2.0 * a0 + ap;
            let delta = if denom.abs() < 1e-300 {
                0.0
            } else {
                (0.5 * (am - ap) / denom).clamp(-0.5, 0.5)
            };
            Peak {
                frequency: spec.angular_frequencies[k] + delta * bin,
                amplitude: a0 - 0.25 * (am - ap) * delta,
            }
        })
        .collect();
    Ok(peaks)
}
