//! Integer and fractional sample-delay FIR filters.
//!
//! A real delay of `t` samples is split into an integer part, realized by
//! a fixed 30-tap shifted-impulse FIR, and a fraction in [-0.5, +0.5],
//! realized by a Blackman-windowed sinc interpolator. A uniform bulk
//! offset added to every element keeps negative per-element delays
//! causal; being common to all elements it shifts the time origin only.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Capacity of the fixed integer-delay FIR.
pub const INTEGER_FILTER_TAPS: usize = 30;

/// Shifted impulse: exactly one unit tap at `delay_samples`.
#[derive(Debug, Clone)]
pub struct IntegerDelayFilter {
    pub taps: Vec<f64>,
    pub delay_samples: usize,
}

impl IntegerDelayFilter {
    pub fn new(delay_samples: usize) -> Result<Self> {
        if delay_samples >= INTEGER_FILTER_TAPS {
            return Err(Error::capacity(format!(
                "integer delay {delay_samples} exceeds the {INTEGER_FILTER_TAPS}-tap filter range 0..={}",
                INTEGER_FILTER_TAPS - 1
            )));
        }
        let mut taps = vec![0.0; INTEGER_FILTER_TAPS];
        taps[delay_samples] = 1.0;
        Ok(IntegerDelayFilter {
            taps,
            delay_samples,
        })
    }
}

/// Windowed-sinc FIR realizing a sub-sample delay of `nominal_fraction`
/// samples on top of its own bulk group delay of `order/2` samples.
#[derive(Debug, Clone)]
pub struct FractionalDelayFilter {
    pub taps: Vec<f64>,
    pub order: usize,
    pub nominal_fraction: f64,
    pub bulk_delay_samples: usize,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

fn blackman(m: usize, order: usize) -> f64 {
    let x = m as f64 / order as f64;
    0.42 - 0.5 * (TAU * x).cos() + 0.08 * (2.0 * TAU * x).cos()
}

/// Designs a Blackman-windowed sinc fractional delay filter with unity
/// DC gain. Group delay is `order/2 + fraction` samples across the
/// usable band.
pub fn design_fractional(fraction: f64, order: usize) -> Result<FractionalDelayFilter> {
    if order % 2 != 0 || order < 8 {
        return Err(Error::invalid(format!(
            "filter order must be even and >= 8, got {order}"
        )));
    }
    if !(-0.5..=0.5).contains(&fraction) || !fraction.is_finite() {
        return Err(Error::invalid(format!(
            "fraction must be in [-0.5, 0.5], got {fraction}"
        )));
    }
    let center = order as f64 / 2.0 + fraction;
    let mut taps: Vec<f64> = (0..=order)
        .map(|m| blackman(m, order) * sinc(m as f64 - center))
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in taps.iter_mut() {
        *t /= sum;
    }
    Ok(FractionalDelayFilter {
        taps,
        order,
        nominal_fraction: fraction,
        bulk_delay_samples: order / 2,
    })
}

/// Split of a real sample delay into the integer-filter setting and the
/// residual fraction, after the causality offset has been added.
/// `total_samples` stores the realized (offset-shifted) delay, so
/// `integer_part + fraction_part == total_samples` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayDecomposition {
    pub total_samples: f64,
    pub integer_part: usize,
    pub fraction_part: f64,
}

pub fn decompose_delay(total_samples: f64, bulk_offset: usize) -> Result<DelayDecomposition> {
    let shifted = total_samples + bulk_offset as f64;
    if !shifted.is_finite() || shifted < -0.5 {
        return Err(Error::invalid(format!(
            "delay {total_samples} with bulk offset {bulk_offset} is not causal"
        )));
    }
    let integer = shifted.round();
    let fraction = shifted - integer;
    if integer < 0.0 || integer as usize >= INTEGER_FILTER_TAPS {
        return Err(Error::capacity(format!(
            "integer part {integer} of delay {total_samples} (+{bulk_offset} offset) \
             outside the {INTEGER_FILTER_TAPS}-tap range"
        )));
    }
    Ok(DelayDecomposition {
        total_samples: shifted,
        integer_part: integer as usize,
        fraction_part: fraction,
    })
}

/// Runs a stream through the integer-shift and fractional-delay filters.
/// Output length equals input length; the leading
/// `integer_part + order` samples are filter transient.
pub fn apply_delay(
    signal: &[Complex64],
    decomp: &DelayDecomposition,
    frac_filter: &FractionalDelayFilter,
) -> Result<Vec<Complex64>> {
    if (frac_filter.nominal_fraction - decomp.fraction_part).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "filter fraction {} does not match decomposition fraction {}",
            frac_filter.nominal_fraction, decomp.fraction_part
        )));
    }
    // Integer filter is a shifted impulse, so its convolution is a shift
    // with zero fill.
    let shift = decomp.integer_part;
    let n = signal.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, &h) in frac_filter.taps.iter().enumerate() {
            let idx = k as isize - shift as isize - m as isize;
            if idx >= 0 {
                if let Some(&x) = signal.get(idx as usize) {
                    acc += h * x;
                }
            }
        }
        out[k] = acc;
    }
    Ok(out)
}

/// Recovers the delay of `applied` relative to `reference` from the
/// steady-state phase of a shared single tone. The phase is ambiguous
/// modulo one tone period, so the result is unwrapped to the value
/// nearest `expected_near`.
pub fn measure_phase_delay(
    applied: &[Complex64],
    reference: &[Complex64],
    tone_hz: f64,
    sample_rate_hz: f64,
    expected_near: f64,
) -> Result<f64> {
    if tone_hz == 0.0 {
        return Err(Error::invalid(
            "a DC tone carries no delay information".to_string(),
        ));
    }
    let n = applied.len().min(reference.len());
    if n < 8 {
        return Err(Error::invalid("streams too short to measure".to_string()));
    }
    // Trim a quarter at each end to stay clear of filter transients.
    let (lo, hi) = (n / 4, n - n / 4);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in lo..hi {
        acc += applied[k] * reference[k].conj();
    }
    let omega = TAU * tone_hz / sample_rate_hz;
    let principal = -acc.arg() / omega;
    let period = sample_rate_hz / tone_hz;
    let wraps = ((expected_near - principal) / period).round();
    Ok(principal + wraps * period)
}
