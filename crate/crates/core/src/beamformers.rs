//! The two receive beamformers under study: conventional phase-shift-only
//! combining, and baseband true-time delay followed by the same carrier
//! phase shift.
//!
//! Sign conventions: the carrier weight `w_n = exp(+j*2pi*f_c*tau_n)`
//! conjugate-aligns the carrier phase picked up in propagation, and a
//! positive incremental delay `delta = +f_s*d*sin(theta)/c` aligns the
//! baseband envelopes. Internally element `n` is therefore shifted by
//! `bulk_offset - (n-1)*delta` samples; the uniform `bulk_offset` keeps
//! every shift causal and cancels in the pattern-peak location.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::array_model::{check_angle, element_delay, ArrayConfig, ElementSignals};
use crate::delay_filters::{apply_delay, decompose_delay, design_fractional};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamformerVariant {
    PhaseOnly,
    TrueTimeDelay,
}

/// Which beamformer to run and how it is steered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamformerSpec {
    pub variant: BeamformerVariant,
    pub steering_deg: f64,
    /// Per-element incremental baseband delay in samples. Ignored by
    /// the phase-only variant.
    pub delta_samples: f64,
    pub frac_order: usize,
    pub bulk_offset: usize,
}

impl BeamformerSpec {
    pub fn phase_only(steering_deg: f64) -> Self {
        BeamformerSpec {
            variant: BeamformerVariant::PhaseOnly,
            steering_deg,
            delta_samples: 0.0,
            frac_order: 62,
            bulk_offset: 8,
        }
    }

    pub fn ttd(steering_deg: f64, delta_samples: f64, frac_order: usize, bulk_offset: usize) -> Self {
        BeamformerSpec {
            variant: BeamformerVariant::TrueTimeDelay,
            steering_deg,
            delta_samples,
            frac_order,
            bulk_offset,
        }
    }

    pub fn validate(&self, config: &ArrayConfig) -> Result<()> {
        check_angle(self.steering_deg)?;
        if self.variant == BeamformerVariant::TrueTimeDelay {
            let bound = config.delay_bound_samples();
            if self.delta_samples.abs() > bound + 1e-12 {
                return Err(Error::invalid(format!(
                    "delta {} outside the solution space +/-{bound}",
                    self.delta_samples
                )));
            }
        }
        Ok(())
    }

    /// Number of leading samples discarded as filter transient before
    /// power measurement.
    pub fn transient_len(&self) -> usize {
        match self.variant {
            BeamformerVariant::PhaseOnly => 0,
            BeamformerVariant::TrueTimeDelay => self.frac_order + 30,
        }
    }
}

/// Beam-sum output stream with its steady-state mean-square power.
#[derive(Debug, Clone)]
pub struct CombinedOutput {
    pub samples: Vec<Complex64>,
    pub power: f64,
}

fn steady_power(samples: &[Complex64], skip: usize) -> f64 {
    let window = &samples[skip.min(samples.len().saturating_sub(1))..];
    if window.is_empty() {
        return 0.0;
    }
    window.iter().map(|s| s.norm_sqr()).sum::<f64>() / window.len() as f64
}

/// Carrier-phase steering weights `w_n = exp(+j*2pi*f_c*tau_n(theta))`.
pub fn phase_weights(config: &ArrayConfig, steering_deg: f64) -> Result<Vec<Complex64>> {
    (1..=config.num_elements)
        .map(|n| {
            let tau = element_delay(config, n, steering_deg)?;
            Ok(Complex64::from_polar(1.0, TAU * config.carrier_hz * tau))
        })
        .collect()
}

fn check_signals(signals: &ElementSignals, config: &ArrayConfig) -> Result<()> {
    if signals.num_elements() != config.num_elements {
        return Err(Error::invalid(format!(
            "signal rows {} do not match array elements {}",
            signals.num_elements(),
            config.num_elements
        )));
    }
    Ok(())
}

/// Conventional narrowband beamformer: weight and sum.
pub fn combine_phase_only(
    signals: &ElementSignals,
    config: &ArrayConfig,
    steering_deg: f64,
) -> Result<CombinedOutput> {
    check_signals(signals, config)?;
    let weights = phase_weights(config, steering_deg)?;
    let len = signals.len();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (row, w) in signals.samples.iter().zip(&weights) {
        for (o, x) in out.iter_mut().zip(row) {
            *o += w * x;
        }
    }
    let power = steady_power(&out, 0);
    Ok(CombinedOutput { samples: out, power })
}

/// Proposed beamformer: per-element baseband true-time delay, then the
/// carrier phase shift, then the sum.
pub fn combine_ttd(
    signals: &ElementSignals,
    config: &ArrayConfig,
    steering_deg: f64,
    delta_samples: f64,
    frac_order: usize,
    bulk_offset: usize,
) -> Result<CombinedOutput> {
    check_signals(signals, config)?;
    let weights = phase_weights(config, steering_deg)?;
    let len = signals.len();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (i, (row, w)) in signals.samples.iter().zip(&weights).enumerate() {
        // shift includes the bulk offset already
        let shift = -(i as f64) * delta_samples;
        let decomp = decompose_delay(shift, bulk_offset)?;
        let filter = design_fractional(decomp.fraction_part, frac_order)?;
        let delayed = apply_delay(row, &decomp, &filter)?;
        for (o, x) in out.iter_mut().zip(&delayed) {
            *o += w * x;
        }
    }
    let power = steady_power(&out, frac_order + 30);
    Ok(CombinedOutput { samples: out, power })
}

/// Runs a unit tone at `baseband_hz` through each element's delay chain
/// and returns the steady-state complex gain of every element relative
/// to the undelayed tone. Phase-only elements have unit gain.
pub fn element_tone_gains(
    config: &ArrayConfig,
    spec: &BeamformerSpec,
    baseband_hz: f64,
) -> Result<Vec<Complex64>> {
    spec.validate(config)?;
    if spec.variant == BeamformerVariant::PhaseOnly {
        return Ok(vec![Complex64::new(1.0, 0.0); config.num_elements]);
    }
    let transient = spec.transient_len();
    let len = transient + 128;
    let fs = config.sample_rate_hz;
    let base: Vec<Complex64> = (0..len)
        .map(|k| Complex64::from_polar(1.0, TAU * baseband_hz * k as f64 / fs))
        .collect();
    let mut gains = Vec::with_capacity(config.num_elements);
    for i in 0..config.num_elements {
        let shift = -(i as f64) * spec.delta_samples;
        let decomp = decompose_delay(shift, spec.bulk_offset)?;
        let filter = design_fractional(decomp.fraction_part, spec.frac_order)?;
        let delayed = apply_delay(&base, &decomp, &filter)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in transient..len {
            acc += delayed[k] * base[k].conj();
        }
        gains.push(acc / (len - transient) as f64);
    }
    Ok(gains)
}
