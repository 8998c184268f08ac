//! Uniform linear array geometry and synthesis of per-element complex
//! baseband signals for plane-wave tones.
//!
//! Element 1 is the time reference: a plane wave arriving from angle
//! `theta` reaches element `n` a propagation delay
//! `tau_n = (n-1) * d * sin(theta) / c` after element 1. After ideal
//! down-conversion the element-`n` baseband stream carries both the
//! envelope delay and the residual carrier phase `-2*pi*f_c*tau_n`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// ULA geometry plus the sampling parameters every run is rooted in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub num_elements: usize,
    pub carrier_hz: f64,
    pub sample_rate_hz: f64,
    pub spacing_m: f64,
    pub light_speed_m_s: f64,
}

impl ArrayConfig {
    /// Half-wavelength spacing at the carrier: `d = c / (2 * f_c)`.
    pub fn new(num_elements: usize, carrier_hz: f64, sample_rate_hz: f64) -> Result<Self> {
        let spacing_m = SPEED_OF_LIGHT / (2.0 * carrier_hz);
        Self::with_spacing(num_elements, carrier_hz, sample_rate_hz, spacing_m)
    }

    pub fn with_spacing(
        num_elements: usize,
        carrier_hz: f64,
        sample_rate_hz: f64,
        spacing_m: f64,
    ) -> Result<Self> {
        let cfg = ArrayConfig {
            num_elements,
            carrier_hz,
            sample_rate_hz,
            spacing_m,
            light_speed_m_s: SPEED_OF_LIGHT,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_elements < 2 {
            return Err(Error::invalid("num_elements must be >= 2"));
        }
        for (name, v) in [
            ("carrier_hz", self.carrier_hz),
            ("sample_rate_hz", self.sample_rate_hz),
            ("spacing_m", self.spacing_m),
            ("light_speed_m_s", self.light_speed_m_s),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Maximum per-element incremental delay in samples, `f_s * d / c`.
    /// This bounds the searched fractional delay.
    pub fn delay_bound_samples(&self) -> f64 {
        self.sample_rate_hz * self.spacing_m / self.light_speed_m_s
    }
}

/// A unit-amplitude complex tone arriving from a fixed direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneSource {
    /// Incidence angle in degrees, in [-90, +90].
    pub incidence_deg: f64,
    /// Signed offset from the carrier in Hz.
    pub baseband_hz: f64,
}

impl ToneSource {
    pub fn new(incidence_deg: f64, baseband_hz: f64) -> Result<Self> {
        check_angle(incidence_deg)?;
        Ok(ToneSource {
            incidence_deg,
            baseband_hz,
        })
    }
}

/// Per-element complex baseband sample streams, one row per element.
#[derive(Debug, Clone)]
pub struct ElementSignals {
    pub samples: Vec<Vec<Complex64>>,
    pub sample_rate_hz: f64,
}

impl ElementSignals {
    pub fn num_elements(&self) -> usize {
        self.samples.len()
    }

    pub fn len(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub(crate) fn check_angle(angle_deg: f64) -> Result<()> {
    if !angle_deg.is_finite() || !(-90.0..=90.0).contains(&angle_deg) {
        return Err(Error::invalid(format!(
            "angle must be in [-90, 90] degrees, got {angle_deg}"
        )));
    }
    Ok(())
}

/// Propagation delay of element `element_index` (1-based) relative to
/// element 1, in seconds. Positive for positive incidence angles.
pub fn element_delay(config: &ArrayConfig, element_index: usize, angle_deg: f64) -> Result<f64> {
    if element_index < 1 || element_index > config.num_elements {
        return Err(Error::invalid(format!(
            "element index {element_index} out of range 1..={}",
            config.num_elements
        )));
    }
    check_angle(angle_deg)?;
    let sin_theta = angle_deg.to_radians().sin();
    Ok((element_index - 1) as f64 * config.spacing_m * sin_theta / config.light_speed_m_s)
}

/// Ideally down-converted receive signals for a single plane-wave tone:
/// row `n` is `exp(j*2pi*f_bb*(k/f_s - tau_n)) * exp(-j*2pi*f_c*tau_n)`.
/// Row 1 is the undelayed baseband tone. Deterministic, noise free.
pub fn synthesize_received(
    config: &ArrayConfig,
    source: &ToneSource,
    num_samples: usize,
) -> Result<ElementSignals> {
    config.validate()?;
    if num_samples < 1 {
        return Err(Error::invalid("num_samples must be >= 1"));
    }
    if source.baseband_hz.abs() >= config.sample_rate_hz / 2.0 {
        return Err(Error::invalid(format!(
            "baseband frequency {} violates complex Nyquist limit {}",
            source.baseband_hz,
            config.sample_rate_hz / 2.0
        )));
    }
    let fs = config.sample_rate_hz;
    let mut samples = Vec::with_capacity(config.num_elements);
    for n in 1..=config.num_elements {
        let tau = element_delay(config, n, source.incidence_deg)?;
        // Constant per-element factor: envelope delay plus carrier phase.
        let phase0 = -TAU * (source.baseband_hz + config.carrier_hz) * tau;
        let factor = Complex64::from_polar(1.0, phase0);
        let row: Vec<Complex64> = (0..num_samples)
            .map(|k| Complex64::from_polar(1.0, TAU * source.baseband_hz * k as f64 / fs) * factor)
            .collect();
        samples.push(row);
    }
    Ok(ElementSignals {
        samples,
        sample_rate_hz: fs,
    })
}
