//! Run configuration loading and CSV/JSON serialization of patterns,
//! squint tables, optimum-delay sweeps, and convergence traces.
//!
//! Formatting is fixed so outputs are byte-stable across runs and
//! thread counts: angles with 2 decimals, delays with 4, powers in dB
//! with 6.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::array_model::{ArrayConfig, SPEED_OF_LIGHT};
use crate::beamformers::{BeamformerSpec, BeamformerVariant};
use crate::delay_filters::design_fractional;
use crate::error::{Error, Result};
use crate::optimizer::{optimize_delay, DelaySearchSpec, OptimizationTrace};
use crate::squint_analysis::{beam_pattern, squint_table, ScanParams, SquintRow};

/// Fully resolved parameters for a run. Loading fills any omitted
/// field with the 16-element, 1-GHz-carrier, 550-MHz-rate design
/// defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub array: ArrayConfig,
    pub freq_offsets_hz: Vec<f64>,
    pub steer_deg_list: Vec<f64>,
    pub search: DelaySearchSpec,
    pub num_samples: usize,
    pub frac_order: usize,
    pub bulk_offset: usize,
    pub scan: ScanParams,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArray {
    num_elements: Option<usize>,
    carrier_hz: Option<f64>,
    sample_rate_hz: Option<f64>,
    spacing_m: Option<f64>,
    light_speed_m_s: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSearch {
    min_samples: Option<f64>,
    max_samples: Option<f64>,
    coarse_points: Option<usize>,
    refine_rounds: Option<usize>,
    refine_shrink: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    coarse_step_deg: Option<f64>,
    refine_step_deg: Option<f64>,
    refine_window_deg: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRunConfig {
    array: Option<RawArray>,
    freq_offsets_hz: Option<Vec<f64>>,
    steer_deg_list: Option<Vec<f64>>,
    search: Option<RawSearch>,
    num_samples: Option<usize>,
    frac_order: Option<usize>,
    bulk_offset: Option<usize>,
    scan: Option<RawScan>,
}

/// The 20 nonzero offsets +/-25..+/-250 MHz in 25 MHz steps.
pub fn default_freq_offsets() -> Vec<f64> {
    (1..=10)
        .flat_map(|m| {
            let f = m as f64 * 25.0e6;
            [-f, f]
        })
        .collect()
}

pub fn default_steer_list() -> Vec<f64> {
    (0..=9).map(|i| i as f64 * 10.0).collect()
}

impl Default for RunConfig {
    fn default() -> Self {
        let array = ArrayConfig::new(16, 1.0e9, 550.0e6).expect("valid default array");
        RunConfig {
            array,
            freq_offsets_hz: default_freq_offsets(),
            steer_deg_list: default_steer_list(),
            search: DelaySearchSpec::default_for(&array),
            num_samples: 4096,
            frac_order: 62,
            bulk_offset: 8,
            scan: ScanParams::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.array.validate().map_err(|e| Error::config(e.to_string()))?;
        self.search.validate().map_err(|e| Error::config(e.to_string()))?;
        self.scan.validate().map_err(|e| Error::config(e.to_string()))?;
        if self.num_samples < 1 {
            return Err(Error::config("num_samples must be >= 1"));
        }
        if self.frac_order % 2 != 0 || self.frac_order < 8 {
            return Err(Error::config("frac_order must be even and >= 8"));
        }
        if self.bulk_offset > 29 {
            return Err(Error::config("bulk_offset must be <= 29"));
        }
        if self.freq_offsets_hz.is_empty() {
            return Err(Error::config("freq_offsets_hz must be non-empty"));
        }
        for &f in &self.freq_offsets_hz {
            if f.abs() >= self.array.sample_rate_hz / 2.0 {
                return Err(Error::config(format!(
                    "freq offset {f} violates the complex Nyquist limit {}",
                    self.array.sample_rate_hz / 2.0
                )));
            }
        }
        for &a in &self.steer_deg_list {
            if !(-90.0..=90.0).contains(&a) {
                return Err(Error::config(format!(
                    "steering angle {a} outside [-90, 90]"
                )));
            }
        }
        Ok(())
    }
}

/// Parses a JSON document into a fully validated `RunConfig`, filling
/// omitted fields with the design defaults. Unknown keys are rejected.
pub fn load_config(text: &str) -> Result<RunConfig> {
    let raw: RawRunConfig =
        serde_json::from_str(text).map_err(|e| Error::config(format!("parse error: {e}")))?;
    let defaults = RunConfig::default();

    let ra = raw.array.unwrap_or_default();
    let carrier_hz = ra.carrier_hz.unwrap_or(defaults.array.carrier_hz);
    let array = ArrayConfig {
        num_elements: ra.num_elements.unwrap_or(defaults.array.num_elements),
        carrier_hz,
        sample_rate_hz: ra.sample_rate_hz.unwrap_or(defaults.array.sample_rate_hz),
        spacing_m: ra.spacing_m.unwrap_or(SPEED_OF_LIGHT / (2.0 * carrier_hz)),
        light_speed_m_s: ra.light_speed_m_s.unwrap_or(SPEED_OF_LIGHT),
    };
    array.validate().map_err(|e| Error::config(e.to_string()))?;

    let rs = raw.search.unwrap_or_default();
    let bound = array.delay_bound_samples();
    let search = DelaySearchSpec {
        min_samples: rs.min_samples.unwrap_or(-bound),
        max_samples: rs.max_samples.unwrap_or(bound),
        coarse_points: rs.coarse_points.unwrap_or(defaults.search.coarse_points),
        refine_rounds: rs.refine_rounds.unwrap_or(defaults.search.refine_rounds),
        refine_shrink: rs.refine_shrink.unwrap_or(defaults.search.refine_shrink),
    };

    let rc = raw.scan.unwrap_or_default();
    let scan = ScanParams {
        coarse_step_deg: rc.coarse_step_deg.unwrap_or(defaults.scan.coarse_step_deg),
        refine_step_deg: rc.refine_step_deg.unwrap_or(defaults.scan.refine_step_deg),
        refine_window_deg: rc
            .refine_window_deg
            .unwrap_or(defaults.scan.refine_window_deg),
    };

    let cfg = RunConfig {
        array,
        freq_offsets_hz: raw.freq_offsets_hz.unwrap_or(defaults.freq_offsets_hz),
        steer_deg_list: raw.steer_deg_list.unwrap_or(defaults.steer_deg_list),
        search,
        num_samples: raw.num_samples.unwrap_or(defaults.num_samples),
        frac_order: raw.frac_order.unwrap_or(defaults.frac_order),
        bulk_offset: raw.bulk_offset.unwrap_or(defaults.bulk_offset),
        scan,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn serialize_config(cfg: &RunConfig) -> String {
    let mut s = serde_json::to_string_pretty(cfg).expect("config serializes");
    s.push('\n');
    s
}

fn beamformer_spec(
    cfg: &RunConfig,
    variant: BeamformerVariant,
    steer_deg: f64,
    delta: Option<f64>,
) -> Result<BeamformerSpec> {
    let spec = match variant {
        BeamformerVariant::PhaseOnly => BeamformerSpec::phase_only(steer_deg),
        BeamformerVariant::TrueTimeDelay => {
            let delta = delta.ok_or_else(|| {
                Error::invalid("the ttd beamformer requires --delta".to_string())
            })?;
            BeamformerSpec::ttd(steer_deg, delta, cfg.frac_order, cfg.bulk_offset)
        }
    };
    spec.validate(&cfg.array)?;
    Ok(spec)
}

/// Center frequencies for a squint table: carrier plus the configured
/// offsets, ascending.
pub fn table_center_freqs(cfg: &RunConfig) -> Vec<f64> {
    let mut freqs: Vec<f64> = cfg
        .freq_offsets_hz
        .iter()
        .map(|&o| cfg.array.carrier_hz + o)
        .collect();
    freqs.push(cfg.array.carrier_hz);
    freqs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    freqs.dedup();
    freqs
}

/// Offsets used by the optimizer cost: the nonzero configured offsets,
/// plus the carrier when `include_carrier` is set.
pub fn cost_offsets(cfg: &RunConfig, include_carrier: bool) -> Vec<f64> {
    let mut offsets: Vec<f64> = cfg
        .freq_offsets_hz
        .iter()
        .cloned()
        .filter(|&f| f != 0.0)
        .collect();
    if include_carrier {
        offsets.push(0.0);
    }
    offsets
}

/// Beam-pattern CSV: scan_deg,power_db at the coarse scan resolution.
pub fn cmd_pattern(
    cfg: &RunConfig,
    steer_deg: f64,
    baseband_hz: f64,
    variant: BeamformerVariant,
    delta: Option<f64>,
) -> Result<String> {
    let spec = beamformer_spec(cfg, variant, steer_deg, delta)?;
    let n = (180.0 / cfg.scan.coarse_step_deg).round() as usize;
    let grid: Vec<f64> = (0..=n)
        .map(|i| -90.0 + i as f64 * cfg.scan.coarse_step_deg)
        .take_while(|&a| a <= 90.0 + 1e-9)
        .map(|a| a.min(90.0))
        .collect();
    let pattern = beam_pattern(&cfg.array, &spec, baseband_hz, &grid)?;
    let mut out = String::from("scan_deg,power_db\n");
    for (a, p) in pattern.scan_deg.iter().zip(&pattern.power_db) {
        writeln!(out, "{a:.6},{p:.6}").unwrap();
    }
    Ok(out)
}

/// Squint-table CSV: center_hz,steered_deg,squint_deg.
pub fn cmd_squint_table(
    cfg: &RunConfig,
    steer_deg: f64,
    variant: BeamformerVariant,
    delta: Option<f64>,
) -> Result<String> {
    let spec = beamformer_spec(cfg, variant, steer_deg, delta)?;
    let rows = squint_table(&cfg.array, &spec, &table_center_freqs(cfg), &cfg.scan)?;
    Ok(squint_rows_csv(&rows))
}

pub fn squint_rows_csv(rows: &[SquintRow]) -> String {
    let mut out = String::from("center_hz,steered_deg,squint_deg\n");
    for r in rows {
        writeln!(
            out,
            "{:.0},{:.2},{:.2}",
            r.center_hz, r.steered_deg, r.squint_deg
        )
        .unwrap();
    }
    out
}

pub fn trace_csv(trace: &OptimizationTrace) -> String {
    let mut out = String::from("delta_samples,cost_deg\n");
    for (d, c) in trace.delays.iter().zip(&trace.costs) {
        writeln!(out, "{d:.4},{c:.4}").unwrap();
    }
    out
}

/// Optimum-delay summary for one steering angle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimumDelay {
    pub steering_deg: f64,
    pub best_delay_samples: f64,
    pub best_cost_deg: f64,
    pub max_squint_deg: f64,
    pub max_squint_center_hz: f64,
}

/// Runs the delay search for one angle, then measures the residual
/// squint table at the optimum.
pub fn optimize_angle(
    cfg: &RunConfig,
    steer_deg: f64,
    include_carrier: bool,
) -> Result<(OptimizationTrace, Vec<SquintRow>, OptimumDelay)> {
    let offsets = cost_offsets(cfg, include_carrier);
    let trace = optimize_delay(
        &cfg.array,
        steer_deg,
        &offsets,
        &cfg.search,
        cfg.frac_order,
        cfg.bulk_offset,
        &cfg.scan,
    )?;
    let spec = BeamformerSpec::ttd(steer_deg, trace.best_delay, cfg.frac_order, cfg.bulk_offset);
    let rows = squint_table(&cfg.array, &spec, &table_center_freqs(cfg), &cfg.scan)?;
    let worst = rows
        .iter()
        .max_by(|a, b| a.squint_deg.partial_cmp(&b.squint_deg).unwrap())
        .expect("non-empty table");
    let summary = OptimumDelay {
        steering_deg: steer_deg,
        best_delay_samples: trace.best_delay,
        best_cost_deg: trace.best_cost,
        max_squint_deg: worst.squint_deg,
        max_squint_center_hz: worst.center_hz,
    };
    Ok((trace, rows, summary))
}

pub fn optimize_summary_line(s: &OptimumDelay) -> String {
    format!(
        "steer={:.2} best_delay={:.4} best_cost={:.4} max_squint={:.2} at {:.0} Hz",
        s.steering_deg, s.best_delay_samples, s.best_cost_deg, s.max_squint_deg, s.max_squint_center_hz
    )
}

/// Per-angle squint tables, optimum delays, and convergence traces for
/// the configured steering list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportBundle {
    pub steer_deg_list: Vec<f64>,
    pub optimum_delays: Vec<OptimumDelay>,
    pub squint_tables: Vec<Vec<SquintRow>>,
    pub traces: Vec<OptimizationTrace>,
}

/// Full sweep over the configured steering angles. Angles run
/// concurrently; results are assembled in list order.
pub fn cmd_sweep(cfg: &RunConfig, include_carrier: bool) -> Result<ReportBundle> {
    let results: Vec<(OptimizationTrace, Vec<SquintRow>, OptimumDelay)> = cfg
        .steer_deg_list
        .par_iter()
        .map(|&steer| optimize_angle(cfg, steer, include_carrier))
        .collect::<Result<_>>()?;
    let mut bundle = ReportBundle {
        steer_deg_list: cfg.steer_deg_list.clone(),
        optimum_delays: Vec::new(),
        squint_tables: Vec::new(),
        traces: Vec::new(),
    };
    for (trace, rows, summary) in results {
        bundle.optimum_delays.push(summary);
        bundle.squint_tables.push(rows);
        bundle.traces.push(trace);
    }
    Ok(bundle)
}

/// Filter tap export: one coefficient per line.
pub fn cmd_export_taps(fraction: f64, order: usize) -> Result<String> {
    let filter = design_fractional(fraction, order)?;
    let mut out = String::new();
    for t in &filter.taps {
        writeln!(out, "{t}").unwrap();
    }
    Ok(out)
}
