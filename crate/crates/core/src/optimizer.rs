//! Grid-search minimization of the total squint over the per-element
//! incremental baseband delay, with two refinement rounds around the
//! incumbent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array_model::ArrayConfig;
use crate::beamformers::BeamformerSpec;
use crate::error::{Error, Result};
use crate::squint_analysis::{steering_locked_peak, ScanParams};

/// Points per refinement grid.
const REFINE_POINTS: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelaySearchSpec {
    pub min_samples: f64,
    pub max_samples: f64,
    pub coarse_points: usize,
    pub refine_rounds: usize,
    pub refine_shrink: f64,
}

impl DelaySearchSpec {
    /// Full solution space `[-f_s*d/c, +f_s*d/c]`, 111 coarse points
    /// (0.005-sample steps at the half-wavelength default), two
    /// ten-fold refinements.
    pub fn default_for(config: &ArrayConfig) -> Self {
        let bound = config.delay_bound_samples();
        DelaySearchSpec {
            min_samples: -bound,
            max_samples: bound,
            coarse_points: 111,
            refine_rounds: 2,
            refine_shrink: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_samples < self.max_samples) {
            return Err(Error::invalid("search min must be below max"));
        }
        if self.coarse_points < 3 {
            return Err(Error::invalid("coarse grid needs at least 3 points"));
        }
        if !(self.refine_shrink > 0.0 && self.refine_shrink < 1.0) {
            return Err(Error::invalid("refine_shrink must be in (0, 1)"));
        }
        Ok(())
    }

    fn coarse_step(&self) -> f64 {
        (self.max_samples - self.min_samples) / (self.coarse_points - 1) as f64
    }
}

/// Every (delay, cost) pair evaluated by the search, in evaluation
/// order: the full coarse grid first, then the refinement rounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub delays: Vec<f64>,
    pub costs: Vec<f64>,
    pub best_delay: f64,
    pub best_cost: f64,
}

impl OptimizationTrace {
    /// The coarse-grid portion of the trace (the convergence bowl).
    pub fn coarse(&self, search: &DelaySearchSpec) -> (&[f64], &[f64]) {
        let n = search.coarse_points.min(self.delays.len());
        (&self.delays[..n], &self.costs[..n])
    }
}

/// Total squint in degrees across the given baseband offsets for one
/// candidate delay: `sum_i |theta'(f_bb_i) - theta|`. The peak is
/// measured with the steering-locked rule, which stays on the
/// commanded beam even for delays far from the optimum.
pub fn total_squint_cost(
    config: &ArrayConfig,
    theta_deg: f64,
    delta_samples: f64,
    baseband_offsets_hz: &[f64],
    frac_order: usize,
    bulk_offset: usize,
    scan: &ScanParams,
) -> Result<f64> {
    let spec = BeamformerSpec::ttd(theta_deg, delta_samples, frac_order, bulk_offset);
    let mut sum = 0.0;
    for &fbb in baseband_offsets_hz {
        let steered = steering_locked_peak(config, &spec, fbb, scan)?;
        sum += (steered - theta_deg).abs();
    }
    Ok(sum)
}

/// Ties are broken toward the smallest |delay|, then the smallest
/// delay, so a symmetric cost keeps boresight at exactly zero.
fn better(cost: f64, delay: f64, best_cost: f64, best_delay: f64) -> bool {
    if cost != best_cost {
        return cost < best_cost;
    }
    if delay.abs() != best_delay.abs() {
        return delay.abs() < best_delay.abs();
    }
    delay < best_delay
}

/// Coarse grid search over the delay solution space followed by
/// `refine_rounds` shrunken grids centered on the incumbent.
/// Deterministic regardless of thread count.
pub fn optimize_delay(
    config: &ArrayConfig,
    theta_deg: f64,
    baseband_offsets_hz: &[f64],
    search: &DelaySearchSpec,
    frac_order: usize,
    bulk_offset: usize,
    scan: &ScanParams,
) -> Result<OptimizationTrace> {
    search.validate()?;
    if baseband_offsets_hz.is_empty() {
        return Err(Error::invalid("frequency list must be non-empty"));
    }

    let eval_grid = |grid: &[f64]| -> Result<Vec<f64>> {
        grid.par_iter()
            .map(|&d| {
                total_squint_cost(
                    config,
                    theta_deg,
                    d,
                    baseband_offsets_hz,
                    frac_order,
                    bulk_offset,
                    scan,
                )
            })
            .collect()
    };

    let coarse: Vec<f64> = (0..search.coarse_points)
        .map(|i| search.min_samples + i as f64 * search.coarse_step())
        .collect();
    let mut delays = coarse.clone();
    let mut costs = eval_grid(&coarse)?;

    let mut best_delay = delays[0];
    let mut best_cost = costs[0];
    for (&d, &c) in delays.iter().zip(&costs).skip(1) {
        if better(c, d, best_cost, best_delay) {
            best_cost = c;
            best_delay = d;
        }
    }

    let mut half_width = search.coarse_step();
    for _ in 0..search.refine_rounds {
        let lo = (best_delay - half_width).max(search.min_samples);
        let hi = (best_delay + half_width).min(search.max_samples);
        let step = (hi - lo) / (REFINE_POINTS - 1) as f64;
        let grid: Vec<f64> = (0..REFINE_POINTS).map(|i| lo + i as f64 * step).collect();
        let grid_costs = eval_grid(&grid)?;
        for (&d, &c) in grid.iter().zip(&grid_costs) {
            if better(c, d, best_cost, best_delay) {
                best_cost = c;
                best_delay = d;
            }
        }
        delays.extend_from_slice(&grid);
        costs.extend_from_slice(&grid_costs);
        half_width *= search.refine_shrink;
    }

    Ok(OptimizationTrace {
        delays,
        costs,
        best_delay,
        best_cost,
    })
}
