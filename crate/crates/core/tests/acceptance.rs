//! End-to-end acceptance checks for the 16-element design case
//! (1 GHz carrier, 550 MHz sampling, half-wavelength spacing).
//! Each test prints one pass/fail line for its criterion.

use std::sync::OnceLock;

use beamsquint::cli_io::{load_config, optimize_angle, table_center_freqs, OptimumDelay, RunConfig};
use beamsquint::optimizer::OptimizationTrace;
use beamsquint::squint_analysis::{
    analytic_squint_approx, analytic_steered_exact, beam_pattern, squint_table,
    tracked_steered_angles, ScanParams, SquintRow,
};
use beamsquint::{
    apply_delay, combine_phase_only, combine_ttd, decompose_delay, design_fractional,
    measure_phase_delay, synthesize_received, ArrayConfig, BeamformerSpec, ElementSignals,
    ToneSource,
};
use num_complex::Complex64;

fn design_config() -> RunConfig {
    load_config("{}").expect("default config")
}

fn report(criterion: &str, outcome: Result<(), String>) {
    match &outcome {
        Ok(()) => println!("[PASS] {criterion}"),
        Err(msg) => println!("[FAIL] {criterion}: {msg}"),
    }
    if let Err(msg) = outcome {
        panic!("{criterion}: {msg}");
    }
}

fn check(cond: bool, msg: impl Fn() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Shared optimizer sweep over 0..90 degrees in 10-degree steps, used
/// by the optimum-delay, residual-squint, and unimodality criteria.
fn optimizer_sweep() -> &'static Vec<(OptimizationTrace, Vec<SquintRow>, OptimumDelay)> {
    static SWEEP: OnceLock<Vec<(OptimizationTrace, Vec<SquintRow>, OptimumDelay)>> =
        OnceLock::new();
    SWEEP.get_or_init(|| {
        let cfg = design_config();
        cfg.steer_deg_list
            .iter()
            .map(|&theta| optimize_angle(&cfg, theta, false).expect("optimize"))
            .collect()
    })
}

#[test]
fn criterion_1_boresight_has_no_squint() {
    let run = || -> Result<(), String> {
        let cfg = design_config();
        let spec = BeamformerSpec::phase_only(0.0);
        let rows = squint_table(&cfg.array, &spec, &table_center_freqs(&cfg), &cfg.scan)
            .map_err(|e| e.to_string())?;
        check(rows.len() == 21, || format!("expected 21 rows, got {}", rows.len()))?;
        for r in &rows {
            check(r.squint_deg < 0.02, || {
                format!("squint {} deg at {} Hz", r.squint_deg, r.center_hz)
            })?;
        }
        Ok(())
    };
    report("criterion 1: boresight beam stays at 0 deg across the band", run());
}

#[test]
fn criterion_2_phase_only_squint_matches_exact_peak_formula() {
    let run = || -> Result<(), String> {
        let cfg = design_config();
        let freqs = table_center_freqs(&cfg);
        let mut worst = 0.0f64;
        for theta in [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0] {
            let spec = BeamformerSpec::phase_only(theta);
            let rows = squint_table(&cfg.array, &spec, &freqs, &cfg.scan)
                .map_err(|e| e.to_string())?;
            for r in &rows {
                let expected = analytic_steered_exact(theta, r.center_hz, cfg.array.carrier_hz)
                    .map_err(|e| e.to_string())?;
                let err = (r.steered_deg - expected).abs();
                worst = worst.max(err);
                check(err < 0.1, || {
                    format!(
                        "theta={theta} f={} measured {} expected {expected}",
                        r.center_hz, r.steered_deg
                    )
                })?;
            }
        }
        println!("  worst peak-location error over 8 angles x 21 freqs: {worst:.4} deg");
        Ok(())
    };
    report(
        "criterion 2: measured phase-only squint matches the closed-form peak location",
        run(),
    );
}

#[test]
fn criterion_3_endfire_clamp_at_60_degrees() {
    let run = || -> Result<(), String> {
        let cfg = design_config();
        let spec = BeamformerSpec::phase_only(60.0);
        let freqs = [750.0e6, 775.0e6, 800.0e6, 825.0e6];
        let rows = squint_table(&cfg.array, &spec, &freqs, &cfg.scan)
            .map_err(|e| e.to_string())?;
        for r in &rows {
            check((r.squint_deg - 30.0).abs() < 0.05, || {
                format!("f={} steered {} squint {}", r.center_hz, r.steered_deg, r.squint_deg)
            })?;
        }
        Ok(())
    };
    report(
        "criterion 3: beam clamps to endfire (squint 30.00 deg) for f <= 825 MHz at 60 deg",
        run(),
    );
}

#[test]
fn criterion_4_small_offset_approximation() {
    let run = || -> Result<(), String> {
        let cfg = design_config();
        // closed-form check: first-order tangent rule vs exact peak
        for theta in [10.0, 20.0, 30.0, 40.0, 50.0, 60.0] {
            for fbb in [-50.0e6, -25.0e6, 25.0e6, 50.0e6] {
                let approx = analytic_squint_approx(theta, fbb, cfg.array.carrier_hz)
                    .map_err(|e| e.to_string())?;
                let exact = analytic_steered_exact(
                    theta,
                    cfg.array.carrier_hz + fbb,
                    cfg.array.carrier_hz,
                )
                .map_err(|e| e.to_string())?
                    - theta;
                let rel = (approx - exact).abs() / exact.abs();
                check(rel < 0.15, || {
                    format!("theta={theta} fbb={fbb} approx={approx} exact={exact}")
                })?;
            }
        }
        // spot check at 40 deg, 975 MHz: the tangent rule says 1.20 deg,
        // and the measured squint agrees with it to first order
        let approx = analytic_squint_approx(40.0, -25.0e6, cfg.array.carrier_hz)
            .map_err(|e| e.to_string())?;
        check((approx - 1.20).abs() < 0.02, || {
            format!("tangent-rule squint {approx} deg, expected 1.20")
        })?;
        let spec = BeamformerSpec::phase_only(40.0);
        let measured = tracked_steered_angles(&cfg.array, &spec, &[-25.0e6], &cfg.scan)
            .map_err(|e| e.to_string())?;
        let squint = (measured[0].1 - 40.0).abs();
        check((squint - approx).abs() / squint < 0.15, || {
            format!("measured squint {squint} deg vs tangent rule {approx}")
        })?;
        Ok(())
    };
    report(
        "criterion 4: tangent-rule squint estimate holds within 15% for small offsets",
        run(),
    );
}

#[test]
fn criterion_5_optimum_delays() {
    let run = || -> Result<(), String> {
        let cfg = design_config();
        let expected = [
            0.0, 0.0495, 0.0935, 0.1375, 0.1760, 0.2090, 0.2365, 0.2585, 0.2695, 0.2750,
        ];
        let sweep = optimizer_sweep();
        check(sweep.len() == expected.len(), || "sweep length".to_string())?;
        for ((_, _, summary), &exp) in sweep.iter().zip(&expected) {
            let got = summary.best_delay_samples;
            println!(
                "  theta={:>4} deg: delay {:.4} samples (expected near {exp})",
                summary.steering_deg, got
            );
            check((got - exp).abs() < 0.02, || {
                format!("theta={} delay {got} expected {exp}", summary.steering_deg)
            })?;
        }
        for w in sweep.windows(2) {
            check(
                w[1].2.best_delay_samples > w[0].2.best_delay_samples,
                || {
                    format!(
                        "delays not increasing: {} then {}",
                        w[0].2.best_delay_samples, w[1].2.best_delay_samples
                    )
                },
            )?;
        }
        // determinism under the parallel grid evaluation
        let again = optimize_angle(&cfg, 40.0, false).map_err(|e| e.to_string())?;
        let first = &sweep[4].0;
        check(
            again.0.delays == first.delays
                && again.0.costs == first.costs
                && again.0.best_delay == first.best_delay,
            || "repeated optimization differs".to_string(),
        )?;
        Ok(())
    };
    report(
        "criterion 5: optimized fractional delays increase with angle and match expectation",
        run(),
    );
}

#[test]
fn criterion_6_residual_squint_with_optimum_delay() {
    let run = || -> Result<(), String> {
        for (_, _, summary) in optimizer_sweep() {
            let limit = if summary.steering_deg >= 90.0 { 2.5 } else { 1.0 };
            println!(
                "  theta={:>4} deg: max residual squint {:.4} deg at {:.0} Hz",
                summary.steering_deg, summary.max_squint_deg, summary.max_squint_center_hz
            );
            check(summary.max_squint_deg < limit, || {
                format!(
                    "theta={} residual {} exceeds {limit}",
                    summary.steering_deg, summary.max_squint_deg
                )
            })?;
        }
        Ok(())
    };
    report(
        "criterion 6: optimized delays keep squint under 1 deg (2.5 deg at endfire)",
        run(),
    );
}

#[test]
fn criterion_7_fractional_filter_accuracy() {
    let run = || -> Result<(), String> {
        let fs = 550.0e6;
        for frac in [-0.5, -0.25, 0.25, 0.5] {
            let decomp = decompose_delay(frac, 2).map_err(|e| e.to_string())?;
            let filter =
                design_fractional(decomp.fraction_part, 62).map_err(|e| e.to_string())?;
            for tone_mhz in [25.0, 100.0, 250.0] {
                for sign in [1.0, -1.0] {
                    let tone_hz = sign * tone_mhz * 1.0e6;
                    let x: Vec<Complex64> = (0..1024)
                        .map(|k| {
                            Complex64::from_polar(
                                1.0,
                                std::f64::consts::TAU * tone_hz * k as f64 / fs,
                            )
                        })
                        .collect();
                    let y = apply_delay(&x, &decomp, &filter).map_err(|e| e.to_string())?;
                    let expected = 31.0 + 2.0 + frac;
                    let d = measure_phase_delay(&y, &x, tone_hz, fs, expected)
                        .map_err(|e| e.to_string())?;
                    check((d - expected).abs() < 0.02, || {
                        format!("frac={frac} tone={tone_hz} delay {d} expected {expected}")
                    })?;
                }
            }
        }
        Ok(())
    };
    report(
        "criterion 7: fractional-delay filters accurate to 0.02 samples across the band",
        run(),
    );
}

fn sum_signals(a: &ElementSignals, b: &ElementSignals) -> ElementSignals {
    let samples = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect();
    ElementSignals {
        samples,
        sample_rate_hz: a.sample_rate_hz,
    }
}

#[test]
fn criterion_8_structural_properties() {
    let run = || -> Result<(), String> {
        let cfg = design_config();
        let array = &cfg.array;
        let scan = &cfg.scan;
        let n = 512;

        // matched steering at the carrier gives coherent gain N^2
        let src = ToneSource::new(30.0, 0.0).map_err(|e| e.to_string())?;
        let sig = synthesize_received(array, &src, n).map_err(|e| e.to_string())?;
        let phase = combine_phase_only(&sig, array, 30.0).map_err(|e| e.to_string())?;
        let ideal = array.delay_bound_samples() * 30.0_f64.to_radians().sin();
        let ttd = combine_ttd(&sig, array, 30.0, ideal, 62, 8).map_err(|e| e.to_string())?;
        for (label, p) in [("phase-only", phase.power), ("true-time-delay", ttd.power)] {
            check((p - 256.0).abs() < 0.256, || {
                format!("{label} matched power {p}, expected 256")
            })?;
        }

        // the causality offset moves the time origin, not the beam
        let base = BeamformerSpec::ttd(40.0, 0.176, 62, 6);
        let moved = BeamformerSpec::ttd(40.0, 0.176, 62, 10);
        let a = tracked_steered_angles(array, &base, &[-250.0e6], scan)
            .map_err(|e| e.to_string())?[0]
            .1;
        let b = tracked_steered_angles(array, &moved, &[-250.0e6], scan)
            .map_err(|e| e.to_string())?[0]
            .1;
        check((a - b).abs() < 0.005, || {
            format!("bulk offset changed the peak: {a} vs {b}")
        })?;

        // zero incremental delay degenerates to the phase-only beamformer
        let grid: Vec<f64> = (0..=360).map(|i| -90.0 + i as f64 * 0.5).collect();
        let p_phase =
            beam_pattern(array, &BeamformerSpec::phase_only(20.0), 150.0e6, &grid)
                .map_err(|e| e.to_string())?;
        let p_zero = beam_pattern(array, &BeamformerSpec::ttd(20.0, 0.0, 62, 8), 150.0e6, &grid)
            .map_err(|e| e.to_string())?;
        for (x, y) in p_phase.power_db.iter().zip(&p_zero.power_db) {
            check((x - y).abs() < 1e-6, || {
                format!("zero-delay pattern differs: {x} vs {y}")
            })?;
        }

        // the combiner is linear: two tones in, sum of responses out
        let s1 = synthesize_received(array, &ToneSource::new(25.0, 100.0e6).unwrap(), n)
            .map_err(|e| e.to_string())?;
        let s2 = synthesize_received(array, &ToneSource::new(-10.0, -75.0e6).unwrap(), n)
            .map_err(|e| e.to_string())?;
        let both = sum_signals(&s1, &s2);
        let o1 = combine_ttd(&s1, array, 25.0, 0.116, 62, 8).map_err(|e| e.to_string())?;
        let o2 = combine_ttd(&s2, array, 25.0, 0.116, 62, 8).map_err(|e| e.to_string())?;
        let ob = combine_ttd(&both, array, 25.0, 0.116, 62, 8).map_err(|e| e.to_string())?;
        for k in 0..n {
            let lin = o1.samples[k] + o2.samples[k];
            check((ob.samples[k] - lin).norm() < 1e-9, || {
                format!("combiner not linear at sample {k}")
            })?;
        }

        // mirror symmetry: negating angle and delay mirrors the squint table
        for theta in [20.0, 50.0] {
            let freqs = table_center_freqs(&cfg);
            let delta = array.delay_bound_samples() * (theta as f64).to_radians().sin();
            let pos = squint_table(array, &BeamformerSpec::ttd(theta, delta, 62, 8), &freqs, scan)
                .map_err(|e| e.to_string())?;
            let neg = squint_table(
                array,
                &BeamformerSpec::ttd(-theta, -delta, 62, 8),
                &freqs,
                scan,
            )
            .map_err(|e| e.to_string())?;
            for (r_pos, r_neg) in pos.iter().zip(&neg) {
                check(
                    (r_pos.steered_deg + r_neg.steered_deg).abs() < 1e-6,
                    || {
                        format!(
                            "mirror broken at {} Hz: {} vs {}",
                            r_pos.center_hz, r_pos.steered_deg, r_neg.steered_deg
                        )
                    },
                )?;
            }
        }

        // the coarse search bowl is unimodal around its minimum
        for &idx in &[2usize, 4, 6, 9] {
            let (trace, _, summary) = &optimizer_sweep()[idx];
            let (delays, costs) = trace.coarse(&cfg.search);
            let argmin = costs
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            let lo = argmin.saturating_sub(10);
            let hi = (argmin + 10).min(costs.len() - 1);
            for i in lo..argmin {
                check(costs[i + 1] <= costs[i] + 1e-6, || {
                    format!(
                        "theta={}: coarse cost rises toward the minimum near delay {}",
                        summary.steering_deg, delays[i]
                    )
                })?;
            }
            for i in argmin..hi {
                check(costs[i + 1] >= costs[i] - 1e-6, || {
                    format!(
                        "theta={}: coarse cost falls away from the minimum near delay {}",
                        summary.steering_deg, delays[i]
                    )
                })?;
            }
        }
        Ok(())
    };
    report(
        "criterion 8: structural properties (gain, causality offset, degeneracy, linearity, symmetry, unimodality)",
        run(),
    );
}
