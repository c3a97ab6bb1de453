//! Post-processing of trajectories: steady-state amplitude, settling, phase
//! relative to the drive, and frequency sweeps.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use thiserror::Error;

use crate::integrator::{IntegrationError, PeriodicTiming};
use crate::model::{StrokeParams, Trajectory};
use crate::pitch::PeakTorques;
use crate::stroke::StrokeModel;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("trajectory spans {available:.3} drive periods, need at least {needed}")]
    TooShort { needed: usize, available: f64 },
    #[error("trajectory has not settled: per-cycle amplitude spread {spread:.4} exceeds {tol}")]
    Unsettled { spread: f64, tol: f64 },
    #[error("invalid analysis input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}

/// Window and tolerance used to decide whether a run has settled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisSettings {
    /// Number of trailing drive cycles examined.
    pub cycles: usize,
    /// Maximum relative spread of per-cycle amplitudes.
    pub settle_tol: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            cycles: 10,
            settle_tol: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyAmplitude {
    /// Half the mean peak-to-peak over the examined cycles (rad).
    pub amplitude: f64,
    pub settled: bool,
    /// (max − min) / mean of the per-cycle amplitudes; zero for a flat signal.
    pub spread: f64,
    /// Per-cycle half peak-to-peak, oldest first.
    pub per_cycle: Vec<f64>,
}

/// Index ranges (inclusive) of the last `n` whole drive cycles, oldest first.
fn trailing_cycles(
    traj: &Trajectory,
    omega: f64,
    n: usize,
) -> Result<Vec<(usize, usize)>, AnalysisError> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(AnalysisError::Invalid(format!("drive omega must be positive, got {omega}")));
    }
    if n == 0 {
        return Err(AnalysisError::Invalid("need at least one cycle".into()));
    }
    let period = TAU / omega;
    let dt = traj.dt_out();
    if period < 2.0 * dt {
        return Err(AnalysisError::Invalid(format!(
            "output interval {dt} s cannot resolve drive period {period} s"
        )));
    }
    let t0 = traj.start();
    let t_end = traj.end();
    let last = traj.len() - 1;
    let eps = 1e-6;
    let index_at = |t: f64, round_up: bool| {
        let x = (t - t0) / dt;
        let i = if round_up { (x - eps).ceil() } else { (x + eps).floor() };
        (i.max(0.0) as usize).min(last)
    };
    let mut out = Vec::with_capacity(n);
    for c in (0..n).rev() {
        let hi_t = t_end - c as f64 * period;
        let lo_t = hi_t - period;
        out.push((index_at(lo_t, true), index_at(hi_t, false)));
    }
    Ok(out)
}

fn require_span(traj: &Trajectory, omega: f64, needed: usize) -> Result<(), AnalysisError> {
    let available = traj.duration() * omega / TAU;
    if available + 1e-9 < needed as f64 {
        return Err(AnalysisError::TooShort { needed, available });
    }
    Ok(())
}

/// Refines a discrete extremum at `i` with a parabola through its neighbours.
fn parabolic_peak(y: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= y.len() {
        return y[i];
    }
    let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
    let curvature = a - 2.0 * b + c;
    if curvature == 0.0 {
        return b;
    }
    b - (c - a) * (c - a) / (8.0 * curvature)
}

fn cycle_amplitude(angles: &[f64], lo: usize, hi: usize) -> f64 {
    let (mut imax, mut imin) = (lo, lo);
    for i in lo..=hi {
        if angles[i] > angles[imax] {
            imax = i;
        }
        if angles[i] < angles[imin] {
            imin = i;
        }
    }
    0.5 * (parabolic_peak(angles, imax) - parabolic_peak(angles, imin))
}

fn spread_of(per_cycle: &[f64]) -> (f64, f64) {
    let mean = per_cycle.iter().sum::<f64>() / per_cycle.len() as f64;
    let max = per_cycle.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = per_cycle.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if mean > 0.0 { (max - min) / mean } else { 0.0 };
    (mean, spread)
}

/// Steady-state amplitude over the last `n_cycles` drive periods.
///
/// Requires the trajectory to span at least `3·n_cycles` periods. Each
/// cycle's maximum and minimum are refined by parabolic interpolation.
pub fn steady_amplitude(
    traj: &Trajectory,
    drive_omega: f64,
    n_cycles: usize,
    tol: f64,
) -> Result<SteadyAmplitude, AnalysisError> {
    let windows = trailing_cycles(traj, drive_omega, n_cycles)?;
    require_span(traj, drive_omega, 3 * n_cycles)?;
    let angles: Vec<f64> = traj.angles().collect();
    let per_cycle: Vec<f64> = windows
        .iter()
        .map(|&(lo, hi)| cycle_amplitude(&angles, lo, hi))
        .collect();
    let (amplitude, spread) = spread_of(&per_cycle);
    Ok(SteadyAmplitude {
        amplitude,
        settled: spread < tol,
        spread,
        per_cycle,
    })
}

/// Start time of the earliest whole cycle after which every cycle's
/// amplitude stays within `tol` (relative) of the final steady amplitude.
/// `None` when the final window itself has not settled.
pub fn settle_time(
    traj: &Trajectory,
    drive_omega: f64,
    settings: &AnalysisSettings,
) -> Result<Option<f64>, AnalysisError> {
    let steady = steady_amplitude(traj, drive_omega, settings.cycles, settings.settle_tol)?;
    if !steady.settled {
        return Ok(None);
    }
    let whole = (traj.duration() * drive_omega / TAU + 1e-9).floor() as usize;
    let windows = trailing_cycles(traj, drive_omega, whole)?;
    let angles: Vec<f64> = traj.angles().collect();
    let target = steady.amplitude;
    let mut first = windows.len();
    for (k, &(lo, hi)) in windows.iter().enumerate().rev() {
        let a = cycle_amplitude(&angles, lo, hi);
        let ok = if target > 0.0 {
            ((a - target) / target).abs() <= settings.settle_tol
        } else {
            a == 0.0
        };
        if !ok {
            break;
        }
        first = k;
    }
    let first = first.min(windows.len() - 1);
    Ok(Some(traj.samples()[windows[first].0].t - traj.start()))
}

/// Phase of the fundamental component of the angle at `drive_omega`,
/// relative to the drive `sin(ωt + drive_phase)`, over the last `n_cycles`
/// periods. Single-bin Fourier projection; result in (−π, π].
pub fn fundamental_phase(
    traj: &Trajectory,
    drive_omega: f64,
    drive_phase: f64,
    n_cycles: usize,
) -> Result<f64, AnalysisError> {
    let windows = trailing_cycles(traj, drive_omega, n_cycles)?;
    require_span(traj, drive_omega, n_cycles)?;
    let lo = windows[0].0;
    let hi = windows[windows.len() - 1].1;
    let samples = traj.samples();
    // drop the closing sample so the window holds whole periods
    let (mut s, mut c) = (0.0, 0.0);
    for x in &samples[lo..hi] {
        let (sn, cs) = (drive_omega * x.t + drive_phase).sin_cos();
        s += x.angle * sn;
        c += x.angle * cs;
    }
    let phase = c.atan2(s);
    Ok(if phase <= -PI { phase + TAU } else { phase })
}

/// Phase of the settled response relative to the drive; errors when the run
/// has not settled.
pub fn phase_lag(
    traj: &Trajectory,
    drive_omega: f64,
    drive_phase: f64,
    settings: &AnalysisSettings,
) -> Result<f64, AnalysisError> {
    let steady = steady_amplitude(traj, drive_omega, settings.cycles, settings.settle_tol)?;
    if !steady.settled {
        return Err(AnalysisError::Unsettled {
            spread: steady.spread,
            tol: settings.settle_tol,
        });
    }
    fundamental_phase(traj, drive_omega, drive_phase, settings.cycles)
}

/// Where |angle| peaks and dips relative to a sinusoidal stroke
/// `A·sin(ωt + phase)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrokeAlignment {
    /// For every half-cycle centred on mid-stroke (stroke phase ≡ 0 mod π),
    /// stroke phase of the largest |angle| minus that mid-stroke phase (rad).
    pub max_offsets: Vec<f64>,
    /// For every half-cycle centred on a stroke extreme (phase ≡ π/2 mod π),
    /// stroke phase of the smallest |angle| minus the extreme phase (rad).
    pub min_offsets: Vec<f64>,
}

impl StrokeAlignment {
    pub fn worst_max_offset(&self) -> f64 {
        self.max_offsets.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn worst_min_offset(&self) -> f64 {
        self.min_offsets.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

fn half_cycle_extrema(
    traj: &Trajectory,
    lo: usize,
    hi: usize,
    phase_of: impl Fn(f64) -> f64,
    centre: f64,
    pick_max: bool,
) -> Vec<f64> {
    let samples = &traj.samples()[lo..=hi];
    let first_phase = phase_of(samples[0].t);
    let last_phase = phase_of(samples[samples.len() - 1].t);
    // half-cycle k spans centre + kπ ± π/2
    let k_of = |ph: f64| ((ph - centre) / PI).round() as i64;
    let mut out = Vec::new();
    let mut current: Option<(i64, f64, f64)> = None;
    for s in samples {
        let ph = phase_of(s.t);
        let k = k_of(ph);
        let full = centre + k as f64 * PI - FRAC_PI_2 >= first_phase - 1e-9
            && centre + k as f64 * PI + FRAC_PI_2 <= last_phase + 1e-9;
        if !full {
            continue;
        }
        let offset = ph - (centre + k as f64 * PI);
        let v = s.angle.abs();
        match current {
            Some((ck, best, _)) if ck == k => {
                let better = if pick_max { v > best } else { v < best };
                if better {
                    current = Some((k, v, offset));
                }
            }
            _ => {
                if let Some((_, _, off)) = current {
                    out.push(off);
                }
                current = Some((k, v, offset));
            }
        }
    }
    if let Some((_, _, off)) = current {
        out.push(off);
    }
    out
}

/// Locates per-half-cycle maxima and minima of |angle| relative to the
/// stroke over the last `n_cycles` periods.
pub fn stroke_alignment(
    traj: &Trajectory,
    stroke_omega: f64,
    stroke_phase: f64,
    n_cycles: usize,
) -> Result<StrokeAlignment, AnalysisError> {
    let windows = trailing_cycles(traj, stroke_omega, n_cycles)?;
    require_span(traj, stroke_omega, n_cycles)?;
    let lo = windows[0].0;
    let hi = windows[windows.len() - 1].1;
    let phase_of = |t: f64| stroke_omega * t + stroke_phase;
    Ok(StrokeAlignment {
        max_offsets: half_cycle_extrema(traj, lo, hi, phase_of, 0.0, true),
        min_offsets: half_cycle_extrema(traj, lo, hi, phase_of, FRAC_PI_2, false),
    })
}

/// Metrics extracted from a single run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    pub steady_amplitude: f64,
    pub settled: bool,
    /// Time from the start of the run to settling; `None` if not settled.
    pub settle_time: Option<f64>,
    /// Fundamental phase relative to the drive over the steady window, in
    /// (−π, π]. Reported even when unsettled; check `settled`.
    pub phase_lag_vs_drive: f64,
    /// Largest |rate| over the steady window (rad/s).
    pub peak_rate: f64,
    /// Per-term peak torques, for the pitch model.
    pub peak_torques: Option<PeakTorques>,
}

pub fn summarize(
    traj: &Trajectory,
    drive_omega: f64,
    drive_phase: f64,
    settings: &AnalysisSettings,
    peak_torques: Option<PeakTorques>,
) -> Result<SimSummary, AnalysisError> {
    let steady = steady_amplitude(traj, drive_omega, settings.cycles, settings.settle_tol)?;
    let settle_time = settle_time(traj, drive_omega, settings)?;
    let phase = fundamental_phase(traj, drive_omega, drive_phase, settings.cycles)?;
    let windows = trailing_cycles(traj, drive_omega, settings.cycles)?;
    let lo = windows[0].0;
    let peak_rate = traj.samples()[lo..]
        .iter()
        .map(|s| s.rate.abs())
        .fold(0.0, f64::max);
    Ok(SimSummary {
        steady_amplitude: steady.amplitude,
        settled: steady.settled,
        settle_time,
        phase_lag_vs_drive: phase,
        peak_rate,
        peak_torques,
    })
}

/// One point of a frequency sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonancePoint {
    pub omega: f64,
    pub result: Result<SteadyAmplitude, AnalysisError>,
}

impl ResonancePoint {
    pub fn amplitude(&self) -> Option<f64> {
        self.result.as_ref().ok().map(|s| s.amplitude)
    }
}

/// Steady stroke amplitude at each drive frequency in `freqs` (rad/s), with
/// every other parameter (including damping) held at `p`. Points are
/// simulated independently and returned in input order; failures are
/// recorded per point.
pub fn resonance_curve(
    p: &StrokeParams,
    freqs: &[f64],
    timing: &PeriodicTiming,
    settings: &AnalysisSettings,
) -> Vec<ResonancePoint> {
    freqs
        .par_iter()
        .map(|&omega| ResonancePoint {
            omega,
            result: sweep_point(p, omega, timing, settings),
        })
        .collect()
}

fn sweep_point(
    p: &StrokeParams,
    omega: f64,
    timing: &PeriodicTiming,
    settings: &AnalysisSettings,
) -> Result<SteadyAmplitude, AnalysisError> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(AnalysisError::Invalid(format!("sweep frequency must be positive, got {omega}")));
    }
    let model = StrokeModel::new(StrokeParams {
        drive_omega: omega,
        ..*p
    });
    let traj = model.simulate(&model.config(*timing)?)?;
    steady_amplitude(&traj, omega, settings.cycles, settings.settle_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelKind;

    fn sinusoid(amp: f64, omega: f64, phase: f64, cycles: usize, per_cycle: usize) -> Trajectory {
        let dt = TAU / omega / per_cycle as f64;
        Trajectory::from_fn(ModelKind::Generic, 0.0, dt, cycles * per_cycle + 1, |t| {
            (amp * (omega * t + phase).sin(), amp * omega * (omega * t + phase).cos())
        })
        .unwrap()
    }

    #[test]
    fn zero_signal_is_settled_with_zero_amplitude() {
        let traj = Trajectory::from_fn(ModelKind::Generic, 0.0, 0.01, 3001, |_| (0.0, 0.0)).unwrap();
        let s = steady_amplitude(&traj, TAU, 10, 0.02).unwrap();
        assert_eq!(s.amplitude, 0.0);
        assert!(s.settled);
    }

    #[test]
    fn pure_sinusoid_amplitude() {
        let traj = sinusoid(0.5, 2.0 * PI * 70.0, 0.3, 40, 200);
        let s = steady_amplitude(&traj, 2.0 * PI * 70.0, 10, 0.02).unwrap();
        assert!((s.amplitude - 0.5).abs() < 1e-6, "{}", s.amplitude);
        assert!(s.settled);
        assert_eq!(s.per_cycle.len(), 10);
    }

    #[test]
    fn coarse_sampling_is_refined_by_parabola() {
        // 37 samples per cycle leaves the discrete peak well off the true one.
        let traj = sinusoid(1.0, 1.0, 0.1, 40, 37);
        let s = steady_amplitude(&traj, 1.0, 10, 0.02).unwrap();
        let raw_step = 1.0 - (PI / 37.0).cos();
        assert!((s.amplitude - 1.0).abs() < 0.1 * raw_step, "{}", s.amplitude);
    }

    #[test]
    fn too_short_is_an_error() {
        let traj = sinusoid(1.0, 1.0, 0.0, 20, 50);
        assert!(matches!(
            steady_amplitude(&traj, 1.0, 10, 0.02),
            Err(AnalysisError::TooShort { needed: 30, .. })
        ));
    }

    #[test]
    fn growing_signal_is_unsettled() {
        let omega = 2.0;
        let traj = Trajectory::from_fn(ModelKind::Generic, 0.0, 0.01, 20000, |t| ((1.0 + t) * (omega * t).sin(), 0.0))
            .unwrap();
        let s = steady_amplitude(&traj, omega, 10, 0.02).unwrap();
        assert!(!s.settled);
        assert!(matches!(
            phase_lag(&traj, omega, 0.0, &AnalysisSettings::default()),
            Err(AnalysisError::Unsettled { .. })
        ));
    }

    #[test]
    fn quadrature_lag() {
        let omega = 5.0;
        let traj = sinusoid(0.7, omega, -FRAC_PI_2, 40, 200);
        let lag = phase_lag(&traj, omega, 0.0, &AnalysisSettings::default()).unwrap();
        assert!((lag + FRAC_PI_2).abs() < 1e-3, "{lag}");
    }

    #[test]
    fn drive_against_itself_is_zero() {
        let omega = 5.0;
        let traj = sinusoid(1.0, omega, 0.4, 40, 200);
        let lag = phase_lag(&traj, omega, 0.4, &AnalysisSettings::default()).unwrap();
        assert!(lag.abs() < 1e-9, "{lag}");
    }

    #[test]
    fn antiphase_maps_to_pi() {
        let traj = sinusoid(1.0, 1.0, PI, 40, 200);
        let lag = fundamental_phase(&traj, 1.0, 0.0, 10).unwrap();
        assert!((lag - PI).abs() < 1e-9 || (lag + PI).abs() < 1e-9);
        assert!(lag > -PI && lag <= PI);
    }

    #[test]
    fn cosine_response_peaks_at_midstroke() {
        let omega = 3.0;
        let traj = sinusoid(0.8, omega, FRAC_PI_2, 12, 360);
        let al = stroke_alignment(&traj, omega, 0.0, 10).unwrap();
        assert!(al.max_offsets.len() >= 19, "{}", al.max_offsets.len());
        assert!(al.min_offsets.len() >= 19);
        assert!(al.worst_max_offset() < 1e-9);
        assert!(al.worst_min_offset() < 1e-9);
    }

    #[test]
    fn shifted_response_reports_offset() {
        let omega = 3.0;
        let shift = 0.5;
        let traj = sinusoid(0.8, omega, FRAC_PI_2 - shift, 12, 360);
        let al = stroke_alignment(&traj, omega, 0.0, 10).unwrap();
        for off in &al.max_offsets {
            assert!((off - shift).abs() < TAU / 360.0, "{off}");
        }
    }

    #[test]
    fn settle_time_of_decaying_transient() {
        let omega = TAU;
        let traj = Trajectory::from_fn(ModelKind::Generic, 0.0, 0.005, 40 * 200 + 1, |t| {
            ((omega * t).sin() + (-t).exp() * (3.0 * omega * t).sin(), 0.0)
        })
        .unwrap();
        let t = settle_time(&traj, omega, &AnalysisSettings::default()).unwrap().unwrap();
        // transient below 2% after roughly ln(50) ≈ 3.9 s
        assert!(t > 2.0 && t < 6.0, "{t}");
    }
}
