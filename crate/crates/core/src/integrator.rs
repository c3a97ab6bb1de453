//! Fixed-step explicit integration of second-order scalar ODEs written as
//! `(angle, rate)` first-order systems.

use std::fmt;

use thiserror::Error;

use crate::model::{ModelKind, SimState, Trajectory, TrajectoryError};

/// Stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Classic four-stage Runge–Kutta.
    Rk4,
    /// Forward Euler, meant to be run at a tiny step as a reference.
    EulerOracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::EulerOracle => "euler-oracle",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "rk4" => Some(Method::Rk4),
            "euler-oracle" => Some(Method::EulerOracle),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("invalid integration config: {0}")]
    Config(String),
    #[error("state became non-finite at t = {t} s")]
    BlowUp { t: f64 },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

/// Step size, horizon and output sampling of one integration.
///
/// The output interval is held as an integer stride of steps so that every
/// sample lands exactly on a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    dt: f64,
    stride: usize,
    n_out: usize,
    method: Method,
}

impl IntegrationConfig {
    /// Builds a config from times in seconds. `dt_out` must be an integer
    /// multiple of `dt` (to 1e-9 relative). The run covers
    /// `floor(t_end / dt_out)` output intervals.
    pub fn new(dt: f64, t_end: f64, dt_out: f64, method: Method) -> Result<Self, IntegrationError> {
        let bad = |m: String| Err(IntegrationError::Config(m));
        if !(dt.is_finite() && dt > 0.0) {
            return bad(format!("dt must be positive, got {dt}"));
        }
        if !(dt_out.is_finite() && dt_out >= dt) {
            return bad(format!("dt_out must be >= dt, got {dt_out}"));
        }
        if !(t_end.is_finite() && t_end >= dt_out) {
            return bad(format!("t_end must be >= dt_out, got {t_end}"));
        }
        let ratio = dt_out / dt;
        let stride = ratio.round();
        if (ratio - stride).abs() > 1e-9 * ratio {
            return bad(format!("dt_out / dt = {ratio} is not an integer"));
        }
        let n_out = (t_end / dt_out * (1.0 + 1e-12)).floor() as usize;
        Ok(IntegrationConfig {
            dt,
            stride: stride as usize,
            n_out,
            method,
        })
    }

    /// Run of `cycles` periods of length `period`, with `steps_per_period`
    /// steps and `samples_per_period` output samples per period.
    pub fn per_period(
        period: f64,
        timing: PeriodicTiming,
    ) -> Result<Self, IntegrationError> {
        let PeriodicTiming {
            steps_per_period,
            samples_per_period,
            cycles,
            method,
        } = timing;
        if !(period.is_finite() && period > 0.0) {
            return Err(IntegrationError::Config(format!(
                "period must be positive, got {period}"
            )));
        }
        if steps_per_period == 0 || samples_per_period == 0 || cycles == 0 {
            return Err(IntegrationError::Config(
                "steps, samples and cycles must all be >= 1".into(),
            ));
        }
        if steps_per_period % samples_per_period != 0 {
            return Err(IntegrationError::Config(format!(
                "steps_per_period ({steps_per_period}) must be a multiple of samples_per_period ({samples_per_period})"
            )));
        }
        Ok(IntegrationConfig {
            dt: period / steps_per_period as f64,
            stride: steps_per_period / samples_per_period,
            n_out: cycles * samples_per_period,
            method,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dt_out(&self) -> f64 {
        self.dt * self.stride as f64
    }

    pub fn t_end(&self) -> f64 {
        self.dt * (self.stride * self.n_out) as f64
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Steps per output sample.
    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Number of trajectory samples produced, including the initial state.
    pub fn samples(&self) -> usize {
        self.n_out + 1
    }

    pub fn with_method(self, method: Method) -> Self {
        IntegrationConfig { method, ..self }
    }
}

/// Integration timing expressed relative to a drive period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PeriodicTiming {
    pub steps_per_period: usize,
    pub samples_per_period: usize,
    pub cycles: usize,
    pub method: Method,
}

impl Default for PeriodicTiming {
    fn default() -> Self {
        PeriodicTiming {
            steps_per_period: 2000,
            samples_per_period: 200,
            cycles: 100,
            method: Method::Rk4,
        }
    }
}

impl PeriodicTiming {
    pub fn config_for_omega(&self, omega: f64) -> Result<IntegrationConfig, IntegrationError> {
        IntegrationConfig::per_period(std::f64::consts::TAU / omega, *self)
    }
}

/// Right-hand side of a scalar second-order ODE: returns
/// `(d angle / dt, d rate / dt)` for the given state.
pub trait Rhs {
    fn eval(&self, t: f64, angle: f64, rate: f64) -> (f64, f64);
}

impl<F: Fn(f64, f64, f64) -> (f64, f64)> Rhs for F {
    fn eval(&self, t: f64, angle: f64, rate: f64) -> (f64, f64) {
        self(t, angle, rate)
    }
}

#[inline]
fn rk4_step<R: Rhs + ?Sized>(rhs: &R, t: f64, dt: f64, y: (f64, f64)) -> (f64, f64) {
    let h2 = 0.5 * dt;
    let k1 = rhs.eval(t, y.0, y.1);
    let k2 = rhs.eval(t + h2, y.0 + h2 * k1.0, y.1 + h2 * k1.1);
    let k3 = rhs.eval(t + h2, y.0 + h2 * k2.0, y.1 + h2 * k2.1);
    let k4 = rhs.eval(t + dt, y.0 + dt * k3.0, y.1 + dt * k3.1);
    let s = dt / 6.0;
    (
        y.0 + s * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        y.1 + s * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

#[inline]
fn euler_step<R: Rhs + ?Sized>(rhs: &R, t: f64, dt: f64, y: (f64, f64)) -> (f64, f64) {
    let k = rhs.eval(t, y.0, y.1);
    (y.0 + dt * k.0, y.1 + dt * k.1)
}

/// Integrates from `initial` and samples every `cfg.dt_out()`.
///
/// Step times are computed as `t0 + i·dt` rather than accumulated, so output
/// timestamps are uniform to rounding. Aborts with the time of the first
/// non-finite state.
pub fn integrate<R: Rhs + ?Sized>(
    rhs: &R,
    initial: SimState,
    cfg: &IntegrationConfig,
    model: ModelKind,
) -> Result<Trajectory, IntegrationError> {
    if !initial.is_finite() {
        return Err(IntegrationError::BlowUp { t: initial.t });
    }
    let t0 = initial.t;
    let dt = cfg.dt;
    let mut y = (initial.angle, initial.rate);
    let mut samples = Vec::with_capacity(cfg.samples());
    samples.push(initial);
    let mut step = 0usize;
    for _ in 0..cfg.n_out {
        for _ in 0..cfg.stride {
            let t = t0 + step as f64 * dt;
            y = match cfg.method {
                Method::Rk4 => rk4_step(rhs, t, dt, y),
                Method::EulerOracle => euler_step(rhs, t, dt, y),
            };
            step += 1;
            if !(y.0.is_finite() && y.1.is_finite()) {
                return Err(IntegrationError::BlowUp {
                    t: t0 + step as f64 * dt,
                });
            }
        }
        samples.push(SimState::new(t0 + step as f64 * dt, y.0, y.1));
    }
    Ok(Trajectory::new(model, samples)?)
}

/// Result of a self-convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceEstimate {
    /// Mean of the two successive order estimates.
    pub order: f64,
    /// log2(e(dt)/e(dt/2)) and log2(e(dt/2)/e(dt/4)).
    pub pairwise: [f64; 2],
    /// Max angle error at dt, dt/2 and dt/4 against the dt/64 reference.
    pub errors: [f64; 3],
    /// False when the estimate should not be trusted: errors at roundoff
    /// level, non-monotone errors, or disagreeing pairwise orders.
    pub reliable: bool,
}

/// Estimates the observed order of accuracy of `method` on `rhs` by running
/// at `dt`, `dt/2`, `dt/4` and comparing against a `dt/64` run of the same
/// method over `coarse_steps` coarse steps. Errors are compared at the
/// coarse step times.
pub fn convergence_order<R: Rhs + ?Sized>(
    rhs: &R,
    initial: SimState,
    dt_coarse: f64,
    coarse_steps: usize,
    method: Method,
) -> Result<ConvergenceEstimate, IntegrationError> {
    if coarse_steps == 0 {
        return Err(IntegrationError::Config("coarse_steps must be >= 1".into()));
    }
    let run = |refine: usize| -> Result<Trajectory, IntegrationError> {
        let cfg = IntegrationConfig {
            dt: dt_coarse / refine as f64,
            stride: refine,
            n_out: coarse_steps,
            method,
        };
        integrate(rhs, initial, &cfg, ModelKind::Generic)
    };
    let reference = run(64)?;
    let mut errors = [0.0; 3];
    for (i, refine) in [1usize, 2, 4].into_iter().enumerate() {
        let traj = run(refine)?;
        errors[i] = traj
            .angles()
            .zip(reference.angles())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
    }
    let pairwise = [
        (errors[0] / errors[1]).log2(),
        (errors[1] / errors[2]).log2(),
    ];
    let order = 0.5 * (pairwise[0] + pairwise[1]);
    let reliable = errors[2] > 1e-12
        && errors[0] > errors[1]
        && errors[1] > errors[2]
        && (pairwise[0] - pairwise[1]).abs() < 0.5
        && order.is_finite();
    Ok(ConvergenceEstimate {
        order,
        pairwise,
        errors,
        reliable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn oscillator(omega: f64) -> impl Fn(f64, f64, f64) -> (f64, f64) {
        move |_t, x, v| (v, -omega * omega * x)
    }

    #[test]
    fn linear_oscillator_matches_cosine() {
        let omega = 3.0;
        let period = TAU / omega;
        let cfg = IntegrationConfig::new(period / 1000.0, 10.0 * period, period / 100.0, Method::Rk4)
            .unwrap();
        let traj = integrate(&oscillator(omega), SimState::new(0.0, 1.0, 0.0), &cfg, ModelKind::Generic)
            .unwrap();
        assert_eq!(traj.len(), 1001);
        let worst = traj
            .samples()
            .iter()
            .map(|s| (s.angle - (omega * s.t).cos()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "max error {worst}");
    }

    #[test]
    fn zero_rhs_is_constant() {
        let cfg = IntegrationConfig::new(0.01, 1.0, 0.1, Method::Rk4).unwrap();
        let traj = integrate(&|_t, _x, _v| (0.0, 0.0), SimState::new(0.0, 0.3, 0.0), &cfg, ModelKind::Generic)
            .unwrap();
        assert!(traj.samples().iter().all(|s| s.angle == 0.3 && s.rate == 0.0));
    }

    #[test]
    fn row_count_is_floor_plus_one() {
        let cfg = IntegrationConfig::new(0.001, 1.05, 0.1, Method::Rk4).unwrap();
        assert_eq!(cfg.samples(), 11);
        let cfg = IntegrationConfig::new(0.001, 1.0, 0.1, Method::Rk4).unwrap();
        assert_eq!(cfg.samples(), 11);
    }

    #[test]
    fn config_rejects_bad_timing() {
        assert!(IntegrationConfig::new(0.0, 1.0, 0.1, Method::Rk4).is_err());
        assert!(IntegrationConfig::new(0.2, 1.0, 0.1, Method::Rk4).is_err());
        assert!(IntegrationConfig::new(0.01, 0.05, 0.1, Method::Rk4).is_err());
        assert!(IntegrationConfig::new(0.03, 1.0, 0.1, Method::Rk4).is_err());
        let t = PeriodicTiming {
            steps_per_period: 2000,
            samples_per_period: 300,
            ..Default::default()
        };
        assert!(IntegrationConfig::per_period(1.0, t).is_err());
    }

    #[test]
    fn blow_up_reports_time() {
        let cfg = IntegrationConfig::new(0.1, 100.0, 0.1, Method::Rk4).unwrap();
        let err = integrate(&|_t, x: f64, _v| (x * x, 0.0), SimState::new(0.0, 1.0, 0.0), &cfg, ModelKind::Generic)
            .unwrap_err();
        match err {
            IntegrationError::BlowUp { t } => assert!(t > 0.0 && t < 2.0, "{t}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rk4_order_on_linear_oscillator() {
        let omega = TAU;
        let est = convergence_order(&oscillator(omega), SimState::new(0.0, 1.0, 0.0), 1.0 / 40.0, 200, Method::Rk4)
            .unwrap();
        assert!(est.reliable, "{est:?}");
        assert!((est.order - 4.0).abs() < 0.3, "{est:?}");
    }

    #[test]
    fn euler_order_on_linear_oscillator() {
        let omega = TAU;
        let est = convergence_order(
            &oscillator(omega),
            SimState::new(0.0, 1.0, 0.0),
            1.0 / 2000.0,
            2000,
            Method::EulerOracle,
        )
        .unwrap();
        assert!((est.order - 1.0).abs() < 0.2, "{est:?}");
    }

    #[test]
    fn non_smooth_rhs_is_flagged() {
        // Sign switch in the restoring force is not differentiable at x = 0.
        let rhs = |_t: f64, x: f64, v: f64| (v, -x.signum());
        let est = convergence_order(&rhs, SimState::new(0.0, 0.3, 0.0), 0.05, 400, Method::Rk4).unwrap();
        assert!(!est.reliable || est.order < 3.7, "{est:?}");
    }

    #[test]
    fn repeat_runs_are_bit_identical() {
        let cfg = IntegrationConfig::new(1e-3, 2.0, 1e-2, Method::Rk4).unwrap();
        let rhs = |t: f64, x: f64, v: f64| (v, -4.0 * x.sin() - 0.1 * v + (3.0 * t).cos());
        let a = integrate(&rhs, SimState::new(0.0, 0.5, 0.0), &cfg, ModelKind::Generic).unwrap();
        let b = integrate(&rhs, SimState::new(0.0, 0.5, 0.0), &cfg, ModelKind::Generic).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert_eq!(x.angle.to_bits(), y.angle.to_bits());
            assert_eq!(x.rate.to_bits(), y.rate.to_bits());
            assert_eq!(x.t.to_bits(), y.t.to_bits());
        }
    }
}
