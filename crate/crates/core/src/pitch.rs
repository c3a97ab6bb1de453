//! Passive wing pitch driven by the centripetal load on an offset mass.
//!
//! The stroke is prescribed as θ(t) = A·sin(ωt), so the stroke rate is
//! A·ω·cos(ωt). With φ the pitch angle:
//!
//! ```text
//! m l² φ̈ = −k φ + b L_w A ω cos(ωt) p + m l sin φ (A ω cos ωt)² l cos φ
//! ```

use thiserror::Error;

use crate::integrator::{integrate, IntegrationConfig, IntegrationError, PeriodicTiming, Rhs};
use crate::model::{ModelKind, PitchParams, SimState, Trajectory};

/// Peak aerodynamic force b·L_w·A·ω used to pick `b` (N).
pub const DEFAULT_AERO_FORCE: f64 = 1e-3;

/// Fraction of a run, counted from the end, treated as steady state when
/// extracting peak torques.
pub const STEADY_FRACTION: f64 = 0.25;

/// The three torque contributions acting on the pitch spring at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchTorques {
    pub t: f64,
    /// −k·φ (N·m).
    pub spring: f64,
    /// b·L_w·A·ω·cos(ωt)·p (N·m).
    pub aerodynamic: f64,
    /// m·l²·sin φ·cos φ·(A·ω·cos ωt)² (N·m).
    pub centripetal: f64,
}

impl PitchTorques {
    pub fn at(state: &SimState, p: &PitchParams) -> Self {
        let stroke_rate = p.stroke_amplitude * p.stroke_omega * (p.stroke_omega * state.t).cos();
        let (s, c) = state.angle.sin_cos();
        PitchTorques {
            t: state.t,
            spring: -p.stiffness * state.angle,
            aerodynamic: p.damping * p.wing_cp_radius * stroke_rate * p.cp_offset,
            centripetal: p.mass * p.mass_radius * s * stroke_rate * stroke_rate * p.mass_radius * c,
        }
    }

    pub fn total(&self) -> f64 {
        self.spring + self.aerodynamic + self.centripetal
    }
}

/// Right-hand side of the pitch equation.
pub fn pitch_rhs(state: &SimState, p: &PitchParams) -> (f64, f64) {
    (state.rate, PitchTorques::at(state, p).total() / p.inertia())
}

/// Small-angle natural frequency of the pitch spring and mass, √(k/(m·l²)).
pub fn pitch_natural_frequency(p: &PitchParams) -> f64 {
    (p.stiffness / p.inertia()).sqrt()
}

/// Peak absolute torque of each term.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PeakTorques {
    pub spring: f64,
    pub aerodynamic: f64,
    pub centripetal: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorqueDecomposition {
    pub samples: Vec<PitchTorques>,
    /// Peaks over the last [`STEADY_FRACTION`] of the trajectory.
    pub steady_peaks: PeakTorques,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecompositionError {
    #[error("trajectory was produced by the {0} model, not the pitch model")]
    WrongModel(ModelKind),
}

/// Evaluates the torque terms at every sample of a pitch trajectory.
pub fn pitch_torque_decomposition(
    traj: &Trajectory,
    p: &PitchParams,
) -> Result<TorqueDecomposition, DecompositionError> {
    if traj.model() != ModelKind::Pitch {
        return Err(DecompositionError::WrongModel(traj.model()));
    }
    let samples: Vec<_> = traj.samples().iter().map(|s| PitchTorques::at(s, p)).collect();
    let start = steady_start(samples.len());
    let steady_peaks = samples[start..].iter().fold(PeakTorques::default(), |acc, q| PeakTorques {
        spring: acc.spring.max(q.spring.abs()),
        aerodynamic: acc.aerodynamic.max(q.aerodynamic.abs()),
        centripetal: acc.centripetal.max(q.centripetal.abs()),
    });
    Ok(TorqueDecomposition {
        samples,
        steady_peaks,
    })
}

fn steady_start(n: usize) -> usize {
    let keep = ((n as f64) * STEADY_FRACTION).ceil() as usize;
    n - keep.clamp(1, n)
}

/// Pitch mechanism ready to integrate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchModel {
    pub params: PitchParams,
}

impl PitchModel {
    pub fn new(params: PitchParams) -> Self {
        PitchModel { params }
    }

    pub fn config(&self, timing: PeriodicTiming) -> Result<IntegrationConfig, IntegrationError> {
        timing.config_for_omega(self.params.stroke_omega)
    }

    /// Integrates from φ = 0, φ̇ = 0 at t = 0.
    pub fn simulate(&self, cfg: &IntegrationConfig) -> Result<Trajectory, IntegrationError> {
        self.simulate_from(SimState::at_rest(0.0), cfg)
    }

    pub fn simulate_from(
        &self,
        initial: SimState,
        cfg: &IntegrationConfig,
    ) -> Result<Trajectory, IntegrationError> {
        integrate(self, initial, cfg, ModelKind::Pitch)
    }

    /// ½·m·l²·φ̇² + ½·k·φ².
    pub fn energy(&self, s: &SimState) -> f64 {
        0.5 * self.params.inertia() * s.rate * s.rate + 0.5 * self.params.stiffness * s.angle * s.angle
    }
}

impl Rhs for PitchModel {
    #[inline]
    fn eval(&self, t: f64, angle: f64, rate: f64) -> (f64, f64) {
        pitch_rhs(&SimState::new(t, angle, rate), &self.params)
    }
}
