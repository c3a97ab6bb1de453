//! Wing-stroke transmission: a torsional pendulum whose pivot is driven
//! linearly, `z(t) = z_max·sin(ωt + phase)`.
//!
//! Equation of motion:
//!
//! ```text
//! I_x θ̈ = −k_t θ − b L_w² θ̇ − b L_w ż cos θ − m_r L cos θ z̈,   I_x = m_r L²
//! ```

use std::f64::consts::PI;

use crate::integrator::{integrate, IntegrationConfig, IntegrationError, PeriodicTiming, Rhs};
use crate::model::{natural_frequency, ModelKind, SimState, StrokeParams, Trajectory};

/// Peak per-wing aerodynamic force assumed when calibrating damping (N).
pub const DEFAULT_PEAK_FORCE: f64 = 1.5e-3;

/// Sinusoidal pivot displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrokeDrive {
    /// Displacement amplitude (m).
    pub amplitude: f64,
    /// Angular frequency (rad/s).
    pub omega: f64,
    /// Phase offset (rad).
    pub phase: f64,
}

impl StrokeDrive {
    pub fn new(amplitude: f64, omega: f64) -> Self {
        StrokeDrive {
            amplitude,
            omega,
            phase: 0.0,
        }
    }

    /// Drive implied by the parameter set, zero phase.
    pub fn from_params(p: &StrokeParams) -> Self {
        StrokeDrive::new(p.drive_amplitude, p.drive_omega)
    }

    pub fn with_phase(self, phase: f64) -> Self {
        StrokeDrive { phase, ..self }
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn displacement(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * t + self.phase).sin()
    }

    pub fn velocity(&self, t: f64) -> f64 {
        self.amplitude * self.omega * (self.omega * t + self.phase).cos()
    }

    pub fn acceleration(&self, t: f64) -> f64 {
        -self.amplitude * self.omega * self.omega * (self.omega * t + self.phase).sin()
    }
}

/// Right-hand side of the stroke equation.
///
/// A non-finite result means the parameters are pathological; the integrator
/// aborts on it.
pub fn stroke_rhs(state: &SimState, p: &StrokeParams, d: &StrokeDrive) -> (f64, f64) {
    rhs_terms(state.t, state.angle, state.rate, p, d, false)
}

#[inline]
fn rhs_terms(
    t: f64,
    angle: f64,
    rate: f64,
    p: &StrokeParams,
    d: &StrokeDrive,
    linearized: bool,
) -> (f64, f64) {
    let arg = d.omega * t + d.phase;
    let (s, c) = arg.sin_cos();
    let z_dot = d.amplitude * d.omega * c;
    let z_ddot = -d.amplitude * d.omega * d.omega * s;
    let cos_angle = if linearized { 1.0 } else { angle.cos() };
    let torque = -p.stiffness * angle
        - p.damping * p.wing_cp_radius * p.wing_cp_radius * rate
        - p.damping * p.wing_cp_radius * z_dot * cos_angle
        - p.resonant_mass * p.mass_radius * cos_angle * z_ddot;
    (rate, torque / p.inertia())
}

/// Damping coefficient that makes the peak aerodynamic force equal
/// `peak_force` for a ±60° stroke at `omega`:
/// `b = F / (L_w·ω·π/3 + z_max·ω)`.
pub fn calibrate_damping(wing_cp_radius: f64, omega: f64, drive_amplitude: f64, peak_force: f64) -> f64 {
    peak_force / (wing_cp_radius * omega * PI / 3.0 + drive_amplitude * omega)
}

/// Peak inertial force of the resonant mass, m_r·ω²·L (N).
pub fn inertial_force(p: &StrokeParams) -> f64 {
    p.resonant_mass * p.drive_omega * p.drive_omega * p.mass_radius
}

/// Peak inertial torque about the pivot, F_inertial·L (N·m).
pub fn inertial_torque(p: &StrokeParams) -> f64 {
    inertial_force(p) * p.mass_radius
}

/// Stroke pendulum ready to integrate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrokeModel {
    pub params: StrokeParams,
    pub drive: StrokeDrive,
    /// Replace cos θ by 1 everywhere. Only useful for comparing against the
    /// linear driven oscillator.
    pub linearized: bool,
}

impl StrokeModel {
    pub fn new(params: StrokeParams) -> Self {
        StrokeModel {
            params,
            drive: StrokeDrive::from_params(&params),
            linearized: false,
        }
    }

    pub fn linearized(self) -> Self {
        StrokeModel {
            linearized: true,
            ..self
        }
    }

    pub fn with_drive(self, drive: StrokeDrive) -> Self {
        StrokeModel { drive, ..self }
    }

    pub fn natural_omega(&self) -> f64 {
        natural_frequency(&self.params)
    }

    /// Integration config for `timing` relative to the drive period.
    pub fn config(&self, timing: PeriodicTiming) -> Result<IntegrationConfig, IntegrationError> {
        timing.config_for_omega(self.drive.omega)
    }

    /// Integrates from rest at t = 0.
    pub fn simulate(&self, cfg: &IntegrationConfig) -> Result<Trajectory, IntegrationError> {
        self.simulate_from(SimState::at_rest(0.0), cfg)
    }

    pub fn simulate_from(
        &self,
        initial: SimState,
        cfg: &IntegrationConfig,
    ) -> Result<Trajectory, IntegrationError> {
        integrate(self, initial, cfg, ModelKind::Stroke)
    }

    /// ½·I_x·θ̇² + ½·k_t·θ².
    pub fn energy(&self, s: &SimState) -> f64 {
        0.5 * self.params.inertia() * s.rate * s.rate + 0.5 * self.params.stiffness * s.angle * s.angle
    }
}

impl Rhs for StrokeModel {
    #[inline]
    fn eval(&self, t: f64, angle: f64, rate: f64) -> (f64, f64) {
        rhs_terms(t, angle, rate, &self.params, &self.drive, self.linearized)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn undriven(p: StrokeParams) -> StrokeParams {
        StrokeParams {
            drive_amplitude: 0.0,
            damping: 0.0,
            ..p
        }
    }

    #[test]
    fn rest_at_zero_time_has_no_acceleration() {
        let p = StrokeParams {
            damping: 0.0,
            ..StrokeParams::design_point()
        };
        let d = StrokeDrive::from_params(&p);
        let (v, a) = stroke_rhs(&SimState::at_rest(0.0), &p, &d);
        assert_eq!(v, 0.0);
        assert_eq!(a, 0.0);
    }

    #[test]
    fn pure_spring_restoring() {
        let p = undriven(StrokeParams::design_point());
        let d = StrokeDrive::from_params(&p);
        let (_, a) = stroke_rhs(&SimState::new(0.3, 1.0, 0.0), &p, &d);
        let expected = -p.stiffness / p.inertia();
        assert!((a - expected).abs() < 1e-12 * expected.abs());
    }

    #[test]
    fn quarter_period_term_by_term() {
        // Independent recomputation of each torque term at ωt = π/2, where
        // ż = 0 and z̈ = −z_max·ω².
        let p = StrokeParams::design_point();
        let d = StrokeDrive::from_params(&p);
        let t = d.period() / 4.0;
        let (_, a) = stroke_rhs(&SimState::new(t, 0.0, 0.0), &p, &d);
        let z_ddot = -0.8e-3 * p.drive_omega.powi(2);
        let inertial = -2e-6 * 2.5e-3 * z_ddot;
        let aero = -p.damping * 4.4e-3 * (0.8e-3 * p.drive_omega * (PI / 2.0).cos());
        let expected = (inertial + aero) / 1.25e-11;
        assert!((a - expected).abs() < 1e-9 * expected.abs(), "{a} vs {expected}");
        // m_r·L·z_max·ω² / I_x = z_max·ω²/L
        assert!((a - 0.8e-3 * p.drive_omega.powi(2) / 2.5e-3).abs() < 1e-6 * a);
    }

    #[test]
    fn damping_calibration_design_point() {
        let omega = natural_frequency(&StrokeParams::design_point());
        let denom = 4.4e-3 * omega * PI / 3.0 + 0.8e-3 * omega;
        assert!((denom - 6.840).abs() < 5e-3, "{denom}");
        let b = calibrate_damping(4.4e-3, omega, 0.8e-3, DEFAULT_PEAK_FORCE);
        assert!((b - 2.19e-4).abs() < 0.01e-4, "{b}");
        assert_eq!(calibrate_damping(4.4e-3, omega, 0.8e-3, 0.0), 0.0);
        let b2 = calibrate_damping(4.4e-3, 2.0 * omega, 0.8e-3, DEFAULT_PEAK_FORCE);
        assert!((b2 / b - 0.5).abs() < 1e-14);
    }

    #[test]
    fn inertial_estimates() {
        let p = StrokeParams::design_point();
        assert!((inertial_force(&p) - 8.0e-3).abs() < 8.0e-5);
        assert!((inertial_torque(&p) - 2.0e-5).abs() < 2.0e-7);
        assert!((inertial_torque(&p) / p.stiffness - 1.0).abs() < 1e-12);
        let none = StrokeParams {
            resonant_mass: 0.0,
            ..p
        };
        assert_eq!(inertial_force(&none), 0.0);
        let fast = StrokeParams {
            drive_omega: 2.0 * p.drive_omega,
            ..p
        };
        assert!((inertial_force(&fast) / inertial_force(&p) - 4.0).abs() < 1e-12);
        let short = StrokeParams {
            mass_radius: 0.0,
            ..p
        };
        assert_eq!(inertial_torque(&short), 0.0);
    }

    #[test]
    fn drive_derivatives_are_consistent() {
        let d = StrokeDrive::new(0.8e-3, 1264.9).with_phase(0.3);
        let t = 1.234e-3;
        let h = 1e-7;
        let v = (d.displacement(t + h) - d.displacement(t - h)) / (2.0 * h);
        let a = (d.velocity(t + h) - d.velocity(t - h)) / (2.0 * h);
        assert!((v - d.velocity(t)).abs() < 1e-6 * d.amplitude * d.omega);
        assert!((a - d.acceleration(t)).abs() < 1e-5 * d.amplitude * d.omega * d.omega);
    }

    #[test]
    fn linearized_flag_only_touches_cosine() {
        let p = StrokeParams::design_point();
        let m = StrokeModel::new(p);
        let l = m.linearized();
        let s = (1.1e-4, 0.0, 37.0);
        assert_eq!(m.eval(s.0, s.1, s.2), l.eval(s.0, s.1, s.2));
        assert_ne!(m.eval(s.0, 0.9, s.2), l.eval(s.0, 0.9, s.2));
    }
}
