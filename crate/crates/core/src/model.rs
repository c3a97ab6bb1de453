//! Domain types shared by every part of the toolkit.
//!
//! Everything is stored in SI base units (m, kg, s, N, rad). Angles are
//! radians; conversion to degrees only happens at I/O boundaries.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

/// One offending field in a parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

/// Complete list of invariant violations found in a parameter set.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid {subject}: {}", list(.violations))]
pub struct ValidationError {
    pub subject: &'static str,
    pub violations: Vec<Violation>,
}

fn list(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

impl ValidationError {
    /// Names of the offending fields, in the order they were checked.
    pub fn fields(&self) -> Vec<&'static str> {
        self.violations.iter().map(|v| v.field).collect()
    }

    pub fn names(&self, field: &str) -> bool {
        self.violations.iter().any(|v| v.field == field)
    }
}

/// Accumulates violations so callers see every problem at once.
#[derive(Debug)]
struct Checker {
    subject: &'static str,
    violations: Vec<Violation>,
}

impl Checker {
    fn new(subject: &'static str) -> Self {
        Checker {
            subject,
            violations: Vec::new(),
        }
    }

    fn fail(&mut self, field: &'static str, reason: impl Into<String>) {
        self.violations.push(Violation {
            field,
            reason: reason.into(),
        });
    }

    fn positive(&mut self, field: &'static str, value: f64) {
        if !value.is_finite() {
            self.fail(field, format!("must be finite, got {value}"));
        } else if value <= 0.0 {
            self.fail(field, format!("must be > 0, got {value}"));
        }
    }

    fn non_negative(&mut self, field: &'static str, value: f64) {
        if !value.is_finite() {
            self.fail(field, format!("must be finite, got {value}"));
        } else if value < 0.0 {
            self.fail(field, format!("must be >= 0, got {value}"));
        }
    }

    fn finish<T>(self, value: T) -> Result<T, ValidationError> {
        if self.violations.is_empty() {
            Ok(value)
        } else {
            Err(ValidationError {
                subject: self.subject,
                violations: self.violations,
            })
        }
    }
}

/// Parameters of the linearly driven torsional pendulum that produces the
/// wing stroke.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrokeParams {
    /// Resonant point mass (kg).
    pub resonant_mass: f64,
    /// Radial distance of the resonant mass from the pivot (m).
    pub mass_radius: f64,
    /// Torsional stiffness of the pivot (N·m/rad).
    pub stiffness: f64,
    /// Radial distance of the wing centre of pressure from the pivot (m).
    pub wing_cp_radius: f64,
    /// Lumped aerodynamic damping coefficient acting at the centre of pressure (N·s/m).
    pub damping: f64,
    /// Amplitude of the linear pivot displacement (m).
    pub drive_amplitude: f64,
    /// Angular frequency of the pivot displacement (rad/s).
    pub drive_omega: f64,
}

impl StrokeParams {
    /// Moment of inertia of the resonant mass about the rotation axis (kg·m²).
    pub fn inertia(&self) -> f64 {
        self.resonant_mass * self.mass_radius * self.mass_radius
    }

    pub fn validate(self) -> Result<Self, ValidationError> {
        let mut c = Checker::new("stroke parameters");
        c.positive("m_r", self.resonant_mass);
        c.positive("L", self.mass_radius);
        c.positive("k_t", self.stiffness);
        c.positive("L_w", self.wing_cp_radius);
        c.non_negative("b", self.damping);
        c.positive("z_max", self.drive_amplitude);
        c.positive("omega", self.drive_omega);
        if self.resonant_mass > 0.0 && self.mass_radius > 0.0 && !(self.inertia() > 0.0) {
            c.fail("I_x", "m_r·L² underflows to zero");
        }
        c.finish(self)
    }

    /// Drive running at the pendulum's natural frequency with the damping
    /// calibrated for `peak_force` at that frequency.
    pub fn resonant(
        resonant_mass: f64,
        mass_radius: f64,
        stiffness: f64,
        wing_cp_radius: f64,
        drive_amplitude: f64,
        peak_force: f64,
    ) -> Self {
        let drive_omega = (stiffness / (resonant_mass * mass_radius * mass_radius)).sqrt();
        let damping = crate::stroke::calibrate_damping(
            wing_cp_radius,
            drive_omega,
            drive_amplitude,
            peak_force,
        );
        StrokeParams {
            resonant_mass,
            mass_radius,
            stiffness,
            wing_cp_radius,
            damping,
            drive_amplitude,
            drive_omega,
        }
    }

    /// The 2 mg / 2.5 mm / 20 µN·m design point with a 0.8 mm drive and the
    /// wing centre of pressure at 4.4 mm.
    pub fn design_point() -> Self {
        Self::resonant(
            2e-6,
            2.5e-3,
            20e-6,
            4.4e-3,
            0.8e-3,
            crate::stroke::DEFAULT_PEAK_FORCE,
        )
    }
}

/// Small-angle natural frequency of the stroke pendulum, √(k_t / I_x) in rad/s.
pub fn natural_frequency(p: &StrokeParams) -> f64 {
    (p.stiffness / p.inertia()).sqrt()
}

/// Parameters of the centripetally driven passive pitch mechanism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchParams {
    /// Pitch tuning mass (kg).
    pub mass: f64,
    /// Distance of the tuning mass from the pitch axis (m).
    pub mass_radius: f64,
    /// Torsional stiffness of the pitch spring (N·m/rad).
    pub stiffness: f64,
    /// Offset of the wing centre of pressure from the pitch axis (m).
    pub cp_offset: f64,
    /// Radial distance of the wing centre of pressure from the stroke axis (m).
    pub wing_cp_radius: f64,
    /// Lumped aerodynamic damping coefficient (N·s/m).
    pub damping: f64,
    /// Stroke angle amplitude (rad).
    pub stroke_amplitude: f64,
    /// Stroke angular frequency (rad/s).
    pub stroke_omega: f64,
}

impl PitchParams {
    pub fn inertia(&self) -> f64 {
        self.mass * self.mass_radius * self.mass_radius
    }

    pub fn validate(self) -> Result<Self, ValidationError> {
        let mut c = Checker::new("pitch parameters");
        c.positive("m", self.mass);
        c.positive("l", self.mass_radius);
        c.positive("k", self.stiffness);
        c.positive("p", self.cp_offset);
        c.positive("L_w", self.wing_cp_radius);
        c.non_negative("b", self.damping);
        c.positive("A", self.stroke_amplitude);
        if self.stroke_amplitude > PI {
            c.fail("A", format!("must be <= pi, got {}", self.stroke_amplitude));
        }
        c.positive("omega", self.stroke_omega);
        c.finish(self)
    }

    /// Builds the parameter set with `b` chosen so that the peak aerodynamic
    /// force b·L_w·A·ω equals `aero_force`.
    #[allow(clippy::too_many_arguments)]
    pub fn with_aero_force(
        mass: f64,
        mass_radius: f64,
        stiffness: f64,
        cp_offset: f64,
        wing_cp_radius: f64,
        stroke_amplitude: f64,
        stroke_omega: f64,
        aero_force: f64,
    ) -> Self {
        PitchParams {
            mass,
            mass_radius,
            stiffness,
            cp_offset,
            wing_cp_radius,
            damping: aero_force / (wing_cp_radius * stroke_amplitude * stroke_omega),
            stroke_amplitude,
            stroke_omega,
        }
    }

    /// 4 mg magnet at 5 mm on a 20 µN·m/rad spring, ±45° stroke at 70 Hz and
    /// a 1 mN peak aerodynamic force.
    pub fn design_point() -> Self {
        Self::with_aero_force(
            4e-6,
            5e-3,
            20e-6,
            2.5e-3,
            4e-3,
            PI / 4.0,
            2.0 * PI * 70.0,
            crate::pitch::DEFAULT_AERO_FORCE,
        )
    }

    /// Peak aerodynamic force b·L_w·A·ω (N).
    pub fn aero_force(&self) -> f64 {
        self.damping * self.wing_cp_radius * self.stroke_amplitude * self.stroke_omega
    }
}

/// Angle and angular rate of a single-degree-of-freedom mechanism at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub angle: f64,
    pub rate: f64,
}

impl SimState {
    pub fn new(t: f64, angle: f64, rate: f64) -> Self {
        SimState { t, angle, rate }
    }

    pub fn at_rest(t: f64) -> Self {
        SimState::new(t, 0.0, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.angle.is_finite() && self.rate.is_finite()
    }
}

/// Which model produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Stroke,
    Pitch,
    /// Synthetic or user-supplied right-hand sides.
    Generic,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Stroke => "stroke",
            ModelKind::Pitch => "pitch",
            ModelKind::Generic => "generic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("trajectory needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample {index} is not finite")]
    NonFinite { index: usize },
    #[error("time does not increase at sample {index}")]
    NonMonotonic { index: usize },
    #[error("sampling interval at sample {index} deviates from {dt_out} s")]
    NonUniform { index: usize, dt_out: f64 },
}

/// Relative tolerance on the uniformity of output sampling.
pub const SAMPLING_UNIFORMITY: f64 = 1e-9;

/// Uniformly sampled solution of one of the ODE models.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    model: ModelKind,
    dt_out: f64,
    samples: Vec<SimState>,
}

impl Trajectory {
    pub fn new(model: ModelKind, samples: Vec<SimState>) -> Result<Self, TrajectoryError> {
        if samples.len() < 2 {
            return Err(TrajectoryError::TooFewSamples(samples.len()));
        }
        if let Some(index) = samples.iter().position(|s| !s.is_finite()) {
            return Err(TrajectoryError::NonFinite { index });
        }
        let t0 = samples[0].t;
        let n = samples.len() - 1;
        let dt_out = (samples[n].t - t0) / n as f64;
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].t > w[0].t) {
                return Err(TrajectoryError::NonMonotonic { index: i + 1 });
            }
        }
        let scale = (samples[n].t - t0).abs().max(t0.abs());
        for (i, s) in samples.iter().enumerate() {
            let expected = t0 + i as f64 * dt_out;
            if (s.t - expected).abs() > SAMPLING_UNIFORMITY * scale.max(dt_out) {
                return Err(TrajectoryError::NonUniform { index: i, dt_out });
            }
        }
        Ok(Trajectory {
            model,
            dt_out,
            samples,
        })
    }

    /// Samples `f` at `t0 + i·dt_out` for `i` in `0..n`.
    pub fn from_fn(
        model: ModelKind,
        t0: f64,
        dt_out: f64,
        n: usize,
        f: impl Fn(f64) -> (f64, f64),
    ) -> Result<Self, TrajectoryError> {
        let samples = (0..n)
            .map(|i| {
                let t = t0 + i as f64 * dt_out;
                let (angle, rate) = f(t);
                SimState::new(t, angle, rate)
            })
            .collect();
        Trajectory::new(model, samples)
    }

    pub fn model(&self) -> ModelKind {
        self.model
    }

    pub fn dt_out(&self) -> f64 {
        self.dt_out
    }

    pub fn samples(&self) -> &[SimState] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn duration(&self) -> f64 {
        self.end() - self.start()
    }

    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.angle)
    }
}

/// How the beams of a compliant pivot share the applied torque.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PivotTopology {
    /// Beams bend in parallel; stiffnesses add.
    ParallelBending,
    /// Beams twist in series; compliances add.
    SerialTorsion,
    /// Beams twist in parallel; stiffnesses add.
    ParallelTorsion,
}

impl PivotTopology {
    pub const ALL: [PivotTopology; 3] = [
        PivotTopology::ParallelBending,
        PivotTopology::SerialTorsion,
        PivotTopology::ParallelTorsion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PivotTopology::ParallelBending => "parallel-bending",
            PivotTopology::SerialTorsion => "serial-torsion",
            PivotTopology::ParallelTorsion => "parallel-torsion",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == name)
    }
}

impl fmt::Display for PivotTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// 301 stainless steel Young's modulus (Pa).
pub const STEEL_301_E: f64 = 193e9;
/// 301 stainless steel shear modulus (Pa).
pub const STEEL_301_G: f64 = 75e9;
/// Allowable stress for cold-rolled steel (Pa).
pub const STEEL_STRESS_BUDGET: f64 = 0.8e9;

/// Beam-spring compliant pivot geometry and material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotSpec {
    pub n_beams: u32,
    pub beam_length: f64,
    pub beam_width: f64,
    pub beam_thickness: f64,
    pub elastic_modulus: f64,
    pub shear_modulus: f64,
    pub stress_budget: f64,
    pub topology: PivotTopology,
}

impl PivotSpec {
    /// Sixteen 1 mm × 0.1 mm × 38 µm steel beams.
    pub fn table1(topology: PivotTopology) -> Self {
        PivotSpec {
            n_beams: 16,
            beam_length: 1e-3,
            beam_width: 0.1e-3,
            beam_thickness: 38e-6,
            elastic_modulus: STEEL_301_E,
            shear_modulus: STEEL_301_G,
            stress_budget: STEEL_STRESS_BUDGET,
            topology,
        }
    }

    pub fn validate(self) -> Result<Self, ValidationError> {
        let mut c = Checker::new("pivot spec");
        if self.n_beams < 1 {
            c.fail("n_beams", "must be >= 1");
        }
        c.positive("beam_length", self.beam_length);
        c.positive("beam_width", self.beam_width);
        c.positive("beam_thickness", self.beam_thickness);
        c.positive("elastic_modulus", self.elastic_modulus);
        c.positive("shear_modulus", self.shear_modulus);
        c.positive("stress_budget", self.stress_budget);
        c.finish(self)
    }
}
