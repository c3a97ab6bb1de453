//! Simulation and design search for milligram-scale resonant flapping-wing
//! transmissions.
//!
//! Two single-degree-of-freedom models are provided: the wing-stroke
//! torsional pendulum driven by a linear actuator ([`stroke`]) and the
//! centripetally driven passive wing pitch ([`pitch`]). They are integrated
//! by a fixed-step Runge–Kutta scheme ([`integrator`]), post-processed by
//! [`analysis`], and inverted by [`design`].

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod design;
pub mod integrator;
pub mod model;
pub mod pitch;
pub mod stroke;

pub use analysis::{AnalysisError, AnalysisSettings, SimSummary, SteadyAmplitude};
pub use integrator::{IntegrationConfig, IntegrationError, Method, PeriodicTiming};
pub use model::{
    natural_frequency, ModelKind, PitchParams, PivotSpec, PivotTopology, SimState, StrokeParams,
    Trajectory, ValidationError,
};
pub use pitch::PitchModel;
pub use stroke::{StrokeDrive, StrokeModel};
