//! Inverse problems: resonant mass tuning, stroke design search and
//! compliant pivot sizing.

mod pivot;
mod search;

pub use pivot::{pivot_stiffness, pivot_stress_check, StressCheck};
pub use search::{
    solve_resonant_mass, solve_stroke_design, DesignError, StrokeDesign, StrokeDesignProblem,
};
