use std::f64::consts::TAU;

use rayon::prelude::*;
use thiserror::Error;

use crate::analysis::{steady_amplitude, AnalysisError, AnalysisSettings};
use crate::integrator::PeriodicTiming;
use crate::model::StrokeParams;
use crate::stroke::{StrokeModel, DEFAULT_PEAK_FORCE};

/// Resonant mass that puts the stroke natural frequency at `f_target` Hz:
/// m_r = k_t / ((2π·f)²·L²).
pub fn solve_resonant_mass(stiffness: f64, mass_radius: f64, f_target: f64) -> f64 {
    let omega = TAU * f_target;
    stiffness / (omega * omega * mass_radius * mass_radius)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("degenerate design problem: {0}")]
    Degenerate(String),
    #[error(
        "no design within bounds: best residual {residual:.4} at L = {mass_radius} m, k_t = {stiffness} N·m/rad"
    )]
    NoSolution {
        residual: f64,
        mass_radius: f64,
        stiffness: f64,
    },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// Search for `(L, k_t)` giving a target steady stroke amplitude. The drive
/// always runs at the natural frequency and damping is recalibrated at every
/// candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct StrokeDesignProblem {
    pub drive_amplitude: f64,
    pub resonant_mass: f64,
    pub wing_cp_radius: f64,
    pub peak_force: f64,
    /// Target steady amplitude (rad).
    pub target_amplitude: f64,
    /// Bounds on L (m).
    pub radius_bounds: (f64, f64),
    /// Bounds on k_t (N·m/rad).
    pub stiffness_bounds: (f64, f64),
    /// Grid points along L and k_t.
    pub grid: (usize, usize),
    /// Accepted |amplitude − target| / target.
    pub tolerance: f64,
    pub max_bisections: usize,
    pub timing: PeriodicTiming,
    pub settings: AnalysisSettings,
}

impl StrokeDesignProblem {
    /// 0.8 mm drive, 2 mg mass, L_w = 4.4 mm, ±60° target, L ∈ [1, 5] mm,
    /// k_t ∈ [5, 50] µN·m/rad.
    pub fn reference() -> Self {
        StrokeDesignProblem {
            drive_amplitude: 0.8e-3,
            resonant_mass: 2e-6,
            wing_cp_radius: 4.4e-3,
            peak_force: DEFAULT_PEAK_FORCE,
            target_amplitude: std::f64::consts::FRAC_PI_3,
            radius_bounds: (1e-3, 5e-3),
            stiffness_bounds: (5e-6, 50e-6),
            grid: (9, 10),
            tolerance: 0.05,
            max_bisections: 30,
            timing: PeriodicTiming::default(),
            settings: AnalysisSettings::default(),
        }
    }

    fn check(&self) -> Result<(), DesignError> {
        let mut bad = Vec::new();
        if !(self.target_amplitude.is_finite() && self.target_amplitude > 0.0) {
            bad.push(format!("target amplitude must be > 0, got {}", self.target_amplitude));
        }
        for (name, v) in [
            ("z_max", self.drive_amplitude),
            ("m_r", self.resonant_mass),
            ("L_w", self.wing_cp_radius),
        ] {
            if !(v.is_finite() && v > 0.0) {
                bad.push(format!("{name} must be > 0, got {v}"));
            }
        }
        if !(self.peak_force.is_finite() && self.peak_force >= 0.0) {
            bad.push(format!("peak_force must be >= 0, got {}", self.peak_force));
        }
        for (name, (lo, hi)) in [("L", self.radius_bounds), ("k_t", self.stiffness_bounds)] {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                bad.push(format!("{name} bounds must satisfy 0 < min <= max, got [{lo}, {hi}]"));
            }
        }
        if self.grid.0 == 0 || self.grid.1 < 2 {
            bad.push(format!("grid must be at least 1 x 2, got {:?}", self.grid));
        }
        if !(self.tolerance > 0.0) {
            bad.push(format!("tolerance must be > 0, got {}", self.tolerance));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(DesignError::Degenerate(bad.join("; ")))
        }
    }

    /// Stroke parameters for a candidate: resonant drive, recalibrated damping.
    pub fn params(&self, mass_radius: f64, stiffness: f64) -> StrokeParams {
        StrokeParams::resonant(
            self.resonant_mass,
            mass_radius,
            stiffness,
            self.wing_cp_radius,
            self.drive_amplitude,
            self.peak_force,
        )
    }

    /// Simulated steady amplitude of a candidate.
    pub fn amplitude(&self, mass_radius: f64, stiffness: f64) -> Result<f64, DesignError> {
        let model = StrokeModel::new(self.params(mass_radius, stiffness));
        let cfg = model
            .config(self.timing)
            .map_err(AnalysisError::from)?;
        let traj = model.simulate(&cfg).map_err(AnalysisError::from)?;
        let s = steady_amplitude(
            &traj,
            model.drive.omega,
            self.settings.cycles,
            self.settings.settle_tol,
        )?;
        Ok(s.amplitude)
    }

    /// (amplitude − target) / target for a candidate.
    pub fn residual(&self, mass_radius: f64, stiffness: f64) -> Result<f64, DesignError> {
        Ok((self.amplitude(mass_radius, stiffness)? - self.target_amplitude) / self.target_amplitude)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrokeDesign {
    pub mass_radius: f64,
    pub stiffness: f64,
    pub params: StrokeParams,
    pub amplitude: f64,
    pub residual: f64,
    pub evaluations: usize,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Coarse grid over (L, k_t), then bisection on k_t along the grid row of
/// the best grid point. Deterministic for fixed inputs.
pub fn solve_stroke_design(problem: &StrokeDesignProblem) -> Result<StrokeDesign, DesignError> {
    problem.check()?;
    let radii = linspace(problem.radius_bounds.0, problem.radius_bounds.1, problem.grid.0);
    let stiffnesses = linspace(
        problem.stiffness_bounds.0,
        problem.stiffness_bounds.1,
        problem.grid.1,
    );
    let nodes: Vec<(usize, usize)> = (0..radii.len())
        .flat_map(|i| (0..stiffnesses.len()).map(move |j| (i, j)))
        .collect();
    let residuals: Vec<Result<f64, DesignError>> = nodes
        .par_iter()
        .map(|&(i, j)| problem.residual(radii[i], stiffnesses[j]))
        .collect();
    let mut evaluations = nodes.len();

    let grid_res = |i: usize, j: usize| -> Option<f64> {
        residuals[i * stiffnesses.len() + j].as_ref().ok().copied()
    };
    let (bi, bj, best) = nodes
        .iter()
        .filter_map(|&(i, j)| grid_res(i, j).map(|r| (i, j, r)))
        .min_by(|a, b| a.2.abs().total_cmp(&b.2.abs()))
        .ok_or_else(|| match &residuals[0] {
            Err(e) => e.clone(),
            Ok(_) => unreachable!(),
        })?;

    let mut best = (radii[bi], stiffnesses[bj], best);

    // bracket a sign change next to the best node along its L row
    let bracket = [bj.checked_sub(1), Some(bj + 1)]
        .into_iter()
        .flatten()
        .filter(|&j| j < stiffnesses.len())
        .filter_map(|j| grid_res(bi, j).map(|r| (j, r)))
        .find(|&(_, r)| r.signum() != best.2.signum());

    if let Some((j, r)) = bracket {
        let (mut lo, mut r_lo, mut hi) = if stiffnesses[j] < stiffnesses[bj] {
            (stiffnesses[j], r, stiffnesses[bj])
        } else {
            (stiffnesses[bj], best.2, stiffnesses[j])
        };
        for _ in 0..problem.max_bisections {
            if best.2.abs() <= 0.1 * problem.tolerance {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let r_mid = problem.residual(radii[bi], mid)?;
            evaluations += 1;
            if r_mid.abs() < best.2.abs() {
                best = (radii[bi], mid, r_mid);
            }
            if r_mid.signum() == r_lo.signum() {
                lo = mid;
                r_lo = r_mid;
            } else {
                hi = mid;
            }
        }
    }

    let (mass_radius, stiffness, residual) = best;
    if residual.abs() > problem.tolerance {
        return Err(DesignError::NoSolution {
            residual,
            mass_radius,
            stiffness,
        });
    }
    Ok(StrokeDesign {
        mass_radius,
        stiffness,
        params: problem.params(mass_radius, stiffness),
        amplitude: problem.target_amplitude * (1.0 + residual),
        residual,
        evaluations,
    })
}
