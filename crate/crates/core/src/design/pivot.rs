use crate::model::{PivotSpec, PivotTopology};

/// Rotational stiffness of the beam pivot (N·m/rad).
///
/// Per beam, bending stiffness is E·I/l with I = w·t³/12 and torsional
/// stiffness is G·J/l with J = w·t³/3 (thin rectangle). Parallel beams add;
/// serial beams add compliance.
pub fn pivot_stiffness(spec: &PivotSpec) -> f64 {
    let n = spec.n_beams as f64;
    let t3 = spec.beam_thickness.powi(3);
    match spec.topology {
        PivotTopology::ParallelBending => {
            let second_moment = spec.beam_width * t3 / 12.0;
            n * spec.elastic_modulus * second_moment / spec.beam_length
        }
        PivotTopology::SerialTorsion | PivotTopology::ParallelTorsion => {
            let torsion_constant = spec.beam_width * t3 / 3.0;
            let per_beam = spec.shear_modulus * torsion_constant / spec.beam_length;
            if spec.topology == PivotTopology::SerialTorsion {
                per_beam / n
            } else {
                per_beam * n
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressCheck {
    /// Torque applied to the whole pivot, k_t·angle (N·m).
    pub torque: f64,
    /// Torque carried by one beam (N·m).
    pub beam_torque: f64,
    /// Peak bending or shear stress in a beam (Pa).
    pub peak_stress: f64,
    pub within_budget: bool,
}

/// Peak beam stress when the pivot is held at `max_angle` by a spring of
/// stiffness `stiffness`.
///
/// Bending: σ = M·(t/2)/I. Torsion of a thin rectangle: τ ≈ 3·T/(w·t²).
/// Parallel topologies split the torque evenly; in series each beam carries
/// all of it.
pub fn pivot_stress_check(spec: &PivotSpec, max_angle: f64, stiffness: f64) -> StressCheck {
    let torque = stiffness * max_angle.abs();
    let n = spec.n_beams as f64;
    let (w, t) = (spec.beam_width, spec.beam_thickness);
    let (beam_torque, peak_stress) = match spec.topology {
        PivotTopology::ParallelBending => {
            let m = torque / n;
            let second_moment = w * t.powi(3) / 12.0;
            (m, m * (t / 2.0) / second_moment)
        }
        PivotTopology::SerialTorsion => (torque, 3.0 * torque / (w * t * t)),
        PivotTopology::ParallelTorsion => {
            let m = torque / n;
            (m, 3.0 * m / (w * t * t))
        }
    };
    StressCheck {
        torque,
        beam_torque,
        peak_stress,
        within_budget: peak_stress < spec.stress_budget,
    }
}
