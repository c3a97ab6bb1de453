//! Executes a parsed scenario and writes its outputs.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use flapsim_core::analysis::{
    resonance_curve, stroke_alignment, summarize, AnalysisError, AnalysisSettings, SimSummary,
};
use flapsim_core::design::{
    pivot_stiffness, pivot_stress_check, solve_resonant_mass, solve_stroke_design, DesignError,
    StrokeDesignProblem,
};
use flapsim_core::pitch::{pitch_natural_frequency, pitch_torque_decomposition, PitchTorques};
use flapsim_core::stroke::calibrate_damping;
use flapsim_core::{
    natural_frequency, IntegrationError, PeriodicTiming, PitchModel, PitchParams, PivotSpec,
    StrokeModel, StrokeParams, Trajectory, ValidationError,
};

use crate::config::{
    ConfigIssue, MassSpec, Mode, Params, PitchSection, ScenarioConfig, StrokeSection, SweepPoints,
};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid parameters")]
    Invalid(Vec<ConfigIssue>),
    #[error("integration blew up at t = {t} s")]
    BlowUp { t: f64 },
    #[error("{0}")]
    Failed(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Invalid(_) => 1,
            RunError::BlowUp { .. } => 2,
            RunError::Failed(_) => 3,
            RunError::Io { .. } => 4,
        }
    }
}

fn invalid(section: &str, e: ValidationError) -> RunError {
    RunError::Invalid(
        e.violations
            .into_iter()
            .map(|v| ConfigIssue {
                line: None,
                key: format!("{section}.{}", v.field),
                message: v.reason,
            })
            .collect(),
    )
}

impl From<IntegrationError> for RunError {
    fn from(e: IntegrationError) -> Self {
        match e {
            IntegrationError::BlowUp { t } => RunError::BlowUp { t },
            other => RunError::Failed(other.to_string()),
        }
    }
}

impl From<AnalysisError> for RunError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Integration(i) => i.into(),
            other => RunError::Failed(other.to_string()),
        }
    }
}

impl From<DesignError> for RunError {
    fn from(e: DesignError) -> Self {
        match e {
            DesignError::Analysis(a) => a.into(),
            other => RunError::Failed(other.to_string()),
        }
    }
}

/// Files written by a run, plus a one-line human summary.
#[derive(Debug)]
pub struct RunReport {
    pub written: Vec<PathBuf>,
    pub headline: String,
}

fn timing(cfg: &ScenarioConfig) -> PeriodicTiming {
    PeriodicTiming {
        steps_per_period: cfg.integration.steps_per_period,
        samples_per_period: cfg.integration.samples_per_period,
        cycles: cfg.integration.cycles,
        method: cfg.integration.method,
    }
}

fn settings(cfg: &ScenarioConfig) -> AnalysisSettings {
    AnalysisSettings {
        cycles: cfg.analysis.cycles,
        settle_tol: cfg.analysis.settle_tol,
    }
}

/// Resolves `auto` mass, default frequency and calibrated damping.
pub fn stroke_params(s: &StrokeSection) -> Result<StrokeParams, RunError> {
    let resonant_mass = match s.resonant_mass {
        MassSpec::Value(m) => m,
        MassSpec::Auto => {
            let omega = s.drive_omega.expect("config requires a frequency for m_r = auto");
            solve_resonant_mass(s.stiffness, s.mass_radius, omega / TAU)
        }
    };
    let mut p = StrokeParams {
        resonant_mass,
        mass_radius: s.mass_radius,
        stiffness: s.stiffness,
        wing_cp_radius: s.wing_cp_radius,
        damping: 0.0,
        drive_amplitude: s.drive_amplitude,
        drive_omega: 1.0,
    };
    let omega_n = natural_frequency(&p);
    p.drive_omega = s.drive_omega.unwrap_or(omega_n);
    let base = s
        .damping
        .unwrap_or_else(|| calibrate_damping(s.wing_cp_radius, omega_n, s.drive_amplitude, s.peak_force));
    p.damping = base * s.damping_scale;
    p.validate().map_err(|e| invalid("params", e))
}

pub fn pitch_params(s: &PitchSection) -> Result<PitchParams, RunError> {
    let mut p = PitchParams::with_aero_force(
        s.mass,
        s.mass_radius,
        s.stiffness,
        s.cp_offset,
        s.wing_cp_radius,
        s.stroke_amplitude,
        s.stroke_omega,
        s.aero_force,
    );
    if let Some(b) = s.damping {
        p.damping = b;
    }
    p.validate().map_err(|e| invalid("params", e))
}

struct Outputs<'a> {
    dir: &'a Path,
    cfg: &'a ScenarioConfig,
    written: Vec<PathBuf>,
}

impl Outputs<'_> {
    fn path(&self, configured: &Option<String>, ext: &str) -> PathBuf {
        match configured {
            Some(p) => self.dir.join(p),
            None => self.dir.join(format!("{}.{ext}", self.cfg.name)),
        }
    }

    fn write(&mut self, path: PathBuf, contents: &str) -> Result<(), RunError> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|source| RunError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        std::fs::write(&path, contents).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        self.written.push(path);
        Ok(())
    }

    fn table(&mut self, contents: &str) -> Result<(), RunError> {
        let path = self.path(&self.cfg.output.trajectory, "csv");
        self.write(path, contents)
    }

    fn summary<T: Serialize>(&mut self, value: &T) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value).expect("summary serializes");
        text.push('\n');
        let path = self.path(&self.cfg.output.summary, "json");
        self.write(path, &text)
    }
}

pub fn execute(cfg: &ScenarioConfig, output_dir: &Path) -> Result<RunReport, RunError> {
    let mut out = Outputs {
        dir: output_dir,
        cfg,
        written: Vec::new(),
    };
    let headline = match cfg.mode {
        Mode::Simulate => match cfg.params.as_ref().expect("simulate has params") {
            Params::Stroke(s) => simulate_stroke(cfg, s, &mut out)?,
            Params::Pitch(s) => simulate_pitch(cfg, s, &mut out)?,
        },
        Mode::Sweep => sweep(cfg, &mut out)?,
        Mode::Design => design(cfg, &mut out)?,
        Mode::Pivot => pivot(cfg, &mut out)?,
    };
    Ok(RunReport {
        written: out.written,
        headline,
    })
}

fn trajectory_csv(traj: &Trajectory, torques: Option<&[PitchTorques]>) -> String {
    let mut s = String::with_capacity(traj.len() * 64);
    s.push_str("t,angle_rad,rate_rad_s");
    if torques.is_some() {
        s.push_str(",spring_torque_n_m,aerodynamic_torque_n_m,centripetal_torque_n_m");
    }
    s.push('\n');
    for (i, p) in traj.samples().iter().enumerate() {
        let _ = write!(s, "{},{},{}", p.t, p.angle, p.rate);
        if let Some(q) = torques {
            let q = &q[i];
            let _ = write!(s, ",{},{},{}", q.spring, q.aerodynamic, q.centripetal);
        }
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct CommonSummary {
    scenario: String,
    model: &'static str,
    steady_amplitude_rad: f64,
    steady_amplitude_deg: f64,
    settled: bool,
    settle_time_s: Option<f64>,
    phase_lag_vs_drive_rad: f64,
    peak_rate_rad_s: f64,
    drive_omega_rad_s: f64,
    natural_omega_rad_s: f64,
    damping_n_s_per_m: f64,
    samples: usize,
    dt_out_s: f64,
}

impl CommonSummary {
    #[allow(clippy::too_many_arguments)]
    fn new(
        cfg: &ScenarioConfig,
        model: &'static str,
        s: &SimSummary,
        traj: &Trajectory,
        drive_omega: f64,
        natural_omega: f64,
        damping: f64,
    ) -> Self {
        CommonSummary {
            scenario: cfg.name.clone(),
            model,
            steady_amplitude_rad: s.steady_amplitude,
            steady_amplitude_deg: s.steady_amplitude.to_degrees(),
            settled: s.settled,
            settle_time_s: s.settle_time,
            phase_lag_vs_drive_rad: s.phase_lag_vs_drive,
            peak_rate_rad_s: s.peak_rate,
            drive_omega_rad_s: drive_omega,
            natural_omega_rad_s: natural_omega,
            damping_n_s_per_m: damping,
            samples: traj.len(),
            dt_out_s: traj.dt_out(),
        }
    }
}

#[derive(Serialize)]
struct StrokeSummary {
    #[serde(flatten)]
    common: CommonSummary,
    resonant_mass_kg: f64,
    drive_phase_rad: f64,
    linearized: bool,
}

fn simulate_stroke(cfg: &ScenarioConfig, s: &StrokeSection, out: &mut Outputs) -> Result<String, RunError> {
    let p = stroke_params(s)?;
    let mut model = StrokeModel::new(p);
    model = model.with_drive(model.drive.with_phase(s.drive_phase));
    if s.linearized {
        model = model.linearized();
    }
    let traj = model.simulate(&model.config(timing(cfg))?)?;
    let summary = summarize(&traj, p.drive_omega, s.drive_phase, &settings(cfg), None)?;
    out.table(&trajectory_csv(&traj, None))?;
    out.summary(&StrokeSummary {
        common: CommonSummary::new(cfg, "stroke", &summary, &traj, p.drive_omega, model.natural_omega(), p.damping),
        resonant_mass_kg: p.resonant_mass,
        drive_phase_rad: s.drive_phase,
        linearized: s.linearized,
    })?;
    Ok(format!(
        "stroke amplitude {:.4} rad ({:.2} deg), {}",
        summary.steady_amplitude,
        summary.steady_amplitude.to_degrees(),
        if summary.settled { "settled" } else { "not settled" }
    ))
}

#[derive(Serialize)]
struct PitchSummary {
    #[serde(flatten)]
    common: CommonSummary,
    peak_spring_torque_n_m: f64,
    peak_aerodynamic_torque_n_m: f64,
    peak_centripetal_torque_n_m: f64,
    aero_force_n: f64,
    worst_max_offset_rad: f64,
    worst_min_offset_rad: f64,
}

fn simulate_pitch(cfg: &ScenarioConfig, s: &PitchSection, out: &mut Outputs) -> Result<String, RunError> {
    let p = pitch_params(s)?;
    let model = PitchModel::new(p);
    let traj = model.simulate(&model.config(timing(cfg))?)?;
    let decomposition = pitch_torque_decomposition(&traj, &p).map_err(|e| RunError::Failed(e.to_string()))?;
    let peaks = decomposition.steady_peaks;
    let summary = summarize(&traj, p.stroke_omega, 0.0, &settings(cfg), Some(peaks))?;
    let alignment = stroke_alignment(&traj, p.stroke_omega, 0.0, cfg.analysis.cycles)?;
    out.table(&trajectory_csv(&traj, Some(&decomposition.samples)))?;
    out.summary(&PitchSummary {
        common: CommonSummary::new(
            cfg,
            "pitch",
            &summary,
            &traj,
            p.stroke_omega,
            pitch_natural_frequency(&p),
            p.damping,
        ),
        peak_spring_torque_n_m: peaks.spring,
        peak_aerodynamic_torque_n_m: peaks.aerodynamic,
        peak_centripetal_torque_n_m: peaks.centripetal,
        aero_force_n: p.aero_force(),
        worst_max_offset_rad: alignment.worst_max_offset(),
        worst_min_offset_rad: alignment.worst_min_offset(),
    })?;
    Ok(format!(
        "pitch amplitude {:.4} rad ({:.2} deg), {}; peak aerodynamic torque {:.4e} N*m",
        summary.steady_amplitude,
        summary.steady_amplitude.to_degrees(),
        if summary.settled { "settled" } else { "not settled" },
        peaks.aerodynamic
    ))
}

#[derive(Serialize)]
struct SweepRow {
    omega_rad_s: f64,
    frequency_hz: f64,
    ratio_to_natural: f64,
    steady_amplitude_rad: Option<f64>,
    settled: Option<bool>,
    spread: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepSummary {
    scenario: String,
    natural_omega_rad_s: f64,
    damping_n_s_per_m: f64,
    resonant_mass_kg: f64,
    peak_omega_rad_s: Option<f64>,
    peak_amplitude_rad: Option<f64>,
    points: Vec<SweepRow>,
}

fn sweep(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<String, RunError> {
    let Some(Params::Stroke(s)) = &cfg.params else {
        unreachable!("config enforces stroke params for sweeps")
    };
    // damping stays at its natural-frequency calibration across the sweep
    let p = stroke_params(s)?;
    let omega_n = natural_frequency(&p);
    let omegas: Vec<f64> = match cfg.sweep.as_ref().expect("sweep points") {
        SweepPoints::Ratios(r) => r.iter().map(|x| x * omega_n).collect(),
        SweepPoints::Omegas(w) => w.clone(),
    };
    let points = resonance_curve(&p, &omegas, &timing(cfg), &settings(cfg));
    if let Some(t) = points.iter().find_map(|pt| match &pt.result {
        Err(AnalysisError::Integration(IntegrationError::BlowUp { t })) => Some(*t),
        _ => None,
    }) {
        return Err(RunError::BlowUp { t });
    }

    let rows: Vec<SweepRow> = points
        .iter()
        .map(|pt| {
            let ok = pt.result.as_ref().ok();
            SweepRow {
                omega_rad_s: pt.omega,
                frequency_hz: pt.omega / TAU,
                ratio_to_natural: pt.omega / omega_n,
                steady_amplitude_rad: ok.map(|r| r.amplitude),
                settled: ok.map(|r| r.settled),
                spread: ok.map(|r| r.spread),
                error: pt.result.as_ref().err().map(|e| e.to_string()),
            }
        })
        .collect();

    let mut csv = String::from("omega_rad_s,frequency_hz,ratio_to_natural,steady_amplitude_rad,settled,spread,error\n");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.omega_rad_s,
            r.frequency_hz,
            r.ratio_to_natural,
            opt(r.steady_amplitude_rad),
            r.settled.map(|b| b.to_string()).unwrap_or_default(),
            opt(r.spread),
            r.error.as_deref().unwrap_or("").replace(',', ";"),
        );
    }
    let peak = rows
        .iter()
        .filter_map(|r| r.steady_amplitude_rad.map(|a| (r.omega_rad_s, a)))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    out.table(&csv)?;
    out.summary(&SweepSummary {
        scenario: cfg.name.clone(),
        natural_omega_rad_s: omega_n,
        damping_n_s_per_m: p.damping,
        resonant_mass_kg: p.resonant_mass,
        peak_omega_rad_s: peak.map(|x| x.0),
        peak_amplitude_rad: peak.map(|x| x.1),
        points: rows,
    })?;
    Ok(match peak {
        Some((w, a)) => format!("{} points; peak {:.4} rad at {:.2} Hz", omegas.len(), a, w / TAU),
        None => format!("{} points; none produced an amplitude", omegas.len()),
    })
}

#[derive(Serialize)]
struct DesignSummary {
    scenario: String,
    mass_radius_m: f64,
    stiffness_n_m_per_rad: f64,
    resonant_mass_kg: f64,
    drive_omega_rad_s: f64,
    damping_n_s_per_m: f64,
    target_amplitude_rad: f64,
    steady_amplitude_rad: f64,
    relative_residual: f64,
    tolerance: f64,
    evaluations: usize,
}

fn design(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<String, RunError> {
    let d = cfg.design.as_ref().expect("design section");
    let problem = StrokeDesignProblem {
        drive_amplitude: d.drive_amplitude,
        resonant_mass: d.resonant_mass,
        wing_cp_radius: d.wing_cp_radius,
        peak_force: d.peak_force,
        target_amplitude: d.target_amplitude,
        radius_bounds: d.radius_bounds,
        stiffness_bounds: d.stiffness_bounds,
        grid: d.grid,
        tolerance: d.tolerance,
        max_bisections: d.max_bisections,
        timing: timing(cfg),
        settings: settings(cfg),
    };
    let sol = solve_stroke_design(&problem)?;
    let model = StrokeModel::new(sol.params);
    let traj = model.simulate(&model.config(timing(cfg))?)?;
    out.table(&trajectory_csv(&traj, None))?;
    out.summary(&DesignSummary {
        scenario: cfg.name.clone(),
        mass_radius_m: sol.mass_radius,
        stiffness_n_m_per_rad: sol.stiffness,
        resonant_mass_kg: sol.params.resonant_mass,
        drive_omega_rad_s: sol.params.drive_omega,
        damping_n_s_per_m: sol.params.damping,
        target_amplitude_rad: d.target_amplitude,
        steady_amplitude_rad: sol.amplitude,
        relative_residual: sol.residual,
        tolerance: d.tolerance,
        evaluations: sol.evaluations,
    })?;
    Ok(format!(
        "L = {:.4} mm, k_t = {:.4} uNm/rad, amplitude {:.4} rad (residual {:+.2e}, {} evaluations)",
        sol.mass_radius * 1e3,
        sol.stiffness * 1e6,
        sol.amplitude,
        sol.residual,
        sol.evaluations
    ))
}

#[derive(Serialize)]
struct PivotRow {
    topology: &'static str,
    stiffness_n_m_per_rad: f64,
    check_stiffness_n_m_per_rad: f64,
    torque_n_m: f64,
    beam_torque_n_m: f64,
    peak_stress_pa: f64,
    stress_budget_pa: f64,
    within_budget: bool,
}

#[derive(Serialize)]
struct PivotSummary {
    scenario: String,
    max_angle_rad: f64,
    pivots: Vec<PivotRow>,
}

fn pivot(cfg: &ScenarioConfig, out: &mut Outputs) -> Result<String, RunError> {
    let s = cfg.pivot.as_ref().expect("pivot section");
    let mut rows = Vec::new();
    for &topology in &s.topologies {
        let spec = PivotSpec {
            n_beams: s.n_beams,
            beam_length: s.beam_length,
            beam_width: s.beam_width,
            beam_thickness: s.beam_thickness,
            elastic_modulus: s.elastic_modulus,
            shear_modulus: s.shear_modulus,
            stress_budget: s.stress_budget,
            topology,
        }
        .validate()
        .map_err(|e| invalid("pivot", e))?;
        let k = pivot_stiffness(&spec);
        let k_check = s.stiffness.unwrap_or(k);
        let c = pivot_stress_check(&spec, s.max_angle, k_check);
        rows.push(PivotRow {
            topology: topology.name(),
            stiffness_n_m_per_rad: k,
            check_stiffness_n_m_per_rad: k_check,
            torque_n_m: c.torque,
            beam_torque_n_m: c.beam_torque,
            peak_stress_pa: c.peak_stress,
            stress_budget_pa: spec.stress_budget,
            within_budget: c.within_budget,
        });
    }
    let mut csv = String::from(
        "topology,stiffness_n_m_per_rad,check_stiffness_n_m_per_rad,torque_n_m,beam_torque_n_m,peak_stress_pa,stress_budget_pa,within_budget\n",
    );
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.topology,
            r.stiffness_n_m_per_rad,
            r.check_stiffness_n_m_per_rad,
            r.torque_n_m,
            r.beam_torque_n_m,
            r.peak_stress_pa,
            r.stress_budget_pa,
            r.within_budget
        );
    }
    let headline = rows
        .iter()
        .map(|r| {
            format!(
                "{}: {:.3} uNm/rad, {:.3} GPa{}",
                r.topology,
                r.stiffness_n_m_per_rad * 1e6,
                r.peak_stress_pa / 1e9,
                if r.within_budget { "" } else { " (over budget)" }
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    out.table(&csv)?;
    out.summary(&PivotSummary {
        scenario: cfg.name.clone(),
        max_angle_rad: s.max_angle,
        pivots: rows,
    })?;
    Ok(headline)
}
