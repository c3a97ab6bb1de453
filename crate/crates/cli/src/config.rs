//! Scenario configuration files.
//!
//! A flat key-value format with `[section]` headers and unit-suffixed
//! values; see the README for the full grammar. Every problem found in a
//! file is collected and reported together.

use std::collections::BTreeMap;
use std::fmt;

use flapsim_core::{Method, PivotTopology};

use crate::units::{
    format_quantity, parse_count, parse_plain, parse_plain_list, parse_quantity,
    parse_quantity_list, Dimension,
};

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ConfigIssue {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{} configuration problem(s): {}", .0.len(), .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    Stroke,
    Pitch,
}

impl ModelChoice {
    fn name(self) -> &'static str {
        match self {
            ModelChoice::Stroke => "stroke",
            ModelChoice::Pitch => "pitch",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Sweep,
    Design,
    Pivot,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Sweep => "sweep",
            Mode::Design => "design",
            Mode::Pivot => "pivot",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        [Mode::Simulate, Mode::Sweep, Mode::Design, Mode::Pivot]
            .into_iter()
            .find(|m| m.name() == s)
    }
}

/// Resonant mass: a value, or solved from the drive frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MassSpec {
    Value(f64),
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrokeSection {
    pub resonant_mass: MassSpec,
    pub mass_radius: f64,
    pub stiffness: f64,
    pub wing_cp_radius: f64,
    pub drive_amplitude: f64,
    /// Drive frequency; `None` runs at the natural frequency.
    pub drive_omega: Option<f64>,
    /// Explicit damping; `None` calibrates from `peak_force`.
    pub damping: Option<f64>,
    pub peak_force: f64,
    pub damping_scale: f64,
    pub drive_phase: f64,
    pub linearized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PitchSection {
    pub mass: f64,
    pub mass_radius: f64,
    pub stiffness: f64,
    pub cp_offset: f64,
    pub wing_cp_radius: f64,
    pub stroke_amplitude: f64,
    pub stroke_omega: f64,
    /// Explicit damping; `None` derives it from `aero_force`.
    pub damping: Option<f64>,
    pub aero_force: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Stroke(StrokeSection),
    Pitch(PitchSection),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationSection {
    pub method: Method,
    pub steps_per_period: usize,
    pub samples_per_period: usize,
    pub cycles: usize,
}

impl Default for IntegrationSection {
    fn default() -> Self {
        IntegrationSection {
            method: Method::Rk4,
            steps_per_period: 2000,
            samples_per_period: 200,
            cycles: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSection {
    pub cycles: usize,
    pub settle_tol: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            cycles: 10,
            settle_tol: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepPoints {
    /// Multiples of the natural frequency.
    Ratios(Vec<f64>),
    /// Absolute drive frequencies (rad/s).
    Omegas(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSection {
    pub resonant_mass: f64,
    pub wing_cp_radius: f64,
    pub drive_amplitude: f64,
    pub peak_force: f64,
    pub target_amplitude: f64,
    pub radius_bounds: (f64, f64),
    pub stiffness_bounds: (f64, f64),
    pub grid: (usize, usize),
    pub tolerance: f64,
    pub max_bisections: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PivotSection {
    pub n_beams: u32,
    pub beam_length: f64,
    pub beam_width: f64,
    pub beam_thickness: f64,
    pub elastic_modulus: f64,
    pub shear_modulus: f64,
    pub stress_budget: f64,
    pub topologies: Vec<PivotTopology>,
    pub max_angle: f64,
    /// Stiffness used for the stress check; `None` uses each topology's own.
    pub stiffness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputSection {
    pub trajectory: Option<String>,
    pub summary: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub mode: Mode,
    pub model: Option<ModelChoice>,
    pub params: Option<Params>,
    pub integration: IntegrationSection,
    pub analysis: AnalysisSection,
    pub sweep: Option<SweepPoints>,
    pub design: Option<DesignSection>,
    pub pivot: Option<PivotSection>,
    pub output: OutputSection,
}

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

/// Raw `section -> key -> entry` table with usage tracking.
struct Table {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
    section_lines: BTreeMap<String, usize>,
    issues: Vec<ConfigIssue>,
}

const SECTIONS: &[&str] = &[
    "scenario",
    "params",
    "integration",
    "analysis",
    "sweep",
    "design",
    "pivot",
    "output",
];

impl Table {
    fn lex(text: &str) -> Table {
        let mut t = Table {
            sections: BTreeMap::new(),
            section_lines: BTreeMap::new(),
            issues: Vec::new(),
        };
        let mut current: Option<String> = None;
        let mut seen_header = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split(['#', ';']).next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                seen_header = true;
                let Some(name) = rest.strip_suffix(']') else {
                    t.issue(Some(line), content, "malformed section header");
                    current = None;
                    continue;
                };
                let name = name.trim().to_string();
                if !SECTIONS.contains(&name.as_str()) {
                    t.issue(Some(line), &name, "unknown section");
                    current = None;
                    continue;
                }
                if t.section_lines.contains_key(&name) {
                    t.issue(Some(line), &name, "section appears twice");
                }
                t.section_lines.insert(name.clone(), line);
                t.sections.entry(name.clone()).or_default();
                current = Some(name);
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                t.issue(Some(line), content, "expected 'key = value'");
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(section) = current.clone() else {
                if !seen_header {
                    t.issue(Some(line), key, "key outside of any section");
                }
                continue;
            };
            if key.is_empty() || value.is_empty() {
                t.issue(Some(line), key, "empty key or value");
                continue;
            }
            let entries = t.sections.get_mut(&section).expect("section exists");
            if entries.contains_key(key) {
                t.issue(Some(line), &format!("{section}.{key}"), "duplicate key");
                continue;
            }
            entries.insert(
                key.to_string(),
                Entry {
                    line,
                    value: value.to_string(),
                    used: false,
                },
            );
        }
        t
    }

    fn issue(&mut self, line: Option<usize>, key: &str, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            line,
            key: key.to_string(),
            message: message.into(),
        });
    }

    fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn take(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        let e = self.sections.get_mut(section)?.get_mut(key)?;
        e.used = true;
        Some((e.line, e.value.clone()))
    }

    fn parse<T>(
        &mut self,
        section: &str,
        key: &str,
        f: impl FnOnce(&str) -> Result<T, String>,
    ) -> Option<T> {
        let (line, value) = self.take(section, key)?;
        match f(&value) {
            Ok(v) => Some(v),
            Err(msg) => {
                self.issue(Some(line), &format!("{section}.{key}"), msg);
                None
            }
        }
    }

    fn required<T>(
        &mut self,
        section: &str,
        key: &str,
        f: impl FnOnce(&str) -> Result<T, String>,
    ) -> Option<T> {
        if self.sections.get(section).is_some_and(|s| s.contains_key(key)) {
            self.parse(section, key, f)
        } else {
            let line = self.section_lines.get(section).copied();
            self.issue(line, &format!("{section}.{key}"), "required key missing");
            None
        }
    }

    fn quantity(&mut self, section: &str, key: &str, dim: Dimension) -> Option<f64> {
        self.required(section, key, |v| parse_quantity(v, dim))
    }

    fn optional_quantity(&mut self, section: &str, key: &str, dim: Dimension) -> Option<f64> {
        self.parse(section, key, |v| parse_quantity(v, dim))
    }

    /// Frequency given as either `f` or `omega`, not both.
    fn frequency(&mut self, section: &str) -> Option<f64> {
        let has = |t: &Table, k: &str| t.sections.get(section).is_some_and(|s| s.contains_key(k));
        if has(self, "f") && has(self, "omega") {
            let (line, _) = self.take(section, "omega").expect("present");
            self.take(section, "f");
            self.issue(Some(line), &format!("{section}.omega"), "give either f or omega, not both");
            return None;
        }
        let key = if has(self, "f") { "f" } else { "omega" };
        self.optional_quantity(section, key, Dimension::Frequency)
    }

    fn unused(&mut self) {
        let mut extra = Vec::new();
        for (section, entries) in &self.sections {
            for (key, e) in entries {
                if !e.used {
                    extra.push((e.line, format!("{section}.{key}")));
                }
            }
        }
        extra.sort();
        for (line, key) in extra {
            self.issue(Some(line), &key, "unknown key");
        }
    }
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(format!("expected true or false, got '{v}'")),
    }
}

fn parse_word(v: &str) -> Result<String, String> {
    if v.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
        Ok(v.to_string())
    } else {
        Err(format!("'{v}' must contain only letters, digits, '-', '_' or '.'"))
    }
}

fn parse_positive_count(v: &str) -> Result<usize, String> {
    match parse_count(v)? {
        0 => Err("must be >= 1".into()),
        n => Ok(n),
    }
}

fn parse_bounds(
    t: &mut Table,
    section: &str,
    lo: &str,
    hi: &str,
    dim: Dimension,
) -> Option<(f64, f64)> {
    let a = t.quantity(section, lo, dim);
    let b = t.quantity(section, hi, dim);
    Some((a?, b?))
}

fn stroke_section(t: &mut Table) -> Option<StrokeSection> {
    const S: &str = "params";
    let resonant_mass = t.required(S, "m_r", |v| {
        if v == "auto" {
            Ok(MassSpec::Auto)
        } else {
            parse_quantity(v, Dimension::Mass).map(MassSpec::Value)
        }
    });
    let mass_radius = t.quantity(S, "L", Dimension::Length);
    let stiffness = t.quantity(S, "k_t", Dimension::Torque);
    let wing_cp_radius = t.quantity(S, "L_w", Dimension::Length);
    let drive_amplitude = t.quantity(S, "z_max", Dimension::Length);
    let has_freq = t
        .sections
        .get(S)
        .is_some_and(|s| s.contains_key("f") || s.contains_key("omega"));
    let drive_omega = t.frequency(S);
    let damping = t.optional_quantity(S, "b", Dimension::Damping);
    let peak_force = t
        .optional_quantity(S, "peak_force", Dimension::Force)
        .unwrap_or(flapsim_core::stroke::DEFAULT_PEAK_FORCE);
    let damping_scale = t.parse(S, "damping_scale", parse_plain).unwrap_or(1.0);
    let drive_phase = t
        .optional_quantity(S, "drive_phase", Dimension::Angle)
        .unwrap_or(0.0);
    let linearized = t.parse(S, "linearized", parse_bool).unwrap_or(false);
    if resonant_mass == Some(MassSpec::Auto) && !has_freq {
        let line = t.section_lines.get(S).copied();
        t.issue(line, "params.m_r", "m_r = auto needs f or omega to tune against");
    }
    Some(StrokeSection {
        resonant_mass: resonant_mass?,
        mass_radius: mass_radius?,
        stiffness: stiffness?,
        wing_cp_radius: wing_cp_radius?,
        drive_amplitude: drive_amplitude?,
        drive_omega,
        damping,
        peak_force,
        damping_scale,
        drive_phase,
        linearized,
    })
}

fn pitch_section(t: &mut Table) -> Option<PitchSection> {
    const S: &str = "params";
    let mass = t.quantity(S, "m", Dimension::Mass);
    let mass_radius = t.quantity(S, "l", Dimension::Length);
    let stiffness = t.quantity(S, "k", Dimension::Torque);
    let cp_offset = t.quantity(S, "p", Dimension::Length);
    let wing_cp_radius = t.quantity(S, "L_w", Dimension::Length);
    let stroke_amplitude = t.quantity(S, "A", Dimension::Angle);
    let has_freq = t
        .sections
        .get(S)
        .is_some_and(|s| s.contains_key("f") || s.contains_key("omega"));
    if !has_freq {
        let line = t.section_lines.get(S).copied();
        t.issue(line, "params.f", "required key missing (f or omega)");
    }
    let stroke_omega = t.frequency(S);
    let damping = t.optional_quantity(S, "b", Dimension::Damping);
    let aero_force = t
        .optional_quantity(S, "aero_force", Dimension::Force)
        .unwrap_or(flapsim_core::pitch::DEFAULT_AERO_FORCE);
    Some(PitchSection {
        mass: mass?,
        mass_radius: mass_radius?,
        stiffness: stiffness?,
        cp_offset: cp_offset?,
        wing_cp_radius: wing_cp_radius?,
        stroke_amplitude: stroke_amplitude?,
        stroke_omega: stroke_omega?,
        damping,
        aero_force,
    })
}

impl ScenarioConfig {
    /// Parses a configuration. `mode_override` is the mode implied by the
    /// subcommand; it must agree with any `mode` in the file.
    pub fn parse(text: &str, mode_override: Option<Mode>) -> Result<Self, ConfigErrors> {
        let mut t = Table::lex(text);

        let name = t
            .parse("scenario", "name", parse_word)
            .unwrap_or_else(|| "scenario".to_string());
        let file_mode = t.parse("scenario", "mode", |v| {
            Mode::from_name(v).ok_or_else(|| format!("unknown mode '{v}' (simulate, sweep, design, pivot)"))
        });
        let model = t.parse("scenario", "model", |v| match v {
            "stroke" => Ok(ModelChoice::Stroke),
            "pitch" => Ok(ModelChoice::Pitch),
            _ => Err(format!("unknown model '{v}' (stroke, pitch)")),
        });
        let mode = match (file_mode, mode_override) {
            (Some(a), Some(b)) if a != b => {
                t.issue(None, "scenario.mode", format!("file declares '{}' but the command is '{}'", a.name(), b.name()));
                Some(a)
            }
            (Some(a), _) => Some(a),
            (None, Some(b)) => Some(b),
            (None, None) => {
                if !t.issues.iter().any(|i| i.key == "scenario.mode") {
                    t.issue(None, "scenario.mode", "required key missing");
                }
                None
            }
        };

        let needs_model = matches!(mode, Some(Mode::Simulate | Mode::Sweep));
        if needs_model && model.is_none() && !t.issues.iter().any(|i| i.key == "scenario.model") {
            t.issue(None, "scenario.model", "required key missing");
        }
        if matches!(mode, Some(Mode::Sweep | Mode::Design)) && model == Some(ModelChoice::Pitch) {
            t.issue(None, "scenario.model", format!("{} mode supports only the stroke model", mode.unwrap().name()));
        }

        let params = match model.filter(|_| needs_model) {
            Some(_) if !t.has_section("params") => {
                t.issue(None, "params", "section missing");
                None
            }
            Some(ModelChoice::Stroke) => stroke_section(&mut t).map(Params::Stroke),
            Some(ModelChoice::Pitch) => pitch_section(&mut t).map(Params::Pitch),
            None => None,
        };

        let mut integration = IntegrationSection::default();
        if let Some(m) = t.parse("integration", "method", |v| {
            Method::from_name(v).ok_or_else(|| format!("unknown method '{v}' (rk4, euler-oracle)"))
        }) {
            integration.method = m;
        }
        if let Some(n) = t.parse("integration", "steps_per_period", parse_positive_count) {
            integration.steps_per_period = n;
        }
        if let Some(n) = t.parse("integration", "samples_per_period", parse_positive_count) {
            integration.samples_per_period = n;
        }
        if let Some(n) = t.parse("integration", "cycles", parse_positive_count) {
            integration.cycles = n;
        }
        if integration.steps_per_period % integration.samples_per_period != 0 {
            t.issue(
                None,
                "integration.samples_per_period",
                format!(
                    "steps_per_period ({}) must be a multiple of samples_per_period ({})",
                    integration.steps_per_period, integration.samples_per_period
                ),
            );
        }

        let mut analysis = AnalysisSection::default();
        if let Some(n) = t.parse("analysis", "cycles", parse_positive_count) {
            analysis.cycles = n;
        }
        if let Some(x) = t.parse("analysis", "settle_tol", |v| {
            let x = parse_plain(v)?;
            if x > 0.0 { Ok(x) } else { Err("must be > 0".into()) }
        }) {
            analysis.settle_tol = x;
        }
        if mode != Some(Mode::Pivot) && integration.cycles < 3 * analysis.cycles {
            t.issue(
                None,
                "integration.cycles",
                format!("must be at least 3 x analysis.cycles = {}", 3 * analysis.cycles),
            );
        }

        let sweep = if mode == Some(Mode::Sweep) {
            let has = |k| t.sections.get("sweep").is_some_and(|s| s.contains_key(k));
            match (has("ratios"), has("freqs")) {
                (true, false) => t.parse("sweep", "ratios", parse_plain_list).map(SweepPoints::Ratios),
                (false, true) => t
                    .parse("sweep", "freqs", |v| parse_quantity_list(v, Dimension::Frequency))
                    .map(SweepPoints::Omegas),
                _ => {
                    t.take("sweep", "ratios");
                    t.take("sweep", "freqs");
                    t.issue(None, "sweep", "give exactly one of 'ratios' or 'freqs'");
                    None
                }
            }
        } else {
            None
        };

        let design = if mode == Some(Mode::Design) {
            const S: &str = "design";
            let resonant_mass = t.quantity(S, "m_r", Dimension::Mass);
            let wing_cp_radius = t.quantity(S, "L_w", Dimension::Length);
            let drive_amplitude = t.quantity(S, "z_max", Dimension::Length);
            let peak_force = t
                .optional_quantity(S, "peak_force", Dimension::Force)
                .unwrap_or(flapsim_core::stroke::DEFAULT_PEAK_FORCE);
            let target = t.quantity(S, "target", Dimension::Angle);
            let radius_bounds = parse_bounds(&mut t, S, "L_min", "L_max", Dimension::Length);
            let stiffness_bounds = parse_bounds(&mut t, S, "k_t_min", "k_t_max", Dimension::Torque);
            let grid_l = t.parse(S, "grid_L", parse_positive_count).unwrap_or(9);
            let grid_k = t.parse(S, "grid_k_t", parse_positive_count).unwrap_or(10);
            let tolerance = t.parse(S, "tolerance", parse_plain).unwrap_or(0.05);
            let max_bisections = t.parse(S, "max_bisections", parse_count).unwrap_or(30);
            match (resonant_mass, wing_cp_radius, drive_amplitude, target, radius_bounds, stiffness_bounds) {
                (
                    Some(resonant_mass),
                    Some(wing_cp_radius),
                    Some(drive_amplitude),
                    Some(target_amplitude),
                    Some(radius_bounds),
                    Some(stiffness_bounds),
                ) => Some(DesignSection {
                    resonant_mass,
                    wing_cp_radius,
                    drive_amplitude,
                    peak_force,
                    target_amplitude,
                    radius_bounds,
                    stiffness_bounds,
                    grid: (grid_l, grid_k),
                    tolerance,
                    max_bisections,
                }),
                _ => None,
            }
        } else {
            None
        };

        let pivot = if mode == Some(Mode::Pivot) {
            const S: &str = "pivot";
            if !t.has_section(S) {
                t.issue(None, S, "section missing");
                None
            } else {
                let n_beams = t.required(S, "n_beams", |v| {
                    let n = parse_count(v)?;
                    u32::try_from(n).map_err(|_| "too many beams".to_string())
                });
                let beam_length = t.quantity(S, "beam_length", Dimension::Length);
                let beam_width = t.quantity(S, "beam_width", Dimension::Length);
                let beam_thickness = t.quantity(S, "beam_thickness", Dimension::Length);
                let elastic_modulus = t
                    .optional_quantity(S, "E", Dimension::Pressure)
                    .unwrap_or(flapsim_core::model::STEEL_301_E);
                let shear_modulus = t
                    .optional_quantity(S, "G", Dimension::Pressure)
                    .unwrap_or(flapsim_core::model::STEEL_301_G);
                let stress_budget = t
                    .optional_quantity(S, "stress_budget", Dimension::Pressure)
                    .unwrap_or(flapsim_core::model::STEEL_STRESS_BUDGET);
                let topologies = t.required(S, "topology", |v| {
                    v.split(',')
                        .map(|s| {
                            PivotTopology::from_name(s.trim()).ok_or_else(|| {
                                format!(
                                    "unknown topology '{}' (parallel-bending, serial-torsion, parallel-torsion)",
                                    s.trim()
                                )
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()
                });
                let max_angle = t.quantity(S, "max_angle", Dimension::Angle);
                let stiffness = t.optional_quantity(S, "k_t", Dimension::Torque);
                match (n_beams, beam_length, beam_width, beam_thickness, topologies, max_angle) {
                    (Some(n_beams), Some(beam_length), Some(beam_width), Some(beam_thickness), Some(topologies), Some(max_angle)) => {
                        Some(PivotSection {
                            n_beams,
                            beam_length,
                            beam_width,
                            beam_thickness,
                            elastic_modulus,
                            shear_modulus,
                            stress_budget,
                            topologies,
                            max_angle,
                            stiffness,
                        })
                    }
                    _ => None,
                }
            }
        } else {
            None
        };

        let output = OutputSection {
            trajectory: t.parse("output", "trajectory", |v| Ok(v.to_string())),
            summary: t.parse("output", "summary", |v| Ok(v.to_string())),
        };

        t.unused();
        if !t.issues.is_empty() {
            return Err(ConfigErrors(t.issues));
        }
        Ok(ScenarioConfig {
            name,
            mode: mode.expect("mode resolved when no issues"),
            model,
            params,
            integration,
            analysis,
            sweep,
            design,
            pivot,
            output,
        })
    }

    /// Canonical text form: SI units, fixed key order, full precision.
    pub fn to_text(&self) -> String {
        use Dimension::*;
        let q = format_quantity;
        let mut sections: Vec<(&str, Vec<(String, String)>)> = Vec::new();

        let mut scenario = vec![
            ("name".to_string(), self.name.clone()),
            ("mode".to_string(), self.mode.name().to_string()),
        ];
        if let Some(m) = self.model {
            scenario.push(("model".into(), m.name().into()));
        }
        sections.push(("scenario", scenario));

        match &self.params {
            Some(Params::Stroke(s)) => {
                let mut v = vec![(
                    "m_r".to_string(),
                    match s.resonant_mass {
                        MassSpec::Auto => "auto".to_string(),
                        MassSpec::Value(m) => q(m, Mass),
                    },
                )];
                v.push(("L".into(), q(s.mass_radius, Length)));
                v.push(("k_t".into(), q(s.stiffness, Torque)));
                v.push(("L_w".into(), q(s.wing_cp_radius, Length)));
                v.push(("z_max".into(), q(s.drive_amplitude, Length)));
                if let Some(w) = s.drive_omega {
                    v.push(("omega".into(), q(w, Frequency)));
                }
                if let Some(b) = s.damping {
                    v.push(("b".into(), q(b, Damping)));
                }
                v.push(("peak_force".into(), q(s.peak_force, Force)));
                v.push(("damping_scale".into(), s.damping_scale.to_string()));
                v.push(("drive_phase".into(), q(s.drive_phase, Angle)));
                v.push(("linearized".into(), s.linearized.to_string()));
                sections.push(("params", v));
            }
            Some(Params::Pitch(p)) => {
                let mut v = vec![
                    ("m".to_string(), q(p.mass, Mass)),
                    ("l".into(), q(p.mass_radius, Length)),
                    ("k".into(), q(p.stiffness, Torque)),
                    ("p".into(), q(p.cp_offset, Length)),
                    ("L_w".into(), q(p.wing_cp_radius, Length)),
                    ("A".into(), q(p.stroke_amplitude, Angle)),
                    ("omega".into(), q(p.stroke_omega, Frequency)),
                ];
                if let Some(b) = p.damping {
                    v.push(("b".into(), q(b, Damping)));
                }
                v.push(("aero_force".into(), q(p.aero_force, Force)));
                sections.push(("params", v));
            }
            None => {}
        }

        let i = &self.integration;
        sections.push((
            "integration",
            vec![
                ("method".into(), i.method.name().into()),
                ("steps_per_period".into(), i.steps_per_period.to_string()),
                ("samples_per_period".into(), i.samples_per_period.to_string()),
                ("cycles".into(), i.cycles.to_string()),
            ],
        ));
        sections.push((
            "analysis",
            vec![
                ("cycles".into(), self.analysis.cycles.to_string()),
                ("settle_tol".into(), self.analysis.settle_tol.to_string()),
            ],
        ));

        let join = |v: &[f64], f: &dyn Fn(f64) -> String| v.iter().map(|x| f(*x)).collect::<Vec<_>>().join(", ");
        match &self.sweep {
            Some(SweepPoints::Ratios(r)) => {
                sections.push(("sweep", vec![("ratios".into(), join(r, &|x| x.to_string()))]));
            }
            Some(SweepPoints::Omegas(w)) => {
                sections.push(("sweep", vec![("freqs".into(), join(w, &|x| q(x, Frequency)))]));
            }
            None => {}
        }
        if let Some(d) = &self.design {
            sections.push((
                "design",
                vec![
                    ("m_r".into(), q(d.resonant_mass, Mass)),
                    ("L_w".into(), q(d.wing_cp_radius, Length)),
                    ("z_max".into(), q(d.drive_amplitude, Length)),
                    ("peak_force".into(), q(d.peak_force, Force)),
                    ("target".into(), q(d.target_amplitude, Angle)),
                    ("L_min".into(), q(d.radius_bounds.0, Length)),
                    ("L_max".into(), q(d.radius_bounds.1, Length)),
                    ("k_t_min".into(), q(d.stiffness_bounds.0, Torque)),
                    ("k_t_max".into(), q(d.stiffness_bounds.1, Torque)),
                    ("grid_L".into(), d.grid.0.to_string()),
                    ("grid_k_t".into(), d.grid.1.to_string()),
                    ("tolerance".into(), d.tolerance.to_string()),
                    ("max_bisections".into(), d.max_bisections.to_string()),
                ],
            ));
        }
        if let Some(p) = &self.pivot {
            let mut v = vec![
                ("n_beams".to_string(), p.n_beams.to_string()),
                ("beam_length".into(), q(p.beam_length, Length)),
                ("beam_width".into(), q(p.beam_width, Length)),
                ("beam_thickness".into(), q(p.beam_thickness, Length)),
                ("E".into(), q(p.elastic_modulus, Pressure)),
                ("G".into(), q(p.shear_modulus, Pressure)),
                ("stress_budget".into(), q(p.stress_budget, Pressure)),
                (
                    "topology".into(),
                    p.topologies.iter().map(|t| t.name()).collect::<Vec<_>>().join(", "),
                ),
                ("max_angle".into(), q(p.max_angle, Angle)),
            ];
            if let Some(k) = p.stiffness {
                v.push(("k_t".into(), q(k, Torque)));
            }
            sections.push(("pivot", v));
        }
        let mut o = Vec::new();
        if let Some(p) = &self.output.trajectory {
            o.push(("trajectory".to_string(), p.clone()));
        }
        if let Some(p) = &self.output.summary {
            o.push(("summary".to_string(), p.clone()));
        }
        if !o.is_empty() {
            sections.push(("output", o));
        }

        let mut out = String::new();
        for (i, (name, entries)) in sections.into_iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&format!("[{name}]\n"));
            for (k, v) in entries {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }
}
