//! Scenarios shipped with the binary.

pub struct BuiltIn {
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! builtin {
    ($name:literal) => {
        BuiltIn {
            name: $name,
            text: include_str!(concat!("../scenarios/", $name, ".cfg")),
        }
    };
}

pub const BUILT_INS: &[BuiltIn] = &[
    builtin!("fig2-stroke"),
    builtin!("exp-70hz-mass-tuning"),
    builtin!("pitch-design-point"),
    builtin!("pitch-phase-check"),
    builtin!("pivot-table1"),
    builtin!("resonance-sweep"),
    builtin!("stroke-design-search"),
];

pub fn find(name: &str) -> Option<&'static BuiltIn> {
    BUILT_INS.iter().find(|b| b.name == name)
}

impl BuiltIn {
    /// First comment line of the file.
    pub fn description(&self) -> &'static str {
        self.text
            .lines()
            .find_map(|l| l.trim().strip_prefix('#'))
            .map(str::trim)
            .unwrap_or("")
    }
}
