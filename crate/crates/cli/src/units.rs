//! Unit-suffixed quantities, converted to SI at parse time.

use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Mass,
    /// Torque, also used for torsional stiffness per radian.
    Torque,
    Force,
    /// Angular rate; Hz is converted with 2π.
    Frequency,
    Angle,
    /// Linear damping coefficient.
    Damping,
    Pressure,
}

impl Dimension {
    /// Unit written by `--dump-config`.
    pub fn si_unit(self) -> &'static str {
        match self {
            Dimension::Length => "m",
            Dimension::Mass => "kg",
            Dimension::Torque => "N*m",
            Dimension::Force => "N",
            Dimension::Frequency => "rad/s",
            Dimension::Angle => "rad",
            Dimension::Damping => "N*s/m",
            Dimension::Pressure => "Pa",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Dimension::Length => "length (m, mm, um)",
            Dimension::Mass => "mass (kg, g, mg)",
            Dimension::Torque => "torque or stiffness (N*m, mNm, uNm, optionally /rad)",
            Dimension::Force => "force (N, mN, uN)",
            Dimension::Frequency => "frequency (Hz, kHz, rad/s)",
            Dimension::Angle => "angle (rad, deg)",
            Dimension::Damping => "damping (N*s/m, Ns/m)",
            Dimension::Pressure => "pressure (Pa, kPa, MPa, GPa)",
        }
    }
}

/// (suffix, dimension, multiplier, divisor). Sub-unit prefixes divide by an
/// exact power of ten so that `38 um` parses to the same `f64` as `38e-6`.
const UNITS: &[(&str, Dimension, f64, f64)] = &[
    ("m", Dimension::Length, 1.0, 1.0),
    ("cm", Dimension::Length, 1.0, 1e2),
    ("mm", Dimension::Length, 1.0, 1e3),
    ("um", Dimension::Length, 1.0, 1e6),
    ("µm", Dimension::Length, 1.0, 1e6),
    ("kg", Dimension::Mass, 1.0, 1.0),
    ("g", Dimension::Mass, 1.0, 1e3),
    ("mg", Dimension::Mass, 1.0, 1e6),
    ("N*m", Dimension::Torque, 1.0, 1.0),
    ("Nm", Dimension::Torque, 1.0, 1.0),
    ("mNm", Dimension::Torque, 1.0, 1e3),
    ("uNm", Dimension::Torque, 1.0, 1e6),
    ("µNm", Dimension::Torque, 1.0, 1e6),
    ("N", Dimension::Force, 1.0, 1.0),
    ("mN", Dimension::Force, 1.0, 1e3),
    ("uN", Dimension::Force, 1.0, 1e6),
    ("µN", Dimension::Force, 1.0, 1e6),
    ("rad/s", Dimension::Frequency, 1.0, 1.0),
    ("Hz", Dimension::Frequency, TAU, 1.0),
    ("kHz", Dimension::Frequency, TAU * 1e3, 1.0),
    ("rad", Dimension::Angle, 1.0, 1.0),
    ("deg", Dimension::Angle, PI, 180.0),
    ("N*s/m", Dimension::Damping, 1.0, 1.0),
    ("Ns/m", Dimension::Damping, 1.0, 1.0),
    ("Pa", Dimension::Pressure, 1.0, 1.0),
    ("kPa", Dimension::Pressure, 1e3, 1.0),
    ("MPa", Dimension::Pressure, 1e6, 1.0),
    ("GPa", Dimension::Pressure, 1e9, 1.0),
];

fn lookup(unit: &str) -> Option<(Dimension, f64, f64)> {
    // stiffness may be written per radian
    let base = unit.strip_suffix("/rad").unwrap_or(unit);
    UNITS
        .iter()
        .find(|(name, dim, _, _)| {
            *name == base && (base == unit || *dim == Dimension::Torque)
        })
        .map(|&(_, d, mul, div)| (d, mul, div))
}

/// Splits `"2.5 mm"` or `"2.5mm"` into the number and the unit text.
pub fn split_number(text: &str) -> Result<(f64, &str), String> {
    let text = text.trim();
    let end = text
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit()
                || c == '.'
                || c == '+'
                || c == '-'
                || ((c == 'e' || c == 'E') && i > 0 && looks_like_exponent(&text[i..])))
        })
        .map(|(i, _)| i)
        .unwrap_or(text.len());
    let (num, unit) = text.split_at(end);
    let value: f64 = num
        .parse()
        .map_err(|_| format!("expected a number, got '{text}'"))?;
    if !value.is_finite() {
        return Err(format!("'{text}' is not finite"));
    }
    Ok((value, unit.trim()))
}

fn looks_like_exponent(rest: &str) -> bool {
    let mut chars = rest.chars().skip(1);
    match chars.next() {
        Some(c) if c.is_ascii_digit() => true,
        Some('+') | Some('-') => chars.next().is_some_and(|c| c.is_ascii_digit()),
        _ => false,
    }
}

/// Parses a quantity of the given dimension into SI.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    let (value, unit) = split_number(text)?;
    if unit.is_empty() {
        return Err(format!("missing unit; expected {}", dim.describe()));
    }
    match lookup(unit) {
        Some((d, mul, div)) if d == dim => Ok(value * mul / div),
        Some(_) | None => Err(format!("unit '{unit}' is not a {}", dim.describe())),
    }
}

/// Parses a dimensionless number.
pub fn parse_plain(text: &str) -> Result<f64, String> {
    let (value, unit) = split_number(text)?;
    if !unit.is_empty() {
        return Err(format!("unexpected unit '{unit}' on a dimensionless value"));
    }
    Ok(value)
}

pub fn parse_count(text: &str) -> Result<usize, String> {
    text.trim()
        .parse()
        .map_err(|_| format!("expected a non-negative integer, got '{}'", text.trim()))
}

/// Parses `"56, 70, 84 Hz"`: comma-separated numbers with one trailing
/// unit shared by all, or a unit on each item.
pub fn parse_quantity_list(text: &str, dim: Dimension) -> Result<Vec<f64>, String> {
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    let shared = match items.last() {
        Some(last) => split_number(last)?.1,
        None => "",
    };
    items
        .iter()
        .map(|item| {
            let (_, unit) = split_number(item)?;
            if unit.is_empty() && !shared.is_empty() {
                parse_quantity(&format!("{item} {shared}"), dim)
            } else {
                parse_quantity(item, dim)
            }
        })
        .collect()
}

pub fn parse_plain_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',').map(parse_plain).collect()
}

/// Formats an SI value so that it re-parses to the identical `f64`.
pub fn format_quantity(value: f64, dim: Dimension) -> String {
    format!("{value} {}", dim.si_unit())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes_convert_to_si() {
        assert_eq!(parse_quantity("2.5 mm", Dimension::Length), Ok(2.5e-3));
        assert_eq!(parse_quantity("2.5mm", Dimension::Length), Ok(2.5e-3));
        assert_eq!(parse_quantity("2 mg", Dimension::Mass), Ok(2e-6));
        assert_eq!(parse_quantity("38 um", Dimension::Length), Ok(38e-6));
        assert_eq!(parse_quantity("38 µm", Dimension::Length), Ok(38e-6));
        assert_eq!(parse_quantity("20 uNm", Dimension::Torque), Ok(20e-6));
        assert_eq!(parse_quantity("20 uNm/rad", Dimension::Torque), Ok(20e-6));
        assert_eq!(parse_quantity("1.5e-3 N", Dimension::Force), Ok(1.5e-3));
        assert_eq!(parse_quantity("0.8 GPa", Dimension::Pressure), Ok(0.8e9));
        assert_eq!(parse_quantity("1 Hz", Dimension::Frequency), Ok(TAU));
        assert_eq!(parse_quantity("180 deg", Dimension::Angle), Ok(PI));
    }

    #[test]
    fn wrong_or_missing_units_are_errors() {
        assert!(parse_quantity("2.5", Dimension::Length).is_err());
        assert!(parse_quantity("2.5 mg", Dimension::Length).is_err());
        assert!(parse_quantity("2.5 furlong", Dimension::Length).is_err());
        assert!(parse_quantity("3 mm/rad", Dimension::Length).is_err());
        assert!(parse_quantity("abc mm", Dimension::Length).is_err());
        assert!(parse_plain("3 mm").is_err());
    }

    #[test]
    fn exponent_is_not_a_unit() {
        assert_eq!(split_number("1e-3 N"), Ok((1e-3, "N")));
        assert_eq!(split_number("2E+2mm"), Ok((200.0, "mm")));
    }

    #[test]
    fn lists_share_trailing_unit() {
        let v = parse_quantity_list("1, 2, 3 Hz", Dimension::Frequency).unwrap();
        assert_eq!(v, vec![TAU, 2.0 * TAU, 3.0 * TAU]);
        let v = parse_quantity_list("1 mm, 2 m", Dimension::Length).unwrap();
        assert_eq!(v, vec![1e-3, 2.0]);
        assert_eq!(parse_plain_list("0.8, 1, 1.2"), Ok(vec![0.8, 1.0, 1.2]));
    }

    #[test]
    fn formatted_values_round_trip() {
        for v in [2e-6, 1264.9110640673518, 0.00021929117206776332, 1e-300, 123456789.0] {
            let s = format_quantity(v, Dimension::Damping);
            assert_eq!(parse_quantity(&s, Dimension::Damping), Ok(v));
        }
    }
}
