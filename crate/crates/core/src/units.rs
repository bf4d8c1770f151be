//! Decibel helpers, SI frequency parsing and number formatting.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A dB quantity that may be unbounded, e.g. an SFDR with no spur in band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Level {
    Finite(f64),
    Unbounded,
}

impl Level {
    pub fn is_unbounded(&self) -> bool {
        matches!(self, Level::Unbounded)
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Level::Finite(v) => Some(v),
            Level::Unbounded => None,
        }
    }

    /// Unbounded maps to `f64::INFINITY`.
    pub fn as_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn abs(&self) -> Level {
        match *self {
            Level::Finite(v) => Level::Finite(v.abs()),
            Level::Unbounded => Level::Unbounded,
        }
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Level::Finite(v) => write!(f, "{}", format_sig(*v, 9)),
            Level::Unbounded => write!(f, "inf"),
        }
    }
}

impl Serialize for Level {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Level::Finite(v) => s.serialize_f64(*v),
            Level::Unbounded => s.serialize_str("inf"),
        }
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Zero power maps to `-inf`.
pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Peak voltage of a sinusoid delivering `dbm` into `ohms`.
pub fn dbm_to_peak_volts(dbm: f64, ohms: f64) -> f64 {
    (2.0 * ohms * dbm_to_mw(dbm) * 1e-3).sqrt()
}

/// Parses `5.026e9`, `5.026GHz`, `450 MHz`, `1.2kHz`, `300Hz`.
pub fn parse_frequency(text: &str) -> Result<f64> {
    let t = text.trim();
    let lower = t.to_ascii_lowercase();
    let (num, scale) = if let Some(n) = lower.strip_suffix("ghz") {
        (n, 1e9)
    } else if let Some(n) = lower.strip_suffix("mhz") {
        (n, 1e6)
    } else if let Some(n) = lower.strip_suffix("khz") {
        (n, 1e3)
    } else if let Some(n) = lower.strip_suffix("hz") {
        (n, 1.0)
    } else {
        (lower.as_str(), 1.0)
    };
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("not a frequency: {text:?}")))?;
    let hz = value * scale;
    if !hz.is_finite() {
        return Err(Error::InvalidArgument(format!("not a frequency: {text:?}")));
    }
    // keep integer-hertz inputs exact (5.026GHz -> 5026000000)
    let rounded = hz.round();
    if (hz - rounded).abs() < 1e-3 {
        Ok(rounded)
    } else {
        Ok(hz)
    }
}

/// Rounds to `digits` significant digits; plain notation between 1e-5 and
/// 1e15, exponent notation outside.
pub fn format_sig(value: f64, digits: usize) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return if value.is_nan() {
            "nan".into()
        } else if value > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", digits.saturating_sub(1), value);
    let (mantissa, exp) = sci.split_once('e').expect("exponent formatting");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..15).contains(&exp) {
        let m = trim_zeros(mantissa);
        return format!("{m}e{exp}");
    }
    if exp >= digits as i32 {
        // integer part longer than the precision: round, then print plainly
        let rounded: f64 = sci.parse().expect("round trip");
        return format!("{rounded:.0}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, value)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
