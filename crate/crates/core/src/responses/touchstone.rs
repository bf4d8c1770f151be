//! Touchstone v1 two-port (`.s2p`) reading and writing, S21 magnitude only.

use std::fmt::Write as _;

use super::{Extrapolation, TabulatedResponse};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
enum DataFormat {
    Db,
    MagnitudeAngle,
    RealImaginary,
}

#[derive(Debug, Clone, Copy)]
struct OptionLine {
    scale: f64,
    format: DataFormat,
}

impl Default for OptionLine {
    // Touchstone default when the option line is absent: # GHZ S MA R 50
    fn default() -> Self {
        Self {
            scale: 1e9,
            format: DataFormat::MagnitudeAngle,
        }
    }
}

fn parse_option_line(text: &str, line: usize) -> Result<OptionLine> {
    let err = |message: String| Error::Parse { line, message };
    let tokens: Vec<String> = text
        .trim_start_matches('#')
        .split_whitespace()
        .map(|t| t.to_ascii_uppercase())
        .collect();
    let mut opt = OptionLine::default();
    let mut i = 0;
    while i < tokens.len() {
        match tokens[i].as_str() {
            "HZ" => opt.scale = 1.0,
            "KHZ" => opt.scale = 1e3,
            "MHZ" => opt.scale = 1e6,
            "GHZ" => opt.scale = 1e9,
            "S" => {}
            "Y" | "Z" | "H" | "G" => {
                return Err(err(format!(
                    "only S parameters are supported, got {}",
                    tokens[i]
                )))
            }
            "DB" => opt.format = DataFormat::Db,
            "MA" => opt.format = DataFormat::MagnitudeAngle,
            "RI" => opt.format = DataFormat::RealImaginary,
            "R" => {
                let r: f64 = tokens
                    .get(i + 1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err("R must be followed by a number".into()))?;
                if r != 50.0 {
                    return Err(err(format!("reference impedance must be 50 ohm, got {r}")));
                }
                i += 1;
            }
            other => return Err(err(format!("unknown option token {other:?}"))),
        }
        i += 1;
    }
    Ok(opt)
}

fn magnitude_db(format: DataFormat, a: f64, b: f64) -> f64 {
    match format {
        DataFormat::Db => a,
        DataFormat::MagnitudeAngle => 20.0 * a.abs().log10(),
        DataFormat::RealImaginary => 20.0 * a.hypot(b).log10(),
    }
}

/// Reads the S21 column of a two-port Touchstone v1 file.
///
/// Column order per record is `f S11 S21 S12 S22`, two numbers each.
pub fn parse_touchstone(text: &str) -> Result<TabulatedResponse> {
    let mut option: Option<OptionLine> = None;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('!').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('#') {
            if option.is_some() {
                return Err(Error::Parse {
                    line,
                    message: "duplicate option line".into(),
                });
            }
            if !points.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "option line after data".into(),
                });
            }
            option = Some(parse_option_line(content, line)?);
            continue;
        }
        let opt = *option.get_or_insert_with(OptionLine::default);
        let values: Vec<f64> = content
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line,
                message: format!("bad number: {e}"),
            })?;
        if values.len() != 9 {
            return Err(Error::Parse {
                line,
                message: format!(
                    "expected 9 columns for a 2-port record, got {}",
                    values.len()
                ),
            });
        }
        let f = values[0] * opt.scale;
        if let Some(&(prev, _)) = points.last() {
            if !(f > prev) {
                return Err(Error::Parse {
                    line,
                    message: format!("frequency {f} Hz is not above previous {prev} Hz"),
                });
            }
        }
        points.push((f, magnitude_db(opt.format, values[3], values[4])));
    }
    let n = points.len();
    TabulatedResponse::new(points, Extrapolation::HoldLast).map_err(|e| Error::Parse {
        line: n,
        message: e.to_string(),
    })
}

/// Writes a `# HZ S DB R 50` file. Reflection terms are not retained, so
/// S11/S22 are written as -200 dB; S12 mirrors S21.
pub fn write_touchstone(response: &TabulatedResponse) -> String {
    let mut out = String::new();
    out.push_str("! S21 magnitude only; reflection terms are placeholders\n");
    out.push_str("# HZ S DB R 50\n");
    for &(f, db) in response.points() {
        let db = if db.is_finite() { db } else { -400.0 };
        writeln!(out, "{f} -200 0 {db} 0 {db} 0 -200 0").expect("write to String");
    }
    out
}
