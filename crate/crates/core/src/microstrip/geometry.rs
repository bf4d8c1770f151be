use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest width or gap the board house can etch reliably.
pub const MIN_FEATURE_M: f64 = 0.2e-3;

// Inclusive bound with room for values parsed from millimetre tables.
const FEATURE_SLACK_M: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Substrate {
    pub eps_r: f64,
    #[serde(rename = "h_m")]
    pub height: f64,
    #[serde(default)]
    pub loss_tangent: f64,
    #[serde(default, rename = "t_m")]
    pub conductor_thickness: f64,
}

impl Substrate {
    pub fn new(eps_r: f64, height: f64) -> Result<Self> {
        let s = Self {
            eps_r,
            height,
            loss_tangent: 0.0,
            conductor_thickness: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    /// 1.6 mm FR4, lossless, 1 oz copper.
    pub fn fr4() -> Self {
        Self {
            eps_r: 4.35,
            height: 1.6e-3,
            loss_tangent: 0.0,
            conductor_thickness: 35e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_r >= 1.0 && self.eps_r.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "relative permittivity must be >= 1, got {}",
                self.eps_r
            )));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "substrate height must be positive, got {}",
                self.height
            )));
        }
        if !(self.loss_tangent >= 0.0) || !(self.conductor_thickness >= 0.0) {
            return Err(Error::InvalidArgument(
                "loss tangent and conductor thickness must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

impl Default for Substrate {
    fn default() -> Self {
        Self::fr4()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoupledSection {
    #[serde(rename = "w_m")]
    pub width: f64,
    #[serde(rename = "l_m")]
    pub length: f64,
    #[serde(rename = "s_m")]
    pub gap: f64,
}

/// Cascade of edge-coupled half-wave resonator sections, end to end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawParallel")]
pub struct ParallelCoupledGeometry {
    sections: Vec<CoupledSection>,
    substrate: Substrate,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParallel {
    sections: Vec<CoupledSection>,
    substrate: Substrate,
}

impl TryFrom<RawParallel> for ParallelCoupledGeometry {
    type Error = Error;
    fn try_from(raw: RawParallel) -> Result<Self> {
        Self::new(raw.sections, raw.substrate)
    }
}

impl ParallelCoupledGeometry {
    pub fn new(sections: Vec<CoupledSection>, substrate: Substrate) -> Result<Self> {
        substrate.validate()?;
        if sections.is_empty() {
            return Err(Error::InvalidArgument("geometry has no sections".into()));
        }
        for (i, s) in sections.iter().enumerate() {
            if ![s.width, s.length, s.gap]
                .iter()
                .all(|v| *v > 0.0 && v.is_finite())
            {
                return Err(Error::InvalidArgument(format!(
                    "section {} has a non-positive dimension: {s:?}",
                    i + 1
                )));
            }
        }
        let n = sections.len();
        for k in 0..n / 2 {
            if sections[k] != sections[n - 1 - k] {
                return Err(Error::InvalidArgument(format!(
                    "geometry is not symmetric: section {} differs from section {}",
                    k + 1,
                    n - k
                )));
            }
        }
        Ok(Self {
            sections,
            substrate,
        })
    }

    /// Builds a symmetric geometry from its first half (middle section
    /// included when the count is odd).
    pub fn mirrored(half: &[CoupledSection], total: usize, substrate: Substrate) -> Result<Self> {
        if half.len() != total.div_ceil(2) {
            return Err(Error::InvalidArgument(format!(
                "{} sections cannot mirror into {total}",
                half.len()
            )));
        }
        let sections = (0..total).map(|k| half[k.min(total - 1 - k)]).collect();
        Self::new(sections, substrate)
    }

    /// Published fifth-order 4.5–8 GHz design on 1.6 mm FR4.
    pub fn table_two() -> Self {
        let mm = 1e-3;
        let half = [
            CoupledSection {
                width: 1.321 * mm,
                length: 6.702 * mm,
                gap: 0.2 * mm,
            },
            CoupledSection {
                width: 1.359 * mm,
                length: 6.691 * mm,
                gap: 0.2 * mm,
            },
            CoupledSection {
                width: 1.667 * mm,
                length: 6.611 * mm,
                gap: 0.2 * mm,
            },
        ];
        Self::mirrored(&half, 6, Substrate::fr4()).expect("table geometry is valid")
    }

    pub fn sections(&self) -> &[CoupledSection] {
        &self.sections
    }

    pub fn substrate(&self) -> &Substrate {
        &self.substrate
    }

    /// Sections up to and including the middle one.
    pub fn unique_sections(&self) -> &[CoupledSection] {
        &self.sections[..self.sections.len().div_ceil(2)]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("geometry serializes")
    }
}

/// Tapped interdigital filter dimensions. Only validated, never analyzed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterdigitalGeometry {
    pub feed_width: f64,
    pub resonator_width: f64,
    pub resonator_length: f64,
    pub tap: f64,
    pub end_gap: f64,
    /// S1..S3 from the outer resonator inwards; mirrored on the other side.
    pub gaps: [f64; 3],
    pub board_thickness: f64,
}

impl InterdigitalGeometry {
    /// Published fifth-order stage-1 design.
    pub fn table_one() -> Self {
        let mm = 1e-3;
        Self {
            feed_width: 1.9 * mm,
            resonator_width: 2.995 * mm,
            resonator_length: 11.07 * mm,
            tap: 3.516 * mm,
            end_gap: 0.7986 * mm,
            gaps: [1.752 * mm, 3.019 * mm, 3.019 * mm],
            board_thickness: 1.6 * mm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("W0", self.feed_width),
            ("W", self.resonator_width),
            ("L", self.resonator_length),
            ("t", self.tap),
            ("e", self.end_gap),
            ("S1", self.gaps[0]),
            ("S2", self.gaps[1]),
            ("S3", self.gaps[2]),
            ("d", self.board_thickness),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.tap > self.resonator_length {
            return Err(Error::InvalidArgument(
                "tap point lies beyond the resonator".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub parameter: String,
    pub value_m: f64,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} = {:.4} mm is below the {:.1} mm feature floor",
            self.parameter,
            self.value_m * 1e3,
            MIN_FEATURE_M * 1e3
        )
    }
}

/// Geometries whose etched widths and gaps can be checked against the floor.
pub trait Manufacturable {
    /// Named widths and gaps.
    fn features(&self) -> Vec<(String, f64)>;
}

impl Manufacturable for ParallelCoupledGeometry {
    fn features(&self) -> Vec<(String, f64)> {
        let mut out = Vec::with_capacity(2 * self.sections.len());
        for (i, s) in self.sections.iter().enumerate() {
            out.push((format!("W{}", i + 1), s.width));
        }
        for (i, s) in self.sections.iter().enumerate() {
            out.push((format!("S{}", i + 1), s.gap));
        }
        out
    }
}

impl Manufacturable for InterdigitalGeometry {
    fn features(&self) -> Vec<(String, f64)> {
        vec![
            ("W0".into(), self.feed_width),
            ("W".into(), self.resonator_width),
            ("e".into(), self.end_gap),
            ("S1".into(), self.gaps[0]),
            ("S2".into(), self.gaps[1]),
            ("S3".into(), self.gaps[2]),
        ]
    }
}

/// Empty when every width and gap is at least [`MIN_FEATURE_M`].
pub fn manufacturability_check(geometry: &impl Manufacturable) -> Vec<Violation> {
    geometry
        .features()
        .into_iter()
        .filter(|(_, v)| *v < MIN_FEATURE_M - FEATURE_SLACK_M)
        .map(|(parameter, value_m)| Violation { parameter, value_m })
        .collect()
}
