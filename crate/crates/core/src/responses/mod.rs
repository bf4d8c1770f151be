//! Filter transmission models.
//!
//! Analytic responses are the classic maximally-flat and equal-ripple
//! lowpass prototypes mapped onto the band with the usual
//! `w = (f/f0 - f0/f) / Δ` transformation. Measured data comes in as a
//! [`TabulatedResponse`], interpolated linearly in dB over linear frequency.

mod touchstone;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use touchstone::{parse_touchstone, write_touchstone};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Butterworth,
    Chebyshev,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Band {
    Bandpass { f_low_hz: f64, f_high_hz: f64 },
    Lowpass { cutoff_hz: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeResponse {
    family: Family,
    order: u32,
    band: Band,
    ripple_db: Option<f64>,
    insertion_loss_db: f64,
    stopband_rejection_db: Option<f64>,
}

impl PrototypeResponse {
    pub fn new(
        family: Family,
        order: u32,
        band: Band,
        ripple_db: Option<f64>,
        insertion_loss_db: f64,
    ) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidArgument("filter order must be >= 1".into()));
        }
        match (family, ripple_db) {
            (Family::Butterworth, Some(_)) => {
                return Err(Error::InvalidArgument(
                    "ripple is only defined for Chebyshev prototypes".into(),
                ))
            }
            (Family::Chebyshev, None) => {
                return Err(Error::InvalidArgument(
                    "Chebyshev prototype needs a ripple".into(),
                ))
            }
            (Family::Chebyshev, Some(r)) if !(r > 0.0 && r.is_finite()) => {
                return Err(Error::InvalidArgument(format!(
                    "ripple must be > 0 dB, got {r}"
                )))
            }
            _ => {}
        }
        match band {
            Band::Bandpass {
                f_low_hz,
                f_high_hz,
            } => {
                if !(f_low_hz > 0.0 && f_low_hz < f_high_hz && f_high_hz.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "bandpass edges must satisfy 0 < f_low < f_high, got {f_low_hz}, {f_high_hz}"
                    )));
                }
            }
            Band::Lowpass { cutoff_hz } => {
                if !(cutoff_hz > 0.0 && cutoff_hz.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "cutoff must be positive, got {cutoff_hz}"
                    )));
                }
            }
        }
        if !(insertion_loss_db >= 0.0 && insertion_loss_db.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "insertion loss must be >= 0 dB, got {insertion_loss_db}"
            )));
        }
        Ok(Self {
            family,
            order,
            band,
            ripple_db,
            insertion_loss_db,
            stopband_rejection_db: None,
        })
    }

    pub fn butterworth_bandpass(
        order: u32,
        f_low_hz: f64,
        f_high_hz: f64,
        il_db: f64,
    ) -> Result<Self> {
        Self::new(
            Family::Butterworth,
            order,
            Band::Bandpass {
                f_low_hz,
                f_high_hz,
            },
            None,
            il_db,
        )
    }

    pub fn chebyshev_bandpass(
        order: u32,
        ripple_db: f64,
        f_low_hz: f64,
        f_high_hz: f64,
        il_db: f64,
    ) -> Result<Self> {
        Self::new(
            Family::Chebyshev,
            order,
            Band::Bandpass {
                f_low_hz,
                f_high_hz,
            },
            Some(ripple_db),
            il_db,
        )
    }

    pub fn butterworth_lowpass(order: u32, cutoff_hz: f64, il_db: f64) -> Result<Self> {
        Self::new(
            Family::Butterworth,
            order,
            Band::Lowpass { cutoff_hz },
            None,
            il_db,
        )
    }

    /// Limits the achievable rejection to `rejection_db` below the passband,
    /// as a parasitic path in parallel with the ideal prototype would.
    pub fn with_stopband_rejection(mut self, rejection_db: f64) -> Result<Self> {
        if !(rejection_db > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "stopband rejection must be > 0 dB, got {rejection_db}"
            )));
        }
        self.stopband_rejection_db = Some(rejection_db).filter(|r| r.is_finite());
        Ok(self)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn band(&self) -> Band {
        self.band
    }

    pub fn ripple_db(&self) -> Option<f64> {
        self.ripple_db
    }

    pub fn insertion_loss_db(&self) -> f64 {
        self.insertion_loss_db
    }

    pub fn stopband_rejection_db(&self) -> Option<f64> {
        self.stopband_rejection_db
    }

    /// Geometric band centre (bandpass) or the cutoff (lowpass).
    pub fn center_hz(&self) -> f64 {
        match self.band {
            Band::Bandpass {
                f_low_hz,
                f_high_hz,
            } => (f_low_hz * f_high_hz).sqrt(),
            Band::Lowpass { cutoff_hz } => cutoff_hz,
        }
    }

    /// Lowpass-prototype frequency for `f`.
    pub fn normalized_frequency(&self, f: f64) -> f64 {
        match self.band {
            Band::Bandpass {
                f_low_hz,
                f_high_hz,
            } => {
                let f0 = (f_low_hz * f_high_hz).sqrt();
                let delta = (f_high_hz - f_low_hz) / f0;
                (f / f0 - f0 / f) / delta
            }
            Band::Lowpass { cutoff_hz } => f / cutoff_hz,
        }
    }

    /// Inverse of [`normalized_frequency`](Self::normalized_frequency) (positive branch).
    pub fn frequency_for(&self, w: f64) -> f64 {
        match self.band {
            Band::Bandpass {
                f_low_hz,
                f_high_hz,
            } => {
                let f0 = (f_low_hz * f_high_hz).sqrt();
                let x = w * (f_high_hz - f_low_hz) / f0;
                f0 * (x + (x * x + 4.0).sqrt()) / 2.0
            }
            Band::Lowpass { cutoff_hz } => w * cutoff_hz,
        }
    }

    pub fn s21_db(&self, f: f64) -> f64 {
        let w = self.normalized_frequency(f);
        let n = self.order as i32;
        // |H|^2 of the lossless prototype
        let h2 = match self.family {
            Family::Butterworth => 1.0 / (1.0 + w.abs().powi(2 * n)),
            Family::Chebyshev => {
                let ripple = self.ripple_db.expect("validated");
                let eps2 = 10f64.powf(ripple / 10.0) - 1.0;
                let t = chebyshev_t(self.order, w);
                1.0 / (1.0 + eps2 * t * t)
            }
        };
        let h2 = match self.stopband_rejection_db {
            Some(r) => {
                let leak = 10f64.powf(-r / 10.0);
                (h2 + leak) / (1.0 + leak)
            }
            None => h2,
        };
        -self.insertion_loss_db + 10.0 * h2.log10()
    }
}

/// Chebyshev polynomial of the first kind, valid for all real `w`.
fn chebyshev_t(n: u32, w: f64) -> f64 {
    let n = n as f64;
    let a = w.abs();
    if a <= 1.0 {
        (n * w.acos()).cos()
    } else {
        // only T^2 is used, the sign does not matter
        (n * a.acosh()).cosh()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extrapolation {
    /// Outside the table, use the nearest endpoint value.
    #[default]
    HoldLast,
    /// Outside the table, transmission is zero (-inf dB).
    Floor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedResponse {
    points: Vec<(f64, f64)>,
    extrapolation: Extrapolation,
}

impl TabulatedResponse {
    pub fn new(points: Vec<(f64, f64)>, extrapolation: Extrapolation) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(
                "tabulated response needs >= 2 points".into(),
            ));
        }
        for (i, w) in points.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidArgument(format!(
                    "frequencies must be strictly increasing (point {})",
                    i + 1
                )));
            }
        }
        if points.iter().any(|(f, db)| !f.is_finite() || db.is_nan()) {
            return Err(Error::InvalidArgument(
                "non-finite point in tabulated response".into(),
            ));
        }
        Ok(Self {
            points,
            extrapolation,
        })
    }

    /// Samples any response on `grid`.
    pub fn sample(
        response: &FilterResponse,
        grid: &[f64],
        extrapolation: Extrapolation,
    ) -> Result<Self> {
        Self::new(
            grid.iter().map(|&f| (f, response.s21_db(f))).collect(),
            extrapolation,
        )
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn extrapolation(&self) -> Extrapolation {
        self.extrapolation
    }

    pub fn s21_db(&self, f: f64) -> f64 {
        let pts = &self.points;
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if f < first.0 || f > last.0 {
            return match self.extrapolation {
                Extrapolation::HoldLast if f < first.0 => first.1,
                Extrapolation::HoldLast => last.1,
                Extrapolation::Floor => f64::NEG_INFINITY,
            };
        }
        let i = pts.partition_point(|p| p.0 <= f);
        if i >= pts.len() {
            return last.1;
        }
        let (f0, d0) = pts[i - 1];
        let (f1, d1) = pts[i];
        d0 + (d1 - d0) * (f - f0) / (f1 - f0)
    }
}

/// Anything a chain filter stage can hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type")]
pub enum FilterResponse {
    Prototype(PrototypeResponse),
    Tabulated(TabulatedResponse),
    /// Responses in series; dB values add.
    Cascade {
        stages: Vec<FilterResponse>,
    },
}

impl FilterResponse {
    pub fn s21_db(&self, f: f64) -> f64 {
        match self {
            FilterResponse::Prototype(p) => p.s21_db(f),
            FilterResponse::Tabulated(t) => t.s21_db(f),
            FilterResponse::Cascade { stages } => stages.iter().map(|s| s.s21_db(f)).sum(),
        }
    }
}

impl From<PrototypeResponse> for FilterResponse {
    fn from(p: PrototypeResponse) -> Self {
        FilterResponse::Prototype(p)
    }
}

impl From<TabulatedResponse> for FilterResponse {
    fn from(t: TabulatedResponse) -> Self {
        FilterResponse::Tabulated(t)
    }
}

/// Lowpass prototype element values `g1..gn` followed by the load `g(n+1)`.
pub fn prototype_g_values(family: Family, order: u32, ripple_db: Option<f64>) -> Result<Vec<f64>> {
    if order < 1 {
        return Err(Error::InvalidArgument("filter order must be >= 1".into()));
    }
    let n = order as usize;
    let nf = order as f64;
    let pi = std::f64::consts::PI;
    match (family, ripple_db) {
        (Family::Butterworth, Some(_)) => Err(Error::InvalidArgument(
            "ripple is only defined for Chebyshev prototypes".into(),
        )),
        (Family::Butterworth, None) => {
            let mut g: Vec<f64> = (1..=n)
                .map(|k| 2.0 * ((2 * k - 1) as f64 * pi / (2.0 * nf)).sin())
                .collect();
            g.push(1.0);
            Ok(g)
        }
        (Family::Chebyshev, None) => Err(Error::InvalidArgument(
            "Chebyshev prototype needs a ripple".into(),
        )),
        (Family::Chebyshev, Some(r)) if !(r > 0.0 && r.is_finite()) => Err(Error::InvalidArgument(
            format!("ripple must be > 0 dB, got {r}"),
        )),
        (Family::Chebyshev, Some(r)) => {
            let beta = (1.0 / (r / 17.37).tanh()).ln();
            let gamma = (beta / (2.0 * nf)).sinh();
            let a = |k: usize| ((2 * k - 1) as f64 * pi / (2.0 * nf)).sin();
            let b = |k: usize| gamma * gamma + (k as f64 * pi / nf).sin().powi(2);
            let mut g = Vec::with_capacity(n + 1);
            g.push(2.0 * a(1) / gamma);
            for k in 2..=n {
                let prev = g[k - 2];
                g.push(4.0 * a(k - 1) * a(k) / (b(k - 1) * prev));
            }
            g.push(if n % 2 == 1 {
                1.0
            } else {
                (1.0 / (beta / 4.0).tanh()).powi(2)
            });
            Ok(g)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PassbandMetrics {
    #[serde(rename = "f_low_hz")]
    pub f_low_edge: f64,
    #[serde(rename = "f_high_hz")]
    pub f_high_edge: f64,
    #[serde(rename = "mean_il_db")]
    pub mean_insertion_loss_db: f64,
    #[serde(rename = "min_il_db")]
    pub min_insertion_loss_db: f64,
}

impl PassbandMetrics {
    pub fn center_hz(&self) -> f64 {
        (self.f_low_edge * self.f_high_edge).sqrt()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }
}

/// Outermost crossings of `peak - edge_drop_db`, interpolated linearly,
/// and insertion loss statistics over the samples between them.
pub fn passband_metrics(
    response: &TabulatedResponse,
    edge_drop_db: f64,
) -> Result<PassbandMetrics> {
    let pts = response.points();
    let peak = pts
        .iter()
        .map(|p| p.1)
        .max_by(f64::total_cmp)
        .expect("at least two points");
    if !peak.is_finite() {
        return Err(Error::NoPassband("response has no finite maximum".into()));
    }
    let threshold = peak - edge_drop_db;
    let first = pts
        .iter()
        .position(|p| p.1 >= threshold)
        .expect("peak is above threshold");
    let last = pts
        .iter()
        .rposition(|p| p.1 >= threshold)
        .expect("peak is above threshold");
    if first == 0 {
        return Err(Error::NoPassband(format!(
            "response never drops {edge_drop_db} dB below its peak on the low side"
        )));
    }
    if last == pts.len() - 1 {
        return Err(Error::NoPassband(format!(
            "response never drops {edge_drop_db} dB below its peak on the high side"
        )));
    }
    let cross = |a: (f64, f64), b: (f64, f64)| -> f64 {
        if b.1 == a.1 || !a.1.is_finite() || !b.1.is_finite() {
            return if a.1 >= threshold { a.0 } else { b.0 };
        }
        a.0 + (threshold - a.1) / (b.1 - a.1) * (b.0 - a.0)
    };
    let f_low = cross(pts[first - 1], pts[first]);
    let f_high = cross(pts[last], pts[last + 1]);
    let inside = &pts[first..=last];
    let mean_il = -inside.iter().map(|p| p.1).sum::<f64>() / inside.len() as f64;
    Ok(PassbandMetrics {
        f_low_edge: f_low,
        f_high_edge: f_high,
        mean_insertion_loss_db: mean_il,
        min_insertion_loss_db: -peak,
    })
}

/// Uniform frequency grid from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return Vec::new();
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}
