use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::Tone;

/// Spur suppression relative to the `(1, 1)` product, keyed by `(|m|, |n|)`.
///
/// Unlisted orders follow a linear rule: `slope·(m + n - 2)` for `n >= 1`
/// and `slope·(m - 1)` for LO harmonics (`n = 0`, relative to the leaked LO).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpurTable {
    pub slope_db: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<SpurOverride>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpurOverride {
    pub m: u32,
    pub n: u32,
    pub suppression_db: f64,
}

impl SpurTable {
    pub fn linear(slope_db: f64) -> Self {
        Self {
            slope_db,
            overrides: Vec::new(),
        }
    }

    /// Table with `(1, 1)` as the only product; everything else is removed.
    pub fn ideal() -> Self {
        Self::linear(f64::INFINITY)
    }

    pub fn with_override(mut self, m: u32, n: u32, suppression_db: f64) -> Result<Self> {
        self.overrides.retain(|o| (o.m, o.n) != (m, n));
        self.overrides.push(SpurOverride {
            m,
            n,
            suppression_db,
        });
        self.validate()?;
        Ok(self)
    }

    pub fn suppression(&self, m: u32, n: u32) -> f64 {
        if let Some(o) = self.overrides.iter().find(|o| (o.m, o.n) == (m, n)) {
            return o.suppression_db;
        }
        match (m, n) {
            (1, 1) | (1, 0) => 0.0,
            (_, 0) => self.slope_db * (m - 1) as f64,
            _ => self.slope_db * (m + n - 2) as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.slope_db >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "spur slope must be >= 0 dB, got {}",
                self.slope_db
            )));
        }
        for o in &self.overrides {
            if o.m == 0 {
                return Err(Error::InvalidArgument("spur order m must be >= 1".into()));
            }
            if (o.m, o.n) == (1, 1) && o.suppression_db != 0.0 {
                return Err(Error::InvalidArgument(
                    "the (1,1) product is the reference and must stay at 0 dB".into(),
                ));
            }
            if o.suppression_db.is_nan() {
                return Err(Error::InvalidArgument("spur suppression is NaN".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixerSpec {
    pub conversion_loss_db: f64,
    #[serde(with = "crate::chain::serde_db::infinite_as_null")]
    pub lo_to_rf_isolation_db: f64,
    #[serde(with = "crate::chain::serde_db::infinite_as_null")]
    pub if_to_rf_isolation_db: f64,
    pub spur_table: SpurTable,
    #[serde(rename = "lo_range_hz")]
    pub lo_range: (f64, f64),
}

impl MixerSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.conversion_loss_db >= 0.0 && self.conversion_loss_db.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "conversion loss must be a finite value >= 0, got {}",
                self.conversion_loss_db
            )));
        }
        if self.lo_to_rf_isolation_db.is_nan() || self.if_to_rf_isolation_db.is_nan() {
            return Err(Error::InvalidArgument("isolation is NaN".into()));
        }
        let (lo, hi) = self.lo_range;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "LO range must satisfy 0 < low < high, got [{lo}, {hi}]"
            )));
        }
        self.spur_table.validate()
    }

    /// The LO must sit inside the mixer's rated range (inclusive).
    pub fn check_lo(&self, lo: &Tone) -> Result<()> {
        let (low, high) = self.lo_range;
        let f = lo.frequency();
        if f < low || f > high {
            return Err(Error::RangeViolation {
                stage: lo.label().to_string(),
                freq_hz: f,
                low_hz: low,
                high_hz: high,
            });
        }
        Ok(())
    }

    /// No leakage, no feedthrough and no products other than `(1, 1)`.
    pub fn ideal(conversion_loss_db: f64, lo_range: (f64, f64)) -> Self {
        Self {
            conversion_loss_db,
            lo_to_rf_isolation_db: f64::INFINITY,
            if_to_rf_isolation_db: f64::INFINITY,
            spur_table: SpurTable::ideal(),
            lo_range,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_rule() {
        let t = SpurTable::linear(10.0);
        assert_eq!(t.suppression(1, 1), 0.0);
        assert_eq!(t.suppression(1, 2), 10.0);
        assert_eq!(t.suppression(3, 3), 40.0);
        assert_eq!(t.suppression(1, 0), 0.0);
        assert_eq!(t.suppression(3, 0), 20.0);
        let ideal = SpurTable::ideal();
        assert_eq!(ideal.suppression(1, 1), 0.0);
        assert_eq!(ideal.suppression(2, 1), f64::INFINITY);
    }

    #[test]
    fn overrides_win_but_reference_is_fixed() {
        let t = SpurTable::linear(10.0).with_override(2, 1, 3.0).unwrap();
        assert_eq!(t.suppression(2, 1), 3.0);
        assert!(SpurTable::linear(10.0).with_override(1, 1, 2.0).is_err());
    }

    #[test]
    fn lo_range_is_inclusive() {
        let m = MixerSpec::ideal(7.0, (4e9, 10e9));
        assert!(m.check_lo(&Tone::new(4e9, 0.0, "LO2").unwrap()).is_ok());
        match m.check_lo(&Tone::new(3e9, 0.0, "LO2").unwrap()) {
            Err(Error::RangeViolation { stage, .. }) => assert_eq!(stage, "LO2"),
            other => panic!("{other:?}"),
        }
    }
}
