use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    build_double_upconversion, propagate, Chain, Coupling, LeakageSource, MixerSpec, Plan,
    PlanConstraints, Sideband,
};
use crate::error::{Error, Result};
use crate::responses::{
    parse_touchstone, passband_metrics, Band, Extrapolation, Family, FilterResponse,
    PrototypeResponse,
};
use crate::spectra::{Spectrum, Tone, DEFAULT_MERGE_TOLERANCE_HZ, DEFAULT_POWER_FLOOR_DBM};

/// JSON description of a double-upconversion run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub if_hz: f64,
    pub if_dbm: f64,
    #[serde(default = "default_max_order")]
    pub max_order: u32,
    pub mixers: Vec<MixerSpec>,
    pub filters: Vec<FilterConfig>,
    pub lo1_hz: f64,
    pub lo1_dbm: f64,
    pub lo2_hz: f64,
    pub lo2_dbm: f64,
    #[serde(default)]
    pub leakage: Vec<CouplingConfig>,
    #[serde(default = "default_floor")]
    pub power_floor_dbm: f64,
    #[serde(default = "default_tolerance")]
    pub merge_tolerance_hz: f64,
    #[serde(default)]
    pub stage1_sideband: Sideband,
    #[serde(default)]
    pub stage2_sideband: Sideband,
    /// Directory that relative Touchstone paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_max_order() -> u32 {
    3
}

fn default_floor() -> f64 {
    DEFAULT_POWER_FLOOR_DBM
}

fn default_tolerance() -> f64 {
    DEFAULT_MERGE_TOLERANCE_HZ
}

/// One filter element. Several entries for the same stage are cascaded in
/// the order given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum FilterConfig {
    Prototype {
        stage: u8,
        family: Family,
        order: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f_low_hz: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f_high_hz: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff_hz: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ripple_db: Option<f64>,
        #[serde(default)]
        insertion_loss_db: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stopband_rejection_db: Option<f64>,
    },
    Touchstone {
        stage: u8,
        path: PathBuf,
        #[serde(default)]
        extrapolation: Extrapolation,
    },
}

impl FilterConfig {
    pub fn stage(&self) -> u8 {
        match self {
            FilterConfig::Prototype { stage, .. } | FilterConfig::Touchstone { stage, .. } => {
                *stage
            }
        }
    }

    pub fn from_prototype(stage: u8, p: &PrototypeResponse) -> Self {
        let (f_low_hz, f_high_hz, cutoff_hz) = match p.band() {
            Band::Bandpass {
                f_low_hz,
                f_high_hz,
            } => (Some(f_low_hz), Some(f_high_hz), None),
            Band::Lowpass { cutoff_hz } => (None, None, Some(cutoff_hz)),
        };
        FilterConfig::Prototype {
            stage,
            family: p.family(),
            order: p.order(),
            f_low_hz,
            f_high_hz,
            cutoff_hz,
            ripple_db: p.ripple_db(),
            insertion_loss_db: p.insertion_loss_db(),
            stopband_rejection_db: p.stopband_rejection_db(),
        }
    }

    fn response(&self, base_dir: Option<&Path>) -> Result<FilterResponse> {
        match self {
            FilterConfig::Prototype {
                family,
                order,
                f_low_hz,
                f_high_hz,
                cutoff_hz,
                ripple_db,
                insertion_loss_db,
                stopband_rejection_db,
                ..
            } => {
                let band =
                    match (f_low_hz, f_high_hz, cutoff_hz) {
                        (Some(f_low_hz), Some(f_high_hz), None) => Band::Bandpass {
                            f_low_hz: *f_low_hz,
                            f_high_hz: *f_high_hz,
                        },
                        (None, None, Some(cutoff_hz)) => Band::Lowpass {
                            cutoff_hz: *cutoff_hz,
                        },
                        _ => return Err(Error::Config(
                            "prototype filter needs either f_low_hz and f_high_hz, or cutoff_hz"
                                .into(),
                        )),
                    };
                let mut p =
                    PrototypeResponse::new(*family, *order, band, *ripple_db, *insertion_loss_db)?;
                if let Some(r) = stopband_rejection_db {
                    p = p.with_stopband_rejection(*r)?;
                }
                Ok(p.into())
            }
            FilterConfig::Touchstone {
                path,
                extrapolation,
                ..
            } => {
                let full = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| Error::Io(format!("{}: {e}", full.display())))?;
                let t = parse_touchstone(&text)?;
                let t =
                    crate::responses::TabulatedResponse::new(t.points().to_vec(), *extrapolation)?;
                Ok(t.into())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LeakageSourceConfig {
    /// Output of chain stage `i` (0-based: mixer 1, filter 1, mixer 2, filter 2).
    StageOutput(usize),
    /// LO of mixer stage `i` (0 or 2).
    Lo(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub source: LeakageSourceConfig,
    /// `null` disables the path.
    #[serde(with = "crate::chain::serde_db::neg_infinite_as_null")]
    pub coupling_db: f64,
}

impl From<CouplingConfig> for Coupling {
    fn from(c: CouplingConfig) -> Self {
        Coupling {
            source: match c.source {
                LeakageSourceConfig::StageOutput(i) => LeakageSource::StageOutput(i),
                LeakageSourceConfig::Lo(i) => LeakageSource::LocalOscillator(i),
            },
            coupling_db: c.coupling_db,
        }
    }
}

impl ChainConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ChainConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.mixers.len() != 2 {
            return Err(Error::Config(format!(
                "expected exactly 2 mixers, got {}",
                self.mixers.len()
            )));
        }
        for f in &self.filters {
            if !(1..=2).contains(&f.stage()) {
                return Err(Error::Config(format!(
                    "filter stage must be 1 or 2, got {}",
                    f.stage()
                )));
            }
        }
        for stage in 1..=2 {
            if !self.filters.iter().any(|f| f.stage() == stage) {
                return Err(Error::Config(format!("no filter given for stage {stage}")));
            }
        }
        if self.max_order < 1 {
            return Err(Error::Config("max_order must be at least 1".into()));
        }
        if !(self.merge_tolerance_hz >= 0.0) {
            return Err(Error::Config("merge_tolerance_hz must be >= 0".into()));
        }
        Ok(())
    }

    /// Stage filter; multiple entries become a cascade.
    pub fn stage_response(&self, stage: u8) -> Result<FilterResponse> {
        let mut parts = self
            .filters
            .iter()
            .filter(|f| f.stage() == stage)
            .map(|f| f.response(self.base_dir.as_deref()))
            .collect::<Result<Vec<_>>>()?;
        match parts.len() {
            0 => Err(Error::Config(format!("no filter given for stage {stage}"))),
            1 => Ok(parts.remove(0)),
            _ => Ok(FilterResponse::Cascade { stages: parts }),
        }
    }

    pub fn lo1(&self) -> Result<Tone> {
        Tone::new(self.lo1_hz, self.lo1_dbm, "LO1")
    }

    pub fn lo2(&self) -> Result<Tone> {
        Tone::new(self.lo2_hz, self.lo2_dbm, "LO2")
    }

    pub fn input_spectrum(&self) -> Result<Spectrum> {
        let tone = Tone::new(self.if_hz, self.if_dbm, "IF")?;
        Ok(Spectrum::new(vec![tone], self.merge_tolerance_hz))
    }

    pub fn build(&self) -> Result<Chain> {
        self.validate()?;
        let leakage = (!self.leakage.is_empty())
            .then(|| self.leakage.iter().map(|&c| Coupling::from(c)).collect());
        Ok(build_double_upconversion(
            self.mixers[0].clone(),
            self.mixers[1].clone(),
            self.stage_response(1)?,
            self.stage_response(2)?,
            self.lo1()?,
            self.lo2()?,
            leakage,
        )?
        .with_power_floor(self.power_floor_dbm))
    }

    /// Spectrum after every stage for the configured IF tone.
    pub fn simulate(&self) -> Result<Vec<Spectrum>> {
        propagate(&self.build()?, &self.input_spectrum()?, self.max_order)
    }

    /// Planning constraints implied by the configured hardware. The IF range
    /// is the single configured IF.
    pub fn constraints(&self) -> Result<PlanConstraints> {
        self.validate()?;
        Ok(PlanConstraints {
            if_range: (self.if_hz, self.if_hz),
            stage1_passband: passband(&self.stage_response(1)?)?,
            stage2_passband: passband(&self.stage_response(2)?)?,
            mixer1_lo_range: self.mixers[0].lo_range,
            mixer2_lo_range: self.mixers[1].lo_range,
            stage1_sideband: self.stage1_sideband,
            stage2_sideband: self.stage2_sideband,
        })
    }

    /// Copy with LO2 re-planned for `target_hz`; LO1 and the IF stay put.
    pub fn retarget(&self, target_hz: f64) -> Result<(ChainConfig, Plan)> {
        let plan = super::plan_lo2(target_hz, self.if_hz, self.lo1_hz, &self.constraints()?)?;
        let mut cfg = self.clone();
        cfg.lo2_hz = plan.f_lo2_hz;
        Ok((cfg, plan))
    }

    /// Copy with every leakage path removed.
    pub fn without_leakage(&self) -> ChainConfig {
        ChainConfig {
            leakage: Vec::new(),
            ..self.clone()
        }
    }
}

/// Band edges of a stage: the overlap of its bandpass prototypes, or the
/// 3 dB edges of tabulated data.
fn passband(response: &FilterResponse) -> Result<(f64, f64)> {
    fn collect(r: &FilterResponse, out: &mut Vec<(f64, f64)>) -> Result<()> {
        match r {
            FilterResponse::Prototype(p) => {
                if let Band::Bandpass {
                    f_low_hz,
                    f_high_hz,
                } = p.band()
                {
                    out.push((f_low_hz, f_high_hz));
                }
            }
            FilterResponse::Tabulated(t) => {
                let m = passband_metrics(t, 3.0)?;
                out.push((m.f_low_edge, m.f_high_edge));
            }
            FilterResponse::Cascade { stages } => {
                for s in stages {
                    collect(s, out)?;
                }
            }
        }
        Ok(())
    }
    let mut bands = Vec::new();
    collect(response, &mut bands)?;
    let lo = bands.iter().map(|b| b.0).fold(f64::NEG_INFINITY, f64::max);
    let hi = bands.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
    if bands.is_empty() || !(lo < hi) {
        return Err(Error::NoPassband(
            "stage filter has no bandpass element".into(),
        ));
    }
    Ok((lo, hi))
}
