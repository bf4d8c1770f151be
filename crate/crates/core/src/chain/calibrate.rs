//! One-time fit of the unpublished mixer and filter parameters to the
//! separations measured on the benchmark hardware.
//!
//! The results are frozen in [`CalibratedDefaults::FROZEN`]; rerun
//! [`calibrate`] (or `upconv calibrate`) after changing anything upstream.

use serde::Serialize;

use super::{
    sweep_dbc, ChainConfig, CouplingConfig, FilterConfig, LeakageSourceConfig, MixerSpec, SpurTable,
};
use crate::error::{Error, Result};
use crate::responses::{Family, PrototypeResponse};
use crate::spectra::sfdr;
use crate::units::Level;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibratedDefaults {
    /// Parasitic floor on the stage-1 filter's rejection.
    pub stage1_rejection_db: f64,
    /// Linear spur-table slope shared by both mixers.
    pub spur_slope_db: f64,
    pub mixer2_lo_isolation_db: f64,
    /// Gain of the LO2 path that bypasses filter 2.
    pub lo2_coupling_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationTargets {
    pub stage1_separation_db: f64,
    pub shielded_sfdr_db: f64,
    pub sfdr_margin_db: f64,
    pub median_dbc_db: f64,
}

impl Default for CalibrationTargets {
    fn default() -> Self {
        Self {
            stage1_separation_db: 42.0,
            shielded_sfdr_db: 70.0,
            sfdr_margin_db: 3.0,
            median_dbc_db: 35.0,
        }
    }
}

pub const IF_HZ: f64 = 450e6;
pub const IF_DBM: f64 = 10.0;
pub const LO1_HZ: f64 = 3.35e9;
pub const LO2_HZ: f64 = 7.926e9;
pub const LO_DBM: f64 = 10.0;
/// Desired outputs checked for the shielded build.
pub const SHIELDED_TARGETS_HZ: [f64; 2] = [5e9, 6e9];
pub const SFDR_BAND_HZ: (f64, f64) = (1e9, 9e9);
/// Coupling of the filter-1 output straight to the chain output.
pub const STAGE1_COUPLING_DB: f64 = -45.0;

impl CalibratedDefaults {
    /// Output of `calibrate(&CalibrationTargets::default())`.
    pub const FROZEN: CalibratedDefaults = CalibratedDefaults {
        stage1_rejection_db: 42.0,
        spur_slope_db: 30.0,
        mixer2_lo_isolation_db: 85.0,
        lo2_coupling_db: -62.0,
    };

    /// Mixer 1: 7 dB loss, 35 dB LO and 30 dB IF isolation, 1.6–6 GHz LO.
    pub fn mixer1(&self) -> MixerSpec {
        MixerSpec {
            conversion_loss_db: 7.0,
            lo_to_rf_isolation_db: 35.0,
            if_to_rf_isolation_db: 30.0,
            spur_table: SpurTable::linear(self.spur_slope_db),
            lo_range: (1.6e9, 6e9),
        }
    }

    /// Mixer 2: rated for 4–10 GHz LO.
    pub fn mixer2(&self) -> MixerSpec {
        MixerSpec {
            conversion_loss_db: 7.0,
            lo_to_rf_isolation_db: self.mixer2_lo_isolation_db,
            if_to_rf_isolation_db: 30.0,
            spur_table: SpurTable::linear(self.spur_slope_db),
            lo_range: (4e9, 10e9),
        }
    }

    /// Interdigital stage-1 filter as measured: 2.8–3.0 GHz, 8 dB loss.
    pub fn filter1(&self) -> PrototypeResponse {
        PrototypeResponse::butterworth_bandpass(5, 2.8e9, 3.0e9, 8.0)
            .and_then(|p| p.with_stopband_rejection(self.stage1_rejection_db))
            .expect("valid stage-1 filter")
    }

    /// Parallel-coupled stage-2 filter as measured: 4.5–7 GHz, 5 dB loss.
    pub fn filter2(&self) -> PrototypeResponse {
        PrototypeResponse::butterworth_bandpass(5, 4.5e9, 7.0e9, 5.0).expect("valid stage-2 filter")
    }

    /// Lowpass added after filter 1 in the shielded build.
    pub fn stopband_lowpass() -> PrototypeResponse {
        PrototypeResponse::new(
            Family::Butterworth,
            7,
            crate::responses::Band::Lowpass { cutoff_hz: 5e9 },
            None,
            1.0,
        )
        .expect("valid lowpass")
    }

    /// Paper benchmark: unshielded board with both leakage paths.
    pub fn benchmark_config(&self) -> ChainConfig {
        ChainConfig {
            if_hz: IF_HZ,
            if_dbm: IF_DBM,
            max_order: 3,
            mixers: vec![self.mixer1(), self.mixer2()],
            filters: vec![
                FilterConfig::from_prototype(1, &self.filter1()),
                FilterConfig::from_prototype(2, &self.filter2()),
            ],
            lo1_hz: LO1_HZ,
            lo1_dbm: LO_DBM,
            lo2_hz: LO2_HZ,
            lo2_dbm: LO_DBM,
            leakage: vec![
                CouplingConfig {
                    source: LeakageSourceConfig::StageOutput(1),
                    coupling_db: STAGE1_COUPLING_DB,
                },
                CouplingConfig {
                    source: LeakageSourceConfig::Lo(2),
                    coupling_db: self.lo2_coupling_db,
                },
            ],
            power_floor_dbm: crate::spectra::DEFAULT_POWER_FLOOR_DBM,
            merge_tolerance_hz: crate::spectra::DEFAULT_MERGE_TOLERANCE_HZ,
            stage1_sideband: Default::default(),
            stage2_sideband: Default::default(),
            base_dir: None,
        }
    }

    /// Shielded board: leakage paths cut and filter 1 doubled up with a
    /// 5 GHz lowpass behind it.
    pub fn shielded_config(&self) -> ChainConfig {
        let mut cfg = self.benchmark_config();
        for c in &mut cfg.leakage {
            c.coupling_db = f64::NEG_INFINITY;
        }
        cfg.filters = vec![
            FilterConfig::from_prototype(1, &self.filter1()),
            FilterConfig::from_prototype(1, &self.filter1()),
            FilterConfig::from_prototype(1, &Self::stopband_lowpass()),
            FilterConfig::from_prototype(2, &self.filter2()),
        ];
        cfg
    }
}

/// Desired stage-1 sideband minus its image, after filter 1.
pub fn stage1_separation_db(cfg: &ChainConfig) -> Result<f64> {
    let outputs = cfg.simulate()?;
    let after_filter = outputs
        .get(1)
        .ok_or_else(|| Error::InvalidChain("chain has no stage-1 filter".into()))?;
    let desired = after_filter.power_at(cfg.lo1_hz - cfg.if_hz)?;
    let image = after_filter.power_at(cfg.lo1_hz + cfg.if_hz)?;
    Ok(desired - image)
}

/// SFDR over `band` at the chain output with LO2 re-planned for `target_hz`.
pub fn output_sfdr(cfg: &ChainConfig, target_hz: f64, band: (f64, f64)) -> Result<Level> {
    let (cfg, plan) = cfg.retarget(target_hz)?;
    let outputs = cfg.simulate()?;
    let out = outputs
        .last()
        .ok_or_else(|| Error::InvalidChain("chain has no stages".into()))?;
    sfdr(out, plan.output_hz, band)
}

/// Every 50 MHz across the stage-2 passband, 4.5–7 GHz.
pub fn dbc_sweep_targets() -> Vec<f64> {
    (0..=50).map(|i| 4.5e9 + i as f64 * 50e6).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median of the finite dBc values of a sweep.
pub fn median_dbc(cfg: &ChainConfig, targets: &[f64]) -> Result<f64> {
    let values: Vec<f64> = sweep_dbc(cfg, targets)
        .into_iter()
        .filter_map(|p| p.result.ok().and_then(|(l, _)| l.finite()))
        .collect();
    if values.is_empty() {
        return Err(Error::Planning(
            "no sweep point produced a finite dBc".into(),
        ));
    }
    Ok(median(values))
}

fn shielded_ok(d: &CalibratedDefaults, required: f64) -> Result<bool> {
    let cfg = d.shielded_config();
    for t in SHIELDED_TARGETS_HZ {
        match output_sfdr(&cfg, t, SFDR_BAND_HZ)? {
            Level::Finite(v) if v < required => return Ok(false),
            _ => {}
        }
    }
    Ok(true)
}

fn bisect(mut lo: f64, mut hi: f64, mut above: impl FnMut(f64) -> Result<bool>) -> Result<f64> {
    // `above(x)` is false at lo, true at hi
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fits the four free parameters in order:
///
/// 1. stage-1 rejection floor so the stage-1 image sits at the target separation;
/// 2. smallest spur slope (5 dB steps) and then mixer-2 LO isolation (1 dB
///    steps) giving the shielded build its SFDR plus margin at 5 and 6 GHz;
/// 3. LO2 bypass coupling so the median leaky dBc across 4.5–7 GHz hits
///    the target.
pub fn calibrate(targets: &CalibrationTargets) -> Result<CalibratedDefaults> {
    let mut d = CalibratedDefaults {
        stage1_rejection_db: targets.stage1_separation_db,
        spur_slope_db: 10.0,
        mixer2_lo_isolation_db: f64::INFINITY,
        lo2_coupling_db: f64::NEG_INFINITY,
    };

    let r = bisect(
        targets.stage1_separation_db - 20.0,
        targets.stage1_separation_db + 40.0,
        |r| {
            let trial = CalibratedDefaults {
                stage1_rejection_db: r,
                ..d
            };
            Ok(stage1_separation_db(&trial.benchmark_config())? > targets.stage1_separation_db)
        },
    )?;
    d.stage1_rejection_db = (r * 100.0).round() / 100.0;

    let required = targets.shielded_sfdr_db + targets.sfdr_margin_db;
    while !shielded_ok(&d, required)? {
        d.spur_slope_db += 5.0;
        if d.spur_slope_db > 60.0 {
            return Err(Error::Planning(format!(
                "no spur slope up to 60 dB reaches {required} dB SFDR"
            )));
        }
    }
    d.mixer2_lo_isolation_db = 30.0;
    while !shielded_ok(&d, required)? {
        d.mixer2_lo_isolation_db += 1.0;
        if d.mixer2_lo_isolation_db > 150.0 {
            return Err(Error::Planning(format!(
                "no mixer-2 LO isolation up to 150 dB reaches {required} dB SFDR"
            )));
        }
    }

    let sweep = dbc_sweep_targets();
    let c = bisect(-120.0, -10.0, |c| {
        let trial = CalibratedDefaults {
            lo2_coupling_db: c,
            ..d
        };
        Ok(median_dbc(&trial.benchmark_config(), &sweep)? < targets.median_dbc_db)
    })?;
    d.lo2_coupling_db = (c * 10.0).round() / 10.0;
    Ok(d)
}
