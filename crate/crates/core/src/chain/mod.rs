//! The double-upconversion chain: stage composition, propagation, LO
//! planning, dBc sweeps, leakage and the IQ baseline.

mod calibrate;
mod config;
mod iq;
mod mixer;
mod plan;
pub(crate) mod serde_db;
mod sweep;

use crate::error::{Error, Result};
use crate::responses::FilterResponse;
use crate::spectra::{apply_response, mix, Spectrum, Tone, DEFAULT_POWER_FLOOR_DBM};

pub use calibrate::{
    calibrate, dbc_sweep_targets, median_dbc, output_sfdr, stage1_separation_db,
    CalibratedDefaults, CalibrationTargets, SFDR_BAND_HZ, SHIELDED_TARGETS_HZ,
};
pub use config::{ChainConfig, CouplingConfig, FilterConfig, LeakageSourceConfig};
pub use iq::{iq_image_rejection, iq_phase_for_rejection};
pub use mixer::{MixerSpec, SpurOverride, SpurTable};
pub use plan::{plan, plan_lo1, plan_lo2, Plan, PlanConstraints, Sideband};
pub use sweep::{dbc_at, sweep_dbc, SweepPoint};

/// Where a leakage path picks up its signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeakageSource {
    /// Spectrum after stage `i` (0-based).
    StageOutput(usize),
    /// The LO tone driving mixer stage `i`, at its source power.
    LocalOscillator(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub source: LeakageSource,
    /// Path gain in dB (negative); `-inf` disables the path.
    pub coupling_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stage {
    Mixer {
        spec: MixerSpec,
        lo: Tone,
    },
    Filter {
        response: FilterResponse,
    },
    Attenuator {
        db: f64,
    },
    /// Adds attenuated copies of earlier signals to the running spectrum.
    Leakage {
        couplings: Vec<Coupling>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    stages: Vec<Stage>,
    power_floor_dbm: f64,
}

impl Default for Chain {
    fn default() -> Self {
        Self {
            stages: Vec::new(),
            power_floor_dbm: DEFAULT_POWER_FLOOR_DBM,
        }
    }
}

impl Chain {
    pub fn new(stages: Vec<Stage>) -> Result<Self> {
        let chain = Self {
            stages,
            ..Self::default()
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn with_power_floor(mut self, floor_dbm: f64) -> Self {
        self.power_floor_dbm = floor_dbm;
        self
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn power_floor_dbm(&self) -> f64 {
        self.power_floor_dbm
    }

    /// Indices of the mixer stages, in signal order.
    pub fn mixer_indices(&self) -> Vec<usize> {
        self.stages
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, Stage::Mixer { .. }))
            .map(|(i, _)| i)
            .collect()
    }

    /// Copy with the LO of mixer stage `index` moved to `freq_hz`.
    pub fn with_lo_frequency(&self, index: usize, freq_hz: f64) -> Result<Chain> {
        let mut out = self.clone();
        match out.stages.get_mut(index) {
            Some(Stage::Mixer { spec, lo }) => {
                let moved = Tone::new(freq_hz, lo.power(), lo.label())?;
                spec.check_lo(&moved)?;
                *lo = moved;
                Ok(out)
            }
            _ => Err(Error::InvalidChain(format!("stage {index} is not a mixer"))),
        }
    }

    fn validate(&self) -> Result<()> {
        for (i, stage) in self.stages.iter().enumerate() {
            match stage {
                Stage::Mixer { spec, lo } => {
                    spec.validate()?;
                    spec.check_lo(lo)?;
                }
                Stage::Attenuator { db } if !db.is_finite() => {
                    return Err(Error::InvalidChain(format!(
                        "stage {i}: attenuation must be finite"
                    )))
                }
                Stage::Leakage { couplings } => {
                    for c in couplings {
                        let src = match c.source {
                            LeakageSource::StageOutput(s) | LeakageSource::LocalOscillator(s) => s,
                        };
                        if src >= i {
                            return Err(Error::InvalidChain(format!(
                                "stage {i}: leakage source {src} does not precede it"
                            )));
                        }
                        if let LeakageSource::LocalOscillator(s) = c.source {
                            if !matches!(self.stages[s], Stage::Mixer { .. }) {
                                return Err(Error::InvalidChain(format!(
                                    "stage {i}: leakage source {s} has no LO"
                                )));
                            }
                        }
                        if c.coupling_db.is_nan() || c.coupling_db == f64::INFINITY {
                            return Err(Error::InvalidChain(format!(
                                "stage {i}: coupling must be finite or -inf"
                            )));
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// `[Mixer1, Filter1, Mixer2, Filter2]`, plus a leakage stage when couplings
/// are given.
pub fn build_double_upconversion(
    mixer1: MixerSpec,
    mixer2: MixerSpec,
    filter1: FilterResponse,
    filter2: FilterResponse,
    lo1: Tone,
    lo2: Tone,
    leakage: Option<Vec<Coupling>>,
) -> Result<Chain> {
    let mut stages = vec![
        Stage::Mixer {
            spec: mixer1,
            lo: lo1,
        },
        Stage::Filter { response: filter1 },
        Stage::Mixer {
            spec: mixer2,
            lo: lo2,
        },
        Stage::Filter { response: filter2 },
    ];
    if let Some(couplings) = leakage {
        stages.push(Stage::Leakage { couplings });
    }
    Chain::new(stages)
}

/// Spectrum after each stage, pruned at the chain's power floor.
pub fn propagate(chain: &Chain, input: &Spectrum, max_order: u32) -> Result<Vec<Spectrum>> {
    if input.is_empty() {
        return Err(Error::InvalidArgument("input spectrum is empty".into()));
    }
    let floor = chain.power_floor_dbm;
    let mut outputs: Vec<Spectrum> = Vec::with_capacity(chain.stages.len());
    for (i, stage) in chain.stages.iter().enumerate() {
        let current = outputs.last().unwrap_or(input);
        let next = match stage {
            Stage::Mixer { spec, lo } => mix(current, lo, spec, max_order)?,
            Stage::Filter { response } => apply_response(current, response),
            Stage::Attenuator { db } => current.offset(-db),
            Stage::Leakage { couplings } => {
                let mut acc = current.clone();
                for c in couplings
                    .iter()
                    .filter(|c| c.coupling_db > f64::NEG_INFINITY)
                {
                    let leaked = match c.source {
                        LeakageSource::StageOutput(s) => outputs[s].offset(c.coupling_db),
                        LeakageSource::LocalOscillator(s) => match &chain.stages[s] {
                            Stage::Mixer { lo, .. } => {
                                Spectrum::new(vec![lo.clone()], current.merge_tolerance())
                                    .offset(c.coupling_db)
                            }
                            _ => {
                                return Err(Error::InvalidChain(format!(
                                    "stage {i}: leakage source {s} has no LO"
                                )))
                            }
                        },
                    };
                    acc = acc.combine(&leaked);
                }
                acc
            }
        };
        outputs.push(next.prune(floor));
    }
    Ok(outputs)
}

/// Final output of [`propagate`]; the input itself for an empty chain.
pub fn propagate_output(chain: &Chain, input: &Spectrum, max_order: u32) -> Result<Spectrum> {
    Ok(propagate(chain, input, max_order)?
        .pop()
        .unwrap_or_else(|| input.clone()))
}
