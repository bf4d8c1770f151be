use super::ChainConfig;
use crate::error::{Error, Result};
use crate::spectra::{dbc_vs, Spectrum};
use crate::units::Level;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub target_hz: f64,
    /// `(dBc magnitude, LO2)` or the per-target error.
    pub result: Result<(Level, f64)>,
}

/// Suppression of the LO2 tone relative to the desired output, as a
/// positive number; unbounded when no LO2 tone survives.
pub fn dbc_at(output: &Spectrum, desired_hz: f64, lo2_hz: f64) -> Result<Level> {
    if output.find(lo2_hz).is_none() {
        output.power_at(desired_hz)?;
        return Ok(Level::Unbounded);
    }
    Ok(Level::Finite(dbc_vs(output, desired_hz, lo2_hz)?.abs()))
}

/// Re-plans LO2 for every target and records the output dBc. Failures are
/// kept per point.
pub fn sweep_dbc(template: &ChainConfig, targets: &[f64]) -> Vec<SweepPoint> {
    targets
        .iter()
        .map(|&target_hz| SweepPoint {
            target_hz,
            result: point(template, target_hz),
        })
        .collect()
}

fn point(template: &ChainConfig, target_hz: f64) -> Result<(Level, f64)> {
    let (cfg, plan) = template.retarget(target_hz)?;
    let outputs = cfg.simulate()?;
    let out = outputs
        .last()
        .ok_or_else(|| Error::InvalidChain("chain has no stages".into()))?;
    Ok((dbc_at(out, plan.output_hz, plan.f_lo2_hz)?, plan.f_lo2_hz))
}
