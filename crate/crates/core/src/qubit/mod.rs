//! Two-level system driven by a chain spectrum, and the fits used to read
//! out Rabi, Ramsey and spectroscopy sweeps.
//!
//! Dynamics are Bloch equations in the frame rotating at the qubit
//! frequency with one rotating-wave term per tone. The ground state is
//! `z = -1`; the excited population is `(1 + z) / 2`.

mod fit;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::ChainConfig;
use crate::error::{Error, Result};
use crate::spectra::{Spectrum, Tone};
use crate::units::dbm_to_peak_volts;

pub use fit::{fit_decaying_cosine, fit_lorentzian, fit_sinusoid, FitResult};

/// Line impedance used to turn tone power into drive voltage.
pub const DRIVE_IMPEDANCE_OHMS: f64 = 50.0;

/// Tones whose Rabi rate is below this fraction of their detuning only
/// shift the qubit by `(Ω/δ)^2 / 4` and are left out of the integration.
pub const RELEVANCE_RATIO: f64 = 1e-3;

/// RK4 steps per radian of the fastest rotation.
pub const STEPS_PER_RADIAN: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitSpec {
    pub f_qubit_hz: f64,
    /// Energy relaxation time; `inf` for none.
    #[serde(with = "crate::chain::serde_db::infinite_as_null")]
    pub t1_s: f64,
    /// Dephasing time; `inf` for none.
    #[serde(with = "crate::chain::serde_db::infinite_as_null")]
    pub t2_star_s: f64,
    /// Rabi rate in rad/s per volt of peak drive.
    pub drive_coupling: f64,
}

impl QubitSpec {
    pub fn new(f_qubit_hz: f64, t1_s: f64, t2_star_s: f64, drive_coupling: f64) -> Result<Self> {
        let q = Self {
            f_qubit_hz,
            t1_s,
            t2_star_s,
            drive_coupling,
        };
        q.validate()?;
        Ok(q)
    }

    /// No relaxation or dephasing.
    pub fn lossless(f_qubit_hz: f64, drive_coupling: f64) -> Self {
        Self {
            f_qubit_hz,
            t1_s: f64::INFINITY,
            t2_star_s: f64::INFINITY,
            drive_coupling,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_qubit_hz > 0.0 && self.f_qubit_hz.is_finite()) {
            return Err(Error::InvalidArgument(
                "qubit frequency must be positive".into(),
            ));
        }
        if !(self.t1_s > 0.0 && self.t2_star_s > 0.0) {
            return Err(Error::InvalidArgument("T1 and T2* must be positive".into()));
        }
        if self.t2_star_s > 2.0 * self.t1_s {
            return Err(Error::InvalidArgument(format!(
                "T2* = {} s exceeds 2·T1 = {} s",
                self.t2_star_s,
                2.0 * self.t1_s
            )));
        }
        if !(self.drive_coupling >= 0.0 && self.drive_coupling.is_finite()) {
            return Err(Error::InvalidArgument("drive coupling must be >= 0".into()));
        }
        Ok(())
    }

    /// Rabi rate (rad/s) of a tone at `power_dbm` and `amplitude_scale`.
    pub fn rabi_rate(&self, power_dbm: f64, amplitude_scale: f64) -> f64 {
        self.drive_coupling * amplitude_scale * dbm_to_peak_volts(power_dbm, DRIVE_IMPEDANCE_OHMS)
    }
}

/// A resonant 10 dBm tone: 1 V peak, so the Rabi rate equals
/// `drive_coupling · amplitude_scale`.
pub fn resonant_drive(qubit: &QubitSpec) -> Spectrum {
    Spectrum::single(Tone::new(qubit.f_qubit_hz, 10.0, "drive").expect("valid drive tone"))
}

#[derive(Debug, Clone, Copy)]
struct DriveTerm {
    omega: f64,
    delta: f64,
}

fn drive_terms(qubit: &QubitSpec, spectrum: &Spectrum, amplitude_scale: f64) -> Vec<DriveTerm> {
    spectrum
        .tones()
        .iter()
        .map(|t| DriveTerm {
            omega: qubit.rabi_rate(t.power(), amplitude_scale),
            delta: 2.0 * std::f64::consts::PI * (t.frequency() - qubit.f_qubit_hz),
        })
        .filter(|d| d.omega > 0.0 && d.omega >= RELEVANCE_RATIO * d.delta.abs())
        .collect()
}

/// Excited-state population after driving the ground state with every tone
/// of `spectrum` for `duration_s`.
pub fn drive_response(
    qubit: &QubitSpec,
    spectrum: &Spectrum,
    duration_s: f64,
    amplitude_scale: f64,
) -> Result<f64> {
    drive_response_with_resolution(
        qubit,
        spectrum,
        duration_s,
        amplitude_scale,
        STEPS_PER_RADIAN,
    )
}

/// [`drive_response`] with an explicit RK4 resolution.
pub fn drive_response_with_resolution(
    qubit: &QubitSpec,
    spectrum: &Spectrum,
    duration_s: f64,
    amplitude_scale: f64,
    steps_per_radian: f64,
) -> Result<f64> {
    qubit.validate()?;
    if !(duration_s >= 0.0 && duration_s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "duration must be >= 0, got {duration_s}"
        )));
    }
    if !(amplitude_scale >= 0.0 && amplitude_scale.is_finite()) {
        return Err(Error::InvalidArgument(
            "amplitude scale must be >= 0".into(),
        ));
    }
    if !(steps_per_radian > 0.0) {
        return Err(Error::InvalidArgument(
            "steps_per_radian must be positive".into(),
        ));
    }
    let terms = drive_terms(qubit, spectrum, amplitude_scale);
    if terms.is_empty() || duration_s == 0.0 {
        return Ok(0.0);
    }
    let fastest = terms
        .iter()
        .map(|d| d.delta.abs().max(d.omega))
        .fold(0.0, f64::max)
        .max(terms.iter().map(|d| d.omega).sum::<f64>());
    let n_steps = (duration_s * fastest * steps_per_radian).ceil().max(1.0) as u64;
    let dt = duration_s / n_steps as f64;
    let z = integrate(qubit, &terms, n_steps, dt);
    Ok(((1.0 + z) / 2.0).clamp(0.0, 1.0))
}

fn integrate(qubit: &QubitSpec, terms: &[DriveTerm], n_steps: u64, dt: f64) -> f64 {
    let g2 = 1.0 / qubit.t2_star_s;
    let g1 = 1.0 / qubit.t1_s;
    let half: Vec<Complex64> = terms
        .iter()
        .map(|d| Complex64::from_polar(1.0, d.delta * dt / 2.0))
        .collect();
    let mut phasors = vec![Complex64::new(1.0, 0.0); terms.len()];
    let field = |ph: &[Complex64]| -> (f64, f64) {
        terms.iter().zip(ph).fold((0.0, 0.0), |(x, y), (d, p)| {
            (x + d.omega * p.re, y + d.omega * p.im)
        })
    };
    let deriv = |(wx, wy): (f64, f64), r: [f64; 3]| -> [f64; 3] {
        // dr/dt = w × r with w = (wx, wy, 0), plus damping
        [
            -wy * r[2] - g2 * r[0],
            wx * r[2] - g2 * r[1],
            wy * r[0] - wx * r[1] - g1 * (r[2] + 1.0),
        ]
    };
    let axpy =
        |r: [f64; 3], k: [f64; 3], h: f64| [r[0] + h * k[0], r[1] + h * k[1], r[2] + h * k[2]];
    let mut r = [0.0, 0.0, -1.0];
    let mut mid = phasors.clone();
    let mut end = phasors.clone();
    for step in 0..n_steps {
        for i in 0..terms.len() {
            mid[i] = phasors[i] * half[i];
            end[i] = mid[i] * half[i];
        }
        let w0 = field(&phasors);
        let wm = field(&mid);
        let w1 = field(&end);
        let k1 = deriv(w0, r);
        let k2 = deriv(wm, axpy(r, k1, dt / 2.0));
        let k3 = deriv(wm, axpy(r, k2, dt / 2.0));
        let k4 = deriv(w1, axpy(r, k3, dt));
        for j in 0..3 {
            r[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        std::mem::swap(&mut phasors, &mut end);
        if step % 1024 == 1023 {
            for p in &mut phasors {
                *p /= p.norm();
            }
        }
    }
    r[2]
}

/// Populations for each drive amplitude at fixed pulse length.
pub fn rabi_sweep(
    qubit: &QubitSpec,
    drive: &Spectrum,
    amplitudes: &[f64],
    duration_s: f64,
) -> Result<Vec<f64>> {
    if amplitudes.iter().any(|a| !(*a >= 0.0)) {
        return Err(Error::InvalidArgument("amplitudes must be >= 0".into()));
    }
    amplitudes
        .iter()
        .map(|&a| drive_response(qubit, drive, duration_s, a))
        .collect()
}

/// Ideal Ramsey fringe `(1 + e^{-t/T2*} cos(2π·detuning·t)) / 2`.
pub fn ramsey_sweep(qubit: &QubitSpec, detuning_hz: f64, waits_s: &[f64]) -> Result<Vec<f64>> {
    qubit.validate()?;
    if waits_s.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidArgument("waits must be >= 0".into()));
    }
    Ok(waits_s
        .iter()
        .map(|&t| {
            let envelope = (-t / qubit.t2_star_s).exp();
            0.5 * (1.0 + envelope * (2.0 * std::f64::consts::PI * detuning_hz * t).cos())
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectroscopyPoint {
    pub target_hz: f64,
    pub population: Result<f64>,
}

/// For each target: re-plan LO2, propagate the chain and drive the qubit
/// with the full output spectrum for `duration_s`.
pub fn spectroscopy_sweep(
    qubit: &QubitSpec,
    chain: &ChainConfig,
    targets: &[f64],
    duration_s: f64,
    amplitude_scale: f64,
) -> Vec<SpectroscopyPoint> {
    targets
        .iter()
        .map(|&target_hz| SpectroscopyPoint {
            target_hz,
            population: chain_output(chain, target_hz)
                .and_then(|out| drive_response(qubit, &out, duration_s, amplitude_scale)),
        })
        .collect()
}

/// Chain output with LO2 re-planned for `target_hz`.
pub fn chain_output(chain: &ChainConfig, target_hz: f64) -> Result<Spectrum> {
    let (cfg, _) = chain.retarget(target_hz)?;
    cfg.simulate()?
        .pop()
        .ok_or_else(|| Error::InvalidChain("chain has no stages".into()))
}
