//! C ABI over the `upconv` library.
//!
//! Objects cross the boundary as opaque handles created by `*_new` /
//! `*_from_json` functions and released with the matching `*_free`.
//! Every fallible call returns an [`UpconvStatus`]; on failure a message is
//! available from [`upconv_last_error`] on the same thread until the next
//! failing call. Infinite results (an unbounded SFDR, perfect image
//! rejection) are returned as `INFINITY`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use upconv::chain::{iq_image_rejection, plan, ChainConfig, Plan, PlanConstraints, Sideband};
use upconv::microstrip::{line_parameters, Substrate};
use upconv::responses::{parse_touchstone, passband_metrics};
use upconv::spectra::{dbc_vs, sfdr, Spectrum, Tone};
use upconv::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpconvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    RangeViolation = 3,
    ToneNotFound = 4,
    NoPassband = 5,
    Parse = 6,
    Synthesis = 7,
    Planning = 8,
    InvalidChain = 9,
    Config = 10,
    Io = 11,
    /// A bug inside the library; the call had no effect.
    Panic = 12,
}

impl From<&Error> for UpconvStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) => UpconvStatus::InvalidArgument,
            Error::RangeViolation { .. } => UpconvStatus::RangeViolation,
            Error::ToneNotFound { .. } => UpconvStatus::ToneNotFound,
            Error::NoPassband(_) => UpconvStatus::NoPassband,
            Error::Parse { .. } => UpconvStatus::Parse,
            Error::Synthesis { .. } => UpconvStatus::Synthesis,
            Error::Planning(_) => UpconvStatus::Planning,
            Error::InvalidChain(_) => UpconvStatus::InvalidChain,
            Error::Config(_) => UpconvStatus::Config,
            Error::Io(_) => UpconvStatus::Io,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpconvSideband {
    Lower = 0,
    Upper = 1,
}

impl From<UpconvSideband> for Sideband {
    fn from(s: UpconvSideband) -> Self {
        match s {
            UpconvSideband::Lower => Sideband::Lower,
            UpconvSideband::Upper => Sideband::Upper,
        }
    }
}

impl From<Sideband> for UpconvSideband {
    fn from(s: Sideband) -> Self {
        match s {
            Sideband::Lower => UpconvSideband::Lower,
            Sideband::Upper => UpconvSideband::Upper,
        }
    }
}

/// Opaque spectrum handle.
pub struct UpconvSpectrum(Spectrum);

/// Opaque chain configuration handle.
pub struct UpconvChain(ChainConfig);

/// Closed frequency ranges are `[low, high]` pairs in hertz.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct UpconvPlanConstraints {
    pub if_range_hz: [f64; 2],
    pub stage1_passband_hz: [f64; 2],
    pub stage2_passband_hz: [f64; 2],
    pub mixer1_lo_range_hz: [f64; 2],
    pub mixer2_lo_range_hz: [f64; 2],
    pub stage1_sideband: UpconvSideband,
    pub stage2_sideband: UpconvSideband,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpconvPlan {
    pub f_if_hz: f64,
    pub f_lo1_hz: f64,
    pub f_lo2_hz: f64,
    pub stage1_hz: f64,
    pub output_hz: f64,
}

impl From<Plan> for UpconvPlan {
    fn from(p: Plan) -> Self {
        Self {
            f_if_hz: p.f_if_hz,
            f_lo1_hz: p.f_lo1_hz,
            f_lo2_hz: p.f_lo2_hz,
            stage1_hz: p.stage1_hz,
            output_hz: p.output_hz,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpconvPassbandMetrics {
    pub f_low_hz: f64,
    pub f_high_hz: f64,
    pub mean_il_db: f64,
    pub min_il_db: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> UpconvStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => UpconvStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("{what} is NULL"));
            UpconvStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            UpconvStatus::from(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            UpconvStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::InvalidArgument(format!("{what} is not UTF-8"))))
}

/// Message for the last failing call on this thread, or NULL. The pointer
/// stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn upconv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Empty spectrum; tones closer than `merge_tolerance_hz` are merged.
/// Returns NULL for a negative or non-finite tolerance.
#[no_mangle]
pub extern "C" fn upconv_spectrum_new(merge_tolerance_hz: f64) -> *mut UpconvSpectrum {
    if !(merge_tolerance_hz >= 0.0 && merge_tolerance_hz.is_finite()) {
        set_last_error(format!("invalid merge tolerance {merge_tolerance_hz}"));
        return std::ptr::null_mut();
    }
    Box::into_raw(Box::new(UpconvSpectrum(Spectrum::empty(
        merge_tolerance_hz,
    ))))
}

/// # Safety
/// `spectrum` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn upconv_spectrum_free(spectrum: *mut UpconvSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Adds a tone, summing power with any tone within the merge tolerance.
/// `label` may be NULL.
///
/// # Safety
/// `spectrum` must be a live handle; `label` NULL or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn upconv_spectrum_add_tone(
    spectrum: *mut UpconvSpectrum,
    frequency_hz: f64,
    power_dbm: f64,
    label: *const c_char,
) -> UpconvStatus {
    guard(|| {
        let s = deref_mut(spectrum, "spectrum")?;
        let label = if label.is_null() {
            ""
        } else {
            c_str(label, "label")?
        };
        let tone = Tone::new(frequency_hz, power_dbm, label)?;
        s.0 =
            s.0.combine(&Spectrum::new(vec![tone], s.0.merge_tolerance()));
        Ok(())
    })
}

/// Number of tones; 0 for NULL.
///
/// # Safety
/// `spectrum` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn upconv_spectrum_len(spectrum: *const UpconvSpectrum) -> usize {
    spectrum.as_ref().map_or(0, |s| s.0.len())
}

/// Tone `index` in ascending frequency order.
///
/// # Safety
/// `spectrum` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn upconv_spectrum_get_tone(
    spectrum: *const UpconvSpectrum,
    index: usize,
    frequency_hz: *mut f64,
    power_dbm: *mut f64,
) -> UpconvStatus {
    guard(|| {
        let s = deref(spectrum, "spectrum")?;
        let (f, p) = (
            deref_mut(frequency_hz, "frequency_hz")?,
            deref_mut(power_dbm, "power_dbm")?,
        );
        let tone = s.0.tones().get(index).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "tone index {index} out of range (len {})",
                s.0.len()
            ))
        })?;
        *f = tone.frequency();
        *p = tone.power();
        Ok(())
    })
}

/// Power of the tone within the merge tolerance of `frequency_hz`.
///
/// # Safety
/// `spectrum` must be a live handle; `power_dbm` writable.
#[no_mangle]
pub unsafe extern "C" fn upconv_spectrum_power_at(
    spectrum: *const UpconvSpectrum,
    frequency_hz: f64,
    power_dbm: *mut f64,
) -> UpconvStatus {
    guard(|| {
        let s = deref(spectrum, "spectrum")?;
        *deref_mut(power_dbm, "power_dbm")? = s.0.power_at(frequency_hz)?;
        Ok(())
    })
}

/// Power of `reference_hz` relative to `desired_hz`, in dBc.
///
/// # Safety
/// `spectrum` must be a live handle; `dbc` writable.
#[no_mangle]
pub unsafe extern "C" fn upconv_dbc(
    spectrum: *const UpconvSpectrum,
    desired_hz: f64,
    reference_hz: f64,
    dbc: *mut f64,
) -> UpconvStatus {
    guard(|| {
        let s = deref(spectrum, "spectrum")?;
        *deref_mut(dbc, "dbc")? = dbc_vs(&s.0, desired_hz, reference_hz)?;
        Ok(())
    })
}

/// Desired tone minus the strongest other tone in `[band_low_hz,
/// band_high_hz]`; `INFINITY` when there is none.
///
/// # Safety
/// `spectrum` must be a live handle; `sfdr_db` writable.
#[no_mangle]
pub unsafe extern "C" fn upconv_sfdr(
    spectrum: *const UpconvSpectrum,
    desired_hz: f64,
    band_low_hz: f64,
    band_high_hz: f64,
    sfdr_db: *mut f64,
) -> UpconvStatus {
    guard(|| {
        let s = deref(spectrum, "spectrum")?;
        *deref_mut(sfdr_db, "sfdr_db")? =
            sfdr(&s.0, desired_hz, (band_low_hz, band_high_hz))?.as_f64();
        Ok(())
    })
}

/// Parses a chain config (the CLI's JSON format). Relative Touchstone
/// paths resolve against the working directory.
///
/// # Safety
/// `json` must be a NUL-terminated string; `chain` writable.
#[no_mangle]
pub unsafe extern "C" fn upconv_chain_from_json(
    json: *const c_char,
    chain: *mut *mut UpconvChain,
) -> UpconvStatus {
    guard(|| {
        let out = deref_mut(chain, "chain")?;
        let cfg = ChainConfig::from_json_str(c_str(json, "json")?)?;
        *out = Box::into_raw(Box::new(UpconvChain(cfg)));
        Ok(())
    })
}

/// # Safety
/// `chain` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn upconv_chain_free(chain: *mut UpconvChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Re-plans LO2 for `target_hz` (LO1 and IF fixed) and stores the result
/// in the chain.
///
/// # Safety
/// `chain` must be a live handle; `plan` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn upconv_chain_retarget(
    chain: *mut UpconvChain,
    target_hz: f64,
    plan: *mut UpconvPlan,
) -> UpconvStatus {
    guard(|| {
        let c = deref_mut(chain, "chain")?;
        let (cfg, p) = c.0.retarget(target_hz)?;
        c.0 = cfg;
        if let Some(out) = plan.as_mut() {
            *out = p.into();
        }
        Ok(())
    })
}

/// Propagates the configured IF tone; `output` receives a new spectrum
/// handle for the chain output, owned by the caller.
///
/// # Safety
/// `chain` must be a live handle; `output` writable.
#[no_mangle]
pub unsafe extern "C" fn upconv_chain_propagate(
    chain: *const UpconvChain,
    output: *mut *mut UpconvSpectrum,
) -> UpconvStatus {
    guard(|| {
        let c = deref(chain, "chain")?;
        let out = deref_mut(output, "output")?;
        let last =
            c.0.simulate()?
                .pop()
                .ok_or_else(|| Error::InvalidChain("chain has no stages".into()))?;
        *out = Box::into_raw(Box::new(UpconvSpectrum(last)));
        Ok(())
    })
}

/// Both LOs for `target_hz`.
///
/// # Safety
/// `constraints` must be readable and `plan` writable.
#[no_mangle]
pub unsafe extern "C" fn upconv_plan(
    target_hz: f64,
    constraints: *const UpconvPlanConstraints,
    plan_out: *mut UpconvPlan,
) -> UpconvStatus {
    guard(|| {
        let c = deref(constraints, "constraints")?;
        let out = deref_mut(plan_out, "plan")?;
        let pair = |r: [f64; 2]| (r[0], r[1]);
        let constraints = PlanConstraints {
            if_range: pair(c.if_range_hz),
            stage1_passband: pair(c.stage1_passband_hz),
            stage2_passband: pair(c.stage2_passband_hz),
            mixer1_lo_range: pair(c.mixer1_lo_range_hz),
            mixer2_lo_range: pair(c.mixer2_lo_range_hz),
            stage1_sideband: c.stage1_sideband.into(),
            stage2_sideband: c.stage2_sideband.into(),
        };
        *out = plan(target_hz, &constraints)?.into();
        Ok(())
    })
}

/// Microstrip characteristic impedance and effective permittivity.
///
/// # Safety
/// `z0_ohm` and `eps_eff` must be writable.
#[no_mangle]
pub unsafe extern "C" fn upconv_line_parameters(
    width_m: f64,
    eps_r: f64,
    height_m: f64,
    z0_ohm: *mut f64,
    eps_eff: *mut f64,
) -> UpconvStatus {
    guard(|| {
        let (z, e) = (deref_mut(z0_ohm, "z0_ohm")?, deref_mut(eps_eff, "eps_eff")?);
        if !(width_m > 0.0 && width_m.is_finite()) {
            return Err(
                Error::InvalidArgument(format!("width must be positive, got {width_m}")).into(),
            );
        }
        let p = line_parameters(width_m, &Substrate::new(eps_r, height_m)?);
        *z = p.z0;
        *e = p.eps_eff;
        Ok(())
    })
}

/// Image rejection in dB of an IQ mixer with the given imbalance;
/// `INFINITY` for a perfectly balanced one.
#[no_mangle]
pub extern "C" fn upconv_iq_image_rejection(
    amplitude_imbalance_db: f64,
    phase_error_deg: f64,
) -> f64 {
    iq_image_rejection(amplitude_imbalance_db, phase_error_deg).as_f64()
}

/// Passband edges and insertion loss of the S21 in Touchstone text.
///
/// # Safety
/// `touchstone` must be a NUL-terminated string; `metrics` writable.
#[no_mangle]
pub unsafe extern "C" fn upconv_touchstone_metrics(
    touchstone: *const c_char,
    edge_drop_db: f64,
    metrics: *mut UpconvPassbandMetrics,
) -> UpconvStatus {
    guard(|| {
        let out = deref_mut(metrics, "metrics")?;
        let m = passband_metrics(
            &parse_touchstone(c_str(touchstone, "touchstone")?)?,
            edge_drop_db,
        )?;
        *out = UpconvPassbandMetrics {
            f_low_hz: m.f_low_edge,
            f_high_hz: m.f_high_edge,
            mean_il_db: m.mean_insertion_loss_db,
            min_il_db: m.min_insertion_loss_db,
        };
        Ok(())
    })
}
