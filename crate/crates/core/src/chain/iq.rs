use crate::error::{Error, Result};
use crate::units::Level;

/// Unwanted-sideband suppression of an IQ modulator with gain and phase
/// imbalance. Perfect balance is unbounded.
pub fn iq_image_rejection(amplitude_imbalance_db: f64, phase_error_deg: f64) -> Level {
    let g = 10f64.powf(amplitude_imbalance_db / 20.0);
    let c = phase_error_deg.to_radians().cos();
    let num = 1.0 + g * g + 2.0 * g * c;
    let den = 1.0 + g * g - 2.0 * g * c;
    if den <= 0.0 {
        return Level::Unbounded;
    }
    Level::Finite(10.0 * (num / den).log10())
}

/// Phase error (degrees, non-negative) that gives `rejection_db` at the
/// given amplitude imbalance; `None` when the imbalance alone already
/// limits rejection below the target.
pub fn iq_phase_for_rejection(
    rejection_db: f64,
    amplitude_imbalance_db: f64,
) -> Result<Option<f64>> {
    if !(rejection_db > 0.0 && rejection_db.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "rejection target must be a positive finite dB value, got {rejection_db}"
        )));
    }
    let r = 10f64.powf(rejection_db / 10.0);
    let g = 10f64.powf(amplitude_imbalance_db / 20.0);
    let c = (r - 1.0) * (1.0 + g * g) / (2.0 * g * (r + 1.0));
    if c > 1.0 {
        return Ok(None);
    }
    Ok(Some(c.acos().to_degrees()))
}
