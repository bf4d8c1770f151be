use serde::Serialize;

use super::{Substrate, ETA0};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineParameters {
    pub z0: f64,
    pub eps_eff: f64,
}

/// Hammerstad–Jensen quasi-static model (zero strip thickness, no dispersion).
///
/// The single-expression form is used, so there is no branch switch at
/// `w/h = 1` and both outputs are smooth in width.
pub fn line_parameters(width: f64, substrate: &Substrate) -> LineParameters {
    let u = width / substrate.height;
    let er = substrate.eps_r;
    let a = 1.0
        + ((u.powi(4) + (u / 52.0).powi(2)) / (u.powi(4) + 0.432)).ln() / 49.0
        + (1.0 + (u / 18.1).powi(3)).ln() / 18.7;
    let b = 0.564 * ((er - 0.9) / (er + 3.0)).powf(0.053);
    let eps_eff = (er + 1.0) / 2.0 + (er - 1.0) / 2.0 * (1.0 + 10.0 / u).powf(-a * b);
    let f = 6.0 + (2.0 * std::f64::consts::PI - 6.0) * (-(30.666 / u).powf(0.7528)).exp();
    let z_air =
        ETA0 / (2.0 * std::f64::consts::PI) * (f / u + (1.0 + (2.0 / u).powi(2)).sqrt()).ln();
    LineParameters {
        z0: z_air / eps_eff.sqrt(),
        eps_eff,
    }
}

/// Width giving characteristic impedance `z0` (bisection in log-width).
pub fn width_for_impedance(z0: f64, substrate: &Substrate) -> Result<f64> {
    let h = substrate.height;
    let (mut lo, mut hi) = ((1e-4 * h).ln(), (100.0 * h).ln());
    let z = |lw: f64| line_parameters(lw.exp(), substrate).z0;
    if !(z(hi) <= z0 && z0 <= z(lo)) {
        return Err(Error::InvalidArgument(format!(
            "{z0} ohm is not realizable on this substrate"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if z(mid) > z0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn air_substrate_has_unit_eps_eff() {
        let air = Substrate::new(1.0, 1.6e-3).unwrap();
        for w in [1e-5, 1e-4, 1.9e-3, 1e-2, 0.1] {
            assert!((line_parameters(w, &air).eps_eff - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn width_inversion() {
        let fr4 = Substrate::fr4();
        let w = width_for_impedance(50.0, &fr4).unwrap();
        assert!((line_parameters(w, &fr4).z0 - 50.0).abs() < 1e-9);
        // 50 ohm on 1.6 mm FR4 sits near w/h = 1.9
        assert!((w / fr4.height - 1.9).abs() < 0.05, "w = {w}");
        assert!(width_for_impedance(5000.0, &fr4).is_err());
    }
}
