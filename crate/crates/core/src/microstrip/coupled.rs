use super::{line_parameters, Substrate, C0, EPS0};

/// Even- and odd-mode parameters of a symmetric coupled microstrip pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledLineParameters {
    pub z0e: f64,
    pub z0o: f64,
    pub eps_eff_even: f64,
    pub eps_eff_odd: f64,
}

impl CoupledLineParameters {
    pub fn mean_eps_eff(&self) -> f64 {
        0.5 * (self.eps_eff_even + self.eps_eff_odd)
    }
}

/// Garg–Bahl static capacitance model of edge-coupled microstrip.
pub fn coupled_line_parameters(
    width: f64,
    gap: f64,
    substrate: &Substrate,
) -> CoupledLineParameters {
    let (ce, co) = mode_capacitances(width, gap, substrate);
    let air = Substrate {
        eps_r: 1.0,
        ..*substrate
    };
    let (ce_air, co_air) = mode_capacitances(width, gap, &air);
    CoupledLineParameters {
        z0e: 1.0 / (C0 * (ce * ce_air).sqrt()),
        z0o: 1.0 / (C0 * (co * co_air).sqrt()),
        eps_eff_even: ce / ce_air,
        eps_eff_odd: co / co_air,
    }
}

// Per-unit-length even and odd mode capacitances.
fn mode_capacitances(width: f64, gap: f64, substrate: &Substrate) -> (f64, f64) {
    let eps_r = substrate.eps_r;
    let u = width / substrate.height;
    let g = gap / substrate.height;
    let single = line_parameters(width, substrate);

    let c_plate = EPS0 * eps_r * u;
    let c_fringe = 0.5 * (single.eps_eff.sqrt() / (C0 * single.z0) - c_plate);
    let a = (-0.1 * (2.33 - 2.53 * u).exp()).exp();
    let c_fringe_inner =
        c_fringe / (1.0 + a / g * (8.0 * g).tanh()) * (eps_r / single.eps_eff).sqrt();

    let k = g / (g + 2.0 * u);
    let c_gap_air = EPS0 * elliptic_ratio(k);
    let c_gap_diel = EPS0 * eps_r / std::f64::consts::PI
        * (1.0 / (std::f64::consts::PI * g / 4.0).tanh()).ln()
        + 0.65 * c_fringe * (0.02 * eps_r.sqrt() / g + 1.0 - eps_r.powi(-2));

    let even = c_plate + c_fringe + c_fringe_inner;
    let odd = c_plate + c_fringe + c_gap_air + c_gap_diel;
    (even, odd)
}

// K(k')/K(k) via the Hilberg approximations.
fn elliptic_ratio(k: f64) -> f64 {
    let kp = (1.0 - k * k).sqrt();
    if k * k <= 0.5 {
        (2.0 * (1.0 + kp.sqrt()) / (1.0 - kp.sqrt())).ln() / std::f64::consts::PI
    } else {
        std::f64::consts::PI / (2.0 * (1.0 + k.sqrt()) / (1.0 - k.sqrt())).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_bracket_single_line() {
        let fr4 = Substrate::fr4();
        let w = 1.5e-3;
        let z_single = line_parameters(w, &fr4).z0;
        for gap in [0.1e-3, 0.2e-3, 0.5e-3, 1e-3, 3e-3] {
            let p = coupled_line_parameters(w, gap, &fr4);
            assert!(p.z0e > z_single && z_single > p.z0o, "gap {gap}: {p:?}");
            assert!(p.eps_eff_odd < p.eps_eff_even);
            assert!(p.eps_eff_odd >= 1.0 && p.eps_eff_even <= fr4.eps_r);
        }
    }

    #[test]
    fn coupling_weakens_with_gap() {
        let fr4 = Substrate::fr4();
        let k = |gap: f64| {
            let p = coupled_line_parameters(1.5e-3, gap, &fr4);
            (p.z0e - p.z0o) / (p.z0e + p.z0o)
        };
        let gaps = [0.1e-3, 0.2e-3, 0.5e-3, 1e-3, 2e-3, 3e-3];
        for w in gaps.windows(2) {
            assert!(k(w[1]) < k(w[0]));
        }
    }

    #[test]
    fn elliptic_ratio_branches_meet() {
        let k = 0.5f64.sqrt();
        let below = elliptic_ratio(k - 1e-12);
        let above = elliptic_ratio(k + 1e-12);
        assert!((below - above).abs() < 1e-4);
        // K(k')/K(k) = 1 at k = 1/sqrt(2)
        assert!((below - 1.0).abs() < 1e-4);
    }
}
