use std::ops::Mul;

use num_complex::Complex64;

use super::{coupled_line_parameters, CoupledSection, ParallelCoupledGeometry, Substrate, C0};
use crate::error::{Error, Result};
use crate::responses::{Extrapolation, TabulatedResponse};

pub const SYSTEM_IMPEDANCE_OHMS: f64 = 50.0;

/// Transmission matrix of a two-port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abcd {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Abcd {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            a: one,
            b: zero,
            c: zero,
            d: one,
        }
    }

    pub fn s21(&self, z0: f64) -> Complex64 {
        2.0 / (self.a + self.b / z0 + self.c * z0 + self.d)
    }

    pub fn s21_db(&self, z0: f64) -> f64 {
        20.0 * self.s21(z0).norm().log10()
    }
}

impl Mul for Abcd {
    type Output = Abcd;
    fn mul(self, o: Abcd) -> Abcd {
        Abcd {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

/// Coupled-line bandpass section: input and output on diagonally opposite
/// ports, the other two ends open. Even and odd modes keep their own
/// electrical lengths.
pub fn section_abcd(section: &CoupledSection, substrate: &Substrate, f: f64) -> Abcd {
    let p = coupled_line_parameters(section.width, section.gap, substrate);
    let beta = |eps: f64| 2.0 * std::f64::consts::PI * f * eps.sqrt() / C0;
    let mut theta_e = beta(p.eps_eff_even) * section.length;
    let mut theta_o = beta(p.eps_eff_odd) * section.length;
    // Exact multiples of pi make Z13 singular; step off by a hair.
    if theta_e.sin().abs() < 1e-12 {
        theta_e += 1e-9;
    }
    if theta_o.sin().abs() < 1e-12 {
        theta_o += 1e-9;
    }
    let j = Complex64::new(0.0, 1.0);
    let z11 = -j * 0.5 * (p.z0e / theta_e.tan() + p.z0o / theta_o.tan());
    let z13 = -j * 0.5 * (p.z0e / theta_e.sin() - p.z0o / theta_o.sin());
    Abcd {
        a: z11 / z13,
        b: (z11 * z11 - z13 * z13) / z13,
        c: 1.0 / z13,
        d: z11 / z13,
    }
}

/// |S21| in dB of the whole cascade between 50 ohm terminations.
pub fn analyze_parallel_coupled(
    geometry: &ParallelCoupledGeometry,
    grid: &[f64],
) -> Result<TabulatedResponse> {
    if grid.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
        return Err(Error::InvalidArgument(
            "frequency grid must be positive".into(),
        ));
    }
    let points = grid
        .iter()
        .map(|&f| {
            let total = geometry.sections().iter().fold(Abcd::identity(), |acc, s| {
                acc * section_abcd(s, geometry.substrate(), f)
            });
            (f, total.s21_db(SYSTEM_IMPEDANCE_OHMS).min(0.0))
        })
        .collect();
    TabulatedResponse::new(points, Extrapolation::Floor)
}
