use serde::{Deserialize, Serialize};

use super::{
    coupled_line_parameters, width_for_impedance, CoupledSection, ParallelCoupledGeometry,
    Substrate, C0,
};
use crate::error::{Error, Result};
use crate::responses::{prototype_g_values, Family};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoupledFilterSpec {
    pub family: Family,
    pub order: u32,
    #[serde(default)]
    pub ripple_db: Option<f64>,
    pub f_low_hz: f64,
    pub f_high_hz: f64,
    #[serde(default = "default_z0")]
    pub z0: f64,
}

fn default_z0() -> f64 {
    50.0
}

impl CoupledFilterSpec {
    pub fn butterworth(order: u32, f_low_hz: f64, f_high_hz: f64) -> Self {
        Self {
            family: Family::Butterworth,
            order,
            ripple_db: None,
            f_low_hz,
            f_high_hz,
            z0: 50.0,
        }
    }

    pub fn center_hz(&self) -> f64 {
        (self.f_low_hz * self.f_high_hz).sqrt()
    }

    pub fn fractional_bandwidth(&self) -> f64 {
        (self.f_high_hz - self.f_low_hz) / self.center_hz()
    }

    fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::InvalidArgument(
                "parallel-coupled synthesis needs order >= 2".into(),
            ));
        }
        if !(self.f_low_hz > 0.0 && self.f_low_hz < self.f_high_hz && self.f_high_hz.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "band edges must satisfy 0 < f_low < f_high, got {} / {}",
                self.f_low_hz, self.f_high_hz
            )));
        }
        if !(self.z0 > 0.0 && self.z0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "z0 must be positive, got {}",
                self.z0
            )));
        }
        Ok(())
    }
}

/// Normalized inverter and the even/odd impedances it asks for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionTarget {
    pub jz0: f64,
    pub z0e: f64,
    pub z0o: f64,
}

/// Admittance inverters `J(k,k+1)·Z0` for the `order + 1` coupled sections.
pub fn inverter_impedances(spec: &CoupledFilterSpec) -> Result<Vec<SectionTarget>> {
    spec.validate()?;
    let g = prototype_g_values(spec.family, spec.order, spec.ripple_db)?;
    let n = spec.order as usize;
    let delta = spec.fractional_bandwidth();
    let pi = std::f64::consts::PI;
    let out = (0..=n)
        .map(|k| {
            let jz0 = if k == 0 {
                (pi * delta / (2.0 * g[0])).sqrt()
            } else if k == n {
                (pi * delta / (2.0 * g[n - 1] * g[n])).sqrt()
            } else {
                pi * delta / (2.0 * (g[k - 1] * g[k]).sqrt())
            };
            SectionTarget {
                jz0,
                z0e: spec.z0 * (1.0 + jz0 + jz0 * jz0),
                z0o: spec.z0 * (1.0 - jz0 + jz0 * jz0),
            }
        })
        .collect();
    Ok(out)
}

/// J-inverter synthesis of an edge-coupled bandpass filter.
///
/// Each section's (Z0e, Z0o) pair is inverted to (width, gap) on the
/// coupled-line model and cut to a quarter guided wavelength at the
/// geometric band centre. Only the first half is solved; the rest is
/// mirrored so the result is exactly symmetric.
pub fn synthesize_parallel_coupled(
    spec: &CoupledFilterSpec,
    substrate: &Substrate,
) -> Result<ParallelCoupledGeometry> {
    substrate.validate()?;
    let targets = inverter_impedances(spec)?;
    let total = targets.len();
    let f0 = spec.center_hz();
    let half = targets[..total.div_ceil(2)]
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let (width, gap) = invert_coupled(t.z0e, t.z0o, substrate).ok_or(Error::Synthesis {
                section: i + 1,
                z0e: t.z0e,
                z0o: t.z0o,
            })?;
            let p = coupled_line_parameters(width, gap, substrate);
            let length = C0 / (4.0 * f0 * p.mean_eps_eff().sqrt());
            Ok(CoupledSection { width, length, gap })
        })
        .collect::<Result<Vec<_>>>()?;
    ParallelCoupledGeometry::mirrored(&half, total, *substrate)
}

const ACCEPT_TOL: f64 = 1e-4;
const W_BOUNDS: (f64, f64) = (1e-3, 30.0);
const S_BOUNDS: (f64, f64) = (1e-4, 30.0);
// The fallback stays where the model is monotone in both variables.
const BISECT_W: (f64, f64) = (1e-2, 10.0);
const BISECT_S: (f64, f64) = (5e-3, 10.0);

fn invert_coupled(z0e: f64, z0o: f64, substrate: &Substrate) -> Option<(f64, f64)> {
    if !(z0e > z0o && z0o > 0.0) {
        return None;
    }
    newton(z0e, z0o, substrate).or_else(|| nested_bisection(z0e, z0o, substrate))
}

fn residual(x: [f64; 2], z0e: f64, z0o: f64, substrate: &Substrate) -> [f64; 2] {
    let p = coupled_line_parameters(x[0].exp(), x[1].exp(), substrate);
    [(p.z0e / z0e).ln(), (p.z0o / z0o).ln()]
}

fn accepted(r: [f64; 2]) -> bool {
    r.iter().all(|v| v.exp_m1().abs() < ACCEPT_TOL)
}

// Damped Newton in (ln w, ln s) with a forward-difference Jacobian.
fn newton(z0e: f64, z0o: f64, substrate: &Substrate) -> Option<(f64, f64)> {
    let h = substrate.height;
    let lo = [(W_BOUNDS.0 * h).ln(), (S_BOUNDS.0 * h).ln()];
    let hi = [(W_BOUNDS.1 * h).ln(), (S_BOUNDS.1 * h).ln()];
    let clamp = |x: [f64; 2]| [x[0].clamp(lo[0], hi[0]), x[1].clamp(lo[1], hi[1])];
    let w0 = width_for_impedance((z0e * z0o).sqrt(), substrate).ok()?;
    let mut x = clamp([w0.ln(), (0.5 * h).ln()]);
    let mut r = residual(x, z0e, z0o, substrate);
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    for _ in 0..50 {
        if norm(r) < 1e-10 {
            break;
        }
        let eps = 1e-7;
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let mut xp = x;
            xp[j] += eps;
            let rp = residual(xp, z0e, z0o, substrate);
            jac[0][j] = (rp[0] - r[0]) / eps;
            jac[1][j] = (rp[1] - r[1]) / eps;
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-300 || !det.is_finite() {
            break;
        }
        let step = [
            (jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            (jac[0][0] * r[1] - jac[1][0] * r[0]) / det,
        ];
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-4 {
            let trial = clamp([x[0] - t * step[0], x[1] - t * step[1]]);
            let rt = residual(trial, z0e, z0o, substrate);
            if norm(rt) < norm(r) {
                x = trial;
                r = rt;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    accepted(r).then(|| (x[0].exp(), x[1].exp()))
}

// Outer bisection on gap for the impedance ratio, inner bisection on width
// for the geometric mean.
fn nested_bisection(z0e: f64, z0o: f64, substrate: &Substrate) -> Option<(f64, f64)> {
    let h = substrate.height;
    let mean = (z0e * z0o).sqrt();
    let ratio = (z0e / z0o).ln();
    let width_at = |ls: f64| -> Option<f64> {
        let s = ls.exp();
        let m = |lw: f64| {
            let p = coupled_line_parameters(lw.exp(), s, substrate);
            (p.z0e * p.z0o).sqrt().ln() - mean.ln()
        };
        let (mut a, mut b) = ((BISECT_W.0 * h).ln(), (BISECT_W.1 * h).ln());
        if !(m(a) >= 0.0 && m(b) <= 0.0) {
            return None;
        }
        for _ in 0..100 {
            let c = 0.5 * (a + b);
            if m(c) > 0.0 {
                a = c;
            } else {
                b = c;
            }
        }
        Some(0.5 * (a + b))
    };
    let g = |ls: f64| -> Option<f64> {
        let lw = width_at(ls)?;
        let p = coupled_line_parameters(lw.exp(), ls.exp(), substrate);
        Some((p.z0e / p.z0o).ln() - ratio)
    };
    let (mut a, mut b) = ((BISECT_S.0 * h).ln(), (BISECT_S.1 * h).ln());
    let (ga, gb) = (g(a)?, g(b)?);
    if !(ga >= 0.0 && gb <= 0.0) {
        return None;
    }
    for _ in 0..100 {
        let c = 0.5 * (a + b);
        if g(c)? > 0.0 {
            a = c;
        } else {
            b = c;
        }
    }
    let ls = 0.5 * (a + b);
    let lw = width_at(ls)?;
    accepted(residual([lw, ls], z0e, z0o, substrate)).then(|| (lw.exp(), ls.exp()))
}
