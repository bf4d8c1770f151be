//! Damped Gauss–Newton (Levenberg–Marquardt) fits with analytic Jacobians.
//!
//! Data are shifted and scaled to unit range before fitting and parameters
//! are mapped back afterwards, so the same tolerances work for nanosecond
//! and gigahertz axes alike.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub parameters: BTreeMap<String, f64>,
    /// RMS residual in the units of `y`.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    /// Named parameter; panics on a name the model does not have.
    pub fn get(&self, name: &str) -> f64 {
        self.parameters[name]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit result serializes")
    }
}

struct Normalized {
    u: Vec<f64>,
    v: Vec<f64>,
    x0: f64,
    xs: f64,
    y0: f64,
    ys: f64,
}

fn normalize(x: &[f64], y: &[f64], n_params: usize) -> Result<Normalized> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("x and y lengths differ".into()));
    }
    if x.len() < 2 * n_params {
        return Err(Error::InvalidArgument(format!(
            "need at least {} points for {n_params} parameters, got {}",
            2 * n_params,
            x.len()
        )));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "x must be strictly increasing".into(),
        ));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "data contain non-finite values".into(),
        ));
    }
    let x0 = x[0];
    let xs = x[x.len() - 1] - x0;
    let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);
    let ymax = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ys = if ymax > ymin { ymax - ymin } else { 1.0 };
    Ok(Normalized {
        u: x.iter().map(|v| (v - x0) / xs).collect(),
        v: y.iter().map(|v| (v - ymin) / ys).collect(),
        x0,
        xs,
        y0: ymin,
        ys,
    })
}

struct Outcome {
    p: Vec<f64>,
    rms: f64,
    converged: bool,
    iterations: usize,
}

// `model(p, u)` returns the value and the gradient in `p`.
fn levenberg_marquardt(
    u: &[f64],
    v: &[f64],
    p0: Vec<f64>,
    model: impl Fn(&[f64], f64) -> (f64, Vec<f64>),
) -> Outcome {
    let n = u.len();
    let k = p0.len();
    let cost_of = |p: &[f64]| -> f64 {
        u.iter()
            .zip(v)
            .map(|(&ui, &vi)| (model(p, ui).0 - vi).powi(2))
            .sum()
    };
    let mut p = p0;
    let mut cost = cost_of(&p);
    let initial = cost;
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jac = DMatrix::<f64>::zeros(n, k);
        let mut res = DVector::<f64>::zeros(n);
        for (i, (&ui, &vi)) in u.iter().zip(v).enumerate() {
            let (f, g) = model(&p, ui);
            res[i] = vi - f;
            for j in 0..k {
                jac[(i, j)] = g[j];
            }
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &res;
        if jtr.amax() <= 1e-15 * (1.0 + cost.sqrt()) || cost <= 1e-30 {
            converged = true;
            break;
        }
        let mut accepted = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for j in 0..k {
                a[(j, j)] += lambda * jtj[(j, j)].max(1e-12);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let trial_cost = cost_of(&trial);
            if trial_cost.is_finite() && trial_cost <= cost {
                let small_step = step
                    .iter()
                    .zip(&p)
                    .all(|(s, pj)| s.abs() <= 1e-13 * (pj.abs() + 1e-10));
                let small_gain = cost - trial_cost <= 1e-16 * cost;
                p = trial;
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                if small_step || small_gain {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no downhill step at any damping: a stationary point
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    Outcome {
        rms: (cost / n as f64).sqrt(),
        converged: converged && cost <= initial,
        p,
        iterations,
    }
}

fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

// Peak of the discrete spectrum of `v` over cycles per unit `u`.
fn dominant_frequency(u: &[f64], v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let max_cycles = (v.len() as f64 / 2.0).max(1.0);
    let mut best = (0.0, 0.5);
    let mut g = 0.25;
    while g <= max_cycles {
        let (mut re, mut im) = (0.0, 0.0);
        for (&ui, &vi) in u.iter().zip(v) {
            let a = 2.0 * PI * g * ui;
            re += (vi - mean) * a.cos();
            im += (vi - mean) * a.sin();
        }
        let power = re * re + im * im;
        if power > best.0 {
            best = (power, g);
        }
        g += 0.05;
    }
    best.1
}

// Least-squares a·cos + b·sin + c at fixed frequency and decay rate.
fn linear_cosine(u: &[f64], v: &[f64], g: f64, rate: f64) -> (f64, f64, f64) {
    let rows = u.len();
    let mut m = DMatrix::<f64>::zeros(rows, 3);
    let rhs = DVector::from_column_slice(v);
    for (i, &ui) in u.iter().enumerate() {
        let env = (-rate * ui).exp();
        m[(i, 0)] = env * (2.0 * PI * g * ui).cos();
        m[(i, 1)] = env * (2.0 * PI * g * ui).sin();
        m[(i, 2)] = 1.0;
    }
    let sol = m
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(3));
    // a cos θ + b sin θ = A cos(θ + φ) with A = hypot, φ = atan2(-b, a)
    (sol[0].hypot(sol[1]), (-sol[1]).atan2(sol[0]), sol[2])
}

/// `amplitude·cos(2π·frequency·x + phase) + offset`.
pub fn fit_sinusoid(x: &[f64], y: &[f64]) -> Result<FitResult> {
    let d = normalize(x, y, 4)?;
    let g0 = dominant_frequency(&d.u, &d.v);
    let (a0, phi0, c0) = linear_cosine(&d.u, &d.v, g0, 0.0);
    let model = |p: &[f64], u: f64| {
        let th = 2.0 * PI * p[1] * u + p[2];
        let (s, c) = th.sin_cos();
        (
            p[0] * c + p[3],
            vec![c, -p[0] * s * 2.0 * PI * u, -p[0] * s, 1.0],
        )
    };
    let out = levenberg_marquardt(&d.u, &d.v, vec![a0, g0, phi0, c0], model);
    let (mut a, g, mut phi, c) = (out.p[0], out.p[1], out.p[2], out.p[3]);
    if a < 0.0 {
        a = -a;
        phi += PI;
    }
    let f = g / d.xs;
    let params = [
        ("amplitude", a * d.ys),
        ("frequency", f),
        ("phase", wrap_phase(phi - 2.0 * PI * f * d.x0)),
        ("offset", d.y0 + c * d.ys),
    ];
    Ok(result(params, out, d.ys))
}

/// `amplitude·exp(-x/decay)·cos(2π·frequency·x + phase) + offset`.
pub fn fit_decaying_cosine(x: &[f64], y: &[f64]) -> Result<FitResult> {
    let d = normalize(x, y, 5)?;
    let g0 = dominant_frequency(&d.u, &d.v);
    // crude start: try a few decay rates and keep the best linear fit
    let (rate0, (a0, phi0, c0)) = [0.0, 0.5, 1.0, 2.0, 4.0]
        .into_iter()
        .map(|r| (r, linear_cosine(&d.u, &d.v, g0, r)))
        .min_by(|(r1, l1), (r2, l2)| {
            let cost = |r: f64, l: (f64, f64, f64)| -> f64 {
                d.u.iter()
                    .zip(&d.v)
                    .map(|(&u, &v)| {
                        (l.0 * (-r * u).exp() * (2.0 * PI * g0 * u + l.1).cos() + l.2 - v).powi(2)
                    })
                    .sum()
            };
            cost(*r1, *l1).total_cmp(&cost(*r2, *l2))
        })
        .expect("non-empty candidate list");
    let model = |p: &[f64], u: f64| {
        let env = (-p[4] * u).exp();
        let th = 2.0 * PI * p[1] * u + p[2];
        let (s, c) = th.sin_cos();
        (
            p[0] * env * c + p[3],
            vec![
                env * c,
                -p[0] * env * s * 2.0 * PI * u,
                -p[0] * env * s,
                1.0,
                -u * p[0] * env * c,
            ],
        )
    };
    let out = levenberg_marquardt(&d.u, &d.v, vec![a0, g0, phi0, c0, rate0], model);
    let (mut a, g, mut phi, c, rate) = (out.p[0], out.p[1], out.p[2], out.p[3], out.p[4]);
    if a < 0.0 {
        a = -a;
        phi += PI;
    }
    let f = g / d.xs;
    let rate_x = rate / d.xs;
    let params = [
        // referenced to x = 0 rather than to the first sample
        ("amplitude", a * d.ys * (rate_x * d.x0).exp()),
        ("frequency", f),
        ("phase", wrap_phase(phi - 2.0 * PI * f * d.x0)),
        ("offset", d.y0 + c * d.ys),
        (
            "decay",
            if rate_x > 0.0 {
                1.0 / rate_x
            } else {
                f64::INFINITY
            },
        ),
    ];
    Ok(result(params, out, d.ys))
}

/// `amplitude / (1 + ((x - center) / (width/2))^2) + offset`, `width` = FWHM.
pub fn fit_lorentzian(x: &[f64], y: &[f64]) -> Result<FitResult> {
    let d = normalize(x, y, 4)?;
    let mut sorted = d.v.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let (imax, _) =
        d.v.iter()
            .enumerate()
            .max_by(|a, b| (a.1 - median).abs().total_cmp(&(b.1 - median).abs()))
            .expect("non-empty data");
    let a0 = d.v[imax] - median;
    let half = median + a0 / 2.0;
    let above =
        d.u.iter()
            .zip(&d.v)
            .filter(|(_, &v)| (v - half) * a0.signum() > 0.0);
    let (lo, hi) = above.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&u, _)| {
        (lo.min(u), hi.max(u))
    });
    let step = 1.0 / (d.u.len() - 1) as f64;
    let w0 = (hi - lo).max(step);
    let model = |p: &[f64], u: f64| {
        let hw = p[1] / 2.0;
        let s = (u - p[0]) / hw;
        let l = 1.0 / (1.0 + s * s);
        let dl_ds = -2.0 * s * l * l;
        (
            p[2] * l + p[3],
            vec![
                p[2] * dl_ds * (-1.0 / hw),
                p[2] * dl_ds * (-s / p[1]),
                l,
                1.0,
            ],
        )
    };
    let out = levenberg_marquardt(&d.u, &d.v, vec![d.u[imax], w0, a0, median], model);
    let params = [
        ("center", d.x0 + out.p[0] * d.xs),
        ("width", out.p[1].abs() * d.xs),
        ("amplitude", out.p[2] * d.ys),
        ("offset", d.y0 + out.p[3] * d.ys),
    ];
    Ok(result(params, out, d.ys))
}

fn result<const N: usize>(params: [(&str, f64); N], out: Outcome, ys: f64) -> FitResult {
    FitResult {
        parameters: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        residual_norm: out.rms * ys,
        converged: out.converged,
        iterations: out.iterations,
    }
}
