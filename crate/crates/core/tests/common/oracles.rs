//! Independent re-derivations of library results.

use num_complex::Complex64;
use rand::Rng;

use upconv::chain::{MixerSpec, SpurTable};
use upconv::microstrip::{section_abcd, CoupledSection, Substrate, SYSTEM_IMPEDANCE_OHMS};
use upconv::qubit::{drive_response, QubitSpec};
use upconv::responses::{parse_touchstone, write_touchstone, Extrapolation, TabulatedResponse};
use upconv::spectra::{mix, Spectrum, Tone};
use upconv::units::{dbm_to_mw, mw_to_dbm};

use super::{rel_diff, seeded, Check};

const TOLERANCE_HZ: f64 = 1e3;

/// Every (m, n) with 1 <= |m| <= k, 0 <= |n| <= k, folded by absolute
/// value, with a product and its mirror (-m, -n) counted once.
fn brute_force_mix(
    tones: &[(f64, f64)],
    lo: (f64, f64),
    spec: &MixerSpec,
    slope: f64,
    k: i64,
) -> Vec<(f64, f64)> {
    let suppression = |m: i64, n: i64| -> f64 {
        let (m, n) = (m.abs(), n.abs());
        match (m, n) {
            (1, 1) | (1, 0) => 0.0,
            (_, 0) => slope * (m - 1) as f64,
            _ => slope * (m + n - 2) as f64,
        }
    };
    let leak = lo.1 - spec.lo_to_rf_isolation_db;
    let mut raw = Vec::new();
    let mut seen = Vec::new();
    for m in -k..=k {
        for n in -k..=k {
            if m == 0 || seen.contains(&(-m, -n)) {
                continue;
            }
            seen.push((m, n));
            if n == 0 {
                raw.push(((m as f64 * lo.0).abs(), leak - suppression(m, 0)));
            }
        }
    }
    for &(f_in, p_in) in tones {
        for &(m, n) in seen.iter().filter(|(_, n)| *n != 0) {
            let f = (m as f64 * lo.0 + n as f64 * f_in).abs();
            if f > 1e-9 * lo.0 {
                raw.push((f, p_in - spec.conversion_loss_db - suppression(m, n)));
            }
        }
        raw.push((f_in, p_in - spec.if_to_rf_isolation_db));
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    // linear-power sum over runs of tones closer than the tolerance
    let mut merged: Vec<(f64, f64, f64)> = Vec::new(); // (f of strongest, strongest dBm, total mW)
    for (f, p) in raw {
        match merged.last_mut() {
            Some(last) if f - last.0 <= TOLERANCE_HZ => {
                if p > last.1 {
                    last.0 = f;
                    last.1 = p;
                }
                last.2 += dbm_to_mw(p);
            }
            _ => merged.push((f, p, dbm_to_mw(p))),
        }
    }
    merged
        .into_iter()
        .map(|(f, _, mw)| (f, mw_to_dbm(mw)))
        .collect()
}

/// Mixer output vs the brute-force double loop on 20 random cases.
pub fn spur_enumeration() -> Check {
    let mut rng = seeded(7);
    for case in 0..20 {
        let slope = rng.random_range(5.0..40.0);
        let spec = MixerSpec {
            conversion_loss_db: rng.random_range(3.0..10.0),
            lo_to_rf_isolation_db: rng.random_range(20.0..60.0),
            if_to_rf_isolation_db: rng.random_range(20.0..60.0),
            spur_table: SpurTable::linear(slope),
            lo_range: (1e9, 10e9),
        };
        let lo = (rng.random_range(1.5e9..9e9), rng.random_range(0.0..15.0));
        let n_tones = rng.random_range(1..=2);
        let tones: Vec<(f64, f64)> = (0..n_tones)
            .map(|_| (rng.random_range(50e6..1.2e9), rng.random_range(-20.0..10.0)))
            .collect();
        let k = rng.random_range(1..=4);

        let input = Spectrum::new(
            tones
                .iter()
                .map(|&(f, p)| Tone::new(f, p, "in").unwrap())
                .collect(),
            TOLERANCE_HZ,
        );
        let lo_tone = Tone::new(lo.0, lo.1, "LO").unwrap();
        let got = mix(&input, &lo_tone, &spec, k as u32).map_err(|e| e.to_string())?;
        let want = brute_force_mix(&tones, lo, &spec, slope, k);
        if got.len() != want.len() {
            return Err(format!(
                "case {case}: {} tones, oracle has {}",
                got.len(),
                want.len()
            ));
        }
        for (t, (f, p)) in got.tones().iter().zip(&want) {
            if (t.frequency() - f).abs() > TOLERANCE_HZ || (t.power() - p).abs() > 1e-9 {
                return Err(format!(
                    "case {case}: ({}, {}) vs oracle ({f}, {p})",
                    t.frequency(),
                    t.power()
                ));
            }
        }
    }
    Ok("20 random cases match the brute-force enumeration".into())
}

fn s21(abcd: upconv::microstrip::Abcd) -> Complex64 {
    abcd.s21(SYSTEM_IMPEDANCE_OHMS)
}

/// (AB)C against A(BC) for random coupled sections and frequencies.
pub fn abcd_associativity() -> Check {
    let mut rng = seeded(11);
    let fr4 = Substrate::fr4();
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let f = rng.random_range(1e9..12e9);
        let mut section = || CoupledSection {
            width: rng.random_range(0.2e-3..3e-3),
            length: rng.random_range(3e-3..15e-3),
            gap: rng.random_range(0.1e-3..2e-3),
        };
        let (a, b, c) = (section(), section(), section());
        let (a, b, c) = (
            section_abcd(&a, &fr4, f),
            section_abcd(&b, &fr4, f),
            section_abcd(&c, &fr4, f),
        );
        let left = s21((a * b) * c);
        let right = s21(a * (b * c));
        let err = (left - right).norm() / left.norm().max(right.norm()).max(1e-300);
        worst = worst.max(err);
    }
    if worst <= 1e-9 {
        Ok(format!(
            "200 random triples, worst relative S21 difference {worst:.1e}"
        ))
    } else {
        Err(format!(
            "worst relative S21 difference {worst:.3e} exceeds 1e-9"
        ))
    }
}

/// write → parse on random 200-point files, and parse → write → parse.
pub fn touchstone_round_trip() -> Check {
    let mut rng = seeded(13);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let mut f = rng.random_range(1e6..1e9);
        let points: Vec<(f64, f64)> = (0..200)
            .map(|_| {
                f += rng.random_range(1e3..1e8);
                (f, rng.random_range(-90.0..0.0))
            })
            .collect();
        let original =
            TabulatedResponse::new(points, Extrapolation::HoldLast).map_err(|e| e.to_string())?;
        let once = parse_touchstone(&write_touchstone(&original)).map_err(|e| e.to_string())?;
        let twice = parse_touchstone(&write_touchstone(&once)).map_err(|e| e.to_string())?;
        for ((a, b), c) in original
            .points()
            .iter()
            .zip(once.points())
            .zip(twice.points())
        {
            worst = worst
                .max(rel_diff(a.0, b.0))
                .max(rel_diff(a.1, b.1))
                .max(rel_diff(b.0, c.0))
                .max(rel_diff(b.1, c.1));
        }
        if once.points().len() != 200 || twice.points().len() != 200 {
            return Err("point count changed in round trip".into());
        }
    }
    if worst <= 1e-9 {
        Ok(format!(
            "10 files x 200 points, worst relative difference {worst:.1e}"
        ))
    } else {
        Err(format!(
            "worst relative difference {worst:.3e} exceeds 1e-9"
        ))
    }
}

/// Fixed-step RK4 of the damped Bloch equations in the frame of a single
/// drive tone, where the coefficients are constant.
pub fn bloch_reference(
    omega: f64,
    delta: f64,
    t1: f64,
    t2: f64,
    duration: f64,
    steps: usize,
) -> f64 {
    let (g1, g2) = (1.0 / t1, 1.0 / t2);
    let f = |r: [f64; 3]| -> [f64; 3] {
        [
            -delta * r[1] - g2 * r[0],
            delta * r[0] - omega * r[2] - g2 * r[1],
            omega * r[1] - g1 * (r[2] + 1.0),
        ]
    };
    let h = duration / steps as f64;
    let mut r = [0.0, 0.0, -1.0];
    let axpy =
        |r: [f64; 3], k: [f64; 3], s: f64| [r[0] + s * k[0], r[1] + s * k[1], r[2] + s * k[2]];
    for _ in 0..steps {
        let k1 = f(r);
        let k2 = f(axpy(r, k1, h / 2.0));
        let k3 = f(axpy(r, k2, h / 2.0));
        let k4 = f(axpy(r, k3, h));
        for i in 0..3 {
            r[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    (1.0 + r[2]) / 2.0
}

/// Library integration against the reference at ten times the library's
/// step density.
pub fn ode_refined_step() -> Check {
    let mut rng = seeded(17);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut worst: f64 = 0.0;
    for case in 0..20 {
        let omega = two_pi * rng.random_range(1e6..20e6);
        let delta = two_pi * rng.random_range(-20e6..20e6);
        let t1 = if case % 3 == 0 {
            f64::INFINITY
        } else {
            rng.random_range(0.2e-6..5e-6)
        };
        let t2 = if t1.is_infinite() {
            f64::INFINITY
        } else {
            rng.random_range(0.1..2.0) * t1
        };
        let duration = rng.random_range(10e-9..500e-9);
        let f_q = 5.61e9;
        let qubit = QubitSpec::new(f_q, t1, t2, omega).map_err(|e| e.to_string())?;
        let drive = Spectrum::single(Tone::new(f_q + delta / two_pi, 10.0, "d").unwrap());
        let got = drive_response(&qubit, &drive, duration, 1.0).map_err(|e| e.to_string())?;
        let fastest = delta.abs().max(omega);
        let steps = (duration * fastest * 50.0 * 10.0).ceil() as usize;
        let want = bloch_reference(omega, delta, t1, t2, duration, steps.max(10));
        worst = worst.max((got - want).abs());
    }
    if worst <= 1e-4 {
        Ok(format!(
            "20 detuned single-tone cases, worst population difference {worst:.1e}"
        ))
    } else {
        Err(format!(
            "worst population difference {worst:.3e} exceeds 1e-4"
        ))
    }
}
