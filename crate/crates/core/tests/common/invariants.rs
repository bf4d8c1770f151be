//! Property suites, one function per listed invariant. Every suite draws
//! its cases from a fixed seed.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use upconv::chain::{
    CalibratedDefaults, ChainConfig, CouplingConfig, LeakageSourceConfig, MixerSpec,
    PlanConstraints, Sideband, SpurTable, SFDR_BAND_HZ,
};
use upconv::microstrip::{
    analyze_parallel_coupled, coupled_line_parameters, inverter_impedances, line_parameters,
    section_abcd, synthesize_parallel_coupled, CoupledFilterSpec, CoupledSection,
    ParallelCoupledGeometry, Substrate, SYSTEM_IMPEDANCE_OHMS,
};
use upconv::qubit::{drive_response, fit_decaying_cosine, fit_sinusoid, ramsey_sweep, QubitSpec};
use upconv::responses::{
    linear_grid, passband_metrics, prototype_g_values, Band, Extrapolation, Family, FilterResponse,
    PrototypeResponse, TabulatedResponse,
};
use upconv::spectra::{apply_response, merge, mix, sfdr, Spectrum, Tone};
use upconv::Level;

use super::{rel_diff, run_prop, Check};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn fail(msg: impl Into<String>) -> TestCaseError {
    TestCaseError::fail(msg.into())
}

fn lib<T>(r: upconv::Result<T>) -> Result<T, TestCaseError> {
    r.map_err(|e| fail(e.to_string()))
}

fn tones() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((1e6..1e10f64, -100.0..20.0f64), 0..40)
}

fn spectrum(tones: &[(f64, f64)], tolerance: f64) -> Spectrum {
    Spectrum::new(
        tones
            .iter()
            .map(|&(f, p)| Tone::new(f, p, "t").unwrap())
            .collect(),
        tolerance,
    )
}

fn prototype() -> impl Strategy<Value = PrototypeResponse> {
    (
        any::<bool>(),
        1u32..10,
        0.01..3.0f64,
        1e8..5e9f64,
        1.05..3.0f64,
        0.0..10.0f64,
        prop::option::of(20.0..80.0f64),
    )
        .prop_map(|(cheb, order, ripple, f_low, ratio, il, rejection)| {
            let (family, ripple) = if cheb {
                (Family::Chebyshev, Some(ripple))
            } else {
                (Family::Butterworth, None)
            };
            let band = Band::Bandpass {
                f_low_hz: f_low,
                f_high_hz: f_low * ratio,
            };
            let p = PrototypeResponse::new(family, order, band, ripple, il).unwrap();
            match rejection {
                Some(r) => p.with_stopband_rejection(r).unwrap(),
                None => p,
            }
        })
}

// ---- spectra ----

pub fn merge_idempotent() -> Check {
    run_prop(101, 256, (tones(), 0.0..1e8f64), |(tones, tol)| {
        let once = merge(&spectrum(&tones, tol), tol);
        let twice = merge(&once, tol);
        prop_assert_eq!(once, twice);
        Ok(())
    })
}

pub fn mix_first_order_two_tones() -> Check {
    let strategy = (
        prop::collection::vec(10e6..2e9f64, 1..4),
        -30.0..10.0f64,
        3e9..10e9f64,
    );
    run_prop(102, 256, strategy, |(freqs, p, f_lo)| {
        let input = spectrum(&freqs.iter().map(|&f| (f, p)).collect::<Vec<_>>(), 1e3);
        prop_assume!(input.len() == freqs.len());
        let spec = MixerSpec {
            conversion_loss_db: 7.0,
            lo_to_rf_isolation_db: f64::INFINITY,
            if_to_rf_isolation_db: f64::INFINITY,
            spur_table: SpurTable::linear(30.0),
            lo_range: (1e9, 11e9),
        };
        let lo = Tone::new(f_lo, 10.0, "LO").unwrap();
        let out = lib(mix(&input, &lo, &spec, 1))?;
        prop_assume!(freqs
            .iter()
            .all(|a| freqs.iter().all(|b| a == b || (a - b).abs() > 2e3)));
        prop_assert_eq!(out.len(), 2 * input.len());
        for t in input.tones() {
            for want in [f_lo + t.frequency(), (f_lo - t.frequency()).abs()] {
                prop_assert!(
                    out.tones().iter().any(|o| o.frequency() == want),
                    "missing {}",
                    want
                );
            }
        }
        Ok(())
    })
}

pub fn apply_response_partition() -> Check {
    let strategy = (
        tones(),
        prop::collection::vec(any::<bool>(), 40),
        prototype(),
    );
    run_prop(103, 256, strategy, |(tones, mask, proto)| {
        let whole = spectrum(&tones, 1e3);
        let response = FilterResponse::Prototype(proto);
        let (a, b): (Vec<_>, Vec<_>) = whole
            .tones()
            .iter()
            .cloned()
            .enumerate()
            .partition(|(i, _)| mask[*i % mask.len()]);
        let part =
            |v: Vec<(usize, Tone)>| Spectrum::new(v.into_iter().map(|(_, t)| t).collect(), 1e3);
        let split =
            apply_response(&part(a), &response).combine(&apply_response(&part(b), &response));
        prop_assert_eq!(split, apply_response(&whole, &response));
        Ok(())
    })
}

pub fn sfdr_offset_invariant() -> Check {
    let strategy = (
        prop::collection::vec((1e6..1e10f64, -100.0..20.0f64), 1..30),
        any::<prop::sample::Index>(),
        -50.0..50.0f64,
    );
    run_prop(104, 256, strategy, |(tones, pick, db)| {
        let s = spectrum(&tones, 1e3);
        let desired = s.tones()[pick.index(s.len())].frequency();
        let band = (0.0, 2e10);
        let before = lib(sfdr(&s, desired, band))?;
        let after = lib(sfdr(&s.offset(db), desired, band))?;
        match (before, after) {
            (Level::Unbounded, Level::Unbounded) => {}
            (Level::Finite(x), Level::Finite(y)) => {
                prop_assert!((x - y).abs() <= 1e-9, "{} vs {}", x, y)
            }
            (x, y) => return Err(fail(format!("{x:?} vs {y:?}"))),
        }
        Ok(())
    })
}

pub fn spectra_deterministic() -> Check {
    let strategy = (tones(), 1e9..10e9f64, 1u32..6, prototype());
    run_prop(105, 128, strategy, |(tones, f_lo, order, proto)| {
        let input = spectrum(&tones, 1e3);
        let spec = MixerSpec {
            lo_range: (1e9, 10e9),
            ..CalibratedDefaults::FROZEN.mixer1()
        };
        let lo = Tone::new(f_lo, 10.0, "LO").unwrap();
        let response = FilterResponse::Prototype(proto);
        let run = || -> upconv::Result<Spectrum> {
            Ok(apply_response(&mix(&input, &lo, &spec, order)?, &response))
        };
        let (a, b) = (lib(run())?, lib(run())?);
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
        Ok(())
    })
}

// ---- responses ----

pub fn prototype_passive() -> Check {
    run_prop(201, 256, (prototype(), 1e6..1e11f64), |(p, f)| {
        let s21 = p.s21_db(f);
        prop_assert!(
            s21 <= -p.insertion_loss_db() + 1e-12,
            "S21 {} above -IL {}",
            s21,
            p.insertion_loss_db()
        );
        Ok(())
    })
}

pub fn prototype_symmetric_in_w() -> Check {
    run_prop(202, 256, (prototype(), 0.0..50.0f64), |(p, w)| {
        let (up, down) = (p.s21_db(p.frequency_for(w)), p.s21_db(p.frequency_for(-w)));
        prop_assert!(
            (up - down).abs() <= 1e-7 * up.abs().max(1.0),
            "{} vs {} at w = {}",
            up,
            down,
            w
        );
        Ok(())
    })
}

pub fn metrics_recover_edges() -> Check {
    run_prop(
        203,
        64,
        (2u32..10, 1e9..5e9f64, 0.1e9..3e9f64, 0.0..10.0f64),
        |(order, f_low, bw, il)| {
            let f_high = f_low + bw;
            let p = lib(PrototypeResponse::butterworth_bandpass(
                order, f_low, f_high, il,
            ))?;
            let step = bw / 100.0;
            let grid = linear_grid(f_low / 2.0, f_high * 2.0, step);
            let table = lib(TabulatedResponse::sample(
                &FilterResponse::Prototype(p),
                &grid,
                Extrapolation::HoldLast,
            ))?;
            let m = lib(passband_metrics(&table, 3.0))?;
            prop_assert!(
                (m.f_low_edge - f_low).abs() <= step,
                "low edge {} vs {}",
                m.f_low_edge,
                f_low
            );
            prop_assert!(
                (m.f_high_edge - f_high).abs() <= step,
                "high edge {} vs {}",
                m.f_high_edge,
                f_high
            );
            Ok(())
        },
    )
}

pub fn g_values_palindromic() -> Check {
    let strategy = (any::<bool>(), 0u32..8, 0.01..3.0f64);
    run_prop(204, 256, strategy, |(cheb, k, ripple)| {
        let (family, order, ripple) = if cheb {
            (Family::Chebyshev, 2 * k + 1, Some(ripple))
        } else {
            (Family::Butterworth, k + 1, None)
        };
        let g = lib(prototype_g_values(family, order, ripple))?;
        let n = order as usize;
        for i in 0..n {
            prop_assert!(
                rel_diff(g[i], g[n - 1 - i]) <= 1e-9,
                "g{} = {} vs g{} = {}",
                i + 1,
                g[i],
                n - i,
                g[n - 1 - i]
            );
        }
        Ok(())
    })
}

// ---- microstrip ----

fn substrate() -> impl Strategy<Value = Substrate> {
    (1.0..12.0f64, 0.1e-3..3e-3f64).prop_map(|(eps_r, h)| Substrate::new(eps_r, h).unwrap())
}

pub fn line_monotone() -> Check {
    run_prop(
        301,
        512,
        (substrate(), 0.01..20.0f64, 1.001..3.0f64),
        |(sub, wh, ratio)| {
            let w = wh * sub.height;
            let (a, b) = (line_parameters(w, &sub), line_parameters(w * ratio, &sub));
            prop_assert!(
                a.z0 > b.z0,
                "z0 {} at w = {} not above {} at {}",
                a.z0,
                w,
                b.z0,
                w * ratio
            );
            for p in [a, b] {
                prop_assert!(
                    p.eps_eff >= 1.0 && p.eps_eff <= sub.eps_r,
                    "eps_eff {} outside [1, {}]",
                    p.eps_eff,
                    sub.eps_r
                );
            }
            Ok(())
        },
    )
}

fn coupled_spec() -> impl Strategy<Value = CoupledFilterSpec> {
    (2u32..8, 1e9..10e9f64, 0.05..0.5f64).prop_map(|(order, f0, fbw)| {
        // geometric centre f0, fractional bandwidth fbw
        let half = fbw / 2.0;
        let f_low = f0 * ((half * half + 1.0).sqrt() - half);
        CoupledFilterSpec::butterworth(order, f_low, f0 * f0 / f_low)
    })
}

pub fn synthesis_positive_coupling() -> Check {
    run_prop(302, 32, coupled_spec(), |spec| {
        let sub = Substrate::fr4();
        // Z0o = Z0 (1 - JZ0 + JZ0^2) only drops below Z0 while JZ0 < 1
        let targets = lib(inverter_impedances(&spec))?;
        prop_assume!(targets.iter().all(|t| t.jz0 < 1.0));
        let geometry = match synthesize_parallel_coupled(&spec, &sub) {
            Ok(g) => g,
            Err(upconv::Error::Synthesis { .. }) => {
                return Err(TestCaseError::reject("unrealizable section"))
            }
            Err(e) => return Err(fail(e.to_string())),
        };
        for s in geometry.sections() {
            let p = coupled_line_parameters(s.width, s.gap, &sub);
            prop_assert!(
                p.z0e > spec.z0 && spec.z0 > p.z0o,
                "Z0e {} Z0 {} Z0o {}",
                p.z0e,
                spec.z0,
                p.z0o
            );
        }
        Ok(())
    })
}

pub fn synthesis_deterministic() -> Check {
    run_prop(303, 16, coupled_spec(), |spec| {
        let sub = Substrate::fr4();
        let a = synthesize_parallel_coupled(&spec, &sub).map(|g| g.to_json());
        let b = synthesize_parallel_coupled(&spec, &sub).map(|g| g.to_json());
        prop_assert_eq!(a.map_err(|e| e.to_string()), b.map_err(|e| e.to_string()));
        Ok(())
    })
}

fn section() -> impl Strategy<Value = CoupledSection> {
    (0.2e-3..3e-3f64, 2e-3..20e-3f64, 0.1e-3..2e-3f64)
        .prop_map(|(width, length, gap)| CoupledSection { width, length, gap })
}

pub fn analysis_passive() -> Check {
    let strategy = (
        prop::collection::vec(section(), 1..4),
        any::<bool>(),
        substrate(),
        0.5e9..15e9f64,
    );
    run_prop(304, 128, strategy, |(half, odd, sub, f)| {
        let total = 2 * half.len() - usize::from(odd && half.len() > 1);
        let geometry = lib(ParallelCoupledGeometry::mirrored(&half, total, sub))?;
        let raw = geometry
            .sections()
            .iter()
            .fold(upconv::microstrip::Abcd::identity(), |acc, s| {
                acc * section_abcd(s, &sub, f)
            })
            .s21_db(SYSTEM_IMPEDANCE_OHMS);
        prop_assert!(raw <= 1e-9, "raw cascade S21 {} dB at {} Hz", raw, f);
        let table = lib(analyze_parallel_coupled(&geometry, &[f, 1.01 * f]))?;
        prop_assert!(table.points().iter().all(|p| p.1 <= 0.0));
        Ok(())
    })
}

// ---- chain ----

fn constraints() -> impl Strategy<Value = (PlanConstraints, f64)> {
    (
        100e6..800e6f64,
        1.5e9..3.5e9f64,
        0.1e9..0.4e9f64,
        any::<bool>(),
        any::<bool>(),
        0.0..1.0f64,
    )
        .prop_map(|(f_if, s1_low, s1_bw, upper1, upper2, t)| {
            let sb = |upper| {
                if upper {
                    Sideband::Upper
                } else {
                    Sideband::Lower
                }
            };
            let f_if = f_if.round();
            let c = PlanConstraints {
                if_range: (f_if, f_if),
                stage1_passband: (s1_low, s1_low + s1_bw),
                stage2_passband: (4.5e9, 7e9),
                mixer1_lo_range: (0.1e9, 10e9),
                mixer2_lo_range: (0.1e9, 12e9),
                stage1_sideband: sb(upper1),
                stage2_sideband: sb(upper2),
            };
            (c, (4.5e9 + t * 2.5e9).round())
        })
}

/// Targets and IFs sit on a 1 Hz grid. Off the grid an exact LO2 may not
/// exist in f64.
pub fn plan_round_trip() -> Check {
    run_prop(401, 512, constraints(), |(c, target)| {
        let p = match upconv::chain::plan(target, &c) {
            Ok(p) => p,
            Err(upconv::Error::Planning(_)) => return Err(TestCaseError::reject("infeasible")),
            Err(e) => return Err(fail(e.to_string())),
        };
        prop_assert_eq!(p.recompute_output(), target);
        prop_assert_eq!(p.output_hz, target);
        lib(p.check(&c))?;
        Ok(())
    })
}

fn bench() -> ChainConfig {
    CalibratedDefaults::FROZEN.benchmark_config()
}

pub fn lo2_shift() -> Check {
    run_prop(
        402,
        48,
        (4.6e9..6.9e9f64, -50e6..50e6f64),
        |(target, delta)| {
            let (cfg, plan) = lib(bench().retarget(target))?;
            let mut shifted = cfg.clone();
            shifted.lo2_hz = cfg.lo2_hz + delta;
            let (a, b) = (lib(cfg.simulate())?, lib(shifted.simulate())?);
            prop_assert_eq!(&a[1], &b[1]);
            let want = plan.output_hz + delta;
            let got = b[4]
                .tones()
                .iter()
                .map(|t| t.frequency())
                .min_by(|x, y| (x - want).abs().total_cmp(&(y - want).abs()))
                .unwrap();
            // the shifted LO is the only rounded quantity
            prop_assert!(
                (got - want).abs() <= 4.0 * f64::EPSILON * want,
                "desired at {} not {}",
                got,
                want
            );
            Ok(())
        },
    )
}

pub fn leakage_never_decreases() -> Check {
    let source = prop_oneof![
        (0usize..4).prop_map(LeakageSourceConfig::StageOutput),
        prop_oneof![Just(0usize), Just(2usize)].prop_map(LeakageSourceConfig::Lo),
    ];
    let strategy = (
        prop::collection::vec((source, -90.0..-20.0f64), 1..4),
        4.6e9..6.9e9f64,
    );
    run_prop(403, 48, strategy, |(paths, target)| {
        let (base, _) = lib(bench().without_leakage().retarget(target))?;
        let mut leaky = base.clone();
        leaky.leakage = paths
            .iter()
            .map(|&(source, coupling_db)| CouplingConfig {
                source,
                coupling_db,
            })
            .collect();
        let clean = lib(base.simulate())?.pop().unwrap();
        let dirty = lib(leaky.simulate())?.pop().unwrap();
        for t in clean.tones() {
            let after = lib(dirty.power_at(t.frequency()))?;
            prop_assert!(
                after >= t.power() - 1e-12,
                "tone at {} fell from {} to {}",
                t.frequency(),
                t.power(),
                after
            );
        }
        Ok(())
    })
}

pub fn propagate_deterministic() -> Check {
    run_prop(404, 32, (4.5e9..7e9f64, 1u32..6), |(target, order)| {
        let (mut cfg, _) = lib(bench().retarget(target))?;
        cfg.max_order = order;
        let (a, b) = (lib(cfg.simulate())?, lib(cfg.simulate())?);
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
        Ok(())
    })
}

fn level(l: Level) -> f64 {
    match l {
        Level::Finite(x) => x,
        Level::Unbounded => f64::INFINITY,
    }
}

pub fn shielding_raises_sfdr() -> Check {
    run_prop(405, 24, 4.5e9..7e9f64, |target| {
        let sfdr_of = |cfg: &ChainConfig| -> Result<f64, TestCaseError> {
            Ok(level(lib(upconv::chain::output_sfdr(
                cfg,
                target,
                SFDR_BAND_HZ,
            ))?))
        };
        let default = sfdr_of(&bench())?;
        let no_leak = sfdr_of(&bench().without_leakage())?;
        let shielded = sfdr_of(&CalibratedDefaults::FROZEN.shielded_config())?;
        prop_assert!(
            default <= no_leak,
            "default {} > no leakage {}",
            default,
            no_leak
        );
        prop_assert!(
            default <= shielded,
            "default {} > shielded {}",
            default,
            shielded
        );
        Ok(())
    })
}

// ---- qubit ----

fn qubit_case() -> impl Strategy<Value = (QubitSpec, Vec<(f64, f64)>, f64, f64)> {
    (
        prop::collection::vec((-30e6..30e6f64, -20.0..10.0f64), 1..4),
        0.1e6..20e6f64,
        prop::option::of((0.1e-6..10e-6f64, 0.05..2.0f64)),
        0.0..300e-9f64,
        0.0..3.0f64,
    )
        .prop_map(|(tones, rabi, damping, duration, amp)| {
            let (t1, t2) = match damping {
                Some((t1, r)) => (t1, r * t1),
                None => (f64::INFINITY, f64::INFINITY),
            };
            (
                QubitSpec::new(5.61e9, t1, t2, TWO_PI * rabi).unwrap(),
                tones,
                duration,
                amp,
            )
        })
}

fn drive(f_q: f64, tones: &[(f64, f64)]) -> Spectrum {
    spectrum(
        &tones.iter().map(|&(d, p)| (f_q + d, p)).collect::<Vec<_>>(),
        1e3,
    )
}

pub fn populations_bounded() -> Check {
    run_prop(501, 128, qubit_case(), |(q, tones, duration, amp)| {
        let p = lib(drive_response(
            &q,
            &drive(q.f_qubit_hz, &tones),
            duration,
            amp,
        ))?;
        prop_assert!((0.0..=1.0).contains(&p), "population {}", p);
        Ok(())
    })
}

pub fn translation_invariant() -> Check {
    run_prop(
        502,
        64,
        (qubit_case(), -1e9..1e9f64),
        |((q, tones, duration, amp), shift)| {
            let moved = QubitSpec {
                f_qubit_hz: q.f_qubit_hz + shift,
                ..q
            };
            let a = lib(drive_response(
                &q,
                &drive(q.f_qubit_hz, &tones),
                duration,
                amp,
            ))?;
            let b = lib(drive_response(
                &moved,
                &drive(moved.f_qubit_hz, &tones),
                duration,
                amp,
            ))?;
            prop_assert!(
                (a - b).abs() <= 1e-9,
                "{} vs {} after shifting by {}",
                a,
                b,
                shift
            );
            Ok(())
        },
    )
}

fn rabi_frequency(q: &QubitSpec, amp: f64, times: &[f64]) -> Result<f64, TestCaseError> {
    let tone = Spectrum::single(Tone::new(q.f_qubit_hz, 10.0, "drive").unwrap());
    let pops = times
        .iter()
        .map(|&t| drive_response(q, &tone, t, amp))
        .collect::<upconv::Result<Vec<_>>>();
    let fit = lib(fit_sinusoid(times, &lib(pops)?))?;
    prop_assert!(fit.converged, "sinusoid fit did not converge");
    Ok(fit.get("frequency"))
}

pub fn rabi_linear_in_amplitude() -> Check {
    run_prop(503, 16, (2e6..20e6f64, 0.2..1.0f64), |(rabi, amp)| {
        let q = QubitSpec::lossless(5.61e9, TWO_PI * rabi);
        // three cycles at the lower amplitude
        let span = 3.0 / (rabi * amp);
        let times = linear_grid(0.0, span, span / 80.0);
        let (f1, f2) = (
            rabi_frequency(&q, amp, &times)?,
            rabi_frequency(&q, 2.0 * amp, &times)?,
        );
        prop_assert!((f2 / f1 - 2.0).abs() <= 2e-3, "ratio {}", f2 / f1);
        Ok(())
    })
}

pub fn ramsey_matches_detuning() -> Check {
    run_prop(
        504,
        32,
        (0.5e6..10e6f64, prop::option::of(100.0..1e4f64)),
        |(detuning, t2_ratio)| {
            let max_wait = 2e-6;
            let t2 = t2_ratio.map_or(f64::INFINITY, |r| r * max_wait);
            let q = lib(QubitSpec::new(5.61e9, f64::INFINITY, t2, 1e8))?;
            let waits = linear_grid(0.0, max_wait, max_wait / 400.0);
            let pops = lib(ramsey_sweep(&q, detuning, &waits))?;
            let fit = lib(fit_decaying_cosine(&waits, &pops))?;
            let got = fit.get("frequency");
            prop_assert!(
                rel_diff(got, detuning) <= 1e-3,
                "fringe {} vs detuning {}",
                got,
                detuning
            );
            Ok(())
        },
    )
}

// ---- cli ----

fn run_cli(args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = upconv::cli::run(
        std::iter::once("upconv").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    if code != 0 {
        return Err(format!(
            "{args:?} exited {code}: {}",
            String::from_utf8_lossy(&err)
        ));
    }
    Ok((code, out))
}

fn dir_contents(dir: &std::path::Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Each invocation is run twice into separate directories and compared
/// byte for byte, stdout included.
pub fn cli_byte_identical() -> Check {
    let invocations: [&[&str]; 6] = [
        &["simulate", "--preset", "benchmark", "--out-dir", "{dir}"],
        &[
            "sweep-dbc",
            "--preset",
            "benchmark",
            "--step-hz",
            "250MHz",
            "--out",
            "{dir}/sweep.csv",
        ],
        &[
            "synth-filter",
            "--order",
            "5",
            "--f-low-hz",
            "4.5GHz",
            "--f-high-hz",
            "8GHz",
            "--out",
            "{dir}/geometry.json",
        ],
        &[
            "analyze-filter",
            "--table-two",
            "--step-hz",
            "50MHz",
            "--s2p",
            "{dir}/f.s2p",
            "--csv",
            "{dir}/f.csv",
        ],
        &[
            "qubit",
            "rabi",
            "--noise",
            "0.02",
            "--seed",
            "7",
            "--points",
            "21",
            "--out",
            "{dir}/rabi.csv",
            "--fit",
            "{dir}/fit.json",
        ],
        &["plan", "--target-hz", "5.026GHz"],
    ];
    for args in invocations {
        let mut runs = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let d = dir.path().to_string_lossy().into_owned();
            let filled: Vec<String> = args.iter().map(|a| a.replace("{dir}", &d)).collect();
            let refs: Vec<&str> = filled.iter().map(String::as_str).collect();
            let (_, stdout) = run_cli(&refs)?;
            let stdout = String::from_utf8_lossy(&stdout).replace(&d, "{dir}");
            runs.push((stdout, dir_contents(dir.path())?));
        }
        if runs[0] != runs[1] {
            return Err(format!("{args:?} differs between runs"));
        }
        if runs[0].1.is_empty() && runs[0].0.is_empty() {
            return Err(format!("{args:?} produced nothing"));
        }
    }
    Ok(format!(
        "{} invocations byte-identical across reruns",
        invocations.len()
    ))
}

pub type Suite = (&'static str, fn() -> Check);

/// Every suite, labelled, in a fixed order.
pub fn all() -> Vec<Suite> {
    vec![
        ("spectra: merge idempotent", merge_idempotent),
        (
            "spectra: first-order mix gives two tones per input",
            mix_first_order_two_tones,
        ),
        (
            "spectra: apply_response commutes with partition",
            apply_response_partition,
        ),
        ("spectra: sfdr offset invariant", sfdr_offset_invariant),
        ("spectra: deterministic", spectra_deterministic),
        ("responses: prototype passive", prototype_passive),
        (
            "responses: prototype symmetric in w",
            prototype_symmetric_in_w,
        ),
        ("responses: metrics recover edges", metrics_recover_edges),
        ("responses: g-values palindromic", g_values_palindromic),
        ("microstrip: z0 monotone, eps_eff bounded", line_monotone),
        ("microstrip: Z0e > Z0 > Z0o", synthesis_positive_coupling),
        (
            "microstrip: synthesis deterministic",
            synthesis_deterministic,
        ),
        ("microstrip: analysis passive", analysis_passive),
        ("chain: plan round-trip", plan_round_trip),
        ("chain: LO2 shift", lo2_shift),
        (
            "chain: leakage never decreases a tone",
            leakage_never_decreases,
        ),
        ("chain: propagate deterministic", propagate_deterministic),
        ("chain: shielding raises sfdr", shielding_raises_sfdr),
        ("qubit: populations in [0, 1]", populations_bounded),
        ("qubit: frequency translation", translation_invariant),
        (
            "qubit: Rabi frequency linear in amplitude",
            rabi_linear_in_amplitude,
        ),
        (
            "qubit: Ramsey fringe equals detuning",
            ramsey_matches_detuning,
        ),
        ("cli: byte-identical reruns", cli_byte_identical),
    ]
}
