//! Tone and spectrum algebra: merging, mixing products, filter application
//! and spur metrics.
//!
//! Powers are scalar (spectrum-analyzer style). Coincident tones add
//! incoherently in linear power; phase is never tracked.

use std::io::{Read, Write};

use serde::Serialize;

use crate::chain::MixerSpec;
use crate::error::{Error, Result};
use crate::responses::FilterResponse;
use crate::units::{dbm_to_mw, format_sig, mw_to_dbm, Level};

/// Default merge tolerance (matches a 1 kHz resolution bandwidth).
pub const DEFAULT_MERGE_TOLERANCE_HZ: f64 = 1e3;

/// Default level below which tones are discarded after each chain stage.
pub const DEFAULT_POWER_FLOOR_DBM: f64 = -120.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tone {
    frequency: f64,
    power: f64,
    label: String,
}

impl Tone {
    pub fn new(frequency_hz: f64, power_dbm: f64, label: impl Into<String>) -> Result<Self> {
        if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tone frequency must be finite and positive, got {frequency_hz}"
            )));
        }
        if !power_dbm.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "tone power must be finite, got {power_dbm}"
            )));
        }
        Ok(Self {
            frequency: frequency_hz,
            power: power_dbm,
            label: label.into(),
        })
    }

    /// Hertz.
    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    /// dBm.
    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    fn with_power(&self, power: f64) -> Option<Tone> {
        power.is_finite().then(|| Tone {
            frequency: self.frequency,
            power,
            label: self.label.clone(),
        })
    }
}

/// A set of tones sorted by frequency, no two closer than `merge_tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    tones: Vec<Tone>,
    merge_tolerance: f64,
}

impl Spectrum {
    pub fn new(tones: Vec<Tone>, merge_tolerance_hz: f64) -> Self {
        merge_tones(tones, merge_tolerance_hz.max(0.0))
    }

    pub fn empty(merge_tolerance_hz: f64) -> Self {
        Self {
            tones: Vec::new(),
            merge_tolerance: merge_tolerance_hz.max(0.0),
        }
    }

    pub fn single(tone: Tone) -> Self {
        Self {
            tones: vec![tone],
            merge_tolerance: DEFAULT_MERGE_TOLERANCE_HZ,
        }
    }

    pub fn tones(&self) -> &[Tone] {
        &self.tones
    }

    pub fn len(&self) -> usize {
        self.tones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tones.is_empty()
    }

    pub fn merge_tolerance(&self) -> f64 {
        self.merge_tolerance
    }

    /// Nearest tone within the merge tolerance of `freq_hz`.
    pub fn find(&self, freq_hz: f64) -> Option<&Tone> {
        self.find_index(freq_hz).map(|i| &self.tones[i])
    }

    fn find_index(&self, freq_hz: f64) -> Option<usize> {
        let idx = self.tones.partition_point(|t| t.frequency < freq_hz);
        [idx.checked_sub(1), Some(idx)]
            .into_iter()
            .flatten()
            .filter(|&i| i < self.tones.len())
            .filter(|&i| (self.tones[i].frequency - freq_hz).abs() <= self.merge_tolerance)
            .min_by(|&a, &b| {
                let da = (self.tones[a].frequency - freq_hz).abs();
                let db = (self.tones[b].frequency - freq_hz).abs();
                da.total_cmp(&db)
            })
    }

    /// Power at `freq_hz`, or a lookup error naming the frequency.
    pub fn power_at(&self, freq_hz: f64) -> Result<f64> {
        self.find(freq_hz)
            .map(Tone::power)
            .ok_or(Error::ToneNotFound {
                freq_hz,
                tolerance_hz: self.merge_tolerance,
            })
    }

    /// Union of two spectra, merged at this spectrum's tolerance.
    pub fn combine(&self, other: &Spectrum) -> Spectrum {
        let mut tones = self.tones.clone();
        tones.extend(other.tones.iter().cloned());
        Spectrum::new(tones, self.merge_tolerance)
    }

    /// Every tone shifted by `db`.
    pub fn offset(&self, db: f64) -> Spectrum {
        Spectrum {
            tones: self
                .tones
                .iter()
                .filter_map(|t| t.with_power(t.power + db))
                .collect(),
            merge_tolerance: self.merge_tolerance,
        }
    }

    /// Drops tones below `floor_dbm`.
    pub fn prune(&self, floor_dbm: f64) -> Spectrum {
        Spectrum {
            tones: self
                .tones
                .iter()
                .filter(|t| t.power >= floor_dbm)
                .cloned()
                .collect(),
            merge_tolerance: self.merge_tolerance,
        }
    }

    /// Writes `frequency_hz,power_dbm,label` rows, 9 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["frequency_hz", "power_dbm", "label"])?;
        for t in &self.tones {
            w.write_record([
                format_sig(t.frequency, 9),
                format_sig(t.power, 9),
                t.label.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv<R: Read>(input: R, merge_tolerance_hz: f64) -> Result<Spectrum> {
        let mut r = csv::Reader::from_reader(input);
        let mut tones = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let field = |k: usize| -> Result<f64> {
                rec.get(k)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Parse {
                        line,
                        message: format!("bad numeric field {k}"),
                    })
            };
            let label = rec.get(2).unwrap_or_default().to_string();
            tones.push(
                Tone::new(field(0)?, field(1)?, label).map_err(|e| Error::Parse {
                    line,
                    message: e.to_string(),
                })?,
            );
        }
        Ok(Spectrum::new(tones, merge_tolerance_hz))
    }
}

fn merge_tones(mut tones: Vec<Tone>, tolerance: f64) -> Spectrum {
    tones.sort_by(|a, b| {
        a.frequency
            .total_cmp(&b.frequency)
            .then(b.power.total_cmp(&a.power))
            .then_with(|| a.label.cmp(&b.label))
    });
    let mut merged: Vec<Tone> = Vec::with_capacity(tones.len());
    let mut cluster: Vec<Tone> = Vec::new();
    for tone in tones {
        if let Some(last) = cluster.last() {
            if tone.frequency - last.frequency > tolerance {
                merged.push(collapse(std::mem::take(&mut cluster)));
            }
        }
        cluster.push(tone);
    }
    if !cluster.is_empty() {
        merged.push(collapse(cluster));
    }
    Spectrum {
        tones: merged,
        merge_tolerance: tolerance,
    }
}

// Sums linear power; the strongest member keeps its frequency.
fn collapse(mut cluster: Vec<Tone>) -> Tone {
    if cluster.len() == 1 {
        return cluster.pop().expect("non-empty");
    }
    let strongest = cluster
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.power.total_cmp(&b.power).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .expect("non-empty");
    let total_mw: f64 = cluster.iter().map(|t| dbm_to_mw(t.power)).sum();
    let label = cluster
        .iter()
        .map(|t| t.label.as_str())
        .collect::<Vec<_>>()
        .join("+");
    Tone {
        frequency: cluster[strongest].frequency,
        power: mw_to_dbm(total_mw),
        label,
    }
}

/// Re-merges `spectrum` at `tolerance_hz`.
pub fn merge(spectrum: &Spectrum, tolerance_hz: f64) -> Spectrum {
    Spectrum::new(spectrum.tones.clone(), tolerance_hz)
}

/// Products of every input tone with the LO up to `max_order`, plus LO
/// leakage, LO harmonics and IF feedthrough.
///
/// Products `|m·f_lo + n·f_in|` use `m >= 1` only, since `(m, n)` and
/// `(-m, -n)` land on the same frequency. `n = 0` terms are LO harmonics and
/// are referenced to the leaked LO level rather than to the input tone.
pub fn mix(input: &Spectrum, lo: &Tone, mixer: &MixerSpec, max_order: u32) -> Result<Spectrum> {
    if max_order < 1 {
        return Err(Error::InvalidArgument(
            "max_order must be at least 1".into(),
        ));
    }
    mixer.check_lo(lo)?;
    let f_lo = lo.frequency;
    let k = max_order as i64;
    let stage = lo.label.as_str();
    let mut out = Vec::new();

    let leak = lo.power - mixer.lo_to_rf_isolation_db;
    push_tone(&mut out, f_lo, leak, format!("{stage} leakage"));
    for m in 2..=k {
        let p = leak - mixer.spur_table.suppression(m as u32, 0);
        push_tone(&mut out, m as f64 * f_lo, p, format!("{stage} x{m}"));
    }

    for tone in &input.tones {
        let f_in = tone.frequency;
        for m in 1..=k {
            for n in -k..=k {
                if n == 0 {
                    continue;
                }
                let f = (m as f64 * f_lo + n as f64 * f_in).abs();
                if f <= 1e-9 * f_lo.max(f_in) {
                    continue;
                }
                let p = tone.power
                    - mixer.conversion_loss_db
                    - mixer
                        .spur_table
                        .suppression(m as u32, n.unsigned_abs() as u32);
                push_tone(&mut out, f, p, format!("{stage} m=+{m},n={n:+}"));
            }
        }
        push_tone(
            &mut out,
            f_in,
            tone.power - mixer.if_to_rf_isolation_db,
            format!("{stage} feedthrough"),
        );
    }
    Ok(Spectrum::new(out, input.merge_tolerance))
}

fn push_tone(out: &mut Vec<Tone>, f: f64, p: f64, label: String) {
    if p.is_finite() && f.is_finite() && f > 0.0 {
        out.push(Tone {
            frequency: f,
            power: p,
            label,
        });
    }
}

/// Attenuates every tone by the response's |S21| at its frequency.
pub fn apply_response(spectrum: &Spectrum, response: &FilterResponse) -> Spectrum {
    Spectrum {
        tones: spectrum
            .tones
            .iter()
            .filter_map(|t| t.with_power(t.power + response.s21_db(t.frequency)))
            .collect(),
        merge_tolerance: spectrum.merge_tolerance,
    }
}

/// `P(reference) - P(desired)` in dB; negative when the reference is weaker.
pub fn dbc_vs(spectrum: &Spectrum, desired_hz: f64, reference_hz: f64) -> Result<f64> {
    let desired = spectrum.power_at(desired_hz)?;
    let reference = spectrum.power_at(reference_hz)?;
    Ok(reference - desired)
}

/// Desired power minus the strongest other tone inside `band` (inclusive).
pub fn sfdr(spectrum: &Spectrum, desired_hz: f64, band: (f64, f64)) -> Result<Level> {
    let (lo, hi) = band;
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "empty band [{lo}, {hi}] Hz"
        )));
    }
    let idx = spectrum.find_index(desired_hz).ok_or(Error::ToneNotFound {
        freq_hz: desired_hz,
        tolerance_hz: spectrum.merge_tolerance,
    })?;
    let desired = spectrum.tones[idx].power;
    let strongest = spectrum
        .tones
        .iter()
        .enumerate()
        .filter(|&(i, t)| i != idx && t.frequency >= lo && t.frequency <= hi)
        .map(|(_, t)| t.power)
        .max_by(f64::total_cmp);
    Ok(match strongest {
        Some(p) => Level::Finite(desired - p),
        None => Level::Unbounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{MixerSpec, SpurTable};
    use crate::responses::PrototypeResponse;

    fn tone(f: f64, p: f64) -> Tone {
        Tone::new(f, p, "t").unwrap()
    }

    fn ideal_mixer(loss: f64) -> MixerSpec {
        MixerSpec {
            conversion_loss_db: loss,
            lo_to_rf_isolation_db: f64::INFINITY,
            if_to_rf_isolation_db: f64::INFINITY,
            spur_table: SpurTable::linear(10.0),
            lo_range: (1e9, 10e9),
        }
    }

    #[test]
    fn tone_validation() {
        assert!(Tone::new(0.0, 0.0, "").is_err());
        assert!(Tone::new(-1.0, 0.0, "").is_err());
        assert!(Tone::new(1.0, f64::NAN, "").is_err());
        assert!(Tone::new(f64::INFINITY, 0.0, "").is_err());
    }

    #[test]
    fn coincident_tones_add_three_db() {
        let s = Spectrum::new(vec![tone(5e9, -10.0), tone(5e9, -10.0)], 1e3);
        assert_eq!(s.len(), 1);
        assert!((s.tones()[0].power() + 6.989700043360188).abs() < 1e-12);
        assert_eq!(s.tones()[0].label(), "t+t");
    }

    #[test]
    fn empty_merge() {
        let s = merge(&Spectrum::empty(1e3), 1e3);
        assert!(s.is_empty());
    }

    #[test]
    fn merge_keeps_strongest_frequency() {
        let s = Spectrum::new(vec![tone(1e9, -30.0), tone(1e9 + 500.0, -10.0)], 1e3);
        assert_eq!(s.len(), 1);
        assert_eq!(s.tones()[0].frequency(), 1e9 + 500.0);
    }

    #[test]
    fn mix_first_order_sidebands() {
        let input = Spectrum::single(tone(450e6, 0.0));
        let lo = Tone::new(3.35e9, 10.0, "LO1").unwrap();
        let mut mixer = ideal_mixer(7.0);
        mixer.lo_to_rf_isolation_db = 35.0;
        mixer.if_to_rf_isolation_db = 30.0;
        let out = mix(&input, &lo, &mixer, 1).unwrap();
        assert_eq!(out.power_at(2.9e9).unwrap(), -7.0);
        assert_eq!(out.power_at(3.8e9).unwrap(), -7.0);
        assert_eq!(out.power_at(3.35e9).unwrap(), -25.0);
        assert_eq!(out.power_at(450e6).unwrap(), -30.0);
        assert_eq!(out.len(), 4);
    }

    #[test]
    fn mix_empty_input_gives_leakage_only() {
        let lo = Tone::new(3.35e9, 10.0, "LO1").unwrap();
        let mut mixer = ideal_mixer(7.0);
        mixer.lo_to_rf_isolation_db = 40.0;
        let out = mix(&Spectrum::empty(1e3), &lo, &mixer, 1).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.tones()[0].frequency(), 3.35e9);
        assert_eq!(out.tones()[0].power(), -30.0);
    }

    #[test]
    fn mix_rejects_lo_out_of_range() {
        let lo = Tone::new(11e9, 10.0, "LO2").unwrap();
        let err = mix(&Spectrum::empty(1e3), &lo, &ideal_mixer(7.0), 1).unwrap_err();
        match err {
            Error::RangeViolation { stage, .. } => assert_eq!(stage, "LO2"),
            other => panic!("unexpected {other:?}"),
        }
        let lo = Tone::new(3e9, 10.0, "LO1").unwrap();
        assert!(mix(&Spectrum::empty(1e3), &lo, &ideal_mixer(7.0), 0).is_err());
    }

    #[test]
    fn mix_drops_dc_products() {
        // 2 x 1 GHz - 1 x 2 GHz lands on DC
        let input = Spectrum::single(tone(2e9, 0.0));
        let lo = Tone::new(1e9, 0.0, "LO").unwrap();
        let out = mix(&input, &lo, &ideal_mixer(0.0), 2).unwrap();
        assert!(out.tones().iter().all(|t| t.frequency() > 0.0));
    }

    #[test]
    fn response_at_center_and_edge() {
        let bp = FilterResponse::Prototype(
            PrototypeResponse::butterworth_bandpass(5, 4.5e9, 7e9, 0.0).unwrap(),
        );
        let f0 = (4.5e9f64 * 7e9).sqrt();
        let s = Spectrum::new(vec![tone(f0, -10.0), tone(7e9, -10.0)], 1e3);
        let out = apply_response(&s, &bp);
        assert!((out.power_at(f0).unwrap() + 10.0).abs() < 1e-12);
        assert!((out.power_at(7e9).unwrap() + 10.0 + 3.010299956639812).abs() < 1e-9);
    }

    #[test]
    fn dbc_examples() {
        let s = Spectrum::new(vec![tone(5.026e9, -20.0), tone(7.926e9, -55.0)], 1e3);
        assert_eq!(dbc_vs(&s, 5.026e9, 7.926e9).unwrap(), -35.0);
        assert_eq!(dbc_vs(&s, 5.026e9, 5.026e9).unwrap(), 0.0);
        match dbc_vs(&s, 5.026e9, 6e9).unwrap_err() {
            Error::ToneNotFound { freq_hz, .. } => assert_eq!(freq_hz, 6e9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sfdr_examples() {
        let single = Spectrum::single(tone(5e9, -10.0));
        assert_eq!(sfdr(&single, 5e9, (1e9, 9e9)).unwrap(), Level::Unbounded);

        let s = Spectrum::new(
            vec![
                tone(5e9, -10.0),
                tone(6e9, -85.0),
                tone(7e9, -90.0),
                tone(12e9, 0.0),
            ],
            1e3,
        );
        assert_eq!(sfdr(&s, 5e9, (1e9, 9e9)).unwrap(), Level::Finite(75.0));
        assert!(sfdr(&s, 4e9, (1e9, 9e9)).is_err());
        assert!(sfdr(&s, 5e9, (9e9, 1e9)).is_err());
    }

    #[test]
    fn csv_layout() {
        let s = Spectrum::new(
            vec![
                Tone::new(3.8e9, -7.0, "LO1 m=+1,n=+1").unwrap(),
                Tone::new(2.9e9, -6.98970004336, "x").unwrap(),
            ],
            1e3,
        );
        let text = s.to_csv_string();
        assert_eq!(
            text,
            "frequency_hz,power_dbm,label\n2900000000,-6.98970004,x\n3800000000,-7,\"LO1 m=+1,n=+1\"\n"
        );
        let back = Spectrum::read_csv(text.as_bytes(), 1e3).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.tones()[1].label(), "LO1 m=+1,n=+1");
    }
}
