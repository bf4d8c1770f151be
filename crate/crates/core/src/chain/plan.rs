use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Sideband {
    /// `f_lo - f_in`
    #[default]
    Lower,
    /// `f_lo + f_in`
    Upper,
}

impl Sideband {
    /// Frequency of this sideband of `f_in` mixed with `f_lo`.
    pub fn apply(self, f_lo: f64, f_in: f64) -> f64 {
        match self {
            Sideband::Lower => f_lo - f_in,
            Sideband::Upper => f_lo + f_in,
        }
    }

    /// LO that puts this sideband of `f_in` at `target`.
    pub fn lo_for(self, target: f64, f_in: f64) -> f64 {
        match self {
            Sideband::Lower => target + f_in,
            Sideband::Upper => target - f_in,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConstraints {
    pub if_range: (f64, f64),
    pub stage1_passband: (f64, f64),
    pub stage2_passband: (f64, f64),
    pub mixer1_lo_range: (f64, f64),
    pub mixer2_lo_range: (f64, f64),
    #[serde(default)]
    pub stage1_sideband: Sideband,
    #[serde(default)]
    pub stage2_sideband: Sideband,
}

impl PlanConstraints {
    pub fn if_mid(&self) -> f64 {
        0.5 * (self.if_range.0 + self.if_range.1)
    }

    fn validate(&self) -> Result<()> {
        let ranges = [
            ("IF range", self.if_range),
            ("stage-1 passband", self.stage1_passband),
            ("stage-2 passband", self.stage2_passband),
            ("mixer-1 LO range", self.mixer1_lo_range),
            ("mixer-2 LO range", self.mixer2_lo_range),
        ];
        for (name, (lo, hi)) in ranges {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must satisfy 0 < low <= high, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Plan {
    pub f_if_hz: f64,
    pub f_lo1_hz: f64,
    pub f_lo2_hz: f64,
    pub stage1_hz: f64,
    pub output_hz: f64,
    pub stage1_sideband: Sideband,
    pub stage2_sideband: Sideband,
}

impl Plan {
    /// Output frequency recomputed from the LOs, the IF and the signs.
    pub fn recompute_output(&self) -> f64 {
        let s = self.stage1_sideband.apply(self.f_lo1_hz, self.f_if_hz);
        self.stage2_sideband.apply(self.f_lo2_hz, s)
    }

    /// Checks every plan invariant against `c`.
    pub fn check(&self, c: &PlanConstraints) -> Result<()> {
        let inside = |f: f64, r: (f64, f64)| f >= r.0 && f <= r.1;
        if self.recompute_output() != self.output_hz {
            return Err(Error::Planning(
                "output does not follow from the LOs".into(),
            ));
        }
        if !inside(self.stage1_hz, c.stage1_passband) {
            return Err(Error::Planning(
                "stage-1 tone outside the stage-1 passband".into(),
            ));
        }
        if !inside(self.output_hz, c.stage2_passband) {
            return Err(Error::Planning(
                "output outside the stage-2 passband".into(),
            ));
        }
        if !inside(self.f_lo1_hz, c.mixer1_lo_range) || !inside(self.f_lo2_hz, c.mixer2_lo_range) {
            return Err(Error::Planning("LO outside its mixer range".into()));
        }
        Ok(())
    }
}

// Closed interval with optionally open ends.
#[derive(Debug, Clone, Copy)]
struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    fn is_empty(&self) -> bool {
        !(self.lo <= self.hi)
    }

    fn intersect(self, o: Interval) -> Interval {
        Interval {
            lo: self.lo.max(o.lo),
            hi: self.hi.min(o.hi),
        }
    }

    // `self` minus the closed interval `o`; open ends land on the next float.
    fn minus(self, o: Interval) -> Vec<Interval> {
        if o.is_empty() || o.hi < self.lo || o.lo > self.hi {
            return vec![self];
        }
        [
            Interval {
                lo: self.lo,
                hi: o.lo.next_down(),
            },
            Interval {
                lo: o.hi.next_up(),
                hi: self.hi,
            },
        ]
        .into_iter()
        .filter(|i| !i.is_empty())
        .collect()
    }

    // Whole hertz when the interval holds one, as a synthesizer would set it.
    fn closest(&self, x: f64) -> f64 {
        let (lo, hi) = (self.lo.ceil(), self.hi.floor());
        if lo <= hi {
            x.round().clamp(lo, hi)
        } else {
            x.clamp(self.lo, self.hi)
        }
    }
}

/// LO1 that centres the chosen sideband of the mid-range IF in the stage-1
/// passband, or the nearest feasible LO1 (ties go to the lower one). The
/// result is rounded to whole hertz whenever that stays feasible.
///
/// Feasible means: the whole IF range lands inside the passband on the
/// chosen sideband, the image sideband of the whole IF range stays out of
/// it, the LO is above the IF range and inside the mixer range.
pub fn plan_lo1(c: &PlanConstraints) -> Result<f64> {
    c.validate()?;
    let (a, b) = c.if_range;
    let (p, q) = c.stage1_passband;
    let center = 0.5 * (p + q);
    let (preferred, selected, image) = match c.stage1_sideband {
        Sideband::Lower => (
            center + c.if_mid(),
            Interval {
                lo: p + b,
                hi: q + a,
            },
            Interval {
                lo: p - b,
                hi: q - a,
            },
        ),
        Sideband::Upper => (
            center - c.if_mid(),
            Interval {
                lo: p - a,
                hi: q - b,
            },
            Interval {
                lo: p + a,
                hi: q + b,
            },
        ),
    };
    if selected.is_empty() {
        return Err(Error::Planning(format!(
            "IF range [{a}, {b}] Hz is wider than the stage-1 passband [{p}, {q}] Hz"
        )));
    }
    let mixer = Interval {
        lo: c.mixer1_lo_range.0,
        hi: c.mixer1_lo_range.1,
    };
    let above_if = Interval {
        lo: b.next_up(),
        hi: f64::INFINITY,
    };
    let allowed = selected.intersect(mixer).intersect(above_if);
    if allowed.is_empty() {
        return Err(Error::Planning(format!(
            "no LO1 inside the mixer-1 range [{}, {}] Hz puts the {:?} sideband in the stage-1 passband",
            mixer.lo, mixer.hi, c.stage1_sideband
        )));
    }
    let feasible = allowed.minus(image);
    feasible
        .iter()
        .map(|i| i.closest(preferred))
        .min_by(|x, y| {
            (x - preferred)
                .abs()
                .total_cmp(&(y - preferred).abs())
                .then(x.total_cmp(y))
        })
        .ok_or_else(|| {
            Error::Planning(
                "the image sideband overlaps the stage-1 passband for every usable LO1".into(),
            )
        })
}

// `lo_for` can miss the target by an ulp once the output is recomputed;
// walk LO2 a few ulps either way until it round-trips.
fn exact_lo(sideband: Sideband, target: f64, f_in: f64) -> f64 {
    let lo = sideband.lo_for(target, f_in);
    let (mut down, mut up) = (lo, lo);
    for _ in 0..16 {
        if sideband.apply(up, f_in) == target {
            return up;
        }
        if sideband.apply(down, f_in) == target {
            return down;
        }
        up = up.next_up();
        down = down.next_down();
    }
    lo
}

/// Completes a plan by choosing LO2 for `target_hz`.
pub fn plan_lo2(target_hz: f64, f_if_hz: f64, f_lo1_hz: f64, c: &PlanConstraints) -> Result<Plan> {
    c.validate()?;
    let (p2, q2) = c.stage2_passband;
    if !(target_hz >= p2 && target_hz <= q2) {
        return Err(Error::Planning(format!(
            "target {target_hz} Hz is outside the stage-2 passband [{p2}, {q2}] Hz"
        )));
    }
    let stage1 = c.stage1_sideband.apply(f_lo1_hz, f_if_hz);
    let f_lo2 = exact_lo(c.stage2_sideband, target_hz, stage1);
    let (l2, h2) = c.mixer2_lo_range;
    if !(f_lo2 >= l2 && f_lo2 <= h2) {
        return Err(Error::Planning(format!(
            "LO2 {f_lo2} Hz is outside the mixer-2 range [{l2}, {h2}] Hz"
        )));
    }
    let plan = Plan {
        f_if_hz,
        f_lo1_hz,
        f_lo2_hz: f_lo2,
        stage1_hz: stage1,
        output_hz: c.stage2_sideband.apply(f_lo2, stage1),
        stage1_sideband: c.stage1_sideband,
        stage2_sideband: c.stage2_sideband,
    };
    plan.check(c)?;
    Ok(plan)
}

/// [`plan_lo1`] at the mid-range IF followed by [`plan_lo2`].
pub fn plan(target_hz: f64, c: &PlanConstraints) -> Result<Plan> {
    let lo1 = plan_lo1(c)?;
    plan_lo2(target_hz, c.if_mid(), lo1, c)
}
