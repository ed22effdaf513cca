//! Gait parameterization: phase offsets, speed-dependent stride timing,
//! direction-aware per-leg phase clocks and gait-family classification.
//!
//! A gait is a periodic orbit over one stride of period `T`. Each leg carries
//! a phase offset `theta` so that its own cycle position is the shared clock
//! shifted by that offset. Three offsets are free; the right hind leg is the
//! reference with `theta = 0`, and together with the commanded forward
//! velocity they condense a footfall sequence into four numbers.

use crate::error::Error;
use crate::util::{circular_distance, wrap_unit};
use crate::Result;

/// The four legs in their canonical order. All per-leg arrays in the crate
/// are indexed in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LegId {
    /// Left hind.
    Lh,
    /// Left front.
    Lf,
    /// Right front.
    Rf,
    /// Right hind (the phase reference, offset 0).
    Rh,
}

impl LegId {
    /// Canonical ordering used for every per-leg array.
    pub const ALL: [LegId; 4] = [LegId::Lh, LegId::Lf, LegId::Rf, LegId::Rh];

    /// Index of this leg in the canonical ordering.
    pub const fn index(self) -> usize {
        match self {
            LegId::Lh => 0,
            LegId::Lf => 1,
            LegId::Rf => 2,
            LegId::Rh => 3,
        }
    }

    /// Short uppercase label (LH, LF, RF, RH).
    pub const fn label(self) -> &'static str {
        match self {
            LegId::Lh => "LH",
            LegId::Lf => "LF",
            LegId::Rf => "RF",
            LegId::Rh => "RH",
        }
    }
}

impl std::fmt::Display for LegId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Condensed gait representation: three free phase offsets plus the
/// commanded forward velocity. The right hind offset is fixed at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitSpec {
    pub theta_lh: f64,
    pub theta_lf: f64,
    pub theta_rf: f64,
    /// Commanded forward velocity in m/s; negative commands run the clock
    /// backwards (time-reversal symmetry).
    pub v_cmd: f64,
}

impl GaitSpec {
    /// Build a gait spec, validating that every offset lies in `[0, 1)`.
    pub fn new(theta_lh: f64, theta_lf: f64, theta_rf: f64, v_cmd: f64) -> Result<Self> {
        for (name, v) in [
            ("theta_lh", theta_lh),
            ("theta_lf", theta_lf),
            ("theta_rf", theta_rf),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::param(name, "phase offset must lie in [0, 1)", v));
            }
        }
        if !v_cmd.is_finite() {
            return Err(Error::param("v_cmd", "must be finite", v_cmd));
        }
        Ok(GaitSpec {
            theta_lh,
            theta_lf,
            theta_rf,
            v_cmd,
        })
    }

    /// The canonical phase set for `family` at the given command velocity.
    pub fn named(family: GaitFamily, v_cmd: f64) -> Result<Self> {
        let [lh, lf, rf] = named_gait(family)?;
        GaitSpec::new(lh, lf, rf, v_cmd)
    }

    /// Per-leg offsets in canonical order (the right hind offset is 0).
    pub fn offsets(&self) -> [f64; 4] {
        [self.theta_lh, self.theta_lf, self.theta_rf, 0.0]
    }

    pub fn offset(&self, leg: LegId) -> f64 {
        self.offsets()[leg.index()]
    }

    /// Replace the commanded velocity, keeping the phase set.
    pub fn with_command(&self, v_cmd: f64) -> Self {
        GaitSpec { v_cmd, ..*self }
    }

    pub fn direction(&self) -> Direction {
        Direction::from_command(self.v_cmd)
    }
}

/// Gait families distinguished by which leg pairs share a phase offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaitFamily {
    Pronk,
    Trot,
    Bound,
    HalfBound,
    Gallop,
    Other,
}

impl std::fmt::Display for GaitFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GaitFamily::Pronk => "pronk",
            GaitFamily::Trot => "trot",
            GaitFamily::Bound => "bound",
            GaitFamily::HalfBound => "half-bound",
            GaitFamily::Gallop => "gallop",
            GaitFamily::Other => "other",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for GaitFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pronk" => Ok(GaitFamily::Pronk),
            "trot" => Ok(GaitFamily::Trot),
            "bound" => Ok(GaitFamily::Bound),
            "half-bound" | "halfbound" | "half_bound" => Ok(GaitFamily::HalfBound),
            "gallop" => Ok(GaitFamily::Gallop),
            other => Err(Error::UnknownGait(other.to_string())),
        }
    }
}

/// Stride timing derived from the command velocity: period, duty factor and
/// the per-episode noise sample that perturbed them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrideTiming {
    /// Stride period in seconds, > 0.
    pub period: f64,
    /// Fraction of the stride spent in stance, in (0, 1).
    pub duty: f64,
    /// Uniform noise sample in [-1, 1] used for both curves.
    pub noise: f64,
}

impl StrideTiming {
    /// Evaluate both fitted curves for one command velocity and noise draw.
    pub fn from_command(v_cmd: f64, noise: f64) -> Result<Self> {
        Ok(StrideTiming {
            period: stride_period(v_cmd, noise)?,
            duty: duty_factor(v_cmd, noise)?,
            noise,
        })
    }
}

fn check_noise(delta: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&delta) {
        return Err(Error::param("delta", "noise must lie in [-1, 1]", delta));
    }
    Ok(())
}

/// Stride period in seconds for a command velocity, from the fitted
/// passive-dynamics curve `T = 0.26 (1 + 0.25 d |v|) exp(-0.98 |v|)`.
pub fn stride_period(v_cmd: f64, delta: f64) -> Result<f64> {
    check_noise(delta)?;
    let v = v_cmd.abs();
    Ok(0.26 * (1.0 + 0.25 * delta * v) * (-0.98 * v).exp())
}

/// Duty factor for a command velocity, from the fitted curve
/// `beta = 0.56 (1 + 0.25 d |v|) exp(-0.69 |v|)`, clamped to (0.01, 0.99)
/// so the periodic indicators never see a degenerate stance window.
pub fn duty_factor(v_cmd: f64, delta: f64) -> Result<f64> {
    check_noise(delta)?;
    let v = v_cmd.abs();
    let beta = 0.56 * (1.0 + 0.25 * delta * v) * (-0.69 * v).exp();
    Ok(beta.clamp(0.01, 0.99))
}

/// Clock direction, taken from the sign of the commanded velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    /// Backward for strictly negative commands, forward otherwise.
    pub fn from_command(v_cmd: f64) -> Self {
        if v_cmd < 0.0 {
            Direction::Backward
        } else {
            Direction::Forward
        }
    }

    pub const fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

/// Phase of one leg at simulation time `t`.
///
/// Forward commands use `mod(t/T + theta, 1)`. Backward commands run the
/// same clock in reverse, `mod(-(t/T + theta), 1)`, so that backward motion
/// is the time-reversed forward motion.
pub fn leg_phase(t: f64, period: f64, offset: f64, direction: Direction) -> Result<f64> {
    if !(period > 0.0) {
        return Err(Error::param("period", "must be positive", period));
    }
    debug_assert!(t >= 0.0, "leg_phase expects nonnegative time");
    let raw = t / period + offset;
    Ok(wrap_unit(direction.sign() * raw))
}

/// Direction-aware per-leg clock.
///
/// The clock accumulates normalized stride time so the period may change
/// between advances (command changes mid-run) without a phase jump. With a
/// constant period the phases equal [`leg_phase`] exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseClock {
    offsets: [f64; 4],
    direction: Direction,
    /// Accumulated t/T.
    base: f64,
}

impl PhaseClock {
    /// A clock at time zero for the given gait, direction from the command.
    pub fn new(spec: &GaitSpec) -> Self {
        PhaseClock {
            offsets: spec.offsets(),
            direction: spec.direction(),
            base: 0.0,
        }
    }

    /// A clock evaluated at absolute time `t` under a constant period.
    pub fn at_time(spec: &GaitSpec, t: f64, period: f64) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::param("period", "must be positive", period));
        }
        Ok(PhaseClock {
            offsets: spec.offsets(),
            direction: spec.direction(),
            base: t / period,
        })
    }

    /// Advance the clock by `dt` seconds of a stride with period `period`.
    pub fn advance(&mut self, dt: f64, period: f64) -> Result<()> {
        if !(period > 0.0) {
            return Err(Error::param("period", "must be positive", period));
        }
        self.base += dt / period;
        // Keep the accumulator bounded over long runs.
        if self.base >= 1e6 {
            self.base = wrap_unit(self.base);
        }
        Ok(())
    }

    pub fn set_direction(&mut self, direction: Direction) {
        self.direction = direction;
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Phase of one leg, in [0, 1).
    pub fn phase(&self, leg: LegId) -> f64 {
        wrap_unit(self.direction.sign() * (self.base + self.offsets[leg.index()]))
    }

    /// All four phases in canonical leg order.
    pub fn phases(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for leg in LegId::ALL {
            out[leg.index()] = self.phase(leg);
        }
        out
    }
}

/// Clock input for the observation: `sin(2 pi phi_i)` per leg in canonical
/// order, each in [-1, 1].
pub fn clock_encoding(clock: &PhaseClock) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (o, phi) in out.iter_mut().zip(clock.phases()) {
        *o = (std::f64::consts::TAU * phi).sin();
    }
    out
}

/// The predefined phase sets `[theta_lh, theta_lf, theta_rf]` for the four
/// trained gait families. Other families have no predefined set.
pub fn named_gait(family: GaitFamily) -> Result<[f64; 3]> {
    match family {
        GaitFamily::Trot => Ok([0.50, 0.0, 0.50]),
        GaitFamily::Bound => Ok([0.0, 0.50, 0.50]),
        GaitFamily::HalfBound => Ok([0.0, 0.40, 0.60]),
        GaitFamily::Gallop => Ok([0.20, 0.50, 0.70]),
        other => Err(Error::UnknownGait(other.to_string())),
    }
}

/// Classify a phase set into a gait family using circular-distance
/// comparisons at tolerance `eps`.
///
/// Pronking synchronizes all four legs; trotting the two diagonal pairs
/// (with the diagonals distinct); bounding the front pair and the hind pair
/// (front and hind distinct); half-bounding exactly one of the front/hind
/// pairs; galloping no pair at all. Anything else is `Other`.
pub fn classify_gait(spec: &GaitSpec, eps: f64) -> GaitFamily {
    assert!(eps > 0.0, "classification tolerance must be positive");
    let th = spec.offsets();
    let sync = |a: LegId, b: LegId| circular_distance(th[a.index()], th[b.index()]) <= eps;

    let front = sync(LegId::Lf, LegId::Rf);
    let hind = sync(LegId::Lh, LegId::Rh);
    let diag_a = sync(LegId::Lf, LegId::Rh);
    let diag_b = sync(LegId::Rf, LegId::Lh);
    let all = front && hind && diag_a && diag_b;

    if all {
        GaitFamily::Pronk
    } else if diag_a && diag_b && !front {
        GaitFamily::Trot
    } else if front && hind {
        GaitFamily::Bound
    } else if front != hind {
        GaitFamily::HalfBound
    } else if !front && !hind && !diag_a && !diag_b {
        GaitFamily::Gallop
    } else {
        GaitFamily::Other
    }
}
