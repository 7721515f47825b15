//! Trajectories `L_x(q) = max{log|Q| − q, log|Qξ − P| + q}` of single lattice points.

use num_traits::Zero;

use crate::arith::{LatticePoint, LogCoord, Rational};
use crate::error::{Error, Result};

/// A V-shaped trajectory with slopes ±1, or a single ray when one branch is degenerate.
///
/// `falling` is `log|Q|` (absent when `Q = 0`); `rising` is `log|Qξ − P|` (absent when
/// `Qξ = P`). An absent branch behaves as `−∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    point: LatticePoint,
    delta: Rational,
    falling: Option<LogCoord>,
    rising: Option<LogCoord>,
}

impl Trajectory {
    /// The trajectory of `x` (identical to that of `−x`) for the body `C_ξ`.
    pub fn new(point: &LatticePoint, xi: &Rational) -> Result<Self> {
        if point.is_zero() {
            return Err(Error::ZeroPoint);
        }
        let point = point.normalized();
        let delta = point.error(xi);
        let falling = LogCoord::log_abs_int(&point.q);
        let rising = LogCoord::log_abs(&delta);
        Ok(Self {
            point,
            delta,
            falling,
            rising,
        })
    }

    pub fn point(&self) -> &LatticePoint {
        &self.point
    }

    /// `|Qξ − P|`.
    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    pub fn falling_level(&self) -> Option<&LogCoord> {
        self.falling.as_ref()
    }

    pub fn rising_level(&self) -> Option<&LogCoord> {
        self.rising.as_ref()
    }

    /// `log|Q| − q`.
    pub fn falling_at(&self, q: &LogCoord) -> Option<LogCoord> {
        self.falling.as_ref().map(|f| f - q)
    }

    /// `log|Qξ − P| + q`.
    pub fn rising_at(&self, q: &LogCoord) -> Option<LogCoord> {
        self.rising.as_ref().map(|r| r + q)
    }

    /// `L_x(q)`.
    pub fn evaluate(&self, q: &LogCoord) -> LogCoord {
        match (self.falling_at(q), self.rising_at(q)) {
            (Some(f), Some(r)) => f.max(r),
            (Some(v), None) | (None, Some(v)) => v,
            (None, None) => unreachable!("nonzero point has a branch"),
        }
    }

    /// Slope of `L_x` immediately to the right of `q`.
    pub fn slope_after(&self, q: &LogCoord) -> i8 {
        match (self.falling_at(q), self.rising_at(q)) {
            (Some(f), Some(r)) if f > r => -1,
            (Some(_), None) => -1,
            _ => 1,
        }
    }

    /// Where the two branches meet: ratio `Q/Δ`. Absent for a single ray.
    pub fn breakpoint(&self) -> Option<LogCoord> {
        if self.falling.is_none() || self.delta.is_zero() {
            return None;
        }
        let q = Rational::from_integer(self.point.q.clone());
        Some(LogCoord::from_ratio_unchecked(q / &self.delta))
    }

    /// Minimum value `log √(QΔ)`, attained at the breakpoint: ratio `QΔ`.
    pub fn minimum(&self) -> Option<LogCoord> {
        self.breakpoint().map(|b| self.evaluate(&b))
    }
}

/// Meeting point of the rising branch of `rising` and the falling branch of `falling`:
/// abscissa ratio `Q_f/Δ_r`, value ratio `Q_f·Δ_r`.
///
/// The meeting must happen where both branches are the active ones, i.e. at or after the
/// breakpoint of `rising` and at or before the breakpoint of `falling`.
pub fn crossing(rising: &Trajectory, falling: &Trajectory) -> Result<(LogCoord, LogCoord)> {
    let (q, v) = crossing_unchecked(rising, falling)?;
    if let Some(b) = rising.breakpoint() {
        if q < b {
            return Err(Error::Precondition(format!(
                "crossing {q} precedes the breakpoint {b} of {}",
                rising.point()
            )));
        }
    }
    if let Some(b) = falling.breakpoint() {
        if q > b {
            return Err(Error::Precondition(format!(
                "crossing {q} follows the breakpoint {b} of {}",
                falling.point()
            )));
        }
    }
    Ok((q, v))
}

pub(crate) fn crossing_unchecked(
    rising: &Trajectory,
    falling: &Trajectory,
) -> Result<(LogCoord, LogCoord)> {
    if rising.delta.is_zero() {
        return Err(Error::DegenerateBranch("rising trajectory has Δ = 0"));
    }
    if falling.point.q.is_zero() {
        return Err(Error::DegenerateBranch("falling trajectory has Q = 0"));
    }
    let q_f = Rational::from_integer(falling.point.q.clone());
    let q = LogCoord::from_ratio_unchecked(&q_f / &rising.delta);
    let v = LogCoord::from_ratio_unchecked(q_f * &rising.delta);
    Ok((q, v))
}

/// Whether `upper(q) ≥ lower(q)` for every `q ≥ 0`.
///
/// The difference of two ±1 V-shapes is piecewise linear with kinks only at their
/// breakpoints, so it suffices to test `q = 0`, each breakpoint in `[0, ∞)` and the
/// behaviour after the last breakpoint.
pub fn dominates(upper: &Trajectory, lower: &Trajectory) -> bool {
    let zero = LogCoord::zero();
    let mut probes = vec![zero.clone()];
    probes.extend(
        [upper.breakpoint(), lower.breakpoint()]
            .into_iter()
            .flatten()
            .filter(|b| *b > zero),
    );
    if probes.iter().any(|q| upper.evaluate(q) < lower.evaluate(q)) {
        return false;
    }
    // Eventually upper has slope −1 and lower slope +1: the gap closes and flips.
    !(upper.rising.is_none() && lower.rising.is_some())
}
