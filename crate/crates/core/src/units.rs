//! Exact numeric newtypes: money, data generation rates, fairness weights and
//! delay limits.

use core::fmt;
use core::ops::{Add, AddAssign, Sub};

use crate::error::{Error, Result};

/// An amount of money in fixed point.
///
/// One tick is 2^-20 micro-dollars, so per-MB prices given in micro-dollars
/// convert to exact per-unit costs for any unit size in bytes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(i64);

impl Money {
    pub const TICKS_PER_MICRO: i64 = 1 << 20;
    pub const TICKS_PER_DOLLAR: i64 = 1_000_000 * Self::TICKS_PER_MICRO;
    pub const ZERO: Money = Money(0);

    pub const fn from_ticks(ticks: i64) -> Self {
        Money(ticks)
    }

    pub const fn ticks(self) -> i64 {
        self.0
    }

    pub const fn from_micros(micros: i64) -> Self {
        Money(micros * Self::TICKS_PER_MICRO)
    }

    /// Rounds to the nearest tick. Returns `None` for non-finite or
    /// out-of-range input.
    pub fn from_dollars(dollars: f64) -> Option<Self> {
        if !dollars.is_finite() {
            return None;
        }
        let ticks = libm::round(dollars * Self::TICKS_PER_DOLLAR as f64);
        if ticks.abs() >= i64::MAX as f64 {
            return None;
        }
        Some(Money(ticks as i64))
    }

    pub fn to_dollars(self) -> f64 {
        self.0 as f64 / Self::TICKS_PER_DOLLAR as f64
    }

    /// Cost of one data unit of `unit_size_bytes` bytes at a per-MB price
    /// (1 MB = 2^20 bytes).
    pub fn unit_cost_from_price_per_mb(price_per_mb: Money, unit_size_bytes: u32) -> Money {
        let ticks = (price_per_mb.0 as i128 * unit_size_bytes as i128) >> 20;
        Money(ticks as i64)
    }

    /// `self * units`, saturating.
    pub fn times(self, units: u64) -> Money {
        let v = self.0 as i128 * units as i128;
        Money(v.clamp(i64::MIN as i128, i64::MAX as i128) as i64)
    }

    /// Number of whole units of `unit` that fit into `self`.
    pub fn whole_units(self, unit: Money) -> u64 {
        if unit.0 <= 0 || self.0 <= 0 {
            return 0;
        }
        (self.0 / unit.0) as u64
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0.saturating_add(rhs.0))
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        *self = *self + rhs;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0.saturating_sub(rhs.0))
    }
}

impl core::iter::Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "${}", self.to_dollars())
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Data units generated per second, as a reduced fraction `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GenRate {
    num: u32,
    den: u32,
}

impl GenRate {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidParameter("generation rate must be a positive fraction".into()));
        }
        let g = gcd(num as u64, den as u64) as u32;
        Ok(GenRate { num: num / g, den: den / g })
    }

    pub const fn per_second(units: u32) -> Self {
        GenRate { num: units, den: 1 }
    }

    pub fn num(self) -> u32 {
        self.num
    }

    pub fn den(self) -> u32 {
        self.den
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `floor(seconds * rate)`: whole units generated after `seconds`.
    pub fn units_after(self, seconds: u64) -> u64 {
        ((seconds as u128 * self.num as u128) / self.den as u128) as u64
    }
}

impl fmt::Display for GenRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// When a unit generated during a slot becomes transmittable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum BufferRule {
    /// Units generated during slot `t` may leave in slot `t`: cumulative
    /// transmissions through slot `t` are at most `floor((t + 1) * rate)`.
    #[default]
    SameSlot,
    /// Units generated during slot `t` leave at slot `t + 1` at the earliest:
    /// cumulative transmissions through slot `t` are at most `floor(t * rate)`.
    NextSlot,
}

impl BufferRule {
    /// Maximum cumulative number of units a sensor may have sent through `slot`.
    pub fn cap(self, rate: GenRate, slot: u32) -> u64 {
        match self {
            BufferRule::SameSlot => rate.units_after(slot as u64 + 1),
            BufferRule::NextSlot => rate.units_after(slot as u64),
        }
    }
}

/// Weight of throughput against the fairness gap, a fraction in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FairnessWeight {
    num: u32,
    den: u32,
}

impl FairnessWeight {
    const GRID: u32 = 1_000_000;

    pub const ONE: FairnessWeight = FairnessWeight { num: 1, den: 1 };
    pub const ZERO: FairnessWeight = FairnessWeight { num: 0, den: 1 };

    pub fn new(num: u32, den: u32) -> Result<Self> {
        if den == 0 || num > den {
            return Err(Error::InvalidParameter("fairness weight must lie in [0, 1]".into()));
        }
        let g = gcd(num as u64, den as u64).max(1) as u32;
        Ok(FairnessWeight { num: num / g, den: den / g })
    }

    /// Snaps `w` to the nearest multiple of 1e-6.
    pub fn from_f64(w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidParameter("fairness weight must lie in [0, 1]".into()));
        }
        let num = libm::round(w * Self::GRID as f64) as u32;
        Self::new(num, Self::GRID)
    }

    /// `0, step, 2*step, ..., 1` for `step = 1/steps`.
    pub fn grid(steps: u32) -> alloc::vec::Vec<FairnessWeight> {
        let steps = steps.max(1);
        (0..=steps).map(|k| FairnessWeight::new(k, steps).expect("k <= steps")).collect()
    }

    pub fn num(self) -> u32 {
        self.num
    }

    pub fn den(self) -> u32 {
        self.den
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialOrd for FairnessWeight {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FairnessWeight {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        (self.num as u64 * other.den as u64).cmp(&(other.num as u64 * self.den as u64))
    }
}

impl fmt::Display for FairnessWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

/// Strict upper bound on per-unit delay: `delay < bound_s * (1 + tolerance)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayLimit {
    pub bound_s: f64,
    pub tolerance: f64,
}

impl DelayLimit {
    /// Relative slack under which a delay is treated as equal to the limit.
    const SNAP: f64 = 1e-9;

    pub fn new(bound_s: f64, tolerance: f64) -> Result<Self> {
        if !(bound_s.is_finite() && bound_s > 0.0) {
            return Err(Error::InvalidParameter("delay bound must be positive".into()));
        }
        if !(tolerance.is_finite() && tolerance >= 0.0) {
            return Err(Error::InvalidParameter("delay tolerance must be non-negative".into()));
        }
        Ok(DelayLimit { bound_s, tolerance })
    }

    pub fn seconds(self) -> f64 {
        self.bound_s + self.bound_s * self.tolerance
    }

    /// Largest admissible value of `slot * rate.num - unit * rate.den`, the
    /// delay of the `unit`-th unit sent at `slot` scaled by `rate.num`.
    ///
    /// The delay is `slot - unit / rate`; the strict bound becomes an
    /// inclusive bound on an integer. Limits within a relative 1e-9 of an
    /// integer are snapped to it, so that e.g. `60 * 1.1` excludes 66.
    pub fn scaled_limit(self, rate: GenRate) -> i64 {
        let scaled = self.seconds() * rate.num() as f64;
        let snapped = scaled - Self::SNAP * scaled.abs().max(1.0);
        libm::ceil(snapped) as i64 - 1
    }

    pub fn admits(self, rate: GenRate, slot: u32, unit: u64) -> bool {
        let lhs = slot as i64 * rate.num() as i64 - unit as i64 * rate.den() as i64;
        lhs <= self.scaled_limit(rate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cost_from_one_dollar_per_mb() {
        let price = Money::from_dollars(1.0).unwrap();
        let unit = Money::unit_cost_from_price_per_mb(price, 1024);
        assert_eq!(unit.to_dollars(), 0.0009765625);
        assert_eq!(unit, Money::from_dollars(0.0009765625).unwrap());
    }

    #[test]
    fn whole_units_floor() {
        let unit = Money::from_dollars(1.0).unwrap();
        assert_eq!(Money::from_dollars(5.0).unwrap().whole_units(unit), 5);
        assert_eq!(Money::from_dollars(5.999).unwrap().whole_units(unit), 5);
        assert_eq!(Money::ZERO.whole_units(unit), 0);
    }

    #[test]
    fn rate_caps() {
        let r = GenRate::new(4, 2).unwrap();
        assert_eq!((r.num(), r.den()), (2, 1));
        assert_eq!(BufferRule::SameSlot.cap(r, 0), 2);
        assert_eq!(BufferRule::NextSlot.cap(r, 0), 0);
        let half = GenRate::new(1, 2).unwrap();
        assert_eq!(BufferRule::SameSlot.cap(half, 0), 0);
        assert_eq!(BufferRule::SameSlot.cap(half, 1), 1);
        assert_eq!(BufferRule::SameSlot.cap(half, 4), 2);
        assert!(GenRate::new(0, 1).is_err());
    }

    #[test]
    fn weight_grid_is_exact() {
        let g = FairnessWeight::grid(20);
        assert_eq!(g.len(), 21);
        assert_eq!(g[1], FairnessWeight::from_f64(0.05).unwrap());
        assert_eq!(g[10], FairnessWeight::new(1, 2).unwrap());
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(FairnessWeight::from_f64(1.5).is_err());
    }

    #[test]
    fn delay_limit_is_strict() {
        let one = GenRate::per_second(1);
        let lim = DelayLimit::new(60.0, 0.0).unwrap();
        // delay = slot - unit
        assert!(lim.admits(one, 60, 1));
        assert!(!lim.admits(one, 61, 1));
        let tol = DelayLimit::new(60.0, 0.1).unwrap();
        assert!(tol.admits(one, 66, 1));
        assert!(!tol.admits(one, 67, 1));
        let two = GenRate::per_second(2);
        // 5 - 3/2 = 3.5
        assert!(DelayLimit::new(3.6, 0.0).unwrap().admits(two, 5, 3));
        assert!(!DelayLimit::new(3.5, 0.0).unwrap().admits(two, 5, 3));
    }
}
