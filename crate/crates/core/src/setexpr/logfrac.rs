//! Sets of the form `{ m : frac(theta * log2 m) in U }` where `U` is a finite
//! union of half-open arcs of the circle `[0, 1)`.
//!
//! Membership uses a floating point fast path. Queries whose fractional part
//! falls within the guard band of an arc endpoint are decided exactly:
//! `theta * log2 m >= r` holds iff `m >= threshold(r)`, and the threshold is
//! the ceiling of an integer root of a power of two.

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub const DEFAULT_GUARD_BAND: f64 = 1e-12;

/// Largest `v` for which the exact path computes `v`-th roots of `2^u`.
const MAX_ROOT_DEGREE: u64 = 1 << 14;

/// A half-open arc `[start, end)` of the circle, `0 <= start < 1`,
/// `start < end <= start + 1`. Arcs may wrap past 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Arc {
    pub start: Rational,
    pub end: Rational,
}

impl Arc {
    pub fn new(start: Rational, end: Rational) -> Result<Self> {
        let zero = Rational::zero();
        let one = Rational::one();
        if start < zero || start >= one {
            return Err(Error::invalid(format!(
                "arc start {} must lie in [0,1)",
                rational::fmt_compact(&start)
            )));
        }
        if end <= start || end > &start + &one {
            return Err(Error::invalid(format!(
                "arc [{}, {}) must satisfy start < end <= start+1",
                rational::fmt_compact(&start),
                rational::fmt_compact(&end)
            )));
        }
        Ok(Arc { start, end })
    }

    pub fn len(&self) -> Rational {
        &self.end - &self.start
    }

    /// Circle membership for a real fractional part in `[0, 1)`.
    pub fn contains_frac(&self, x: &Rational) -> bool {
        let lifted = x + Rational::one();
        (*x >= self.start && *x < self.end) || (lifted >= self.start && lifted < self.end)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogFractional {
    pub theta: Rational,
    pub arcs: Vec<Arc>,
    pub guard_band: f64,
}

/// Least `m >= 1` with `theta * log2 m >= r`, or `None` when that exceeds
/// `u64::MAX`.
pub type Threshold = Option<u64>;

impl LogFractional {
    pub fn new(theta: Rational, arcs: Vec<Arc>) -> Result<Self> {
        if !theta.is_positive() {
            return Err(Error::invalid("theta must be positive"));
        }
        if arcs.is_empty() {
            return Err(Error::invalid("logfrac needs at least one arc"));
        }
        Ok(LogFractional {
            theta,
            arcs,
            guard_band: DEFAULT_GUARD_BAND,
        })
    }

    pub fn with_guard_band(mut self, band: f64) -> Self {
        self.guard_band = band;
        self
    }

    /// Least `m >= 1` with `theta * log2 m >= r`.
    pub fn threshold(&self, r: &Rational) -> Result<Threshold> {
        let e = r / &self.theta;
        if !e.is_positive() {
            return Ok(Some(1));
        }
        // m >= 2^e with e = u/v; anything at or beyond 2^64 is out of range.
        if e >= rational::int(64) {
            return Ok(None);
        }
        let u = e.numer().to_biguint().expect("positive");
        let v = e.denom().to_u64().filter(|v| *v <= MAX_ROOT_DEGREE).ok_or(
            Error::ResourceLimit {
                what: "log-fractional root degree",
                requested: e.denom().to_u64().unwrap_or(u64::MAX),
                cap: MAX_ROOT_DEGREE,
            },
        )?;
        let shift = u.to_u64().expect("bounded by 64*v");
        let power = BigUint::one() << shift;
        let m = rational::ceil_root(&power, v as u32);
        Ok(m.to_u64())
    }

    fn exact_member(&self, m: u64) -> Result<bool> {
        let y = self.theta_f64() * (m as f64).log2();
        let base = y.floor() as i64;
        for arc in &self.arcs {
            for j in (base - 2)..=(base + 1) {
                let j = rational::int(j);
                let lo = self.threshold(&(&arc.start + &j))?;
                let hi = self.threshold(&(&arc.end + &j))?;
                let above_lo = lo.is_some_and(|lo| m >= lo);
                let below_hi = hi.is_none_or(|hi| m < hi);
                if above_lo && below_hi {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    fn theta_f64(&self) -> f64 {
        rational::to_f64(&self.theta)
    }

    pub fn member(&self, m: u64) -> Result<bool> {
        debug_assert!(m >= 1);
        let y = self.theta_f64() * (m as f64).log2();
        let frac = y - y.floor();
        let mut inside = false;
        for arc in &self.arcs {
            let start = rational::to_f64(&arc.start);
            let len = rational::to_f64(&arc.len());
            if len >= 1.0 {
                return Ok(true);
            }
            let d = (frac - start).rem_euclid(1.0);
            let near = d.min(1.0 - d) < self.guard_band || (d - len).abs() < self.guard_band;
            if near {
                return self
                    .exact_member(m)
                    .map_err(|_| Error::AmbiguousBoundary { n: m });
            }
            inside |= d < len;
        }
        Ok(inside)
    }

    /// Maximal runs `[lo, hi]` of members within `[1, horizon]`, sorted and
    /// disjoint.
    pub fn ranges(&self, horizon: u64) -> Result<Vec<(u64, u64)>> {
        let mut runs = Vec::new();
        if horizon == 0 {
            return Ok(runs);
        }
        let top = (self.theta_f64() * (horizon as f64).log2()).floor() as i64 + 1;
        for arc in &self.arcs {
            for j in -1..=top {
                let j = rational::int(j);
                let Some(lo) = self.threshold(&(&arc.start + &j))? else {
                    continue;
                };
                if lo > horizon {
                    continue;
                }
                let hi = match self.threshold(&(&arc.end + &j))? {
                    Some(h) => h.saturating_sub(1).min(horizon),
                    None => horizon,
                };
                if hi >= lo {
                    runs.push((lo.max(1), hi));
                }
            }
        }
        runs.sort_unstable();
        let mut merged: Vec<(u64, u64)> = Vec::with_capacity(runs.len());
        for (lo, hi) in runs {
            match merged.last_mut() {
                Some(last) if lo <= last.1.saturating_add(1) => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        Ok(merged)
    }

    pub fn count(&self, horizon: u64) -> Result<u64> {
        Ok(self.ranges(horizon)?.iter().map(|(lo, hi)| hi - lo + 1).sum())
    }
}

/// Circular distance between the closures of two unions of arcs; zero when
/// they touch or overlap.
pub fn circle_distance(a: &[Arc], b: &[Arc]) -> Rational {
    let one = Rational::one();
    let wrap = |x: Rational| {
        let f = x.floor();
        x - f
    };
    let mut best: Option<Rational> = None;
    for p in a {
        for q in b {
            let overlap = wrap(&q.start - &p.start) < p.len() || wrap(&p.start - &q.start) < q.len();
            if overlap {
                return Rational::zero();
            }
            // Gaps going forward from p's end to q's start and from q's end to p's start.
            let g1 = wrap(&q.start - &p.end);
            let g2 = wrap(&p.start - &q.end);
            let g1 = if g1 >= one { Rational::zero() } else { g1 };
            let g2 = if g2 >= one { Rational::zero() } else { g2 };
            let d = g1.min(g2);
            best = Some(match best {
                Some(b) if b <= d => b,
                _ => d,
            });
        }
    }
    best.unwrap_or_else(Rational::zero)
}

/// Translates every arc by `shift` modulo 1.
pub fn translate(arcs: &[Arc], shift: &Rational) -> Vec<Arc> {
    arcs.iter()
        .map(|a| {
            let s = &a.start + shift;
            let s = &s - s.floor();
            let e = &s + a.len();
            Arc { start: s, end: e }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn u0(eps: Rational) -> Vec<Arc> {
        vec![Arc::new(ratio(0, 1), ratio(1, 3) + eps).unwrap()]
    }

    fn naive(theta: f64, arcs: &[(f64, f64)], m: u64) -> bool {
        let y = theta * (m as f64).log2();
        let f = y - y.floor();
        arcs.iter().any(|(a, b)| (f >= *a && f < *b) || (f + 1.0 >= *a && f + 1.0 < *b))
    }

    #[test]
    fn threshold_matches_powers_of_two() {
        let lf = LogFractional::new(ratio(1, 2), u0(ratio(1, 24))).unwrap();
        // (1/2) log2 m >= 1  iff  m >= 4
        assert_eq!(lf.threshold(&ratio(1, 1)).unwrap(), Some(4));
        // (1/2) log2 m >= 3/8  iff  m >= 2^(3/4) = 1.68...
        assert_eq!(lf.threshold(&ratio(3, 8)).unwrap(), Some(2));
        assert_eq!(lf.threshold(&rational::int(-3)).unwrap(), Some(1));
        assert_eq!(lf.threshold(&rational::int(40)).unwrap(), None);
    }

    #[test]
    fn dyadic_endpoint_is_resolved_exactly() {
        // frac((1/2) log2 4^k) = 0 sits exactly on the endpoint 0.
        let lf = LogFractional::new(ratio(1, 2), u0(ratio(0, 1))).unwrap();
        for k in 0..30u32 {
            assert!(lf.member(4u64.pow(k)).unwrap());
        }
        // 2 * 4^k has fractional part exactly 1/2: outside [0,1/3).
        for k in 0..30u32 {
            assert!(!lf.member(2 * 4u64.pow(k)).unwrap());
        }
    }

    #[test]
    fn ranges_agree_with_float_membership() {
        let eps = ratio(1, 24);
        let arcs = vec![
            Arc::new(ratio(2, 3), ratio(1, 1) + &eps).unwrap(),
            Arc::new(ratio(1, 10), ratio(1, 5)).unwrap(),
        ];
        let lf = LogFractional::new(ratio(1, 2), arcs).unwrap();
        let horizon = 50_000;
        let runs = lf.ranges(horizon).unwrap();
        let mut from_runs = vec![false; horizon as usize + 1];
        for (lo, hi) in &runs {
            for m in *lo..=*hi {
                from_runs[m as usize] = true;
            }
        }
        for m in 1..=horizon {
            assert_eq!(from_runs[m as usize], lf.member(m).unwrap(), "m={m}");
            assert_eq!(
                lf.member(m).unwrap(),
                naive(0.5, &[(2.0 / 3.0, 1.0 + 1.0 / 24.0), (0.1, 0.2)], m),
                "m={m}"
            );
        }
        assert_eq!(lf.count(horizon).unwrap(), from_runs.iter().filter(|b| **b).count() as u64);
    }

    #[test]
    fn rejects_malformed_arcs() {
        assert!(Arc::new(ratio(1, 1), ratio(3, 2)).is_err());
        assert!(Arc::new(ratio(1, 2), ratio(1, 2)).is_err());
        assert!(Arc::new(ratio(1, 2), ratio(2, 1)).is_err());
        assert!(LogFractional::new(ratio(0, 1), u0(ratio(0, 1))).is_err());
    }

    #[test]
    fn distance_between_shifted_arcs() {
        let eps = ratio(1, 24);
        let u0 = u0(eps.clone());
        let shifted = translate(&u0, &ratio(1, 2));
        assert_eq!(circle_distance(&u0, &shifted), ratio(1, 8));
        let u2 = vec![Arc::new(ratio(2, 3), ratio(1, 1) + &eps).unwrap()];
        assert_eq!(circle_distance(&u2, &translate(&u2, &ratio(1, 2))), ratio(1, 8));
        let exact = vec![Arc::new(ratio(0, 1), ratio(1, 3)).unwrap()];
        assert_eq!(circle_distance(&exact, &translate(&exact, &ratio(1, 2))), ratio(1, 6));
        let touching = vec![Arc::new(ratio(0, 1), ratio(1, 2)).unwrap()];
        assert_eq!(
            circle_distance(&touching, &translate(&touching, &ratio(1, 2))),
            ratio(0, 1)
        );
    }
}
