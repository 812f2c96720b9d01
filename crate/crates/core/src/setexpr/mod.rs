//! Lazy descriptions of subsets of `N = {1, 2, ...}`.
//!
//! A [`SetExpr`] is an immutable expression tree. It answers membership for
//! any `n >= 1`, materializes as a [`Bitmap`] on `[1, N]`, and counts
//! `|A ∩ [1, N]|` in closed form whenever every leaf allows it.

mod dsl;
pub mod index;
pub mod logfrac;

use crate::bitmap::Bitmap;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub use dsl::parse;
pub use index::IndexExpr;
pub use logfrac::{Arc, LogFractional};

pub const DEFAULT_MAX_HORIZON: u64 = 1 << 28;

/// Indices inspected when checking the monotonicity contract of an
/// interval family.
const FAMILY_VALIDATION_INDICES: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_horizon: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_horizon: DEFAULT_MAX_HORIZON,
        }
    }
}

impl Limits {
    /// Defaults, overridden by `SUMSETS_MAX_HORIZON` when set.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(v) = std::env::var("SUMSETS_MAX_HORIZON")
            .ok()
            .and_then(|v| v.trim().parse().ok())
        {
            limits.max_horizon = v;
        }
        limits
    }

    pub fn check_horizon(&self, n: u64) -> Result<()> {
        if n > self.max_horizon {
            return Err(Error::ResourceLimit {
                what: "horizon",
                requested: n,
                cap: self.max_horizon,
            });
        }
        Ok(())
    }
}

/// `N ∩ ⋃_{n >= start} [lo(n), hi(n))`.
///
/// Contract: `lo` is strictly increasing and `hi` nondecreasing in `n` from
/// `start` on. `start` doubles as the monotonicity witness: every index from
/// `start` participates in the binary search that locates the last interval
/// whose left end is at most the query.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntervalFamily {
    pub start: u64,
    pub lo: IndexExpr,
    pub hi: IndexExpr,
}

impl IntervalFamily {
    pub fn new(start: u64, lo: IndexExpr, hi: IndexExpr) -> Result<Self> {
        let family = IntervalFamily { start, lo, hi };
        family.validate()?;
        Ok(family)
    }

    fn validate(&self) -> Result<()> {
        let ceiling = rational::from_u64(u64::MAX);
        let mut prev = (self.lo.eval(self.start)?, self.hi.eval(self.start)?);
        for n in self.start + 1..self.start + FAMILY_VALIDATION_INDICES {
            if prev.0 > ceiling {
                break;
            }
            let cur = (self.lo.eval(n)?, self.hi.eval(n)?);
            if cur.0 <= prev.0 {
                return Err(Error::invalid(format!(
                    "interval family lower end `{}` is not strictly increasing at n={n}",
                    self.lo
                )));
            }
            if cur.1 < prev.1 {
                return Err(Error::invalid(format!(
                    "interval family upper end `{}` decreases at n={n}",
                    self.hi
                )));
            }
            prev = cur;
        }
        Ok(())
    }

    /// Largest index whose interval starts at or before `x`.
    fn last_index_at_or_below(&self, x: &Rational) -> Result<Option<u64>> {
        if self.lo.eval(self.start)? > *x {
            return Ok(None);
        }
        let mut good = self.start;
        let mut step = 1u64;
        let bad = loop {
            let probe = good.saturating_add(step);
            if self.lo.eval(probe)? > *x {
                break probe;
            }
            good = probe;
            step = step.saturating_mul(2);
        };
        let (mut good, mut bad) = (good, bad);
        while bad - good > 1 {
            let mid = good + (bad - good) / 2;
            if self.lo.eval(mid)? <= *x {
                good = mid;
            } else {
                bad = mid;
            }
        }
        Ok(Some(good))
    }

    pub fn member(&self, x: u64) -> Result<bool> {
        let xr = rational::from_u64(x);
        match self.last_index_at_or_below(&xr)? {
            None => Ok(false),
            Some(n) => Ok(xr < self.hi.eval(n)?),
        }
    }

    /// The integer interval `[ceil(lo(n)), ceil(hi(n)) - 1]`, or `None` when empty.
    pub fn integer_interval(&self, n: u64) -> Result<Option<(u64, u64)>> {
        let lo = rational::ceil(&self.lo.eval(n)?);
        let hi = rational::ceil(&self.hi.eval(n)?) - 1;
        if hi < lo || hi < rational::to_bigint(1) {
            return Ok(None);
        }
        Ok(Some((
            rational::clamp_u64(&lo).max(1),
            rational::clamp_u64(&hi),
        )))
    }

    /// Disjoint sorted runs of members within `[1, horizon]`.
    pub fn runs(&self, horizon: u64) -> Result<Vec<(u64, u64)>> {
        let mut out: Vec<(u64, u64)> = Vec::new();
        let limit = rational::from_u64(horizon);
        let mut n = self.start;
        loop {
            if self.lo.eval(n)? > limit {
                break;
            }
            if let Some((lo, hi)) = self.integer_interval(n)? {
                let hi = hi.min(horizon);
                if lo <= hi {
                    match out.last_mut() {
                        Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
                        _ => out.push((lo, hi)),
                    }
                }
            }
            n += 1;
        }
        Ok(out)
    }

    pub fn count(&self, horizon: u64) -> Result<u64> {
        Ok(self.runs(horizon)?.iter().map(|(lo, hi)| hi - lo + 1).sum())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetExpr {
    Intervals(IntervalFamily),
    /// All `n >= 1` with `n ≡ residue (mod modulus)`.
    Congruence { modulus: u64, residue: u64 },
    LogFractional(LogFractional),
    /// Sorted, deduplicated, every element `>= 1`.
    Finite(Vec<u64>),
    Union(Vec<SetExpr>),
    Intersection(Box<SetExpr>, Box<SetExpr>),
    Difference(Box<SetExpr>, Box<SetExpr>),
    Complement(Box<SetExpr>),
    /// `(child + t) ∩ N`.
    Shift(Box<SetExpr>, i64),
}

impl SetExpr {
    pub fn naturals() -> Self {
        SetExpr::Congruence {
            modulus: 1,
            residue: 0,
        }
    }

    pub fn empty() -> Self {
        SetExpr::Finite(Vec::new())
    }

    pub fn congruence(modulus: u64, residue: u64) -> Result<Self> {
        if modulus == 0 || residue >= modulus {
            return Err(Error::invalid(format!(
                "congruence needs modulus >= 1 and 0 <= residue < modulus, got ({modulus},{residue})"
            )));
        }
        Ok(SetExpr::Congruence { modulus, residue })
    }

    pub fn finite(elems: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut v: Vec<u64> = elems.into_iter().collect();
        if v.contains(&0) {
            return Err(Error::invalid("finite sets live in {1, 2, ...}; 0 is not allowed"));
        }
        v.sort_unstable();
        v.dedup();
        Ok(SetExpr::Finite(v))
    }

    pub fn intervals(start: u64, lo: IndexExpr, hi: IndexExpr) -> Result<Self> {
        Ok(SetExpr::Intervals(IntervalFamily::new(start, lo, hi)?))
    }

    /// Union of all parts; nested unions are flattened.
    pub fn union_all(parts: impl IntoIterator<Item = SetExpr>) -> Self {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                SetExpr::Union(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().expect("one element")
        } else {
            SetExpr::Union(flat)
        }
    }

    pub fn union(self, other: SetExpr) -> Self {
        Self::union_all([self, other])
    }

    pub fn inter(self, other: SetExpr) -> Self {
        SetExpr::Intersection(Box::new(self), Box::new(other))
    }

    pub fn diff(self, other: SetExpr) -> Self {
        SetExpr::Difference(Box::new(self), Box::new(other))
    }

    pub fn compl(self) -> Self {
        SetExpr::Complement(Box::new(self))
    }

    pub fn shift(self, t: i64) -> Self {
        SetExpr::Shift(Box::new(self), t)
    }

    pub fn member(&self, n: u64) -> Result<bool> {
        if n == 0 {
            return Err(Error::invalid("membership is defined for n >= 1"));
        }
        self.member_unchecked(n)
    }

    fn member_unchecked(&self, n: u64) -> Result<bool> {
        Ok(match self {
            SetExpr::Intervals(f) => f.member(n)?,
            SetExpr::Congruence { modulus, residue } => n % modulus == *residue,
            SetExpr::LogFractional(l) => l.member(n)?,
            SetExpr::Finite(v) => v.binary_search(&n).is_ok(),
            SetExpr::Union(parts) => {
                for p in parts {
                    if p.member_unchecked(n)? {
                        return Ok(true);
                    }
                }
                false
            }
            SetExpr::Intersection(a, b) => a.member_unchecked(n)? && b.member_unchecked(n)?,
            SetExpr::Difference(a, b) => a.member_unchecked(n)? && !b.member_unchecked(n)?,
            SetExpr::Complement(a) => !a.member_unchecked(n)?,
            SetExpr::Shift(a, t) => {
                if *t >= 0 {
                    let t = *t as u64;
                    n > t && a.member_unchecked(n - t)?
                } else {
                    let m = n
                        .checked_add(t.unsigned_abs())
                        .ok_or_else(|| Error::invalid("shifted query overflows u64"))?;
                    a.member_unchecked(m)?
                }
            }
        })
    }

    pub fn bitmap(&self, horizon: u64) -> Result<Bitmap> {
        self.bitmap_with(horizon, &Limits::default())
    }

    /// Bit `i - 1` is set iff `i` is a member, for `1 <= i <= horizon`.
    pub fn bitmap_with(&self, horizon: u64, limits: &Limits) -> Result<Bitmap> {
        limits.check_horizon(horizon)?;
        self.materialize(horizon, limits)
    }

    fn materialize(&self, horizon: u64, limits: &Limits) -> Result<Bitmap> {
        let mut bm = Bitmap::new(horizon);
        match self {
            SetExpr::Intervals(f) => {
                for (lo, hi) in f.runs(horizon)? {
                    bm.insert_run(lo, hi);
                }
            }
            SetExpr::Congruence { modulus, residue } => {
                if *modulus == 1 {
                    bm.insert_run(1, horizon);
                } else {
                    let first = if *residue == 0 { *modulus } else { *residue };
                    let mut n = first;
                    while n <= horizon {
                        bm.insert(n);
                        n += modulus;
                    }
                }
            }
            SetExpr::LogFractional(l) => {
                for (lo, hi) in l.ranges(horizon)? {
                    bm.insert_run(lo, hi);
                }
            }
            SetExpr::Finite(v) => {
                for &n in v.iter().take_while(|&&n| n <= horizon) {
                    bm.insert(n);
                }
            }
            SetExpr::Union(parts) => {
                for p in parts {
                    bm.union_with(&p.materialize(horizon, limits)?);
                }
            }
            SetExpr::Intersection(a, b) => {
                bm = a.materialize(horizon, limits)?;
                bm.intersect_with(&b.materialize(horizon, limits)?);
            }
            SetExpr::Difference(a, b) => {
                bm = a.materialize(horizon, limits)?;
                bm.difference_with(&b.materialize(horizon, limits)?);
            }
            SetExpr::Complement(a) => {
                bm = a.materialize(horizon, limits)?;
                bm.complement();
            }
            SetExpr::Shift(a, t) => {
                if *t >= 0 {
                    let t = *t as u64;
                    if horizon > t {
                        for k in a.materialize(horizon - t, limits)?.ones() {
                            bm.insert(k + t);
                        }
                    }
                } else {
                    let s = t.unsigned_abs();
                    let wide = horizon.saturating_add(s);
                    limits.check_horizon(wide)?;
                    for k in a.materialize(wide, limits)?.ones().filter(|&k| k > s) {
                        bm.insert(k - s);
                    }
                }
            }
        }
        Ok(bm)
    }

    /// `|A ∩ [1, horizon]|` without enumeration, when every leaf permits it.
    pub fn closed_count(&self, horizon: u64) -> Option<Result<u64>> {
        Some(match self {
            SetExpr::Intervals(f) => f.count(horizon),
            SetExpr::Congruence { modulus, residue } => Ok(if *residue == 0 {
                horizon / modulus
            } else if *residue <= horizon {
                (horizon - residue) / modulus + 1
            } else {
                0
            }),
            SetExpr::LogFractional(l) => l.count(horizon),
            SetExpr::Finite(v) => Ok(v.partition_point(|&n| n <= horizon) as u64),
            SetExpr::Complement(a) => a.closed_count(horizon)?.map(|c| horizon - c),
            SetExpr::Shift(a, t) => {
                if *t >= 0 {
                    a.closed_count(horizon.saturating_sub(*t as u64))?
                } else {
                    let s = t.unsigned_abs();
                    let upper = a.closed_count(horizon.saturating_add(s))?;
                    let lower = a.closed_count(s)?;
                    upper.and_then(|u| lower.map(|l| u - l))
                }
            }
            SetExpr::Union(_) | SetExpr::Intersection(..) | SetExpr::Difference(..) => return None,
        })
    }

    pub fn count(&self, horizon: u64) -> Result<u64> {
        self.count_with(horizon, &Limits::default())
    }

    pub fn count_with(&self, horizon: u64, limits: &Limits) -> Result<u64> {
        match self.closed_count(horizon) {
            Some(c) => c,
            None => Ok(self.bitmap_with(horizon, limits)?.count()),
        }
    }

    /// Canonical DSL text.
    pub fn to_dsl(&self) -> String {
        self.to_string()
    }
}
