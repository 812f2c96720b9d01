//! Exact prefix counts and density estimates along explicit window schedules.
//!
//! Upper and lower density are limits; at finite scale they depend on which
//! windows are inspected, so every estimate here carries its schedule.

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::setexpr::{Limits, SetExpr};

/// A named, finite sequence of window endpoints `N_1 < ... < N_K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Schedule {
    /// `N_j = j * K` for `j = 1..=K`.
    Linear(u64),
    /// `N_j = 4^j` for `j = 1..=K`.
    Powers4(u32),
    /// `N_j = ceil((2 - 1/j) * 4^j) - 1`, the last integer of `[1, (2 - 1/j) 4^j)`.
    Prop41(u32),
    Explicit(Vec<u64>),
}

impl Schedule {
    /// Accepts `linear(K)`, `powers4(K)`, `prop41(K)` or an explicit list
    /// such as `[10,100]` or `10,100`.
    pub fn parse(text: &str) -> Result<Self> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let unknown = || Error::UnknownSchedule(text.to_string());
        let bracketed = t.strip_prefix('[').and_then(|s| s.strip_suffix(']'));
        let bare = (!t.is_empty() && t.chars().all(|c| c.is_ascii_digit() || c == ',')).then_some(t.as_str());
        if let Some(list) = bracketed.or(bare) {
            let windows = list
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<u64>().map_err(|_| unknown()))
                .collect::<Result<Vec<_>>>()?;
            if windows.is_empty() || windows[0] == 0 || windows.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!(
                    "explicit schedule `{text}` must list strictly increasing windows >= 1"
                )));
            }
            return Ok(Schedule::Explicit(windows));
        }
        let (name, arg) = t
            .strip_suffix(')')
            .and_then(|s| s.split_once('('))
            .ok_or_else(unknown)?;
        let k: u64 = arg.parse().map_err(|_| unknown())?;
        if k == 0 {
            return Err(unknown());
        }
        let small = || u32::try_from(k).ok().filter(|k| *k <= 31).ok_or_else(unknown);
        match name {
            "linear" => Ok(Schedule::Linear(k)),
            "powers4" => Ok(Schedule::Powers4(small()?)),
            "prop41" => Ok(Schedule::Prop41(small()?)),
            _ => Err(unknown()),
        }
    }

    pub fn windows(&self) -> Vec<u64> {
        match self {
            Schedule::Linear(k) => (1..=*k).map(|j| j * k).collect(),
            Schedule::Powers4(k) => (1..=*k).map(|j| 4u64.pow(j)).collect(),
            Schedule::Prop41(k) => (1..=*k as u64).map(prop41_window).collect(),
            Schedule::Explicit(v) => v.clone(),
        }
    }
}

/// Last integer of `[1, (2 - 1/k) * 4^k)`.
pub fn prop41_window(k: u64) -> u64 {
    let four_k = rational::from_u64(4u64.pow(k as u32));
    let end = (rational::int(2) - rational::ratio(1, k)) * four_k;
    rational::ceil_u64(&end) - 1
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Linear(k) => write!(f, "linear({k})"),
            Schedule::Powers4(k) => write!(f, "powers4({k})"),
            Schedule::Prop41(k) => write!(f, "prop41({k})"),
            Schedule::Explicit(v) => {
                let items: Vec<String> = v.iter().map(u64::to_string).collect();
                write!(f, "[{}]", items.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefixProfile {
    pub schedule: Vec<u64>,
    pub counts: Vec<u64>,
    #[serde(serialize_with = "rational::serialize_vec")]
    pub ratios: Vec<Rational>,
}

fn check_schedule(windows: &[u64]) -> Result<()> {
    if windows.is_empty() {
        return Err(Error::invalid("schedule is empty"));
    }
    if windows[0] == 0 {
        return Err(Error::invalid("window endpoints start at 1"));
    }
    if windows.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("schedule must be strictly increasing"));
    }
    Ok(())
}

/// Exact `|A ∩ [1, N_j]|` for each window. Closed-form counting is used
/// when the expression allows it; otherwise one bitmap up to the last
/// window is scanned once.
pub fn profile(expr: &SetExpr, windows: &[u64], limits: &Limits) -> Result<PrefixProfile> {
    check_schedule(windows)?;
    let counts = if expr.closed_count(1).is_some() {
        windows
            .iter()
            .map(|&n| expr.closed_count(n).expect("closed form available"))
            .collect::<Result<Vec<_>>>()?
    } else {
        profile_by_enumeration(expr, windows, limits)?
    };
    Ok(build_profile(windows, counts))
}

/// Same counts as [`profile`], always via materialization.
pub fn profile_by_enumeration(expr: &SetExpr, windows: &[u64], limits: &Limits) -> Result<Vec<u64>> {
    check_schedule(windows)?;
    let last = *windows.last().expect("nonempty");
    let bm = expr.bitmap_with(last, limits)?;
    let mut counts = Vec::with_capacity(windows.len());
    let mut running = 0u64;
    let mut prev = 0u64;
    for &n in windows {
        running += bm.count_upto(n) - bm.count_upto(prev);
        counts.push(running);
        prev = n;
    }
    Ok(counts)
}

fn build_profile(windows: &[u64], counts: Vec<u64>) -> PrefixProfile {
    let ratios = windows
        .iter()
        .zip(&counts)
        .map(|(&n, &c)| rational::ratio(c, n))
        .collect();
    PrefixProfile {
        schedule: windows.to_vec(),
        counts,
        ratios,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityKind {
    Upper,
    Lower,
    Natural,
}

/// A density value known exactly from the construction, never from data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analytic {
    pub kind: DensityKind,
    #[serde(serialize_with = "rational::serialize")]
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityEstimate {
    #[serde(serialize_with = "rational::serialize")]
    pub upper_est: Rational,
    #[serde(serialize_with = "rational::serialize")]
    pub lower_est: Rational,
    pub tail_start: usize,
    pub analytic: Option<Analytic>,
}

/// Extremes of the ratios from index `tail_start` on.
pub fn estimate(profile: &PrefixProfile, tail_start: usize, analytic: Option<Analytic>) -> DensityEstimate {
    let tail_start = tail_start.min(profile.ratios.len() - 1);
    let tail = &profile.ratios[tail_start..];
    let upper = tail.iter().max().expect("nonempty").clone();
    let lower = tail.iter().min().expect("nonempty").clone();
    DensityEstimate {
        upper_est: upper,
        lower_est: lower,
        tail_start,
        analytic,
    }
}

/// Default tail: the second half of the schedule.
pub fn default_tail_start(len: usize) -> usize {
    len / 2
}

/// Density that follows from the shape of the expression alone
/// (progressions, finite sets, and complements or shifts of those).
pub fn structural_density(expr: &SetExpr) -> Option<Rational> {
    match expr {
        SetExpr::Congruence { modulus, .. } => Some(rational::ratio(1, *modulus)),
        SetExpr::Finite(_) => Some(Rational::zero()),
        SetExpr::Complement(a) => structural_density(a).map(|d| Rational::one() - d),
        SetExpr::Shift(a, _) => structural_density(a),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub expr: String,
    pub schedule: String,
    pub windows: Vec<u64>,
    pub counts: Vec<u64>,
    #[serde(serialize_with = "rational::serialize_vec")]
    pub ratios: Vec<Rational>,
    #[serde(serialize_with = "rational::serialize")]
    pub upper_est: Rational,
    #[serde(serialize_with = "rational::serialize")]
    pub lower_est: Rational,
    pub tail_start: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<Analytic>,
}

/// Profile plus estimate on a registered schedule. `analytic` is attached
/// verbatim; when absent, a structural density is used if one exists.
pub fn density_along(
    expr: &SetExpr,
    schedule: &Schedule,
    analytic: Option<Analytic>,
    limits: &Limits,
) -> Result<(PrefixProfile, DensityEstimate)> {
    let windows = schedule.windows();
    let prof = profile(expr, &windows, limits)?;
    let analytic = analytic.or_else(|| {
        structural_density(expr).map(|value| Analytic {
            kind: DensityKind::Natural,
            value,
        })
    });
    let est = estimate(&prof, default_tail_start(windows.len()), analytic);
    Ok((prof, est))
}

pub fn density_report(
    expr: &SetExpr,
    schedule: &Schedule,
    analytic: Option<Analytic>,
    limits: &Limits,
) -> Result<DensityReport> {
    let (prof, est) = density_along(expr, schedule, analytic, limits)?;
    Ok(DensityReport {
        expr: expr.to_dsl(),
        schedule: schedule.to_string(),
        windows: prof.schedule,
        counts: prof.counts,
        ratios: prof.ratios,
        upper_est: est.upper_est,
        lower_est: est.lower_est,
        tail_start: est.tail_start,
        analytic: est.analytic,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftCheck {
    pub t: u64,
    /// `max_M |count(A ∪ (A+t), M) - 2 count(A, M)|`.
    pub max_deviation: u64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCalculusReport {
    pub horizon: u64,
    pub additive_holds: bool,
    /// First `M` where `count(e1 ∪ e2, M) != count(e1, M) + count(e2, M)`.
    pub first_additive_failure: Option<u64>,
    #[serde(serialize_with = "rational::serialize")]
    pub union_ratio: Rational,
    pub shift: Option<ShiftCheck>,
}

/// Finite layer of sub-/super-additivity for disjoint sets and of the
/// doubling rule for disjoint translates.
pub fn check_density_calculus(
    e1: &SetExpr,
    e2: &SetExpr,
    horizon: u64,
    limits: &Limits,
) -> Result<DensityCalculusReport> {
    let a = e1.bitmap_with(horizon, limits)?;
    let b = e2.bitmap_with(horizon, limits)?;
    if let Some(element) = a.first_common(&b) {
        return Err(Error::DisjointnessViolated { element });
    }
    // The union is materialized from its own expression, not from `a | b`.
    let u = e1.clone().union(e2.clone()).bitmap_with(horizon, limits)?;
    let (mut ca, mut cb, mut cu) = (0u64, 0u64, 0u64);
    let mut first_failure = None;
    for m in 1..=horizon {
        ca += a.contains(m) as u64;
        cb += b.contains(m) as u64;
        cu += u.contains(m) as u64;
        if first_failure.is_none() && cu != ca + cb {
            first_failure = Some(m);
        }
    }
    let shift = match e2 {
        SetExpr::Shift(inner, t) if *t > 0 && **inner == *e1 => {
            Some(check_shift_bound(e1, *t as u64, horizon, limits)?)
        }
        _ => None,
    };
    Ok(DensityCalculusReport {
        horizon,
        additive_holds: first_failure.is_none(),
        first_additive_failure: first_failure,
        union_ratio: rational::ratio(cu, horizon),
        shift,
    })
}

/// Requires `A ∩ (A + t) = ∅` on the horizon.
pub fn check_shift_bound(expr: &SetExpr, t: u64, horizon: u64, limits: &Limits) -> Result<ShiftCheck> {
    if t == 0 {
        return Err(Error::invalid("shift must be positive"));
    }
    let a = expr.bitmap_with(horizon, limits)?;
    let shifted = expr.clone().shift(t as i64).bitmap_with(horizon, limits)?;
    if let Some(element) = a.first_common(&shifted) {
        return Err(Error::DisjointnessViolated { element });
    }
    let both = expr
        .clone()
        .union(expr.clone().shift(t as i64))
        .bitmap_with(horizon, limits)?;
    let (mut ca, mut cu) = (0i64, 0i64);
    let mut worst = 0u64;
    for m in 1..=horizon {
        ca += a.contains(m) as i64;
        cu += both.contains(m) as i64;
        worst = worst.max((cu - 2 * ca).unsigned_abs());
    }
    Ok(ShiftCheck {
        t,
        max_deviation: worst,
        holds: worst <= t,
    })
}

/// `S_N = Σ_{n=1}^{N} 1 / (n 4^{N-n})` for `N = 1..=k`.
pub fn tail_sum_check(k: u64) -> Vec<Rational> {
    (1..=k)
        .map(|big_n| {
            (1..=big_n)
                .map(|n| {
                    let pow = num_bigint::BigInt::from(4u32).pow((big_n - n) as u32);
                    Rational::new(num_bigint::BigInt::one(), pow * num_bigint::BigInt::from(n))
                })
                .fold(Rational::zero(), |acc, x| acc + x)
        })
        .collect()
}

/// Minimum and maximum of `|A ∩ [M, M+L-1]| / L` over all windows inside
/// `[1, horizon]`. Carries no analytic claim.
pub fn banach_window_extrema(
    expr: &SetExpr,
    window: u64,
    horizon: u64,
    limits: &Limits,
) -> Result<(Rational, Rational)> {
    if window == 0 || window > horizon {
        return Err(Error::invalid("window length must be in 1..=horizon"));
    }
    let bm = expr.bitmap_with(horizon, limits)?;
    let mut count = bm.count_upto(window);
    let (mut lo, mut hi) = (count, count);
    for start in 2..=horizon - window + 1 {
        count = count + bm.contains(start + window - 1) as u64 - bm.contains(start - 1) as u64;
        lo = lo.min(count);
        hi = hi.max(count);
    }
    Ok((rational::ratio(lo, window), rational::ratio(hi, window)))
}
