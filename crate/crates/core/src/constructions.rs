//! Built-in sets and colorings with their exact density values, plus the
//! verifiers that exercise them: gaps, colorings and the ratio obstruction.

use std::time::Duration;

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::density::{self, Analytic, DensityKind, Schedule};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::search::{self, Mode, SearchConfig};
use crate::setexpr::{self, logfrac, Limits, SetExpr};

pub const KEYS: &[&str] = &[
    "P41_A",
    "P41_Aprime",
    "P42_A1",
    "P42_A2",
    "P42_A",
    "P42_Aprime",
    "P42_Atilde",
    "P51_A",
    "P51_A0",
    "P51_A1",
    "P51_A2",
    "P51_Aprime",
    "COLOR3",
];

/// Default overlap of the three arcs in the syndetic construction.
pub fn default_epsilon() -> Rational {
    rational::ratio(1, 24)
}

const P41_A: &str = "intervals(n>=1; 4^n, (2-1/n)*4^n)";
const P42_A2: &str = "intervals(n>=1; (2+1/n)*4^n, 4^(n+1))";

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AnalyticDensities {
    #[serde(serialize_with = "rational::serialize_opt", skip_serializing_if = "Option::is_none")]
    pub upper: Option<Rational>,
    #[serde(serialize_with = "rational::serialize_opt", skip_serializing_if = "Option::is_none")]
    pub lower: Option<Rational>,
    #[serde(serialize_with = "rational::serialize_opt", skip_serializing_if = "Option::is_none")]
    pub natural: Option<Rational>,
    #[serde(serialize_with = "rational::serialize_opt", skip_serializing_if = "Option::is_none")]
    pub lower_banach: Option<Rational>,
}

impl AnalyticDensities {
    /// The value to attach to a prefix-density profile, if any.
    pub fn primary(&self) -> Option<Analytic> {
        let pick = |kind, v: &Option<Rational>| v.clone().map(|value| Analytic { kind, value });
        pick(DensityKind::Natural, &self.natural)
            .or_else(|| pick(DensityKind::Upper, &self.upper))
            .or_else(|| pick(DensityKind::Lower, &self.lower))
    }
}

/// A machine-checkable statement attached to a built-in.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "claim", rename_all = "snake_case")]
pub enum Claim {
    /// Ratios along `schedule` stay within `1/j` of `value` at window `j`
    /// from the tail on.
    Density {
        kind: DensityKind,
        #[serde(serialize_with = "rational::serialize")]
        value: Rational,
        schedule: &'static str,
    },
    /// Every window of length `d + 1` meets the set.
    GapAtMost { d: u64 },
    /// `2b + t` and `b + b' + t` are never both members for large `b`.
    Obstruction { components: Vec<String> },
    /// Witnesses through a fixed element do not grow between the horizons
    /// `N / 4` and `N`; with a modulus, each residue class is searched
    /// separately.
    BoundedWitness { t: Vec<u64>, modulus: Option<u64> },
    /// The classes partition `N` and each has bounded gaps.
    SyndeticPartition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coloring {
    pub classes: Vec<SetExpr>,
}

impl Coloring {
    pub fn new(classes: Vec<SetExpr>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::invalid("a coloring needs at least one class"));
        }
        Ok(Coloring { classes })
    }

    pub fn r(&self) -> usize {
        self.classes.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Set(SetExpr),
    Coloring(Coloring),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedConstruction {
    pub key: &'static str,
    pub body: Body,
    pub analytic: AnalyticDensities,
    pub claims: Vec<Claim>,
}

impl NamedConstruction {
    pub fn r(&self) -> usize {
        match &self.body {
            Body::Set(_) => 1,
            Body::Coloring(c) => c.r(),
        }
    }

    pub fn set(&self) -> Result<&SetExpr> {
        match &self.body {
            Body::Set(e) => Ok(e),
            Body::Coloring(_) => Err(Error::invalid(format!("`{}` is a coloring, not a set", self.key))),
        }
    }

    pub fn coloring(&self) -> Result<&Coloring> {
        match &self.body {
            Body::Coloring(c) => Ok(c),
            Body::Set(_) => Err(Error::invalid(format!("`{}` is a set, not a coloring", self.key))),
        }
    }

    pub fn dsl(&self) -> Vec<String> {
        match &self.body {
            Body::Set(e) => vec![e.to_dsl()],
            Body::Coloring(c) => c.classes.iter().map(SetExpr::to_dsl).collect(),
        }
    }
}

fn dsl(text: &str) -> SetExpr {
    setexpr::parse(text).expect("built-in DSL text is valid")
}

fn cong(m: u64, r: u64) -> SetExpr {
    SetExpr::congruence(m, r).expect("valid congruence")
}

/// `{m : {log2(m) / 2} ∈ U_i}` with `U_0 = [0, 1/3 + ε)`,
/// `U_1 = [1/3, 2/3 + ε)` and `U_2 = [2/3, 1 + ε)`.
pub fn log_component(i: u64, eps: &Rational) -> Result<SetExpr> {
    if i > 2 {
        return Err(Error::invalid("component index must be 0, 1 or 2"));
    }
    let start = rational::ratio(i, 3);
    let end = rational::ratio(i + 1, 3) + eps;
    let arc = logfrac::Arc::new(start, end)?;
    Ok(SetExpr::LogFractional(logfrac::LogFractional::new(rational::ratio(1, 2), vec![arc])?))
}

fn check_epsilon(eps: &Rational) -> Result<()> {
    if eps.is_negative() || *eps >= rational::ratio(1, 12) {
        return Err(Error::invalid(format!(
            "epsilon must satisfy 0 <= epsilon < 1/12, got {}",
            rational::fmt_compact(eps)
        )));
    }
    Ok(())
}

/// `(A_0 ∩ 3N + a) ∪ (A_1 ∩ 3N + b) ∪ (A_2 ∩ 3N + c)` for residues `[a, b, c]`.
fn mod3_mix(residues: [u64; 3], eps: &Rational) -> Result<SetExpr> {
    let parts = residues
        .iter()
        .enumerate()
        .map(|(i, &r)| Ok(log_component(i as u64, eps)?.inter(cong(3, r))))
        .collect::<Result<Vec<_>>>()?;
    Ok(SetExpr::union_all(parts))
}

pub fn p51_a(eps: &Rational) -> Result<SetExpr> {
    check_epsilon(eps)?;
    mod3_mix([0, 1, 2], eps)
}

pub fn color3() -> Coloring {
    let zero = Rational::zero();
    let classes = [[0, 1, 2], [2, 0, 1], [1, 2, 0]]
        .into_iter()
        .map(|r| mod3_mix(r, &zero).expect("valid arcs"))
        .collect();
    Coloring { classes }
}

fn p42_a() -> SetExpr {
    dsl(P41_A).inter(cong(2, 0)).union(dsl(P42_A2).inter(cong(2, 1)))
}

fn p42_atilde() -> SetExpr {
    dsl(P41_A).inter(cong(2, 1)).union(dsl(P42_A2).inter(cong(2, 0)))
}

/// `{P42_A, P42_Atilde ∪ (N \ (P42_A ∪ P42_Atilde))}`.
pub fn p42_two_coloring() -> Coloring {
    let a = p42_a();
    let at = p42_atilde();
    let rest = a.clone().union(at.clone()).compl();
    Coloring {
        classes: vec![a, at.union(rest)],
    }
}

pub fn get(key: &str) -> Result<NamedConstruction> {
    get_with(key, None)
}

/// Built-in by key; `eps` overrides the default overlap for the `P51_*` keys.
pub fn get_with(key: &str, eps: Option<Rational>) -> Result<NamedConstruction> {
    let eps = eps.unwrap_or_else(default_epsilon);
    let r = rational::ratio;
    let density = |kind, value, schedule| Claim::Density { kind, value, schedule };
    let obstruction = |c: &[&str]| Claim::Obstruction {
        components: c.iter().map(|s| s.to_string()).collect(),
    };
    let bounded = |modulus| Claim::BoundedWitness { t: vec![0, 1], modulus };
    let bounded_t0 = |modulus| Claim::BoundedWitness { t: vec![0], modulus };
    let (key, body, analytic, claims): (&'static str, _, _, _) = match key {
        "P41_A" => (
            "P41_A",
            Body::Set(dsl(P41_A)),
            AnalyticDensities { upper: Some(r(2, 3)), ..Default::default() },
            vec![
                density(DensityKind::Upper, r(2, 3), "prop41"),
                obstruction(&["P41_A"]),
                bounded(None),
            ],
        ),
        "P41_Aprime" => (
            "P41_Aprime",
            Body::Set(dsl(P41_A).union(cong(2, 1))),
            AnalyticDensities { upper: Some(r(5, 6)), ..Default::default() },
            vec![density(DensityKind::Upper, r(5, 6), "prop41"), bounded_t0(Some(2))],
        ),
        "P42_A1" => (
            "P42_A1",
            Body::Set(dsl(P41_A)),
            AnalyticDensities::default(),
            vec![obstruction(&["P42_A1"])],
        ),
        "P42_A2" => (
            "P42_A2",
            Body::Set(dsl(P42_A2)),
            AnalyticDensities::default(),
            vec![obstruction(&["P42_A2"])],
        ),
        "P42_A" => (
            "P42_A",
            Body::Set(p42_a()),
            AnalyticDensities { natural: Some(r(1, 2)), ..Default::default() },
            vec![
                density(DensityKind::Natural, r(1, 2), "powers4"),
                obstruction(&["P42_A1", "P42_A2"]),
                bounded(Some(2)),
            ],
        ),
        "P42_Aprime" => (
            "P42_Aprime",
            Body::Set(dsl(P41_A).diff(cong(4, 0)).union(dsl(P42_A2).diff(cong(4, 2)))),
            AnalyticDensities { natural: Some(r(3, 4)), ..Default::default() },
            vec![
                density(DensityKind::Natural, r(3, 4), "powers4"),
                obstruction(&["P42_A1", "P42_A2"]),
                bounded_t0(Some(4)),
            ],
        ),
        "P42_Atilde" => (
            "P42_Atilde",
            Body::Set(p42_atilde()),
            AnalyticDensities { natural: Some(r(1, 2)), ..Default::default() },
            vec![obstruction(&["P42_A1", "P42_A2"]), bounded(Some(2))],
        ),
        "P51_A" => (
            "P51_A",
            Body::Set(p51_a(&eps)?),
            AnalyticDensities::default(),
            vec![
                Claim::GapAtMost { d: 2 },
                obstruction(&["P51_A0", "P51_A1", "P51_A2"]),
                bounded(Some(3)),
            ],
        ),
        "P51_A0" | "P51_A1" | "P51_A2" => {
            check_epsilon(&eps)?;
            let (k, i): (&'static str, u64) = match key {
                "P51_A0" => ("P51_A0", 0),
                "P51_A1" => ("P51_A1", 1),
                _ => ("P51_A2", 2),
            };
            (
                k,
                Body::Set(log_component(i, &eps)?),
                AnalyticDensities::default(),
                vec![obstruction(&[k]), bounded(None)],
            )
        }
        "P51_Aprime" => (
            "P51_Aprime",
            Body::Set(p51_a(&eps)?.union(cong(2, 1))),
            AnalyticDensities { lower_banach: Some(r(2, 3)), ..Default::default() },
            vec![],
        ),
        "COLOR3" => (
            "COLOR3",
            Body::Coloring(color3()),
            AnalyticDensities::default(),
            vec![Claim::SyndeticPartition],
        ),
        other => return Err(Error::UnknownKey(other.to_string())),
    };
    Ok(NamedConstruction { key, body, analytic, claims })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapSettle {
    pub d: u64,
    /// Every gap that starts at or after this member is at most `d`.
    pub from: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapReport {
    pub horizon: u64,
    /// Largest `g` such that some `n <= N - g` needs `g` steps to reach a
    /// member; `None` when `[1, N]` has no member.
    pub gap: Option<u64>,
    /// Largest `b2 - b1 - 1` over consecutive members.
    pub internal_gap: u64,
    pub leading_gap: u64,
    /// `N - last member`; not counted in `gap`.
    pub trailing_gap: u64,
    pub first_member: Option<u64>,
    /// For each `d` below `internal_gap`, the point after which internal
    /// gaps never exceed `d` again.
    pub settles: Vec<GapSettle>,
}

impl GapReport {
    pub fn eventual_gap_from(&self, d: u64) -> Option<u64> {
        let first = self.first_member?;
        if d >= self.internal_gap {
            return Some(first);
        }
        self.settles.iter().find(|s| s.d == d).map(|s| s.from)
    }
}

pub fn check_gap(expr: &SetExpr, horizon: u64, limits: &Limits) -> Result<GapReport> {
    if horizon < 2 {
        return Err(Error::invalid("gap horizon must be at least 2"));
    }
    let bm = expr.bitmap_with(horizon, limits)?;
    let mut members = bm.ones();
    let Some(first) = members.next() else {
        return Ok(GapReport {
            horizon,
            gap: None,
            internal_gap: 0,
            leading_gap: horizon,
            trailing_gap: horizon,
            first_member: None,
            settles: Vec::new(),
        });
    };
    let mut internal = 0u64;
    // (gap length, member it follows)
    let mut last_start_by_len: Vec<(u64, u64)> = Vec::new();
    let mut prev = first;
    for m in members {
        let g = m - prev - 1;
        if g > 0 {
            internal = internal.max(g);
            last_start_by_len.push((g, prev));
        }
        prev = m;
    }
    let mut settles = Vec::new();
    for d in 0..internal {
        let from = last_start_by_len
            .iter()
            .rev()
            .find(|(g, _)| *g > d)
            .map(|(g, start)| start + g + 1)
            .unwrap_or(first);
        settles.push(GapSettle { d, from });
    }
    let leading = first - 1;
    Ok(GapReport {
        horizon,
        gap: Some(internal.max(leading)),
        internal_gap: internal,
        leading_gap: leading,
        trailing_gap: horizon - prev,
        first_member: Some(first),
        settles,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColoringOptions {
    pub schedule: Option<Schedule>,
    /// Horizon for the per-class witness searches.
    pub witness_horizon: u64,
    pub t_values: Vec<u64>,
    pub node_budget: u64,
    pub time_budget: Option<Duration>,
}

impl Default for ColoringOptions {
    fn default() -> Self {
        ColoringOptions {
            schedule: None,
            witness_horizon: 1024,
            t_values: vec![0, 1],
            node_budget: search::DEFAULT_NODE_BUDGET,
            time_budget: Some(search::DEFAULT_TIME_BUDGET),
        }
    }
}

/// `powers4(K)` with `4^K <= N`.
pub fn powers4_within(horizon: u64) -> Result<Schedule> {
    let mut k = 0u32;
    while k < 31 && 4u64.pow(k + 1) <= horizon {
        k += 1;
    }
    if k == 0 {
        return Err(Error::invalid("horizon below 4 leaves an empty schedule"));
    }
    Ok(Schedule::Powers4(k))
}

/// `prop41(K)` with every window at most `N`.
pub fn prop41_within(horizon: u64) -> Result<Schedule> {
    let mut k = 0u32;
    while k < 31 && density::prop41_window(u64::from(k) + 1) <= horizon {
        k += 1;
    }
    if k == 0 {
        return Err(Error::invalid("horizon too small for the prop41 schedule"));
    }
    Ok(Schedule::Prop41(k))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassWitness {
    pub t: u64,
    pub mode: Mode,
    pub size: usize,
    pub complete: bool,
    #[serde(rename = "B")]
    pub witness: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub index: usize,
    pub expr: String,
    pub count: u64,
    pub empty: bool,
    pub gap: GapReport,
    #[serde(serialize_with = "rational::serialize_vec")]
    pub ratios: Vec<Rational>,
    #[serde(serialize_with = "rational::serialize")]
    pub upper_est: Rational,
    #[serde(serialize_with = "rational::serialize")]
    pub lower_est: Rational,
    /// `upper_est + lower_est`.
    #[serde(serialize_with = "rational::serialize")]
    pub audit_sum: Rational,
    pub witnesses: Vec<ClassWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoColoringAudit {
    /// Allowed deviation of each `upper + lower` from 1: the `1/j` envelope
    /// of both estimates at the first tail window `j`.
    #[serde(serialize_with = "rational::serialize")]
    pub slack: Rational,
    pub within_slack: Vec<bool>,
    /// Some class exceeds 1 by more than the slack.
    pub exceeds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColoringReport {
    pub r: usize,
    pub horizon: u64,
    pub schedule: String,
    pub windows: Vec<u64>,
    pub covers: bool,
    pub partition: bool,
    pub first_uncovered: Option<u64>,
    pub first_overlap: Option<u64>,
    pub classes: Vec<ClassReport>,
    pub audit: Option<TwoColoringAudit>,
}

pub fn check_coloring(
    c: &Coloring,
    horizon: u64,
    opts: &ColoringOptions,
    limits: &Limits,
) -> Result<ColoringReport> {
    let schedule = match &opts.schedule {
        Some(s) => s.clone(),
        None => powers4_within(horizon)?,
    };
    let windows = schedule.windows();
    if windows.last().is_some_and(|&w| w > horizon) {
        return Err(Error::invalid("schedule extends beyond the coloring horizon"));
    }
    let bitmaps = c
        .classes
        .iter()
        .enumerate()
        .map(|(class, e)| {
            e.bitmap_with(horizon, limits)
                .map_err(|err| Error::MaterializationFailure { class: class + 1, reason: err.to_string() })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut first_uncovered = None;
    let mut first_overlap = None;
    for n in 1..=horizon {
        let hits = bitmaps.iter().filter(|b| b.contains(n)).count();
        if hits == 0 && first_uncovered.is_none() {
            first_uncovered = Some(n);
        }
        if hits > 1 && first_overlap.is_none() {
            first_overlap = Some(n);
        }
        if first_uncovered.is_some() && first_overlap.is_some() {
            break;
        }
    }

    let tail_start = density::default_tail_start(windows.len());
    let mut classes = Vec::with_capacity(c.r());
    for (i, (e, bm)) in c.classes.iter().zip(&bitmaps).enumerate() {
        let counts: Vec<u64> = windows.iter().map(|&w| bm.count_upto(w)).collect();
        let ratios: Vec<Rational> = counts.iter().zip(&windows).map(|(&k, &w)| rational::ratio(k, w)).collect();
        let tail = &ratios[tail_start.min(ratios.len() - 1)..];
        let upper = tail.iter().max().expect("nonempty").clone();
        let lower = tail.iter().min().expect("nonempty").clone();
        let count = bm.count();
        let mut witnesses = Vec::new();
        if count > 0 {
            for &t in &opts.t_values {
                if opts.witness_horizon < t + 2 {
                    continue;
                }
                let mut cfg = SearchConfig::new(Mode::Exact, t, opts.witness_horizon.min(horizon));
                cfg.node_budget = opts.node_budget;
                cfg.time_budget = opts.time_budget;
                let out = match search::max_witness(e, &cfg, limits) {
                    Err(Error::ResourceLimit { .. }) => {
                        cfg.mode = Mode::Greedy;
                        search::max_witness(e, &cfg, limits)?
                    }
                    other => other?,
                };
                witnesses.push(ClassWitness {
                    t,
                    mode: cfg.mode,
                    size: out.witness.size,
                    complete: out.stats.complete,
                    witness: out.witness.b,
                });
            }
        }
        classes.push(ClassReport {
            index: i + 1,
            expr: e.to_dsl(),
            count,
            empty: count == 0,
            gap: check_gap(e, horizon, limits)?,
            audit_sum: &upper + &lower,
            ratios,
            upper_est: upper,
            lower_est: lower,
            witnesses,
        });
    }

    let audit = (c.r() == 2).then(|| {
        let slack = rational::ratio(2, tail_start as u64 + 1);
        let one = Rational::one();
        let within_slack: Vec<bool> = classes
            .iter()
            .map(|cl| rational::abs_diff(&cl.audit_sum, &one) <= slack)
            .collect();
        let exceeds = classes.iter().any(|cl| cl.audit_sum > &one + &slack);
        TwoColoringAudit { slack, within_slack, exceeds }
    });

    Ok(ColoringReport {
        r: c.r(),
        horizon,
        schedule: schedule.to_string(),
        windows,
        covers: first_uncovered.is_none(),
        partition: first_uncovered.is_none() && first_overlap.is_none(),
        first_uncovered,
        first_overlap,
        classes,
        audit,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffSource {
    /// From the block structure: every block of doubles sends `b + b' + t`
    /// into the gap that precedes it.
    BlockGaps,
    /// From `d(U, U + θ)`: `|log2((2b + t) / (b + b' + t)) - 1| < d / θ`.
    ArcDistance {
        #[serde(serialize_with = "rational::serialize")]
        distance: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObstructionRow {
    pub b_prime: u64,
    pub t: u64,
    /// `None` when no cutoff exists inside the scanned range.
    pub cutoff: Option<u64>,
    /// One past the last `b` with both sums in the set.
    pub empirical_cutoff: u64,
    pub scanned: u64,
    pub excluded: u64,
    pub violations: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub key: String,
    pub expr: String,
    pub scan_limit: u64,
    pub source: CutoffSource,
    pub rows: Vec<ObstructionRow>,
    pub pass: bool,
}

/// Default scan limit for doubles `2b + t`.
pub const OBSTRUCTION_SCAN: u64 = 1 << 16;

fn interval_cutoff(
    family: &setexpr::IntervalFamily,
    b_prime: u64,
    t: u64,
    scan_limit: u64,
) -> Result<Option<u64>> {
    let runs = family.runs(scan_limit)?;
    let mut cutoff = None;
    let mut prev_end = 0u64;
    for &(lo, hi) in &runs {
        let bmin = lo.saturating_sub(t).div_ceil(2).max(1);
        let bmax = hi.saturating_sub(t) / 2;
        if bmin <= bmax {
            let smin = bmin + b_prime + t;
            let smax = bmax + b_prime + t;
            let in_gap = smin > prev_end && smax < lo;
            match (in_gap, cutoff) {
                (true, None) => cutoff = Some(bmin),
                (false, _) => cutoff = None,
                _ => {}
            }
        }
        prev_end = hi;
    }
    Ok(cutoff)
}

fn arc_cutoff(lf: &logfrac::LogFractional, b_prime: u64, t: u64) -> Result<(Rational, u64)> {
    let translated = logfrac::translate(&lf.arcs, &lf.theta);
    let d = logfrac::circle_distance(&lf.arcs, &translated);
    if d.is_zero() {
        return Err(Error::invalid("the arcs meet their translate by theta; no obstruction"));
    }
    let bound = &d / &lf.theta;
    let p = bound.numer().to_u64().ok_or_else(|| Error::invalid("distance too large"))?;
    let q = bound.denom().to_u32().ok_or_else(|| Error::invalid("distance denominator too large"))?;
    let two_p = BigUint::one() << p;
    // ((2b + 2b' + 2t) / (2b + t))^q < 2^p, decreasing in b.
    let ok = |b: u64| {
        let num = BigUint::from(2 * b + 2 * b_prime + 2 * t).pow(q);
        let den = BigUint::from(2 * b + t).pow(q);
        num < &two_p * den
    };
    let (mut lo, mut hi) = (0u64, 1u64);
    while !ok(hi) {
        lo = hi;
        hi = hi.checked_mul(2).ok_or_else(|| Error::invalid("cutoff out of range"))?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((d, hi))
}

/// Scans every `b` with `2b + t` a member up to `scan_limit` and checks that
/// `b + b' + t` is not a member once `b` passes the computed cutoff. The
/// case `b = b'` is excluded.
pub fn verify_ratio_obstruction(
    key: &str,
    pairs: &[(u64, u64)],
    scan_limit: u64,
    eps: Option<Rational>,
    limits: &Limits,
) -> Result<ObstructionReport> {
    if !matches!(key, "P41_A" | "P42_A1" | "P42_A2" | "P51_A0" | "P51_A1" | "P51_A2") {
        return Err(Error::invalid(format!("`{key}` does not carry a ratio obstruction")));
    }
    let nc = get_with(key, eps)?;
    let expr = nc.set()?.clone();
    let mut rows = Vec::with_capacity(pairs.len());
    let mut source = CutoffSource::BlockGaps;
    let max_b_prime = pairs.iter().map(|p| p.0 + p.1).max().unwrap_or(0);
    let bm = expr.bitmap_with(scan_limit + max_b_prime, limits)?;
    for &(b_prime, t) in pairs {
        if b_prime == 0 {
            return Err(Error::invalid("b' must be positive"));
        }
        let cutoff = match &expr {
            SetExpr::Intervals(f) => interval_cutoff(f, b_prime, t, scan_limit)?,
            SetExpr::LogFractional(lf) => {
                let (distance, c) = arc_cutoff(lf, b_prime, t)?;
                source = CutoffSource::ArcDistance { distance };
                Some(c)
            }
            _ => unreachable!("obstruction keys are leaves"),
        };
        let mut scanned = 0u64;
        let mut excluded = 0u64;
        let mut last_both = 0u64;
        let mut violations = Vec::new();
        for b in 1..=scan_limit.saturating_sub(t) / 2 {
            if !bm.contains(2 * b + t) {
                continue;
            }
            if b == b_prime && t == 0 {
                excluded += 1;
                continue;
            }
            scanned += 1;
            if bm.contains(b + b_prime + t) {
                last_both = b;
                if cutoff.is_some_and(|c| b >= c) {
                    violations.push(b);
                }
            }
        }
        if scanned == 0 {
            return Err(Error::SampleExhausted(format!(
                "no b with 2b+{t} in `{key}` up to {scan_limit}"
            )));
        }
        rows.push(ObstructionRow {
            b_prime,
            t,
            cutoff,
            empirical_cutoff: last_both + 1,
            scanned,
            excluded,
            violations,
        });
    }
    let pass = rows.iter().all(|r| r.violations.is_empty() && r.cutoff.is_some());
    Ok(ObstructionReport {
        key: key.to_string(),
        expr: expr.to_dsl(),
        scan_limit,
        source,
        rows,
        pass,
    })
}

/// `count` pairs `(b', t)` with `b'` uniform in `1..=max_b_prime` and `t`
/// drawn from `t_values`, reproducible from `seed`.
pub fn sample_pairs(seed: u64, count: usize, max_b_prime: u64, t_values: &[u64]) -> Result<Vec<(u64, u64)>> {
    if max_b_prime == 0 || t_values.is_empty() {
        return Err(Error::SampleExhausted("empty sampling range".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let b = rng.gen_range(1..=max_b_prime);
            let t = t_values[rng.gen_range(0..t_values.len())];
            (b, t)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub horizon: u64,
    pub seed: u64,
    pub samples: usize,
    pub node_budget: u64,
    pub time_budget: Option<Duration>,
    pub eps: Option<Rational>,
    /// Horizon for witness searches; the search also runs at a quarter of it.
    pub witness_horizon: u64,
}

impl VerifyOptions {
    pub fn new(horizon: u64) -> Self {
        VerifyOptions {
            horizon,
            seed: 0,
            samples: 4,
            node_budget: search::DEFAULT_NODE_BUDGET,
            time_budget: Some(search::DEFAULT_TIME_BUDGET),
            eps: None,
            witness_horizon: horizon.min(4096),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessGrowth {
    pub t: u64,
    pub residue: Option<(u64, u64)>,
    pub anchor: Option<u64>,
    pub sizes: Vec<(u64, usize)>,
    /// Largest witness without an anchor, for comparison only.
    pub unanchored_sizes: Vec<(u64, usize)>,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ClaimOutcome {
    Density {
        kind: DensityKind,
        #[serde(serialize_with = "rational::serialize")]
        value: Rational,
        schedule: String,
        #[serde(serialize_with = "rational::serialize_vec")]
        ratios: Vec<Rational>,
        tail_start: usize,
        #[serde(serialize_with = "rational::serialize")]
        max_tail_deviation_times_j: Rational,
    },
    Gap {
        d: u64,
        report: GapReport,
    },
    Obstruction {
        reports: Vec<ObstructionReport>,
    },
    BoundedWitness {
        rows: Vec<WitnessGrowth>,
    },
    SyndeticPartition {
        partition: bool,
        gaps: Vec<Option<u64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimResult {
    pub claim: Claim,
    pub pass: bool,
    /// Some search ran out of budget, so the verdict is provisional.
    pub incomplete: bool,
    pub outcome: ClaimOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub key: String,
    pub dsl: Vec<String>,
    pub analytic: AnalyticDensities,
    pub horizon: u64,
    pub results: Vec<ClaimResult>,
    pub pass: bool,
}

fn witness_size(a: &SetExpr, cfg: &SearchConfig, limits: &Limits) -> Result<(usize, bool)> {
    match search::max_witness(a, cfg, limits) {
        Ok(out) => Ok((out.witness.size, out.stats.complete)),
        Err(Error::ResourceLimit { what: "exact-search candidates", .. }) => {
            let mut g = cfg.clone();
            g.mode = Mode::Greedy;
            let out = search::max_witness(a, &g, limits)?;
            Ok((out.witness.size, false))
        }
        Err(e) => Err(e),
    }
}

/// Smallest admissible element at the lower horizon, so the same anchor
/// is valid at both horizons.
fn first_candidate(a: &SetExpr, cfg: &SearchConfig, limits: &Limits) -> Result<Option<u64>> {
    let bm = a.bitmap_with(cfg.horizon, limits)?;
    Ok((1..=cfg.max_element()).find(|&b| {
        bm.contains(2 * b + cfg.t)
            && cfg.residue_filter.is_none_or(|f| b % f.modulus == f.residue)
    }))
}

fn witness_growth(
    a: &SetExpr,
    t_values: &[u64],
    modulus: Option<u64>,
    opts: &VerifyOptions,
    limits: &Limits,
) -> Result<Vec<WitnessGrowth>> {
    let top = opts.witness_horizon;
    let horizons = [top / 4, top];
    let residues: Vec<Option<(u64, u64)>> = match modulus {
        None => vec![None],
        Some(m) => (0..m).map(|r| Some((m, r))).collect(),
    };
    let mut rows = Vec::new();
    for &t in t_values {
        for &res in &residues {
            let mut base = SearchConfig::new(Mode::Exact, t, horizons[0]);
            base.node_budget = opts.node_budget;
            base.time_budget = opts.time_budget;
            base.residue_filter = res.map(|(modulus, residue)| search::ResidueFilter { modulus, residue });
            if horizons[0] < t + 2 {
                continue;
            }
            let anchor = first_candidate(a, &base, limits)?;
            let mut sizes = Vec::new();
            let mut unanchored = Vec::new();
            let mut complete = true;
            for &h in &horizons {
                let mut cfg = base.clone();
                cfg.horizon = h;
                let (u, c1) = witness_size(a, &cfg, limits)?;
                unanchored.push((h, u));
                cfg.anchor = anchor;
                let (s, c2) = if anchor.is_some() { witness_size(a, &cfg, limits)? } else { (0, true) };
                sizes.push((h, s));
                complete &= c1 && c2;
            }
            rows.push(WitnessGrowth {
                t,
                residue: res,
                anchor,
                sizes,
                unanchored_sizes: unanchored,
                complete,
            });
        }
    }
    Ok(rows)
}

/// Runs every claim attached to a built-in.
pub fn verify(key: &str, opts: &VerifyOptions, limits: &Limits) -> Result<VerifyReport> {
    let nc = get_with(key, opts.eps.clone())?;
    let mut results = Vec::new();
    for claim in &nc.claims {
        let result = match claim {
            Claim::Density { kind, value, schedule } => {
                let sched = match *schedule {
                    "prop41" => prop41_within(opts.horizon)?,
                    _ => powers4_within(opts.horizon)?,
                };
                let windows = sched.windows();
                let prof = density::profile(nc.set()?, &windows, limits)?;
                let tail_start = density::default_tail_start(windows.len());
                let worst = prof.ratios[tail_start..]
                    .iter()
                    .enumerate()
                    .map(|(i, r)| rational::abs_diff(r, value) * rational::from_u64((tail_start + i + 1) as u64))
                    .max()
                    .unwrap_or_else(Rational::zero);
                ClaimResult {
                    claim: claim.clone(),
                    pass: worst <= Rational::one(),
                    incomplete: false,
                    outcome: ClaimOutcome::Density {
                        kind: *kind,
                        value: value.clone(),
                        schedule: sched.to_string(),
                        ratios: prof.ratios,
                        tail_start,
                        max_tail_deviation_times_j: worst,
                    },
                }
            }
            Claim::GapAtMost { d } => {
                let report = check_gap(nc.set()?, opts.horizon, limits)?;
                ClaimResult {
                    claim: claim.clone(),
                    pass: report.gap.is_some_and(|g| g <= *d),
                    incomplete: false,
                    outcome: ClaimOutcome::Gap { d: *d, report },
                }
            }
            Claim::Obstruction { components } => {
                let pairs = sample_pairs(opts.seed, opts.samples, 128, &[0, 1])?;
                let scan = opts.horizon.min(OBSTRUCTION_SCAN);
                let reports = components
                    .iter()
                    .map(|k| verify_ratio_obstruction(k, &pairs, scan, opts.eps.clone(), limits))
                    .collect::<Result<Vec<_>>>()?;
                ClaimResult {
                    claim: claim.clone(),
                    pass: reports.iter().all(|r| r.pass),
                    incomplete: false,
                    outcome: ClaimOutcome::Obstruction { reports },
                }
            }
            Claim::BoundedWitness { t, modulus } => {
                let rows = witness_growth(nc.set()?, t, *modulus, opts, limits)?;
                let pass = rows.iter().all(|r| r.sizes[0].1 == r.sizes[1].1);
                ClaimResult {
                    claim: claim.clone(),
                    pass,
                    incomplete: rows.iter().any(|r| !r.complete),
                    outcome: ClaimOutcome::BoundedWitness { rows },
                }
            }
            Claim::SyndeticPartition => {
                let c = nc.coloring()?;
                let gaps = c
                    .classes
                    .iter()
                    .map(|e| check_gap(e, opts.horizon, limits).map(|g| g.gap))
                    .collect::<Result<Vec<_>>>()?;
                let bitmaps = c
                    .classes
                    .iter()
                    .map(|e| e.bitmap_with(opts.horizon, limits))
                    .collect::<Result<Vec<_>>>()?;
                let partition =
                    (1..=opts.horizon).all(|n| bitmaps.iter().filter(|b| b.contains(n)).count() == 1);
                ClaimResult {
                    claim: claim.clone(),
                    pass: partition && gaps.iter().all(Option::is_some),
                    incomplete: false,
                    outcome: ClaimOutcome::SyndeticPartition { partition, gaps },
                }
            }
        };
        results.push(result);
    }
    Ok(VerifyReport {
        key: nc.key.to_string(),
        dsl: nc.dsl(),
        analytic: nc.analytic.clone(),
        horizon: opts.horizon,
        pass: results.iter().all(|r| r.pass),
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::setexpr::parse;

    fn limits() -> Limits {
        Limits::default()
    }

    #[test]
    fn analytic_values() {
        assert_eq!(get("P41_A").unwrap().analytic.upper, Some(ratio(2, 3)));
        assert_eq!(get("P41_Aprime").unwrap().analytic.upper, Some(ratio(5, 6)));
        assert_eq!(get("P42_A").unwrap().analytic.natural, Some(ratio(1, 2)));
        assert_eq!(get("P42_Aprime").unwrap().analytic.natural, Some(ratio(3, 4)));
        assert_eq!(get("P51_Aprime").unwrap().analytic.lower_banach, Some(ratio(2, 3)));
        assert_eq!(get("COLOR3").unwrap().r(), 3);
        assert_eq!(get("nope").unwrap_err(), Error::UnknownKey("nope".into()));
    }

    #[test]
    fn every_builtin_round_trips() {
        for key in KEYS {
            let nc = get(key).unwrap();
            let exprs: Vec<SetExpr> = match &nc.body {
                Body::Set(e) => vec![e.clone()],
                Body::Coloring(c) => c.classes.clone(),
            };
            for e in exprs {
                let back = parse(&e.to_dsl()).unwrap();
                assert_eq!(back, e, "{key}");
            }
        }
    }

    #[test]
    fn epsilon_range() {
        assert!(get_with("P51_A", Some(ratio(1, 12))).is_err());
        assert!(get_with("P51_A", Some(-ratio(1, 24))).is_err());
        assert!(get_with("P51_A", Some(ratio(0, 1))).is_ok());
    }

    #[test]
    fn gap_examples() {
        let g = check_gap(&parse("cong(3,0)").unwrap(), 100, &limits()).unwrap();
        assert_eq!(g.gap, Some(2));
        let g = check_gap(&SetExpr::naturals(), 100, &limits()).unwrap();
        assert_eq!(g.gap, Some(0));
        let g = check_gap(&SetExpr::empty(), 100, &limits()).unwrap();
        assert_eq!(g.gap, None);
        let g = check_gap(&parse("finite{5,6,10,11,13}").unwrap(), 20, &limits()).unwrap();
        assert_eq!((g.leading_gap, g.internal_gap, g.trailing_gap), (4, 3, 7));
        assert_eq!(g.gap, Some(4));
        assert_eq!(g.eventual_gap_from(1), Some(10));
        assert_eq!(g.eventual_gap_from(3), Some(5));
    }

    #[test]
    fn color3_partitions() {
        let c = color3();
        let report = check_coloring(
            &c,
            5000,
            &ColoringOptions { witness_horizon: 64, ..Default::default() },
            &limits(),
        )
        .unwrap();
        assert!(report.partition);
        assert!(report.classes.iter().all(|cl| cl.gap.gap.is_some()));
        assert!(report.audit.is_none());
    }

    #[test]
    fn parity_coloring_audit() {
        let c = Coloring::new(vec![parse("cong(2,0)").unwrap(), parse("cong(2,1)").unwrap()]).unwrap();
        let report = check_coloring(
            &c,
            10_000,
            &ColoringOptions { witness_horizon: 64, ..Default::default() },
            &limits(),
        )
        .unwrap();
        assert!(report.partition);
        for cl in &report.classes {
            assert_eq!(cl.audit_sum, ratio(1, 1));
        }
        assert!(report.audit.unwrap().within_slack.iter().all(|b| *b));
    }

    #[test]
    fn degenerate_coloring() {
        let c = Coloring::new(vec![SetExpr::naturals(), SetExpr::empty()]).unwrap();
        let report = check_coloring(
            &c,
            1000,
            &ColoringOptions { witness_horizon: 32, ..Default::default() },
            &limits(),
        )
        .unwrap();
        assert!(report.partition);
        assert!(report.classes[1].empty);
        assert_eq!(report.classes[0].audit_sum, ratio(2, 1));
        assert_eq!(report.classes[1].audit_sum, ratio(0, 1));
    }

    #[test]
    fn p51_monotone_in_epsilon() {
        let small = p51_a(&ratio(1, 48)).unwrap().bitmap(20_000).unwrap();
        let large = p51_a(&ratio(1, 24)).unwrap().bitmap(20_000).unwrap();
        let mut diff = small.clone();
        diff.difference_with(&large);
        assert_eq!(diff.count(), 0);
    }

    #[test]
    fn p41_aprime_agrees_on_evens() {
        let a = get("P41_A").unwrap().set().unwrap().clone();
        let ap = get("P41_Aprime").unwrap().set().unwrap().clone();
        for n in (2..20_000).step_by(2) {
            assert_eq!(a.member(n).unwrap(), ap.member(n).unwrap());
        }
    }

    #[test]
    fn obstruction_on_intervals() {
        let pairs = [(16, 0), (64, 0), (106, 1)];
        let r = verify_ratio_obstruction("P41_A", &pairs, 4u64.pow(8), None, &limits()).unwrap();
        assert!(r.pass, "{r:?}");
        for row in &r.rows {
            assert!(row.empirical_cutoff <= row.cutoff.unwrap());
        }
        let r = verify_ratio_obstruction("P42_A2", &pairs, 4u64.pow(8), None, &limits()).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn obstruction_on_log_components() {
        for key in ["P51_A0", "P51_A1", "P51_A2"] {
            let r = verify_ratio_obstruction(key, &[(16, 0), (3, 1)], 1 << 16, None, &limits()).unwrap();
            assert!(r.pass, "{r:?}");
            assert_eq!(
                r.source,
                CutoffSource::ArcDistance { distance: ratio(1, 8) }
            );
        }
    }

    #[test]
    fn obstruction_excludes_diagonal() {
        let r = verify_ratio_obstruction("P41_A", &[(8, 0)], 4096, None, &limits()).unwrap();
        assert_eq!(r.rows[0].excluded, 1);
    }

    #[test]
    fn sampling_is_seeded() {
        let a = sample_pairs(0, 5, 100, &[0, 1]).unwrap();
        assert_eq!(a, sample_pairs(0, 5, 100, &[0, 1]).unwrap());
        assert_ne!(a, sample_pairs(1, 5, 100, &[0, 1]).unwrap());
    }
}
