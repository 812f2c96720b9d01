//! Exact empirical frequencies of cylinder events along the orbit of
//! `(a, a)` under `S^2 × S`, where `a` is the indicator sequence of `A`.
//!
//! With `N' = floor(N / 2)` and `E = {x : x(0) = 1}`:
//! `μ(Σ×E)` counts `n <= N'` in `A`, `μ(E×Σ)` counts `2n ∈ A` and
//! `μ(S⁻¹E×Σ)` counts `2n + 1 ∈ A`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::setexpr::{Limits, SetExpr};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalMeasure {
    pub k: Option<u64>,
    #[serde(rename = "N_k")]
    pub n_k: u64,
    #[serde(rename = "Nprime_k")]
    pub nprime_k: u64,
    #[serde(rename = "freq_SigmaE", serialize_with = "rational::serialize")]
    pub freq_sigma_e: Rational,
    #[serde(rename = "freq_ESigma", serialize_with = "rational::serialize")]
    pub freq_e_sigma: Rational,
    #[serde(rename = "freq_SinvE", serialize_with = "rational::serialize")]
    pub freq_sinv_e: Rational,
    #[serde(serialize_with = "rational::serialize")]
    pub prefix_density: Rational,
}

pub fn empirical(a: &SetExpr, n_k: u64, limits: &Limits) -> Result<EmpiricalMeasure> {
    if n_k < 2 {
        return Err(Error::invalid("N_k must be at least 2"));
    }
    let np = n_k / 2;
    let bm = a.bitmap_with((2 * np + 1).max(n_k), limits)?;
    let sigma_e = bm.count_upto(np);
    let (mut even, mut odd) = (0u64, 0u64);
    for n in 1..=np {
        even += bm.contains(2 * n) as u64;
        odd += bm.contains(2 * n + 1) as u64;
    }
    Ok(EmpiricalMeasure {
        k: None,
        n_k,
        nprime_k: np,
        freq_sigma_e: rational::ratio(sigma_e, np),
        freq_e_sigma: rational::ratio(even, np),
        freq_sinv_e: rational::ratio(odd, np),
        prefix_density: rational::ratio(bm.count_upto(n_k), n_k),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inequality {
    pub name: &'static str,
    #[serde(serialize_with = "rational::serialize")]
    pub lhs: Rational,
    /// Right side before the slack is subtracted.
    #[serde(serialize_with = "rational::serialize")]
    pub rhs: Rational,
    #[serde(serialize_with = "rational::serialize")]
    pub slack: Rational,
    /// `lhs - (rhs - slack)`; nonnegative exactly when the check passes.
    #[serde(serialize_with = "rational::serialize")]
    pub margin: Rational,
    pub pass: bool,
}

impl Inequality {
    fn new(name: &'static str, lhs: Rational, rhs: Rational, slack: &Rational) -> Self {
        let margin = &lhs - (&rhs - slack);
        Inequality {
            name,
            pass: margin >= Rational::from_integer(0.into()),
            lhs,
            rhs,
            slack: slack.clone(),
            margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FcpReport {
    pub expr: String,
    #[serde(rename = "N_k")]
    pub n_k: u64,
    pub frequencies: EmpiricalMeasure,
    pub inequalities: Vec<Inequality>,
    /// `freq_ESigma + freq_SinvE == |A ∩ [2, 2N' + 1]| / N'`, exactly.
    pub parity_identity: bool,
    /// `2 freq_SigmaE + freq_ESigma`, the combination that exceeds 2 when
    /// the upper density exceeds 5/6.
    #[serde(serialize_with = "rational::serialize")]
    pub combination: Rational,
    pub pass: bool,
}

pub fn check_fcp_inequalities(a: &SetExpr, n_k: u64, limits: &Limits) -> Result<FcpReport> {
    if n_k < 4 {
        return Err(Error::invalid("N_k must be at least 4"));
    }
    let m = empirical(a, n_k, limits)?;
    let one = Rational::from_integer(1.into());
    let two = Rational::from_integer(2.into());
    let inv = rational::ratio(1, n_k);
    let slack = rational::ratio(4, n_k);
    let d = &m.prefix_density;
    let inequalities = vec![
        Inequality::new("i", m.freq_sigma_e.clone(), &two * d - &one, &slack),
        Inequality::new(
            "ii",
            m.freq_e_sigma.clone(),
            &two * d - rational::ratio(4, n_k) - &one,
            &slack,
        ),
        Inequality::new(
            "iii",
            &m.freq_e_sigma + &m.freq_sinv_e,
            &two * d - &two * &inv,
            &slack,
        ),
    ];
    let bm = a.bitmap_with(2 * m.nprime_k + 1, limits)?;
    let window = bm.count_upto(2 * m.nprime_k + 1) - bm.count_upto(1);
    let parity_identity = &m.freq_e_sigma + &m.freq_sinv_e == rational::ratio(window, m.nprime_k);
    let combination = &two * &m.freq_sigma_e + &m.freq_e_sigma;
    Ok(FcpReport {
        expr: a.to_dsl(),
        n_k,
        pass: parity_identity && inequalities.iter().all(|i| i.pass),
        frequencies: m,
        inequalities,
        parity_identity,
        combination,
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
    fn naturals() {
        let m = empirical(&SetExpr::naturals(), 100, &limits()).unwrap();
        assert_eq!(m.nprime_k, 50);
        for f in [&m.freq_sigma_e, &m.freq_e_sigma, &m.freq_sinv_e] {
            assert_eq!(*f, ratio(1, 1));
        }
        let r = check_fcp_inequalities(&SetExpr::naturals(), 100, &limits()).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn evens() {
        let m = empirical(&parse("cong(2,0)").unwrap(), 100, &limits()).unwrap();
        assert_eq!(m.freq_e_sigma, ratio(1, 1));
        assert_eq!(m.freq_sinv_e, ratio(0, 1));
        assert_eq!(m.freq_sigma_e, ratio(25, 50));
    }

    #[test]
    fn odds_pass_third_inequality() {
        let r = check_fcp_inequalities(&parse("cong(2,1)").unwrap(), 1000, &limits()).unwrap();
        assert!(r.inequalities[2].pass);
        assert!(r.pass);
    }

    #[test]
    fn initial_segment_saturates_first_inequality() {
        let a = parse("finite{1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17,18,19,20}").unwrap();
        let r = check_fcp_inequalities(&a, 20, &limits()).unwrap();
        let i = &r.inequalities[0];
        assert!(rational::abs_diff(&i.lhs, &i.rhs) <= ratio(1, 10));
    }

    #[test]
    fn locality() {
        let a = parse("cong(3,1)").unwrap();
        let b = a.clone().union(parse("finite{1000,1001,1002}").unwrap());
        assert_eq!(
            empirical(&a, 100, &limits()).unwrap(),
            empirical(&b, 100, &limits()).unwrap()
        );
    }
}
