#![allow(dead_code)]

use rand::Rng;
use sumsets::SetExpr;

/// Random expression text over every constructor the parser knows.
pub fn random_dsl<R: Rng>(rng: &mut R, depth: u32) -> String {
    let leaf = depth == 0 || rng.gen_bool(0.35);
    if leaf {
        return match rng.gen_range(0..5) {
            0 | 1 => {
                let m = rng.gen_range(1..=9u64);
                format!("cong({m},{})", rng.gen_range(0..m))
            }
            2 => {
                let k = rng.gen_range(0..8);
                let elems: Vec<String> = (0..k).map(|_| rng.gen_range(1..=60u64).to_string()).collect();
                format!("finite{{{}}}", elems.join(","))
            }
            3 => match rng.gen_range(0..3) {
                0 => {
                    let a = rng.gen_range(1..=3);
                    let b = rng.gen_range(0..=2 * a);
                    format!("intervals(n>=1; {a}*n^2, {a}*n^2+{b}*n)")
                }
                1 => {
                    let c = rng.gen_range(2..=4);
                    format!("intervals(n>=1; {c}^n, (2-1/n)*{c}^n)")
                }
                _ => {
                    let c = rng.gen_range(2..=3);
                    format!("intervals(n>=2; (1+1/n)*{c}^n, {c}^(n+1))")
                }
            },
            _ => {
                let theta = ["1", "1/2", "1/3"][rng.gen_range(0..3)];
                let a = rng.gen_range(0..6u64);
                let b = rng.gen_range(a + 1..=6u64);
                format!("logfrac({theta}; [{a}/6,{b}/6))")
            }
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..5) {
        0 => format!("union({},{})", random_dsl(rng, d), random_dsl(rng, d)),
        1 => format!("inter({},{})", random_dsl(rng, d), random_dsl(rng, d)),
        2 => format!("diff({},{})", random_dsl(rng, d), random_dsl(rng, d)),
        3 => format!("compl({})", random_dsl(rng, d)),
        _ => format!("shift({},{})", random_dsl(rng, d), rng.gen_range(-5..=5i64)),
    }
}

pub fn random_set<R: Rng>(rng: &mut R, depth: u32) -> SetExpr {
    let text = random_dsl(rng, depth);
    sumsets::parse(&text).unwrap_or_else(|e| panic!("generated `{text}` failed to parse: {e}"))
}

/// Largest `B` with `2b + t`, `b1 + b2 + t` all in `members` and
/// `2b + t <= horizon`, by exhausting subsets of two halves of the
/// candidate list. Members are given as a membership table indexed by `n`.
pub fn brute_force_max_witness(members: &[bool], t: u64, horizon: u64) -> usize {
    let inside = |n: u64| n <= horizon && members[n as usize];
    let cands: Vec<u64> = (1..=horizon.saturating_sub(t) / 2).filter(|&b| inside(2 * b + t)).collect();
    let k = cands.len();
    assert!(k <= 40, "too many candidates for the oracle: {k}");
    let adj: Vec<u64> = (0..k)
        .map(|i| {
            (0..k)
                .filter(|&j| j != i && inside(cands[i] + cands[j] + t))
                .fold(0u64, |m, j| m | 1 << j)
        })
        .collect();
    let h = k / 2;
    let lo_mask = (1u64 << h) - 1;
    // best[s] = largest clique inside subset s of the upper half
    let upper = k - h;
    let mut best = vec![0u8; 1 << upper];
    for s in 1usize..1 << upper {
        let v = s.trailing_zeros() as usize;
        let rest = s & !(1 << v);
        let nbrs = ((adj[h + v] >> h) as usize) & rest;
        best[s] = best[rest].max(1 + best[nbrs]);
    }
    let mut answer = 0usize;
    for s in 0u64..1 << h {
        let mut common = u64::MAX;
        let mut clique = true;
        for (i, &row) in adj.iter().enumerate().take(h) {
            if s >> i & 1 == 1 {
                if (row | 1 << i) & s & lo_mask != s {
                    clique = false;
                    break;
                }
                common &= row;
            }
        }
        if clique {
            let up = ((common >> h) as usize) & ((1usize << upper) - 1);
            answer = answer.max(s.count_ones() as usize + best[up] as usize);
        }
    }
    answer
}
