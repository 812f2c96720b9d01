//! Maximum clique by branch and bound over dense bitset adjacency.
//!
//! Branching always takes the smallest remaining candidate and explores the
//! include branch first, so cliques are met in lexicographic order and the
//! first clique of maximum size is the lexicographically smallest one.
//! Pruning uses a greedy colouring of the candidate set as the upper bound.

use std::time::Instant;

const WORD: usize = 64;

#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    words: usize,
    adj: Vec<u64>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(WORD).max(1);
        Graph {
            n,
            words,
            adj: vec![0; n * words],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        debug_assert!(u != v);
        self.adj[u * self.words + v / WORD] |= 1 << (v % WORD);
        self.adj[v * self.words + u / WORD] |= 1 << (u % WORD);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.words + v / WORD] >> (v % WORD) & 1 == 1
    }

    fn row(&self, v: usize) -> &[u64] {
        &self.adj[v * self.words..(v + 1) * self.words]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    fn all(&self) -> Vec<u64> {
        let mut s = vec![!0u64; self.words];
        let extra = self.words * WORD - self.n;
        if extra > 0 {
            s[self.words - 1] = !0u64 >> extra;
        }
        if self.n == 0 {
            s.iter_mut().for_each(|w| *w = 0);
        }
        s
    }
}

fn first_bit(set: &[u64]) -> Option<usize> {
    set.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
}

fn clear(set: &mut [u64], v: usize) {
    set[v / WORD] &= !(1 << (v % WORD));
}

fn popcount(set: &[u64]) -> usize {
    set.iter().map(|w| w.count_ones() as usize).sum()
}

#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub nodes: u64,
    pub deadline: Option<Instant>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CliqueStats {
    pub nodes: u64,
    pub prunes: u64,
    pub complete: bool,
}

/// Greedy clique over vertices in decreasing degree order.
pub fn degree_greedy(g: &Graph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    let mut clique: Vec<usize> = Vec::new();
    for v in order {
        if clique.iter().all(|&u| g.has_edge(u, v)) {
            clique.push(v);
        }
    }
    clique.sort_unstable();
    clique
}

/// Greedy clique taking the smallest compatible vertex each time.
pub fn index_greedy(g: &Graph) -> Vec<usize> {
    let mut clique: Vec<usize> = Vec::new();
    for v in 0..g.n {
        if clique.iter().all(|&u| g.has_edge(u, v)) {
            clique.push(v);
        }
    }
    clique
}

struct Search<'g> {
    g: &'g Graph,
    budget: Budget,
    /// Size a clique must exceed to be recorded.
    threshold: usize,
    best: Option<Vec<usize>>,
    stats: CliqueStats,
    exhausted: bool,
}

impl Search<'_> {
    fn out_of_budget(&mut self) -> bool {
        if self.exhausted {
            return true;
        }
        if self.stats.nodes >= self.budget.nodes {
            self.exhausted = true;
        } else if let Some(deadline) = self.budget.deadline {
            if self.stats.nodes.is_multiple_of(1024) && Instant::now() >= deadline {
                self.exhausted = true;
            }
        }
        self.exhausted
    }

    /// Whether a colouring of `cand` uses more than `need` colours. Stops
    /// as soon as the answer is known.
    fn colours_exceed(&self, cand: &[u64], need: usize) -> bool {
        if popcount(cand) <= need {
            return false;
        }
        let mut uncoloured = cand.to_vec();
        let mut q = vec![0u64; cand.len()];
        let mut colours = 0usize;
        while uncoloured.iter().any(|w| *w != 0) {
            colours += 1;
            if colours > need {
                return true;
            }
            q.copy_from_slice(&uncoloured);
            while let Some(v) = first_bit(&q) {
                clear(&mut uncoloured, v);
                clear(&mut q, v);
                for (w, a) in q.iter_mut().zip(self.g.row(v)) {
                    *w &= !a;
                }
            }
        }
        false
    }

    fn expand(&mut self, current: &mut Vec<usize>, mut cand: Vec<u64>) {
        loop {
            if self.out_of_budget() {
                return;
            }
            self.stats.nodes += 1;
            let Some(v) = first_bit(&cand) else {
                if current.len() > self.threshold {
                    self.threshold = current.len();
                    self.best = Some(current.clone());
                }
                return;
            };
            let need = self.threshold.saturating_sub(current.len());
            if !self.colours_exceed(&cand, need) {
                self.stats.prunes += 1;
                return;
            }
            let next: Vec<u64> = cand.iter().zip(self.g.row(v)).map(|(c, a)| c & a).collect();
            current.push(v);
            self.expand(current, next);
            current.pop();
            clear(&mut cand, v);
        }
    }
}

/// Lexicographically smallest maximum clique, or the best found when the
/// budget runs out (`complete == false`).
pub fn max_clique(g: &Graph, budget: Budget) -> (Vec<usize>, CliqueStats) {
    if g.is_empty() {
        return (
            Vec::new(),
            CliqueStats {
                complete: true,
                ..Default::default()
            },
        );
    }
    let seed_a = degree_greedy(g);
    let seed_b = index_greedy(g);
    let seed = if seed_a.len() > seed_b.len() { seed_a } else { seed_b };
    let mut search = Search {
        g,
        budget,
        // Record only cliques at least as large as the seed, so the first one
        // found is still the lexicographically smallest of its size.
        threshold: seed.len() - 1,
        best: None,
        stats: CliqueStats::default(),
        exhausted: false,
    };
    let mut current = Vec::new();
    search.expand(&mut current, g.all());
    let complete = !search.exhausted;
    let best = search.best.unwrap_or(seed);
    let stats = CliqueStats {
        complete,
        ..search.stats
    };
    (best, stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unlimited() -> Budget {
        Budget {
            nodes: u64::MAX,
            deadline: None,
        }
    }

    fn brute(g: &Graph) -> Vec<usize> {
        let n = g.len();
        let mut best: Vec<usize> = Vec::new();
        for mask in 0u32..(1 << n) {
            let vs: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let ok = vs.iter().enumerate().all(|(i, &u)| vs[i + 1..].iter().all(|&v| g.has_edge(u, v)));
            if ok && (vs.len() > best.len() || (vs.len() == best.len() && vs < best)) {
                best = vs;
            }
        }
        best
    }

    #[test]
    fn finds_lexicographically_smallest_maximum() {
        // Two triangles {0,1,2} and {3,4,5} plus a pendant edge.
        let mut g = Graph::new(7);
        for (u, v) in [(3, 4), (4, 5), (3, 5), (0, 1), (1, 2), (0, 2), (5, 6)] {
            g.add_edge(u, v);
        }
        let (c, stats) = max_clique(&g, unlimited());
        assert_eq!(c, vec![0, 1, 2]);
        assert!(stats.complete);
    }

    #[test]
    fn agrees_with_brute_force_on_pseudorandom_graphs() {
        let mut state = 0x9e3779b97f4a7c15u64;
        for trial in 0..60 {
            let n = 4 + trial % 13;
            let mut g = Graph::new(n);
            for u in 0..n {
                for v in u + 1..n {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    if state % 100 < 35 + (trial as u64 % 5) * 12 {
                        g.add_edge(u, v);
                    }
                }
            }
            let (c, stats) = max_clique(&g, unlimited());
            assert!(stats.complete);
            assert_eq!(c, brute(&g), "trial {trial}");
        }
    }

    #[test]
    fn reports_incomplete_on_tiny_budget() {
        let mut g = Graph::new(30);
        for u in 0..30 {
            for v in u + 1..30 {
                if (u + v) % 3 != 0 {
                    g.add_edge(u, v);
                }
            }
        }
        let (c, stats) = max_clique(&g, Budget { nodes: 3, deadline: None });
        assert!(!stats.complete);
        assert!(!c.is_empty());
    }

    #[test]
    fn empty_and_edgeless_graphs() {
        let (c, s) = max_clique(&Graph::new(0), unlimited());
        assert!(c.is_empty() && s.complete);
        let (c, _) = max_clique(&Graph::new(5), unlimited());
        assert_eq!(c, vec![0]);
    }
}
