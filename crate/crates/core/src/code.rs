//! Terminated codes and their Tanner graphs.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::ensemble::{EnsembleParams, SyndromeFormer};
use crate::error::{invalid, Result};
use crate::gf2::BitMatrix;

/// Bipartite graph of a binary linear code. Neighbor lists are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TannerGraph {
    n_vars: usize,
    check_vars: Vec<Vec<usize>>,
    var_checks: Vec<Vec<usize>>,
}

impl TannerGraph {
    /// Builds a graph from per-check variable lists.
    pub fn from_checks(n_vars: usize, checks: Vec<Vec<usize>>) -> Result<Self> {
        let mut var_checks = vec![Vec::new(); n_vars];
        let mut check_vars = Vec::with_capacity(checks.len());
        for (c, mut vars) in checks.into_iter().enumerate() {
            vars.sort_unstable();
            if vars.windows(2).any(|w| w[0] == w[1]) {
                return invalid(format!("check {c} lists a variable twice"));
            }
            for &v in &vars {
                if v >= n_vars {
                    return invalid(format!("check {c} references variable {v} out of range"));
                }
                var_checks[v].push(c);
            }
            check_vars.push(vars);
        }
        Ok(TannerGraph { n_vars, check_vars, var_checks })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_checks(&self) -> usize {
        self.check_vars.len()
    }

    pub fn n_edges(&self) -> usize {
        self.check_vars.iter().map(Vec::len).sum()
    }

    pub fn check_neighbors(&self, c: usize) -> &[usize] {
        &self.check_vars[c]
    }

    pub fn var_neighbors(&self, v: usize) -> &[usize] {
        &self.var_checks[v]
    }

    pub fn checks(&self) -> &[Vec<usize>] {
        &self.check_vars
    }

    /// Syndrome `H x` over GF(2).
    pub fn syndrome(&self, x: &[u8]) -> Vec<u8> {
        assert_eq!(x.len(), self.n_vars);
        self.check_vars.iter().map(|vars| vars.iter().fold(0u8, |acc, &v| acc ^ (x[v] & 1))).collect()
    }

    pub fn is_codeword(&self, x: &[u8]) -> bool {
        self.syndrome(x).iter().all(|&s| s == 0)
    }

    /// Dense parity-check matrix.
    pub fn parity_matrix(&self) -> BitMatrix {
        let mut h = BitMatrix::zeros(self.n_checks(), self.n_vars);
        for (c, vars) in self.check_vars.iter().enumerate() {
            for &v in vars {
                h.set(c, v, true);
            }
        }
        h
    }

    pub fn degree_profile(&self) -> DegreeProfile {
        let mut check = BTreeMap::new();
        for vars in &self.check_vars {
            *check.entry(vars.len()).or_insert(0) += 1;
        }
        let mut variable = BTreeMap::new();
        for checks in &self.var_checks {
            *variable.entry(checks.len()).or_insert(0) += 1;
        }
        DegreeProfile { check, variable }
    }

    /// Length of the shortest cycle, `None` if the graph is a forest.
    ///
    /// Runs a breadth-first search from every variable node and stops each
    /// search once it is deeper than half the best cycle found so far. Every
    /// cycle passes through a variable node, so the minimum over those
    /// searches is exact.
    pub fn girth(&self) -> Option<usize> {
        let n = self.n_vars;
        let total = n + self.n_checks();
        let neighbors = |u: usize| -> &[usize] {
            if u < n {
                &self.var_checks[u]
            } else {
                &self.check_vars[u - n]
            }
        };
        let mut best = usize::MAX;
        let mut stamp = vec![usize::MAX; total];
        let mut dist = vec![0usize; total];
        let mut parent = vec![usize::MAX; total];
        let mut queue = VecDeque::new();
        for root in 0..n {
            if best == 4 {
                break;
            }
            queue.clear();
            stamp[root] = root;
            dist[root] = 0;
            parent[root] = usize::MAX;
            queue.push_back(root);
            'bfs: while let Some(u) = queue.pop_front() {
                if 2 * dist[u] + 2 >= best {
                    break;
                }
                for &w in neighbors(u) {
                    let w = if u < n { w + n } else { w };
                    if w == parent[u] {
                        continue;
                    }
                    if stamp[w] == root {
                        best = best.min(dist[u] + dist[w] + 1);
                        if 2 * dist[u] + 2 >= best {
                            break 'bfs;
                        }
                    } else {
                        stamp[w] = root;
                        dist[w] = dist[u] + 1;
                        parent[w] = u;
                        queue.push_back(w);
                    }
                }
            }
        }
        (best != usize::MAX).then_some(best)
    }
}

/// Histograms of check and variable degrees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub check: BTreeMap<usize, usize>,
    pub variable: BTreeMap<usize, usize>,
}

/// Edge label: the symbol time `t` and check offset `k` (the check sits at
/// time `t + k`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeClass {
    pub time: usize,
    pub offset: usize,
}

/// A terminated code: `L + J` symbol times of `2M` symbols and
/// `L + 2J - 1` check times of `M` checks.
///
/// Symbol `x` of half `h` at time `t` (1-based) has index
/// `(t - 1) * 2M + h * M + x`; check `r` of time `s` has index `(s - 1) * M + r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminatedCode {
    pub params: EnsembleParams,
    pub graph: TannerGraph,
    edge_classes: Vec<Vec<EdgeClass>>,
}

impl TerminatedCode {
    pub fn n(&self) -> usize {
        self.graph.n_vars()
    }

    pub fn n_checks(&self) -> usize {
        self.graph.n_checks()
    }

    /// Time label (1-based) of variable `v`.
    pub fn var_time(&self, v: usize) -> usize {
        v / self.params.symbols_per_time() + 1
    }

    /// Time label (1-based) of check `c`.
    pub fn check_time(&self, c: usize) -> usize {
        c / self.params.m + 1
    }

    /// Edge classes of check `c`, parallel to `graph.check_neighbors(c)`.
    pub fn edge_classes(&self, c: usize) -> &[EdgeClass] {
        &self.edge_classes[c]
    }

    /// Variable indices of time `t` (1-based).
    pub fn vars_at(&self, t: usize) -> std::ops::Range<usize> {
        let c = self.params.symbols_per_time();
        (t - 1) * c..t * c
    }

    /// Indices of the information symbols (first half of each of the first
    /// `L` time instants).
    pub fn info_positions(&self) -> Vec<usize> {
        let p = &self.params;
        (1..=p.l).flat_map(|t| self.vars_at(t).take(p.m)).collect()
    }

    pub fn degree_profile(&self) -> DegreeProfile {
        self.graph.degree_profile()
    }

    pub fn girth(&self) -> Option<usize> {
        self.graph.girth()
    }
}

/// Builds the terminated code of a syndrome former.
///
/// Symbols before time 1 and after time `L + J` are known to be zero, so the
/// check-side edges that would reach them are dropped; every symbol keeps its
/// `J` edges.
pub fn terminate(sf: &SyndromeFormer) -> Result<TerminatedCode> {
    let p = sf.params;
    p.validate()?;
    let mut checks: Vec<Vec<(usize, EdgeClass)>> = vec![Vec::new(); p.check_count()];
    for b in sf.blocks() {
        let s = b.time + b.offset;
        for (x, &r) in b.perm.iter().enumerate() {
            let v = (b.time - 1) * 2 * p.m + b.half * p.m + x;
            let c = (s - 1) * p.m + r as usize;
            checks[c].push((v, EdgeClass { time: b.time, offset: b.offset }));
        }
    }
    let mut edge_classes = Vec::with_capacity(checks.len());
    let mut lists = Vec::with_capacity(checks.len());
    for mut entries in checks {
        entries.sort_unstable_by_key(|e| e.0);
        lists.push(entries.iter().map(|e| e.0).collect());
        edge_classes.push(entries.into_iter().map(|e| e.1).collect());
    }
    let graph = TannerGraph::from_checks(p.code_length(), lists)?;
    Ok(TerminatedCode { params: p, graph, edge_classes })
}

/// Expected degree of every check at check time `s` (1-based):
/// `2 * |{i in 0..J : 1 <= s - i <= L + J}|`.
pub fn check_degree_at(params: &EnsembleParams, s: usize) -> usize {
    let n = params.variable_times();
    2 * (0..params.j).filter(|&i| s > i && s - i <= n).count()
}

/// Design and structural rates of a terminated code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub design_rate: f64,
    pub design_rate_fraction: (u64, u64),
    pub structural_rate: f64,
    pub rank: usize,
    pub n: usize,
    pub check_count: usize,
}

/// Computes the design rate and the structural rate `1 - rank(H)/n`.
///
/// The rank is found by dense elimination, which is cubic in the code size.
pub fn rates(code: &TerminatedCode) -> RateReport {
    let rank = code.graph.parity_matrix().rank();
    let n = code.n();
    RateReport {
        design_rate: code.params.design_rate(),
        design_rate_fraction: code.params.design_rate_fraction(),
        structural_rate: 1.0 - rank as f64 / n as f64,
        rank,
        n,
        check_count: code.n_checks(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::sample_ensemble;

    fn code(j: usize, m: usize, l: usize, seed: u64) -> TerminatedCode {
        terminate(&sample_ensemble(EnsembleParams::new(j, m, l).unwrap(), seed).unwrap()).unwrap()
    }

    #[test]
    fn sizes_follow_the_termination_formulas() {
        let c = code(3, 4, 2, 0);
        assert_eq!(c.n(), 40);
        assert_eq!(c.n_checks(), 28);
    }

    #[test]
    fn check_degrees_per_time() {
        let p = EnsembleParams::new(3, 4, 100).unwrap();
        let c = code(3, 4, 100, 5);
        for s in 1..=p.check_times() {
            let expected = match s {
                1 | 105 => 2,
                2 | 104 => 4,
                _ => 6,
            };
            assert_eq!(check_degree_at(&p, s), expected);
            for r in 0..4 {
                assert_eq!(c.graph.check_neighbors((s - 1) * 4 + r).len(), expected);
            }
        }
        assert!(c.graph.var_neighbors(17).len() == 3);
    }

    #[test]
    fn edge_classes_match_times() {
        let c = code(4, 3, 5, 2);
        for ch in 0..c.n_checks() {
            let s = c.check_time(ch);
            for (&v, class) in c.graph.check_neighbors(ch).iter().zip(c.edge_classes(ch)) {
                assert_eq!(c.var_time(v), class.time);
                assert_eq!(class.time + class.offset, s);
            }
        }
    }

    #[test]
    fn hand_built_four_cycle() {
        let g = TannerGraph::from_checks(3, vec![vec![0, 1], vec![0, 1, 2]]).unwrap();
        assert_eq!(g.girth(), Some(4));
        let tree = TannerGraph::from_checks(4, vec![vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        assert_eq!(tree.girth(), None);
        let six = TannerGraph::from_checks(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        assert_eq!(six.girth(), Some(6));
    }

    #[test]
    fn sampled_codes_are_simple_graphs() {
        for seed in 0..5 {
            let g = code(3, 2, 3, seed).girth().unwrap();
            assert!(g >= 4 && g.is_multiple_of(2));
        }
    }

    #[test]
    fn from_checks_rejects_bad_input() {
        assert!(TannerGraph::from_checks(2, vec![vec![0, 2]]).is_err());
        assert!(TannerGraph::from_checks(2, vec![vec![1, 1]]).is_err());
    }
}
