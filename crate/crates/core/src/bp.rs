//! Sum-product (belief propagation) decoding in the LLR domain.
//!
//! Check nodes use the signed log-magnitude form of the tanh rule,
//! `beta = s * phi(sum phi(|z|))` with `phi(x) = -ln tanh(x/2)`, which is its
//! own inverse. Erasure and perfect-knowledge inputs (`0` and `±inf`) are
//! handled exactly through `phi(0) = inf` and `phi(inf) = 0`.

use serde::{Deserialize, Serialize};

use crate::channel::{LlrWord, LLR_LIMIT};
use crate::code::{TannerGraph, TerminatedCode};
use crate::error::{invalid, Result};

/// `phi(x) = -ln tanh(x / 2)` for `x >= 0`.
pub fn phi(x: f64) -> f64 {
    if x <= 0.0 {
        f64::INFINITY
    } else if x.is_infinite() {
        0.0
    } else {
        let e = (-x).exp();
        let log_one_minus_e = if x > std::f64::consts::LN_2 { (-e).ln_1p() } else { (-(-x).exp_m1()).ln() };
        e.ln_1p() - log_one_minus_e
    }
}

fn saturate(x: f64) -> f64 {
    x.clamp(-LLR_LIMIT, LLR_LIMIT)
}

/// Check-node rule `2 artanh(prod tanh(z / 2))` over the incoming messages.
///
/// A zero input annihilates the product. If every input is infinite the
/// result is infinite; otherwise it is saturated at `±LLR_LIMIT`.
pub fn check_update(incoming: &[f64]) -> f64 {
    assert!(!incoming.is_empty(), "check update needs at least one input");
    let mut negative = false;
    let mut sum = 0.0;
    for &z in incoming {
        if z == 0.0 {
            return 0.0;
        }
        negative ^= z < 0.0;
        sum += phi(z.abs());
    }
    let mag = if sum == 0.0 { f64::INFINITY } else { phi(sum).min(LLR_LIMIT) };
    if negative {
        -mag
    } else {
        mag
    }
}

/// Variable-node rule `alpha + sum_{j' != exclude} beta_j'`.
pub fn variable_update(alpha: f64, incoming: &[f64], exclude: usize) -> f64 {
    assert!(exclude < incoming.len());
    if alpha.is_infinite() {
        return alpha;
    }
    let sum: f64 = incoming.iter().enumerate().filter(|&(j, _)| j != exclude).map(|(_, &b)| b).sum();
    let z = alpha + sum;
    if z.is_nan() {
        0.0
    } else {
        saturate(z)
    }
}

/// Message-passing schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    /// All checks, then all symbols, every iteration.
    Parallel,
    /// Sweeps over symbol times `t'..t'+W-1`, computing check messages on
    /// demand. The window advances once every symbol at time `t'` has an
    /// a-posteriori magnitude of at least `target_llr`, or after
    /// `max_iters` sweeps at the same position.
    OnDemandWindow { width: usize, target_llr: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub decoded: Vec<u8>,
    /// All checks satisfied and no symbol left with a zero LLR.
    pub converged: bool,
    pub iterations: usize,
    /// Symbols whose a-posteriori LLR is exactly zero.
    pub unresolved: usize,
    /// Bit errors against the reference after each iteration (index 0 is
    /// before the first iteration). Unresolved symbols count as errors.
    pub error_trace: Vec<usize>,
    /// Bit errors per symbol time (1-based time `t` at index `t - 1`).
    pub level_errors: Vec<usize>,
    /// Final a-posteriori LLRs.
    #[serde(skip)]
    pub posterior: Vec<f64>,
}

/// Edge layout of a Tanner graph in check-major order.
#[derive(Debug, Clone)]
pub struct BpDecoder {
    n_vars: usize,
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    var_start: Vec<usize>,
    var_edges: Vec<usize>,
}

struct Messages {
    to_check: Vec<f64>,
    to_var: Vec<f64>,
    phi_buf: Vec<f64>,
}

impl BpDecoder {
    pub fn new(graph: &TannerGraph) -> Self {
        let mut check_start = Vec::with_capacity(graph.n_checks() + 1);
        let mut edge_var = Vec::with_capacity(graph.n_edges());
        check_start.push(0);
        for vars in graph.checks() {
            edge_var.extend_from_slice(vars);
            check_start.push(edge_var.len());
        }
        let mut counts = vec![0usize; graph.n_vars() + 1];
        for &v in &edge_var {
            counts[v + 1] += 1;
        }
        for v in 0..graph.n_vars() {
            counts[v + 1] += counts[v];
        }
        let var_start = counts.clone();
        let mut fill = counts;
        let mut var_edges = vec![0usize; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v]] = e;
            fill[v] += 1;
        }
        BpDecoder { n_vars: graph.n_vars(), check_start, edge_var, var_start, var_edges }
    }

    fn n_checks(&self) -> usize {
        self.check_start.len() - 1
    }

    fn check_of_edge(&self, e: usize) -> usize {
        self.check_start.partition_point(|&s| s <= e) - 1
    }

    /// Recomputes every outgoing message of check `c`.
    fn update_check(&self, c: usize, msg: &mut Messages) {
        let (lo, hi) = (self.check_start[c], self.check_start[c + 1]);
        let d = hi - lo;
        if d == 1 {
            // A degree-one check forces its symbol to zero.
            msg.to_var[lo] = LLR_LIMIT;
            return;
        }
        msg.phi_buf.clear();
        let mut zeros = 0usize;
        let mut negative = false;
        let mut finite_sum = 0.0;
        for e in lo..hi {
            let z = msg.to_check[e];
            negative ^= z < 0.0;
            let p = phi(z.abs());
            if p.is_infinite() {
                zeros += 1;
            } else {
                finite_sum += p;
            }
            msg.phi_buf.push(p);
        }
        // Leave-one-out via prefix sums to avoid cancellation.
        let mut prefix = 0.0;
        let mut suffix = vec![0.0; d + 1];
        for k in (0..d).rev() {
            let p = msg.phi_buf[k];
            suffix[k] = suffix[k + 1] + if p.is_infinite() { 0.0 } else { p };
        }
        let _ = finite_sum;
        for k in 0..d {
            let e = lo + k;
            let p = msg.phi_buf[k];
            let own_zero = p.is_infinite();
            let out = if zeros - own_zero as usize > 0 {
                0.0
            } else {
                let s = prefix + suffix[k + 1];
                let mag = if s == 0.0 { LLR_LIMIT } else { phi(s).min(LLR_LIMIT) };
                let neg = negative ^ (msg.to_check[e] < 0.0);
                if neg {
                    -mag
                } else {
                    mag
                }
            };
            msg.to_var[e] = out;
            if !own_zero {
                prefix += p;
            }
        }
    }

    /// Recomputes the single message carried by edge `e` towards its symbol.
    fn update_check_edge(&self, e: usize, msg: &mut Messages) {
        let c = self.check_of_edge(e);
        let (lo, hi) = (self.check_start[c], self.check_start[c + 1]);
        if hi - lo == 1 {
            msg.to_var[e] = LLR_LIMIT;
            return;
        }
        let mut negative = false;
        let mut sum = 0.0;
        for f in (lo..hi).filter(|&f| f != e) {
            let z = msg.to_check[f];
            if z == 0.0 {
                msg.to_var[e] = 0.0;
                return;
            }
            negative ^= z < 0.0;
            sum += phi(z.abs());
        }
        let mag = if sum == 0.0 { LLR_LIMIT } else { phi(sum).min(LLR_LIMIT) };
        msg.to_var[e] = if negative { -mag } else { mag };
    }

    /// Recomputes the outgoing messages of symbol `v`; returns its
    /// a-posteriori LLR.
    fn update_var(&self, v: usize, alpha: f64, msg: &mut Messages) -> f64 {
        let edges = &self.var_edges[self.var_start[v]..self.var_start[v + 1]];
        if alpha.is_infinite() {
            for &e in edges {
                msg.to_check[e] = alpha;
            }
            return alpha;
        }
        let total: f64 = alpha + edges.iter().map(|&e| msg.to_var[e]).sum::<f64>();
        for &e in edges {
            msg.to_check[e] = saturate(total - msg.to_var[e]);
        }
        total
    }

    fn posterior(&self, v: usize, alpha: f64, msg: &Messages) -> f64 {
        if alpha.is_infinite() {
            return alpha;
        }
        alpha + self.var_edges[self.var_start[v]..self.var_start[v + 1]].iter().map(|&e| msg.to_var[e]).sum::<f64>()
    }

    fn init(&self, llrs: &[f64]) -> Messages {
        let mut to_check = vec![0.0; self.edge_var.len()];
        for (e, &v) in self.edge_var.iter().enumerate() {
            to_check[e] = llrs[v];
        }
        Messages { to_check, to_var: vec![0.0; self.edge_var.len()], phi_buf: Vec::new() }
    }

    fn syndrome_ok(&self, decided: &[u8]) -> bool {
        (0..self.n_checks()).all(|c| {
            self.edge_var[self.check_start[c]..self.check_start[c + 1]].iter().fold(0u8, |a, &v| a ^ decided[v]) == 0
        })
    }

    fn decide(posteriors: &[f64], decided: &mut [u8]) -> usize {
        let mut unresolved = 0;
        for (d, &z) in decided.iter_mut().zip(posteriors) {
            *d = (z < 0.0) as u8;
            unresolved += (z == 0.0) as usize;
        }
        unresolved
    }

    fn count_errors(decided: &[u8], posteriors: &[f64], reference: &[u8]) -> usize {
        decided.iter().zip(posteriors).zip(reference).filter(|((&d, &z), &r)| z == 0.0 || d != (r & 1)).count()
    }

    /// Flooding decoder on an arbitrary graph.
    pub fn decode(&self, llrs: &LlrWord, max_iters: usize, reference: Option<&[u8]>) -> Result<DecodeResult> {
        self.run(llrs, Schedule::Parallel, max_iters, reference, None)
    }

    fn run(
        &self,
        llrs: &LlrWord,
        schedule: Schedule,
        max_iters: usize,
        reference: Option<&[u8]>,
        levels: Option<(usize, usize)>,
    ) -> Result<DecodeResult> {
        let alpha = llrs.as_slice();
        if alpha.len() != self.n_vars {
            return invalid(format!("expected {} LLRs, got {}", self.n_vars, alpha.len()));
        }
        if let Some(r) = reference {
            if r.len() != self.n_vars {
                return invalid("reference word has the wrong length");
            }
        }
        let mut msg = self.init(alpha);
        let mut post: Vec<f64> = alpha.to_vec();
        let mut decided = vec![0u8; self.n_vars];
        let mut unresolved = Self::decide(&post, &mut decided);
        let mut error_trace = Vec::new();
        if let Some(r) = reference {
            error_trace.push(Self::count_errors(&decided, &post, r));
        }
        let mut converged = unresolved == 0 && self.syndrome_ok(&decided);
        let mut iterations = 0;

        match schedule {
            Schedule::Parallel => {
                while !converged && iterations < max_iters {
                    for c in 0..self.n_checks() {
                        self.update_check(c, &mut msg);
                    }
                    for v in 0..self.n_vars {
                        post[v] = self.update_var(v, alpha[v], &mut msg);
                    }
                    iterations += 1;
                    unresolved = Self::decide(&post, &mut decided);
                    if let Some(r) = reference {
                        error_trace.push(Self::count_errors(&decided, &post, r));
                    }
                    converged = unresolved == 0 && self.syndrome_ok(&decided);
                }
            }
            Schedule::OnDemandWindow { width, target_llr } => {
                let Some((n_times, per_time)) = levels else {
                    return invalid("windowed decoding needs a terminated code");
                };
                if width == 0 || width > n_times.div_ceil(2) {
                    return invalid(format!("window width {width} outside 1..={}", n_times.div_ceil(2)));
                }
                if !converged {
                    let mut lead = 0usize;
                    let mut local = 0usize;
                    while lead < n_times {
                        let end = (lead + width).min(n_times);
                        for v in lead * per_time..end * per_time {
                            for k in self.var_start[v]..self.var_start[v + 1] {
                                self.update_check_edge(self.var_edges[k], &mut msg);
                            }
                            post[v] = self.update_var(v, alpha[v], &mut msg);
                        }
                        iterations += 1;
                        local += 1;
                        if let Some(r) = reference {
                            Self::decide(&post, &mut decided);
                            error_trace.push(Self::count_errors(&decided, &post, r));
                        }
                        while lead < n_times {
                            let reliable = (lead * per_time..(lead + 1) * per_time)
                                .all(|v| self.posterior(v, alpha[v], &msg).abs() >= target_llr);
                            if reliable || local >= max_iters {
                                lead += 1;
                                local = 0;
                            } else {
                                break;
                            }
                        }
                    }
                    for v in 0..self.n_vars {
                        post[v] = self.posterior(v, alpha[v], &msg);
                    }
                    unresolved = Self::decide(&post, &mut decided);
                    converged = unresolved == 0 && self.syndrome_ok(&decided);
                }
            }
        }

        let level_errors = match (reference, levels) {
            (Some(r), Some((n_times, per_time))) => (0..n_times)
                .map(|t| {
                    let range = t * per_time..(t + 1) * per_time;
                    Self::count_errors(&decided[range.clone()], &post[range.clone()], &r[range])
                })
                .collect(),
            _ => Vec::new(),
        };
        Ok(DecodeResult {
            decoded: decided,
            converged,
            iterations,
            unresolved,
            error_trace,
            level_errors,
            posterior: post,
        })
    }
}

/// Decodes a terminated code under the given schedule.
///
/// Symbols outside the terminated range are known zeros; their edges were
/// removed when the code was terminated, which is equivalent to holding their
/// messages at `+inf`.
pub fn bp_decode(
    code: &TerminatedCode,
    llrs: &LlrWord,
    schedule: Schedule,
    max_iters: usize,
    reference: Option<&[u8]>,
) -> Result<DecodeResult> {
    let dec = BpDecoder::new(&code.graph);
    decode_with(&dec, code, llrs, schedule, max_iters, reference)
}

/// Like [`bp_decode`] with a prebuilt decoder, for repeated frames.
pub fn decode_with(
    dec: &BpDecoder,
    code: &TerminatedCode,
    llrs: &LlrWord,
    schedule: Schedule,
    max_iters: usize,
    reference: Option<&[u8]>,
) -> Result<DecodeResult> {
    let levels = (code.params.variable_times(), code.params.symbols_per_time());
    dec.run(llrs, schedule, max_iters, reference, Some(levels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_rule_edge_cases() {
        assert_eq!(check_update(&[f64::INFINITY, f64::INFINITY]), f64::INFINITY);
        assert_eq!(check_update(&[3.0, 0.0, -2.0]), 0.0);
        let expected = 2.0 * (1f64.tanh().powi(2)).atanh();
        assert!((check_update(&[2.0, 2.0]) - expected).abs() < 1e-12);
        assert!((check_update(&[2.0, 2.0]) - 1.325_002_747_357_864).abs() < 1e-13);
        assert_eq!(check_update(&[-f64::INFINITY, 1.5]), -1.5);
    }

    #[test]
    fn variable_rule_edge_cases() {
        assert!((variable_update(1.0, &[0.5, -0.25, 0.75], 0) - 1.5).abs() < 1e-15);
        assert_eq!(variable_update(f64::INFINITY, &[-3.0, 2.0], 1), f64::INFINITY);
        assert_eq!(variable_update(0.7, &[0.0, 0.0, 0.0], 2), 0.7);
        assert_eq!(variable_update(40.0, &[30.0, 0.0], 1), LLR_LIMIT);
    }

    #[test]
    fn phi_is_an_involution() {
        for &x in &[1e-6, 0.01, 0.5, 1.0, 3.0, 10.0, 30.0] {
            assert!((phi(phi(x)) - x).abs() < 1e-9 * x.max(1.0));
        }
    }
}
