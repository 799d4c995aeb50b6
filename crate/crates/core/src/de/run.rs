//! Parallel-schedule driver with breakout certification.

use serde::{Deserialize, Serialize};

use super::bounds::{bmax, breakout_value, contraction_holds, lemma1_step, Lemma1Form};
use super::DeEngine;
use crate::error::Result;

/// Practical-convergence target on the largest per-level bit error rate.
pub const PRACTICAL_PB_TARGET: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeConfig {
    /// Parallel iterations allowed.
    pub max_iters: usize,
    /// Keep iterating after breakout until `B_max <= target`.
    pub target_bmax: Option<f64>,
    /// Iterations to continue after breakout when no target is set.
    pub extra_iters: usize,
    /// Per-level `P_b` snapshot every `pb_stride` iterations (0 disables).
    pub pb_stride: usize,
    /// Stop without a certificate once no `B` moves by more than this.
    pub stagnation_tol: f64,
    /// Compute only up to the graph center and mirror the rest.
    pub mirror: bool,
    /// Track the one-step bound recursion and the contraction inequality.
    pub track_bounds: bool,
}

impl Default for DeConfig {
    fn default() -> Self {
        DeConfig {
            max_iters: 100_000,
            target_bmax: None,
            extra_iters: 0,
            pb_stride: 0,
            stagnation_tol: 1e-13,
            mirror: false,
            track_bounds: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Budget,
    Stagnated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// `B_max` dropped below the breakout value at iteration `breakout`.
    Certified {
        breakout: usize,
    },
    NotConverged {
        reason: StopReason,
    },
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::Certified { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbSnapshot {
    pub iteration: usize,
    pub pb: Vec<f64>,
}

/// Comparison of actual `B` values with the bound recursion seeded from the
/// actual iteration-1 values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub comparisons: u64,
    /// Comparisons skipped because the bound fell under the engine floor.
    pub skipped: u64,
    pub violations: u64,
    /// Violations of the bound with squared cross terms (informational).
    pub as_printed_violations: u64,
    /// Largest `actual / bound` over compared entries.
    pub max_ratio: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub checked: u64,
    pub skipped: u64,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeTrace {
    pub j: usize,
    pub n_times: usize,
    /// Bhattacharyya parameter of the channel messages used in the bounds.
    pub a: f64,
    pub b_br: f64,
    pub floor: f64,
    /// `B_max` after iterations `1, 2, ...`.
    pub bmax: Vec<f64>,
    /// `(t, k)` attaining `B_max` per iteration.
    pub bmax_at: Vec<(usize, usize)>,
    pub breakout: Option<usize>,
    pub verdict: Verdict,
    pub iterations: usize,
    pub pb_snapshots: Vec<PbSnapshot>,
    pub final_b: Vec<f64>,
    pub final_pb: Vec<f64>,
    /// `max_t P_b(t)` at the end of the run.
    pub max_pb: f64,
    /// Practical criterion `max_t P_b(t) < 1e-10`; never a certificate.
    pub practical_converged: bool,
    pub lemma1: Option<Lemma1Report>,
    pub contraction: ContractionReport,
    /// Variable-to-check messages start at the channel density; the bound
    /// recursion is seeded from iteration 1 (a zero seed stays zero).
    pub message_init: String,
    pub bound_init: String,
}

/// One parallel iteration: all checks, then all variables.
pub fn parallel_iteration<E: DeEngine + ?Sized>(engine: &mut E, mirror: bool) -> Result<()> {
    let lay = *engine.layout();
    let mirror = mirror && lay.mirrorable();
    let (last_check, last_var) = if mirror {
        ((lay.center() + lay.j - 1).min(lay.check_times()), lay.center())
    } else {
        (lay.check_times(), lay.n)
    };
    for s in 1..=last_check {
        engine.update_check(s)?;
    }
    for t in 1..=last_var {
        engine.update_variable(t)?;
    }
    if mirror {
        for t in last_var + 1..=lay.n {
            engine.mirror_variable(t);
        }
    }
    Ok(())
}

fn all_pb<E: DeEngine + ?Sized>(engine: &mut E) -> Result<Vec<f64>> {
    let n = engine.layout().n;
    (1..=n).map(|t| engine.error_probability(t)).collect()
}

/// Iterates the parallel schedule until certification, stagnation or budget.
pub fn run_de<E: DeEngine + ?Sized>(engine: &mut E, cfg: &DeConfig) -> Result<DeTrace> {
    let lay = *engine.layout();
    let a = engine.channel_bhattacharyya();
    let b_br = breakout_value(lay.j, a)?;
    let floor = engine.floor();
    let skip_below = 100.0 * floor;

    let mut trace = DeTrace {
        j: lay.j,
        n_times: lay.n,
        a,
        b_br,
        floor,
        bmax: Vec::new(),
        bmax_at: Vec::new(),
        breakout: None,
        verdict: Verdict::NotConverged { reason: StopReason::Budget },
        iterations: 0,
        pb_snapshots: Vec::new(),
        final_b: Vec::new(),
        final_pb: Vec::new(),
        max_pb: 1.0,
        practical_converged: false,
        lemma1: cfg.track_bounds.then(Lemma1Report::default),
        contraction: ContractionReport::default(),
        message_init: "channel".into(),
        bound_init: "actual_iteration_1".into(),
    };

    let mut prev_b = engine.bhattacharyya_all();
    let mut bound: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut extra_left = cfg.extra_iters;
    let mut stop = None;
    for ell in 1..=cfg.max_iters {
        parallel_iteration(engine, cfg.mirror)?;
        trace.iterations = ell;
        let b = engine.bhattacharyya_all();
        let (m, t, k) = bmax(&lay, &b);
        let prev_max = trace.bmax.last().copied();
        trace.bmax.push(m);
        trace.bmax_at.push((t, k));

        if let Some(rep) = trace.lemma1.as_mut() {
            match bound.as_mut() {
                None => bound = Some((b.clone(), b.clone())),
                Some((edge, printed)) => {
                    *edge = lemma1_step(&lay, edge, a, Lemma1Form::EdgeMultiplicity);
                    *printed = lemma1_step(&lay, printed, a, Lemma1Form::AsPrinted);
                    for (i, &actual) in b.iter().enumerate() {
                        if edge[i] < skip_below {
                            rep.skipped += 1;
                            continue;
                        }
                        rep.comparisons += 1;
                        let ok = actual < edge[i] || (actual == 0.0 && edge[i] == 0.0);
                        if !ok {
                            rep.violations += 1;
                        }
                        if edge[i] > 0.0 {
                            rep.max_ratio = rep.max_ratio.max(actual / edge[i]);
                        }
                        if actual > printed[i] {
                            rep.as_printed_violations += 1;
                        }
                    }
                }
            }
        }

        if cfg.track_bounds {
            if let (Some(pm), Some(_)) = (prev_max, trace.breakout) {
                // Right-hand side of the contraction inequality, in B units.
                let rhs = b_br * (pm / b_br).powi(lay.j as i32 - 1);
                if pm == 0.0 || rhs < skip_below {
                    trace.contraction.skipped += 1;
                } else {
                    trace.contraction.checked += 1;
                    if !contraction_holds(lay.j, pm, m, b_br) {
                        trace.contraction.violations += 1;
                    }
                }
            }
        }

        if cfg.pb_stride > 0 && ell % cfg.pb_stride == 0 {
            trace.pb_snapshots.push(PbSnapshot { iteration: ell, pb: all_pb(engine)? });
        }

        if trace.breakout.is_none() && m < b_br {
            trace.breakout = Some(ell);
            trace.verdict = Verdict::Certified { breakout: ell };
        }
        if trace.breakout.is_some() {
            let done = match cfg.target_bmax {
                Some(target) => m <= target,
                None => {
                    if extra_left == 0 {
                        true
                    } else {
                        extra_left -= 1;
                        false
                    }
                }
            };
            if done || m == 0.0 {
                break;
            }
        } else {
            let moved = b.iter().zip(&prev_b).fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
            if moved < cfg.stagnation_tol {
                stop = Some(StopReason::Stagnated);
                break;
            }
        }
        prev_b = b;
    }
    if trace.breakout.is_none() {
        trace.verdict = Verdict::NotConverged { reason: stop.unwrap_or(StopReason::Budget) };
    }
    trace.final_b = engine.bhattacharyya_all();
    trace.final_pb = all_pb(engine)?;
    trace.max_pb = trace.final_pb.iter().copied().fold(0.0, f64::max);
    trace.practical_converged = trace.max_pb < PRACTICAL_PB_TARGET;
    Ok(trace)
}
