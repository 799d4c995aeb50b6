//! Sliding-window density-evolution schedule.
//!
//! Levels `t'..=min(t' + W - 1, c)` are swept repeatedly, with `c` the graph
//! center: every check-to-variable message a level needs is recomputed on
//! demand, then the level's variable messages are updated and mirrored to the
//! other half of the graph. The window advances while the leading level's
//! largest Bhattacharyya parameter is below `B0`.

use serde::{Deserialize, Serialize};

use crate::de::{breakout_value, run_de, BecEngine, DeConfig, DeEngine, Layout, Verdict};
use crate::error::{invalid, Result};
use crate::fmt::Csv;

pub const WINDOW_REPORT_SCHEMA: &str = "ldpcc.window_report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub width: usize,
    /// Shift target; defaults to half the breakout value.
    pub b0: Option<f64>,
    /// Sweeps allowed at one window position before the run stalls.
    pub per_position_budget: usize,
    pub max_total_sweeps: usize,
    /// Stall once no Bhattacharyya value in the window moves by more than this.
    pub stagnation_tol: f64,
    /// Levels whose `P_b` is recorded after each sweep that touches them.
    pub sampled_levels: Vec<usize>,
}

impl WindowConfig {
    pub fn new(width: usize) -> Self {
        WindowConfig {
            width,
            b0: None,
            per_position_budget: 10_000,
            max_total_sweeps: usize::MAX,
            stagnation_tol: 1e-13,
            sampled_levels: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StallReason {
    PositionBudget,
    TotalBudget,
    Stagnated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum WindowVerdict {
    /// Every level up to the center reached `B0`.
    Completed,
    Stalled {
        position: usize,
        reason: StallReason,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// Global sweep index (1-based).
    pub sweep: u64,
    /// Updates of this level so far.
    pub level_updates: u64,
    pub pb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelTrace {
    pub level: usize,
    pub points: Vec<TracePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub width: usize,
    pub b0: f64,
    pub b_br: f64,
    pub a: f64,
    pub center: usize,
    /// Variable-node activations per level `1..=center`.
    pub updates_per_level: Vec<u64>,
    /// Global sweep index at which the window moved past each level.
    pub shift_sweeps: Vec<u64>,
    pub shifts: usize,
    pub total_sweeps: u64,
    pub verdict: WindowVerdict,
    pub level_traces: Vec<LevelTrace>,
    /// Largest Bhattacharyya value over all classes at the end of the run.
    pub final_bmax: f64,
}

impl WindowReport {
    pub fn completed(&self) -> bool {
        self.verdict == WindowVerdict::Completed
    }

    /// Level traces as CSV (`level,sweep,level_updates,pb`).
    pub fn traces_csv(&self) -> String {
        let mut out = format!("# schema: {WINDOW_REPORT_SCHEMA}.level_traces\nlevel,sweep,level_updates,pb\n");
        for tr in &self.level_traces {
            for p in &tr.points {
                out.push_str(&format!("{},{},{},{}\n", tr.level, p.sweep, p.level_updates, Csv(p.pb)));
            }
        }
        out
    }
}

fn level_bmax<E: DeEngine + ?Sized>(engine: &E, t: usize) -> f64 {
    (0..engine.layout().j).map(|k| engine.bhattacharyya(t, k)).fold(0.0, f64::max)
}

/// Runs the window schedule on a terminated layout.
pub fn run_windowed<E: DeEngine + ?Sized>(engine: &mut E, cfg: &WindowConfig) -> Result<WindowReport> {
    let lay = *engine.layout();
    if !lay.mirrorable() {
        return invalid("the window schedule needs a terminated layout");
    }
    let c = lay.center();
    if cfg.width == 0 || cfg.width > c {
        return invalid(format!("window width {} outside 1..={c}", cfg.width));
    }
    let a = engine.channel_bhattacharyya();
    let b_br = breakout_value(lay.j, a)?;
    let b0 = cfg.b0.unwrap_or(b_br / 2.0);
    if !(b0 > 0.0 && b0 < b_br) {
        return invalid(format!("B0 = {b0} must lie in (0, B_br = {b_br})"));
    }
    let mut updates = vec![0u64; c];
    let mut shift_sweeps = Vec::new();
    let mut traces: Vec<LevelTrace> = cfg
        .sampled_levels
        .iter()
        .filter(|&&t| t >= 1 && t <= c)
        .map(|&t| LevelTrace { level: t, points: Vec::new() })
        .collect();
    let mut lead = 1usize;
    let mut local = 0usize;
    let mut sweeps = 0u64;
    let mut before = vec![0.0; cfg.width * lay.j];
    let verdict = loop {
        if lead > c {
            break WindowVerdict::Completed;
        }
        let end = (lead + cfg.width - 1).min(c);
        for (slot, t) in (lead..=end).enumerate() {
            for k in 0..lay.j {
                before[slot * lay.j + k] = engine.bhattacharyya(t, k);
            }
        }
        for t in lead..=end {
            for k in 0..lay.j {
                engine.refresh_check_message(t, k)?;
            }
            engine.update_variable(t)?;
            updates[t - 1] += 1;
            let image = lay.n + 1 - t;
            if image > c {
                engine.mirror_variable(image);
            }
        }
        sweeps += 1;
        local += 1;
        for tr in traces.iter_mut().filter(|tr| tr.level >= lead && tr.level <= end) {
            let pb = engine.error_probability(tr.level)?;
            tr.points.push(TracePoint { sweep: sweeps, level_updates: updates[tr.level - 1], pb });
        }
        let mut moved = 0.0f64;
        for (slot, t) in (lead..=end).enumerate() {
            for k in 0..lay.j {
                moved = moved.max((engine.bhattacharyya(t, k) - before[slot * lay.j + k]).abs());
            }
        }
        while lead <= c && level_bmax(engine, lead) < b0 {
            shift_sweeps.push(sweeps);
            lead += 1;
            local = 0;
        }
        if lead > c {
            continue;
        }
        if local > 0 && moved < cfg.stagnation_tol {
            break WindowVerdict::Stalled { position: lead, reason: StallReason::Stagnated };
        }
        if local >= cfg.per_position_budget {
            break WindowVerdict::Stalled { position: lead, reason: StallReason::PositionBudget };
        }
        if sweeps as usize >= cfg.max_total_sweeps {
            break WindowVerdict::Stalled { position: lead, reason: StallReason::TotalBudget };
        }
    };
    let final_bmax = engine.bhattacharyya_all().into_iter().fold(0.0, f64::max);
    Ok(WindowReport {
        width: cfg.width,
        b0,
        b_br,
        a,
        center: c,
        updates_per_level: updates,
        shifts: shift_sweeps.len(),
        shift_sweeps,
        total_sweeps: sweeps,
        verdict,
        level_traces: traces,
        final_bmax,
    })
}

/// Flatness of the updates-per-level profile over `[W + 1, c - W + 1]`.
///
/// Level `W` is in the window from the first sweep and collects the ramp-up
/// peak; the plateau starts just after it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauStats {
    pub start: usize,
    pub end: usize,
    /// The plateau region is empty (`c < 2W - 1`).
    pub empty: bool,
    pub mean: f64,
    /// `max |u(t) - mean| / mean` over the plateau.
    pub max_rel_deviation: f64,
    /// Level with the most updates (smallest such level).
    pub peak_level: usize,
    pub center_updates: u64,
}

pub fn profile_updates(report: &WindowReport) -> PlateauStats {
    let w = report.width;
    let c = report.center;
    let u = &report.updates_per_level;
    let start = w + 1;
    let end = (c + 1).saturating_sub(w);
    let peak_level = u.iter().enumerate().fold((0, 0u64), |best, (i, &v)| if v > best.1 { (i, v) } else { best }).0 + 1;
    let center_updates = u.last().copied().unwrap_or(0);
    if start > end || end > u.len() {
        return PlateauStats { start, end, empty: true, mean: 0.0, max_rel_deviation: 0.0, peak_level, center_updates };
    }
    let region = &u[start - 1..end];
    let mean = region.iter().sum::<u64>() as f64 / region.len() as f64;
    let max_rel_deviation =
        if mean > 0.0 { region.iter().map(|&v| (v as f64 - mean).abs() / mean).fold(0.0, f64::max) } else { 0.0 };
    PlateauStats { start, end, empty: false, mean, max_rel_deviation, peak_level, center_updates }
}

/// Largest pointwise relative gap between two `P_b`-vs-updates curves after
/// the best integer horizontal shift, over points where both curves exceed
/// `min_pb`. Returns `(gap, shift)`; `None` if no shift leaves any overlap.
pub fn aligned_curve_gap(a: &LevelTrace, b: &LevelTrace, min_pb: f64) -> Option<(f64, i64)> {
    let pa: Vec<(i64, f64)> = a.points.iter().map(|p| (p.level_updates as i64, p.pb)).collect();
    let pb: std::collections::HashMap<i64, f64> = b.points.iter().map(|p| (p.level_updates as i64, p.pb)).collect();
    let span = pa.len() as i64 + b.points.len() as i64;
    let mut best: Option<(f64, i64)> = None;
    for shift in -span..=span {
        let mut gap = 0.0f64;
        let mut overlap = 0usize;
        for &(x, va) in &pa {
            if let Some(&vb) = pb.get(&(x + shift)) {
                if va > min_pb && vb > min_pb {
                    gap = gap.max((va - vb).abs() / va.max(vb));
                    overlap += 1;
                }
            }
        }
        if overlap * 2 >= pa.len().min(b.points.len()) && overlap > 0 && best.is_none_or(|(g, _)| gap < g) {
            best = Some((gap, shift));
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthProbe {
    pub width: usize,
    pub completed: bool,
    pub total_sweeps: u64,
    /// Relative change of the shift schedule against the previous width.
    pub change: Option<f64>,
}

/// Doubles `W` from `J` until the shift schedule changes by less than `tol`
/// relative to the previous width; returns the larger width of that pair,
/// or the last completed width if the schedule never settles.
pub fn choose_width<E, F>(mut make_engine: F, base: &WindowConfig, tol: f64) -> Result<(usize, Vec<WidthProbe>)>
where
    E: DeEngine,
    F: FnMut() -> Result<E>,
{
    let probe_engine = make_engine()?;
    let lay = *probe_engine.layout();
    drop(probe_engine);
    let c = lay.center();
    let mut w = lay.j.min(c);
    let mut probes = Vec::new();
    let mut prev: Option<Vec<u64>> = None;
    loop {
        let mut engine = make_engine()?;
        let cfg = WindowConfig { width: w, sampled_levels: Vec::new(), ..base.clone() };
        let rep = run_windowed(&mut engine, &cfg)?;
        let change = match (&prev, rep.completed()) {
            (Some(p), true) => Some(
                p.iter()
                    .zip(&rep.shift_sweeps)
                    .map(|(&x, &y)| (x as f64 - y as f64).abs() / (y as f64).max(1.0))
                    .fold(0.0, f64::max),
            ),
            _ => None,
        };
        probes.push(WidthProbe { width: w, completed: rep.completed(), total_sweeps: rep.total_sweeps, change });
        if change.is_some_and(|ch| ch < tol) {
            return Ok((w, probes));
        }
        prev = rep.completed().then_some(rep.shift_sweeps);
        if w == c {
            let last_ok = probes.iter().rev().find(|p| p.completed).map_or(c, |p| p.width);
            return Ok((last_ok, probes));
        }
        w = (2 * w).min(c);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prop1Outcome {
    /// The window certified and so did the parallel schedule.
    Consistent,
    /// The window did not certify; nothing to check.
    Vacuous,
    /// The parallel run ran out of budget while still moving.
    BudgetLimited,
    /// The parallel schedule reached a fixed point above the breakout value.
    Counterexample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop1Record {
    pub epsilon: f64,
    pub window_completed: bool,
    pub parallel: Verdict,
    pub outcome: Prop1Outcome,
}

/// For each erasure probability, a certified window run must imply a
/// certified parallel run.
pub fn check_prop1(
    j: usize,
    l: usize,
    epsilons: &[f64],
    window: &WindowConfig,
    parallel: &DeConfig,
) -> Result<Vec<Prop1Record>> {
    let lay = Layout::terminated(j, l)?;
    epsilons
        .iter()
        .map(|&eps| {
            let rep = run_windowed(&mut BecEngine::new(lay, eps)?, window)?;
            let par = run_de(&mut BecEngine::new(lay, eps)?, parallel)?;
            let outcome = match (rep.completed(), par.verdict) {
                (false, _) => Prop1Outcome::Vacuous,
                (true, Verdict::Certified { .. }) => Prop1Outcome::Consistent,
                (true, Verdict::NotConverged { reason: crate::de::StopReason::Budget }) => Prop1Outcome::BudgetLimited,
                (true, Verdict::NotConverged { .. }) => Prop1Outcome::Counterexample,
            };
            Ok(Prop1Record { epsilon: eps, window_completed: rep.completed(), parallel: par.verdict, outcome })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prop2Outcome {
    Holds,
    Fails,
    /// Fewer than `J` shifts: the premise is not met.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop2Record {
    pub shifts: usize,
    pub outcome: Prop2Outcome,
    /// Run on a channel other than the erasure channel, where the statement
    /// is only conjectured.
    pub conjecture: bool,
    pub final_bmax: f64,
    pub b0: f64,
}

/// Runs the window schedule; once it has shifted `J` times, every class at
/// every level must end at or below `B0`.
pub fn check_prop2<E: DeEngine + ?Sized>(engine: &mut E, cfg: &WindowConfig, erasure: bool) -> Result<Prop2Record> {
    let j = engine.layout().j;
    let rep = run_windowed(engine, cfg)?;
    let outcome = if rep.shifts < j {
        Prop2Outcome::NotApplicable
    } else if rep.completed() && rep.final_bmax <= rep.b0 {
        Prop2Outcome::Holds
    } else {
        Prop2Outcome::Fails
    };
    Ok(Prop2Record { shifts: rep.shifts, outcome, conjecture: !erasure, final_bmax: rep.final_bmax, b0: rep.b0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(width: usize, updates: Vec<u64>) -> WindowReport {
        WindowReport {
            width,
            b0: 0.01,
            b_br: 0.02,
            a: 0.4,
            center: updates.len(),
            updates_per_level: updates,
            shift_sweeps: Vec::new(),
            shifts: 0,
            total_sweeps: 0,
            verdict: WindowVerdict::Completed,
            level_traces: Vec::new(),
            final_bmax: 0.0,
        }
    }

    #[test]
    fn uniform_profile_is_flat() {
        let s = profile_updates(&synthetic(3, vec![5; 12]));
        assert!(!s.empty);
        assert_eq!((s.start, s.end), (4, 10));
        assert_eq!(s.max_rel_deviation, 0.0);
    }

    #[test]
    fn short_sweep_has_no_plateau() {
        assert!(profile_updates(&synthetic(5, vec![1; 8])).empty);
    }

    #[test]
    fn small_erasure_run_completes() {
        let lay = Layout::terminated(3, 40).unwrap();
        let mut e = BecEngine::new(lay, 0.1).unwrap();
        let rep = run_windowed(&mut e, &WindowConfig::new(10)).unwrap();
        assert!(rep.completed());
        assert_eq!(rep.shifts, lay.center());
    }
}
