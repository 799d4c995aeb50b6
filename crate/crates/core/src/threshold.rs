//! Threshold search by bisection over density-evolution verdicts.

use serde::{Deserialize, Serialize};

use crate::channel::{ebn0_db_from_sigma, sigma_from_ebn0_db, ChannelModel};
use crate::de::{run_de, BecEngine, DeConfig, DeEngine, DensityEngine, Grid, Layout};
use crate::ensemble::design_rate;
use crate::error::{invalid, Error, Result};
use crate::window::{run_windowed, WindowConfig};

pub const THRESHOLD_SCHEMA: &str = "ldpcc.threshold/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelFamily {
    /// Parameter is the erasure probability; smaller is better.
    Bec,
    /// Parameter is Eb/N0 in dB; larger is better.
    AwgnEbN0Db,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EngineChoice {
    Parallel,
    Window { width: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// `B_max` below the breakout value (window: every level below `B0`).
    Breakout,
    /// `max_t P_b(t) < 1e-10` at the end of a parallel run.
    Practical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdQuery {
    pub j: usize,
    /// Termination length; `None` analyses the single-position block ensemble.
    pub l: Option<usize>,
    pub family: ChannelFamily,
    /// Bracket in channel-parameter units; order does not matter.
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
    pub engine: EngineChoice,
    pub certificate: Certificate,
    pub grid: Grid,
    pub de: DeConfig,
    pub window: WindowConfig,
}

impl ThresholdQuery {
    pub fn new(j: usize, l: Option<usize>, family: ChannelFamily) -> Self {
        let (lo, hi, tol) = match family {
            ChannelFamily::Bec => (0.3, 0.6, 1e-4),
            ChannelFamily::AwgnEbN0Db => (0.0, 1.5, 0.01),
        };
        ThresholdQuery {
            j,
            l,
            family,
            lo,
            hi,
            tol,
            engine: EngineChoice::Parallel,
            certificate: Certificate::Breakout,
            grid: Grid::default(),
            de: DeConfig::default(),
            window: WindowConfig::new(1),
        }
    }

    /// Code rate used for the Eb/N0 conversion.
    pub fn rate(&self) -> f64 {
        match self.l {
            Some(l) => design_rate(self.j, l),
            None => 0.5,
        }
    }

    pub fn layout(&self) -> Result<Layout> {
        match self.l {
            Some(l) => Layout::terminated(self.j, l),
            None => Layout::block(self.j),
        }
    }

    pub fn channel(&self, param: f64) -> ChannelModel {
        match self.family {
            ChannelFamily::Bec => ChannelModel::Bec { epsilon: param },
            ChannelFamily::AwgnEbN0Db => ChannelModel::awgn_from_ebn0_db(param, self.rate()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub param: f64,
    pub good: bool,
    /// Parallel iterations, or window sweeps.
    pub work: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub threshold: f64,
    /// Final bracket `[lo, hi]` with `hi - lo <= tol`.
    pub bracket: (f64, f64),
    pub good_endpoint: f64,
    pub bad_endpoint: f64,
    pub certificate: Certificate,
    pub rate: f64,
    /// Noise deviation at the estimate (BiAWGN only).
    pub sigma: Option<f64>,
    /// Bad endpoint re-run with a doubled budget and still failing
    /// (BiAWGN only).
    pub bad_endpoint_reverified: Option<bool>,
    pub work: u64,
    pub probes: Vec<Probe>,
}

/// Bisects between a parameter known to be good and one known to be bad.
///
/// Both endpoints are probed first; if they agree the bracket is rejected.
pub fn bisect<F>(good: f64, bad: f64, tol: f64, mut probe: F) -> Result<(f64, f64, Vec<Probe>)>
where
    F: FnMut(f64) -> Result<Probe>,
{
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let mut probes = Vec::new();
    let g = probe(good)?;
    let b = probe(bad)?;
    let (g_ok, b_ok) = (g.good, b.good);
    probes.push(g);
    probes.push(b);
    match (g_ok, b_ok) {
        (true, false) => {}
        (true, true) => return Err(Error::Bracket("good")),
        (false, false) => return Err(Error::Bracket("bad")),
        (false, true) => return invalid("bracket endpoints are inverted"),
    }
    let (mut good, mut bad) = (good, bad);
    while (good - bad).abs() > tol {
        let mid = 0.5 * (good + bad);
        let p = probe(mid)?;
        if p.good {
            good = mid;
        } else {
            bad = mid;
        }
        probes.push(p);
    }
    Ok((good, bad, probes))
}

fn probe_engine<E: DeEngine>(engine: &mut E, q: &ThresholdQuery, de: &DeConfig, param: f64) -> Result<Probe> {
    match q.engine {
        EngineChoice::Parallel => {
            let tr = run_de(engine, de)?;
            let good = match q.certificate {
                Certificate::Breakout => tr.verdict.is_certified(),
                Certificate::Practical => tr.practical_converged,
            };
            Ok(Probe { param, good, work: tr.iterations as u64, detail: format!("{:?}", tr.verdict) })
        }
        EngineChoice::Window { width } => {
            let cfg = WindowConfig { width, ..q.window.clone() };
            let rep = run_windowed(engine, &cfg)?;
            Ok(Probe { param, good: rep.completed(), work: rep.total_sweeps, detail: format!("{:?}", rep.verdict) })
        }
    }
}

fn probe_at(q: &ThresholdQuery, de: &DeConfig, param: f64) -> Result<Probe> {
    let lay = q.layout()?;
    match q.family {
        ChannelFamily::Bec => probe_engine(&mut BecEngine::new(lay, param)?, q, de, param),
        ChannelFamily::AwgnEbN0Db => {
            probe_engine(&mut DensityEngine::new(lay, q.channel(param), q.grid)?, q, de, param)
        }
    }
}

pub fn bisect_threshold(q: &ThresholdQuery) -> Result<ThresholdResult> {
    if q.lo == q.hi {
        return invalid("bracket is empty");
    }
    let (lo, hi) = (q.lo.min(q.hi), q.lo.max(q.hi));
    let (good, bad) = match q.family {
        ChannelFamily::Bec => (lo, hi),
        ChannelFamily::AwgnEbN0Db => (hi, lo),
    };
    let (good, bad, mut probes) = bisect(good, bad, q.tol, |p| probe_at(q, &q.de, p))?;
    let reverified = match q.family {
        ChannelFamily::AwgnEbN0Db => {
            let mut de = q.de.clone();
            de.max_iters = de.max_iters.saturating_mul(2);
            let mut q2 = q.clone();
            q2.window.per_position_budget = q2.window.per_position_budget.saturating_mul(2);
            q2.window.max_total_sweeps = q2.window.max_total_sweeps.saturating_mul(2);
            let p = probe_at(&q2, &de, bad)?;
            let still_bad = !p.good;
            probes.push(p);
            Some(still_bad)
        }
        ChannelFamily::Bec => None,
    };
    let threshold = 0.5 * (good + bad);
    let sigma = match q.family {
        ChannelFamily::AwgnEbN0Db => Some(sigma_from_ebn0_db(threshold, q.rate())),
        ChannelFamily::Bec => None,
    };
    Ok(ThresholdResult {
        threshold,
        bracket: (good.min(bad), good.max(bad)),
        good_endpoint: good,
        bad_endpoint: bad,
        certificate: q.certificate,
        rate: q.rate(),
        sigma,
        bad_endpoint_reverified: reverified,
        work: probes.iter().map(|p| p.work).sum(),
        probes,
    })
}

/// Smallest `L` whose design rate `L / (2(L + J))` reaches `target`.
pub fn l_for_target_rate(j: usize, target: f64) -> Result<usize> {
    if !(target > 0.0 && target < 0.5) {
        return invalid(format!("target rate {target} outside (0, 1/2)"));
    }
    let raw = j as f64 * target / (0.5 - target);
    let mut l = ((raw - 1e-9).ceil() as usize).max(1);
    while design_rate(j, l) < target - 1e-12 {
        l += 1;
    }
    Ok(l)
}

/// Re-expresses an Eb/N0 threshold at another code rate for the same noise
/// deviation.
pub fn rescale_ebn0(ebn0_db: f64, from_rate: f64, to_rate: f64) -> f64 {
    ebn0_db_from_sigma(sigma_from_ebn0_db(ebn0_db, from_rate), to_rate)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdVsL {
    pub rows: Vec<(usize, ThresholdResult)>,
    /// `max - min` of the estimates over the larger half of the grid.
    pub tail_spread: f64,
}

pub fn threshold_vs_l(base: &ThresholdQuery, ls: &[usize]) -> Result<ThresholdVsL> {
    if ls.is_empty() || ls.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("L grid must be nonempty and strictly increasing");
    }
    let rows = ls
        .iter()
        .map(|&l| {
            let q = ThresholdQuery { l: Some(l), ..base.clone() };
            Ok((l, bisect_threshold(&q)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let tail = &rows[rows.len() / 2..];
    let (mn, mx) =
        tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (_, r)| (a.min(r.threshold), b.max(r.threshold)));
    Ok(ThresholdVsL { tail_spread: mx - mn, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn termination_lengths_for_rate() {
        assert_eq!(l_for_target_rate(3, 0.49).unwrap(), 147);
        assert_eq!(l_for_target_rate(4, 0.49).unwrap(), 196);
        assert_eq!(l_for_target_rate(5, 0.49).unwrap(), 245);
        assert!(l_for_target_rate(3, 0.5).is_err());
    }

    #[test]
    fn bisection_on_a_step() {
        let (g, b, probes) =
            bisect(0.0, 1.0, 1e-3, |p| Ok(Probe { param: p, good: p < 0.3, work: 1, detail: String::new() })).unwrap();
        assert!(g < 0.3 && b >= 0.3 && (b - g) <= 1e-3);
        assert!(probes.len() > 2);
        assert!(matches!(
            bisect(0.0, 1.0, 1e-3, |p| Ok(Probe { param: p, good: true, work: 1, detail: String::new() })),
            Err(Error::Bracket("good"))
        ));
    }

    #[test]
    fn block_erasure_threshold() {
        let mut q = ThresholdQuery::new(3, None, ChannelFamily::Bec);
        q.lo = 0.3;
        q.hi = 0.5;
        q.tol = 1e-4;
        let r = bisect_threshold(&q).unwrap();
        assert!((r.threshold - 0.4294).abs() < 5e-4, "{}", r.threshold);
    }

    #[test]
    fn rate_rescaling() {
        let r = rescale_ebn0(0.55, 0.49, 0.5);
        assert!((r - (0.55 + 10.0 * (0.49f64 / 0.5).log10())).abs() < 1e-12);
    }
}
