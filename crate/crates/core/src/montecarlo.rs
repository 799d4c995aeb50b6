//! Monte-Carlo BER/FER estimation for terminated codes.
//!
//! Each frame draws its channel noise (and, optionally, its code and
//! information bits) from its own ChaCha8 stream keyed by the frame index, so
//! results are bit-identical for any number of worker threads.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bp::{decode_with, BpDecoder, Schedule};
use crate::channel::{channel_llr_with, ChannelModel};
use crate::code::{terminate, TerminatedCode};
use crate::encode::Encoder;
use crate::ensemble::{sample_ensemble, EnsembleParams};
use crate::error::{invalid, Result};
use crate::fmt::Csv;

pub const BER_CSV_SCHEMA: &str = "ldpcc.ber_table/1";

/// Channel family of a simulation grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelFamily {
    /// Grid values are erasure probabilities.
    Bec,
    /// Grid values are Eb/N0 in dB at the code's design rate.
    AwgnEbN0Db,
    Noiseless,
}

impl ChannelFamily {
    pub fn channel(self, param: f64, rate: f64) -> ChannelModel {
        match self {
            ChannelFamily::Bec => ChannelModel::Bec { epsilon: param },
            ChannelFamily::AwgnEbN0Db => ChannelModel::awgn_from_ebn0_db(param, rate),
            ChannelFamily::Noiseless => ChannelModel::Noiseless,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeSampling {
    /// One code drawn from `seed` and reused for every frame.
    Fixed,
    /// A fresh code per frame.
    PerFrame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub params: EnsembleParams,
    pub family: ChannelFamily,
    pub grid: Vec<f64>,
    pub trials: usize,
    pub max_iters: usize,
    pub schedule: Schedule,
    pub seed: u64,
    pub sampling: CodeSampling,
    /// Transmit encoded random information instead of the all-zero word.
    pub random_info: bool,
}

impl MonteCarloConfig {
    pub fn new(params: EnsembleParams, family: ChannelFamily, grid: Vec<f64>, trials: usize) -> Self {
        MonteCarloConfig {
            params,
            family,
            grid,
            trials,
            max_iters: 100,
            schedule: Schedule::Parallel,
            seed: 0,
            sampling: CodeSampling::Fixed,
            random_info: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Wilson score interval for `k` successes in `n` trials at normal quantile `z`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> Interval {
    if n == 0 {
        return Interval { lo: 0.0, hi: 1.0 };
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (center + half).min(1.0) };
    Interval { lo, hi }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub channel_param: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub mean_iters: f64,
    pub ber_ci95: Interval,
    pub fer_ci95: Interval,
    pub info_bits_per_frame: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerTable {
    pub config: MonteCarloConfig,
    pub points: Vec<BerPoint>,
}

struct FrameOutcome {
    bit_errors: u64,
    iterations: u64,
}

fn frame_rng(seed: u64, point: usize, frame: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 40) | frame as u64);
    rng
}

fn run_frame(
    cfg: &MonteCarloConfig,
    fixed: Option<&(TerminatedCode, BpDecoder, Option<Encoder>)>,
    channel: ChannelModel,
    point: usize,
    frame: usize,
) -> Result<FrameOutcome> {
    let mut rng = frame_rng(cfg.seed, point, frame);
    let owned;
    let (code, dec, enc) = match fixed {
        Some((c, d, e)) => (c, d, e.as_ref()),
        None => {
            let sf = sample_ensemble(cfg.params, rng.gen())?;
            let code = terminate(&sf)?;
            let dec = BpDecoder::new(&code.graph);
            owned = (code, dec, cfg.random_info.then(|| Encoder::new(&sf)));
            (&owned.0, &owned.1, owned.2.as_ref())
        }
    };
    let word = match enc {
        Some(enc) => {
            let info: Vec<u8> = (0..cfg.params.info_length()).map(|_| rng.gen::<bool>() as u8).collect();
            enc.encode(&info)?
        }
        None => vec![0u8; code.n()],
    };
    let llr = channel_llr_with(channel, &word, &mut rng);
    let res = decode_with(dec, code, &llr, cfg.schedule, cfg.max_iters, None)?;
    let bit_errors =
        code.info_positions().iter().filter(|&&v| res.posterior[v] == 0.0 || res.decoded[v] != word[v]).count() as u64;
    Ok(FrameOutcome { bit_errors, iterations: res.iterations as u64 })
}

/// Runs every grid point for `cfg.trials` frames.
pub fn monte_carlo(cfg: &MonteCarloConfig) -> Result<BerTable> {
    cfg.params.validate()?;
    if cfg.grid.is_empty() {
        return invalid("channel grid is empty");
    }
    if cfg.trials == 0 {
        return invalid("at least one trial is required");
    }
    let rate = cfg.params.design_rate();
    let fixed = match cfg.sampling {
        CodeSampling::Fixed => {
            let sf = sample_ensemble(cfg.params, cfg.seed)?;
            let code = terminate(&sf)?;
            let dec = BpDecoder::new(&code.graph);
            Some((code, dec, cfg.random_info.then(|| Encoder::new(&sf))))
        }
        CodeSampling::PerFrame => None,
    };
    let info_bits = cfg.params.info_length() as u64;
    let mut points = Vec::with_capacity(cfg.grid.len());
    for (p, &param) in cfg.grid.iter().enumerate() {
        let channel = cfg.family.channel(param, rate);
        channel.validate()?;
        let outcomes = (0..cfg.trials)
            .into_par_iter()
            .map(|f| run_frame(cfg, fixed.as_ref(), channel, p, f))
            .collect::<Result<Vec<_>>>()?;
        let trials = cfg.trials as u64;
        let bit_errors: u64 = outcomes.iter().map(|o| o.bit_errors).sum();
        let frame_errors = outcomes.iter().filter(|o| o.bit_errors > 0).count() as u64;
        let iters: u64 = outcomes.iter().map(|o| o.iterations).sum();
        let total_bits = trials * info_bits;
        points.push(BerPoint {
            channel_param: param,
            trials,
            bit_errors,
            frame_errors,
            ber: bit_errors as f64 / total_bits as f64,
            fer: frame_errors as f64 / trials as f64,
            mean_iters: iters as f64 / trials as f64,
            ber_ci95: wilson_interval(bit_errors, total_bits, 1.959_963_984_540_054),
            fer_ci95: wilson_interval(frame_errors, trials, 1.959_963_984_540_054),
            info_bits_per_frame: info_bits,
        });
    }
    Ok(BerTable { config: cfg.clone(), points })
}

impl BerTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("# schema: {BER_CSV_SCHEMA}\n");
        out.push_str("channel_param,trials,bit_errors,frame_errors,ber,ber_ci95_lo,ber_ci95_hi,fer,mean_iters\n");
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                Csv(p.channel_param),
                p.trials,
                p.bit_errors,
                p.frame_errors,
                Csv(p.ber),
                Csv(p.ber_ci95.lo),
                Csv(p.ber_ci95.hi),
                Csv(p.fer),
                Csv(p.mean_iters)
            )
            .unwrap();
        }
        out
    }
}
