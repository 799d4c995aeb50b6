//! Binary-input memoryless channels and their intrinsic LLRs.
//!
//! BPSK maps bit 0 to `+1` and bit 1 to `-1`; LLRs are
//! `log P(0 | y) / P(1 | y)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Magnitude at which finite LLRs are saturated.
pub const LLR_LIMIT: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelModel {
    Bec { epsilon: f64 },
    BiAwgn { sigma: f64 },
    Noiseless,
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelModel::Bec { epsilon } if !(0.0..=1.0).contains(&epsilon) => {
                invalid(format!("erasure probability {epsilon} outside [0, 1]"))
            }
            ChannelModel::BiAwgn { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                invalid(format!("noise deviation {sigma} must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Bhattacharyya parameter of the channel, in closed form.
    pub fn bhattacharyya(&self) -> f64 {
        match *self {
            ChannelModel::Bec { epsilon } => epsilon,
            ChannelModel::BiAwgn { sigma } => (-1.0 / (2.0 * sigma * sigma)).exp(),
            ChannelModel::Noiseless => 0.0,
        }
    }

    /// BiAWGN channel at `ebn0_db` for a code of rate `rate`.
    pub fn awgn_from_ebn0_db(ebn0_db: f64, rate: f64) -> Self {
        ChannelModel::BiAwgn { sigma: sigma_from_ebn0_db(ebn0_db, rate) }
    }
}

/// `sigma^2 = 1 / (2 R 10^(Eb/N0 / 10))`.
pub fn sigma_from_ebn0_db(ebn0_db: f64, rate: f64) -> f64 {
    (1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt()
}

pub fn ebn0_db_from_sigma(sigma: f64, rate: f64) -> f64 {
    10.0 * (1.0 / (2.0 * rate * sigma * sigma)).log10()
}

/// Per-symbol intrinsic LLRs.
///
/// Finite values are within `±LLR_LIMIT`; `+inf` may be used by callers to
/// mark symbols known to be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrWord(pub Vec<f64>);

impl LlrWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn bpsk(bit: u8) -> f64 {
    if bit & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Transmits `codeword` over `channel` and returns the intrinsic LLRs.
///
/// Draws are independent per symbol and deterministic for a given seed.
pub fn channel_llr(channel: ChannelModel, codeword: &[u8], seed: u64) -> Result<LlrWord> {
    channel.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(channel_llr_with(channel, codeword, &mut rng))
}

pub(crate) fn channel_llr_with<R: Rng>(channel: ChannelModel, codeword: &[u8], rng: &mut R) -> LlrWord {
    let values = match channel {
        ChannelModel::Noiseless => codeword.iter().map(|&b| bpsk(b) * LLR_LIMIT).collect(),
        ChannelModel::Bec { epsilon } => {
            codeword.iter().map(|&b| if rng.gen::<f64>() < epsilon { 0.0 } else { bpsk(b) * LLR_LIMIT }).collect()
        }
        ChannelModel::BiAwgn { sigma } => {
            let noise = Normal::new(0.0, sigma).expect("validated sigma");
            let scale = 2.0 / (sigma * sigma);
            codeword
                .iter()
                .map(|&b| {
                    let y = bpsk(b) + noise.sample(rng);
                    (scale * y).clamp(-LLR_LIMIT, LLR_LIMIT)
                })
                .collect()
        }
    };
    LlrWord(values)
}
