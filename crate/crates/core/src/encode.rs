//! Systematic encoding of terminated codes.
//!
//! For `t = 1..=L` the first `M` symbols of block `v_t` carry information and
//! the last `M` are parities. The constraint at check time `t` involves `v_t`
//! only through the two permutation blocks of `H_0^T(t)`, and the parity half
//! enters through a permutation, so each parity block is read off directly
//! from the partial syndrome. The final `J` blocks form the tail that drives
//! the encoder back to the zero state; they are solved jointly against the
//! syndrome left on check times `L+1..=L+2J-1`.

use crate::ensemble::SyndromeFormer;
use crate::error::{invalid, Error, Result};
use crate::gf2::{BitMatrix, Gf2Solver};

/// Encoder for one syndrome former, with the tail system pre-eliminated.
#[derive(Debug, Clone)]
pub struct Encoder {
    sf: SyndromeFormer,
    tail: Gf2Solver,
}

impl Encoder {
    pub fn new(sf: &SyndromeFormer) -> Self {
        let p = sf.params;
        let m = p.m;
        let first_check_time = p.l + 1;
        let rows = m * (2 * p.j - 1);
        let cols = 2 * m * p.j;
        let mut a = BitMatrix::zeros(rows, cols);
        for t in p.l + 1..=p.variable_times() {
            for i in 0..p.j {
                for h in 0..2 {
                    let block = sf.block(t, i, h);
                    for (x, &r) in block.perm.iter().enumerate() {
                        let col = (t - p.l - 1) * 2 * m + h * m + x;
                        let row = (t + i - first_check_time) * m + r as usize;
                        a.flip(row, col);
                    }
                }
            }
        }
        Encoder { sf: sf.clone(), tail: Gf2Solver::new(&a) }
    }

    /// Rank of the tail system (at most `M(2J - 1)`).
    pub fn tail_rank(&self) -> usize {
        self.tail.rank()
    }

    /// Encodes `L * M` information bits into a codeword of length `2M(L+J)`.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        let p = self.sf.params;
        let m = p.m;
        if info.len() != p.info_length() {
            return invalid(format!("expected {} information bits, got {}", p.info_length(), info.len()));
        }
        let mut word = vec![0u8; p.code_length()];
        let mut syndrome = vec![0u8; p.check_count()];
        let accumulate = |word: &[u8], syndrome: &mut [u8], t: usize, h: usize| {
            for i in 0..p.j {
                let block = self.sf.block(t, i, h);
                let base = (t + i - 1) * m;
                let sym = (t - 1) * 2 * m + h * m;
                for (x, &r) in block.perm.iter().enumerate() {
                    syndrome[base + r as usize] ^= word[sym + x];
                }
            }
        };
        for t in 1..=p.l {
            let sym = (t - 1) * 2 * m;
            word[sym..sym + m].copy_from_slice(&info[(t - 1) * m..t * m]);
            for b in &mut word[sym..sym + m] {
                *b &= 1;
            }
            accumulate(&word, &mut syndrome, t, 0);
            let parity_block = self.sf.block(t, 0, 1);
            let base = (t - 1) * m;
            for (x, &r) in parity_block.perm.iter().enumerate() {
                word[sym + m + x] = syndrome[base + r as usize];
            }
            accumulate(&word, &mut syndrome, t, 1);
            debug_assert!(syndrome[base..base + m].iter().all(|&s| s == 0));
        }
        let rhs = &syndrome[p.l * m..];
        let tail = self.tail.solve(rhs).map_err(|unsatisfied| Error::TerminationSingular { unsatisfied })?;
        word[p.l * 2 * m..].copy_from_slice(&tail);
        Ok(word)
    }
}

/// One-shot encoding; see [`Encoder`].
pub fn encode(sf: &SyndromeFormer, info: &[u8]) -> Result<Vec<u8>> {
    Encoder::new(sf).encode(info)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::terminate;
    use crate::ensemble::{sample_ensemble, EnsembleParams};

    #[test]
    fn zero_info_gives_zero_word() {
        let sf = sample_ensemble(EnsembleParams::new(3, 4, 3).unwrap(), 2).unwrap();
        let w = encode(&sf, &[0; 12]).unwrap();
        assert!(w.iter().all(|&b| b == 0));
    }

    #[test]
    fn codewords_satisfy_all_checks() {
        for (j, seed) in [(3, 1u64), (4, 2), (5, 3)] {
            let p = EnsembleParams::new(j, 5, 4).unwrap();
            let sf = sample_ensemble(p, seed).unwrap();
            let code = terminate(&sf).unwrap();
            let info: Vec<u8> = (0..p.info_length()).map(|i| ((i * 7 + 3) % 5 < 2) as u8).collect();
            let w = encode(&sf, &info).unwrap();
            assert!(code.graph.is_codeword(&w));
            let sys: Vec<u8> = code.info_positions().iter().map(|&v| w[v]).collect();
            assert_eq!(sys, info);
        }
    }

    #[test]
    fn wrong_info_length_is_rejected() {
        let sf = sample_ensemble(EnsembleParams::new(3, 2, 2).unwrap(), 0).unwrap();
        assert!(encode(&sf, &[1, 0, 1]).is_err());
    }
}
