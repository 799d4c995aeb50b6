//! The permutation-matrix ensemble of `(J, 2J)` regular LDPC convolutional
//! codes.
//!
//! A code is described by its syndrome former `H^T`. Block row `t` (the `2M`
//! code symbols emitted at time `t`) meets block column `t + i` (the `M`
//! checks of time `t + i`) in a `2M x M` matrix made of two stacked `M x M`
//! permutation matrices, for `i = 0..J-1`. Every other block is zero, so the
//! syndrome former memory is `J - 1`.
//!
//! Sampling uses ChaCha8 (`rand_chacha` 0.3) seeded with the user seed. Each
//! permutation block gets its own stream, numbered by the block's linear index
//! `((t - 1) * J + i) * 2 + h`, and is drawn by a Fisher-Yates shuffle using
//! `rand` 0.8 uniform range sampling. A given `(params, seed)` therefore yields
//! the same code on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Ensemble parameters `(J, M, L)`.
///
/// `j` is the symbol-node degree, `m` the permutation block size and `l` the
/// number of information time instants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub j: usize,
    pub m: usize,
    pub l: usize,
}

impl EnsembleParams {
    pub fn new(j: usize, m: usize, l: usize) -> Result<Self> {
        let p = EnsembleParams { j, m, l };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.j < 3 {
            return invalid(format!("J must be at least 3, got {}", self.j));
        }
        if self.m < 2 {
            return invalid(format!("M must be at least 2 (M = 1 creates parallel edges), got {}", self.m));
        }
        if self.l < 1 {
            return invalid("L must be at least 1");
        }
        if self.m > u32::MAX as usize {
            return invalid("M does not fit in 32 bits");
        }
        Ok(())
    }

    /// Check-node degree `K = 2J`.
    pub fn k(&self) -> usize {
        2 * self.j
    }

    /// Syndrome former memory `m_s = J - 1`.
    pub fn memory(&self) -> usize {
        self.j - 1
    }

    /// Information symbols per time instant (`b = M`).
    pub fn info_per_time(&self) -> usize {
        self.m
    }

    /// Code symbols per time instant (`c = 2M`).
    pub fn symbols_per_time(&self) -> usize {
        2 * self.m
    }

    /// Constraint length `(m_s + 1) * c = 2JM`.
    pub fn constraint_length(&self) -> usize {
        self.k() * self.m
    }

    /// Number of symbol time instants in the terminated code, `L + J`.
    pub fn variable_times(&self) -> usize {
        self.l + self.j
    }

    /// Number of check time instants in the terminated code, `L + 2J - 1`.
    pub fn check_times(&self) -> usize {
        self.l + 2 * self.j - 1
    }

    /// Terminated block length `2M(L + J)`.
    pub fn code_length(&self) -> usize {
        self.symbols_per_time() * self.variable_times()
    }

    /// Number of parity checks `M(L + 2J - 1)`.
    pub fn check_count(&self) -> usize {
        self.m * self.check_times()
    }

    /// Number of information bits `L * M`.
    pub fn info_length(&self) -> usize {
        self.l * self.m
    }

    /// Design rate `L / (2(L + J))` as a reduced fraction.
    pub fn design_rate_fraction(&self) -> (u64, u64) {
        let num = self.l as u64;
        let den = 2 * (self.l + self.j) as u64;
        let g = gcd(num, den);
        (num / g, den / g)
    }

    /// Design rate `0.5 / (1 + J/L)`.
    pub fn design_rate(&self) -> f64 {
        design_rate(self.j, self.l)
    }
}

/// Design rate of the terminated code, `L / (2(L + J))`.
pub fn design_rate(j: usize, l: usize) -> f64 {
    l as f64 / (2.0 * (l + j) as f64)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a.max(1)
}

/// One `M x M` permutation block `P^(h)_i(t + i)`.
///
/// Symbol `x` of half `h` at time `time` is connected to check `perm[x]` of
/// check time `time + offset`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationBlock {
    pub time: usize,
    pub offset: usize,
    pub half: usize,
    pub perm: Vec<u32>,
}

impl PermutationBlock {
    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.perm.len()];
        for &p in &self.perm {
            let p = p as usize;
            if p >= seen.len() || seen[p] {
                return false;
            }
            seen[p] = true;
        }
        true
    }
}

/// A sampled syndrome former restricted to the symbol times `1..=L+J` that
/// survive termination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndromeFormer {
    pub params: EnsembleParams,
    pub seed: u64,
    blocks: Vec<PermutationBlock>,
}

impl SyndromeFormer {
    fn index(params: &EnsembleParams, t: usize, i: usize, h: usize) -> usize {
        ((t - 1) * params.j + i) * 2 + h
    }

    /// Block connecting symbol time `t` (1-based), half `h`, to check time
    /// `t + i`.
    pub fn block(&self, t: usize, i: usize, h: usize) -> &PermutationBlock {
        assert!(t >= 1 && t <= self.params.variable_times() && i < self.params.j && h < 2);
        &self.blocks[Self::index(&self.params, t, i, h)]
    }

    pub fn blocks(&self) -> &[PermutationBlock] {
        &self.blocks
    }

    /// Builds a syndrome former from explicit blocks, validating shape and
    /// bijectivity.
    pub fn from_blocks(params: EnsembleParams, seed: u64, blocks: Vec<PermutationBlock>) -> Result<Self> {
        params.validate()?;
        let expected = 2 * params.j * params.variable_times();
        if blocks.len() != expected {
            return invalid(format!("expected {expected} blocks, got {}", blocks.len()));
        }
        for (idx, b) in blocks.iter().enumerate() {
            if b.time < 1
                || b.time > params.variable_times()
                || b.offset >= params.j
                || b.half > 1
                || Self::index(&params, b.time, b.offset, b.half) != idx
            {
                return invalid(format!("block {idx} has inconsistent indices"));
            }
            if b.perm.len() != params.m || !b.is_bijection() {
                return invalid(format!("block {idx} is not a permutation of 0..{}", params.m));
            }
        }
        Ok(SyndromeFormer { params, seed, blocks })
    }

    /// Number of ones in each symbol row of the (unterminated) syndrome former
    /// restricted to these blocks, and in each check column for check times
    /// whose full band of symbol times is present.
    pub fn row_and_interior_column_weights(&self) -> (Vec<usize>, Vec<usize>) {
        let p = &self.params;
        let mut rows = vec![0usize; p.code_length()];
        let mut cols = vec![0usize; p.check_count()];
        for b in &self.blocks {
            for (x, &c) in b.perm.iter().enumerate() {
                let row = (b.time - 1) * 2 * p.m + b.half * p.m + x;
                let col = (b.time + b.offset - 1) * p.m + c as usize;
                rows[row] += 1;
                cols[col] += 1;
            }
        }
        // Interior check times s = J..=L+1 receive all J symbol times.
        let interior: Vec<usize> = (p.j..=p.variable_times() - p.j + 1)
            .flat_map(|s| (0..p.m).map(move |r| (s - 1) * p.m + r))
            .map(|c| cols[c])
            .collect();
        (rows, interior)
    }
}

/// Draws every permutation block of the terminated code independently and
/// uniformly.
pub fn sample_ensemble(params: EnsembleParams, seed: u64) -> Result<SyndromeFormer> {
    params.validate()?;
    let mut blocks = Vec::with_capacity(2 * params.j * params.variable_times());
    for t in 1..=params.variable_times() {
        for i in 0..params.j {
            for h in 0..2 {
                let stream = SyndromeFormer::index(&params, t, i, h) as u64;
                blocks.push(PermutationBlock {
                    time: t,
                    offset: i,
                    half: h,
                    perm: random_permutation(params.m, seed, stream),
                });
            }
        }
    }
    Ok(SyndromeFormer { params, seed, blocks })
}

/// Fisher-Yates shuffle of `0..m` on ChaCha8 stream `stream` of `seed`.
pub fn random_permutation(m: usize, seed: u64, stream: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut perm: Vec<u32> = (0..m as u32).collect();
    for x in (1..m).rev() {
        let y = rng.gen_range(0..=x);
        perm.swap(x, y);
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_parameters() {
        assert!(EnsembleParams::new(2, 4, 1).is_err());
        assert!(EnsembleParams::new(3, 1, 1).is_err());
        assert!(EnsembleParams::new(3, 4, 0).is_err());
        assert!(EnsembleParams::new(3, 2, 1).is_ok());
    }

    #[test]
    fn derived_quantities() {
        let p = EnsembleParams::new(3, 4, 2).unwrap();
        assert_eq!(p.k(), 6);
        assert_eq!(p.memory(), 2);
        assert_eq!(p.constraint_length(), 24);
        assert_eq!(p.code_length(), 40);
        assert_eq!(p.check_count(), 28);
    }

    #[test]
    fn smallest_sample_has_24_blocks() {
        let p = EnsembleParams::new(3, 2, 1).unwrap();
        let sf = sample_ensemble(p, 0).unwrap();
        assert_eq!(sf.blocks().len(), 24);
        for b in sf.blocks() {
            assert!(b.is_bijection());
            assert_eq!(b.perm.len(), 2);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = EnsembleParams::new(3, 16, 5).unwrap();
        assert_eq!(sample_ensemble(p, 9).unwrap(), sample_ensemble(p, 9).unwrap());
        assert_ne!(sample_ensemble(p, 9).unwrap(), sample_ensemble(p, 10).unwrap());
    }

    #[test]
    fn weights_are_regular() {
        for j in 3..=5 {
            let p = EnsembleParams::new(j, 7, 6).unwrap();
            let sf = sample_ensemble(p, 3).unwrap();
            let (rows, cols) = sf.row_and_interior_column_weights();
            assert!(rows.iter().all(|&w| w == j));
            assert!(!cols.is_empty());
            assert!(cols.iter().all(|&w| w == 2 * j));
        }
    }

    #[test]
    fn from_blocks_round_trip() {
        let p = EnsembleParams::new(3, 5, 2).unwrap();
        let sf = sample_ensemble(p, 1).unwrap();
        let again = SyndromeFormer::from_blocks(p, 1, sf.blocks().to_vec()).unwrap();
        assert_eq!(sf, again);
        let mut bad = sf.blocks().to_vec();
        bad[3].perm[0] = bad[3].perm[1];
        assert!(SyndromeFormer::from_blocks(p, 1, bad).is_err());
    }

    #[test]
    fn design_rate_values() {
        assert_eq!(EnsembleParams::new(3, 2, 100).unwrap().design_rate_fraction(), (50, 103));
        assert!((design_rate(3, 100) - 100.0 / 206.0).abs() < 1e-15);
        assert!((design_rate(3, 147) - 0.49).abs() < 1e-15);
    }
}
