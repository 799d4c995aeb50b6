//! Position-dependent density evolution.
//!
//! Messages are indexed by the edge class `(t, k)`: variable time `t`
//! (1-based) and offset `k`, the edge from the variable at time `t` to the
//! check at time `t + k`. Both directions of a class share the index, so the
//! check at time `s` reads the variable-to-check messages `(s - i, i)` and
//! writes the check-to-variable messages at the same indices.
//!
//! Two engines implement [`DeEngine`]: [`BecEngine`] tracks erasure
//! probabilities exactly, [`DensityEngine`] tracks quantized densities for any
//! binary-input symmetric channel. [`run_de`] drives either one under the
//! parallel schedule and certifies convergence with the breakout value.

mod bec;
mod bounds;
mod check;
mod conv;
mod density;
mod engine;
mod run;

pub use bec::BecEngine;
pub use bounds::{bmax, breakout_value, contraction_holds, lemma1_step, Lemma1Form};
pub use check::{CheckTable, MagnitudeDensity};
pub use conv::{convolve_direct, Convolver, Spectrum, NORMALIZATION_TOLERANCE};
pub use density::{channel_density, ChannelDensity, Grid, SymmetricDensity, MAX_TAIL_MASS};
pub use engine::DensityEngine;
pub use run::{
    parallel_iteration, run_de, ContractionReport, DeConfig, DeTrace, Lemma1Report, PbSnapshot, StopReason, Verdict,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Edge-class geometry of the analysed graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub j: usize,
    /// Number of variable times.
    pub n: usize,
    /// Check times wrap around modulo `n` instead of being terminated.
    pub tail_biting: bool,
}

impl Layout {
    /// Terminated code with `L` information times: `N = L + J`.
    pub fn terminated(j: usize, l: usize) -> Result<Self> {
        if j < 3 {
            return invalid(format!("J = {j} must be at least 3"));
        }
        if l == 0 {
            return invalid("L must be at least 1");
        }
        Ok(Layout { j, n: l + j, tail_biting: false })
    }

    /// Single-position recursion of the regular `(J, 2J)` block ensemble.
    pub fn block(j: usize) -> Result<Self> {
        if j < 3 {
            return invalid(format!("J = {j} must be at least 3"));
        }
        Ok(Layout { j, n: 1, tail_biting: true })
    }

    pub fn positions(&self) -> usize {
        self.n * self.j
    }

    pub fn check_times(&self) -> usize {
        if self.tail_biting {
            self.n
        } else {
            self.n + self.j - 1
        }
    }

    pub fn index(&self, t: usize, k: usize) -> usize {
        (t - 1) * self.j + k
    }

    /// Check time reached from variable time `t` along offset `k`.
    pub fn check_of(&self, t: usize, k: usize) -> usize {
        if self.tail_biting {
            (t - 1 + k) % self.n + 1
        } else {
            t + k
        }
    }

    /// Variable time feeding check `s` along offset `i`, if it exists.
    pub fn var_of(&self, s: usize, i: usize) -> Option<usize> {
        if self.tail_biting {
            Some(((s - 1 + self.n * self.j - i) % self.n) + 1)
        } else if s > i && s - i <= self.n {
            Some(s - i)
        } else {
            None
        }
    }

    /// Last variable time that has to be computed when mirroring.
    pub fn center(&self) -> usize {
        self.n.div_ceil(2)
    }

    /// Mirror image of class `(t, k)` under time reversal of the graph.
    pub fn mirror(&self, t: usize, k: usize) -> (usize, usize) {
        (self.n + 1 - t, self.j - 1 - k)
    }

    /// Whether the mirror shortcut applies to this layout.
    pub fn mirrorable(&self) -> bool {
        !self.tail_biting
    }
}

/// Node-level operations shared by the erasure and density engines.
pub trait DeEngine {
    fn layout(&self) -> &Layout;

    /// Bhattacharyya parameter `A` of the intrinsic channel messages.
    fn channel_bhattacharyya(&self) -> f64;

    /// Smallest Bhattacharyya value the engine can represent faithfully.
    fn floor(&self) -> f64;

    /// Recomputes every outgoing message of check time `s`.
    fn update_check(&mut self, s: usize) -> Result<()> {
        let lay = *self.layout();
        for i in 0..lay.j {
            if let Some(t) = lay.var_of(s, i) {
                self.refresh_check_message(t, i)?;
            }
        }
        Ok(())
    }

    /// Recomputes the single check-to-variable message of class `(t, k)`.
    fn refresh_check_message(&mut self, t: usize, k: usize) -> Result<()>;

    /// Recomputes the outgoing messages of variable time `t`.
    fn update_variable(&mut self, t: usize) -> Result<()>;

    /// Copies the messages of both directions at `t` from the mirror image.
    fn mirror_variable(&mut self, t: usize);

    /// Bhattacharyya parameter of the variable-to-check message `(t, k)`.
    fn bhattacharyya(&self, t: usize, k: usize) -> f64;

    /// Bit error probability at variable time `t` from the a-posteriori
    /// message (residual erasure probability on the erasure channel).
    fn error_probability(&mut self, t: usize) -> Result<f64>;

    /// Bhattacharyya parameters of all classes, ordered by `(t, k)`.
    fn bhattacharyya_all(&self) -> Vec<f64> {
        let lay = *self.layout();
        (1..=lay.n).flat_map(|t| (0..lay.j).map(move |k| (t, k))).map(|(t, k)| self.bhattacharyya(t, k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terminated_geometry() {
        let lay = Layout::terminated(3, 4).unwrap();
        assert_eq!(lay.n, 7);
        assert_eq!(lay.check_times(), 9);
        assert_eq!(lay.var_of(1, 1), None);
        assert_eq!(lay.var_of(9, 2), Some(7));
        assert_eq!(lay.var_of(9, 1), None);
        let (mt, mk) = lay.mirror(2, 0);
        assert_eq!(lay.check_of(mt, mk), lay.check_times() + 1 - lay.check_of(2, 0));
        assert!(Layout::terminated(2, 4).is_err());
    }

    #[test]
    fn block_layout_wraps() {
        let lay = Layout::block(3).unwrap();
        for i in 0..3 {
            assert_eq!(lay.var_of(1, i), Some(1));
            assert_eq!(lay.check_of(1, i), 1);
        }
    }
}
