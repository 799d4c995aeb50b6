//! Exact scalar density evolution on the erasure channel.

use super::{DeEngine, Layout};
use crate::error::{invalid, Result};

/// Erasure probabilities `x` (variable to check) and `y` (check to variable)
/// per edge class.
#[derive(Debug, Clone)]
pub struct BecEngine {
    layout: Layout,
    epsilon: f64,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl BecEngine {
    /// Variable-to-check messages start at the channel value `epsilon`.
    pub fn new(layout: Layout, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return invalid(format!("erasure probability {epsilon} outside [0, 1]"));
        }
        let p = layout.positions();
        Ok(BecEngine { layout, epsilon, x: vec![epsilon; p], y: vec![1.0; p] })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Variable-to-check erasure probability of class `(t, k)`.
    pub fn x(&self, t: usize, k: usize) -> f64 {
        self.x[self.layout.index(t, k)]
    }

    /// Check-to-variable erasure probability of class `(t, k)`.
    pub fn y(&self, t: usize, k: usize) -> f64 {
        self.y[self.layout.index(t, k)]
    }

    pub fn x_all(&self) -> &[f64] {
        &self.x
    }
}

impl DeEngine for BecEngine {
    fn layout(&self) -> &Layout {
        &self.layout
    }

    fn channel_bhattacharyya(&self) -> f64 {
        self.epsilon
    }

    fn floor(&self) -> f64 {
        0.0
    }

    fn refresh_check_message(&mut self, t: usize, k: usize) -> Result<()> {
        let lay = self.layout;
        let s = lay.check_of(t, k);
        let mut keep = 1.0 - self.x[lay.index(t, k)];
        for i in (0..lay.j).filter(|&i| i != k) {
            if let Some(v) = lay.var_of(s, i) {
                let ok = 1.0 - self.x[lay.index(v, i)];
                keep *= ok * ok;
            }
        }
        self.y[lay.index(t, k)] = 1.0 - keep;
        Ok(())
    }

    fn update_variable(&mut self, t: usize) -> Result<()> {
        let lay = self.layout;
        for k in 0..lay.j {
            let mut v = self.epsilon;
            for kk in (0..lay.j).filter(|&kk| kk != k) {
                v *= self.y[lay.index(t, kk)];
            }
            self.x[lay.index(t, k)] = v;
        }
        Ok(())
    }

    fn mirror_variable(&mut self, t: usize) {
        let lay = self.layout;
        for k in 0..lay.j {
            let (mt, mk) = lay.mirror(t, k);
            self.x[lay.index(t, k)] = self.x[lay.index(mt, mk)];
            self.y[lay.index(t, k)] = self.y[lay.index(mt, mk)];
        }
    }

    fn bhattacharyya(&self, t: usize, k: usize) -> f64 {
        self.x(t, k)
    }

    fn error_probability(&mut self, t: usize) -> Result<f64> {
        let lay = self.layout;
        Ok((0..lay.j).fold(self.epsilon, |p, k| p * self.y[lay.index(t, k)]))
    }
}
