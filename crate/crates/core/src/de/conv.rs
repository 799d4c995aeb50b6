//! Variable-node density convolution.
//!
//! The LLR at a variable node is the sum of independent inputs, so its
//! density is the convolution of the input densities. Finite parts are
//! convolved on the grid (FFT, or directly for reference); the `+inf` atoms
//! combine as `1 - prod(1 - inf_i)`. Sums beyond `±R_max` fold into the end
//! bins.

use std::sync::Arc;

use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use super::density::{Grid, SymmetricDensity};
use crate::error::{Error, Result};

/// Largest tolerated deviation of the output mass from its expected total.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Masses below this fraction of the largest bin are treated as FFT noise.
const NOISE_FLOOR: f64 = 1e-16;

fn smooth_len(min: usize) -> usize {
    (min..)
        .find(|&n| {
            let mut m = n;
            for p in [2, 3, 5, 7] {
                while m % p == 0 {
                    m /= p;
                }
            }
            m == 1
        })
        .expect("smooth numbers are unbounded")
}

/// Planned transforms for sums of up to `max_terms` densities on one grid.
pub struct Convolver {
    grid: Grid,
    len: usize,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

impl std::fmt::Debug for Convolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Convolver").field("grid", &self.grid).field("len", &self.len).finish()
    }
}

/// Transformed finite part of a density together with its `+inf` atom.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub bins: Vec<Complex<f64>>,
    pub finite: f64,
    pub terms: usize,
}

impl Convolver {
    pub fn new(grid: Grid, max_terms: usize) -> Self {
        let len = smooth_len(max_terms * (grid.len() - 1) + 1);
        let mut planner = RealFftPlanner::<f64>::new();
        Convolver { grid, len, forward: planner.plan_fft_forward(len), inverse: planner.plan_fft_inverse(len) }
    }

    pub fn fft_len(&self) -> usize {
        self.len
    }

    pub fn spectrum(&self, p: &SymmetricDensity) -> Spectrum {
        let mut input = self.forward.make_input_vec();
        input[..p.mass.len()].copy_from_slice(&p.mass);
        let mut bins = self.forward.make_output_vec();
        self.forward.process(&mut input, &mut bins).expect("buffer sizes come from the plan");
        Spectrum { bins, finite: 1.0 - p.inf, terms: 1 }
    }

    /// Pointwise product, i.e. the spectrum of the sum of both messages.
    pub fn multiply(&self, a: &Spectrum, b: &Spectrum) -> Spectrum {
        let bins = a.bins.iter().zip(&b.bins).map(|(x, y)| x * y).collect();
        Spectrum { bins, finite: a.finite * b.finite, terms: a.terms + b.terms }
    }

    /// Inverts a product spectrum into `out`, folding the tails.
    pub fn density_into(&self, spec: &Spectrum, out: &mut SymmetricDensity) -> Result<()> {
        let mut bins = spec.bins.clone();
        // The imaginary parts of the DC and Nyquist bins must be zero for c2r.
        bins[0].im = 0.0;
        if self.len.is_multiple_of(2) {
            let last = bins.len() - 1;
            bins[last].im = 0.0;
        }
        let mut raw = self.inverse.make_output_vec();
        self.inverse.process(&mut bins, &mut raw).expect("buffer sizes come from the plan");
        let scale = 1.0 / self.len as f64;
        let n = self.grid.half();
        let zero = spec.terms * n;
        let span = spec.terms * 2 * n;
        let peak = raw[..=span].iter().fold(0.0f64, |m, &v| m.max(v)) * scale;
        let cut = peak * NOISE_FLOOR;
        out.mass.iter_mut().for_each(|m| *m = 0.0);
        for (i, &v) in raw[..=span].iter().enumerate() {
            let v = v * scale;
            if v <= cut {
                continue;
            }
            let idx = (i as isize - zero as isize + n as isize).clamp(0, 2 * n as isize) as usize;
            out.mass[idx] += v;
        }
        finish(out, spec.finite)
    }

    /// Density of the sum of independent messages.
    pub fn convolve(&self, inputs: &[&SymmetricDensity]) -> Result<SymmetricDensity> {
        let mut acc = self.spectrum(inputs[0]);
        for p in &inputs[1..] {
            acc = self.multiply(&acc, &self.spectrum(p));
        }
        let mut out = SymmetricDensity::perfect(self.grid);
        self.density_into(&acc, &mut out)?;
        Ok(out)
    }
}

fn finish(out: &mut SymmetricDensity, finite: f64) -> Result<()> {
    let total: f64 = out.mass.iter().sum();
    if (total - finite).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::Numerical(format!(
            "variable-node convolution lost mass: {total:.15e} instead of {finite:.15e}"
        )));
    }
    if total > 0.0 {
        let s = finite / total;
        out.mass.iter_mut().for_each(|m| *m *= s);
    }
    out.inf = 1.0 - finite;
    Ok(())
}

/// Reference convolution by direct summation, `O((m n)^2)`.
pub fn convolve_direct(inputs: &[&SymmetricDensity]) -> Result<SymmetricDensity> {
    let grid = inputs[0].grid;
    let n = grid.half();
    let mut acc: Vec<f64> = inputs[0].mass.clone();
    let mut finite = 1.0 - inputs[0].inf;
    for p in &inputs[1..] {
        let mut next = vec![0.0; acc.len() + 2 * n];
        for (i, &a) in acc.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in p.mass.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        acc = next;
        finite *= 1.0 - p.inf;
    }
    let zero = inputs.len() * n;
    let mut out = SymmetricDensity::perfect(grid);
    out.mass.iter_mut().for_each(|m| *m = 0.0);
    for (i, &v) in acc.iter().enumerate() {
        let idx = (i as isize - zero as isize + n as isize).clamp(0, 2 * n as isize) as usize;
        out.mass[idx] += v;
    }
    finish(&mut out, finite)?;
    Ok(out)
}
