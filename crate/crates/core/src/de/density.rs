//! Quantized LLR densities conditioned on the all-zero codeword.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::channel::ChannelModel;
use crate::error::{invalid, Error, Result};

/// Largest admissible mass below `-R_max` in a quantized channel density.
pub const MAX_TAIL_MASS: f64 = 1e-3;

/// Uniform LLR grid `z = (i - n) * delta` for `i = 0..=2n`, `n = R_max / delta`.
///
/// The two end bins hold all mass beyond `±R_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub delta: f64,
    pub r_max: f64,
}

impl Grid {
    pub fn new(delta: f64, r_max: f64) -> Result<Self> {
        let g = Grid { delta, r_max };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.r_max > 0.0 && self.delta.is_finite() && self.r_max.is_finite()) {
            return invalid("grid spacing and range must be positive");
        }
        let ratio = self.r_max / self.delta;
        if (ratio - ratio.round()).abs() > 1e-6 * ratio.max(1.0) || ratio.round() < 2.0 {
            return invalid(format!("R_max / delta = {ratio} must be an integer of at least 2"));
        }
        Ok(())
    }

    /// Number of positive magnitude bins `n`.
    pub fn half(&self) -> usize {
        (self.r_max / self.delta).round() as usize
    }

    pub fn len(&self) -> usize {
        2 * self.half() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn z(&self, i: usize) -> f64 {
        (i as f64 - self.half() as f64) * self.delta
    }

    /// Smallest Bhattacharyya value a finite density can reach.
    pub fn floor(&self) -> f64 {
        (-self.r_max / 2.0).exp()
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid { delta: 0.01, r_max: 30.0 }
    }
}

/// Probability masses on a [`Grid`] plus an atom at `+inf`.
///
/// No mass sits at `-inf`: under the symmetry condition it would be
/// `e^{-inf}` times the mass at `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricDensity {
    pub grid: Grid,
    pub mass: Vec<f64>,
    pub inf: f64,
}

impl SymmetricDensity {
    /// All mass at `+inf`.
    pub fn perfect(grid: Grid) -> Self {
        SymmetricDensity { grid, mass: vec![0.0; grid.len()], inf: 1.0 }
    }

    /// All mass at `z = 0`.
    pub fn erasure(grid: Grid) -> Self {
        let mut mass = vec![0.0; grid.len()];
        mass[grid.half()] = 1.0;
        SymmetricDensity { grid, mass, inf: 0.0 }
    }

    /// Erasure with probability `x`, perfect otherwise.
    pub fn two_point(grid: Grid, x: f64) -> Self {
        let mut mass = vec![0.0; grid.len()];
        mass[grid.half()] = x;
        SymmetricDensity { grid, mass, inf: 1.0 - x }
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum::<f64>() + self.inf
    }

    /// `sum mass(z) e^{-z/2}`, clamped to `[0, 1]`.
    pub fn bhattacharyya(&self) -> f64 {
        bhattacharyya_of(&self.grid, &self.mass)
    }

    /// `P(z < 0) + P(z = 0) / 2`.
    pub fn error_probability(&self) -> f64 {
        error_probability_of(&self.grid, &self.mass)
    }

    /// Largest violation of `mass(-z) = e^{-z} mass(z)` relative to the
    /// larger side, over bins with mass above `min_mass`.
    pub fn symmetry_defect(&self, min_mass: f64) -> f64 {
        let n = self.grid.half();
        let mut worst: f64 = 0.0;
        for a in 1..n {
            let pos = self.mass[n + a];
            let neg = self.mass[n - a];
            let expected = pos * (-(a as f64) * self.grid.delta).exp();
            if pos.max(neg) > min_mass {
                worst = worst.max((neg - expected).abs() / pos.max(neg));
            }
        }
        worst
    }
}

pub(crate) fn bhattacharyya_of(grid: &Grid, mass: &[f64]) -> f64 {
    let n = grid.half();
    let mut b = mass[n];
    for a in 1..=n {
        let w = (-(a as f64) * grid.delta / 2.0).exp();
        b += mass[n + a] * w + mass[n - a] / w;
    }
    b.clamp(0.0, 1.0)
}

pub(crate) fn error_probability_of(grid: &Grid, mass: &[f64]) -> f64 {
    let n = grid.half();
    mass[..n].iter().sum::<f64>() + 0.5 * mass[n]
}

/// Intrinsic LLR density of `channel` on `grid`, with its Bhattacharyya
/// parameter in three forms.
#[derive(Debug, Clone)]
pub struct ChannelDensity {
    pub density: SymmetricDensity,
    /// Bhattacharyya parameter of the quantized density; used by bounds.
    pub a: f64,
    pub a_closed_form: f64,
    /// Quadrature of the continuous Bhattacharyya integral.
    pub a_numeric: f64,
}

pub fn channel_density(channel: ChannelModel, grid: Grid) -> Result<ChannelDensity> {
    channel.validate()?;
    grid.validate()?;
    let a_closed_form = channel.bhattacharyya();
    let density = match channel {
        ChannelModel::Bec { epsilon } => SymmetricDensity::two_point(grid, epsilon),
        ChannelModel::Noiseless => SymmetricDensity::perfect(grid),
        ChannelModel::BiAwgn { sigma } => gaussian_llr_density(sigma, grid)?,
    };
    let a_numeric = match channel {
        ChannelModel::BiAwgn { sigma } => awgn_bhattacharyya_quadrature(sigma),
        _ => a_closed_form,
    };
    let a = match channel {
        ChannelModel::BiAwgn { .. } => density.bhattacharyya(),
        _ => a_closed_form,
    };
    Ok(ChannelDensity { density, a, a_closed_form, a_numeric })
}

fn gaussian_llr_density(sigma: f64, grid: Grid) -> Result<SymmetricDensity> {
    let mu = 2.0 / (sigma * sigma);
    let sd = (2.0 * mu).sqrt();
    let normal = Normal::new(mu, sd).map_err(|e| Error::InvalidParams(e.to_string()))?;
    let n = grid.half();
    let len = grid.len();
    let lower_tail = normal.cdf(-grid.r_max + grid.delta / 2.0);
    if lower_tail > MAX_TAIL_MASS {
        return Err(Error::GridTooSmall(format!(
            "mass {lower_tail:.3e} below -R_max exceeds {MAX_TAIL_MASS:e}; increase R_max"
        )));
    }
    let mut mass = vec![0.0; len];
    for (i, m) in mass.iter_mut().enumerate() {
        let z = (i as f64 - n as f64) * grid.delta;
        let lo = if i == 0 { f64::NEG_INFINITY } else { z - grid.delta / 2.0 };
        let hi = if i == len - 1 { f64::INFINITY } else { z + grid.delta / 2.0 };
        *m = interval_mass(&normal, mu, lo, hi);
    }
    let total: f64 = mass.iter().sum();
    for m in &mut mass {
        *m /= total;
    }
    Ok(SymmetricDensity { grid, mass, inf: 0.0 })
}

/// Mass of `[lo, hi)`, taking the difference on whichever tail is smaller.
fn interval_mass(normal: &Normal, mean: f64, lo: f64, hi: f64) -> f64 {
    if lo >= mean { normal.sf(lo) - normal.sf(hi) } else { normal.cdf(hi) - normal.cdf(lo) }.max(0.0)
}

/// Simpson quadrature of `int sqrt(f(z|0) f(z|1)) dz` for the BiAWGN LLR.
fn awgn_bhattacharyya_quadrature(sigma: f64) -> f64 {
    let mu = 2.0 / (sigma * sigma);
    let var = 2.0 * mu;
    let pdf = |z: f64| (-(z - mu).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
    let integrand = |z: f64| (pdf(z) * pdf(-z)).sqrt();
    let half_width = mu + 40.0 * var.sqrt();
    let steps = 200_000usize;
    let h = 2.0 * half_width / steps as f64;
    let mut s = integrand(-half_width) + integrand(half_width);
    for i in 1..steps {
        let z = -half_width + i as f64 * h;
        s += integrand(z) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.01, 30.0).is_ok());
        assert!(Grid::new(0.07, 1.0).is_err());
        assert!(Grid::new(0.0, 30.0).is_err());
        assert_eq!(Grid::new(0.5, 2.0).unwrap().len(), 9);
    }

    #[test]
    fn extreme_densities() {
        let g = Grid::new(0.1, 5.0).unwrap();
        assert_eq!(SymmetricDensity::perfect(g).bhattacharyya(), 0.0);
        assert_eq!(SymmetricDensity::erasure(g).bhattacharyya(), 1.0);
        assert_eq!(SymmetricDensity::erasure(g).error_probability(), 0.5);
    }

    #[test]
    fn awgn_channel_parameters() {
        let cd = channel_density(ChannelModel::BiAwgn { sigma: 1.0 }, Grid::new(0.01, 30.0).unwrap()).unwrap();
        assert!((cd.a_closed_form - (-0.5f64).exp()).abs() < 1e-15);
        assert!((cd.a_numeric - cd.a_closed_form).abs() < 1e-6);
        assert!((cd.a - 0.60653).abs() < 1e-4);
        assert!((cd.density.total() - 1.0).abs() < 1e-12);
        assert!(cd.density.symmetry_defect(1e-12) < 0.02);
    }

    #[test]
    fn tiny_grid_is_rejected() {
        let r = channel_density(ChannelModel::BiAwgn { sigma: 2.0 }, Grid::new(0.1, 1.0).unwrap());
        assert!(matches!(r, Err(Error::GridTooSmall(_))));
    }
}
