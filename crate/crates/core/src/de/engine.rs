//! Quantized-density engine for arbitrary binary-input symmetric channels.

use super::check::{CheckTable, MagnitudeDensity};
use super::conv::{Convolver, Spectrum};
use super::density::{channel_density, error_probability_of, ChannelDensity, Grid, SymmetricDensity};
use super::{DeEngine, Layout};
use crate::channel::ChannelModel;
use crate::error::Result;

/// Density evolution on quantized LLR densities.
///
/// Per class it keeps the variable-to-check density (both as masses and in
/// sign/magnitude form), its self-combination `x ⊞ x` for the paired edge
/// of the same class, and the check-to-variable density.
#[derive(Debug)]
pub struct DensityEngine {
    layout: Layout,
    grid: Grid,
    channel: ChannelDensity,
    table: CheckTable,
    conv: Convolver,
    channel_spectrum: Spectrum,
    x: Vec<SymmetricDensity>,
    x_mag: Vec<MagnitudeDensity>,
    pair_mag: Vec<MagnitudeDensity>,
    y: Vec<SymmetricDensity>,
    b: Vec<f64>,
}

impl DensityEngine {
    pub fn new(layout: Layout, channel: ChannelModel, grid: Grid) -> Result<Self> {
        let cd = channel_density(channel, grid)?;
        Self::with_channel_density(layout, cd)
    }

    pub fn with_channel_density(layout: Layout, channel: ChannelDensity) -> Result<Self> {
        let grid = channel.density.grid;
        let table = CheckTable::new(grid);
        let conv = Convolver::new(grid, layout.j + 1);
        let channel_spectrum = conv.spectrum(&channel.density);
        let x0 = channel.density.clone();
        let x0_mag = MagnitudeDensity::from_density(&x0);
        let pair0 = table.combine(&x0_mag, &x0_mag);
        let p = layout.positions();
        let b0 = x0.bhattacharyya();
        Ok(DensityEngine {
            layout,
            grid,
            table,
            conv,
            channel_spectrum,
            x: vec![x0; p],
            x_mag: vec![x0_mag; p],
            pair_mag: vec![pair0; p],
            y: vec![SymmetricDensity::erasure(grid); p],
            b: vec![b0; p],
            channel,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn channel(&self) -> &ChannelDensity {
        &self.channel
    }

    pub fn table(&self) -> &CheckTable {
        &self.table
    }

    /// Variable-to-check density of class `(t, k)`.
    pub fn x(&self, t: usize, k: usize) -> &SymmetricDensity {
        &self.x[self.layout.index(t, k)]
    }

    /// Check-to-variable density of class `(t, k)`.
    pub fn y(&self, t: usize, k: usize) -> &SymmetricDensity {
        &self.y[self.layout.index(t, k)]
    }

    /// A-posteriori density at variable time `t`.
    pub fn posterior(&self, t: usize) -> Result<SymmetricDensity> {
        let lay = self.layout;
        let mut acc = self.channel_spectrum.clone();
        for k in 0..lay.j {
            acc = self.conv.multiply(&acc, &self.conv.spectrum(&self.y[lay.index(t, k)]));
        }
        let mut out = SymmetricDensity::perfect(self.grid);
        self.conv.density_into(&acc, &mut out)?;
        Ok(out)
    }

    /// Combines a list of check-side factors in an order that is invariant
    /// under reversal, so mirrored classes see identical rounding.
    fn combine_symmetric(&self, items: &[&MagnitudeDensity]) -> Option<MagnitudeDensity> {
        match items.len() {
            0 => None,
            1 => Some(items[0].clone()),
            len => {
                let ends = self.table.combine(items[0], items[len - 1]);
                match self.combine_symmetric(&items[1..len - 1]) {
                    Some(mid) => Some(self.table.combine(&ends, &mid)),
                    None => Some(ends),
                }
            }
        }
    }
}

impl DeEngine for DensityEngine {
    fn layout(&self) -> &Layout {
        &self.layout
    }

    fn channel_bhattacharyya(&self) -> f64 {
        self.channel.a
    }

    fn floor(&self) -> f64 {
        match self.channel.density.inf {
            inf if inf > 0.0 => 0.0,
            _ => self.grid.floor(),
        }
    }

    fn refresh_check_message(&mut self, t: usize, k: usize) -> Result<()> {
        let lay = self.layout;
        let s = lay.check_of(t, k);
        let others: Vec<&MagnitudeDensity> = (0..lay.j)
            .filter(|&i| i != k)
            .filter_map(|i| lay.var_of(s, i).map(|v| &self.pair_mag[lay.index(v, i)]))
            .collect();
        let own = &self.x_mag[lay.index(t, k)];
        let out = match self.combine_symmetric(&others) {
            Some(rest) => self.table.combine(own, &rest),
            None => own.clone(),
        };
        let idx = lay.index(t, k);
        out.write_density(&mut self.y[idx]);
        Ok(())
    }

    fn update_variable(&mut self, t: usize) -> Result<()> {
        let lay = self.layout;
        let j = lay.j;
        let spectra: Vec<Spectrum> = (0..j).map(|k| self.conv.spectrum(&self.y[lay.index(t, k)])).collect();
        // prefix[k] = channel * y_0 ... y_{k-1}; suffix[k] = y_k ... y_{J-1}.
        let mut prefix = vec![self.channel_spectrum.clone()];
        for k in 0..j - 1 {
            let next = self.conv.multiply(&prefix[k], &spectra[k]);
            prefix.push(next);
        }
        let mut suffix: Vec<Option<Spectrum>> = vec![None; j + 1];
        for k in (1..j).rev() {
            suffix[k] = Some(match &suffix[k + 1] {
                Some(s) => self.conv.multiply(&spectra[k], s),
                None => spectra[k].clone(),
            });
        }
        for k in 0..j {
            let ext = match &suffix[k + 1] {
                Some(s) => self.conv.multiply(&prefix[k], s),
                None => prefix[k].clone(),
            };
            let idx = lay.index(t, k);
            self.conv.density_into(&ext, &mut self.x[idx])?;
            self.x_mag[idx] = MagnitudeDensity::from_density(&self.x[idx]);
            self.pair_mag[idx] = self.table.combine(&self.x_mag[idx], &self.x_mag[idx]);
            self.b[idx] = self.x[idx].bhattacharyya();
        }
        Ok(())
    }

    fn mirror_variable(&mut self, t: usize) {
        let lay = self.layout;
        for k in 0..lay.j {
            let (mt, mk) = lay.mirror(t, k);
            let (dst, src) = (lay.index(t, k), lay.index(mt, mk));
            self.x[dst] = self.x[src].clone();
            self.x_mag[dst] = self.x_mag[src].clone();
            self.pair_mag[dst] = self.pair_mag[src].clone();
            self.b[dst] = self.b[src];
            self.y[dst] = self.y[src].clone();
        }
    }

    fn bhattacharyya(&self, t: usize, k: usize) -> f64 {
        self.b[self.layout.index(t, k)]
    }

    fn error_probability(&mut self, t: usize) -> Result<f64> {
        let post = self.posterior(t)?;
        Ok(error_probability_of(&post.grid, &post.mass))
    }
}
