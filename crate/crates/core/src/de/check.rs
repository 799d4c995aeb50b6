//! Check-node density combination in sign/magnitude form.
//!
//! A symmetric density is split by LLR magnitude `a` (bin `0..=n`, plus
//! index `n + 1` for infinity) into `S(a) = p(+a) + p(-a)` and
//! `D(a) = p(+a) - p(-a)`. For two independent messages the output magnitude
//! is `T(a, b) = phi(phi(a) + phi(b))` and the sign is the product of signs,
//! so `S` and `D` both combine as `out[T(a, b)] += X(a) X(b)`.

use super::density::{Grid, SymmetricDensity};
use crate::bp::phi;

/// Sign/magnitude representation used on the check side.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeDensity {
    pub s: Vec<f64>,
    pub d: Vec<f64>,
}

impl MagnitudeDensity {
    pub fn from_density(p: &SymmetricDensity) -> Self {
        let n = p.grid.half();
        let mut s = vec![0.0; n + 2];
        let mut d = vec![0.0; n + 2];
        s[0] = p.mass[n];
        for a in 1..=n {
            let (pos, neg) = (p.mass[n + a], p.mass[n - a]);
            s[a] = pos + neg;
            d[a] = pos - neg;
        }
        s[n + 1] = p.inf;
        d[n + 1] = p.inf;
        MagnitudeDensity { s, d }
    }

    pub fn to_density(&self, grid: Grid) -> SymmetricDensity {
        let mut out = SymmetricDensity { grid, mass: vec![0.0; grid.len()], inf: 0.0 };
        self.write_density(&mut out);
        out
    }

    pub fn write_density(&self, out: &mut SymmetricDensity) {
        let n = out.grid.half();
        out.mass[n] = self.s[0];
        for a in 1..=n {
            out.mass[n + a] = 0.5 * (self.s[a] + self.d[a]);
            out.mass[n - a] = (0.5 * (self.s[a] - self.d[a])).max(0.0);
        }
        out.inf = self.s[n + 1];
    }

    fn zeroed(len: usize) -> Self {
        MagnitudeDensity { s: vec![0.0; len], d: vec![0.0; len] }
    }
}

/// Banded lookup table for `T(a, b)`.
///
/// For `b > a + width` the result is `a` after rounding, so only the band
/// `a <= b <= a + width` is stored.
#[derive(Debug, Clone)]
pub struct CheckTable {
    n: usize,
    width: usize,
    rows: Vec<u32>,
}

impl CheckTable {
    pub fn new(grid: Grid) -> Self {
        let n = grid.half();
        let delta = grid.delta;
        let phis: Vec<f64> = (0..=n).map(|a| phi(a as f64 * delta)).collect();
        let t = |a: usize, b: usize| -> usize {
            if a == 0 {
                return 0;
            }
            let v = phi(phis[a] + phis[b]) / delta;
            (v.round() as usize).min(a.min(b))
        };
        // Smallest b* with T(a, b) = a for every b >= b*; T is nondecreasing in b.
        let mut width = 0;
        for a in 1..=n {
            let mut b = n;
            while b > a && t(a, b - 1) == a {
                b -= 1;
            }
            if t(a, n) != a {
                b = n + 1;
            }
            width = width.max(b.saturating_sub(a));
        }
        let mut rows = vec![0u32; (n + 1) * (width + 1)];
        for a in 0..=n {
            for off in 0..=width {
                let b = a + off;
                rows[a * (width + 1) + off] = if b <= n { t(a, b) as u32 } else { a as u32 };
            }
        }
        CheckTable { n, width, rows }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Direct lookup of `T(a, b)`, with `n + 1` standing for infinity.
    pub fn lookup(&self, a: usize, b: usize) -> usize {
        let (a, b) = (a.min(b), a.max(b));
        if a == self.n + 1 {
            return a;
        }
        if b - a > self.width || b == self.n + 1 {
            return a;
        }
        self.rows[a * (self.width + 1) + (b - a)] as usize
    }

    /// Density of `x ⊞ y` for independent `x` and `y`.
    pub fn combine(&self, x: &MagnitudeDensity, y: &MagnitudeDensity) -> MagnitudeDensity {
        let mut out = MagnitudeDensity::zeroed(self.n + 2);
        self.combine_into(x, y, &mut out);
        out
    }

    pub fn combine_into(&self, x: &MagnitudeDensity, y: &MagnitudeDensity, out: &mut MagnitudeDensity) {
        let n = self.n;
        let inf = n + 1;
        out.s.iter_mut().for_each(|v| *v = 0.0);
        out.d.iter_mut().for_each(|v| *v = 0.0);
        // Suffix sums over b in [k, inf] for both inputs.
        let mut xs = vec![0.0; n + 3];
        let mut xd = vec![0.0; n + 3];
        let mut ys = vec![0.0; n + 3];
        let mut yd = vec![0.0; n + 3];
        for k in (0..=inf).rev() {
            xs[k] = xs[k + 1] + x.s[k];
            xd[k] = xd[k + 1] + x.d[k];
            ys[k] = ys[k + 1] + y.s[k];
            yd[k] = yd[k + 1] + y.d[k];
        }
        let w = self.width;
        for a in 0..=n {
            let (xsa, xda, ysa, yda) = (x.s[a], x.d[a], y.s[a], y.d[a]);
            if xsa == 0.0 && ysa == 0.0 {
                continue;
            }
            let row = &self.rows[a * (w + 1)..(a + 1) * (w + 1)];
            // Diagonal pair (a, a).
            let c = row[0] as usize;
            out.s[c] += xsa * ysa;
            out.d[c] += xda * yda;
            // Band pairs (a, b) and (b, a) with a < b <= min(a + w, n).
            let hi = (a + w).min(n);
            for b in a + 1..=hi {
                let c = row[b - a] as usize;
                out.s[c] += xsa * y.s[b] + x.s[b] * ysa;
                out.d[c] += xda * y.d[b] + x.d[b] * yda;
            }
            // Everything above the band, including infinity, leaves magnitude a.
            let from = hi + 1;
            out.s[a] += xsa * ys[from] + xs[from] * ysa;
            out.d[a] += xda * yd[from] + xd[from] * yda;
        }
        out.s[inf] += x.s[inf] * y.s[inf];
        out.d[inf] += x.d[inf] * y.d[inf];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bp::check_update;

    fn point(grid: Grid, z: f64) -> SymmetricDensity {
        let mut p = SymmetricDensity { grid, mass: vec![0.0; grid.len()], inf: 0.0 };
        let i = (z / grid.delta).round() as isize + grid.half() as isize;
        p.mass[i as usize] = 1.0;
        p
    }

    #[test]
    fn table_matches_check_rule() {
        let g = Grid::new(0.05, 10.0).unwrap();
        let t = CheckTable::new(g);
        for &(a, b) in &[(1usize, 1usize), (10, 20), (40, 41), (100, 199), (150, 200), (200, 200)] {
            let expected = check_update(&[a as f64 * g.delta, b as f64 * g.delta]) / g.delta;
            assert_eq!(t.lookup(a, b), (expected.round() as usize).min(a.min(b)), "{a} {b}");
        }
        assert_eq!(t.lookup(0, 5), 0);
        assert_eq!(t.lookup(7, g.half() + 1), 7);
    }

    #[test]
    fn point_masses_combine_like_the_check_rule() {
        let g = Grid::new(0.05, 10.0).unwrap();
        let t = CheckTable::new(g);
        let x = MagnitudeDensity::from_density(&point(g, 2.0));
        let y = MagnitudeDensity::from_density(&point(g, -1.5));
        let out = t.combine(&x, &y).to_density(g);
        let z = check_update(&[2.0, -1.5]);
        let i = (z / g.delta).round() as isize + g.half() as isize;
        assert!((out.mass[i as usize] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn erasure_and_perfect_are_exact() {
        let g = Grid::new(0.1, 5.0).unwrap();
        let t = CheckTable::new(g);
        let x = MagnitudeDensity::from_density(&SymmetricDensity::two_point(g, 0.3));
        let y = MagnitudeDensity::from_density(&SymmetricDensity::two_point(g, 0.2));
        let out = t.combine(&x, &y).to_density(g);
        assert!((out.mass[g.half()] - (1.0 - 0.7 * 0.8)).abs() < 1e-15);
        assert!((out.inf - 0.56).abs() < 1e-15);
    }
}
