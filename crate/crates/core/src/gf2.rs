//! Dense GF(2) linear algebra on packed rows.

/// A dense binary matrix with rows packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        BitMatrix { rows, cols, words, data: vec![0; rows * words] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn flip(&mut self, r: usize, c: usize) {
        self.data[r * self.words + c / 64] ^= 1 << (c % 64);
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let w = self.words;
        let (a, b) = if src < dst {
            let (lo, hi) = self.data.split_at_mut(dst * w);
            (&lo[src * w..src * w + w], &mut hi[..w])
        } else {
            let (lo, hi) = self.data.split_at_mut(src * w);
            (&hi[..w] as &[u64], &mut lo[dst * w..dst * w + w])
        };
        for (d, s) in b.iter_mut().zip(a) {
            *d ^= *s;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.words {
            self.data.swap(a * self.words + k, b * self.words + k);
        }
    }

    /// Rank by Gaussian elimination on a copy.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.eliminate(None).len()
    }

    /// Reduces `self` to reduced row echelon form in place, applying the same
    /// row operations to `companion` if given. Returns the pivot columns.
    fn eliminate(&mut self, mut companion: Option<&mut BitMatrix>) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.swap_rows(r, p);
            if let Some(comp) = companion.as_deref_mut() {
                comp.swap_rows(r, p);
            }
            for i in 0..self.rows {
                if i != r && self.get(i, c) {
                    self.xor_row_into(r, i);
                    if let Some(comp) = companion.as_deref_mut() {
                        comp.xor_row_into(r, i);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Matrix-vector product over GF(2).
    pub fn mul_vec(&self, x: &[u8]) -> Vec<u8> {
        assert_eq!(x.len(), self.cols);
        let packed = pack(x);
        (0..self.rows)
            .map(|r| {
                let ones: u32 = self.row(r).iter().zip(&packed).map(|(a, b)| (a & b).count_ones()).sum();
                (ones & 1) as u8
            })
            .collect()
    }
}

fn pack(x: &[u8]) -> Vec<u64> {
    let mut out = vec![0u64; x.len().div_ceil(64).max(1)];
    for (i, &b) in x.iter().enumerate() {
        if b & 1 == 1 {
            out[i / 64] |= 1 << (i % 64);
        }
    }
    out
}

/// Precomputed solver for `A x = b` over GF(2).
///
/// Elimination is done once; each solve applies the recorded row operations to
/// the right-hand side and reads off the pivot variables. Free variables are
/// set to zero.
#[derive(Debug, Clone)]
pub struct Gf2Solver {
    cols: usize,
    pivots: Vec<usize>,
    transform: BitMatrix,
}

impl Gf2Solver {
    pub fn new(a: &BitMatrix) -> Self {
        let mut reduced = a.clone();
        let mut transform = BitMatrix::zeros(a.rows, a.rows);
        for i in 0..a.rows {
            transform.set(i, i, true);
        }
        let pivots = reduced.eliminate(Some(&mut transform));
        Gf2Solver { cols: a.cols, pivots, transform }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Solves `A x = b`. On inconsistency returns the number of violated
    /// reduced equations.
    pub fn solve(&self, b: &[u8]) -> std::result::Result<Vec<u8>, usize> {
        let tb = self.transform.mul_vec(b);
        let bad = tb[self.pivots.len()..].iter().filter(|&&v| v == 1).count();
        if bad > 0 {
            return Err(bad);
        }
        let mut x = vec![0u8; self.cols];
        for (r, &c) in self.pivots.iter().enumerate() {
            x[c] = tb[r];
        }
        Ok(x)
    }
}
