//! Bhattacharyya bounds: breakout value, one-step bound recursion, and the
//! double-exponential contraction test.

use serde::{Deserialize, Serialize};

use super::Layout;
use crate::error::{invalid, Result};

/// `B_br = A^{-1/(J-1)} (2J-1)^{-(J-1)/(J-2)}`.
///
/// Returns `+inf` for `A = 0`, where every finite value certifies.
pub fn breakout_value(j: usize, a: f64) -> Result<f64> {
    if j < 3 {
        return invalid(format!("breakout value needs J >= 3, got {j}"));
    }
    if !(0.0..=1.0).contains(&a) {
        return invalid(format!("channel Bhattacharyya parameter {a} outside [0, 1]"));
    }
    let jf = j as f64;
    Ok(a.powf(-1.0 / (jf - 1.0)) * (2.0 * jf - 1.0).powf(-(jf - 1.0) / (jf - 2.0)))
}

/// How the messages entering a check through other offsets are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma1Form {
    /// `B_{t,t+k'} + sum_{i' != k'} B_{t+k'-i', t+k'}^2`.
    AsPrinted,
    /// `B_{t,t+k'} + 2 sum_{i' != k'} B_{t+k'-i', t+k'}`: each other offset
    /// contributes two edges, as in the `(2J - 1) B_max` aggregate.
    EdgeMultiplicity,
}

/// One step of the bound recursion
/// `B'_{t,k} = A prod_{k' != k} (B_{t,k'} + sum_{i' != k'} f(B_{t+k'-i', i'}))`,
/// with out-of-range classes contributing zero and results clamped to `[0, 1]`.
pub fn lemma1_step(layout: &Layout, prev: &[f64], a: f64, form: Lemma1Form) -> Vec<f64> {
    let j = layout.j;
    // Per class (t, k'): the factor seen through check t + k'.
    let factor: Vec<f64> = (1..=layout.n)
        .flat_map(|t| (0..j).map(move |kp| (t, kp)))
        .map(|(t, kp)| {
            let s = layout.check_of(t, kp);
            let mut f = prev[layout.index(t, kp)];
            for ip in (0..j).filter(|&ip| ip != kp) {
                if let Some(v) = layout.var_of(s, ip) {
                    let b = prev[layout.index(v, ip)];
                    f += match form {
                        Lemma1Form::AsPrinted => b * b,
                        Lemma1Form::EdgeMultiplicity => 2.0 * b,
                    };
                }
            }
            f
        })
        .collect();
    let mut out = vec![0.0; prev.len()];
    for t in 1..=layout.n {
        for k in 0..j {
            let mut v = a;
            for kp in (0..j).filter(|&kp| kp != k) {
                v *= factor[layout.index(t, kp)];
            }
            out[layout.index(t, k)] = v.clamp(0.0, 1.0);
        }
    }
    out
}

/// Largest value and its `(t, k)` class; ties go to the smallest `(t, k)`.
pub fn bmax(layout: &Layout, values: &[f64]) -> (f64, usize, usize) {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    (values[best], best / layout.j + 1, best % layout.j)
}

/// `B_next / B_br < (B_prev / B_br)^{J-1}`, evaluated in log space.
pub fn contraction_holds(j: usize, b_prev: f64, b_next: f64, b_br: f64) -> bool {
    if b_next == 0.0 {
        return true;
    }
    let lhs = b_next.ln() - b_br.ln();
    let rhs = (j as f64 - 1.0) * (b_prev.ln() - b_br.ln());
    lhs < rhs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breakout_examples() {
        assert!((breakout_value(3, 0.16).unwrap() - 0.1).abs() < 1e-15);
        assert!((breakout_value(3, 0.04).unwrap() - 0.2).abs() < 1e-15);
        assert!((breakout_value(4, 0.5).unwrap() - 0.068_029_342_236_678_3).abs() < 1e-12);
        assert!(breakout_value(2, 0.5).is_err());
        assert_eq!(breakout_value(3, 0.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn bound_from_channel_seed() {
        let lay = Layout::terminated(3, 10).unwrap();
        let a = 0.3;
        let seeded = vec![a; lay.positions()];
        let next = lemma1_step(&lay, &seeded, a, Lemma1Form::AsPrinted);
        let interior = next[lay.index(6, 1)];
        assert!((interior - a * (a + 2.0 * a * a).powi(2)).abs() < 1e-15);
        let zero = lemma1_step(&lay, &vec![0.0; lay.positions()], a, Lemma1Form::EdgeMultiplicity);
        assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tie_break_is_lexicographic() {
        let lay = Layout::terminated(3, 1).unwrap();
        let mut v = vec![0.1; lay.positions()];
        v[4] = 0.5;
        v[7] = 0.5;
        assert_eq!(bmax(&lay, &v), (0.5, 2, 1));
    }
}
