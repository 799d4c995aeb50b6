use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ldpcc::channel::ChannelModel;
use ldpcc::de::{
    breakout_value, channel_density, convolve_direct, lemma1_step, parallel_iteration, run_de, BecEngine, Convolver,
    DeConfig, DeEngine, DensityEngine, Grid, Layout, Lemma1Form, SymmetricDensity,
};

/// Erasure recursion written directly over `(t, k)` with a check-major loop.
struct BecOracle {
    j: usize,
    n: usize,
    eps: f64,
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
}

impl BecOracle {
    fn new(j: usize, l: usize, eps: f64) -> Self {
        let n = l + j;
        BecOracle { j, n, eps, x: vec![vec![eps; j]; n + 1], y: vec![vec![1.0; j]; n + 1] }
    }

    fn iterate(&mut self) {
        for s in 1..self.n + self.j {
            for k in 0..self.j {
                if s <= k || s - k > self.n {
                    continue;
                }
                let t = s - k;
                let mut keep = 1.0 - self.x[t][k];
                for i in 0..self.j {
                    if i != k && s > i && s - i <= self.n {
                        keep *= (1.0 - self.x[s - i][i]).powi(2);
                    }
                }
                self.y[t][k] = 1.0 - keep;
            }
        }
        for t in 1..=self.n {
            for k in 0..self.j {
                self.x[t][k] = self.eps * (0..self.j).filter(|&q| q != k).map(|q| self.y[t][q]).product::<f64>();
            }
        }
    }

    fn pb(&self, t: usize) -> f64 {
        self.eps * self.y[t].iter().product::<f64>()
    }
}

#[test]
fn erasure_engine_matches_direct_recursion() {
    let (j, l, eps) = (3, 100, 0.45);
    let mut oracle = BecOracle::new(j, l, eps);
    let lay = Layout::terminated(j, l).unwrap();
    let mut plain = BecEngine::new(lay, eps).unwrap();
    let mut mirrored = BecEngine::new(lay, eps).unwrap();
    for ell in 1..=300 {
        oracle.iterate();
        parallel_iteration(&mut plain, false).unwrap();
        parallel_iteration(&mut mirrored, true).unwrap();
        if ell % 50 == 0 {
            for t in 1..=lay.n {
                for k in 0..j {
                    assert!((plain.x(t, k) - oracle.x[t][k]).abs() < 1e-12, "ell {ell} ({t},{k})");
                    assert!((mirrored.x(t, k) - oracle.x[t][k]).abs() < 1e-12, "ell {ell} ({t},{k}) mirrored");
                    assert!((plain.y(t, k) - oracle.y[t][k]).abs() < 1e-12);
                }
                assert!((plain.error_probability(t).unwrap() - oracle.pb(t)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn density_engine_reproduces_erasure_recursion() {
    let (j, l, eps) = (3, 10, 0.45);
    let lay = Layout::terminated(j, l).unwrap();
    let grid = Grid::new(0.5, 5.0).unwrap();
    let mut bec = BecEngine::new(lay, eps).unwrap();
    let mut dens = DensityEngine::new(lay, ChannelModel::Bec { epsilon: eps }, grid).unwrap();
    for _ in 0..40 {
        parallel_iteration(&mut bec, false).unwrap();
        parallel_iteration(&mut dens, false).unwrap();
    }
    for t in 1..=lay.n {
        for k in 0..j {
            assert!((bec.bhattacharyya(t, k) - dens.bhattacharyya(t, k)).abs() < 1e-9, "({t},{k})");
        }
        let pb_dens = dens.error_probability(t).unwrap();
        assert!((2.0 * pb_dens - bec.error_probability(t).unwrap()).abs() < 1e-9, "t = {t}");
    }
}

fn random_density(grid: Grid, rng: &mut ChaCha8Rng) -> SymmetricDensity {
    let sigma = rng.gen_range(0.6..1.4);
    let mut d = channel_density(ChannelModel::BiAwgn { sigma }, grid).unwrap().density;
    let atom = rng.gen_range(0.0..0.3);
    for m in &mut d.mass {
        *m *= 1.0 - atom;
    }
    d.inf = atom;
    d
}

#[test]
fn fft_convolution_matches_direct_sum() {
    let grid = Grid::new(0.1, 12.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for terms in 2..=4 {
        let inputs: Vec<SymmetricDensity> = (0..terms).map(|_| random_density(grid, &mut rng)).collect();
        let refs: Vec<&SymmetricDensity> = inputs.iter().collect();
        let fast = Convolver::new(grid, terms).convolve(&refs).unwrap();
        let slow = convolve_direct(&refs).unwrap();
        let worst = fast.mass.iter().zip(&slow.mass).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-9, "{terms} terms: {worst:e}");
        assert!((fast.inf - slow.inf).abs() < 1e-12);
        assert!((fast.total() - 1.0).abs() < 1e-9);
    }
}

/// One bound step computed edge by edge from an explicit list of check
/// neighbourhoods.
fn lemma1_reference(j: usize, n: usize, prev: &[f64], a: f64, form: Lemma1Form) -> Vec<f64> {
    let idx = |t: usize, k: usize| (t - 1) * j + k;
    let mut checks: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n + j];
    for t in 1..=n {
        for k in 0..j {
            checks[t + k].push((t, k));
        }
    }
    let mut out = vec![0.0; prev.len()];
    for t in 1..=n {
        for k in 0..j {
            let mut v = a;
            for kp in 0..j {
                if kp == k {
                    continue;
                }
                let mut f = prev[idx(t, kp)];
                for &(u, ip) in &checks[t + kp] {
                    if ip == kp {
                        continue;
                    }
                    let b = prev[idx(u, ip)];
                    f += match form {
                        Lemma1Form::AsPrinted => b * b,
                        Lemma1Form::EdgeMultiplicity => b + b,
                    };
                }
                v *= f;
            }
            out[idx(t, k)] = v.clamp(0.0, 1.0);
        }
    }
    out
}

#[test]
fn bound_step_matches_reference() {
    let (j, l, a) = (3, 10, 0.3);
    let lay = Layout::terminated(j, l).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for form in [Lemma1Form::AsPrinted, Lemma1Form::EdgeMultiplicity] {
        let mut ours: Vec<f64> = (0..lay.positions()).map(|_| rng.gen_range(0.0..0.2)).collect();
        let mut theirs = ours.clone();
        for step in 0..5 {
            ours = lemma1_step(&lay, &ours, a, form);
            theirs = lemma1_reference(j, lay.n, &theirs, a, form);
            for (x, y) in ours.iter().zip(&theirs) {
                assert!((x - y).abs() <= 1e-14 * y.abs(), "{form:?} step {step}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn awgn_profile_is_mirror_symmetric() {
    let lay = Layout::terminated(3, 10).unwrap();
    let grid = Grid::new(0.05, 25.0).unwrap();
    let mut e = DensityEngine::new(lay, ChannelModel::BiAwgn { sigma: 0.9 }, grid).unwrap();
    for _ in 0..15 {
        parallel_iteration(&mut e, false).unwrap();
    }
    for t in 1..=lay.n {
        for k in 0..3 {
            let (mt, mk) = lay.mirror(t, k);
            let (b, bm) = (e.bhattacharyya(t, k), e.bhattacharyya(mt, mk));
            assert!((b - bm).abs() < 1e-6, "({t},{k}) {b} vs ({mt},{mk}) {bm}");
        }
    }
}

#[test]
fn erasure_recursion_is_monotone() {
    let lay = Layout::terminated(3, 40).unwrap();
    let mut lo = BecEngine::new(lay, 0.44).unwrap();
    let mut hi = BecEngine::new(lay, 0.46).unwrap();
    let mut prev = lo.x_all().to_vec();
    for _ in 0..200 {
        parallel_iteration(&mut lo, false).unwrap();
        parallel_iteration(&mut hi, false).unwrap();
        assert!(lo.x_all().iter().zip(&prev).all(|(now, before)| now <= before));
        assert!(lo.x_all().iter().zip(hi.x_all()).all(|(a, b)| a <= b));
        prev = lo.x_all().to_vec();
    }
}

#[test]
fn boundary_positions_lead() {
    let lay = Layout::terminated(3, 100).unwrap();
    let mut e = BecEngine::new(lay, 0.45).unwrap();
    for _ in 0..10 {
        parallel_iteration(&mut e, false).unwrap();
    }
    let p1 = e.error_probability(1).unwrap();
    let p50 = e.error_probability(50).unwrap();
    assert!(p1 < p50, "{p1} vs {p50}");
}

#[test]
fn erasure_verdicts_on_either_side_of_threshold() {
    let lay = Layout::terminated(3, 100).unwrap();
    let cfg = DeConfig { mirror: true, ..DeConfig::default() };
    let good = run_de(&mut BecEngine::new(lay, 0.40).unwrap(), &cfg).unwrap();
    assert!(good.verdict.is_certified());
    assert!((good.b_br - breakout_value(3, 0.40).unwrap()).abs() < 1e-15);
    assert!(good.bmax[good.breakout.unwrap() - 1] < good.b_br);
    let lemma = good.lemma1.unwrap();
    assert!(lemma.comparisons > 0);
    assert_eq!(lemma.violations, 0);
    assert_eq!(good.contraction.violations, 0);

    let bad = run_de(&mut BecEngine::new(lay, 0.499).unwrap(), &cfg).unwrap();
    assert!(!bad.verdict.is_certified());
    assert!(bad.max_pb > 0.1, "{}", bad.max_pb);
}

#[test]
fn awgn_run_respects_bounds_and_normalization() {
    let lay = Layout::terminated(3, 10).unwrap();
    let grid = Grid::new(0.05, 25.0).unwrap();
    let mut e = DensityEngine::new(lay, ChannelModel::BiAwgn { sigma: 0.9 }, grid).unwrap();
    let cfg = DeConfig { max_iters: 400, extra_iters: 5, ..DeConfig::default() };
    let tr = run_de(&mut e, &cfg).unwrap();
    assert!(tr.verdict.is_certified(), "{:?}", tr.verdict);
    let lemma = tr.lemma1.unwrap();
    assert!(lemma.comparisons > 0);
    assert_eq!(lemma.violations, 0, "{lemma:?}");
    assert!(tr.contraction.checked > 0);
    assert_eq!(tr.contraction.violations, 0);
    assert!(tr.bmax.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));

    for t in 1..=lay.n {
        for k in 0..3 {
            assert!((e.x(t, k).total() - 1.0).abs() < 1e-9);
            assert!((e.y(t, k).total() - 1.0).abs() < 1e-9);
        }
        assert!((e.posterior(t).unwrap().total() - 1.0).abs() < 1e-9);
    }
    let ch = channel_density(ChannelModel::BiAwgn { sigma: 0.9 }, grid).unwrap();
    assert!((tr.a - ch.a).abs() < 1e-15);
}

#[test]
fn symmetry_survives_iteration() {
    let lay = Layout::terminated(3, 6).unwrap();
    let grid = Grid::new(0.02, 20.0).unwrap();
    let mut e = DensityEngine::new(lay, ChannelModel::BiAwgn { sigma: 1.0 }, grid).unwrap();
    let before = e.x(4, 1).symmetry_defect(1e-8);
    for _ in 0..5 {
        parallel_iteration(&mut e, false).unwrap();
    }
    let after = e.x(4, 1).symmetry_defect(1e-8);
    assert!(before < 0.02 && after < 0.05, "{before} -> {after}");
}
