use ldpcc::de::{run_de, BecEngine, DeConfig, DeEngine, Layout};
use ldpcc::window::{
    check_prop1, check_prop2, profile_updates, run_windowed, Prop1Outcome, Prop2Outcome, StallReason, WindowConfig,
    WindowVerdict,
};

fn bec(l: usize, eps: f64) -> BecEngine {
    BecEngine::new(Layout::terminated(3, l).unwrap(), eps).unwrap()
}

#[test]
fn far_below_threshold_sweeps_uniformly() {
    let rep = run_windowed(&mut bec(40, 0.10), &WindowConfig::new(10)).unwrap();
    assert!(rep.completed());
    assert_eq!(rep.shifts, rep.center);
    let s = profile_updates(&rep);
    assert!(!s.empty);
    assert!(s.max_rel_deviation < 0.05, "{s:?}");
    assert!(s.mean <= 10.0, "{s:?}");
}

#[test]
fn above_threshold_stalls_early() {
    let mut cfg = WindowConfig::new(10);
    cfg.per_position_budget = 2_000;
    let rep = run_windowed(&mut bec(100, 0.499), &cfg).unwrap();
    match rep.verdict {
        WindowVerdict::Stalled { position, reason } => {
            assert!(position <= 10, "stalled at {position}");
            assert!(matches!(reason, StallReason::PositionBudget | StallReason::Stagnated));
        }
        WindowVerdict::Completed => panic!("window completed above threshold"),
    }
    assert!(rep.shifts < 3, "{} shifts", rep.shifts);
}

#[test]
fn total_budget_is_honoured() {
    let mut cfg = WindowConfig::new(5);
    cfg.max_total_sweeps = 7;
    let rep = run_windowed(&mut bec(40, 0.45), &cfg).unwrap();
    assert_eq!(rep.total_sweeps, 7);
    assert!(matches!(rep.verdict, WindowVerdict::Stalled { reason: StallReason::TotalBudget, .. }));
}

#[test]
fn invalid_windows_are_rejected() {
    let c = Layout::terminated(3, 40).unwrap().center();
    assert!(run_windowed(&mut bec(40, 0.3), &WindowConfig::new(0)).is_err());
    assert!(run_windowed(&mut bec(40, 0.3), &WindowConfig::new(c + 1)).is_err());
    let mut cfg = WindowConfig::new(5);
    cfg.b0 = Some(1.0);
    assert!(run_windowed(&mut bec(40, 0.3), &cfg).is_err());
    let mut block = BecEngine::new(Layout::block(3).unwrap(), 0.3).unwrap();
    assert!(run_windowed(&mut block, &WindowConfig::new(1)).is_err());
}

#[test]
fn proposition_one_on_the_erasure_channel() {
    let window = WindowConfig::new(10);
    let records = check_prop1(3, 60, &[0.30, 0.40, 0.45, 0.499], &window, &DeConfig::default()).unwrap();
    let outcomes: Vec<Prop1Outcome> = records.iter().map(|r| r.outcome).collect();
    assert_eq!(
        outcomes,
        vec![Prop1Outcome::Consistent, Prop1Outcome::Consistent, Prop1Outcome::Consistent, Prop1Outcome::Vacuous]
    );

    let tiny = DeConfig { max_iters: 3, ..DeConfig::default() };
    let records = check_prop1(3, 60, &[0.45], &window, &tiny).unwrap();
    assert_eq!(records[0].outcome, Prop1Outcome::BudgetLimited);
}

#[test]
fn proposition_two_on_the_erasure_channel() {
    for l in [20, 50, 100] {
        let w = 10.min(Layout::terminated(3, l).unwrap().center());
        let rec = check_prop2(&mut bec(l, 0.42), &WindowConfig::new(w), true).unwrap();
        assert_eq!(rec.outcome, Prop2Outcome::Holds, "L = {l}: {rec:?}");
        assert!(!rec.conjecture);
        assert!(rec.final_bmax <= rec.b0);
    }
    let mut cfg = WindowConfig::new(10);
    cfg.per_position_budget = 2_000;
    let rec = check_prop2(&mut bec(100, 0.499), &cfg, true).unwrap();
    assert_eq!(rec.outcome, Prop2Outcome::NotApplicable, "{rec:?}");
}

#[test]
fn short_code_has_empty_plateau() {
    // L = 2W: the center is c = ceil((L + J) / 2) and [W + 1, c - W + 1] is empty.
    let w = 10;
    let rep = run_windowed(&mut bec(2 * w, 0.2), &WindowConfig::new(w)).unwrap();
    assert!(rep.completed());
    assert!(profile_updates(&rep).empty);
}

#[test]
fn shifts_are_monotone_and_triggered_by_b0() {
    let mut cfg = WindowConfig::new(8);
    cfg.sampled_levels = vec![12, 20];
    let mut e = bec(60, 0.46);
    let rep = run_windowed(&mut e, &cfg).unwrap();
    assert!(rep.completed());
    assert!(rep.shift_sweeps.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(rep.shift_sweeps.len(), rep.center);
    let lay = *e.layout();
    for t in 1..=lay.n {
        for k in 0..3 {
            assert!(e.bhattacharyya(t, k) < rep.b0, "({t},{k})");
        }
    }
    for tr in &rep.level_traces {
        assert!(tr.points.windows(2).all(|p| p[0].sweep < p[1].sweep && p[0].pb >= p[1].pb));
    }
}

#[test]
fn window_reaches_the_parallel_fixed_point() {
    let eps = 0.45;
    let mut win = bec(40, eps);
    run_windowed(&mut win, &WindowConfig::new(6)).unwrap();
    let mut par = bec(40, eps);
    let tr = run_de(&mut par, &DeConfig { mirror: true, ..DeConfig::default() }).unwrap();
    assert!(tr.verdict.is_certified());
    let lay = *win.layout();
    for t in 1..=lay.n {
        for k in 0..3 {
            assert!(win.bhattacharyya(t, k) < tr.b_br);
        }
    }
}

#[test]
fn adjacent_plateau_levels_differ_by_one_sweep() {
    let rep = run_windowed(&mut bec(100, 0.46), &WindowConfig::new(10)).unwrap();
    assert!(rep.completed());
    let s = profile_updates(&rep);
    let u = &rep.updates_per_level;
    for t in s.start..s.end {
        let d = u[t].abs_diff(u[t - 1]);
        assert!(d <= 1, "levels {t} and {}: {} vs {}", t + 1, u[t - 1], u[t]);
    }
}
