//! The sliding-window schedule: updates per level, level traces and the
//! window-versus-parallel checks on the erasure channel.

use ldpcc::de::{BecEngine, DeConfig, Layout};
use ldpcc::window::{aligned_curve_gap, check_prop1, check_prop2, profile_updates, run_windowed, WindowConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let lay = Layout::terminated(3, 60)?;
    let mut cfg = WindowConfig::new(10);
    cfg.sampled_levels = vec![15, 20];

    let mut engine = BecEngine::new(lay, 0.47)?;
    let report = run_windowed(&mut engine, &cfg)?;
    let plateau = profile_updates(&report);
    println!("{:?} after {} sweeps, B0 = {:.4}", report.verdict, report.total_sweeps, report.b0);
    println!("updates per level: {:?}", report.updates_per_level);
    println!(
        "plateau {}..={}: mean {:.1}, max deviation {:.2}%, peak at level {}",
        plateau.start,
        plateau.end,
        plateau.mean,
        100.0 * plateau.max_rel_deviation,
        plateau.peak_level
    );
    if let [a, b] = report.level_traces.as_slice() {
        println!("aligned gap between levels 15 and 20: {:?}", aligned_curve_gap(a, b, 1e-12));
    }

    let prop1 = check_prop1(3, 30, &[0.40, 0.45, 0.50, 0.55], &WindowConfig::new(6), &DeConfig::default())?;
    for rec in &prop1 {
        println!("eps {:.2}: window completed {}, outcome {:?}", rec.epsilon, rec.window_completed, rec.outcome);
    }
    let prop2 = check_prop2(&mut BecEngine::new(lay, 0.42)?, &WindowConfig::new(10), true)?;
    println!("shift-J-times check: {:?} after {} shifts", prop2.outcome, prop2.shifts);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
