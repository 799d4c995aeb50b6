//! Position-dependent density evolution on the erasure channel.
//!
//! Below threshold the boundary levels converge first and the decoding wave
//! travels inward; above it the iteration stalls at a nonzero fixed point.

use ldpcc::de::{run_de, BecEngine, DeConfig, DeEngine, Layout};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let lay = Layout::terminated(3, 50)?;
    let cfg = DeConfig { mirror: true, pb_stride: 100, ..DeConfig::default() };
    for eps in [0.45, 0.50] {
        let mut engine = BecEngine::new(lay, eps)?;
        let trace = run_de(&mut engine, &cfg)?;
        println!(
            "eps {eps:.2}: {:?} after {} iterations, B_br = {:.4}, max P_b = {:.3e}",
            trace.verdict, trace.iterations, trace.b_br, trace.max_pb
        );
        for snap in trace.pb_snapshots.iter().take(3) {
            let front = snap.pb.iter().position(|&p| p > 1e-6).map(|t| t + 1);
            println!("  iteration {:>4}: first unresolved level {front:?}", snap.iteration);
        }
        if let Some(rep) = &trace.lemma1 {
            println!("  bound comparisons {} with {} violations", rep.comparisons, rep.violations);
        }
        println!(
            "  P_b at levels 1, 10, center: {:.3e} {:.3e} {:.3e}",
            engine.error_probability(1)?,
            engine.error_probability(10)?,
            engine.error_probability(lay.center())?
        );
    }

    let block = run_de(&mut BecEngine::new(Layout::block(3)?, 0.42)?, &DeConfig::default())?;
    println!("uncoupled (3,6) at 0.42: {:?}", block.verdict);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
