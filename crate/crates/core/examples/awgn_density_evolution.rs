//! Quantized density evolution for the (3,6) block ensemble on the
//! binary-input AWGN channel, with the breakout certificate.

use ldpcc::channel::ChannelModel;
use ldpcc::de::{channel_density, run_de, DeConfig, DensityEngine, Grid, Layout};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(0.05, 25.0)?;
    for ebn0 in [0.9, 1.3] {
        let channel = ChannelModel::awgn_from_ebn0_db(ebn0, 0.5);
        let cd = channel_density(channel, grid)?;
        println!(
            "Eb/N0 {ebn0} dB: A = {:.6} (closed form {:.6}, quadrature {:.6})",
            cd.a, cd.a_closed_form, cd.a_numeric
        );
        let mut engine = DensityEngine::with_channel_density(Layout::block(3)?, cd)?;
        let cfg = DeConfig { max_iters: 2_000, target_bmax: Some(1e-4), stagnation_tol: 1e-10, ..DeConfig::default() };
        let trace = run_de(&mut engine, &cfg)?;
        println!(
            "  {:?}, {} iterations, B_max {:.3e} (breakout value {:.4})",
            trace.verdict,
            trace.iterations,
            trace.bmax.last().copied().unwrap_or(1.0),
            trace.b_br
        );
        println!(
            "  contraction checked {} times, {} violations",
            trace.contraction.checked, trace.contraction.violations
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
