//! Bit and frame error rates on the erasure channel, with Wilson intervals.

use ldpcc::ensemble::EnsembleParams;
use ldpcc::montecarlo::{monte_carlo, ChannelFamily, MonteCarloConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let params = EnsembleParams::new(3, 64, 20)?;
    let mut cfg = MonteCarloConfig::new(params, ChannelFamily::Bec, vec![0.30, 0.40, 0.50], 40);
    cfg.seed = 1;
    cfg.random_info = true;
    let table = monte_carlo(&cfg)?;
    for p in &table.points {
        println!(
            "eps {:.2}: BER {:.3e} [{:.1e}, {:.1e}]  FER {:.3}  mean iterations {:.1}",
            p.channel_param, p.ber, p.ber_ci95.lo, p.ber_ci95.hi, p.fer, p.mean_iters
        );
    }
    print!("{}", table.to_csv());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
