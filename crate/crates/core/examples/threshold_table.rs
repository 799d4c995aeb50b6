//! Erasure thresholds of terminated ensembles as a function of `L`, and the
//! termination lengths and Eb/N0 conversions used for rate-0.49 tables.

use ldpcc::threshold::{
    bisect_threshold, l_for_target_rate, rescale_ebn0, threshold_vs_l, ChannelFamily, ThresholdQuery,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut block = ThresholdQuery::new(3, None, ChannelFamily::Bec);
    block.tol = 1e-4;
    let r = bisect_threshold(&block)?;
    println!("(3,6) block: eps* = {:.4} after {} probes", r.threshold, r.probes.len());

    let mut base = ThresholdQuery::new(3, None, ChannelFamily::Bec);
    base.lo = 0.45;
    base.hi = 0.52;
    base.tol = 1e-3;
    base.de.mirror = true;
    let table = threshold_vs_l(&base, &[10, 20, 30])?;
    for (l, row) in &table.rows {
        println!("L = {l:>3}: eps* in [{:.4}, {:.4}], rate {:.4}", row.bracket.0, row.bracket.1, row.rate);
    }
    println!("spread over the larger L: {:.1e}", table.tail_spread);

    for j in [3, 4, 5] {
        let l = l_for_target_rate(j, 0.49)?;
        println!("J = {j}: L = {l} gives rate 0.49");
    }
    println!("0.55 dB at rate 0.49 is {:.3} dB at rate 1/2", rescale_ebn0(0.55, 0.49, 0.5));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
