//! Breakout values and the one-step Bhattacharyya bound next to an actual
//! density-evolution run.

use ldpcc::de::parallel_iteration;
use ldpcc::de::{breakout_value, contraction_holds, lemma1_step, BecEngine, DeEngine, Layout, Lemma1Form};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for (j, a) in [(3, 0.16), (3, 0.04), (4, 0.5), (5, 0.5)] {
        println!("J = {j}, A = {a}: B_br = {:.6}", breakout_value(j, a)?);
    }

    let lay = Layout::terminated(3, 20)?;
    let eps = 0.30;
    let mut engine = BecEngine::new(lay, eps)?;
    parallel_iteration(&mut engine, false)?;
    let mut bound = engine.bhattacharyya_all();
    let b_br = breakout_value(3, eps)?;
    let mut prev_max = f64::NAN;
    for ell in 2..=30 {
        parallel_iteration(&mut engine, false)?;
        bound = lemma1_step(&lay, &bound, eps, Lemma1Form::EdgeMultiplicity);
        let actual = engine.bhattacharyya_all();
        let worst = actual.iter().zip(&bound).map(|(a, b)| if *b > 0.0 { a / b } else { 0.0 }).fold(0.0, f64::max);
        let bmax = actual.iter().copied().fold(0.0, f64::max);
        let contracted =
            if bmax < b_br && prev_max < b_br { Some(contraction_holds(3, prev_max, bmax, b_br)) } else { None };
        if ell % 4 == 0 {
            println!(
                "iteration {ell:>2}: B_max {bmax:.3e}, largest actual/bound {worst:.3}, contraction {contracted:?}"
            );
        }
        prev_max = bmax;
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
