//! Encode random information, send it over a noisy channel and decode with
//! both message-passing schedules.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ldpcc::bp::{bp_decode, Schedule};
use ldpcc::channel::{channel_llr, ChannelModel};
use ldpcc::code::terminate;
use ldpcc::encode::Encoder;
use ldpcc::ensemble::{sample_ensemble, EnsembleParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let params = EnsembleParams::new(3, 64, 20)?;
    let sf = sample_ensemble(params, 3)?;
    let code = terminate(&sf)?;
    let encoder = Encoder::new(&sf);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let info: Vec<u8> = (0..params.info_length()).map(|_| rng.gen_range(0..2)).collect();
    let word = encoder.encode(&info)?;
    assert!(code.graph.is_codeword(&word));

    let channel = ChannelModel::awgn_from_ebn0_db(2.0, params.design_rate());
    let llrs = channel_llr(channel, &word, 5)?;

    let schedules = [Schedule::Parallel, Schedule::OnDemandWindow { width: 6, target_llr: 20.0 }];
    for schedule in schedules {
        let res = bp_decode(&code, &llrs, schedule, 200, Some(&word))?;
        let errors = res.decoded.iter().zip(&word).filter(|(a, b)| a != b).count();
        println!("{schedule:?}: converged {} after {} iterations, {errors} bit errors", res.converged, res.iterations);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
