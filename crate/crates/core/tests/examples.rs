#[path = "../examples/construct_code.rs"]
mod construct_code;

#[path = "../examples/encode_decode.rs"]
mod encode_decode;

#[path = "../examples/monte_carlo_ber.rs"]
mod monte_carlo_ber;

#[path = "../examples/bec_density_evolution.rs"]
mod bec_density_evolution;

#[path = "../examples/awgn_density_evolution.rs"]
mod awgn_density_evolution;

#[path = "../examples/sliding_window.rs"]
mod sliding_window;

#[path = "../examples/threshold_table.rs"]
mod threshold_table;

#[path = "../examples/bhattacharyya_bounds.rs"]
mod bhattacharyya_bounds;

#[test]
fn construct_code_runs() {
    construct_code::run_example().expect("construct_code example should run");
}

#[test]
fn encode_decode_runs() {
    encode_decode::run_example().expect("encode_decode example should run");
}

#[test]
fn monte_carlo_ber_runs() {
    monte_carlo_ber::run_example().expect("monte_carlo_ber example should run");
}

#[test]
fn bec_density_evolution_runs() {
    bec_density_evolution::run_example().expect("bec_density_evolution example should run");
}

#[test]
fn awgn_density_evolution_runs() {
    awgn_density_evolution::run_example().expect("awgn_density_evolution example should run");
}

#[test]
fn sliding_window_runs() {
    sliding_window::run_example().expect("sliding_window example should run");
}

#[test]
fn threshold_table_runs() {
    threshold_table::run_example().expect("threshold_table example should run");
}

#[test]
fn bhattacharyya_bounds_runs() {
    bhattacharyya_bounds::run_example().expect("bhattacharyya_bounds example should run");
}
