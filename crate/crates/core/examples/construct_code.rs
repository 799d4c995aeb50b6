//! Sample a terminated code, inspect its structure and round-trip it through
//! the alist format.
//!
//! ```bash
//! cargo run --example construct_code
//! ```

use ldpcc::alist::{export_alist, import_alist};
use ldpcc::code::{check_degree_at, rates, terminate};
use ldpcc::ensemble::{sample_ensemble, EnsembleParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let params = EnsembleParams::new(3, 16, 10)?;
    let code = terminate(&sample_ensemble(params, 7)?)?;

    println!("n = {}, checks = {}", code.n(), code.n_checks());
    let profile = code.degree_profile();
    println!("variable degrees {:?}", profile.variable);
    println!("check degrees    {:?}", profile.check);
    for s in [1, 2, 3, params.check_times()] {
        println!("  checks at time {s:>2} have degree {}", check_degree_at(&params, s));
    }

    let r = rates(&code);
    println!("design rate {:.4}, structural rate {:.4} (rank {})", r.design_rate, r.structural_rate, r.rank);
    println!("girth {:?}", code.girth());

    let text = export_alist(&code.graph);
    let back = import_alist(&text)?;
    assert_eq!(back, code.graph);
    println!("alist header: {}", text.lines().next().unwrap_or_default());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
