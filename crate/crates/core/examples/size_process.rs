//! The item count alone: a birth-death-immigration chain on the integers.

use allelic::ctmc::{simulate_bdi, SimOptions};
use allelic::formulae::{b_t, neg_bin_pmf};
use allelic::montecarlo::{replicate_rng, run_ensemble, EngineKind, EnsembleConfig};
use allelic::ModelParams;

fn main() -> allelic::Result<()> {
    for mu in [0.5, 1.0, 2.0] {
        let params = ModelParams::new(0.0, 1.5, mu)?;
        let t = 3.0;
        let res = run_ensemble(&EnsembleConfig::new(params, t, 40_000, 5, EngineKind::Bdi))?;
        let b = b_t(mu, t)?;
        println!("mu = {mu}: b_t = {b:.4}");
        for n in 0..5 {
            println!(
                "  P(S = {n}) {:.4}  exact {:.4}",
                res.sizes.probability(&n),
                neg_bin_pmf(n, 1.5, b)?
            );
        }
    }

    let params = ModelParams::new(0.0, 1.0, 2.0)?;
    let path = simulate_bdi(
        &params,
        10.0,
        SimOptions::default(),
        &mut replicate_rng(9, 0),
    )?;
    let shown: Vec<String> = path
        .jumps
        .iter()
        .take(12)
        .map(|(t, n)| format!("{t:.2}:{n}"))
        .collect();
    println!("\nfirst jumps of one path: {}", shown.join(" "));
    Ok(())
}
