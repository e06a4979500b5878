//! The reversible law for mu > 1: closed form, mixture form and detailed balance.

use allelic::partitions::enumerate_up_to;
use allelic::stationary::{
    check_detailed_balance_m, check_detailed_balance_s, lambda_pmf, normalizing_constant, pi_pmf,
    pi_via_mixture,
};
use allelic::{AllelicPartition, ModelParams};

fn main() -> allelic::Result<()> {
    let params = ModelParams::new(0.5, 1.0, 2.0)?;
    println!("C = {:.6}", normalizing_constant(&params)?);
    for text in ["0", "1^1", "2^1", "1^2", "1^1 2^1"] {
        let m: AllelicPartition = text.parse()?;
        println!(
            "pi({text:<8}) = {:.8}   mixture {:.8}",
            pi_pmf(&m, &params)?,
            pi_via_mixture(&m, &params, 12)?
        );
    }

    let mass: f64 = enumerate_up_to(14)?
        .iter()
        .map(|m| pi_pmf(m, &params))
        .sum::<allelic::Result<f64>>()?;
    let lam: f64 = (0..=14)
        .map(|n| lambda_pmf(n, 1.0, 2.0))
        .sum::<allelic::Result<f64>>()?;
    println!("\nmass on s <= 14: pi {mass:.12}, lambda {lam:.12}");

    println!(
        "\n{:>5} {:>6} {:>5} {:>12} {:>12}",
        "alpha", "theta", "mu", "balance S", "balance M"
    );
    for (a, t, mu) in [
        (0.5, 1.0, 2.0),
        (0.5, -0.25, 1.2),
        (0.9, 2.0, 5.0),
        (0.1, -0.05, 1.2),
    ] {
        let p = ModelParams::new(a, t, mu)?;
        let s = check_detailed_balance_s(&p, 200)?;
        let m = check_detailed_balance_m(&p, 10)?;
        println!(
            "{a:>5} {t:>6} {mu:>5} {:>12.2e} {:>12.2e}",
            s.max_residual, m.max_residual
        );
    }
    Ok(())
}
