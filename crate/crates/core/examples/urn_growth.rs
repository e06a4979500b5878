//! Sequential urn sampling and the growth of the number of groups K_n.

use allelic::montecarlo::{growth_report, replicate_rng, EmpiricalDistribution};
use allelic::urn::sample_psf;
use allelic::{formulae, ModelParams};

fn main() -> allelic::Result<()> {
    let params = ModelParams::new(0.5, 0.5, 0.0)?;
    let mut hist = EmpiricalDistribution::new(1);
    for r in 0..20_000 {
        hist.record(sample_psf(4, &params, &mut replicate_rng(1, r))?);
    }
    println!("urn samples of n = 4 vs the Pitman formula:");
    for (m, q) in hist.probabilities() {
        println!(
            "  {:<10} {q:.4}  exact {:.4}",
            m.encode(),
            formulae::psf(4, &params, &m)?
        );
    }

    for (alpha, theta) in [(0.0, 1.0), (0.0, 2.0), (0.5, 1.0)] {
        let p = ModelParams::new(alpha, theta, 0.0)?;
        let rows = growth_report(&p, 100_000, 100, 7, alpha, None)?;
        println!("\nalpha = {alpha}, theta = {theta}");
        println!(
            "{:>8} {:>10} {:>10} {:>10} {:>10}",
            "n", "E K_n", "K/ln n", "K/n^a", "CV"
        );
        for r in rows.iter().filter(|r| r.n >= 10) {
            println!(
                "{:>8} {:>10.3} {:>10.4} {:>10.4} {:>10.4}",
                r.n, r.mean_k, r.mean_k_over_log, r.mean_k_over_pow, r.cv_k_over_pow
            );
        }
    }
    Ok(())
}
