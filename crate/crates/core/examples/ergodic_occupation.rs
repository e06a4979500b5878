//! Time averages along one long run converge to the stationary law.

use allelic::montecarlo::{
    batch_mean_se, restrict, stationary_occupation_batches, tv_distance, DEFAULT_BURN_IN,
};
use allelic::partitions::enumerate_up_to;
use allelic::stationary::pi_pmf;
use allelic::ModelParams;

fn main() -> allelic::Result<()> {
    let params = ModelParams::new(0.5, 1.0, 2.0)?;
    let batches = stationary_occupation_batches(&params, 5e4, DEFAULT_BURN_IN, 20, 3)?;
    println!(
        "{:<12} {:>10} {:>8} {:>10}",
        "state", "occupation", "se", "pi"
    );
    for m in enumerate_up_to(3)? {
        let (mean, se) = batch_mean_se(&batches, &m);
        println!(
            "{:<12} {mean:>10.5} {se:>8.5} {:>10.5}",
            m.encode(),
            pi_pmf(&m, &params)?
        );
    }

    let mut all = batches[0].clone();
    for b in &batches[1..] {
        all.merge(b);
    }
    let emp = restrict(&all.probabilities(), |m| m.size() <= 6);
    let exact = enumerate_up_to(6)?
        .into_iter()
        .map(|m| pi_pmf(&m, &params).map(|p| (m, p)))
        .collect::<allelic::Result<_>>()?;
    println!("\nTV to pi on s <= 6: {:.4}", tv_distance(&emp, &exact));
    Ok(())
}
