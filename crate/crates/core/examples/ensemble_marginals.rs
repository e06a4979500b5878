//! Replicate ensembles at alpha = 0 against the exact finite-time laws:
//! negative binomial item counts, the Poisson product for partitions and the
//! Ewens law on each size slice.

use std::collections::BTreeMap;

use allelic::cli::{tv_partitions, tv_sizes};
use allelic::formulae::{b_t, esf, poisson_product_prob};
use allelic::montecarlo::{run_ensemble, tv_distance, EngineKind, EnsembleConfig};
use allelic::partitions::enumerate;
use allelic::ModelParams;

fn main() -> allelic::Result<()> {
    let (theta, mu, t) = (1.0, 2.0, 5.0);
    let params = ModelParams::new(0.0, theta, mu)?;
    let cfg = EnsembleConfig::new(params, t, 100_000, 7, EngineKind::Multiplicity);
    let res = run_ensemble(&cfg)?;
    let b = b_t(mu, t)?;
    let parts = res.partitions.as_ref().expect("partition tallies");

    println!("b_t = {b:.6}");
    println!(
        "TV(S) = {:.4}",
        tv_sizes(&res.sizes.probabilities(), theta, b)?
    );
    println!(
        "TV(M | s <= 12) = {:.4}",
        tv_partitions(parts, |m| poisson_product_prob(m, theta, b))?
    );

    for n in 2..=5 {
        let slice: BTreeMap<_, _> = parts
            .weights()
            .iter()
            .filter(|(m, _)| m.size() == n)
            .map(|(m, w)| (m.clone(), *w))
            .collect();
        let count: f64 = slice.values().sum();
        let emp = slice.into_iter().map(|(m, w)| (m, w / count)).collect();
        let exact = enumerate(n)?
            .into_iter()
            .map(|m| esf(n, theta, &m).map(|p| (m, p)))
            .collect::<allelic::Result<_>>()?;
        println!(
            "slice s = {n}: {count:>6} samples, TV to Ewens = {:.4}",
            tv_distance(&emp, &exact)
        );
    }
    Ok(())
}
