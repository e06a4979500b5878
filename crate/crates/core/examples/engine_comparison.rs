//! The individual-level branching construction and the multiplicity-level
//! Gillespie engine produce the same law for (k, s).

use allelic::ctmc::AgentPopulation;
use allelic::montecarlo::{run_ensemble, tv_distance, EngineKind, EnsembleConfig};
use allelic::{AllelicPartition, ModelParams};

fn main() -> allelic::Result<()> {
    let params = ModelParams::new(0.5, 1.0, 2.0)?;

    let pop = AgentPopulation::from_partition(&AllelicPartition::from_family_sizes(&[1, 2])?, 0.0);
    println!("clock rates of a population with families of sizes 1 and 2:");
    for (e, r) in pop.event_rates(&params) {
        println!("  {e:?}: {r}");
    }

    let run = |engine| run_ensemble(&EnsembleConfig::new(params, 3.0, 50_000, 11, engine));
    let a = run(EngineKind::Multiplicity)?;
    let b = run(EngineKind::Branching)?;
    let (ja, jb) = (a.joint_ks().expect("joint"), b.joint_ks().expect("joint"));
    println!("\nE s: {:.4} vs {:.4}", a.sizes.mean(), b.sizes.mean());
    let (ka, kb) = (a.groups.expect("k"), b.groups.expect("k"));
    println!("E k: {:.4} vs {:.4}", ka.mean(), kb.mean());
    println!(
        "TV over (k, s): {:.4}",
        tv_distance(&ja.probabilities(), &jb.probabilities())
    );
    Ok(())
}
