//! Enumerating allelic partitions, applying transition events and the text encoding.

use allelic::partitions::enumerate;
use allelic::{AllelicPartition, TransitionEvent};

fn main() -> allelic::Result<()> {
    for n in 0..=6 {
        let all = enumerate(n)?;
        let shown: Vec<String> = all.iter().map(|m| m.encode()).collect();
        println!("n = {n}: {} partitions  [{}]", all.len(), shown.join(", "));
    }

    let m: AllelicPartition = "1^1 2^1".parse()?;
    println!("\nm = {m}: s = {}, k = {}", m.size(), m.num_groups());
    for e in [
        TransitionEvent::NewFamily,
        TransitionEvent::GrowthAt(2),
        TransitionEvent::DeathAt(1),
        TransitionEvent::DeathAt(3),
    ] {
        match m.apply_event(e) {
            Ok(next) => println!("  {e:?} -> {next}"),
            Err(err) => println!("  {e:?} -> {err}"),
        }
    }

    let big = AllelicPartition::from_family_sizes(&[1, 1, 4, 1000])?;
    println!(
        "\nsparse storage: {big} (s = {}, support = {})",
        big.size(),
        big.support_len()
    );
    Ok(())
}
