//! One Gillespie trajectory of the partition-valued chain, queried at fixed times
//! and exported as CSV.

use allelic::ctmc::{self, TrajectoryMeta};
use allelic::montecarlo::replicate_rng;
use allelic::ModelParams;

fn main() -> allelic::Result<()> {
    let params = ModelParams::new(0.4, 1.0, 1.5)?;
    let seed = 2024;
    let traj = ctmc::simulate(&params, 10.0, &mut replicate_rng(seed, 0))?;
    println!("{} jumps in [0, {}]", traj.len(), traj.horizon());
    for t in [0.0, 1.0, 2.5, 5.0, 10.0] {
        let m = traj.state_at(t)?;
        println!(
            "  M({t:>4}) = {:<20} s = {}, k = {}",
            m.encode(),
            m.size(),
            m.num_groups()
        );
    }

    println!("\nrates out of M(5):");
    for (e, r) in ctmc::rates(&traj.state_at(5.0)?, &params)? {
        println!("  {e:?}: {r}");
    }

    let meta = TrajectoryMeta {
        params: &params,
        seed,
        engine: "multiplicity",
    };
    let mut out = Vec::new();
    traj.write_csv(&mut out, &meta)?;
    let text = String::from_utf8(out).expect("utf8");
    println!("\nCSV head:");
    for line in text.lines().take(8) {
        println!("  {line}");
    }
    Ok(())
}
