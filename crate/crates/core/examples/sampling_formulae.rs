//! Ewens and Pitman sampling formulae over all partitions of n.
//!
//! Usage: `cargo run --example sampling_formulae -- [n] [alpha] [theta]`

use allelic::formulae::{esf, psf};
use allelic::partitions::enumerate;
use allelic::ModelParams;

fn main() -> allelic::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let n = args.first().map_or(5, |&v| v as usize);
    let alpha = args.get(1).copied().unwrap_or(0.5);
    let theta = args.get(2).copied().unwrap_or(1.0);
    let params = ModelParams::new(alpha, theta, 0.0)?;

    println!(
        "{:<24} {:>14} {:>14}",
        "partition", "ESF(theta)", "PSF(alpha,theta)"
    );
    let (mut total_e, mut total_p) = (0.0, 0.0);
    for m in enumerate(n)? {
        let e = if theta > 0.0 {
            esf(n, theta, &m)?
        } else {
            f64::NAN
        };
        let p = psf(n, &params, &m)?;
        total_e += e;
        total_p += p;
        println!("{:<24} {e:>14.10} {p:>14.10}", m.encode());
    }
    println!("{:<24} {total_e:>14.10} {total_p:>14.10}", "sum");

    Ok(())
}
