//! Probability that fusing two beliefs lands closer to the truth than
//! each input, for one (variance ratio, bias ratio) pair.
//!
//! `cargo run --release --example pofb_case -- [r] [p]`

use o2bench::pofb::{pofb, FusionCase, FusionRule, PofbTarget};
use o2bench::prob::RngStream;

fn main() -> o2bench::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<f64>());
    let r = args.next().transpose().ok().flatten().unwrap_or(0.25);
    let p = args.next().transpose().ok().flatten().unwrap_or(0.0);

    for rule in [FusionRule::Kf, FusionRule::particle(100_000)] {
        let case = FusionCase::from_ratios(r, p, 0.0, rule)?;
        let (m, v) = case.fused_kf();
        println!("{rule:?}: x ~ N(0, 1), y ~ N({p}, {r}), Kalman fusion N({m:.4}, {v:.4})");
        for target in [PofbTarget::X, PofbTarget::Y, PofbTarget::Min] {
            let mut rng = RngStream::new(1, target as u64);
            let est = pofb(&case, target, 100_000, &mut rng)?;
            println!("  vs {target:?}: {:.4} ± {:.4}", est.pofb, est.stderr);
        }
    }
    Ok(())
}
