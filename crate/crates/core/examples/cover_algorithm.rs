//! One run of the greedy cover check, traced, then a bulk self-test
//! against the event definition.
//!
//! ```bash
//! cargo run --release --example cover_algorithm
//! ```

use nk_lfm::fattail::{algorithm_selftest, check_direct, run_cover_algorithm, sequence_probability};
use nk_lfm::model::sample_neighborhood;
use nk_lfm::{DistributionKind, ModelParams};

fn main() -> nk_lfm::Result<()> {
    let p = ModelParams::new(8, 2, DistributionKind::Uniform01)?;
    let mut shown = 0;
    for seed in 0..5000 {
        let s = sample_neighborhood(&p, seed);
        let out = run_cover_algorithm(&s);
        if !out.verdict {
            continue;
        }
        println!("seed {seed}: TRUE (direct check agrees: {})", check_direct(&s));
        println!("  picks {:?}", out.sequence.indices);
        for stage in 1..=out.sequence.len() + 1 {
            println!("  missed before pick {stage}: {:?}", out.sequence.missed(stage)?);
        }
        println!("  probability of this witness: {}", sequence_probability(&out.sequence));
        shown += 1;
        if shown == 2 {
            break;
        }
    }

    for (n, k) in [(8, 2), (12, 3), (20, 4)] {
        let r = algorithm_selftest(n, k, 100_000, 11)?;
        println!(
            "N={n:>2} K={k}: {} samples, {} TRUE, {} mismatches, {} bad witnesses",
            r.samples, r.true_count, r.mismatches, r.bad_witnesses
        );
    }
    Ok(())
}
