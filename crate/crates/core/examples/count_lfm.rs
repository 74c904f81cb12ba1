//! Counting local maxima of full landscapes; the expected fraction of
//! genomes that are local maxima is p(N, K).
//!
//! ```bash
//! cargo run --release --example count_lfm
//! ```

use nk_lfm::estimate::conditional_mc;
use nk_lfm::model::{count_lfm, FullLandscape};
use nk_lfm::{DistributionKind, ModelParams};

fn main() -> nk_lfm::Result<()> {
    let (n, k) = (12, 3);
    for dist in [DistributionKind::Normal, DistributionKind::Cauchy] {
        let p = ModelParams::new(n, k, dist)?;
        let reps = 40;
        let total: u64 = (0..reps)
            .map(|s| FullLandscape::sample(&p, s).map(|l| count_lfm(&l)))
            .sum::<nk_lfm::Result<u64>>()?;
        let frac = total as f64 / (reps as f64 * (1u64 << n) as f64);
        let e = conditional_mc(&p, 200_000, 4)?;
        println!(
            "{:>8}: mean fraction of local maxima {frac:.4e}, p(N,K) estimate {:.4e}",
            dist.name(),
            e.p_hat
        );
    }
    Ok(())
}
