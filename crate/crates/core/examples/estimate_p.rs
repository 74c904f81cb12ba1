//! Direct and conditional Monte Carlo estimates of p(N, K).
//!
//! ```bash
//! cargo run --release --example estimate_p
//! ```

use nk_lfm::estimate::{conditional_mc, direct_mc};
use nk_lfm::{DistributionKind, ModelParams};

fn main() -> nk_lfm::Result<()> {
    let samples = 50_000;
    println!("{:>4} {:>3} {:>15} {:>12} {:>12} {:>12} {:>12}", "N", "K", "dist", "direct", "se", "conditional", "se");
    for (n, k) in [(8, 2), (16, 4), (32, 8)] {
        for dist in DistributionKind::ALL {
            let p = ModelParams::new(n, k, dist)?;
            let d = direct_mc(&p, samples, 7)?;
            let c = conditional_mc(&p, samples, 7)?;
            println!(
                "{n:>4} {k:>3} {:>15} {:>12.4e} {:>12.2e} {:>12.4e} {:>12.2e}",
                dist.name(),
                d.p_hat,
                d.stderr,
                c.p_hat,
                c.stderr
            );
        }
    }

    // K = N - 1: every window sees the whole genome, so p = 1/(N+1)
    let p = ModelParams::new(6, 5, DistributionKind::Exponential)?;
    let c = conditional_mc(&p, samples, 1)?;
    println!("\nN=6 K=5: {:.5} (exact {:.5})", c.p_hat, 1.0 / 7.0);
    Ok(())
}
