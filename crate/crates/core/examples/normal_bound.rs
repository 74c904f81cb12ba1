//! The normal-case upper bound integral and where its integrand peaks.
//!
//! ```bash
//! cargo run --release --example normal_bound
//! ```

use nk_lfm::estimate::{conditional_mc, normal_saddle, normal_upper_bound};
use nk_lfm::{DistributionKind, ModelParams};

fn main() -> nk_lfm::Result<()> {
    println!("bound(2, 1) = {:.10}  (1/3 = {:.10})", normal_upper_bound(2, 1, 1e-12)?, 1.0 / 3.0);

    println!("\n{:>5} {:>4} {:>12} {:>12} {:>10} {:>8}", "N", "K", "bound", "p_hat", "se", "ratio");
    for k in [4usize, 8, 16, 32] {
        let n = 4 * k;
        let bound = normal_upper_bound(n, k, 1e-10)?;
        let e = conditional_mc(&ModelParams::new(n, k, DistributionKind::Normal)?, 200_000, 3)?;
        println!(
            "{n:>5} {k:>4} {bound:>12.4e} {:>12.4e} {:>10.2e} {:>8.2}",
            e.p_hat,
            e.stderr,
            bound / e.p_hat
        );
    }

    println!("\n{:>6} {:>5} {:>9} {:>9} {:>11}", "N", "K", "x_max", "x0", "log I_max");
    for k in [10usize, 100, 1000] {
        let r = normal_saddle(2 * k, k)?;
        println!("{:>6} {k:>5} {:>9.4} {:>9.4} {:>11.4}", 2 * k, r.x_max, r.x0, r.log_i_max);
    }
    Ok(())
}
