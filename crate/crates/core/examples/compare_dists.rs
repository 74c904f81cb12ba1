//! p_F(N, K) for the built-in fitness distributions next to the fat-tail value.
//!
//! ```bash
//! cargo run --release --example compare_dists
//! ```

use nk_lfm::estimate::compare_dists;

fn main() -> nk_lfm::Result<()> {
    for (n, k) in [(8, 2), (12, 3)] {
        let c = compare_dists(n, k, 400_000, 1)?;
        println!("N={n} K={k}  fat tail: {:.4e} ± {:.1e}", c.fat.p_hat, c.fat.stderr);
        for r in &c.rows {
            println!(
                "  {:>15}: {:.4e} ± {:.1e}{}",
                r.dist.name(),
                r.estimate.p_hat,
                r.estimate.stderr,
                if r.at_least_fat { "" } else { "  (below fat tail)" }
            );
        }
    }
    Ok(())
}
