//! p_fat(N, K) is rank-based: the same uniforms pushed through any quantile
//! function give the same estimate.
//!
//! ```bash
//! cargo run --release --example fat_tail_mc
//! ```

use nk_lfm::fattail::{enumerate_exact, mc_p_fat_with};
use nk_lfm::DistributionKind;

fn main() -> nk_lfm::Result<()> {
    let (n, k) = (9, 2);
    let exact = enumerate_exact(n, k, None)?.total_f64();
    println!("exact p_fat({n}, {k}) = {exact:.6e}");
    for dist in DistributionKind::ALL {
        let e = mc_p_fat_with(n, k, 500_000, 42, dist)?;
        println!("{:>15}: {:.6e} ± {:.1e}", dist.name(), e.p_hat, e.stderr);
    }
    Ok(())
}
