//! Simulating the sliced K = 1 chain and comparing with the recursion.
//!
//! ```bash
//! cargo run --release --example k1_chain_mc
//! ```

use nk_lfm::fattail::enumerate_exact;
use nk_lfm::k1exact::{mc_h_star, recursion_exact};

fn main() -> nk_lfm::Result<()> {
    let p = recursion_exact(10)?.to_f64();
    println!("{:>3} {:>12} {:>12} {:>10} {:>12}", "N", "p_N", "MC", "se", "p_fat(N+1,1)");
    for n in 1..=10usize {
        let e = mc_h_star(n, 1_000_000, n as u64)?;
        let cyc = enumerate_exact(n + 1, 1, None)?.total_f64();
        println!("{n:>3} {:>12.6e} {:>12.6e} {:>10.1e} {cyc:>12.6e}", p[n], e.p_hat, e.stderr);
    }
    Ok(())
}
