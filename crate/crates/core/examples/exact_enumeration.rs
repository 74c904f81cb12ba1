//! Exact p_fat(N, K) as a rational, split by the length of the covering sequence.
//!
//! ```bash
//! cargo run --release --example exact_enumeration
//! ```

use nk_lfm::fattail::{enumerate_exact, mc_p_fat};

fn main() -> nk_lfm::Result<()> {
    for (n, k) in [(4, 1), (5, 1), (6, 2), (10, 3)] {
        let e = enumerate_exact(n, k, None)?;
        println!("N={n} K={k}: p_fat = {} = {:.6e}", e.total, e.total_f64());
        for (r, v) in &e.by_r {
            println!("    r={r}: {v}");
        }
        let mc = mc_p_fat(n, k, 1_000_000, 5)?;
        println!("    MC {:.6e} ± {:.1e}", mc.p_hat, mc.stderr);
    }

    // large N: only short sequences, plus a bound on the rest
    for (n, k) in [(40, 10), (120, 50), (503, 200)] {
        let e = enumerate_exact(n, k, Some(4))?;
        println!(
            "N={n} K={k}: r<=4 mass {:.6e}, longer sequences at most {:.3e}",
            e.total_f64(),
            e.remainder_bound
        );
    }
    Ok(())
}
