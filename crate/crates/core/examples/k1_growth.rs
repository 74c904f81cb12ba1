//! The K = 1 chain: exact recursion, its growth rate, and the Bessel root
//! that gives the same constant.
//!
//! ```bash
//! cargo run --release --example k1_growth
//! ```

use nk_lfm::k1exact::{
    bessel_modified, den, find_z0, growth_rate, recursion_exact, recursion_float, riccati_residual,
    BesselKind,
};

fn main() -> nk_lfm::Result<()> {
    let exact = recursion_exact(8)?;
    for (n, p) in exact.values.iter().enumerate() {
        println!("p_{n} = {p}");
    }
    let r = riccati_residual(&recursion_exact(50)?);
    println!("Riccati residual through order {}: {}", r.orders_checked - 1, r.max_abs_residual);

    for n_max in [100, 500, 2000, 10_000] {
        let g = growth_rate(&recursion_float(n_max)?)?;
        println!(
            "n={n_max:>6}: p_(n-1)/p_n = {:.12}, rate {:.12}, log p_n / n = {:.6}",
            g.raw_z0, g.rate, g.log_p_over_n
        );
    }

    let z = find_z0(1e-10)?;
    println!("\nroot of den: z0 = {:.12}, -ln z0 = {:.12}", z.z0, z.growth_rate);
    for zz in [1.0, 1.5, 1.8, 1.81, 2.0] {
        println!("  den({zz}) = {:+.6e}", den(zz));
    }
    for nu in [1.0 / 3.0, 2.0 / 3.0] {
        let i = bessel_modified(BesselKind::I, nu, 1.0)?.value;
        let k = bessel_modified(BesselKind::K, nu, 1.0)?.value;
        println!("  I_{nu:.4}(1) = {i:.12}  K_{nu:.4}(1) = {k:.12}");
    }
    Ok(())
}
