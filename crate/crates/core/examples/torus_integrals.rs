//! The torus sets T(y), their measure, and the integrals f_r(y).
//!
//! ```bash
//! cargo run --release --example torus_integrals
//! ```

use nk_lfm::fattail::{
    eta, f_r_gap_mc, f_r_mc, torus_measure_exact, torus_measure_mc, torus_member, TorusPoint,
};

fn main() -> nk_lfm::Result<()> {
    let x = TorusPoint::new(vec![0.1, 0.35, 0.7])?;
    for y in [0.2, 0.5, 0.9] {
        let inside = torus_member(&x, y)?;
        let e = if inside { format!("{:.4}", eta(&x, y)?) } else { "-".into() };
        println!("x={:?} y={y}: in T(y) = {inside}, eta = {e}", x.coords);
    }

    println!("\n{:>2} {:>5} {:>12} {:>12} {:>12}", "r", "y", "measure", "MC", "se");
    for r in [3usize, 4] {
        for y in [0.1, 0.5, 1.0] {
            let m = torus_measure_mc(r, y, 400_000, 2)?;
            println!("{r:>2} {y:>5} {:>12.6} {:>12.6} {:>12.1e}", torus_measure_exact(r, y)?, m.p_hat, m.stderr);
        }
    }

    println!("\n{:>2} {:>5} {:>12} {:>12} {:>12}", "r", "y", "indicator", "gap", "y^(r-1)/(r-1)!");
    for r in [3usize, 4, 5] {
        for y in [0.05, 0.3, 0.7] {
            let a = f_r_mc(r, y, 400_000, 9)?;
            let b = f_r_gap_mc(r, y, 400_000, 9)?;
            let small = y.powi(r as i32 - 1) / (1..r).product::<usize>() as f64;
            println!("{r:>2} {y:>5} {:>12.5} {:>12.5} {small:>12.5}", a.p_hat, b.p_hat);
        }
    }
    Ok(())
}
