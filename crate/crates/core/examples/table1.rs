//! Large-K predictions of p_fat(N, K) against exact short-sequence sums.
//!
//! ```bash
//! cargo run --release --example table1
//! ```

use nk_lfm::fattail::table1::Table1Row;
use nk_lfm::fattail::{enumerate_exact, table1_predict, Table1Options};

fn main() -> nk_lfm::Result<()> {
    let opts = Table1Options::default();
    let k = 200usize;
    println!("{:>5} {:>8} {:>12} {:>12} {:>12}", "N", "row", "prediction", "r<=4 exact", "tail bound");
    for n in [302, 380, 402, 503] {
        let p = table1_predict(n, k, &opts)?;
        let row = match p.row {
            Table1Row::TwoWindow { j, .. } => format!("j={j}"),
            Table1Row::Torus { r, .. } => format!("r={r}"),
        };
        let e = enumerate_exact(n, k, Some(4))?;
        println!(
            "{n:>5} {row:>8} {:>12.4e} {:>12.4e} {:>12.2e}",
            p.value,
            e.total_f64(),
            e.remainder_bound
        );
    }
    Ok(())
}
