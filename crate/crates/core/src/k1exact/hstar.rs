use crate::error::{NkError, Result};
use crate::mc::{open01, run_chunked, Estimate, Method};

/// Monte Carlo of the sliced `K = 1` chain: base values `Y_0..Y_N`, two
/// mutants per row `j = 1..N`, and the event that every row satisfies
/// `Y_{j-1} ∨ Y_j >= M_{j,0} ∨ M_{j,1}`. Its probability is `p_N`.
pub fn mc_h_star(n_rows: usize, samples: u64, seed: u64) -> Result<Estimate> {
    if n_rows == 0 {
        return Err(NkError::invalid("the chain needs at least one row"));
    }
    if samples == 0 {
        return Err(NkError::invalid("number of samples must be at least 1"));
    }
    let m = run_chunked(
        samples,
        seed,
        || vec![0.0f64; n_rows + 1],
        |rng, y| {
            for v in y.iter_mut() {
                *v = open01(rng);
            }
            // always draw every mutant so the stream does not depend on the verdict
            let mut ok = true;
            for j in 1..=n_rows {
                let m = open01(rng).max(open01(rng));
                ok &= y[j - 1].max(y[j]) >= m;
            }
            if ok {
                1.0
            } else {
                0.0
            }
        },
    );
    Ok(Estimate::from_moments(&m, seed, Method::HStar))
}
