use nk_lfm::estimate::{conditional_mc, direct_mc};
use nk_lfm::fattail::enumerate_exact;
use nk_lfm::k1exact::recursion_exact;
use nk_lfm::model::{count_lfm, FullLandscape};
use nk_lfm::{DistributionKind, ModelParams};

#[test]
fn direct_and_conditional_agree_for_every_distribution() {
    for dist in DistributionKind::ALL {
        let p = ModelParams::new(8, 2, dist).unwrap();
        let d = direct_mc(&p, 200_000, 1).unwrap();
        let c = conditional_mc(&p, 200_000, 2).unwrap();
        assert!(d.agrees_with(&c, 4.0), "{dist}: {d:?} vs {c:?}");
    }
}

#[test]
fn exchangeable_case_for_every_distribution() {
    for dist in DistributionKind::ALL {
        let c = conditional_mc(&ModelParams::new(5, 4, dist).unwrap(), 200_000, 3).unwrap();
        assert!(c.covers(1.0 / 6.0, 4.0), "{dist}: {c:?}");
    }
}

#[test]
fn landscape_fraction_of_local_maxima_matches_p() {
    let p = ModelParams::new(10, 2, DistributionKind::Uniform01).unwrap();
    let reps = 200u64;
    let total: u64 = (0..reps).map(|s| count_lfm(&FullLandscape::sample(&p, s).unwrap())).sum();
    let frac = total as f64 / (reps as f64 * 1024.0);
    let c = conditional_mc(&p, 400_000, 4).unwrap();
    // counts within a landscape are dependent; allow a wide band
    assert!((frac / c.p_hat - 1.0).abs() < 0.15, "{frac} vs {}", c.p_hat);
}

#[test]
fn fat_tail_is_a_lower_envelope_at_k1() {
    let p = recursion_exact(9).unwrap().to_f64();
    for n in 2..=10usize {
        let fat = enumerate_exact(n, 1, None).unwrap().total_f64();
        // slicing the cycle removes one row
        assert!(fat <= p[n - 1]);
    }
}
