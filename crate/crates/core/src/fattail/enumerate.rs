//! Exact `p_fat(N, K)` by summing over covering sequences.
//!
//! The algorithm's output sequences partition the TRUE event, and the
//! probability of each is a product of reciprocal pool sizes that depends only
//! on the set of windows emitted so far. Two enumerators exploit this:
//!
//! - full: a dynamic program over subsets of starts (`N <= 12`), exact for all `r`;
//! - restricted: sequences of length at most `r_max <= 4` with `j_1 = 0` fixed
//!   (rotation symmetry, times `N`), counting the last pick by arc arithmetic and
//!   summing identical denominators in one exact pass. This reaches `N` in the
//!   thousands.
//!
//! Restricted runs report an upper bound on the uncounted mass from the
//! product-of-arcs continuation bound applied to every non-covering prefix of
//! length `r_max`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::cover::{continuation_bound, count_completions, missed_count_of, CoverSequence};
use crate::error::{NkError, Result};

pub const FULL_ENUMERATION_MAX_N: usize = 12;
pub const RESTRICTED_MAX_R: usize = 4;
pub const RESTRICTED_MAX_N: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnumerationMode {
    Full,
    Restricted,
}

/// Exact probability mass of the TRUE event split by witness length.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactEnumeration {
    pub n: usize,
    pub k: usize,
    pub r_max: Option<usize>,
    pub mode: EnumerationMode,
    /// Sum over all enumerated `r`.
    pub total: BigRational,
    /// `(r, P(H(r)))` for every `r` with a nonzero term.
    pub by_r: Vec<(usize, BigRational)>,
    /// Upper bound on the mass of witnesses longer than `r_max`; zero in full mode.
    pub remainder_bound: f64,
}

impl ExactEnumeration {
    pub fn total_f64(&self) -> f64 {
        ratio_to_f64(&self.total)
    }
}

/// Floating-point value of a rational whose numerator and denominator may overflow `f64`.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let num = r.numer();
    let den = r.denom();
    // scale both to about 60 significant bits before dividing
    let ns = num.bits().saturating_sub(60);
    let ds = den.bits().saturating_sub(60);
    let a = (num >> ns).to_f64().unwrap_or(f64::NAN);
    let b = (den >> ds).to_f64().unwrap_or(f64::NAN);
    a / b * 2f64.powi(ns as i32 - ds as i32)
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(NkError::invalid(format!("need 1 <= k < n, got n={n}, k={k}")));
    }
    Ok(())
}

/// Exact `p_fat(N, K)` (full mode, `r_max = None`) or the mass of witnesses of
/// length at most `r_max` with a remainder bound.
pub fn enumerate_exact(n: usize, k: usize, r_max: Option<usize>) -> Result<ExactEnumeration> {
    check_nk(n, k)?;
    match r_max {
        None if n <= FULL_ENUMERATION_MAX_N => Ok(subset_dp(n, k, None)),
        None => Err(NkError::infeasible(format!(
            "full enumeration needs n <= {FULL_ENUMERATION_MAX_N}; pass r_max for larger n"
        ))),
        Some(0) => Err(NkError::invalid("r_max must be at least 1")),
        Some(r) if n <= FULL_ENUMERATION_MAX_N => Ok(subset_dp(n, k, Some(r))),
        Some(r) if r <= RESTRICTED_MAX_R && n <= RESTRICTED_MAX_N => Ok(rotated(n, k, r)),
        Some(r) => Err(NkError::infeasible(format!(
            "restricted enumeration needs r_max <= {RESTRICTED_MAX_R} and n <= {RESTRICTED_MAX_N}, \
             got r_max={r}, n={n}"
        ))),
    }
}

fn mask_starts(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&b| mask >> b & 1 == 1).collect()
}

fn pool_size(n: usize, k: usize, picked: usize, missed: usize) -> BigInt {
    BigInt::from(n - picked + (k + 1) * missed)
}

/// Dynamic program over the set of emitted starts.
///
/// `reach[T]` is the probability that the first `|T|` picks are exactly the
/// set `T` (in some order) without failing or covering earlier.
fn subset_dp(n: usize, k: usize, r_max: Option<usize>) -> ExactEnumeration {
    let limit = r_max.unwrap_or(n);
    let size = 1usize << n;
    let mut reach: Vec<BigRational> = vec![BigRational::zero(); size];
    let mut covering = vec![false; size];
    let mut missed = vec![0usize; size];
    for mask in 0..size {
        let m = missed_count_of(&mask_starts(mask as u32, n), n, k);
        missed[mask] = m;
        covering[mask] = m == 0;
    }
    reach[0] = BigRational::one();
    let mut by_r = vec![BigRational::zero(); n + 1];
    let mut remainder_bound = 0.0;
    for mask in 0..size {
        if covering[mask] || reach[mask].is_zero() {
            continue;
        }
        let picked = mask.count_ones() as usize;
        if picked == limit {
            remainder_bound += ratio_to_f64(&reach[mask])
                * continuation_bound(&mask_starts(mask as u32, n), n, k);
            continue;
        }
        let step = &reach[mask] / pool_size(n, k, picked, missed[mask]);
        for b in 0..n {
            if mask >> b & 1 == 1 {
                continue;
            }
            let next = mask | 1 << b;
            if covering[next] {
                by_r[picked + 1] += &step;
            } else {
                reach[next] += &step;
            }
        }
    }
    let by_r: Vec<(usize, BigRational)> = by_r
        .into_iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .collect();
    ExactEnumeration {
        n,
        k,
        r_max,
        mode: if r_max.is_some() {
            EnumerationMode::Restricted
        } else {
            EnumerationMode::Full
        },
        total: by_r.iter().map(|(_, p)| p).sum(),
        by_r,
        remainder_bound,
    }
}

/// Multiplicities of each denominator profile `(D_1, ..., D_r)` for one `r`.
type Profiles = HashMap<Vec<u64>, u64>;

struct Walk {
    n: usize,
    k: usize,
    r_max: usize,
}

#[derive(Default)]
struct WalkResult {
    by_r: Vec<Profiles>,
    remainder: f64,
}

impl WalkResult {
    fn new(r_max: usize) -> Self {
        WalkResult {
            by_r: vec![Profiles::new(); r_max + 1],
            remainder: 0.0,
        }
    }

    fn merge(mut self, other: WalkResult) -> Self {
        for (mine, theirs) in self.by_r.iter_mut().zip(other.by_r) {
            for (key, c) in theirs {
                *mine.entry(key).or_insert(0) += c;
            }
        }
        self.remainder += other.remainder;
        self
    }
}

impl Walk {
    fn pool(&self, prefix: &[usize]) -> u64 {
        (self.n - prefix.len() + (self.k + 1) * missed_count_of(prefix, self.n, self.k)) as u64
    }

    /// Extends a non-covering `prefix`; `dens` holds the pool sizes seen
    /// before each of its picks.
    fn visit(&self, prefix: &mut Vec<usize>, dens: &mut Vec<u64>, out: &mut WalkResult) {
        let (n, k) = (self.n, self.k);
        let len = prefix.len();
        dens.push(self.pool(prefix));
        if len + 1 == self.r_max {
            let c = count_completions(prefix, n, k) as u64;
            if c > 0 {
                *out.by_r[len + 1].entry(dens.clone()).or_insert(0) += c;
            }
            let weight: f64 = dens.iter().map(|&d| 1.0 / d as f64).product();
            for j in 0..n {
                if prefix.contains(&j) {
                    continue;
                }
                prefix.push(j);
                if missed_count_of(prefix, n, k) > 0 {
                    out.remainder += weight * continuation_bound(prefix, n, k);
                }
                prefix.pop();
            }
        } else {
            for j in 0..n {
                if prefix.contains(&j) {
                    continue;
                }
                prefix.push(j);
                if missed_count_of(prefix, n, k) == 0 {
                    *out.by_r[len + 1].entry(dens.clone()).or_insert(0) += 1;
                } else {
                    self.visit(prefix, dens, out);
                }
                prefix.pop();
            }
        }
        dens.pop();
    }
}

/// `Σ count / Π_s D_s` over profiles, exactly.
///
/// Every level `s` shares the common multiple `L_s` of its denominators, so
/// the sum is a single integer numerator over `Π_s L_s`, accumulated by
/// grouping profiles on their leading denominators.
fn sum_profiles(profiles: &Profiles) -> BigRational {
    if profiles.is_empty() {
        return BigRational::zero();
    }
    let mut keys: Vec<(&Vec<u64>, u64)> = profiles.iter().map(|(k, &c)| (k, c)).collect();
    keys.sort_unstable();
    let depth = keys[0].0.len();
    let mut lcms = vec![BigInt::one(); depth];
    let mut cofactors: Vec<HashMap<u64, BigInt>> = vec![HashMap::new(); depth];
    for level in 0..depth {
        let mut distinct: Vec<u64> = keys.iter().map(|(key, _)| key[level]).collect();
        distinct.sort_unstable();
        distinct.dedup();
        let l = distinct
            .iter()
            .fold(BigInt::one(), |acc, &d| acc.lcm(&BigInt::from(d)));
        for d in distinct {
            cofactors[level].insert(d, &l / BigInt::from(d));
        }
        lcms[level] = l;
    }
    fn numerator(keys: &[(&Vec<u64>, u64)], level: usize, cof: &[HashMap<u64, BigInt>]) -> BigInt {
        if level == cof.len() {
            return keys.iter().map(|(_, c)| BigInt::from(*c)).sum();
        }
        let mut total = BigInt::zero();
        let mut start = 0;
        while start < keys.len() {
            let d = keys[start].0[level];
            let end = start + keys[start..].iter().take_while(|(key, _)| key[level] == d).count();
            total += numerator(&keys[start..end], level + 1, cof) * &cof[level][&d];
            start = end;
        }
        total
    }
    let num = numerator(&keys, 0, &cofactors);
    let den: BigInt = lcms.iter().product();
    BigRational::new(num, den)
}

/// Restricted enumeration with `j_1 = 0` fixed and the result multiplied by `N`.
pub(crate) fn rotated(n: usize, k: usize, r_max: usize) -> ExactEnumeration {
    let walk = Walk { n, k, r_max };
    let first = walk.pool(&[]);
    let mut result = WalkResult::new(r_max);
    if k + 1 >= n {
        // one window covers everything
        *result.by_r[1].entry(vec![first]).or_insert(0) += 1;
    } else if r_max == 1 {
        result.remainder = continuation_bound(&[0], n, k) / first as f64;
    } else if r_max == 2 {
        walk.visit(&mut vec![0], &mut vec![first], &mut result);
    } else {
        // split on j_2 so the work spreads over threads
        let dens = vec![first, walk.pool(&[0])];
        let partial = (1..n)
            .into_par_iter()
            .map(|j2| {
                let mut out = WalkResult::new(r_max);
                let mut prefix = vec![0, j2];
                if missed_count_of(&prefix, n, k) == 0 {
                    *out.by_r[2].entry(dens.clone()).or_insert(0) += 1;
                } else {
                    walk.visit(&mut prefix, &mut dens.clone(), &mut out);
                }
                out
            })
            .reduce(|| WalkResult::new(r_max), WalkResult::merge);
        result = result.merge(partial);
    }
    let nn = BigInt::from(n);
    let by_r: Vec<(usize, BigRational)> = result
        .by_r
        .iter()
        .enumerate()
        .map(|(r, prof)| (r, sum_profiles(prof) * BigRational::from_integer(nn.clone())))
        .filter(|(_, p)| !p.is_zero())
        .collect();
    ExactEnumeration {
        n,
        k,
        r_max: Some(r_max),
        mode: EnumerationMode::Restricted,
        total: by_r.iter().map(|(_, p)| p).sum(),
        by_r,
        remainder_bound: result.remainder * n as f64,
    }
}

/// Probability that the algorithm stops TRUE given that it has emitted `prefix`.
///
/// Exact, by dynamic programming over supersets of the prefix; `N <= 12`.
pub fn q_exact(prefix: &CoverSequence) -> Result<BigRational> {
    let (n, k) = (prefix.n, prefix.k);
    if n > FULL_ENUMERATION_MAX_N {
        return Err(NkError::infeasible(format!(
            "continuation probabilities need n <= {FULL_ENUMERATION_MAX_N}"
        )));
    }
    match prefix.first_covering_prefix() {
        Some(l) if l == prefix.len() => return Ok(BigRational::one()),
        Some(_) => {
            return Err(NkError::invalid(
                "prefix is not a possible output: an initial segment already covers",
            ))
        }
        None => {}
    }
    let start: u32 = prefix.indices.iter().fold(0, |m, &j| m | 1 << j);
    let size = 1usize << n;
    // q[T] for supersets T of start, filled from the largest sets down
    let mut q: Vec<Option<BigRational>> = vec![None; size];
    for mask in (0..size as u32).rev() {
        if mask & start != start {
            continue;
        }
        let starts = mask_starts(mask, n);
        let missed = missed_count_of(&starts, n, k);
        if missed == 0 {
            q[mask as usize] = Some(BigRational::one());
            continue;
        }
        let picked = starts.len();
        let mut acc = BigRational::zero();
        for b in 0..n {
            if mask >> b & 1 == 0 {
                acc += q[(mask | 1 << b) as usize].as_ref().expect("superset filled");
            }
        }
        q[mask as usize] = Some(acc / pool_size(n, k, picked, missed));
    }
    Ok(q[start as usize].take().expect("start filled"))
}

/// The simple continuation bound `1/M + 1/K`, `M` the count missed after the prefix.
pub fn q_simple_bound(prefix: &CoverSequence) -> f64 {
    let m = missed_count_of(&prefix.indices, prefix.n, prefix.k);
    if m == 0 {
        return 1.0;
    }
    1.0 / m as f64 + 1.0 / prefix.k as f64
}

/// The product-of-arcs continuation bound for a prefix.
pub fn q_arc_bound(prefix: &CoverSequence) -> f64 {
    continuation_bound(&prefix.indices, prefix.n, prefix.k)
}
