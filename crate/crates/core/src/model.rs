//! The NK model: random fitness tables, the all-zero genome's neighborhood,
//! neighbor-dominance events and CDFs of sums of fitness picks.
//!
//! Indices are 0-based throughout: loci `0..n`, and `y_mut(j, i)` is the
//! fitness of the length-`k+1` substring that starts at locus `j - i` and
//! carries a single 1 at locus `j`. All index arithmetic is modulo `n`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use serde::Serialize;
use libm::erfc;
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::{gamma_lr, gamma_ur};

use crate::error::{NkError, Result};
use crate::mc::{chunk_rng, open01};

/// Fitness distribution `F` of the individual table entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    /// Standard normal.
    Normal,
    /// Uniform on (0, 1).
    Uniform01,
    /// Exponential with rate 1.
    Exponential,
    /// Negative of a rate-1 exponential, supported on (-inf, 0).
    NegExponential,
    /// Standard symmetric Cauchy.
    Cauchy,
}

impl DistributionKind {
    pub const ALL: [DistributionKind; 5] = [
        DistributionKind::Normal,
        DistributionKind::Uniform01,
        DistributionKind::Exponential,
        DistributionKind::NegExponential,
        DistributionKind::Cauchy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DistributionKind::Normal => "normal",
            DistributionKind::Uniform01 => "uniform01",
            DistributionKind::Exponential => "exponential",
            DistributionKind::NegExponential => "negexponential",
            DistributionKind::Cauchy => "cauchy",
        }
    }

    /// Quantile function. Strictly increasing on (0, 1), so every distribution
    /// is a monotone transform of the same uniform stream.
    #[inline]
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            DistributionKind::Normal => -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u),
            DistributionKind::Uniform01 => u,
            DistributionKind::Exponential => -(-u).ln_1p(),
            DistributionKind::NegExponential => u.ln(),
            DistributionKind::Cauchy => (std::f64::consts::PI * (u - 0.5)).tan(),
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(open01(rng))
    }
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistributionKind {
    type Err = NkError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(DistributionKind::Normal),
            "uniform01" | "uniform" => Ok(DistributionKind::Uniform01),
            "exponential" | "exp" => Ok(DistributionKind::Exponential),
            "negexponential" | "negexp" => Ok(DistributionKind::NegExponential),
            "cauchy" => Ok(DistributionKind::Cauchy),
            other => Err(NkError::invalid(format!("unknown distribution `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ModelParams {
    pub n: usize,
    pub k: usize,
    pub dist: DistributionKind,
}

impl ModelParams {
    /// Requires `1 <= k <= n - 1`.
    pub fn new(n: usize, k: usize, dist: DistributionKind) -> Result<Self> {
        if k == 0 {
            return Err(NkError::invalid("k must be at least 1"));
        }
        if k >= n {
            return Err(NkError::invalid(format!("need k < n, got n={n}, k={k}")));
        }
        Ok(ModelParams { n, k, dist })
    }

    /// `k = n - 1`: every window spans the whole genome and the N+1 relevant
    /// sums are exchangeable, so `p = 1/(n+1)` for any continuous `F`.
    pub fn is_exchangeable_case(&self) -> bool {
        self.k + 1 == self.n
    }

    pub fn window(&self) -> usize {
        self.k + 1
    }
}

/// Returns true if any two values are equal.
fn has_ties(values: &[f64], scratch: &mut Vec<f64>) -> bool {
    scratch.clear();
    scratch.extend_from_slice(values);
    scratch.sort_unstable_by(f64::total_cmp);
    scratch.windows(2).any(|w| w[0] == w[1])
}

/// The fitness values that decide whether the all-zero genome is a local maximum.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborhoodSample {
    n: usize,
    k: usize,
    y: Vec<f64>,
    y_mut: Vec<f64>,
}

impl NeighborhoodSample {
    /// Builds a sample from explicit values; `y_mut` is row-major `n x (k+1)`.
    pub fn from_values(n: usize, k: usize, y: Vec<f64>, y_mut: Vec<f64>) -> Result<Self> {
        if y.len() != n || y_mut.len() != n * (k + 1) {
            return Err(NkError::invalid(format!(
                "expected {} base and {} mutant values, got {} and {}",
                n,
                n * (k + 1),
                y.len(),
                y_mut.len()
            )));
        }
        if k == 0 || k >= n {
            return Err(NkError::invalid(format!("need 1 <= k < n, got n={n}, k={k}")));
        }
        Ok(NeighborhoodSample { n, k, y, y_mut })
    }

    pub(crate) fn zeroed(n: usize, k: usize) -> Self {
        NeighborhoodSample {
            n,
            k,
            y: vec![0.0; n],
            y_mut: vec![0.0; n * (k + 1)],
        }
    }

    /// Redraws every value in place, resampling the whole set on an exact tie.
    pub fn redraw<R: Rng + ?Sized>(
        &mut self,
        dist: DistributionKind,
        rng: &mut R,
        scratch: &mut Vec<f64>,
    ) {
        loop {
            self.y.iter_mut().for_each(|v| *v = dist.sample(rng));
            self.y_mut.iter_mut().for_each(|v| *v = dist.sample(rng));
            scratch.clear();
            scratch.extend_from_slice(&self.y);
            scratch.extend_from_slice(&self.y_mut);
            scratch.sort_unstable_by(f64::total_cmp);
            if !scratch.windows(2).any(|w| w[0] == w[1]) {
                return;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn y_mut_row(&self, j: usize) -> &[f64] {
        let w = self.k + 1;
        &self.y_mut[j * w..(j + 1) * w]
    }

    #[inline]
    pub fn y_mut(&self, j: usize, i: usize) -> f64 {
        self.y_mut[j * (self.k + 1) + i]
    }

    /// Indices `j - k, ..., j` (mod n) of the base values entering window event `j`.
    pub fn window_indices(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.n;
        (0..=self.k).map(move |d| (j + n - (d % n)) % n)
    }

    /// Applies `f` to every value; used to check order and translation invariances.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        NeighborhoodSample {
            n: self.n,
            k: self.k,
            y: self.y.iter().map(|&v| f(v)).collect(),
            y_mut: self.y_mut.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Draws the `n + n(k+1)` i.i.d. values for the all-zero genome's neighborhood.
pub fn sample_neighborhood(params: &ModelParams, seed: u64) -> NeighborhoodSample {
    let mut rng = chunk_rng(seed, 0);
    let mut s = NeighborhoodSample::zeroed(params.n, params.k);
    let mut scratch = Vec::new();
    s.redraw(params.dist, &mut rng, &mut scratch);
    s
}

/// `H_j`: the zero genome beats the single-mutant `e_j`.
pub fn h_event(sample: &NeighborhoodSample, j: usize) -> bool {
    let zero: f64 = sample.window_indices(j).map(|i| sample.y[i]).sum();
    let mutant: f64 = sample.y_mut_row(j).iter().sum();
    zero >= mutant
}

/// `H = ∩_j H_j`: the zero genome is a local fitness maximum.
pub fn zero_is_lfm(sample: &NeighborhoodSample) -> bool {
    (0..sample.n).all(|j| h_event(sample, j))
}

/// Same as [`zero_is_lfm`] in O(n k) with a sliding window sum.
pub(crate) fn zero_is_lfm_fast(sample: &NeighborhoodSample) -> bool {
    let n = sample.n;
    let k = sample.k;
    // window ending at 0 covers n-k..n-1 and 0
    let mut zero: f64 = (0..=k).map(|d| sample.y[(n - d % n) % n]).sum();
    for j in 0..n {
        if j > 0 {
            zero += sample.y[j] - sample.y[(j + n - k - 1) % n];
        }
        let mutant: f64 = sample.y_mut_row(j).iter().sum();
        if zero < mutant {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Full landscapes

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Genome {
    pub bits: Vec<bool>,
}

impl Genome {
    pub fn zeros(n: usize) -> Self {
        Genome { bits: vec![false; n] }
    }

    /// Genome whose locus `i` is bit `i` of `mask`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Genome {
            bits: (0..n).map(|i| (mask >> i) & 1 == 1).collect(),
        }
    }

    /// The single-mutant `e_j`.
    pub fn unit(n: usize, j: usize) -> Self {
        let mut g = Genome::zeros(n);
        g.bits[j] = true;
        g
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

pub const MAX_LANDSCAPE_N: usize = 24;
pub const MAX_LANDSCAPE_K: usize = 16;

/// The complete `n x 2^(k+1)` fitness table.
///
/// Entry `(j, s)` is the fitness of the substring starting at locus `j` whose
/// `i`-th allele (locus `j + i`) is bit `i` of `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct FullLandscape {
    n: usize,
    k: usize,
    table: Vec<f64>,
}

impl FullLandscape {
    pub fn from_table(n: usize, k: usize, table: Vec<f64>) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(NkError::invalid(format!("need 1 <= k < n, got n={n}, k={k}")));
        }
        if n > MAX_LANDSCAPE_N || k > MAX_LANDSCAPE_K {
            return Err(NkError::infeasible(format!(
                "full landscapes need n <= {MAX_LANDSCAPE_N} and k <= {MAX_LANDSCAPE_K}"
            )));
        }
        if table.len() != n << (k + 1) {
            return Err(NkError::invalid(format!(
                "table must have {} entries, got {}",
                n << (k + 1),
                table.len()
            )));
        }
        Ok(FullLandscape { n, k, table })
    }

    /// Draws a table of i.i.d. entries, resampling on exact ties.
    pub fn sample(params: &ModelParams, seed: u64) -> Result<Self> {
        let (n, k) = (params.n, params.k);
        if n > MAX_LANDSCAPE_N || k > MAX_LANDSCAPE_K {
            return Err(NkError::infeasible(format!(
                "full landscapes need n <= {MAX_LANDSCAPE_N} and k <= {MAX_LANDSCAPE_K}"
            )));
        }
        let mut rng = chunk_rng(seed, 0);
        let mut table = vec![0.0; n << (k + 1)];
        let mut scratch = Vec::new();
        loop {
            table.iter_mut().for_each(|v| *v = params.dist.sample(&mut rng));
            if !has_ties(&table, &mut scratch) {
                break;
            }
        }
        Self::from_table(n, k, table)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn entry(&self, j: usize, substring: usize) -> f64 {
        self.table[(j << (self.k + 1)) + substring]
    }

    /// The neighborhood of the all-zero genome embedded in this table.
    pub fn zero_neighborhood(&self) -> NeighborhoodSample {
        let (n, k) = (self.n, self.k);
        let y = (0..n).map(|j| self.entry(j, 0)).collect();
        let mut y_mut = Vec::with_capacity(n * (k + 1));
        for j in 0..n {
            for i in 0..=k {
                y_mut.push(self.entry((j + n - i % n) % n, 1 << i));
            }
        }
        NeighborhoodSample { n, k, y, y_mut }
    }

    fn fitness_mask(&self, mask: u64) -> f64 {
        let n = self.n;
        let w = self.k + 1;
        let window_mask = (1u64 << w) - 1;
        // doubled genome so that cyclic windows become plain shifts
        let doubled = mask | (mask << n);
        (0..n)
            .map(|j| self.entry(j, ((doubled >> j) & window_mask) as usize))
            .sum()
    }
}

/// Unnormalized fitness: the sum over loci of the fitness of the window starting there.
pub fn genome_fitness(landscape: &FullLandscape, g: &Genome) -> Result<f64> {
    if g.len() != landscape.n {
        return Err(NkError::invalid(format!(
            "genome has length {}, landscape has n={}",
            g.len(),
            landscape.n
        )));
    }
    let mask = g
        .bits
        .iter()
        .enumerate()
        .fold(0u64, |m, (i, &b)| m | ((b as u64) << i));
    Ok(landscape.fitness_mask(mask))
}

/// Number of genomes strictly fitter than all `n` single-flip neighbors.
pub fn count_lfm(landscape: &FullLandscape) -> u64 {
    let n = landscape.n;
    let fit: Vec<f64> = (0..1u64 << n).map(|m| landscape.fitness_mask(m)).collect();
    fit.iter()
        .enumerate()
        .filter(|&(g, &f)| (0..n).all(|b| f > fit[g ^ (1 << b)]))
        .count() as u64
}

// ---------------------------------------------------------------------------
// CDFs of sums of i.i.d. picks

/// Largest number of summands for which the alternating Irwin–Hall formula is used.
pub const IRWIN_HALL_CLOSED_FORM_MAX: usize = 25;
const GRID_PER_UNIT: usize = 2048;

/// Irwin–Hall CDF by the alternating closed form, reflected so that `s <= m/2`.
fn irwin_hall_closed(m: usize, s: f64) -> f64 {
    let mf = m as f64;
    if s <= 0.0 {
        return 0.0;
    }
    if s >= mf {
        return 1.0;
    }
    if s > mf / 2.0 {
        return 1.0 - irwin_hall_closed(m, mf - s);
    }
    let mut fact = 1.0;
    for i in 2..=m {
        fact *= i as f64;
    }
    let mut binom = 1.0;
    let mut acc = 0.0;
    let mut k = 0usize;
    while (k as f64) < s && k <= m {
        let term = binom * (s - k as f64).powi(m as i32);
        if k % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
        binom = binom * (m - k) as f64 / (k + 1) as f64;
        k += 1;
    }
    (acc / fact).clamp(0.0, 1.0)
}

fn irwin_hall_closed_density(m: usize, s: f64) -> f64 {
    if s <= 0.0 || s >= m as f64 {
        return 0.0;
    }
    let mf = m as f64;
    let s = if s > mf / 2.0 { mf - s } else { s };
    let mut fact = 1.0;
    for i in 2..m {
        fact *= i as f64;
    }
    let mut binom = 1.0;
    let mut acc = 0.0;
    let mut k = 0usize;
    while (k as f64) < s && k <= m {
        let term = binom * (s - k as f64).powi(m as i32 - 1);
        if k % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
        binom = binom * (m - k) as f64 / (k + 1) as f64;
        k += 1;
    }
    (acc / fact).max(0.0)
}

/// Irwin–Hall CDF tabulated on a uniform grid, built by repeated convolution
/// with the uniform density: `f_m(x) = F_{m-1}(x) - F_{m-1}(x - 1)`.
#[derive(Debug)]
struct IrwinHallGrid {
    m: usize,
    cdf: Vec<f64>,
    density: Vec<f64>,
}

impl IrwinHallGrid {
    fn build(m: usize) -> Self {
        let g = GRID_PER_UNIT;
        let h = 1.0 / g as f64;
        let base = IRWIN_HALL_CLOSED_FORM_MAX;
        let mut cdf: Vec<f64> = (0..=base * g)
            .map(|i| irwin_hall_closed(base, i as f64 * h))
            .collect();
        let mut density: Vec<f64> = (0..=base * g)
            .map(|i| irwin_hall_closed_density(base, i as f64 * h))
            .collect();
        for order in base + 1..=m {
            let len = order * g + 1;
            let prev = |i: isize| -> f64 {
                if i < 0 {
                    0.0
                } else if (i as usize) < cdf.len() {
                    cdf[i as usize]
                } else {
                    1.0
                }
            };
            let f: Vec<f64> = (0..len as isize)
                .map(|i| prev(i) - prev(i - g as isize))
                .collect();
            let at = |i: isize| -> f64 {
                if i < 0 || i >= len as isize {
                    0.0
                } else {
                    f[i as usize]
                }
            };
            let mut next = vec![0.0; len];
            for i in 0..len - 1 {
                let i = i as isize;
                // cubic-interpolation panel rule, fourth order
                let panel =
                    h / 24.0 * (-at(i - 1) + 13.0 * at(i) + 13.0 * at(i + 1) - at(i + 2));
                next[i as usize + 1] = next[i as usize] + panel;
            }
            let total = next[len - 1];
            next.iter_mut().for_each(|v| *v = (*v / total).clamp(0.0, 1.0));
            cdf = next;
            density = f;
        }
        IrwinHallGrid { m, cdf, density }
    }

    fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= self.m as f64 {
            return 1.0;
        }
        let g = GRID_PER_UNIT as f64;
        let h = 1.0 / g;
        let pos = s * g;
        let i = (pos.floor() as usize).min(self.cdf.len() - 2);
        let t = pos - i as f64;
        // cubic Hermite with the tabulated density as slope
        let (p0, p1) = (self.cdf[i], self.cdf[i + 1]);
        let (m0, m1) = (self.density[i] * h, self.density[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * p0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * p1
            + (t3 - t2) * m1;
        v.clamp(0.0, 1.0)
    }
}

fn irwin_hall_grid(m: usize) -> Arc<IrwinHallGrid> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<IrwinHallGrid>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("irwin-hall cache poisoned");
    guard
        .entry(m)
        .or_insert_with(|| Arc::new(IrwinHallGrid::build(m)))
        .clone()
}

#[inline]
fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `ln Φ(x)`, accurate in both tails.
#[inline]
pub fn ln_std_normal_cdf(x: f64) -> f64 {
    if x > 0.0 {
        (-0.5 * erfc(x / std::f64::consts::SQRT_2)).ln_1p()
    } else {
        (0.5 * erfc(-x / std::f64::consts::SQRT_2)).ln()
    }
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// CDF of the sum of `m` i.i.d. picks from one of the supported distributions.
#[derive(Clone, Debug)]
pub struct SumCdf {
    dist: DistributionKind,
    m: usize,
    grid: Option<Arc<IrwinHallGrid>>,
}

impl SumCdf {
    pub fn new(dist: DistributionKind, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(NkError::invalid("number of summands must be at least 1"));
        }
        let grid = (dist == DistributionKind::Uniform01 && m > IRWIN_HALL_CLOSED_FORM_MAX)
            .then(|| irwin_hall_grid(m));
        Ok(SumCdf { dist, m, grid })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn cdf(&self, s: f64) -> f64 {
        let mf = self.m as f64;
        match self.dist {
            DistributionKind::Normal => std_normal_cdf(s / mf.sqrt()),
            DistributionKind::Cauchy => f64::atan2(1.0, -s / mf) / std::f64::consts::PI,
            DistributionKind::Exponential => {
                if s <= 0.0 {
                    0.0
                } else {
                    gamma_lr(mf, s)
                }
            }
            DistributionKind::NegExponential => {
                if s >= 0.0 {
                    1.0
                } else {
                    gamma_ur(mf, -s)
                }
            }
            DistributionKind::Uniform01 => match &self.grid {
                Some(grid) => grid.eval(s),
                None => irwin_hall_closed(self.m, s),
            },
        }
    }

    /// Natural log of the CDF; `-inf` where the CDF is zero.
    pub fn ln_cdf(&self, s: f64) -> f64 {
        match self.dist {
            DistributionKind::Normal => ln_std_normal_cdf(s / (self.m as f64).sqrt()),
            DistributionKind::Exponential if s > 0.0 => {
                let upper = gamma_ur(self.m as f64, s);
                if upper < 0.5 {
                    (-upper).ln_1p()
                } else {
                    gamma_lr(self.m as f64, s).ln()
                }
            }
            _ => self.cdf(s).ln(),
        }
    }
}

/// `F^{(m)}(s)`: CDF of the sum of `m` i.i.d. picks from `dist`.
pub fn cdf_sum(dist: DistributionKind, m: usize, s: f64) -> Result<f64> {
    Ok(SumCdf::new(dist, m)?.cdf(s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, k: usize, d: DistributionKind) -> ModelParams {
        ModelParams::new(n, k, d).unwrap()
    }

    #[test]
    fn params_reject_out_of_range_k() {
        assert!(ModelParams::new(4, 0, DistributionKind::Normal).is_err());
        assert!(ModelParams::new(4, 4, DistributionKind::Normal).is_err());
        let p = params(4, 3, DistributionKind::Normal);
        assert!(p.is_exchangeable_case());
        assert!(!params(5, 3, DistributionKind::Normal).is_exchangeable_case());
    }

    #[test]
    fn neighborhood_shape_support_and_determinism() {
        let p = params(4, 1, DistributionKind::Uniform01);
        let a = sample_neighborhood(&p, 7);
        assert_eq!(a.y().len(), 4);
        assert_eq!(a.y_mut.len(), 8);
        let mut all: Vec<f64> = a.y().iter().chain(a.y_mut.iter()).copied().collect();
        assert!(all.iter().all(|&v| v > 0.0 && v < 1.0));
        all.sort_by(f64::total_cmp);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(a, sample_neighborhood(&p, 7));
        assert_ne!(a, sample_neighborhood(&p, 8));
    }

    #[test]
    fn normal_neighborhood_mean_within_standard_error() {
        let p = params(100, 10, DistributionKind::Normal);
        let s = sample_neighborhood(&p, 1);
        let vals: Vec<f64> = s.y().iter().chain(s.y_mut.iter()).copied().collect();
        assert_eq!(vals.len(), 1200);
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        assert!(mean.abs() < 4.0 / (1200f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn cdf_sum_reference_values() {
        assert_eq!(cdf_sum(DistributionKind::Cauchy, 5, 0.0).unwrap(), 0.5);
        let v = cdf_sum(DistributionKind::Normal, 4, 2.0).unwrap();
        assert!((v - 0.841_344_746_068_543).abs() < 1e-12);
        assert!((cdf_sum(DistributionKind::Uniform01, 2, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(cdf_sum(DistributionKind::Normal, 0, 1.0).is_err());
    }

    #[test]
    fn exponential_families_are_erlang() {
        // Erlang(2) CDF: 1 - e^{-s}(1 + s)
        let s = 1.7f64;
        let want = 1.0 - (-s).exp() * (1.0 + s);
        assert!((cdf_sum(DistributionKind::Exponential, 2, s).unwrap() - want).abs() < 1e-13);
        assert!(
            (cdf_sum(DistributionKind::NegExponential, 2, -s).unwrap() - (1.0 - want)).abs()
                < 1e-13
        );
        assert_eq!(cdf_sum(DistributionKind::NegExponential, 3, 0.5).unwrap(), 1.0);
        assert_eq!(cdf_sum(DistributionKind::Exponential, 3, -0.5).unwrap(), 0.0);
    }

    #[test]
    fn cdf_sum_is_monotone_with_limits() {
        for dist in DistributionKind::ALL {
            for m in [1usize, 2, 4, 7, 30] {
                let c = SumCdf::new(dist, m).unwrap();
                let mut prev = 0.0;
                for i in 0..=400 {
                    let s = -200.0 + i as f64;
                    let v = c.cdf(s);
                    assert!((0.0..=1.0).contains(&v));
                    assert!(v + 1e-12 >= prev, "{dist} m={m} s={s}");
                    prev = v;
                }
                assert!(c.cdf(-1e6) < 1e-3, "{dist} m={m}");
                assert!(c.cdf(1e6) > 1.0 - 1e-3, "{dist} m={m}");
            }
        }
    }

    #[test]
    fn ln_cdf_consistent_with_cdf() {
        for dist in DistributionKind::ALL {
            let c = SumCdf::new(dist, 4).unwrap();
            for s in [-3.0, -0.5, 0.3, 1.9, 3.5] {
                let v = c.cdf(s);
                if v > 1e-300 {
                    assert!((c.ln_cdf(s) - v.ln()).abs() < 1e-10, "{dist} s={s}");
                }
            }
        }
        // deep lower tail stays finite
        assert!(ln_std_normal_cdf(-30.0).is_finite());
        assert!((ln_std_normal_cdf(-30.0) + 454.321_243_956_343_27).abs() < 1e-9);
    }

    #[test]
    fn h_event_examples() {
        // K=1, N=2: window for j=1 is {Y_0, Y_1}
        let s = NeighborhoodSample::from_values(2, 1, vec![0.9, 0.8], vec![0.5, 0.6, 0.5, 0.6])
            .unwrap();
        assert!(h_event(&s, 1));
        let s = NeighborhoodSample::from_values(2, 1, vec![0.1, 0.1], vec![0.5, 0.6, 0.5, 0.6])
            .unwrap();
        assert!(!h_event(&s, 1));
    }

    #[test]
    fn wraparound_shares_left_side_at_n2() {
        let s = NeighborhoodSample::from_values(2, 1, vec![1.0, 2.0], vec![1.4, 1.4, 2.0, 1.5])
            .unwrap();
        // both windows sum to 3.0; right sides are 2.8 and 3.5
        assert!(h_event(&s, 0));
        assert!(!h_event(&s, 1));
        assert!(!zero_is_lfm(&s));
    }

    #[test]
    fn lfm_by_dominance_and_single_failure() {
        let n = 5;
        let k = 2;
        let y = vec![10.0, 11.0, 12.0, 13.0, 14.0];
        let mut y_mut: Vec<f64> = (0..n * (k + 1)).map(|i| i as f64 * 0.01).collect();
        let s = NeighborhoodSample::from_values(n, k, y.clone(), y_mut.clone()).unwrap();
        assert!(zero_is_lfm(&s));
        assert!(zero_is_lfm_fast(&s));
        y_mut[3 * (k + 1) + 1] = 100.0;
        let s = NeighborhoodSample::from_values(n, k, y, y_mut).unwrap();
        assert!(!h_event(&s, 3));
        assert!(!zero_is_lfm(&s));
        assert!(!zero_is_lfm_fast(&s));
    }

    #[test]
    fn fast_and_plain_lfm_checks_agree() {
        for (n, k) in [(2, 1), (5, 2), (9, 4), (12, 11)] {
            let p = params(n, k, DistributionKind::Normal);
            for seed in 0..300 {
                let s = sample_neighborhood(&p, seed);
                assert_eq!(zero_is_lfm(&s), zero_is_lfm_fast(&s));
            }
        }
    }

    #[test]
    fn h_event_monotone_under_perturbation() {
        let p = params(7, 2, DistributionKind::Normal);
        for seed in 0..200 {
            let s = sample_neighborhood(&p, seed);
            for j in 0..7 {
                let before = h_event(&s, j);
                let mut up = s.clone();
                up.y[(j + 7 - 1) % 7] += 0.7;
                let mut down = s.clone();
                down.y_mut[j * 3 + 2] += 0.7;
                if before {
                    assert!(h_event(&up, j));
                } else {
                    assert!(!h_event(&down, j));
                }
            }
        }
    }

    #[test]
    fn lfm_translation_invariant() {
        let p = params(9, 3, DistributionKind::Normal);
        for seed in 0..300 {
            let s = sample_neighborhood(&p, seed);
            let shifted = s.map_values(|v| v + 4.0);
            assert_eq!(zero_is_lfm(&s), zero_is_lfm(&shifted));
        }
    }

    #[test]
    fn fitness_of_unit_mutant_matches_neighborhood_decomposition() {
        for seed in 0..20 {
            let p = params(6, 2, DistributionKind::Uniform01);
            let land = FullLandscape::sample(&p, seed).unwrap();
            let nb = land.zero_neighborhood();
            let zero = genome_fitness(&land, &Genome::zeros(6)).unwrap();
            assert!((zero - nb.y().iter().sum::<f64>()).abs() < 1e-12);
            for j in 0..6 {
                let in_window: Vec<usize> = nb.window_indices(j).collect();
                let outside: f64 = (0..6)
                    .filter(|i| !in_window.contains(i))
                    .map(|i| nb.y()[i])
                    .sum();
                let want = outside + nb.y_mut_row(j).iter().sum::<f64>();
                let got = genome_fitness(&land, &Genome::unit(6, j)).unwrap();
                assert!((got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_table_gives_constant_fitness() {
        let land = FullLandscape::from_table(3, 1, vec![1.0; 3 * 4]).unwrap();
        for m in 0..8 {
            assert_eq!(genome_fitness(&land, &Genome::from_mask(3, m)).unwrap(), 3.0);
        }
        assert!(genome_fitness(&land, &Genome::zeros(4)).is_err());
    }

    #[test]
    fn count_lfm_at_least_one() {
        for seed in 0..20 {
            let p = params(8, 3, DistributionKind::Cauchy);
            let land = FullLandscape::sample(&p, seed).unwrap();
            assert!(count_lfm(&land) >= 1);
        }
    }

    #[test]
    fn landscape_size_guard() {
        let p = params(25, 2, DistributionKind::Normal);
        assert!(matches!(FullLandscape::sample(&p, 0), Err(NkError::Infeasible(_))));
    }
}
