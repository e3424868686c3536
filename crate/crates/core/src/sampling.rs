//! Evaluation plans for expectations over (x, ε, S), compensated summation and
//! seeded random streams.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn ksum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanMode {
    Exhaustive,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsetMode {
    Exhaustive,
    Sampled { count: u64 },
}

/// How expectations are evaluated: exhaustively or by seeded Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub mode: PlanMode,
    pub budget: u64,
    pub seed: u64,
    pub subset_mode: SubsetMode,
}

/// n choose k in saturating arithmetic.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// M^n · 2^n in saturating arithmetic.
pub fn grid_sign_count(modulus: usize, n: usize) -> u64 {
    let mut acc: u64 = 1;
    for _ in 0..n {
        acc = acc.saturating_mul(modulus as u64).saturating_mul(2);
    }
    acc
}

/// Chooses exhaustive evaluation when M^n·2^n and C(n,k) both fit in `budget`,
/// Monte Carlo with exactly `budget` draws otherwise.
pub fn make_sample_plan(modulus: usize, n: usize, k: usize, budget: u64, seed: u64) -> Result<SamplePlan> {
    if modulus == 0 || n == 0 {
        return param("modulus and dimension must be at least 1");
    }
    if budget == 0 {
        return param("budget must be at least 1");
    }
    if k > n {
        return param(format!("subset size k={k} exceeds dimension n={n}"));
    }
    let subsets = binomial(n, k);
    let points = grid_sign_count(modulus, n);
    let subset_mode = if subsets <= budget {
        SubsetMode::Exhaustive
    } else {
        SubsetMode::Sampled { count: budget }
    };
    let mode = if points <= budget && subsets <= budget {
        PlanMode::Exhaustive
    } else {
        PlanMode::MonteCarlo
    };
    Ok(SamplePlan { mode, budget, seed, subset_mode })
}

impl SamplePlan {
    /// An exhaustive plan regardless of size; the caller vouches for feasibility.
    pub fn exhaustive() -> Self {
        Self { mode: PlanMode::Exhaustive, budget: u64::MAX, seed: 0, subset_mode: SubsetMode::Exhaustive }
    }

    /// A Monte Carlo plan with `budget` draws; subsets are enumerated when at most `budget`.
    pub fn monte_carlo(n: usize, k: usize, budget: u64, seed: u64) -> Self {
        let subset_mode = if binomial(n, k) <= budget {
            SubsetMode::Exhaustive
        } else {
            SubsetMode::Sampled { count: budget }
        };
        Self { mode: PlanMode::MonteCarlo, budget: budget.max(1), seed, subset_mode }
    }

    pub fn is_exhaustive(&self) -> bool {
        self.mode == PlanMode::Exhaustive
    }

    /// Independent generator for one (plan, purpose) pair. ChaCha is counter based, so each
    /// purpose gets its own stream and new estimators never shift existing ones.
    pub fn stream(&self, purpose: &str) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(fnv1a(purpose.as_bytes()));
        rng
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// A plan-evaluated mean together with its empirical standard error (zero when exhaustive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: u64,
    pub exhaustive: bool,
}

impl Estimate {
    pub fn exact(mean: f64, samples: u64) -> Self {
        Self { mean, std_err: 0.0, samples, exhaustive: true }
    }

    pub fn scaled(self, c: f64) -> Self {
        Self { mean: self.mean * c, std_err: self.std_err * c.abs(), ..self }
    }
}

/// Welford accumulator with a compensated mean.
#[derive(Debug, Clone, Default)]
pub(crate) struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    sum: KahanSum,
}

impl Moments {
    pub(crate) fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum.add(v);
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    pub(crate) fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum.value() / self.n as f64
        }
    }

    pub(crate) fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub(crate) fn estimate(&self) -> Estimate {
        let se = if self.n < 2 { 0.0 } else { (self.variance() / self.n as f64).sqrt() };
        Estimate { mean: self.mean(), std_err: se, samples: self.n, exhaustive: false }
    }
}

/// Lexicographic k-subsets of {0..n}.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        let current = if k <= n { Some((0..k).collect()) } else { None };
        Self { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.current.take()?;
        let out = cur.clone();
        let k = cur.len();
        let mut next = cur;
        let mut i = k;
        while i > 0 {
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                return Some(out);
            }
        }
        Some(out)
    }
}

/// Uniform random k-subset, sorted.
pub fn random_subset<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut s = index::sample(rng, n, k).into_vec();
    s.sort_unstable();
    s
}

/// Stream of size-k subsets of {0..n}: all of them in lexicographic order, or `budget`
/// seeded uniform draws.
#[allow(clippy::large_enum_variant)]
pub enum SubsetStream {
    Exhaustive(Combinations),
    Sampled { rng: ChaCha8Rng, n: usize, k: usize, remaining: u64 },
}

impl Iterator for SubsetStream {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        match self {
            Self::Exhaustive(c) => c.next(),
            Self::Sampled { rng, n, k, remaining } => {
                if *remaining == 0 {
                    return None;
                }
                *remaining -= 1;
                Some(random_subset(rng, *n, *k))
            }
        }
    }
}

pub fn subset_stream(n: usize, k: usize, plan: &SamplePlan) -> Result<SubsetStream> {
    if k == 0 || k > n {
        return param(format!("subset size k={k} must lie in 1..={n}"));
    }
    Ok(match plan.subset_mode {
        SubsetMode::Exhaustive => SubsetStream::Exhaustive(Combinations::new(n, k)),
        SubsetMode::Sampled { count } => {
            SubsetStream::Sampled { rng: plan.stream("subset-stream"), n, k, remaining: count }
        }
    })
}

/// Average over k-subsets S of a per-subset expectation.
///
/// Exhaustive plans call `exact(S)` for every S in lexicographic order. Monte Carlo plans
/// spend exactly `plan.budget` draws of `draw(S, rng)`: stratified over S when the subsets
/// can be enumerated, joint uniform (S, ·) draws otherwise.
pub fn subset_average<E, D>(n: usize, k: usize, plan: &SamplePlan, purpose: &str, mut exact: E, mut draw: D) -> Result<Estimate>
where
    E: FnMut(&[usize]) -> Result<f64>,
    D: FnMut(&[usize], &mut ChaCha8Rng) -> f64,
{
    if k == 0 || k > n {
        return param(format!("subset size k={k} must lie in 1..={n}"));
    }
    if plan.is_exhaustive() {
        let mut acc = KahanSum::new();
        let mut count = 0u64;
        for s in Combinations::new(n, k) {
            acc.add(exact(&s)?);
            count += 1;
        }
        return Ok(Estimate::exact(acc.value() / count as f64, count));
    }
    let mut rng = plan.stream(purpose);
    match plan.subset_mode {
        SubsetMode::Exhaustive => {
            let total = binomial(n, k);
            let base = plan.budget / total;
            let extra = plan.budget % total;
            let mut means = KahanSum::new();
            let mut var = 0.0;
            for (i, s) in Combinations::new(n, k).enumerate() {
                let draws = base + u64::from((i as u64) < extra);
                let mut m = Moments::default();
                for _ in 0..draws {
                    m.push(draw(&s, &mut rng));
                }
                means.add(m.mean());
                if draws > 1 {
                    var += m.variance() / draws as f64;
                }
            }
            let c = total as f64;
            Ok(Estimate { mean: means.value() / c, std_err: var.sqrt() / c, samples: plan.budget, exhaustive: false })
        }
        SubsetMode::Sampled { .. } => {
            let mut m = Moments::default();
            for _ in 0..plan.budget {
                let s = random_subset(&mut rng, n, k);
                m.push(draw(&s, &mut rng));
            }
            Ok(m.estimate())
        }
    }
}

/// Mean of `draw` over `plan.budget` seeded draws.
pub(crate) fn monte_carlo<D: FnMut(&mut ChaCha8Rng) -> f64>(plan: &SamplePlan, purpose: &str, mut draw: D) -> Estimate {
    let mut rng = plan.stream(purpose);
    let mut m = Moments::default();
    for _ in 0..plan.budget {
        m.push(draw(&mut rng));
    }
    m.estimate()
}

/// Uniform sign vector index in {0..2^n}; bit j set means ε_j = −1.
pub(crate) fn random_sign_index<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    if n >= usize::BITS as usize {
        rng.random::<u64>() as usize
    } else {
        (rng.random::<u64>() as usize) & ((1usize << n) - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_examples() {
        let p = make_sample_plan(4, 2, 1, 1_000_000, 7).unwrap();
        assert_eq!(p.mode, PlanMode::Exhaustive);
        let p = make_sample_plan(8, 10, 3, 100_000, 7).unwrap();
        assert_eq!(p.mode, PlanMode::MonteCarlo);
        assert_eq!(p.budget, 100_000);
        let p = make_sample_plan(1 << 20, 40, 20, 10, 1).unwrap();
        assert_eq!(p.mode, PlanMode::MonteCarlo);
        assert!(matches!(p.subset_mode, SubsetMode::Sampled { count: 10 }));
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(200, 100), u64::MAX);
    }

    #[test]
    fn combinations_lexicographic() {
        let all: Vec<_> = Combinations::new(4, 2).collect();
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        let full: Vec<_> = Combinations::new(3, 3).collect();
        assert_eq!(full, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn sampled_streams_repeat() {
        let plan = SamplePlan::monte_carlo(30, 10, 50, 99);
        let a: Vec<_> = subset_stream(30, 10, &plan).unwrap().collect();
        let b: Vec<_> = subset_stream(30, 10, &plan).unwrap().collect();
        assert_eq!(a.len(), 50);
        assert_eq!(a, b);
        assert!(subset_stream(3, 4, &plan).is_err());
    }

    #[test]
    fn streams_are_independent_by_purpose() {
        let plan = SamplePlan::monte_carlo(2, 1, 10, 5);
        let x: u64 = plan.stream("a").random();
        let y: u64 = plan.stream("b").random();
        let x2: u64 = plan.stream("a").random();
        assert_eq!(x, x2);
        assert_ne!(x, y);
    }

    #[test]
    fn kahan_beats_naive() {
        let mut acc = KahanSum::new();
        acc.add(1e16);
        for _ in 0..1000 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.value(), 1000.0);
    }
}
