//! The discrete torus Z_M^n, sign vectors, grid functions, gap moments and ℓ_∞ geodesics.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::sampling::{monte_carlo, random_sign_index, subset_average, Estimate, KahanSum, SamplePlan};

/// A point of Z_M^n stored with canonical residues in [0, M).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticePoint {
    pub coords: Vec<usize>,
    pub modulus: usize,
}

impl LatticePoint {
    /// Reduces arbitrary integer coordinates modulo M.
    pub fn new(coords: &[i64], modulus: usize) -> Result<Self> {
        if modulus == 0 {
            return param("modulus must be positive");
        }
        let coords = coords.iter().map(|&c| c.rem_euclid(modulus as i64) as usize).collect();
        Ok(Self { coords, modulus })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Symmetric representative of each coordinate, in (−M/2, M/2].
    pub fn symmetric(&self) -> Vec<i64> {
        let m = self.modulus as i64;
        self.coords
            .iter()
            .map(|&c| {
                let c = c as i64;
                if 2 * c > m {
                    c - m
                } else {
                    c
                }
            })
            .collect()
    }

    pub fn add(&self, other: &LatticePoint) -> Result<LatticePoint> {
        if self.modulus != other.modulus || self.dim() != other.dim() {
            return param("lattice points live on different tori");
        }
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| (a + b) % self.modulus).collect();
        Ok(LatticePoint { coords, modulus: self.modulus })
    }
}

/// Law of the random sign vector ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignLaw {
    /// Uniform on {−1, 1}^n.
    Rademacher,
    /// Uniform on {−1, 0, 1}^n.
    Ternary,
}

impl SignLaw {
    pub fn count(self, n: usize) -> usize {
        match self {
            Self::Rademacher => 1 << n,
            Self::Ternary => 3usize.pow(n as u32),
        }
    }

    /// Writes the sign vector with the given index into `out`.
    pub fn signs(self, index: usize, out: &mut [i64]) {
        match self {
            Self::Rademacher => {
                for (j, e) in out.iter_mut().enumerate() {
                    *e = if index >> j & 1 == 0 { 1 } else { -1 };
                }
            }
            Self::Ternary => {
                let mut r = index;
                for e in out.iter_mut() {
                    *e = (r % 3) as i64 - 1;
                    r /= 3;
                }
            }
        }
    }

    fn random<R: Rng + ?Sized>(self, rng: &mut R, out: &mut [i64]) {
        match self {
            Self::Rademacher => {
                for chunk in out.chunks_mut(64) {
                    self.signs(random_sign_index(rng, chunk.len()), chunk);
                }
            }
            Self::Ternary => {
                for e in out.iter_mut() {
                    *e = rng.random_range(0..3) - 1;
                }
            }
        }
    }
}

/// A vector in {−1, 1}^n (or {−1, 0, 1}^n for the ternary law).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignVector {
    pub signs: Vec<i64>,
}

impl SignVector {
    pub fn new(signs: Vec<i64>, law: SignLaw) -> Result<Self> {
        let ok = signs.iter().all(|&s| match law {
            SignLaw::Rademacher => s == 1 || s == -1,
            SignLaw::Ternary => (-1..=1).contains(&s),
        });
        if !ok {
            return param("sign entry outside the declared alphabet");
        }
        Ok(Self { signs })
    }

    /// ε_S: the restriction to S, zero elsewhere.
    pub fn restrict(&self, set: &[usize]) -> Vec<i64> {
        let mut out = vec![0; self.signs.len()];
        for &j in set {
            out[j] = self.signs[j];
        }
        out
    }
}

/// Row-major indexing helper for Z_M^n (the first coordinate is most significant).
#[derive(Debug, Clone)]
pub struct Torus {
    pub modulus: usize,
    pub dim: usize,
    strides: Vec<usize>,
    size: usize,
}

impl Torus {
    pub fn new(modulus: usize, dim: usize) -> Result<Self> {
        if modulus == 0 {
            return param("modulus must be positive");
        }
        let mut strides = vec![1; dim];
        let mut size: usize = 1;
        for j in (0..dim).rev() {
            strides[j] = size;
            size = size
                .checked_mul(modulus)
                .ok_or_else(|| Error::Budget(format!("torus Z_{modulus}^{dim} is too large to tabulate")))?;
        }
        Ok(Self { modulus, dim, strides, size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    pub fn coords(&self, mut idx: usize, out: &mut [usize]) {
        for j in (0..self.dim).rev() {
            out[j] = idx % self.modulus;
            idx /= self.modulus;
        }
    }

    /// Index of coords + delta, wrapping modulo M.
    pub fn shifted(&self, coords: &[usize], delta: &[i64]) -> usize {
        let m = self.modulus as i64;
        coords
            .iter()
            .zip(delta)
            .zip(&self.strides)
            .map(|((&c, &d), &s)| ((c as i64 + d).rem_euclid(m)) as usize * s)
            .sum()
    }
}

/// A function Z_M^n → ℝ^d, tabulated, with the ℓ_p norm of exponent `value_p` on values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridTable", into = "GridTable")]
pub struct GridFunction {
    torus: Torus,
    value_dim: usize,
    value_p: f64,
    values: Vec<f64>,
}

impl PartialEq for Torus {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.dim == other.dim
    }
}

/// JSON form: `{M, n, d, p, values}` with a flat row-major value list of length M^n·d.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridTable {
    #[serde(rename = "M")]
    pub modulus: usize,
    pub n: usize,
    pub d: usize,
    pub p: f64,
    pub values: Vec<f64>,
}

impl TryFrom<GridTable> for GridFunction {
    type Error = Error;

    fn try_from(t: GridTable) -> Result<Self> {
        GridFunction::new(t.modulus, t.n, t.d, t.p, t.values)
    }
}

impl From<GridFunction> for GridTable {
    fn from(f: GridFunction) -> Self {
        GridTable { modulus: f.torus.modulus, n: f.torus.dim, d: f.value_dim, p: f.value_p, values: f.values }
    }
}

impl GridFunction {
    pub fn new(modulus: usize, n: usize, d: usize, p: f64, values: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return param("dimension and value dimension must be at least 1");
        }
        if !(p >= 1.0 && p.is_finite()) {
            return param(format!("value exponent p={p} must be a finite number ≥ 1"));
        }
        let torus = Torus::new(modulus, n)?;
        if values.len() != torus.size() * d {
            return param(format!("expected {} values, got {}", torus.size() * d, values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return param("grid values must be finite");
        }
        Ok(Self { torus, value_dim: d, value_p: p, values })
    }

    /// Tabulates `eval(coords, out)` over the whole torus.
    pub fn from_fn<F: FnMut(&[usize], &mut [f64])>(modulus: usize, n: usize, d: usize, p: f64, mut eval: F) -> Result<Self> {
        let torus = Torus::new(modulus, n)?;
        let mut values = vec![0.0; torus.size() * d];
        let mut x = vec![0; n];
        for idx in 0..torus.size() {
            torus.coords(idx, &mut x);
            eval(&x, &mut values[idx * d..(idx + 1) * d]);
        }
        Self::new(modulus, n, d, p, values)
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }
    pub fn modulus(&self) -> usize {
        self.torus.modulus
    }
    pub fn dim(&self) -> usize {
        self.torus.dim
    }
    pub fn value_dim(&self) -> usize {
        self.value_dim
    }
    pub fn value_p(&self) -> f64 {
        self.value_p
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn len(&self) -> usize {
        self.torus.size()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, idx: usize) -> &[f64] {
        &self.values[idx * self.value_dim..(idx + 1) * self.value_dim]
    }

    pub fn at(&self, point: &LatticePoint) -> &[f64] {
        self.value(self.torus.index(&point.coords))
    }

    pub fn with_value_p(mut self, p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return param(format!("value exponent p={p} must be a finite number ≥ 1"));
        }
        self.value_p = p;
        Ok(self)
    }

    /// Same torus, new values produced pointwise from this function's index.
    pub fn map_indexed<F: FnMut(usize, &mut [f64])>(&self, mut g: F) -> GridFunction {
        let d = self.value_dim;
        let mut values = vec![0.0; self.values.len()];
        for idx in 0..self.len() {
            g(idx, &mut values[idx * d..(idx + 1) * d]);
        }
        GridFunction { torus: self.torus.clone(), value_dim: d, value_p: self.value_p, values }
    }

    /// x ↦ f(x + v).
    pub fn translate(&self, v: &[i64]) -> GridFunction {
        let mut x = vec![0; self.dim()];
        self.map_indexed(|idx, out| {
            self.torus.coords(idx, &mut x);
            out.copy_from_slice(self.value(self.torus.shifted(&x, v)));
        })
    }

    /// λ·f + c.
    pub fn affine(&self, scale: f64, shift: &[f64]) -> GridFunction {
        let d = self.value_dim;
        self.map_indexed(|idx, out| {
            for c in 0..d {
                out[c] = scale * self.values[idx * d + c] + shift[c % shift.len().max(1)];
            }
        })
    }

    /// ‖f(a) − f(b)‖^power in the value norm.
    pub fn gap(&self, a: usize, b: usize, power: f64) -> f64 {
        diff_norm_pow(self.value(a), self.value(b), self.value_p, power)
    }
}

/// ‖u − v‖_p^power for the ℓ_p norm on ℝ^d.
pub fn diff_norm_pow(u: &[f64], v: &[f64], p: f64, power: f64) -> f64 {
    if u.len() == 1 {
        return (u[0] - v[0]).abs().powf(power);
    }
    let s: f64 = u.iter().zip(v).map(|(a, b)| (a - b).abs().powf(p)).sum();
    if p == power {
        s
    } else {
        s.powf(power / p)
    }
}

/// ‖u‖_p^power.
pub fn norm_pow(u: &[f64], p: f64, power: f64) -> f64 {
    if u.len() == 1 {
        return u[0].abs().powf(power);
    }
    let s: f64 = u.iter().map(|a| a.abs().powf(p)).sum();
    if p == power {
        s
    } else {
        s.powf(power / p)
    }
}

/// Which pair of points a gap moment compares, as a function of (x, ε).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Displacement {
    /// x + e_j against x.
    Edge(usize),
    /// x + ε against x.
    Diagonal,
    /// x + ε against x − ε.
    SymmetricDiagonal,
    /// x + t·ε_S against x.
    ShiftedSet { set: Vec<usize>, scale: i64 },
    /// x + v against x.
    FixedShift(Vec<i64>),
}

impl Displacement {
    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Self::Edge(j) if *j >= n => param(format!("coordinate {j} out of range for dimension {n}")),
            Self::ShiftedSet { set, .. } => validate_set(set, n),
            Self::FixedShift(v) if v.len() != n => param(format!("shift has length {}, expected {n}", v.len())),
            _ => Ok(()),
        }
    }

    /// Offsets (a, b) such that the moment compares f(x + a) with f(x + b).
    fn offsets(&self, eps: &[i64], a: &mut [i64], b: &mut [i64]) {
        a.fill(0);
        b.fill(0);
        match self {
            Self::Edge(j) => a[*j] = 1,
            Self::Diagonal => a.copy_from_slice(eps),
            Self::SymmetricDiagonal => {
                for j in 0..eps.len() {
                    a[j] = eps[j];
                    b[j] = -eps[j];
                }
            }
            Self::ShiftedSet { set, scale } => {
                for &j in set {
                    a[j] = scale * eps[j];
                }
            }
            Self::FixedShift(v) => a.copy_from_slice(v),
        }
    }

    fn uses_signs(&self) -> bool {
        !matches!(self, Self::Edge(_) | Self::FixedShift(_))
    }
}

pub(crate) fn validate_set(set: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &j in set {
        if j >= n {
            return param(format!("set element {j} out of range for dimension {n}"));
        }
        if seen[j] {
            return param(format!("set element {j} repeated"));
        }
        seen[j] = true;
    }
    Ok(())
}

/// Mean of ‖f(x + a) − f(x + b)‖^power over uniform (x, ε), evaluated per `plan`.
pub fn gap_moment_estimate(
    f: &GridFunction,
    disp: &Displacement,
    law: SignLaw,
    power: f64,
    plan: &SamplePlan,
    purpose: &str,
) -> Result<Estimate> {
    let n = f.dim();
    disp.validate(n)?;
    let torus = f.torus();
    let mut eps = vec![0i64; n];
    let mut a = vec![0i64; n];
    let mut b = vec![0i64; n];
    let mut x = vec![0usize; n];
    if plan.is_exhaustive() {
        let signs = if disp.uses_signs() { law.count(n) } else { 1 };
        let mut acc = KahanSum::new();
        for e in 0..signs {
            law.signs(e, &mut eps);
            disp.offsets(&eps, &mut a, &mut b);
            for idx in 0..torus.size() {
                torus.coords(idx, &mut x);
                acc.add(f.gap(torus.shifted(&x, &a), torus.shifted(&x, &b), power));
            }
        }
        let count = (signs * torus.size()) as u64;
        return Ok(Estimate::exact(acc.value() / count as f64, count));
    }
    Ok(monte_carlo(plan, purpose, |rng| {
        let idx = rng.random_range(0..torus.size());
        torus.coords(idx, &mut x);
        law.random(rng, &mut eps);
        disp.offsets(&eps, &mut a, &mut b);
        f.gap(torus.shifted(&x, &a), torus.shifted(&x, &b), power)
    }))
}

/// Mean of ‖f(x + a) − f(x + b)‖_p^p over uniform (x, ε) ∈ Z_M^n × {−1,1}^n, p = `f.value_p()`.
pub fn gap_moment(f: &GridFunction, disp: &Displacement, plan: &SamplePlan) -> Result<f64> {
    Ok(gap_moment_estimate(f, disp, SignLaw::Rademacher, f.value_p(), plan, "gap-moment")?.mean)
}

/// Average over |S| = k of the mean of ‖f(x + t·ε_S) − f(x)‖^power.
pub fn subset_gap_moment(f: &GridFunction, k: usize, scale: i64, power: f64, plan: &SamplePlan, purpose: &str) -> Result<Estimate> {
    let n = f.dim();
    let torus = f.torus();
    let exact_plan = SamplePlan::exhaustive();
    let mut x = vec![0usize; n];
    let mut eps = vec![0i64; n];
    let mut a = vec![0i64; n];
    let zero = vec![0i64; n];
    subset_average(
        n,
        k,
        plan,
        purpose,
        |s| {
            let disp = Displacement::ShiftedSet { set: s.to_vec(), scale };
            Ok(gap_moment_estimate(f, &disp, SignLaw::Rademacher, power, &exact_plan, purpose)?.mean)
        },
        |s, rng| {
            let idx = rng.random_range(0..torus.size());
            torus.coords(idx, &mut x);
            SignLaw::Rademacher.random(rng, &mut eps);
            a.fill(0);
            for &j in s {
                a[j] = scale * eps[j];
            }
            f.gap(torus.shifted(&x, &a), torus.shifted(&x, &zero), power)
        },
    )
}

/// An ℓ_∞ geodesic from 0 to w with steps in {−1,1}^n; every coordinate of w must be odd.
pub fn geodesic(w: &[i64]) -> Result<Vec<Vec<i64>>> {
    if w.is_empty() {
        return param("geodesic target must have at least one coordinate");
    }
    if let Some(c) = w.iter().find(|c| *c % 2 == 0) {
        return param(format!("geodesic target coordinate {c} is even"));
    }
    let abs: Vec<i64> = w.iter().map(|c| c.abs()).collect();
    let sign: Vec<i64> = w.iter().map(|c| c.signum()).collect();
    let len = *abs.iter().max().unwrap() as usize;
    let mut path = Vec::with_capacity(len + 1);
    let mut cur = vec![0i64; w.len()];
    path.push(cur.clone());
    for t in 1..=len {
        if t % 2 == 1 {
            cur.iter_mut().for_each(|c| *c += 1);
        } else {
            for (c, &target) in cur.iter_mut().zip(&abs) {
                if *c < target {
                    *c += 1;
                } else {
                    *c -= 1;
                }
            }
        }
        path.push(cur.clone());
    }
    Ok(path.into_iter().map(|p| p.iter().zip(&sign).map(|(c, s)| c * s).collect()).collect())
}

/// Both sides of Σ_x d(f(x+ε_S), f(x))^p ≤ |S|^{p−1} Σ_{j∈S} Σ_x d(f(x+e_j), f(x))^p.
pub fn set_shift_vs_edges(f: &GridFunction, eps: &SignVector, set: &[usize], power: f64) -> Result<(f64, f64)> {
    let n = f.dim();
    validate_set(set, n)?;
    if eps.signs.len() != n {
        return param("sign vector length does not match dimension");
    }
    let torus = f.torus();
    let shift = eps.restrict(set);
    let zero = vec![0i64; n];
    let mut x = vec![0usize; n];
    let mut lhs = KahanSum::new();
    for idx in 0..torus.size() {
        torus.coords(idx, &mut x);
        lhs.add(f.gap(torus.shifted(&x, &shift), idx, power));
    }
    let mut rhs = KahanSum::new();
    let mut e = vec![0i64; n];
    for &j in set {
        e.fill(0);
        e[j] = 1;
        for idx in 0..torus.size() {
            torus.coords(idx, &mut x);
            rhs.add(f.gap(torus.shifted(&x, &e), torus.shifted(&x, &zero), power));
        }
    }
    let factor = (set.len() as f64).powf(power - 1.0);
    Ok((lhs.value(), factor * rhs.value()))
}

/// Both sides of Σ_{ε,x} d(f(x), f(x+2ε_S))^p ≤ 2^p Σ_{ε,x} d(f(x), f(x+ε))^p.
pub fn doubled_set_vs_diagonal(f: &GridFunction, set: &[usize], power: f64) -> Result<(f64, f64)> {
    let n = f.dim();
    let plan = SamplePlan::exhaustive();
    let count = (f.len() << n) as f64;
    let lhs = gap_moment_estimate(f, &Displacement::ShiftedSet { set: set.to_vec(), scale: 2 }, SignLaw::Rademacher, power, &plan, "")?;
    let rhs = gap_moment_estimate(f, &Displacement::Diagonal, SignLaw::Rademacher, power, &plan, "")?;
    Ok((lhs.mean * count, 2f64.powf(power) * rhs.mean * count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::random_grid;

    fn indicator(modulus: usize, n: usize, p: f64) -> GridFunction {
        GridFunction::from_fn(modulus, n, 1, p, |x, out| out[0] = if x.iter().all(|&c| c == 0) { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn gap_examples() {
        let plan = SamplePlan::exhaustive();
        let f = indicator(4, 1, 1.0);
        assert_eq!(gap_moment(&f, &Displacement::Edge(0), &plan).unwrap(), 0.5);
        let shifted = Displacement::ShiftedSet { set: vec![0], scale: 2 };
        assert_eq!(gap_moment(&f, &shifted, &plan).unwrap(), 0.5);
        let c = GridFunction::from_fn(4, 2, 3, 2.0, |_, out| out.fill(1.5)).unwrap();
        for d in [Displacement::Diagonal, Displacement::SymmetricDiagonal, Displacement::Edge(1)] {
            assert_eq!(gap_moment(&c, &d, &plan).unwrap(), 0.0);
        }
    }

    #[test]
    fn gap_rejects_bad_specs() {
        let f = indicator(4, 2, 2.0);
        let plan = SamplePlan::exhaustive();
        assert!(gap_moment(&f, &Displacement::Edge(2), &plan).is_err());
        assert!(gap_moment(&f, &Displacement::ShiftedSet { set: vec![0, 5], scale: 1 }, &plan).is_err());
        assert!(gap_moment(&f, &Displacement::FixedShift(vec![1]), &plan).is_err());
    }

    #[test]
    fn geodesic_examples() {
        assert_eq!(geodesic(&[1]).unwrap(), vec![vec![0], vec![1]]);
        assert_eq!(geodesic(&[3, 1]).unwrap(), vec![vec![0, 0], vec![1, 1], vec![2, 0], vec![3, 1]]);
        let flipped = geodesic(&[-3, 1]).unwrap();
        assert_eq!(flipped, vec![vec![0, 0], vec![-1, 1], vec![-2, 0], vec![-3, 1]]);
        assert!(geodesic(&[3, 2]).is_err());
    }

    #[test]
    fn symmetric_view_round_trips() {
        let p = LatticePoint::new(&[-1, 5, 2], 8).unwrap();
        assert_eq!(p.coords, vec![7, 5, 2]);
        assert_eq!(p.symmetric(), vec![-1, -3, 2]);
        assert_eq!(LatticePoint::new(&p.symmetric(), 8).unwrap(), p);
    }

    #[test]
    fn json_table_round_trip() {
        let f = random_grid(4, 2, 2, 3.0, 11).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let g: GridFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
        let bad = r#"{"M":2,"n":1,"d":1,"p":2.0,"values":[1.0]}"#;
        assert!(serde_json::from_str::<GridFunction>(bad).is_err());
    }

    #[test]
    fn monte_carlo_tracks_exhaustive() {
        let f = random_grid(8, 3, 1, 2.0, 3).unwrap();
        let exact = gap_moment(&f, &Displacement::Diagonal, &SamplePlan::exhaustive()).unwrap();
        let plan = SamplePlan::monte_carlo(3, 1, 50_000, 17);
        let est = gap_moment_estimate(&f, &Displacement::Diagonal, SignLaw::Rademacher, 2.0, &plan, "t").unwrap();
        assert!((est.mean - exact).abs() < 4.0 * est.std_err, "{} vs {exact} ± {}", est.mean, est.std_err);
    }

    #[test]
    fn budget_and_four_budget_agree() {
        let f = random_grid(8, 4, 2, 3.0, 5).unwrap();
        let disp = Displacement::SymmetricDiagonal;
        let mut ok = 0;
        for seed in 0..100u64 {
            let a = gap_moment_estimate(&f, &disp, SignLaw::Rademacher, 3.0, &SamplePlan::monte_carlo(4, 1, 2_000, seed), "b").unwrap();
            let b = gap_moment_estimate(&f, &disp, SignLaw::Rademacher, 3.0, &SamplePlan::monte_carlo(4, 1, 8_000, seed + 1000), "b").unwrap();
            let se = (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
            if (a.mean - b.mean).abs() < 5.0 * se {
                ok += 1;
            }
        }
        assert!(ok >= 99, "{ok}/100");
    }
}
