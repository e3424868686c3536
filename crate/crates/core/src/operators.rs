//! Averaging operators on Z_M^n, hypercube functions, the Rademacher projection and
//! characters of Z_M^n.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use rayon::prelude::*;

use crate::error::{param, Result};
use crate::lattice::{diff_norm_pow, validate_set, GridFunction, LatticePoint};

/// A function {−1,1}^n → ℝ^d. Index bit j set means ε_j = −1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypercubeFunction {
    n: usize,
    d: usize,
    value_p: f64,
    values: Vec<f64>,
}

impl HypercubeFunction {
    pub fn new(n: usize, d: usize, value_p: f64, values: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return param("value dimension must be at least 1");
        }
        if n >= 30 {
            return param(format!("hypercube dimension {n} is too large to tabulate"));
        }
        if !(value_p >= 1.0 && value_p.is_finite()) {
            return param(format!("value exponent p={value_p} must be a finite number ≥ 1"));
        }
        if values.len() != d << n {
            return param(format!("expected {} values, got {}", d << n, values.len()));
        }
        Ok(Self { n, d, value_p, values })
    }

    /// Tabulates `eval(signs, out)` over {−1,1}^n.
    pub fn from_fn<F: FnMut(&[i64], &mut [f64])>(n: usize, d: usize, value_p: f64, mut eval: F) -> Result<Self> {
        if n >= 30 {
            return param(format!("hypercube dimension {n} is too large to tabulate"));
        }
        let mut values = vec![0.0; d << n];
        let mut eps = vec![0i64; n];
        for idx in 0..1usize << n {
            signs_of(idx, &mut eps);
            eval(&eps, &mut values[idx * d..(idx + 1) * d]);
        }
        Self::new(n, d, value_p, values)
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn value_dim(&self) -> usize {
        self.d
    }
    pub fn value_p(&self) -> f64 {
        self.value_p
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn len(&self) -> usize {
        1 << self.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, idx: usize) -> &[f64] {
        &self.values[idx * self.d..(idx + 1) * self.d]
    }

    pub fn antipode(&self, idx: usize) -> usize {
        idx ^ ((1 << self.n) - 1)
    }

    /// Index of σ^j ε, the sign vector with coordinate j flipped.
    pub fn flip(idx: usize, j: usize) -> usize {
        idx ^ (1 << j)
    }

    /// ‖h(a) − h(b)‖^power in the value norm.
    pub fn gap(&self, a: usize, b: usize, power: f64) -> f64 {
        diff_norm_pow(self.value(a), self.value(b), self.value_p, power)
    }
}

pub(crate) fn signs_of(idx: usize, out: &mut [i64]) {
    for (j, e) in out.iter_mut().enumerate() {
        *e = if idx >> j & 1 == 0 { 1 } else { -1 };
    }
}

/// Rad(h)(ε) = Σ_j ĥ(j) ε_j with ĥ(j) = 2^{−n} Σ_δ h(δ) δ_j.
pub fn rademacher_projection(h: &HypercubeFunction) -> HypercubeFunction {
    let coeffs = rademacher_coefficients(h);
    let (n, d) = (h.n, h.d);
    let mut values = vec![0.0; d << n];
    for idx in 0..1usize << n {
        let out = &mut values[idx * d..(idx + 1) * d];
        for (j, c) in coeffs.iter().enumerate() {
            let s = if idx >> j & 1 == 0 { 1.0 } else { -1.0 };
            for (o, cv) in out.iter_mut().zip(c) {
                *o += s * cv;
            }
        }
    }
    HypercubeFunction { n, d, value_p: h.value_p, values }
}

/// The degree-one Walsh coefficients ĥ(j) ∈ ℝ^d.
pub fn rademacher_coefficients(h: &HypercubeFunction) -> Vec<Vec<f64>> {
    let (n, d) = (h.n, h.d);
    let scale = 1.0 / (1usize << n) as f64;
    (0..n)
        .map(|j| {
            let mut c = vec![0.0; d];
            for idx in 0..1usize << n {
                let s = if idx >> j & 1 == 0 { scale } else { -scale };
                for (cv, v) in c.iter_mut().zip(h.value(idx)) {
                    *cv += s * v;
                }
            }
            c
        })
        .collect()
}

/// Box averaging supports, all built from an odd radius R.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoxAverageKind {
    /// Coordinates in S range over even values in (−R, R), the others over odd values in [−R, R].
    DS(Vec<usize>),
    /// Every coordinate ranges over even values in (−R, R).
    A,
    /// D_S with S = {j}.
    Bj(usize),
    /// Coordinates in T range over even values in (−R, R), the others are 0.
    DeltaT(Vec<usize>),
}

fn even_inside(r: i64) -> Vec<i64> {
    (-(r - 1)..=r - 1).step_by(2).collect()
}

fn odd_closed(r: i64) -> Vec<i64> {
    (-r..=r).step_by(2).collect()
}

/// The offset multiset averaged over by `kind` with radius R.
pub fn box_support(kind: &BoxAverageKind, radius: usize, n: usize) -> Result<Vec<Vec<i64>>> {
    if radius == 0 || radius % 2 == 0 {
        return param(format!("box radius R={radius} must be odd and positive"));
    }
    let r = radius as i64;
    let per_coord: Vec<Vec<i64>> = match kind {
        BoxAverageKind::DS(set) => {
            validate_set(set, n)?;
            (0..n).map(|j| if set.contains(&j) { even_inside(r) } else { odd_closed(r) }).collect()
        }
        BoxAverageKind::Bj(j) => {
            if *j >= n {
                return param(format!("coordinate {j} out of range for dimension {n}"));
            }
            (0..n).map(|i| if i == *j { even_inside(r) } else { odd_closed(r) }).collect()
        }
        BoxAverageKind::A => (0..n).map(|_| even_inside(r)).collect(),
        BoxAverageKind::DeltaT(set) => {
            validate_set(set, n)?;
            (0..n).map(|j| if set.contains(&j) { even_inside(r) } else { vec![0] }).collect()
        }
    };
    let mut out = vec![Vec::with_capacity(n)];
    for choices in &per_coord {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |&c| {
                    let mut v = prefix.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    Ok(out)
}

/// g(x) = mean of f(x + u) over u in the support multiset.
pub fn average_over(f: &GridFunction, offsets: &[Vec<i64>]) -> GridFunction {
    let torus = f.torus();
    let d = f.value_dim();
    let inv = 1.0 / offsets.len() as f64;
    let mut x = vec![0; f.dim()];
    f.map_indexed(|idx, out| {
        torus.coords(idx, &mut x);
        out.fill(0.0);
        for u in offsets {
            let v = f.value(torus.shifted(&x, u));
            for c in 0..d {
                out[c] += v[c];
            }
        }
        out.iter_mut().for_each(|o| *o *= inv);
    })
}

pub fn box_average(f: &GridFunction, kind: &BoxAverageKind, radius: usize) -> Result<GridFunction> {
    if f.modulus() % 4 != 0 {
        return param(format!("box averages need a modulus divisible by 4, got {}", f.modulus()));
    }
    if radius > f.modulus() / 2 {
        return param(format!("box radius R={radius} exceeds half the modulus {}", f.modulus()));
    }
    let support = box_support(kind, radius, f.dim())?;
    Ok(average_over(f, &support))
}

/// Two-point and product edge averages, and the doubled-step average T_j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeAverageKind {
    /// (f(x + e_j) + f(x − e_j)) / 2.
    Ej(usize),
    /// Product of E_s over s ≠ j.
    CalEj(usize),
    /// Product of E_s over all s.
    CalE,
    /// Mean of f(x + 2ε) over ε ∈ {−1,1}^n with ε_j = 0.
    Tj(usize),
}

fn unit(n: usize, j: usize, scale: i64) -> Vec<i64> {
    let mut v = vec![0; n];
    v[j] = scale;
    v
}

pub fn edge_average(f: &GridFunction, kind: EdgeAverageKind) -> Result<GridFunction> {
    let n = f.dim();
    let check = |j: usize| if j >= n { param(format!("coordinate {j} out of range for dimension {n}")) } else { Ok(()) };
    match kind {
        EdgeAverageKind::Ej(j) => {
            check(j)?;
            Ok(average_over(f, &[unit(n, j, 1), unit(n, j, -1)]))
        }
        EdgeAverageKind::CalEj(j) => {
            check(j)?;
            let mut g = f.clone();
            for s in (0..n).filter(|&s| s != j) {
                g = average_over(&g, &[unit(n, s, 1), unit(n, s, -1)]);
            }
            Ok(g)
        }
        EdgeAverageKind::CalE => {
            let mut g = f.clone();
            for s in 0..n {
                g = average_over(&g, &[unit(n, s, 1), unit(n, s, -1)]);
            }
            Ok(g)
        }
        EdgeAverageKind::Tj(j) => {
            check(j)?;
            let others: Vec<usize> = (0..n).filter(|&s| s != j).collect();
            let offsets: Vec<Vec<i64>> = (0..1usize << others.len())
                .map(|mask| {
                    let mut v = vec![0; n];
                    for (b, &s) in others.iter().enumerate() {
                        v[s] = if mask >> b & 1 == 0 { 2 } else { -2 };
                    }
                    v
                })
                .collect();
            Ok(average_over(f, &offsets))
        }
    }
}

/// W_y(x) = exp(2πi⟨x, y⟩/M) as a d=2 table with the complex modulus as value norm.
pub fn character(y: &LatticePoint) -> Result<GridFunction> {
    let modulus = y.modulus;
    if modulus % 8 != 0 {
        return param(format!("characters are built on Z_8m; modulus {modulus} is not divisible by 8"));
    }
    GridFunction::from_fn(modulus, y.dim(), 2, 2.0, |x, out| {
        let dot: usize = x.iter().zip(&y.coords).map(|(a, b)| a * b % modulus).sum::<usize>() % modulus;
        let phase = 2.0 * PI * dot as f64 / modulus as f64;
        out[0] = phase.cos();
        out[1] = phase.sin();
    })
}

/// Normalized complex inner product M^{−n} Σ_x f(x) conj(g(x)) of two d=2 tables.
pub fn complex_inner(f: &GridFunction, g: &GridFunction) -> Result<(f64, f64)> {
    if f.value_dim() != 2 || g.value_dim() != 2 || f.torus() != g.torus() {
        return param("complex inner product needs two d=2 tables on the same torus");
    }
    let (mut re, mut im) = (0.0, 0.0);
    for idx in 0..f.len() {
        let (a, b) = (f.value(idx), g.value(idx));
        re += a[0] * b[0] + a[1] * b[1];
        im += a[1] * b[0] - a[0] * b[1];
    }
    let scale = f.len() as f64;
    Ok((re / scale, im / scale))
}

/// max_ε ‖Rad(h^x)(ε) − ½ Σ_j ε_j [T_j f(x + 2e_j) − T_j f(x − 2e_j)]‖ where h^x(ε) = f(x + 2ε) − f(x).
pub fn rad_identity_residual(f: &GridFunction, x: &LatticePoint) -> Result<f64> {
    check_rad_modulus(f)?;
    if x.modulus != f.modulus() || x.dim() != f.dim() {
        return param("point does not live on the function's torus");
    }
    let doubled = doubled_step_averages(f)?;
    residual_at(f, &doubled, &x.coords)
}

/// Largest residual of the Rademacher identity over every point of the torus.
pub fn rad_identity_max_residual(f: &GridFunction) -> Result<f64> {
    check_rad_modulus(f)?;
    let doubled = doubled_step_averages(f)?;
    let torus = f.torus();
    let residuals = (0..torus.size())
        .into_par_iter()
        .map(|idx| {
            let mut x = vec![0usize; f.dim()];
            torus.coords(idx, &mut x);
            residual_at(f, &doubled, &x)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

fn check_rad_modulus(f: &GridFunction) -> Result<()> {
    if f.modulus() % 8 != 0 {
        return param(format!("modulus {} is not divisible by 8", f.modulus()));
    }
    Ok(())
}

fn doubled_step_averages(f: &GridFunction) -> Result<Vec<GridFunction>> {
    (0..f.dim()).map(|j| edge_average(f, EdgeAverageKind::Tj(j))).collect()
}

fn residual_at(f: &GridFunction, doubled: &[GridFunction], x: &[usize]) -> Result<f64> {
    let n = f.dim();
    let d = f.value_dim();
    let torus = f.torus();
    let base = f.value(torus.index(x)).to_vec();
    let h = HypercubeFunction::from_fn(n, d, f.value_p(), |eps, out| {
        let shift: Vec<i64> = eps.iter().map(|e| 2 * e).collect();
        let v = f.value(torus.shifted(x, &shift));
        for c in 0..d {
            out[c] = v[c] - base[c];
        }
    })?;
    let rad = rademacher_projection(&h);
    let half_diff: Vec<Vec<f64>> = doubled
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let plus = t.value(torus.shifted(x, &unit(n, j, 2)));
            let minus = t.value(torus.shifted(x, &unit(n, j, -2)));
            plus.iter().zip(minus).map(|(a, b)| 0.5 * (a - b)).collect()
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut eps = vec![0i64; n];
    let mut rhs = vec![0.0; d];
    for idx in 0..1usize << n {
        signs_of(idx, &mut eps);
        rhs.fill(0.0);
        for j in 0..n {
            for c in 0..d {
                rhs[c] += eps[j] as f64 * half_diff[j][c];
            }
        }
        worst = worst.max(diff_norm_pow(rad.value(idx), &rhs, f.value_p(), 1.0));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{indicator_grid, random_grid, random_hypercube};

    #[test]
    fn two_point_average_example() {
        let f = indicator_grid(4, 1, 1.0).unwrap();
        let g = edge_average(&f, EdgeAverageKind::Ej(0)).unwrap();
        assert_eq!(g.values(), &[0.0, 0.5, 0.0, 0.5]);
    }

    #[test]
    fn singleton_supports_are_identity() {
        let f = random_grid(8, 2, 2, 2.0, 1).unwrap();
        assert_eq!(box_average(&f, &BoxAverageKind::DS(vec![0, 1]), 1).unwrap(), f);
        assert_eq!(box_average(&f, &BoxAverageKind::A, 1).unwrap(), f);
    }

    #[test]
    fn support_sizes() {
        let s = box_support(&BoxAverageKind::DS(vec![1]), 3, 3).unwrap();
        assert_eq!(s.len(), 3 * 4 * 4);
        assert_eq!(box_support(&BoxAverageKind::A, 5, 2).unwrap().len(), 25);
        assert_eq!(box_support(&BoxAverageKind::DeltaT(vec![0]), 3, 2).unwrap().len(), 3);
        assert!(box_support(&BoxAverageKind::A, 2, 2).is_err());
        let f = random_grid(8, 1, 1, 2.0, 1).unwrap();
        assert!(box_average(&f, &BoxAverageKind::A, 5).is_err());
        let g = random_grid(6, 1, 1, 2.0, 1).unwrap();
        assert!(box_average(&g, &BoxAverageKind::A, 1).is_err());
    }

    #[test]
    fn product_average_factorizes() {
        let f = random_grid(8, 3, 1, 2.0, 4).unwrap();
        let all = edge_average(&f, EdgeAverageKind::CalE).unwrap();
        let partial = edge_average(&f, EdgeAverageKind::CalEj(0)).unwrap();
        let composed = edge_average(&partial, EdgeAverageKind::Ej(0)).unwrap();
        for (a, b) in all.values().iter().zip(composed.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn walsh_characters() {
        let first = HypercubeFunction::from_fn(3, 1, 2.0, |e, out| out[0] = e[0] as f64).unwrap();
        assert_eq!(rademacher_projection(&first), first);
        let pair = HypercubeFunction::from_fn(3, 1, 2.0, |e, out| out[0] = (e[0] * e[1]) as f64).unwrap();
        assert!(rademacher_projection(&pair).values().iter().all(|v| *v == 0.0));
        let c = HypercubeFunction::from_fn(3, 1, 2.0, |_, out| out[0] = 2.5).unwrap();
        assert!(rademacher_projection(&c).values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn projection_is_idempotent() {
        let h = random_hypercube(4, 2, 2.0, 9).unwrap();
        let once = rademacher_projection(&h);
        let twice = rademacher_projection(&once);
        for (a, b) in once.values().iter().zip(twice.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn character_law() {
        let y = LatticePoint::new(&[3, 5], 8).unwrap();
        let w = character(&y).unwrap();
        let v = LatticePoint::new(&[1, 6], 8).unwrap();
        let shifted = w.translate(&[1, 6]);
        let wv = w.at(&v).to_vec();
        for idx in 0..w.len() {
            let (a, b) = (w.value(idx), shifted.value(idx));
            let prod = [a[0] * wv[0] - a[1] * wv[1], a[0] * wv[1] + a[1] * wv[0]];
            assert!((prod[0] - b[0]).abs() < 1e-12 && (prod[1] - b[1]).abs() < 1e-12);
        }
        let zero = character(&LatticePoint::new(&[0, 0], 8).unwrap()).unwrap();
        assert!(zero.values().chunks(2).all(|c| c == [1.0, 0.0]));
        assert!(character(&LatticePoint::new(&[1], 4).unwrap()).is_err());
    }

    #[test]
    fn residual_vanishes_on_random_tables() {
        let f = random_grid(8, 2, 1, 2.0, 3).unwrap();
        for coords in [[0, 0], [3, 7], [5, 2]] {
            let x = LatticePoint::new(&coords, 8).unwrap();
            assert!(rad_identity_residual(&f, &x).unwrap() < 1e-12);
        }
        assert!(rad_identity_max_residual(&f).unwrap() < 1e-12);
        assert!(rad_identity_max_residual(&random_grid(4, 2, 1, 2.0, 3).unwrap()).is_err());
    }
}
