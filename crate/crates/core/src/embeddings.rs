//! Explicit embeddings of ℓ_q-type spaces and grids, exact pairwise distortion, and the
//! closed-form exponents governing grid distortion and snowflake embeddability.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::linalg::{jacobi_eigen, Mat};

/// A metric on ℝ^N given by a norm of differences, optionally snowflaked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "metric")]
pub enum Metric {
    /// ℓ_p norm.
    Lp { p: f64 },
    /// (‖u‖_p^p + ‖v‖_2^p)^{1/p} where the vector is (u, v) with u of length `split`.
    Rosenthal { p: f64, split: usize },
    /// d(x, y)^θ for a base metric d.
    Snowflake { base: Box<Metric>, theta: f64 },
}

fn lp_norm(v: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p == 2.0 {
        return v.map(|x| x * x).sum::<f64>().sqrt();
    }
    v.map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

impl Metric {
    pub fn lp(p: f64) -> Self {
        Self::Lp { p }
    }

    pub fn snowflake(self, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return param(format!("snowflake exponent θ={theta} must lie in (0, 1]"));
        }
        Ok(Self::Snowflake { base: Box::new(self), theta })
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let diff = || x.iter().zip(y).map(|(a, b)| a - b);
        match self {
            Self::Lp { p } => lp_norm(diff(), *p),
            Self::Rosenthal { p, split } => {
                let u = lp_norm(diff().take(*split), *p);
                let v = lp_norm(diff().skip(*split), 2.0);
                (u.powf(*p) + v.powf(*p)).powf(1.0 / p)
            }
            Self::Snowflake { base, theta } => base.distance(x, y).powf(*theta),
        }
    }
}

/// Exact bi-Lipschitz data of a finite map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingResult {
    pub points: usize,
    /// max d_Y(f(x), f(y)) / d_X(x, y).
    pub expansion: f64,
    /// min d_Y(f(x), f(y)) / d_X(x, y).
    pub contraction: f64,
    /// expansion / contraction.
    pub distortion: f64,
    /// A scale s with s·d_X ≤ d_Y ≤ distortion·s·d_X (the contraction).
    pub scale: f64,
    /// Pairs with coincident sources and distinct images; these make the expansion infinite.
    pub collapsed_pairs: usize,
}

/// Exact pairwise distortion of `source[i] ↦ image[i]`.
pub fn distortion(source: &[Vec<f64>], source_metric: &Metric, image: &[Vec<f64>], image_metric: &Metric) -> Result<EmbeddingResult> {
    if source.len() != image.len() {
        return param(format!("{} source points but {} images", source.len(), image.len()));
    }
    if source.len() < 2 {
        return param("distortion needs at least two points");
    }
    let rows: Vec<(f64, f64, usize)> = (0..source.len())
        .into_par_iter()
        .map(|i| {
            let (mut hi, mut lo, mut collapsed) = (0.0f64, f64::INFINITY, 0usize);
            for j in i + 1..source.len() {
                let dx = source_metric.distance(&source[i], &source[j]);
                let dy = image_metric.distance(&image[i], &image[j]);
                if dx == 0.0 {
                    if dy > 0.0 {
                        collapsed += 1;
                    }
                    continue;
                }
                let r = dy / dx;
                hi = hi.max(r);
                lo = lo.min(r);
            }
            (hi, lo, collapsed)
        })
        .collect();
    let (mut expansion, mut contraction, mut collapsed_pairs) = (0.0f64, f64::INFINITY, 0);
    for (hi, lo, c) in rows {
        expansion = expansion.max(hi);
        contraction = contraction.min(lo);
        collapsed_pairs += c;
    }
    if contraction == f64::INFINITY {
        return param("all source points coincide");
    }
    if collapsed_pairs > 0 {
        expansion = f64::INFINITY;
    }
    let distortion = if contraction > 0.0 { expansion / contraction } else { f64::INFINITY };
    Ok(EmbeddingResult { points: source.len(), expansion, contraction, distortion, scale: contraction, collapsed_pairs })
}

/// x ↦ (√n·x, n^{1/q}·x) ∈ ℓ_p^n ⊕ ℓ_2^n; measure images with [`Metric::Rosenthal`].
pub fn rosenthal_embed(x: &[f64], q: f64) -> Vec<f64> {
    let n = x.len() as f64;
    let (a, b) = (n.sqrt(), n.powf(1.0 / q));
    x.iter().map(|v| a * v).chain(x.iter().map(|v| b * v)).collect()
}

/// Distortion of the two-norm embedding restricted to flat vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosenthalDistortion {
    pub n: usize,
    pub q: f64,
    pub p: f64,
    pub distortion: f64,
    /// Support size minimizing the p-th power norm objective.
    pub argmin: usize,
    pub argmax: usize,
    /// (p − q)(q − 2) / (q²(p − 2)), or 0 when p = q.
    pub exponent: f64,
    /// n^exponent.
    pub asymptotic: f64,
}

/// n^{p/2} s^{1−p/q} + n^{p/q} s^{p/2−p/q}: the p-th power image norm of a flat unit vector of
/// ℓ_q^n supported on s coordinates.
pub fn rosenthal_objective(n: f64, q: f64, p: f64, s: f64) -> f64 {
    n.powf(p / 2.0) * s.powf(1.0 - p / q) + n.powf(p / q) * s.powf(p / 2.0 - p / q)
}

pub fn rosenthal_exponent(q: f64, p: f64) -> f64 {
    if p == q {
        0.0
    } else {
        (p - q) * (q - 2.0) / (q * q * (p - 2.0))
    }
}

/// (max_s g(s) / min_s g(s))^{1/p} over support sizes s ∈ {1..n}. This is the distortion
/// restricted to flat vectors, a lower bound for the full distortion: non-flat vectors can
/// push the expansion slightly above the flat maximum.
pub fn rosenthal_distortion(n: usize, q: f64, p: f64) -> Result<RosenthalDistortion> {
    if !(q > 2.0 && q <= p && p.is_finite()) {
        return param(format!("need 2 < q ≤ p, got q={q}, p={p}"));
    }
    if n == 0 {
        return param("n must be positive");
    }
    let nf = n as f64;
    let (mut lo, mut hi) = ((f64::INFINITY, 1), (0.0, 1));
    for s in 1..=n {
        let g = rosenthal_objective(nf, q, p, s as f64);
        if g < lo.0 {
            lo = (g, s);
        }
        if g > hi.0 {
            hi = (g, s);
        }
    }
    let exponent = rosenthal_exponent(q, p);
    Ok(RosenthalDistortion {
        n,
        q,
        p,
        distortion: (hi.0 / lo.0).powf(1.0 / p),
        argmin: lo.1,
        argmax: hi.1,
        exponent,
        asymptotic: nf.powf(exponent),
    })
}

/// Realizes the (2/q)-snowflake of Euclidean points in ℓ_2^N by double-centered spectral
/// embedding of the kernel ‖x − y‖^{4/q}.
pub fn schoenberg_embed(points: &[Vec<f64>], q: f64) -> Result<Vec<Vec<f64>>> {
    if !(q >= 2.0 && q.is_finite()) {
        return param(format!("q={q} must be a finite number ≥ 2"));
    }
    let n = points.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let euclid = Metric::lp(2.0);
    let mut d = Mat::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = euclid.distance(&points[i], &points[j]).powf(4.0 / q);
            d.set(i, j, v);
            d.set(j, i, v);
        }
    }
    let row_mean: Vec<f64> = (0..n).map(|i| (0..n).map(|j| d.get(i, j)).sum::<f64>() / n as f64).collect();
    let total = row_mean.iter().sum::<f64>() / n as f64;
    let mut gram = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram.set(i, j, -0.5 * (d.get(i, j) - row_mean[i] - row_mean[j] + total));
        }
    }
    let spectrum = jacobi_eigen(&gram)?;
    let lmax = spectrum.values.first().copied().unwrap_or(0.0).max(0.0);
    let mut columns = Vec::new();
    for (k, &v) in spectrum.values.iter().enumerate() {
        if v < -1e-6 * lmax {
            return Err(Error::Numerical(format!("Gram matrix has eigenvalue {v:e} below -1e-6 times the largest {lmax:e}")));
        }
        if v > 0.0 {
            columns.push((k, v.sqrt()));
        }
    }
    Ok((0..n).map(|i| columns.iter().map(|&(k, r)| spectrum.vectors.get(i, k) * r).collect()).collect())
}

/// The grid {0..m}^n as real points.
pub fn integer_grid(m: usize, n: usize) -> Result<Vec<Vec<f64>>> {
    let side = m + 1;
    let count = (side as u128).checked_pow(n as u32).filter(|c| *c <= 1 << 24).ok_or_else(|| Error::Budget(format!("grid [{m}]^{n} is too large")))?;
    Ok((0..count as usize)
        .map(|mut idx| {
            let mut x = vec![0.0; n];
            for c in x.iter_mut().rev() {
                *c = (idx % side) as f64;
                idx /= side;
            }
            x
        })
        .collect())
}

/// Which embedding the composite grid measurement applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridEmbedding {
    Rosenthal,
    Schoenberg,
}

/// Exact distortion of the chosen embedding on the grid {0..m}^n with the ℓ_q metric.
/// Schoenberg images are compared in ℓ_2, which sits isometrically inside L_p.
pub fn composite_grid_distortion(m: usize, n: usize, q: f64, p: f64, which: GridEmbedding, max_points: usize) -> Result<EmbeddingResult> {
    let grid = integer_grid(m, n)?;
    if grid.len() > max_points {
        return Err(Error::Budget(format!("{} grid points exceed the budget of {max_points}", grid.len())));
    }
    let source = Metric::lp(q);
    match which {
        GridEmbedding::Rosenthal => {
            if !(q > 2.0 && q <= p) {
                return param(format!("need 2 < q ≤ p, got q={q}, p={p}"));
            }
            let image: Vec<Vec<f64>> = grid.iter().map(|x| rosenthal_embed(x, q)).collect();
            distortion(&grid, &source, &image, &Metric::Rosenthal { p, split: n })
        }
        GridEmbedding::Schoenberg => {
            let image = schoenberg_embed(&grid, q)?;
            distortion(&grid, &source, &image, &Metric::lp(2.0))
        }
    }
}

/// h(x) = (a(x_1), b(x_1), …, a(x_n), b(x_n)) with a(u), b(u) the nearest integers to
/// 2m + 2m cos(2πu/m) and 2m + 2m sin(2πu/m).
pub fn grid_round_map(x: &[usize], m: usize) -> Result<Vec<i64>> {
    if m < 2 {
        return param(format!("m={m} must be at least 2"));
    }
    let mf = m as f64;
    Ok(x.iter()
        .flat_map(|&u| {
            let t = 2.0 * PI * (u % m) as f64 / mf;
            [(2.0 * mf + 2.0 * mf * t.cos()).round() as i64, (2.0 * mf + 2.0 * mf * t.sin()).round() as i64]
        })
        .collect())
}

/// (Σ_j |e^{2πi x_j/m} − e^{2πi y_j/m}|^q)^{1/q}.
pub fn circle_distance(x: &[usize], y: &[usize], m: usize, q: f64) -> f64 {
    let mf = m as f64;
    lp_norm(
        x.iter().zip(y).map(|(&a, &b)| {
            let t = 2.0 * PI * (a as f64 - b as f64) / mf;
            2.0 * (t / 2.0).sin().abs()
        }),
        q,
    )
}

/// Extreme ratios ‖h(x) − h(y)‖_q / circle_distance(x, y) over all distinct pairs of Z_m^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichResult {
    pub m: usize,
    pub n: usize,
    pub q: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

pub fn grid_round_sandwich(m: usize, n: usize, q: f64) -> Result<SandwichResult> {
    let size = m.checked_pow(n as u32).filter(|s| *s <= 1 << 16).ok_or_else(|| Error::Budget(format!("Z_{m}^{n} is too large")))?;
    let points: Vec<Vec<usize>> = (0..size)
        .map(|mut idx| {
            let mut x = vec![0; n];
            for c in x.iter_mut().rev() {
                *c = idx % m;
                idx /= m;
            }
            x
        })
        .collect();
    let images: Vec<Vec<f64>> = points.iter().map(|x| grid_round_map(x, m).map(|v| v.into_iter().map(|c| c as f64).collect())).collect::<Result<_>>()?;
    let target = Metric::lp(q);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut lower_holds = true;
    let mut upper_holds = true;
    let mf = m as f64;
    for i in 0..size {
        for j in i + 1..size {
            let c = circle_distance(&points[i], &points[j], m, q);
            let h = target.distance(&images[i], &images[j]);
            lower_holds &= mf * c <= h;
            upper_holds &= h <= 3.0 * mf * c;
            lo = lo.min(h / c);
            hi = hi.max(h / c);
        }
    }
    Ok(SandwichResult { m, n, q, min_ratio: lo, max_ratio: hi, lower_holds, upper_holds })
}

/// ψ_{p,q}(t) = p²(q−2)/(q²(p−2)) t² + p(pq − 3q + 2)/(q(p−2)) t − p.
pub fn psi(p: f64, q: f64, t: f64) -> f64 {
    let a = p * p * (q - 2.0) / (q * q * (p - 2.0));
    let b = p * (p * q - 3.0 * q + 2.0) / (q * (p - 2.0));
    a * t * t + b * t - p
}

/// The positive zero of ψ_{p,q}.
pub fn theta(p: f64, q: f64) -> f64 {
    let lead = (2.0 * q * (p - q) + q * q * (p - 1.0) * (p - 2.0)) / (2.0 * p * p * (q - 2.0));
    let c = p * q - 3.0 * q + 2.0;
    lead * ((1.0 + 4.0 * p * (p - 2.0) * (q - 2.0) / (c * c)).sqrt() - 1.0)
}

/// Closed-form grid-distortion shapes and snowflake exponents for 2 < q < p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridBounds {
    pub m: f64,
    pub n: f64,
    pub q: f64,
    pub p: f64,
    /// (p − q)(q − 2) / (q²(p − 2)).
    pub exponent: f64,
    /// min{m^{q(p−2)/(q(p−2)+p−q)}, n}^exponent, up to a constant depending on p.
    pub lower_shape: f64,
    /// min{n^exponent, m^{1−2/q}}.
    pub upper_shape: f64,
    /// n^{(p−q)/(q(p−2))}, the grid size where the two upper bounds cross.
    pub transition: f64,
    pub theta: f64,
    /// ψ_{p,q}(θ_{p,q}), zero up to rounding.
    pub psi_at_theta: f64,
    /// Upper end of the interval known to contain θ: 1 − (p − q)(q − 2)/(2p³).
    pub theta_upper: f64,
    /// q/p, the lower end.
    pub theta_lower: f64,
}

pub fn grid_bounds(m: f64, n: f64, q: f64, p: f64) -> Result<GridBounds> {
    if !(q > 2.0 && q < p && p.is_finite()) {
        return param(format!("need 2 < q < p, got q={q}, p={p}"));
    }
    if !(m >= 1.0 && n >= 1.0) {
        return param("m and n must be at least 1");
    }
    let exponent = rosenthal_exponent(q, p);
    let grid_exp = q * (p - 2.0) / (q * (p - 2.0) + p - q);
    let th = theta(p, q);
    Ok(GridBounds {
        m,
        n,
        q,
        p,
        exponent,
        lower_shape: m.powf(grid_exp).min(n).powf(exponent),
        upper_shape: n.powf(exponent).min(m.powf(1.0 - 2.0 / q)),
        transition: n.powf((p - q) / (q * (p - 2.0))),
        theta: th,
        psi_at_theta: psi(p, q, th),
        theta_upper: 1.0 - (p - q) * (q - 2.0) / (2.0 * p.powi(3)),
        theta_lower: q / p,
    })
}
