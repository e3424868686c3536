//! The p-complexification of ℓ_p^d, circular moments, the contraction principle and the
//! passage from metric X_p data on Z_2m^n to the linear inequality.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{param, Error, Result};
use crate::report::{Combine, InequalityReport};
use crate::sampling::{binomial, ksum, monte_carlo, random_sign_index, Combinations, KahanSum, SamplePlan};

pub const DEFAULT_NODES: usize = 512;
const MAX_BRIDGE_EVALUATIONS: u64 = 1 << 24;

/// An element (u, v) of the complexification; (a + bi)(u, v) = (au − bv, av + bu).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexifiedVector {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: f64,
}

impl ComplexifiedVector {
    pub fn new(u: Vec<f64>, v: Vec<f64>, p: f64) -> Result<Self> {
        if u.len() != v.len() {
            return param(format!("real part has length {} but imaginary part {}", u.len(), v.len()));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return param(format!("p={p} must be a finite number ≥ 1"));
        }
        Ok(Self { u, v, p })
    }

    /// Σ_j c_j (z_j, 0) for complex coefficients c_j = (re, im).
    pub fn combination(coeffs: &[(f64, f64)], z: &[Vec<f64>], p: f64) -> Result<Self> {
        let d = z.first().map_or(0, Vec::len);
        let mut u = vec![0.0; d];
        let mut v = vec![0.0; d];
        for (&(re, im), zj) in coeffs.iter().zip(z) {
            for i in 0..d {
                u[i] += re * zj[i];
                v[i] += im * zj[i];
            }
        }
        Self::new(u, v, p)
    }

    pub fn scale(&self, re: f64, im: f64) -> Self {
        let u = self.u.iter().zip(&self.v).map(|(a, b)| re * a - im * b).collect();
        let v = self.u.iter().zip(&self.v).map(|(a, b)| re * b + im * a).collect();
        Self { u, v, p: self.p }
    }

    pub fn norm(&self, nodes: usize) -> Result<f64> {
        complexification_norm(&self.u, &self.v, self.p, nodes)
    }
}

/// Angles in [0, 2π) where some coordinate of cos θ·u − sin θ·v vanishes.
fn kinks(u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for (&a, &b) in u.iter().zip(v) {
        if a == 0.0 && b == 0.0 {
            continue;
        }
        let t = a.atan2(b).rem_euclid(PI);
        out.push(t);
        out.push(t + PI);
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    out
}

/// Trapezoid rule in the tanh-sinh variable on [a, b]: exponentially accurate for integrands
/// analytic inside the interval, including |t − a|^p behaviour at the ends.
fn tanh_sinh(f: &dyn Fn(f64) -> f64, a: f64, b: f64, nodes: usize) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let steps = (nodes / 2) as i64;
    let h = 3.0 / steps as f64;
    let mut acc = KahanSum::new();
    for k in -steps..=steps {
        let t = h * k as f64;
        let inner = 0.5 * PI * t.sinh();
        let w = 0.5 * PI * t.cosh() / inner.cosh().powi(2);
        let x = inner.tanh();
        // Nodes that round onto an endpoint carry negligible weight.
        if x.abs() < 1.0 {
            acc.add(w * f(mid + half * x));
        }
    }
    h * half * acc.value()
}

fn pow_sum(u: &[f64], v: &[f64], p: f64, nodes: usize) -> f64 {
    let f = |t: f64| {
        let (s, c) = t.sin_cos();
        u.iter().zip(v).map(|(a, b)| (c * a - s * b).abs().powf(p)).sum::<f64>()
    };
    let breaks = kinks(u, v);
    if breaks.is_empty() {
        return 0.0;
    }
    let mut acc = KahanSum::new();
    for (i, &a) in breaks.iter().enumerate() {
        let b = breaks.get(i + 1).copied().unwrap_or(breaks[0] + 2.0 * PI);
        acc.add(tanh_sinh(&f, a, b, nodes));
    }
    acc.value()
}

/// (∫_0^{2π} ‖cos θ·u − sin θ·v‖_p^p dθ)^{1/p}, integrating between the angles where a
/// coordinate vanishes so that the integrand is smooth on every piece.
pub fn complexification_norm(u: &[f64], v: &[f64], p: f64, nodes: usize) -> Result<f64> {
    Ok(complexification_norm_pow(u, v, p, nodes)?.powf(1.0 / p))
}

/// The p-th power of [`complexification_norm`].
pub fn complexification_norm_pow(u: &[f64], v: &[f64], p: f64, nodes: usize) -> Result<f64> {
    if u.len() != v.len() {
        return param(format!("real part has length {} but imaginary part {}", u.len(), v.len()));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return param(format!("p={p} must be a finite number ≥ 1"));
    }
    if nodes < 64 {
        return param(format!("{nodes} quadrature nodes; at least 64 are needed"));
    }
    Ok(pow_sum(u, v, p, nodes))
}

/// Relative change of the norm when the node count doubles.
pub fn quadrature_drift(u: &[f64], v: &[f64], p: f64, nodes: usize) -> Result<f64> {
    let a = complexification_norm(u, v, p, nodes)?;
    let b = complexification_norm(u, v, p, 2 * nodes)?;
    Ok(if b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() })
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// ∫_0^{2π} |cos θ|^p dθ, as four times the integral over [0, π/2].
pub fn circular_moment(p: f64) -> f64 {
    4.0 * adaptive_simpson(&|t: f64| t.cos().max(0.0).powf(p), 0.0, PI / 2.0, 1e-13)
}

/// The circular moment against its Γ-function forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircularMoment {
    pub p: f64,
    pub quadrature: f64,
    /// 2√π Γ(p/2 + 1/2) / Γ(p/2 + 1).
    pub gamma_form: f64,
    /// 4√π Γ(p/2 + 1/2) / Γ(p/2 + 1), the constant as usually displayed alongside this identity.
    pub displayed: f64,
    /// displayed / quadrature.
    pub ratio: f64,
    pub matches_displayed: bool,
}

pub fn circular_moment_report(p: f64) -> Result<CircularMoment> {
    if !(p >= 1.0 && p.is_finite()) {
        return param(format!("p={p} must be a finite number ≥ 1"));
    }
    let quadrature = circular_moment(p);
    let gamma_form = 2.0 * PI.sqrt() * (ln_gamma(p / 2.0 + 0.5) - ln_gamma(p / 2.0 + 1.0)).exp();
    let displayed = 2.0 * gamma_form;
    let ratio = displayed / quadrature;
    Ok(CircularMoment { p, quadrature, gamma_form, displayed, ratio, matches_displayed: (ratio - 1.0).abs() < 1e-9 })
}

fn check_vectors(z: &[Vec<f64>]) -> Result<usize> {
    let d = z.first().map(Vec::len).ok_or_else(|| Error::Parameter("need at least one vector".into()))?;
    if d == 0 || z.iter().any(|v| v.len() != d) {
        return param("vectors must share a positive dimension");
    }
    if z.iter().flatten().any(|x| !x.is_finite()) {
        return param("vectors must be finite");
    }
    Ok(d)
}

fn lp_pow(v: &[f64], p: f64) -> f64 {
    v.iter().map(|x| x.abs().powf(p)).sum()
}

fn signed_pow(a: &[f64], z: &[Vec<f64>], signs: usize, p: f64, buf: &mut [f64]) -> f64 {
    buf.iter_mut().for_each(|x| *x = 0.0);
    for (j, (aj, zj)) in a.iter().zip(z).enumerate() {
        let c = if signs >> j & 1 == 1 { -aj } else { *aj };
        for (b, x) in buf.iter_mut().zip(zj) {
            *b += c * x;
        }
    }
    lp_pow(buf, p)
}

/// Σ_δ ‖Σ_j a_j δ_j z_j‖_p^p over all of {−1,1}^n, or 2^n times a Monte Carlo mean.
fn rademacher_pow_sum(a: &[f64], z: &[Vec<f64>], p: f64, plan: &SamplePlan, purpose: &str) -> Result<(f64, bool)> {
    let (n, d) = (z.len(), z[0].len());
    if plan.is_exhaustive() && n <= 24 {
        let total: Vec<f64> = (0..1usize << n).into_par_iter().map_init(|| vec![0.0; d], |buf, s| signed_pow(a, z, s, p, buf)).collect();
        return Ok((ksum(total), true));
    }
    if n > 62 {
        return Err(Error::Budget(format!("n={n} signs exceed the sampler")));
    }
    let mut buf = vec![0.0; d];
    let est = monte_carlo(plan, purpose, |rng| signed_pow(a, z, random_sign_index(rng, n), p, &mut buf));
    Ok((est.mean * (n as f64).exp2(), false))
}

/// Σ_δ‖Σ a_jδ_jz_j‖_p^p against (max|a_j|^p)·Σ_δ‖Σδ_jz_j‖_p^p in ℓ_p^d.
pub fn contraction_check(a: &[f64], z: &[Vec<f64>], p: f64, plan: &SamplePlan) -> Result<InequalityReport> {
    check_vectors(z)?;
    if a.len() != z.len() {
        return param(format!("{} coefficients for {} vectors", a.len(), z.len()));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return param(format!("p={p} must be a finite number ≥ 1"));
    }
    let ones = vec![1.0; z.len()];
    let (lhs, exact_l) = rademacher_pow_sum(a, z, p, plan, "contraction/scaled")?;
    let (base, exact_r) = rademacher_pow_sum(&ones, z, p, plan, "contraction/plain")?;
    let amax = a.iter().fold(0.0f64, |m, x| m.max(x.abs())).powf(p);
    let mut r = InequalityReport::new("contraction").param("p", p).param("n", z.len() as f64).rhs_term("scaled", amax * base);
    if !(exact_l && exact_r) {
        r = r.with_plan(*plan);
    }
    r.detail("max_abs_coefficient_pow", amax);
    let r = r.finish(lhs, Combine::Sum);
    let ok = r.holds(1e-10);
    let mut r = r;
    r.check("holds", ok);
    Ok(r)
}

/// The complex unit e^{πix/m} for x ∈ Z_2m.
fn unit(x: i64, m: usize) -> (f64, f64) {
    let (s, c) = (PI * x as f64 / m as f64).sin_cos();
    (c, s)
}

struct BridgeTerms {
    /// Σ_S Σ_δ Σ_x ‖Σ_{j∈S} δ_j e^{πix_j/m}(z_j,0)‖^p.
    set: f64,
    /// Σ_δ Σ_x Σ_ε ‖f_δ(x+ε) − f_δ(x)‖^p.
    diag: f64,
    /// Σ_δ Σ_x Σ_j ‖f_δ(x+e_j) − f_δ(x)‖^p.
    edge: f64,
    /// max over (x, ε) of Σ_δ ‖f_δ(x+ε) − f_δ(x)‖^p.
    diag_worst: f64,
    /// Σ_S Σ_δ ‖Σ_{j∈S} δ_j z_j‖^p.
    linear_set: f64,
    /// Σ_δ ‖Σ_j δ_j z_j‖^p.
    linear_diag: f64,
    jensen: bool,
    shift_residual: f64,
}

fn grid_point(mut idx: usize, n: usize, side: usize) -> Vec<i64> {
    let mut x = vec![0; n];
    for c in x.iter_mut().rev() {
        *c = (idx % side) as i64;
        idx /= side;
    }
    x
}

fn bridge_terms(z: &[Vec<f64>], m: usize, k: usize, p: f64, nodes: usize) -> Result<BridgeTerms> {
    let n = z.len();
    let side = 2 * m;
    let points = side.pow(n as u32);
    let signs = 1usize << n;
    let subsets: Vec<Vec<usize>> = Combinations::new(n, k).collect();
    let norm = |coeffs: &[(f64, f64)]| -> Result<f64> {
        let w = ComplexifiedVector::combination(coeffs, z, p)?;
        complexification_norm_pow(&w.u, &w.v, p, nodes)
    };

    let mut shift_residual = 0.0f64;
    for x in 0..side as i64 {
        let base = unit(x, m);
        for sigma in [-1i64, 1] {
            let moved = unit(x + sigma * m as i64, m);
            shift_residual = shift_residual.max((moved.0 - base.0 + 2.0 * base.0).abs()).max((moved.1 - base.1 + 2.0 * base.1).abs());
        }
    }

    // (set, diag, edge, diagonal gap per (x, ε) cell) for each sign pattern δ.
    type DeltaTerms = (f64, f64, f64, Vec<f64>);
    let per_delta: Vec<Result<DeltaTerms>> = (0..signs)
        .into_par_iter()
        .map(|delta| {
            let sgn = |j: usize| if delta >> j & 1 == 1 { -1.0 } else { 1.0 };
            let (mut set, mut diag, mut edge) = (KahanSum::new(), KahanSum::new(), KahanSum::new());
            let mut diag_cells = vec![0.0; points * signs];
            let mut coeffs = vec![(0.0, 0.0); n];
            for idx in 0..points {
                let x = grid_point(idx, n, side);
                for s in &subsets {
                    coeffs.iter_mut().for_each(|c| *c = (0.0, 0.0));
                    for &j in s {
                        let (c, si) = unit(x[j], m);
                        coeffs[j] = (sgn(j) * c, sgn(j) * si);
                    }
                    set.add(norm(&coeffs)?);
                }
                for (cell, eps) in diag_cells[idx * signs..(idx + 1) * signs].iter_mut().zip(0..signs) {
                    for j in 0..n {
                        let step = if eps >> j & 1 == 1 { -1 } else { 1 };
                        let (a, b) = (unit(x[j] + step, m), unit(x[j], m));
                        coeffs[j] = (sgn(j) * (a.0 - b.0), sgn(j) * (a.1 - b.1));
                    }
                    *cell = norm(&coeffs)?;
                    diag.add(*cell);
                }
                for j in 0..n {
                    coeffs.iter_mut().for_each(|c| *c = (0.0, 0.0));
                    let (a, b) = (unit(x[j] + 1, m), unit(x[j], m));
                    coeffs[j] = (sgn(j) * (a.0 - b.0), sgn(j) * (a.1 - b.1));
                    edge.add(norm(&coeffs)?);
                }
            }
            Ok((set.value(), diag.value(), edge.value(), diag_cells))
        })
        .collect();

    let (mut set, mut diag, mut edge) = (KahanSum::new(), KahanSum::new(), KahanSum::new());
    let mut cells = vec![0.0; points * signs];
    for r in per_delta {
        let (s, dg, e, c) = r?;
        set.add(s);
        diag.add(dg);
        edge.add(e);
        cells.iter_mut().zip(c).for_each(|(a, b)| *a += b);
    }

    let d = z[0].len();
    let mut buf = vec![0.0; d];
    let ones = vec![1.0; n];
    let linear_diag = ksum((0..signs).map(|s| signed_pow(&ones, z, s, p, &mut buf)));
    let mut linear_set = KahanSum::new();
    let mut jensen = true;
    let per_set_lower = (p + 1.0).exp2() * (side as f64).powi(n as i32) / PI.powf(p - 1.0);
    for s in &subsets {
        let mut restricted = vec![0.0; n];
        s.iter().for_each(|&j| restricted[j] = 1.0);
        let lin = ksum((0..signs).map(|sg| signed_pow(&restricted, z, sg, p, &mut buf)));
        linear_set.add(lin);
        let mut coeffs = vec![(0.0, 0.0); n];
        let mut complexified = KahanSum::new();
        for delta in 0..signs {
            for idx in 0..points {
                let x = grid_point(idx, n, side);
                for &j in s {
                    let sg = if delta >> j & 1 == 1 { -1.0 } else { 1.0 };
                    let (c, si) = unit(x[j], m);
                    coeffs[j] = (sg * c, sg * si);
                }
                complexified.add(norm(&coeffs)?);
            }
        }
        jensen &= complexified.value() >= per_set_lower * lin * (1.0 - 1e-9) - 1e-300;
    }

    Ok(BridgeTerms {
        set: set.value(),
        diag: diag.value(),
        edge: edge.value(),
        diag_worst: cells.iter().copied().fold(0.0, f64::max),
        linear_set: linear_set.value(),
        linear_diag,
        jensen,
        shift_residual,
    })
}

/// Runs the metric-to-linear argument on the family f_δ(x) = Σ_j δ_j e^{πix_j/m}(z_j, 0) over
/// Z_2m^n with values in the complexification of ℓ_p^d. The report's sides are the linear
/// inequality with the left side multiplied by (2/π)^{2p}γ, where γ is the largest constant
/// the family admits in the metric inequality; every intermediate bound is a named check.
pub fn bridge_report(z: &[Vec<f64>], m: usize, k: usize, p: f64, plan: &SamplePlan) -> Result<InequalityReport> {
    check_vectors(z)?;
    let n = z.len();
    if !(p >= 2.0 && p.is_finite()) {
        return param(format!("p={p} must be a finite number ≥ 2"));
    }
    if m == 0 {
        return param("m must be positive");
    }
    if k == 0 || k > n {
        return param(format!("k={k} must lie in 1..={n}"));
    }
    if n > 16 {
        return Err(Error::Budget(format!("n={n} is too large for the bridge enumeration")));
    }
    let points = ((2 * m) as u64).checked_pow(n as u32);
    let evaluations = points.and_then(|pts| pts.checked_mul(1u64 << n)).and_then(|v| v.checked_mul(binomial(n, k) * 2 + (1u64 << n) + n as u64));
    let cap = plan.budget.min(MAX_BRIDGE_EVALUATIONS);
    let evaluations = match evaluations {
        Some(e) if e <= cap => e,
        _ => return Err(Error::Budget(format!("bridge on Z_{}^{n} needs more than {cap} norm evaluations", 2 * m))),
    };

    let t = bridge_terms(z, m, k, p, DEFAULT_NODES)?;
    let (nf, kf, mf) = (n as f64, k as f64, m as f64);
    let frac = kf / nf;
    let signs = nf.exp2();
    let grid = (2.0 * mf).powi(n as i32);
    let subsets = binomial(n, k) as f64;
    let moment = circular_moment(p);

    // Metric inequality on the family, averaged over δ.
    let metric_lhs = (2.0f64).powf(p) * t.set / (signs * subsets * mf.powf(p)) / signs;
    let metric_edge = frac * t.edge / signs;
    let metric_diag = frac.powf(p / 2.0) * t.diag / (signs * signs);
    let metric_rhs = metric_edge + metric_diag;

    // Linear inequality.
    let linear_lhs = t.linear_set / (signs * subsets);
    let z_pow: f64 = z.iter().map(|v| lp_pow(v, p)).sum();
    let linear_edge = frac * z_pow;
    let linear_diag = frac.powf(p / 2.0) * t.linear_diag / signs;

    let step = ((1.0 - (PI / mf).cos()).powi(2) + (PI / mf).sin().powi(2)).sqrt();
    let z0_term = step.powf(p) * moment * z_pow;
    let z0_bound = PI.powf(p + 1.0) / mf.powf(p) * z_pow;
    let contraction_bound = 2.0 * PI.powf(p + 1.0) / mf.powf(p) * t.linear_diag;

    let mut r = InequalityReport::new("bridge")
        .param("p", p)
        .param("m", mf)
        .param("n", nf)
        .param("k", kf)
        .param("d", z[0].len() as f64)
        .rhs_term("edge", linear_edge)
        .rhs_term("diag", linear_diag);
    r.detail("metric_lhs", metric_lhs);
    r.detail("metric_edge", metric_edge);
    r.detail("metric_diag", metric_diag);
    r.detail("linear_lhs", linear_lhs);
    r.detail("circular_moment", moment);
    r.detail("z0_term", z0_term);
    r.detail("z0_bound", z0_bound);
    r.detail("contraction_worst", t.diag_worst);
    r.detail("contraction_bound", contraction_bound);
    r.detail("shift_residual", t.shift_residual);
    r.detail("norm_evaluations", evaluations as f64);

    let degenerate_family = metric_lhs.abs() < crate::report::DEGENERATE_TOL;
    let gamma = if degenerate_family { 0.0 } else { metric_rhs / metric_lhs };
    r.detail("gamma", gamma);
    let lhs = (2.0 / PI).powf(2.0 * p) * gamma * linear_lhs;

    let rel = |a: f64, b: f64| a <= b * (1.0 + 1e-9) + 1e-12;
    r.check("shift_identity", t.shift_residual < 1e-12);
    r.check("jensen", t.jensen);
    r.check("z0", rel(z0_term, z0_bound));
    r.check("edge_identity", (metric_edge - frac * grid * z0_term).abs() <= 1e-8 * metric_edge.abs().max(1e-300));
    r.check("contraction", rel(t.diag_worst, contraction_bound));
    let r = r.finish(lhs, Combine::Sum);
    let chain = r.holds(1e-9);
    let mut r = r;
    r.check("final_chain", chain);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_axis_norm() {
        let u = [1.0, -2.0, 0.5];
        let n = complexification_norm(&u, &[0.0; 3], 2.0, DEFAULT_NODES).unwrap();
        let l2 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((n - PI.sqrt() * l2).abs() < 1e-12);
        let swapped = complexification_norm(&[0.0; 3], &u, 2.0, DEFAULT_NODES).unwrap();
        assert!((n - swapped).abs() < 1e-12);
        assert!(complexification_norm(&u, &[0.0; 3], 2.0, 32).is_err());
    }

    #[test]
    fn circular_moment_values() {
        assert!((circular_moment(2.0) - PI).abs() < 1e-10);
        assert!((circular_moment(4.0) - 0.75 * PI).abs() < 1e-10);
        let r = circular_moment_report(3.0).unwrap();
        assert!((r.quadrature - r.gamma_form).abs() < 1e-10);
        assert!((r.ratio - 2.0).abs() < 1e-9);
        assert!(!r.matches_displayed);
    }

    #[test]
    fn contraction_equality_and_zero() {
        let z = vec![vec![1.0, 0.5], vec![-0.3, 2.0], vec![0.7, 0.1]];
        let plan = SamplePlan::exhaustive();
        let r = contraction_check(&[1.0; 3], &z, 3.0, &plan).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-12 * r.rhs);
        let r = contraction_check(&[0.0; 3], &z, 3.0, &plan).unwrap();
        assert_eq!(r.lhs, 0.0);
    }

    #[test]
    fn bridge_single_vector() {
        let r = bridge_report(&[vec![1.0]], 2, 1, 2.0, &SamplePlan::exhaustive()).unwrap();
        assert!(r.checks.values().all(|&c| c), "{:?}", r.checks);
        assert!(r.details["shift_residual"] < 1e-15);
    }

    #[test]
    fn bridge_zero_is_degenerate() {
        let r = bridge_report(&[vec![0.0], vec![0.0]], 2, 1, 4.0, &SamplePlan::exhaustive()).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.implied_constant, None);
    }
}
