//! Poincaré-type functionals on tori and hypercubes, each returning an [`InequalityReport`].

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::families::random_grid;
use crate::lattice::{gap_moment_estimate, norm_pow, subset_gap_moment, Displacement, GridFunction, SignLaw};
use crate::operators::{box_average, edge_average, signs_of, BoxAverageKind, EdgeAverageKind, HypercubeFunction};
use crate::report::{Combine, InequalityReport};
use crate::sampling::{monte_carlo, random_sign_index, subset_average, Estimate, KahanSum, SamplePlan};

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return param(format!("subset size k={k} must lie in 1..={n}"));
    }
    Ok(())
}

fn moment(f: &GridFunction, disp: Displacement, law: SignLaw, power: f64, plan: &SamplePlan, purpose: &str) -> Result<Estimate> {
    gap_moment_estimate(f, &disp, law, power, plan, purpose)
}

fn record_error(report: &mut InequalityReport, name: &str, est: &Estimate) {
    if !est.exhaustive {
        report.detail(&format!("{name}_std_err"), est.std_err);
    }
}

/// Subset-averaged ‖f(x + 2mε_S) − f(x)‖^p / m^p against the edge and diagonal moments, on Z_4m^n.
pub fn metric_xp_report(f: &GridFunction, k: usize, plan: &SamplePlan) -> Result<InequalityReport> {
    let modulus = f.modulus();
    if modulus % 4 != 0 {
        return param(format!("metric X_p needs a modulus divisible by 4, got {modulus}"));
    }
    let (n, p) = (f.dim(), f.value_p());
    check_k(n, k)?;
    let m = (modulus / 4) as f64;
    let frac = k as f64 / n as f64;

    let set = subset_gap_moment(f, k, 2 * (modulus / 4) as i64, p, plan, "metric-xp/set")?.scaled(m.powf(-p));
    let mut edge_sum = 0.0;
    let mut edge_var = 0.0;
    for j in 0..n {
        let e = moment(f, Displacement::Edge(j), SignLaw::Rademacher, p, plan, &format!("metric-xp/edge/{j}"))?;
        edge_sum += e.mean;
        edge_var += e.std_err * e.std_err;
    }
    let diag = moment(f, Displacement::Diagonal, SignLaw::Rademacher, p, plan, "metric-xp/diag")?;

    let mut r = InequalityReport::new("metric-xp")
        .param("p", p)
        .param("m", m)
        .param("n", n as f64)
        .param("k", k as f64)
        .rhs_term("edge", frac * edge_sum)
        .rhs_term("diag", frac.powf(p / 2.0) * diag.mean)
        .with_plan(*plan);
    record_error(&mut r, "lhs", &set);
    if !plan.is_exhaustive() {
        r.detail("edge_std_err", frac * edge_var.sqrt());
        r.detail("diag_std_err", frac.powf(p / 2.0) * diag.std_err);
    }
    let nf = n as f64;
    let threshold = nf.powf(1.5) * p.ln().max(0.0) / (k as f64).sqrt() + p * nf;
    if m < threshold {
        r.warn(format!("m={m} is below the scale hypothesis n^(3/2) log(p)/sqrt(k) + pn = {threshold:.4}"));
    }
    let weak = nf.powf(1.5) / (k as f64).sqrt();
    if m < weak {
        r.warn(format!("m={m} is below the weaker scale n^(3/2)/sqrt(k) = {weak:.4}"));
    }
    Ok(r.finish(set.mean, Combine::Sum))
}

/// Converse of the metric functional on Z_8m^n: half-period coordinate shifts plus the
/// symmetric diagonal, against p^{p/2} times the subset-averaged unit shifts.
pub fn reverse_metric_xp_report(f: &GridFunction, k: usize, plan: &SamplePlan) -> Result<InequalityReport> {
    let modulus = f.modulus();
    if modulus % 8 != 0 {
        return param(format!("reverse metric X_p needs a modulus divisible by 8, got {modulus}"));
    }
    let (n, p) = (f.dim(), f.value_p());
    check_k(n, k)?;
    let m = modulus / 8;
    let mf = m as f64;
    let frac = k as f64 / n as f64;

    let mut cot = 0.0;
    for j in 0..n {
        let mut v = vec![0i64; n];
        v[j] = 4 * m as i64;
        cot += moment(f, Displacement::FixedShift(v), SignLaw::Rademacher, p, plan, &format!("reverse-xp/half/{j}"))?.mean;
    }
    let cotype = frac * cot / mf.powf(p);
    let sym = moment(f, Displacement::SymmetricDiagonal, SignLaw::Rademacher, p, plan, "reverse-xp/sym")?;
    let typ = frac.powf(p / 2.0) * sym.mean;
    let set = subset_gap_moment(f, k, 1, p, plan, "reverse-xp/set")?;
    let rhs = p.powf(p / 2.0) * set.mean;

    let mut r = InequalityReport::new("reverse-metric-xp")
        .param("p", p)
        .param("m", mf)
        .param("n", n as f64)
        .param("k", k as f64)
        .lhs_term("cotype", cotype)
        .lhs_term("type", typ)
        .rhs_term("set", rhs)
        .with_plan(*plan);
    record_error(&mut r, "set", &set.scaled(p.powf(p / 2.0)));
    if rhs > 0.0 {
        r.detail("cotype_half", cotype / rhs);
        r.detail("type_half", typ / rhs);
    }
    let threshold = (k as f64).powf(1.0 / p) / p.sqrt();
    if mf < threshold {
        r.warn(format!("m={m} is below the scale hypothesis k^(1/p)/sqrt(p) = {threshold:.4}"));
    }
    Ok(r.finish_terms(Combine::Sum))
}

/// Which right-hand comparison term a linear functional reports next to the ℓ_p term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearMode {
    #[default]
    Rademacher,
    SquareFunction,
}

/// Moments shared by the linear, vector and Schatten functionals.
pub(crate) struct LinearMoments {
    pub set: Estimate,
    pub ell_p: f64,
    pub rademacher: Estimate,
}

/// Evaluates E_S E_ε N(Σ_{j∈S} ε_j a_j), Σ_j N(a_j) and E_ε N(Σ_j ε_j a_j), where N is the
/// p-th power of the norm.
pub(crate) fn linear_moments<N>(items: &[Vec<f64>], k: usize, plan: &SamplePlan, tag: &str, norm_p: N) -> Result<LinearMoments>
where
    N: Fn(&[f64]) -> f64,
{
    let n = items.len();
    if n == 0 {
        return param("at least one coefficient is required");
    }
    check_k(n, k)?;
    let len = items[0].len();
    if items.iter().any(|a| a.len() != len) {
        return param("coefficients must share one dimension");
    }
    if items.iter().flatten().any(|v| !v.is_finite()) {
        return param("coefficients must be finite");
    }
    let mut buf = vec![0.0; len];
    let set = subset_average(
        n,
        k,
        plan,
        &format!("{tag}/set"),
        |s| {
            let mut acc = KahanSum::new();
            for mask in 0..1usize << s.len() {
                signed_sum(items, s.iter().enumerate().map(|(b, &j)| (j, sign_bit(mask, b))), &mut buf);
                acc.add(norm_p(&buf));
            }
            Ok(acc.value() / (1usize << s.len()) as f64)
        },
        |s, rng| {
            let mut signs = vec![0.0; s.len()];
            fill_signs(rng, &mut signs);
            let mut local = vec![0.0; len];
            signed_sum(items, s.iter().copied().zip(signs), &mut local);
            norm_p(&local)
        },
    )?;
    let ell_p = items.iter().map(|a| norm_p(a)).collect::<KahanSum>().value();
    let rademacher = if plan.is_exhaustive() {
        if n >= 40 {
            return Err(Error::Budget(format!("2^{n} sign patterns cannot be enumerated")));
        }
        let mut acc = KahanSum::new();
        for mask in 0..1usize << n {
            signed_sum(items, (0..n).map(|j| (j, sign_bit(mask, j))), &mut buf);
            acc.add(norm_p(&buf));
        }
        Estimate::exact(acc.value() / (1usize << n) as f64, 1 << n)
    } else {
        monte_carlo(plan, &format!("{tag}/rademacher"), |rng| {
            let mut signs = vec![0.0; n];
            fill_signs(rng, &mut signs);
            signed_sum(items, signs.into_iter().enumerate(), &mut buf);
            norm_p(&buf)
        })
    };
    Ok(LinearMoments { set, ell_p, rademacher })
}

fn sign_bit(mask: usize, b: usize) -> f64 {
    if mask >> b & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn fill_signs<R: rand::Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for chunk in out.chunks_mut(64) {
        let mask = random_sign_index(rng, chunk.len());
        for (b, v) in chunk.iter_mut().enumerate() {
            *v = sign_bit(mask, b);
        }
    }
}

fn signed_sum<I: Iterator<Item = (usize, f64)>>(items: &[Vec<f64>], signs: I, buf: &mut [f64]) {
    buf.fill(0.0);
    for (j, s) in signs {
        for (b, a) in buf.iter_mut().zip(&items[j]) {
            *b += s * a;
        }
    }
}

fn scalar_norm_p(p: f64) -> impl Fn(&[f64]) -> f64 {
    move |v: &[f64]| if v.len() == 1 { v[0].abs().powf(p) } else { norm_pow(v, p, p) }
}

fn check_linear_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return param(format!("exponent p={p} must be a finite number ≥ 1"));
    }
    Ok(())
}

/// Coordinatewise square function Σ_c (Σ_j a_{jc}²)^{p/2}.
pub fn square_function(items: &[Vec<f64>], p: f64) -> f64 {
    let len = items.first().map_or(0, Vec::len);
    (0..len).map(|c| items.iter().map(|a| a[c] * a[c]).sum::<f64>().powf(p / 2.0)).sum()
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn build_linear_report(
    name: &str,
    mom: &LinearMoments,
    n: usize,
    k: usize,
    p: f64,
    square: Option<f64>,
    mode: LinearMode,
    plan: &SamplePlan,
) -> Result<InequalityReport> {
    let frac = k as f64 / n as f64;
    let mut r = InequalityReport::new(name)
        .param("p", p)
        .param("n", n as f64)
        .param("k", k as f64)
        .rhs_term("ell_p", frac * mom.ell_p)
        .with_plan(*plan);
    let rad = frac.powf(p / 2.0) * mom.rademacher.mean;
    match mode {
        LinearMode::Rademacher => {
            r = r.rhs_term("rademacher", rad);
        }
        LinearMode::SquareFunction => {
            let sq = square.ok_or_else(|| Error::Parameter("square-function mode is not defined for these coefficients".into()))?;
            r = r.rhs_term("square", frac.powf(p / 2.0) * sq);
            r.detail("rademacher", rad);
        }
    }
    if let Some(sq) = square {
        let sq = frac.powf(p / 2.0) * sq;
        r.detail("square_function", sq);
        if plan.is_exhaustive() && p >= 2.0 {
            r.check("jensen", sq <= rad * (1.0 + 1e-12) + 1e-300);
        }
    }
    record_error(&mut r, "lhs", &mom.set);
    if !mom.rademacher.exhaustive {
        r.detail("rademacher_std_err", frac.powf(p / 2.0) * mom.rademacher.std_err);
    }
    if p < 2.0 {
        r.warn(format!("p={p} is below 2, where the inequality is not expected to hold"));
    }
    Ok(r.finish(mom.set.mean, Combine::Sum))
}

/// E_S E_ε ‖Σ_{j∈S} ε_j a_j‖_p^p against (k/n)Σ‖a_j‖_p^p and (k/n)^{p/2} E‖Σ ε_j a_j‖_p^p.
/// Scalars are one-element vectors.
pub fn linear_xp_report(a: &[Vec<f64>], k: usize, p: f64, mode: LinearMode, plan: &SamplePlan) -> Result<InequalityReport> {
    check_linear_p(p)?;
    let mom = linear_moments(a, k, plan, "linear-xp", scalar_norm_p(p))?;
    build_linear_report("linear-xp", &mom, a.len(), k, p, Some(square_function(a, p)), mode, plan)
}

/// Scalar convenience for [`linear_xp_report`].
pub fn linear_xp_scalar(a: &[f64], k: usize, p: f64, plan: &SamplePlan) -> Result<InequalityReport> {
    let items: Vec<Vec<f64>> = a.iter().map(|&v| vec![v]).collect();
    linear_xp_report(&items, k, p, LinearMode::Rademacher, plan)
}

/// The converse: ℓ_p plus Rademacher terms against the subset average.
pub fn reverse_linear_xp_report(a: &[Vec<f64>], k: usize, p: f64, plan: &SamplePlan) -> Result<InequalityReport> {
    check_linear_p(p)?;
    let mom = linear_moments(a, k, plan, "reverse-linear-xp", scalar_norm_p(p))?;
    let n = a.len();
    let frac = k as f64 / n as f64;
    let mut r = InequalityReport::new("reverse-linear-xp")
        .param("p", p)
        .param("n", n as f64)
        .param("k", k as f64)
        .lhs_term("ell_p", frac * mom.ell_p)
        .lhs_term("rademacher", frac.powf(p / 2.0) * mom.rademacher.mean)
        .rhs_term("set", mom.set.mean)
        .with_plan(*plan);
    record_error(&mut r, "set", &mom.set);
    Ok(r.finish_terms(Combine::Sum))
}

/// Hypercube smoothness inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SmoothnessKind {
    /// E d(h(ε), h(−ε))^r against Σ_j E d(h(ε), h(σ^j ε))^r.
    Enflo { r: f64 },
    /// Σ_ε d(h(ε), h(−ε))^p against n^{p/q−1} Σ_j Σ_ε d(h(σ^j ε), h(ε))^p.
    Bmw { q: f64, p: f64 },
    /// E ‖h(ε) − h(−ε)‖^p against E_{ε,δ} ‖Σ_j δ_j [h(σ^j ε) − h(ε)]‖^p.
    Pisier { p: f64 },
}

pub fn smoothness_report(h: &HypercubeFunction, kind: SmoothnessKind) -> Result<InequalityReport> {
    let n = h.dim();
    let size = h.len();
    let antipodal = |power: f64| (0..size).map(|i| h.gap(i, h.antipode(i), power)).collect::<KahanSum>().value();
    let flips = |power: f64| {
        (0..n)
            .flat_map(|j| (0..size).map(move |i| (i, j)))
            .map(|(i, j)| h.gap(i, HypercubeFunction::flip(i, j), power))
            .collect::<KahanSum>()
            .value()
    };
    let positive = |name: &str, v: f64| if v > 0.0 && v.is_finite() { Ok(()) } else { param(format!("{name}={v} must be positive")) };
    let sz = size as f64;
    let r = match kind {
        SmoothnessKind::Enflo { r } => {
            positive("r", r)?;
            InequalityReport::new("enflo").param("r", r).param("n", n as f64).rhs_term("edges", flips(r) / sz).finish(antipodal(r) / sz, Combine::Sum)
        }
        SmoothnessKind::Bmw { q, p } => {
            positive("q", q)?;
            positive("p", p)?;
            let scale = (n as f64).powf(p / q - 1.0);
            InequalityReport::new("bmw")
                .param("q", q)
                .param("p", p)
                .param("n", n as f64)
                .rhs_term("edges", scale * flips(p))
                .finish(antipodal(p), Combine::Sum)
        }
        SmoothnessKind::Pisier { p } => {
            positive("p", p)?;
            if n > 13 {
                return Err(Error::Budget(format!("the Pisier average needs 4^{n} evaluations")));
            }
            let d = h.value_dim();
            let vp = h.value_p();
            let mut diffs = vec![0.0; n * d];
            let mut acc = KahanSum::new();
            let mut sum = vec![0.0; d];
            let mut delta = vec![0i64; n];
            for i in 0..size {
                for j in 0..n {
                    let a = h.value(HypercubeFunction::flip(i, j));
                    let b = h.value(i);
                    for c in 0..d {
                        diffs[j * d + c] = a[c] - b[c];
                    }
                }
                for dm in 0..size {
                    signs_of(dm, &mut delta);
                    sum.fill(0.0);
                    for j in 0..n {
                        for c in 0..d {
                            sum[c] += delta[j] as f64 * diffs[j * d + c];
                        }
                    }
                    acc.add(norm_pow(&sum, vp, p));
                }
            }
            InequalityReport::new("pisier")
                .param("p", p)
                .param("n", n as f64)
                .rhs_term("rademacher", acc.value() / (sz * sz))
                .finish(antipodal(p) / sz, Combine::Sum)
        }
    };
    Ok(r)
}

/// Sign law and period conventions of the two cotype functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CotypeVariant {
    /// Z_2m^n, shifts by m e_j, ε uniform on {−1,0,1}^n.
    ThreeLetter,
    /// Z_8m^n, shifts by 4m e_j, ε uniform on {−1,1}^n.
    Rademacher,
}

/// Σ_j E d(f(x + shift·e_j), f(x))^s / m^s against E d(f(x + ε), f(x))^s.
pub fn cotype_report(f: &GridFunction, s: f64, variant: CotypeVariant, plan: &SamplePlan) -> Result<InequalityReport> {
    if !(s > 0.0 && s.is_finite()) {
        return param(format!("cotype exponent s={s} must be positive"));
    }
    let modulus = f.modulus();
    let (period, law, name) = match variant {
        CotypeVariant::ThreeLetter => (2, SignLaw::Ternary, "cotype-three-letter"),
        CotypeVariant::Rademacher => (8, SignLaw::Rademacher, "cotype-rademacher"),
    };
    if modulus % period != 0 {
        return param(format!("{name} needs a modulus divisible by {period}, got {modulus}"));
    }
    let m = modulus / period;
    let shift = match variant {
        CotypeVariant::ThreeLetter => m,
        CotypeVariant::Rademacher => 4 * m,
    } as i64;
    let n = f.dim();
    let mut half = 0.0;
    for j in 0..n {
        let mut v = vec![0i64; n];
        v[j] = shift;
        half += moment(f, Displacement::FixedShift(v), SignLaw::Rademacher, s, plan, &format!("{name}/half/{j}"))?.mean;
    }
    let diag = moment(f, Displacement::Diagonal, law, s, plan, &format!("{name}/diag"))?;
    let mut r = InequalityReport::new(name)
        .param("s", s)
        .param("m", m as f64)
        .param("n", n as f64)
        .rhs_term("diag", diag.mean)
        .with_plan(*plan);
    record_error(&mut r, "diag", &diag);
    Ok(r.finish(half / (m as f64).powf(s), Combine::Sum))
}

/// Scalar smoothing probe: antipodal differences of the full edge average against the
/// Rademacher sum of partial averages plus the edge energy. Exhaustive only.
pub fn convolution_probe(f: &GridFunction) -> Result<InequalityReport> {
    if f.value_dim() != 1 {
        return param("the convolution probe takes scalar functions (d = 1)");
    }
    let n = f.dim();
    let p = f.value_p();
    if n > 20 {
        return Err(Error::Budget(format!("2^{n} sign patterns cannot be enumerated")));
    }
    let torus = f.torus();
    let size = f.len();
    let exact = SamplePlan::exhaustive();
    let full = edge_average(f, EdgeAverageKind::CalE)?;
    let lhs = moment(&full, Displacement::SymmetricDiagonal, SignLaw::Rademacher, p, &exact, "")?.mean * size as f64;

    let partial: Vec<GridFunction> = (0..n).map(|j| edge_average(f, EdgeAverageKind::CalEj(j))).collect::<Result<_>>()?;
    let mut x = vec![0usize; n];
    let mut g = vec![0.0; n];
    let mut e = vec![0i64; n];
    let mut rad = KahanSum::new();
    for idx in 0..size {
        torus.coords(idx, &mut x);
        for j in 0..n {
            e.fill(0);
            e[j] = 1;
            let plus = partial[j].value(torus.shifted(&x, &e))[0];
            e[j] = -1;
            let minus = partial[j].value(torus.shifted(&x, &e))[0];
            g[j] = plus - minus;
        }
        for mask in 0..1usize << n {
            let s: f64 = g.iter().enumerate().map(|(j, v)| if mask >> j & 1 == 0 { *v } else { -*v }).sum();
            rad.add(s.abs().powf(p));
        }
    }
    let rad = rad.value() / (1usize << n) as f64;
    let mut edge = 0.0;
    for j in 0..n {
        edge += moment(f, Displacement::Edge(j), SignLaw::Rademacher, p, &exact, "")?.mean * size as f64;
    }
    let mut r = InequalityReport::new("convolution-probe")
        .param("p", p)
        .param("m", f.modulus() as f64)
        .param("n", n as f64)
        .rhs_term("rad", rad)
        .rhs_term("edge", edge)
        .with_plan(exact);
    if lhs > 1e-12 * (rad + edge) {
        r.detail("beta_bound", (rad + edge) / lhs);
    }
    Ok(r.finish(lhs, Combine::Sum))
}

/// Runs the probe on `trials` seeded random functions and returns the report with the
/// smallest β bound, annotated with the search metadata.
pub fn convolution_search(modulus: usize, n: usize, p: f64, trials: usize, seed: u64) -> Result<InequalityReport> {
    if trials == 0 {
        return param("search needs at least one trial");
    }
    let reports: Vec<Result<InequalityReport>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| convolution_probe(&random_grid(modulus, n, 1, p, seed.wrapping_add(t))?))
        .collect();
    let mut best: Option<(u64, InequalityReport)> = None;
    for (t, rep) in reports.into_iter().enumerate() {
        let rep = rep?;
        let Some(b) = rep.details.get("beta_bound").copied() else { continue };
        if best.as_ref().map_or(true, |(_, cur)| b < cur.details["beta_bound"]) {
            best = Some((t as u64, rep));
        }
    }
    let (t, mut rep) = best.ok_or_else(|| Error::Numerical("every trial was degenerate".into()))?;
    rep.functional = "convolution-search".into();
    rep.params.insert("trials".into(), trials as f64);
    rep.params.insert("seed".into(), seed as f64);
    rep.detail("best_trial", t as f64);
    Ok(rep)
}

/// The embedding x ↦ (e^{πi x_j / m})_j of Z_2m^n into ℓ_2^n(ℂ) stored as 2n reals.
pub fn exponential_embedding(m: usize, n: usize, p: f64) -> Result<GridFunction> {
    if m == 0 {
        return param("m must be positive");
    }
    GridFunction::from_fn(2 * m, n, 2 * n, 2.0, |x, out| {
        for (j, &c) in x.iter().enumerate() {
            let t = PI * c as f64 / m as f64;
            out[2 * j] = t.cos();
            out[2 * j + 1] = t.sin();
        }
    })
    .and_then(|g| if p >= 1.0 { Ok(g) } else { param(format!("p={p} must be ≥ 1")) })
}

/// The metric functional evaluated on the untruncated exponential embedding of Z_2m^n,
/// with distances in ℓ_2 raised to the power p.
pub fn scaling_witness_report(m: usize, n: usize, k: usize, p: f64, plan: &SamplePlan) -> Result<InequalityReport> {
    check_k(n, k)?;
    let g = exponential_embedding(m, n, p)?;
    let frac = k as f64 / n as f64;
    let mf = m as f64;
    let set = subset_gap_moment(&g, k, m as i64, p, plan, "scaling/set")?;
    let mut edge = 0.0;
    for j in 0..n {
        edge += moment(&g, Displacement::Edge(j), SignLaw::Rademacher, p, plan, &format!("scaling/edge/{j}"))?.mean;
    }
    let diag = moment(&g, Displacement::Diagonal, SignLaw::Rademacher, p, plan, "scaling/diag")?;
    let mut r = InequalityReport::new("scaling-witness")
        .param("p", p)
        .param("m", mf)
        .param("n", n as f64)
        .param("k", k as f64)
        .rhs_term("edge", frac * edge)
        .rhs_term("diag", frac.powf(p / 2.0) * diag.mean)
        .with_plan(*plan);
    r.detail("set_moment", set.mean);
    r.detail("set_moment_exact", (2.0 * (k as f64).sqrt()).powf(p));
    r.detail("edge_moment_exact", 2f64.powf(p) * (PI / (2.0 * mf)).sin().powf(p));
    r.note("a half-period shift negates every shifted coordinate, so the shifted-set moment is (2 sqrt k)^p for every m");
    Ok(r.finish(set.mean / mf.powf(p), Combine::Sum))
}

/// Σ_x ‖f(x) − D_S f(x)‖^p against R^p Σ_x E‖f(x + ε) − f(x)‖^p and Σ_x E‖f(x + ε_S) − f(x)‖^p.
pub fn displacement_report(f: &GridFunction, set: &[usize], radius: usize) -> Result<InequalityReport> {
    let g = box_average(f, &BoxAverageKind::DS(set.to_vec()), radius)?;
    let p = f.value_p();
    let lhs = (0..f.len())
        .map(|i| crate::lattice::diff_norm_pow(f.value(i), g.value(i), p, p))
        .collect::<KahanSum>()
        .value();
    let exact = SamplePlan::exhaustive();
    let size = f.len() as f64;
    let diag = moment(f, Displacement::Diagonal, SignLaw::Rademacher, p, &exact, "")?.mean * size;
    let shifted = moment(f, Displacement::ShiftedSet { set: set.to_vec(), scale: 1 }, SignLaw::Rademacher, p, &exact, "")?.mean * size;
    let rf = radius as f64;
    Ok(InequalityReport::new("displacement")
        .param("p", p)
        .param("R", rf)
        .param("m", (f.modulus() / 4) as f64)
        .param("n", f.dim() as f64)
        .param("set_size", set.len() as f64)
        .rhs_term("diag", rf.powf(p) * diag)
        .rhs_term("set", shifted)
        .with_plan(exact)
        .finish(lhs, Combine::Sum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{cosine_grid, indicator_grid, random_hypercube};

    #[test]
    fn metric_indicator_example() {
        let f = indicator_grid(4, 1, 2.0).unwrap();
        let r = metric_xp_report(&f, 1, &SamplePlan::exhaustive()).unwrap();
        assert_eq!(r.lhs, 0.5);
        assert_eq!(r.rhs_terms["edge"], 0.5);
        assert_eq!(r.rhs_terms["diag"], 0.5);
        assert_eq!(r.implied_constant, Some(0.5));
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn linear_examples() {
        let plan = SamplePlan::exhaustive();
        let r = linear_xp_scalar(&[1.0, 1.0], 1, 4.0, &plan).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert_eq!(r.rhs_terms["ell_p"], 1.0);
        assert_eq!(r.rhs_terms["rademacher"], 2.0);
        let r = linear_xp_scalar(&[3.0], 1, 3.0, &plan).unwrap();
        assert_eq!(r.lhs, 27.0);
        assert_eq!(r.rhs_terms["ell_p"], 27.0);
        let rev = reverse_linear_xp_report(&[vec![1.0]], 1, 3.0, &plan).unwrap();
        assert_eq!(rev.lhs, 2.0);
        assert_eq!(rev.rhs, 1.0);
        assert_eq!(rev.implied_constant, Some(2.0));
        assert!(reverse_linear_xp_report(&[vec![0.0], vec![0.0]], 1, 3.0, &plan).unwrap().degenerate);
        assert!(linear_xp_scalar(&[], 1, 4.0, &plan).is_err());
    }

    #[test]
    fn enflo_single_coordinate() {
        let h = HypercubeFunction::from_fn(3, 1, 2.0, |e, out| out[0] = e[0] as f64).unwrap();
        let r = smoothness_report(&h, SmoothnessKind::Enflo { r: 2.0 }).unwrap();
        assert_eq!((r.lhs, r.rhs, r.implied_constant), (4.0, 4.0, Some(1.0)));
        let c = HypercubeFunction::from_fn(3, 1, 2.0, |_, out| out[0] = 1.0).unwrap();
        assert!(smoothness_report(&c, SmoothnessKind::Pisier { p: 2.0 }).unwrap().degenerate);
    }

    #[test]
    fn enflo_two_scalar_bound() {
        for seed in 0..20 {
            let h = random_hypercube(4, 1, 2.0, seed).unwrap();
            let r = smoothness_report(&h, SmoothnessKind::Enflo { r: 2.0 }).unwrap();
            assert!(r.implied_constant.unwrap() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn three_letter_cosine_example() {
        let f = cosine_grid(4, 1, 2, 2.0).unwrap();
        let r = cotype_report(&f, 2.0, CotypeVariant::ThreeLetter, &SamplePlan::exhaustive()).unwrap();
        assert!((r.lhs - 0.5).abs() < 1e-15);
        assert!((r.rhs - 2.0 / 3.0).abs() < 1e-15);
        assert!(cotype_report(&f, 2.0, CotypeVariant::Rademacher, &SamplePlan::exhaustive()).is_err());
    }

    #[test]
    fn scaling_witness_set_moment() {
        let r = scaling_witness_report(3, 3, 2, 3.0, &SamplePlan::exhaustive()).unwrap();
        let (got, want) = (r.details["set_moment"], r.details["set_moment_exact"]);
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn displacement_identity_support() {
        let f = random_grid(4, 2, 1, 2.0, 8).unwrap();
        let r = displacement_report(&f, &[0, 1], 1).unwrap();
        assert_eq!(r.lhs, 0.0);
        let r = displacement_report(&f, &[0], 1).unwrap();
        assert!(r.implied_constant.unwrap().is_finite());
    }

    #[test]
    fn probe_degenerate_on_constants() {
        let c = GridFunction::from_fn(4, 2, 1, 3.0, |_, o| o[0] = 2.0).unwrap();
        let r = convolution_probe(&c).unwrap();
        assert!(r.degenerate);
        let on_four = random_grid(4, 2, 1, 3.0, 5).unwrap();
        let r = convolution_probe(&on_four).unwrap();
        assert!(r.lhs < 1e-12 * r.rhs && !r.details.contains_key("beta_bound"));
        assert!(convolution_search(4, 2, 3.0, 4, 1).is_err());
        assert!(convolution_search(8, 2, 3.0, 8, 1).unwrap().details["beta_bound"] > 0.0);
    }
}
