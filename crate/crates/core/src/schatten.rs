//! Schatten norms, trace inequalities for positive semidefinite pairs, the 2×2 failure of
//! PSD subadditivity, and noncommutative X_p and Khinchine reports.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::inequalities::{build_linear_report, linear_moments};
use crate::linalg::{Mat, SymMatrix};
use crate::report::{Combine, InequalityReport};
use crate::sampling::{ksum, subset_average, KahanSum, SamplePlan};

const PSD_TOL: f64 = 1e-10;

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return param(format!("Schatten exponent p={p} must be a finite number ≥ 1"));
    }
    Ok(())
}

fn require_psd(a: &SymMatrix, name: &str) -> Result<()> {
    if a.is_psd(PSD_TOL) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} is not positive semidefinite (min eigenvalue {:e})", a.min_eigenvalue())))
    }
}

/// (Σ|λ_i|^p)^{1/p}.
pub fn schatten_norm(a: &SymMatrix, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(ksum(a.eigenvalues().iter().map(|v| v.abs().powf(p))).powf(1.0 / p))
}

/// ‖A‖_{S_p}^p for a general square matrix; 1×1 input returns |a|^p directly.
pub fn schatten_pow(a: &Mat, p: f64) -> Result<f64> {
    if a.data.len() == 1 {
        return Ok(a.data[0].abs().powf(p));
    }
    Ok(ksum(a.singular_values()?.iter().map(|s| s.powf(p))))
}

/// tr(A^q).
pub fn trace_power(a: &SymMatrix, q: f64) -> Result<f64> {
    Ok(ksum(a.power(q)?.eigenvalues().iter().copied()))
}

/// tr(A^q B).
pub fn trace_mixed(a: &SymMatrix, b: &SymMatrix, q: f64) -> Result<f64> {
    if a.order() != b.order() {
        return param("matrix orders differ");
    }
    Ok(trace_product(a.power(q)?.mat(), b.mat()))
}

/// tr(XY) without forming the product.
pub fn trace_product(x: &Mat, y: &Mat) -> f64 {
    let d = x.rows;
    ksum((0..d).flat_map(|i| (0..d).map(move |k| x.get(i, k) * y.get(k, i))))
}

/// The trace inequalities for a pair of PSD matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TraceKind {
    /// (tr((A+B)^q A))^{1/q} ≤ (tr A^{q+1})^{1/q} + (tr B^q A)^{1/q}, q ≥ 1.
    MainQge1,
    /// tr((A+B)^q A) ≤ tr A^{q+1} + tr B^q A, 0 < q < 1.
    Qlt1,
    /// tr((A+B)^{q−1} A) ≤ min_λ tr(A^q)/λ^r + tr(B^{q−1}A)/(1−λ)^r with r = max{q−2, 0}.
    LambdaFamily,
    /// |tr(A^{a_0} B^{b_1} A^{a_1} ⋯ B^{b_k})| ≤ (tr A^{q+1})^{1−Σb/q} (tr B^q A)^{Σb/q}.
    Holder { a: Vec<f64>, b: Vec<f64> },
    /// tr((XYX)^r) ≤ tr(X^r Y^r X^r) with r = q ≥ 1.
    LiebThirring,
    /// A^θ/s^{θ−1} + B^θ/(1−s)^{θ−1} − (A+B)^θ ⪰ 0 with θ = q ∈ [1, 2].
    OpConvex { s: f64 },
}

impl TraceKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::MainQge1 => "trace-main",
            Self::Qlt1 => "trace-small-q",
            Self::LambdaFamily => "trace-lambda",
            Self::Holder { .. } => "trace-holder",
            Self::LiebThirring => "lieb-thirring",
            Self::OpConvex { .. } => "operator-convexity",
        }
    }
}

/// Grid points used by the λ-family minimization besides the closed-form optimizer.
pub const LAMBDA_GRID: usize = 1025;

/// min over λ ∈ (0,1) of X/λ^r + Y/(1−λ)^r: the minimum over a uniform grid and the
/// stationary point λ* = X^{1/(r+1)} / (X^{1/(r+1)} + Y^{1/(r+1)}).
pub fn lambda_minimum(x: f64, y: f64, r: f64) -> (f64, f64) {
    let f = |l: f64| x / l.powf(r) + y / (1.0 - l).powf(r);
    if r == 0.0 {
        return (x + y, 0.5);
    }
    let mut best = (f64::INFINITY, 0.5);
    for i in 1..=LAMBDA_GRID {
        let l = i as f64 / (LAMBDA_GRID + 1) as f64;
        let v = f(l);
        if v < best.0 {
            best = (v, l);
        }
    }
    let (xa, ya) = (x.powf(1.0 / (r + 1.0)), y.powf(1.0 / (r + 1.0)));
    if xa + ya > 0.0 {
        let l = xa / (xa + ya);
        if l > 0.0 && l < 1.0 {
            let v = f(l);
            if v < best.0 {
                best = (v, l);
            }
        }
    }
    best
}

pub fn trace_inequality_report(a: &SymMatrix, b: &SymMatrix, q: f64, kind: &TraceKind) -> Result<InequalityReport> {
    if a.order() != b.order() {
        return param("matrix orders differ");
    }
    if !q.is_finite() {
        return param(format!("exponent {q} is not finite"));
    }
    require_psd(a, "A")?;
    require_psd(b, "B")?;
    let base = InequalityReport::new(kind.name()).param("q", q).param("d", a.order() as f64);
    let report = match kind {
        TraceKind::MainQge1 => {
            if q < 1.0 {
                return param(format!("q={q} must be ≥ 1"));
            }
            let lhs = trace_mixed(&a.add(b)?, a, q)?.max(0.0).powf(1.0 / q);
            base.rhs_term("a_term", trace_power(a, q + 1.0)?.max(0.0).powf(1.0 / q))
                .rhs_term("b_term", trace_mixed(b, a, q)?.max(0.0).powf(1.0 / q))
                .finish(lhs, Combine::Sum)
        }
        TraceKind::Qlt1 => {
            if !(q > 0.0 && q < 1.0) {
                return param(format!("q={q} must lie in (0, 1)"));
            }
            let lhs = trace_mixed(&a.add(b)?, a, q)?;
            base.rhs_term("a_term", trace_power(a, q + 1.0)?).rhs_term("b_term", trace_mixed(b, a, q)?).finish(lhs, Combine::Sum)
        }
        TraceKind::LambdaFamily => {
            if q < 1.0 {
                return param(format!("q={q} must be ≥ 1"));
            }
            let r = (q - 2.0).max(0.0);
            let lhs = trace_mixed(&a.add(b)?, a, q - 1.0)?;
            let x = trace_power(a, q)?;
            let y = trace_mixed(b, a, q - 1.0)?;
            let (min, lambda) = lambda_minimum(x, y, r);
            let mut rep = base.param("r", r).rhs_term("lambda_min", min);
            rep.detail("lambda", lambda);
            rep.detail("a_term", x);
            rep.detail("b_term", y);
            if r > 0.0 {
                rep.detail("closed_form_min", (x.powf(1.0 / (r + 1.0)) + y.powf(1.0 / (r + 1.0))).powf(r + 1.0));
            }
            rep.finish(lhs, Combine::Sum)
        }
        TraceKind::Holder { a: ea, b: eb } => holder_report(base, a, b, q, ea, eb)?,
        TraceKind::LiebThirring => {
            if q < 1.0 {
                return param(format!("r={q} must be ≥ 1"));
            }
            let xyx = SymMatrix::symmetrized(&a.mat().mul(b.mat()).mul(a.mat()))?;
            let lhs = trace_power(&xyx, q)?;
            let xr = a.power(q)?;
            let rhs = trace_product(&xr.mat().mul(b.power(q)?.mat()), xr.mat());
            base.rhs_term("rhs", rhs).finish(lhs, Combine::Sum)
        }
        TraceKind::OpConvex { s } => {
            if !(1.0..=2.0).contains(&q) {
                return param(format!("theta={q} must lie in [1, 2]"));
            }
            if !(*s > 0.0 && *s < 1.0) {
                return param(format!("s={s} must lie in (0, 1)"));
            }
            let left = a.add(b)?.power(q)?;
            let right = a.power(q)?.combine(&b.power(q)?, s.powf(1.0 - q), (1.0 - s).powf(1.0 - q))?;
            let diff = right.combine(&left, 1.0, -1.0)?;
            let w: Vec<f64> = (0..diff.order()).map(|i| diff.spectrum().vectors.get(i, diff.order() - 1)).collect();
            let mut rep = base.param("s", *s).rhs_term("rhs", right.quadratic_form(&w));
            rep.detail("min_eigenvalue", diff.min_eigenvalue());
            rep.detail("scale", right.max_abs_eigenvalue().max(left.max_abs_eigenvalue()));
            rep.finish(left.quadratic_form(&w), Combine::Sum)
        }
    };
    Ok(report)
}

fn holder_report(base: InequalityReport, a: &SymMatrix, b: &SymMatrix, q: f64, ea: &[f64], eb: &[f64]) -> Result<InequalityReport> {
    let k = ea.len();
    if k == 0 || eb.len() != k {
        return param("the word needs k ≥ 1 exponents for A and k for B");
    }
    if q <= 0.0 {
        return param(format!("q={q} must be positive"));
    }
    if ea.iter().chain(eb).any(|v| !(*v >= 0.0 && v.is_finite())) {
        return param("word exponents must be finite and nonnegative");
    }
    let total: f64 = ea.iter().chain(eb).sum();
    if (total - (q + 1.0)).abs() > 1e-12 * (q + 1.0) {
        return param(format!("word exponents sum to {total}, expected q + 1 = {}", q + 1.0));
    }
    // b_0 is identified with b_k; b here is 0-based, so b_j in the constraint is eb[j-1].
    for j in 0..k {
        let bj = if j == 0 { eb[k - 1] } else { eb[j - 1] };
        if bj + eb[j] > 2.0 * q * ea[j] + 1e-12 {
            return param(format!("adjacent B exponents around a_{j} exceed 2q a_{j}"));
        }
    }
    let d = a.order();
    let mut word = Mat::identity(d);
    for j in 0..k {
        word = word.mul(a.power(ea[j])?.mat()).mul(b.power(eb[j])?.mat());
    }
    let sb: f64 = eb.iter().sum();
    let ta = trace_power(a, q + 1.0)?.max(0.0);
    let tb = trace_mixed(b, a, q)?.max(0.0);
    let mut rep = base.rhs_term("rhs", ta.powf(1.0 - sb / q) * tb.powf(sb / q));
    rep.detail("trace", word.trace());
    Ok(rep.finish(word.trace().abs(), Combine::Sum))
}

/// Output of the 2×2 PSD-subadditivity counterexample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdCounterexample {
    pub s: f64,
    pub q: f64,
    pub k: f64,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub w: Vec<f64>,
    /// ⟨(K(A^q + B^q) − (A+B)^q) w, w⟩.
    pub form: f64,
    /// Smallest eigenvalue of K(A^q + B^q) − (A+B)^q.
    pub min_eigenvalue: f64,
    /// Whether the integer-exponent polynomial route was used.
    pub exact: bool,
}

type Poly = Vec<f64>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &Poly, b: &Poly, c: f64) -> Poly {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += c * y;
    }
    out
}

fn poly_eval(a: &Poly, s: f64) -> f64 {
    let mut acc = KahanSum::new();
    let mut pow = 1.0;
    for c in a {
        if *c != 0.0 {
            acc.add(c * pow);
        }
        pow *= s;
    }
    acc.value()
}

type PolyMat = [[Poly; 2]; 2];

fn polymat_mul(x: &PolyMat, y: &PolyMat) -> PolyMat {
    let entry = |i: usize, j: usize| poly_add(&poly_mul(&x[i][0], &y[0][j]), &poly_mul(&x[i][1], &y[1][j]), 1.0);
    [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]]
}

fn polymat_pow(x: &PolyMat, q: u32) -> PolyMat {
    let mut out: PolyMat = [[vec![1.0], vec![0.0]], [vec![0.0], vec![1.0]]];
    for _ in 0..q {
        out = polymat_mul(&out, x);
    }
    out
}

fn sym2_min_eigenvalue(m: [[f64; 2]; 2]) -> f64 {
    let half_tr = 0.5 * (m[0][0] + m[1][1]);
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    half_tr - half_diff.hypot(m[0][1])
}

/// A_s = diag(s², 0), B_s = [[1, s], [s, s²]], w_s = (−s, 1). Integer q ≤ 32 is evaluated
/// through exact integer polynomials in s, so the cancellation in the form costs nothing.
pub fn psd_counterexample(s: f64, q: f64, k: f64) -> Result<PsdCounterexample> {
    if !(s > 0.0 && s.is_finite()) || !(q > 0.0 && q.is_finite()) || !k.is_finite() {
        return param("s and q must be positive and K finite");
    }
    let a = vec![vec![s * s, 0.0], vec![0.0, 0.0]];
    let b = vec![vec![1.0, s], vec![s, s * s]];
    let w = vec![-s, 1.0];
    let exact = q.fract() == 0.0 && q <= 32.0;
    let (form, matrix) = if exact {
        let qi = q as u32;
        // A^q = s^{2q} e_1 e_1ᵀ and B w = 0, so B^q contributes nothing to the form.
        let sum: PolyMat = [[vec![1.0, 0.0, 1.0], vec![0.0, 1.0]], [vec![0.0, 1.0], vec![0.0, 0.0, 1.0]]];
        let bmat: PolyMat = [[vec![1.0], vec![0.0, 1.0]], [vec![0.0, 1.0], vec![0.0, 0.0, 1.0]]];
        let pow_sum = polymat_pow(&sum, qi);
        let pow_b = polymat_pow(&bmat, qi);
        let mut a_pow = vec![0.0; 2 * qi as usize + 1];
        a_pow[2 * qi as usize] = 1.0;
        let s2 = vec![0.0, 0.0, 1.0];
        let s1 = vec![0.0, 1.0];
        let form_of = |m: &PolyMat| poly_add(&poly_add(&poly_mul(&s2, &m[0][0]), &poly_mul(&s1, &m[0][1]), -2.0), &m[1][1], 1.0);
        let k_part = poly_add(&poly_mul(&s2, &a_pow), &form_of(&pow_b), 1.0);
        let form_poly = poly_add(&k_part.iter().map(|c| k * c).collect(), &form_of(&pow_sum), -1.0);
        let mut m = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let ap = if i == 0 && j == 0 { poly_eval(&a_pow, s) } else { 0.0 };
                m[i][j] = k * (ap + poly_eval(&pow_b[i][j], s)) - poly_eval(&pow_sum[i][j], s);
            }
        }
        (poly_eval(&form_poly, s), m)
    } else {
        let am = SymMatrix::from_rows(&a)?;
        let bm = SymMatrix::from_rows(&b)?;
        let right = am.power(q)?.combine(&bm.power(q)?, k, k)?;
        let diff = right.combine(&am.add(&bm)?.power(q)?, 1.0, -1.0)?;
        let m = [[diff.get(0, 0), diff.get(0, 1)], [diff.get(1, 0), diff.get(1, 1)]];
        (diff.quadratic_form(&w), m)
    };
    Ok(PsdCounterexample { s, q, k, a, b, w, form, min_eigenvalue: sym2_min_eigenvalue(matrix), exact })
}

/// Subset-averaged sign sums of matrices in S_p against the ℓ_p and Rademacher terms.
pub fn schatten_xp_report(mats: &[Mat], k: usize, p: f64, plan: &SamplePlan) -> Result<InequalityReport> {
    check_p(p)?;
    let d = square_order(mats)?;
    let items: Vec<Vec<f64>> = mats.iter().map(|m| m.data.clone()).collect();
    let mom = linear_moments(&items, k, plan, "schatten-xp", |v| {
        if v.len() == 1 {
            v[0].abs().powf(p)
        } else {
            schatten_pow(&Mat { rows: d, cols: d, data: v.to_vec() }, p).unwrap_or(f64::NAN)
        }
    })?;
    if mom.set.mean.is_nan() || mom.rademacher.mean.is_nan() || mom.ell_p.is_nan() {
        return Err(Error::Numerical("eigensolver failed inside the Schatten report".into()));
    }
    let mut r = build_linear_report("linear-xp", &mom, mats.len(), k, p, None, Default::default(), plan)?;
    r.functional = "schatten-xp".into();
    r.params.insert("d".into(), d as f64);
    Ok(r)
}

fn square_order(mats: &[Mat]) -> Result<usize> {
    let first = mats.first().ok_or_else(|| Error::Parameter("at least one matrix is required".into()))?;
    let d = first.rows;
    if mats.iter().any(|m| m.rows != d || m.cols != d) {
        return param("matrices must be square and of equal order");
    }
    Ok(d)
}

/// Subset-averaged tr((Σ_{j∈S} B_j)^q) against max{(k/n)Σ tr B_j^q, (k/n)^q tr((Σ B_j)^q)}.
pub fn psd_xp_report(mats: &[SymMatrix], k: usize, q: f64, plan: &SamplePlan) -> Result<InequalityReport> {
    if !(q >= 1.0 && q.is_finite()) {
        return param(format!("q={q} must be a finite number ≥ 1"));
    }
    let n = mats.len();
    if n == 0 {
        return param("at least one matrix is required");
    }
    let d = mats[0].order();
    if mats.iter().any(|m| m.order() != d) {
        return param("matrices must share one order");
    }
    for (j, m) in mats.iter().enumerate() {
        require_psd(m, &format!("B_{j}"))?;
    }
    let sum_of = |set: &[usize]| -> Result<SymMatrix> {
        let mut acc = Mat::zeros(d, d);
        for &j in set {
            acc = acc.add_scaled(mats[j].mat(), 1.0);
        }
        SymMatrix::from_mat(&acc)
    };
    let mut failure = None;
    let est = subset_average(
        n,
        k,
        plan,
        "psd-xp/set",
        |s| trace_power(&sum_of(s)?, q),
        |s, _| match sum_of(s).and_then(|m| trace_power(&m, q)) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let frac = k as f64 / n as f64;
    let singles = mats.iter().map(|m| trace_power(m, q)).collect::<Result<Vec<_>>>()?;
    let all: Vec<usize> = (0..n).collect();
    let total = trace_power(&sum_of(&all)?, q)?;
    let mut r = InequalityReport::new("psd-xp")
        .param("q", q)
        .param("n", n as f64)
        .param("k", k as f64)
        .param("d", d as f64)
        .rhs_term("singles", frac * ksum(singles))
        .rhs_term("total", frac.powf(q) * total)
        .with_plan(*plan);
    if !est.exhaustive {
        r.detail("lhs_std_err", est.std_err);
    }
    r.detail("reference_factor", (4.0 * q / (2.0 * q).ln()).powf(q));
    Ok(r.finish(est.mean, Combine::Max))
}

/// E‖Σ ε_j A_j‖_{S_p}^p against the column and row square functions
/// tr((Σ A_jᵀA_j)^{p/2}) and tr((Σ A_jA_jᵀ)^{p/2}).
pub fn khinchine_report(mats: &[Mat], p: f64, plan: &SamplePlan) -> Result<InequalityReport> {
    check_p(p)?;
    let d = square_order(mats)?;
    let n = mats.len();
    let items: Vec<Vec<f64>> = mats.iter().map(|m| m.data.clone()).collect();
    let mom = linear_moments(&items, n, plan, "khinchine", |v| {
        schatten_pow(&Mat { rows: d, cols: d, data: v.to_vec() }, p).unwrap_or(f64::NAN)
    })?;
    let mut col = Mat::zeros(d, d);
    let mut row = Mat::zeros(d, d);
    for m in mats {
        col = col.add_scaled(&m.transpose().mul(m), 1.0);
        row = row.add_scaled(&m.mul(&m.transpose()), 1.0);
    }
    let column = trace_power(&SymMatrix::from_mat(&col)?, p / 2.0)?;
    let rows = trace_power(&SymMatrix::from_mat(&row)?, p / 2.0)?;
    let lhs = mom.rademacher.mean;
    if lhs.is_nan() {
        return Err(Error::Numerical("eigensolver failed inside the Khinchine report".into()));
    }
    let mut r = InequalityReport::new("khinchine")
        .param("p", p)
        .param("n", n as f64)
        .param("d", d as f64)
        .rhs_term("column", column)
        .rhs_term("row", rows)
        .with_plan(*plan);
    if lhs > 0.0 {
        r.detail("reverse_ratio", (column + rows) / lhs);
    }
    if !mom.rademacher.exhaustive {
        r.detail("lhs_std_err", mom.rademacher.std_err);
    }
    Ok(r.finish(lhs, Combine::Sum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::seeded;
    use crate::linalg::random_psd;

    #[test]
    fn norm_examples() {
        let a = SymMatrix::diagonal(&[3.0, 4.0]).unwrap();
        assert!((schatten_norm(&a, 2.0).unwrap() - 5.0).abs() < 1e-15);
        let i = SymMatrix::identity(5);
        assert!((schatten_norm(&i, 3.0).unwrap() - 5f64.powf(1.0 / 3.0)).abs() < 1e-15);
        let b = SymMatrix::diagonal(&[1.0, 2.0]).unwrap();
        assert!((trace_mixed(&a, &b, 2.0).unwrap() - (9.0 + 32.0)).abs() < 1e-12);
    }

    #[test]
    fn main_inequality_equality_cases() {
        let a = random_psd(&mut seeded(2), 4);
        let zero = SymMatrix::diagonal(&[0.0; 4]).unwrap();
        let r = trace_inequality_report(&a, &zero, 2.5, &TraceKind::MainQge1).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-10 * r.rhs);
        let r = trace_inequality_report(&a, &a, 3.0, &TraceKind::MainQge1).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-10 * r.rhs);
    }

    #[test]
    fn counterexample_closed_form() {
        for s in [0.5, 0.1, 0.01] {
            let c = psd_counterexample(s, 4.0, 2.0).unwrap();
            let want = -s.powi(6) - 3.0 * s.powi(8) + s.powi(10);
            assert!((c.form - want).abs() <= 1e-12 * want.abs(), "s={s}: {} vs {want}", c.form);
        }
        assert!(psd_counterexample(0.1, 4.0, 2.0).unwrap().min_eigenvalue < 0.0);
    }

    #[test]
    fn lambda_minimum_matches_closed_form() {
        let (v, l) = lambda_minimum(2.0, 5.0, 1.5);
        let closed = (2f64.powf(0.4) + 5f64.powf(0.4)).powf(2.5);
        assert!((v - closed).abs() < 1e-12 * closed);
        assert!(l > 0.0 && l < 1.0);
    }
}
