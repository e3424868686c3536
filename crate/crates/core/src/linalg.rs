//! Dense matrices, symmetric matrices with a cached spectrum, and a cyclic Jacobi eigensolver.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

const JACOBI_TOL: f64 = 1e-13;
const JACOBI_SWEEPS: usize = 100;
const FRACTIONAL_CLIP: f64 = 1e-12;

/// Row-major dense real matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d, d);
        for i in 0..d {
            m.data[i * d + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return param("matrix rows must be non-empty and of equal length");
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return param("matrix entries must be finite");
        }
        Ok(Self { rows: r, cols: c, data: rows.concat() })
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn add_scaled(&self, other: &Mat, c: f64) -> Mat {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + c * b).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn scaled(&self, c: f64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| c * v).collect() }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Singular values, descending, as square roots of the spectrum of AᵀA.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let gram = SymMatrix::from_mat(&self.transpose().mul(self))?;
        Ok(gram.eigenvalues().iter().map(|v| v.max(0.0).sqrt()).collect())
    }
}

/// Spectral decomposition: eigenvalues descending, eigenvectors as the columns of `vectors`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

/// Real symmetric matrix with its spectrum computed once at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    entries: Mat,
    spectrum: Spectrum,
}

impl SymMatrix {
    /// Builds from the upper triangle of `m`; the lower triangle must agree to 1e-12 relative.
    pub fn from_mat(m: &Mat) -> Result<Self> {
        if m.rows != m.cols || m.rows == 0 {
            return param(format!("expected a non-empty square matrix, got {}x{}", m.rows, m.cols));
        }
        let d = m.rows;
        let scale = m.frobenius().max(f64::MIN_POSITIVE);
        let mut e = m.clone();
        for i in 0..d {
            for j in i + 1..d {
                if (m.get(i, j) - m.get(j, i)).abs() > 1e-12 * scale {
                    return param(format!("matrix is not symmetric at ({i}, {j})"));
                }
                e.set(j, i, m.get(i, j));
            }
        }
        if e.data.iter().any(|v| !v.is_finite()) {
            return param("matrix entries must be finite");
        }
        let spectrum = jacobi_eigen(&e)?;
        Ok(Self { entries: e, spectrum })
    }

    /// Builds from (M + Mᵀ)/2, for products that are symmetric up to rounding.
    pub fn symmetrized(m: &Mat) -> Result<Self> {
        if m.rows != m.cols {
            return param("expected a square matrix");
        }
        Self::from_mat(&m.add_scaled(&m.transpose(), 1.0).scaled(0.5))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_mat(&Mat::from_rows(rows)?)
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        let mut m = Mat::zeros(d, d);
        for (i, v) in diag.iter().enumerate() {
            m.set(i, i, *v);
        }
        Self::from_mat(&m)
    }

    pub fn identity(d: usize) -> Self {
        Self::from_mat(&Mat::identity(d)).expect("identity is symmetric")
    }

    /// V diag(values) Vᵀ with the given (orthonormal) eigenvectors, keeping them as the cache.
    pub fn from_spectrum(values: Vec<f64>, vectors: Mat) -> Self {
        let d = values.len();
        let mut m = Mat::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let v: f64 = (0..d).map(|k| vectors.get(i, k) * values[k] * vectors.get(j, k)).sum();
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let mut sorted = Mat::zeros(d, d);
        for (new, &old) in order.iter().enumerate() {
            for i in 0..d {
                sorted.set(i, new, vectors.get(i, old));
            }
        }
        let values = order.iter().map(|&i| values[i]).collect();
        Self { entries: m, spectrum: Spectrum { values, vectors: sorted } }
    }

    pub fn order(&self) -> usize {
        self.entries.rows
    }
    pub fn mat(&self) -> &Mat {
        &self.entries
    }
    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.values
    }
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }
    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.spectrum.values.last().expect("non-empty")
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.spectrum.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Minimum eigenvalue ≥ −tol·max|λ|.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol * self.max_abs_eigenvalue()
    }

    /// A^q by functional calculus. Integer exponents accept any symmetric input; fractional
    /// exponents clip eigenvalues in [−1e-12·λ_max, 0) to 0 and reject anything lower.
    pub fn power(&self, q: f64) -> Result<SymMatrix> {
        if !q.is_finite() {
            return param(format!("exponent {q} is not finite"));
        }
        let values: Vec<f64> = if q.fract() == 0.0 && q.abs() <= i32::MAX as f64 {
            let k = q as i32;
            if k < 0 && self.spectrum.values.contains(&0.0) {
                return Err(Error::Domain("negative power of a singular matrix".into()));
            }
            self.spectrum.values.iter().map(|v| v.powi(k)).collect()
        } else {
            let floor = -FRACTIONAL_CLIP * self.max_abs_eigenvalue();
            let mut out = Vec::with_capacity(self.order());
            for &v in &self.spectrum.values {
                if v < floor {
                    return Err(Error::Domain(format!("fractional power {q} of a matrix with eigenvalue {v:e}")));
                }
                let v = v.max(0.0);
                if v == 0.0 && q < 0.0 {
                    return Err(Error::Domain("negative power of a singular matrix".into()));
                }
                out.push(if v == 0.0 && q > 0.0 { 0.0 } else { v.powf(q) });
            }
            out
        };
        Ok(Self::from_spectrum(values, self.spectrum.vectors.clone()))
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.combine(other, 1.0, 1.0)
    }

    /// a·self + b·other.
    pub fn combine(&self, other: &SymMatrix, a: f64, b: f64) -> Result<SymMatrix> {
        if self.order() != other.order() {
            return param("matrix orders differ");
        }
        let data = self.entries.data.iter().zip(&other.entries.data).map(|(x, y)| a * x + b * y).collect();
        SymMatrix::from_mat(&Mat { rows: self.order(), cols: self.order(), data })
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        let values = self.spectrum.values.iter().map(|v| c * v).collect();
        let mut out = Self::from_spectrum(values, self.spectrum.vectors.clone());
        out.entries.data = self.entries.data.iter().map(|v| c * v).collect();
        out
    }

    /// wᵀ A w.
    pub fn quadratic_form(&self, w: &[f64]) -> f64 {
        let d = self.order();
        (0..d).map(|i| (0..d).map(|j| w[i] * self.get(i, j) * w[j]).sum::<f64>()).sum()
    }
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm is at most 1e-13·‖A‖_F.
pub fn jacobi_eigen(a: &Mat) -> Result<Spectrum> {
    let d = a.rows;
    let mut m = a.clone();
    let mut v = Mat::identity(d);
    let fro = a.frobenius();
    let off = |m: &Mat| {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    s += m.get(i, j) * m.get(i, j);
                }
            }
        }
        s.sqrt()
    };
    let mut converged = false;
    for _ in 0..JACOBI_SWEEPS {
        if off(&m) <= JACOBI_TOL * fro {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..d {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..d {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    if !converged && off(&m) > JACOBI_TOL * fro {
        return Err(Error::Numerical(format!("Jacobi iteration did not converge in {JACOBI_SWEEPS} sweeps")));
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| m.get(y, y).total_cmp(&m.get(x, x)));
    let values = order.iter().map(|&i| m.get(i, i)).collect();
    let mut vectors = Mat::zeros(d, d);
    for (new, &old) in order.iter().enumerate() {
        for i in 0..d {
            vectors.set(i, new, v.get(i, old));
        }
    }
    Ok(Spectrum { values, vectors })
}

/// d×d matrix of independent standard normals.
pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    let data = (0..rows * cols).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    Mat { rows, cols, data }
}

/// G Gᵀ / d with G standard Gaussian.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, d: usize) -> SymMatrix {
    let g = random_gaussian(rng, d, d);
    let mut m = g.mul(&g.transpose());
    m.data.iter_mut().for_each(|v| *v /= d as f64);
    SymMatrix::from_mat(&m).expect("Gram matrices are symmetric")
}

/// Random PSD matrix with a prescribed spectrum and Haar-like eigenvectors.
pub fn random_psd_with_spectrum<R: Rng + ?Sized>(rng: &mut R, spectrum: &[f64]) -> Result<SymMatrix> {
    if spectrum.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return param("spectrum profile must be finite and nonnegative");
    }
    let q = random_orthogonal(rng, spectrum.len());
    Ok(SymMatrix::from_spectrum(spectrum.to_vec(), q))
}

/// (G + Gᵀ)/2 with G standard Gaussian.
pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, d: usize) -> SymMatrix {
    let g = random_gaussian(rng, d, d);
    let m = g.add_scaled(&g.transpose(), 1.0);
    let data = m.data.iter().map(|v| 0.5 * v).collect();
    SymMatrix::from_mat(&Mat { rows: d, cols: d, data }).expect("symmetrized")
}

/// Orthogonal factor of a Gaussian matrix by modified Gram–Schmidt.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Mat {
    loop {
        let g = random_gaussian(rng, d, d);
        let mut cols: Vec<Vec<f64>> = (0..d).map(|j| (0..d).map(|i| g.get(i, j)).collect()).collect();
        let mut ok = true;
        for j in 0..d {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let dot: f64 = rest[0].iter().zip(&done[k]).map(|(a, b)| a * b).sum();
                rest[0].iter_mut().zip(&done[k]).for_each(|(a, b)| *a -= dot * b);
            }
            let norm = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            cols[j].iter_mut().for_each(|v| *v /= norm);
        }
        if ok {
            let mut q = Mat::zeros(d, d);
            for (j, col) in cols.iter().enumerate() {
                for (i, v) in col.iter().enumerate() {
                    q.set(i, j, *v);
                }
            }
            return q;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::seeded;

    fn residual(a: &SymMatrix) -> (f64, f64) {
        let s = a.spectrum();
        let d = a.order();
        let mut lam = Mat::zeros(d, d);
        for i in 0..d {
            lam.set(i, i, s.values[i]);
        }
        let av = a.mat().mul(&s.vectors);
        let vl = s.vectors.mul(&lam);
        let res = av.add_scaled(&vl, -1.0).frobenius();
        let orth = s.vectors.transpose().mul(&s.vectors).add_scaled(&Mat::identity(d), -1.0).frobenius();
        (res, orth)
    }

    #[test]
    fn diagonal_spectrum_is_sorted() {
        let a = SymMatrix::diagonal(&[1.0, 5.0, -2.0]).unwrap();
        assert_eq!(a.eigenvalues(), &[5.0, 1.0, -2.0]);
        assert!(SymMatrix::identity(4).eigenvalues().iter().all(|v| *v == 1.0));
    }

    #[test]
    fn random_residuals() {
        let mut rng = seeded(3);
        for d in 1..=8 {
            let a = random_symmetric(&mut rng, d);
            let (res, orth) = residual(&a);
            let fro = a.mat().frobenius();
            assert!(res <= 1e-10 * fro, "d={d} res={res}");
            assert!(orth <= 1e-10);
        }
    }

    #[test]
    fn rejects_asymmetric() {
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn fractional_power_domain() {
        let a = SymMatrix::diagonal(&[4.0, -1.0]).unwrap();
        assert!(a.power(0.5).is_err());
        assert_eq!(a.power(2.0).unwrap().eigenvalues(), &[16.0, 1.0]);
        let b = SymMatrix::diagonal(&[4.0, -1e-14]).unwrap();
        assert_eq!(b.power(0.5).unwrap().eigenvalues(), &[2.0, 0.0]);
    }

    #[test]
    fn orthogonal_is_orthogonal() {
        let q = random_orthogonal(&mut seeded(1), 6);
        let e = q.transpose().mul(&q).add_scaled(&Mat::identity(6), -1.0).frobenius();
        assert!(e < 1e-12);
    }
}
