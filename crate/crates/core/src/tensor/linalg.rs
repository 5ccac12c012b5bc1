//! Dense complex linear algebra on top of `nalgebra`.
//!
//! Everything is expressed in one fixed computational basis: vectorization,
//! transposition, complex conjugation and the teleportation maps all refer to
//! it.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Relative cutoff below which an eigenvalue counts as zero.
pub const RANK_TOL: f64 = 1e-10;
/// Absolute Hermiticity tolerance accepted by the eigensolver.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn hermiticity_defect(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.adjoint()))
}

/// `max |U†U - I|`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(u.adjoint() * u - CMat::identity(u.nrows(), u.ncols())))
}

pub fn ensure_unitary(u: &CMat, tol: f64) -> Result<()> {
    let defect = unitarity_defect(u);
    if defect > tol {
        return Err(Error::NotUnitary(defect));
    }
    Ok(())
}

/// Row-major Kronecker product, `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// `|A⟩⟩ = Σ_nm ⟨n|A|m⟩ |n⟩|m⟩`.
pub fn vectorize(a: &CMat) -> Result<CVec> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    Ok(vectorize_rect(a))
}

/// Row-major flattening of a possibly rectangular matrix: the output index is
/// the row (first factor) and the input index the column (second factor).
pub fn vectorize_rect(a: &CMat) -> CVec {
    let (r, c) = a.shape();
    CVec::from_fn(r * c, |k, _| a[(k / c, k % c)])
}

pub fn devectorize(v: &CVec, d: usize) -> Result<CMat> {
    if v.len() != d * d {
        return Err(Error::DimensionMismatch(format!("vector of length {} is not a {d}x{d} matrix", v.len())));
    }
    Ok(CMat::from_fn(d, d, |n, m| v[n * d + m]))
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues ascending and the
/// matching orthonormal eigenvectors as columns.
pub fn herm_eig(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    let scale = max_abs(a).max(1.0);
    let defect = hermiticity_defect(a);
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(defect));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }
    // symmetrize so the solver sees an exactly Hermitian input
    let sym = (a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok((values, vectors))
}

/// Exponents supported by [`psd_power`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsdExponent {
    Sqrt,
    InvSqrt,
}

impl PsdExponent {
    fn apply(self, lambda: f64) -> f64 {
        match self {
            PsdExponent::Sqrt => lambda.sqrt(),
            PsdExponent::InvSqrt => 1.0 / lambda.sqrt(),
        }
    }
}

/// Spectrum of a positive semidefinite matrix with its numerical support.
#[derive(Clone, Debug)]
pub struct PsdSpectrum {
    pub values: Vec<f64>,
    pub vectors: CMat,
    /// Eigenvalues at or below this are treated as zero.
    pub cutoff: f64,
}

impl PsdSpectrum {
    pub fn new(a: &CMat, tol: f64) -> Result<Self> {
        let (values, vectors) = herm_eig(a)?;
        let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if let Some(&min) = values.first() {
            if min < -tol * top {
                return Err(Error::NotPositive(min));
            }
        }
        Ok(Self { values, vectors, cutoff: tol * top })
    }

    fn support_indices(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&k| self.values[k] > self.cutoff).collect()
    }

    pub fn rank(&self) -> usize {
        self.support_indices().len()
    }

    /// Orthonormal basis of the support, as columns.
    pub fn support_basis(&self) -> CMat {
        let idx = self.support_indices();
        let n = self.vectors.nrows();
        CMat::from_fn(n, idx.len(), |r, k| self.vectors[(r, idx[k])])
    }

    pub fn support_projector(&self) -> CMat {
        let b = self.support_basis();
        &b * b.adjoint()
    }

    /// Spectral function of the support part; the kernel maps to zero.
    pub fn power(&self, exponent: PsdExponent) -> CMat {
        let idx = self.support_indices();
        let n = self.vectors.nrows();
        let mut out = CMat::zeros(n, n);
        for &k in &idx {
            let w = exponent.apply(self.values[k]);
            let v = self.vectors.column(k);
            out += (v * v.adjoint()).scale(w);
        }
        out
    }
}

/// `A^{±1/2}` restricted to the support of `A`.
pub fn psd_power(a: &CMat, exponent: PsdExponent, tol: f64) -> Result<CMat> {
    Ok(PsdSpectrum::new(a, tol)?.power(exponent))
}
