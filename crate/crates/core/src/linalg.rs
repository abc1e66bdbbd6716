//! Thin dense linear-algebra layer over `faer`.
//!
//! Everything in the crate works with complex matrices; real data is simply
//! carried with zero imaginary parts.

use faer::Mat;
pub use faer::c64;

use crate::error::{Error, Result};

/// Dense column-major complex matrix.
pub type CMat = Mat<c64>;

/// Thin singular value decomposition `X = U diag(s) V*`, singular values in
/// nonincreasing order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn svd(x: &CMat) -> Result<Svd> {
    let dec = x
        .thin_svd()
        .map_err(|e| Error::LinAlg(format!("svd did not converge: {e:?}")))?;
    let s = dec.S().column_vector().iter().map(|z| z.re).collect();
    Ok(Svd {
        u: dec.U().to_owned(),
        s,
        v: dec.V().to_owned(),
    })
}

pub fn singular_values(x: &CMat) -> Result<Vec<f64>> {
    x.singular_values()
        .map_err(|e| Error::LinAlg(format!("svd did not converge: {e:?}")))
}

/// General (non-Hermitian) eigendecomposition `K W = W diag(lambda)`.
///
/// Eigenvectors are scaled to unit 2-norm.
pub fn eig(k: &CMat) -> Result<(Vec<c64>, CMat)> {
    assert_eq!(k.nrows(), k.ncols());
    let dec = k
        .eigen()
        .map_err(|e| Error::LinAlg(format!("eigendecomposition failed: {e:?}")))?;
    let vals: Vec<c64> = dec.S().column_vector().iter().copied().collect();
    let mut vecs = dec.U().to_owned();
    for j in 0..vecs.ncols() {
        let norm = vecs.col(j).norm_l2();
        if norm > 0.0 {
            for i in 0..vecs.nrows() {
                vecs[(i, j)] /= norm;
            }
        }
    }
    Ok((vals, vecs))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig(h: &CMat) -> Result<(Vec<f64>, CMat)> {
    let dec = h
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::LinAlg(format!("hermitian eigendecomposition failed: {e:?}")))?;
    let vals = dec.S().column_vector().iter().map(|z| z.re).collect();
    Ok((vals, dec.U().to_owned()))
}

/// Minimum-norm least-squares solution of `A x = b` through the SVD,
/// discarding singular values below `rcond * s_max`.
pub fn lstsq(a: &CMat, b: &[c64], rcond: f64) -> Result<Vec<c64>> {
    assert_eq!(a.nrows(), b.len());
    let Svd { u, s, v } = svd(a)?;
    let cutoff = s.first().copied().unwrap_or(0.0) * rcond;
    let mut x = vec![c64::new(0.0, 0.0); a.ncols()];
    for (k, &sk) in s.iter().enumerate() {
        if sk <= cutoff || sk == 0.0 {
            continue;
        }
        let mut coef = c64::new(0.0, 0.0);
        for i in 0..u.nrows() {
            coef += u[(i, k)].conj() * b[i];
        }
        coef /= sk;
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += v[(j, k)] * coef;
        }
    }
    Ok(x)
}

/// Moore-Penrose pseudoinverse with relative cutoff `rcond`.
pub fn pinv(a: &CMat, rcond: f64) -> Result<CMat> {
    let Svd { u, s, v } = svd(a)?;
    let cutoff = s.first().copied().unwrap_or(0.0) * rcond;
    let mut out = CMat::zeros(a.ncols(), a.nrows());
    for (k, &sk) in s.iter().enumerate() {
        if sk <= cutoff || sk == 0.0 {
            continue;
        }
        for j in 0..a.nrows() {
            let uc = u[(j, k)].conj() / sk;
            for i in 0..a.ncols() {
                out[(i, j)] += v[(i, k)] * uc;
            }
        }
    }
    Ok(out)
}

pub fn frobenius(a: &CMat) -> f64 {
    a.norm_l2()
}

/// Largest singular value.
pub fn spectral_norm(a: &CMat) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint().to_owned()
}

pub fn matvec(a: &CMat, x: &[c64]) -> Vec<c64> {
    assert_eq!(a.ncols(), x.len());
    let mut y = vec![c64::new(0.0, 0.0); a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == c64::new(0.0, 0.0) {
            continue;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += a[(i, j)] * xj;
        }
    }
    y
}

pub fn identity(n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| {
        if i == j {
            c64::new(1.0, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    })
}

pub fn vec_norm(x: &[c64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest elementwise modulus of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}
