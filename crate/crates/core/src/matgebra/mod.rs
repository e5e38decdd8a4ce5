//! Dense complex linear algebra: SVD, null and signal spaces, pseudo-inverse.

mod lu;
mod matrix;
mod svd;

pub use lu::{determinant, inverse, Lu};
pub use matrix::CMatrix;
pub use svd::{svd, SvdFactors};

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::scalar::{Cx, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix {rows}x{cols} has non-finite entries")]
    NonFinite { rows: usize, cols: usize },
    #[error("{op}: cannot form a {rows}x{cols} matrix from {got} entries")]
    Shape { op: &'static str, rows: usize, cols: usize, got: usize },
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    DimensionMismatch { op: &'static str, left: (usize, usize), right: (usize, usize) },
    #[error("SVD of {rows}x{cols} matrix did not converge in {sweeps} sweeps (condition estimate {condition:.3e})")]
    NoConvergence { rows: usize, cols: usize, sweeps: usize, condition: f64 },
    #[error("{rows}x{cols} matrix has no null space at the requested rank tolerance")]
    NoNullSpace { rows: usize, cols: usize },
    #[error("{n}x{n} matrix is singular")]
    Singular { n: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

/// Orthonormal basis of the right null space of `a`.
///
/// Keeps the right singular vectors whose singular value is at most
/// `rank_tol · σ_max`, plus every right vector beyond `min(rows, cols)`.
pub fn null_space_basis<T: Real>(a: &CMatrix<T>, rank_tol: T) -> Result<CMatrix<T>, LinalgError> {
    if !(rank_tol > T::zero()) {
        return Err(LinalgError::InvalidArgument("rank tolerance must be positive"));
    }
    let f = svd(a)?;
    let cut = rank_tol * f.sigma_max();
    let keep: Vec<usize> = (0..a.cols())
        .filter(|&j| j >= f.rank_count() || f.singular_values[j] <= cut)
        .collect();
    if keep.is_empty() {
        return Err(LinalgError::NoNullSpace { rows: a.rows(), cols: a.cols() });
    }
    Ok(f.v.select_cols(&keep))
}

/// Moore-Penrose pseudo-inverse (cols × rows).
pub fn pseudo_inverse<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>, LinalgError> {
    let f = svd(a)?;
    let (m, n) = a.shape();
    let cut = f.sigma_max() * T::epsilon() * T::lit(m.max(n) as f64);
    let mut out = CMatrix::zeros(n, m);
    for (j, &s) in f.singular_values.iter().enumerate() {
        if !(s > cut) {
            continue;
        }
        let inv = s.recip();
        let (vj, uj) = (f.v.col(j), f.u.col(j));
        for c in 0..m {
            let w = uj[c].conj() * inv;
            for (r, &vr) in vj.iter().enumerate() {
                out[(r, c)] = out[(r, c)] + vr * w;
            }
        }
    }
    Ok(out)
}

/// Rotates `x` by a global phase so its first significant entry is real
/// and positive.
pub fn normalize_phase<T: Real>(x: &mut [Cx<T>]) {
    let peak = x.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    let cut = peak * T::lit(1e3) * T::epsilon();
    if let Some(first) = x.iter().find(|z| z.norm() > cut).copied() {
        let rot = first.conj() / first.norm();
        for z in x.iter_mut() {
            *z = *z * rot;
        }
    }
}

/// Matrix with i.i.d. CN(0, 1) entries.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix<T> {
    let half = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(T::lit(re * half), T::lit(im * half))
    })
}
