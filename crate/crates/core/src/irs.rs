//! IRS phase-shift design and cascaded channel composition.

use num_complex::Complex;
use num_traits::Zero;

use crate::matgebra::{normalize_phase, svd, CMatrix, LinalgError};
use crate::scalar::{cis, Cx, Real};

/// Passive reflection profile: `reflection = diag(exp(j·omega))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile<T: Real> {
    pub omega: Vec<T>,
    pub reflection: CMatrix<T>,
    /// Set when a dominant singular value used by the design was repeated
    /// (within tolerance); the first vector was taken.
    pub degenerate: bool,
}

impl<T: Real> PhaseProfile<T> {
    pub fn from_omega(omega: Vec<T>) -> Self {
        let diag: Vec<Cx<T>> = omega.iter().map(|&w| cis(w)).collect();
        Self { reflection: CMatrix::diag(&diag), omega, degenerate: false }
    }

    /// All-zero phases: the IRS acts as a plain mirror.
    pub fn identity(elements: usize) -> Self {
        Self::from_omega(vec![T::zero(); elements])
    }

    pub fn elements(&self) -> usize {
        self.omega.len()
    }

    pub fn coefficient(&self, n: usize) -> Cx<T> {
        self.reflection[(n, n)]
    }
}

fn repeated_top<T: Real>(sigma: &[T]) -> bool {
    match sigma {
        [a, b, ..] => *a > T::zero() && (*a - *b) <= T::default_rank_tol() * *a,
        _ => false,
    }
}

/// Aligns the IRS to the dominant BS→IRS and IRS→UE1 modes:
/// `omega[n] = −arg(u[n] · conj(v[n]))` with `u` the dominant left singular
/// vector of `j` and `v` the dominant right singular vector of `g1`.
pub fn design_phase<T: Real>(j: &CMatrix<T>, g1: &CMatrix<T>) -> Result<PhaseProfile<T>, LinalgError> {
    if j.rows() != g1.cols() {
        return Err(LinalgError::DimensionMismatch { op: "design_phase", left: g1.shape(), right: j.shape() });
    }
    let fj = svd(j)?;
    let fg = svd(g1)?;
    let mut u = fj.u.col(0).to_vec();
    let mut v = fg.v.col(0).to_vec();
    normalize_phase(&mut u);
    normalize_phase(&mut v);
    let mut profile = phase_from_modes(&u, &v);
    profile.degenerate = repeated_top(&fj.singular_values) || repeated_top(&fg.singular_values);
    Ok(profile)
}

/// `omega[n] = −arg(u[n] · conj(v[n]))`.
pub fn phase_from_modes<T: Real>(u: &[Cx<T>], v: &[Cx<T>]) -> PhaseProfile<T> {
    PhaseProfile::from_omega(u.iter().zip(v).map(|(a, b)| -(a * b.conj()).arg()).collect())
}

/// `G · diag(reflection) · J`.
pub fn cascade<T: Real>(g: &CMatrix<T>, phase: &PhaseProfile<T>, j: &CMatrix<T>) -> Result<CMatrix<T>, LinalgError> {
    let n = phase.elements();
    if g.cols() != n || j.rows() != n {
        return Err(LinalgError::DimensionMismatch { op: "cascade", left: g.shape(), right: j.shape() });
    }
    let mut scaled = g.clone();
    for c in 0..n {
        let w = phase.coefficient(c);
        if w == Complex::zero() {
            continue;
        }
        for z in scaled.col_mut(c) {
            *z = *z * w;
        }
    }
    scaled.try_mul(j)
}
