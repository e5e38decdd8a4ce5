//! One-sided (Hestenes) Jacobi SVD for dense complex matrices.
//!
//! Columns of a working copy of `A` are rotated pairwise until they are
//! mutually orthogonal; the accumulated rotations form a full unitary `V`
//! (n×n), so right vectors of zero singular values come out of the same
//! iteration that produces the signal space. Accuracy is at the level of the
//! unit roundoff relative to `‖A‖`, which is what the null-space design needs.

use num_complex::Complex;
use num_traits::Zero;

use super::matrix::{dot_conj, norm_sqr, CMatrix};
use super::LinalgError;
use crate::scalar::{Cx, Real};

const MAX_SWEEPS: usize = 60;

/// `A = U · diag(σ) · V_kᴴ` where `V_k` is the first `k = min(rows, cols)`
/// columns of the full unitary `v`.
#[derive(Debug, Clone)]
pub struct SvdFactors<T: Real> {
    /// rows × k, orthonormal columns.
    pub u: CMatrix<T>,
    /// k values, descending.
    pub singular_values: Vec<T>,
    /// cols × cols unitary; columns past `k` span directions with zero gain.
    pub v: CMatrix<T>,
}

impl<T: Real> SvdFactors<T> {
    pub fn rank_count(&self) -> usize {
        self.singular_values.len()
    }

    pub fn sigma_max(&self) -> T {
        self.singular_values.first().copied().unwrap_or_else(T::zero)
    }

    /// `U Σ V_kᴴ`.
    pub fn reconstruct(&self) -> CMatrix<T> {
        let k = self.rank_count();
        let mut us = self.u.clone();
        for (j, &s) in self.singular_values.iter().enumerate() {
            for z in us.col_mut(j) {
                *z = *z * s;
            }
        }
        &us * &self.v.leading_cols(k).adjoint()
    }

    /// σ_max / σ_min over the k values; infinite when rank deficient.
    pub fn condition_estimate(&self) -> T {
        condition_of(&self.singular_values)
    }
}

fn condition_of<T: Real>(values: &[T]) -> T {
    let max = values.iter().copied().fold(T::zero(), T::max);
    let min = values.iter().copied().fold(T::infinity(), T::min);
    if min > T::zero() {
        max / min
    } else {
        T::infinity()
    }
}

/// Singular value decomposition with a full right basis.
pub fn svd<T: Real>(a: &CMatrix<T>) -> Result<SvdFactors<T>, LinalgError> {
    a.ensure_finite()?;
    let (m, n) = a.shape();
    let eps = T::epsilon();

    let mut w = a.clone();
    let mut v = CMatrix::identity(n);
    let mut sq: Vec<T> = (0..n).map(|j| norm_sqr(w.col(j))).collect();
    let floor = eps * eps * a.norm_fro_sqr();

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta) = (sq[p], sq[q]);
                if alpha <= floor || beta <= floor {
                    continue;
                }
                let gamma = dot_conj(w.col(p), w.col(q));
                let g = gamma.norm();
                if g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let (c, s, e_conj) = rotation(alpha, beta, gamma, g);
                let (wp, wq) = w.col_pair_mut(p, q);
                rotate(wp, wq, c, s, e_conj);
                let (vp, vq) = v.col_pair_mut(p, q);
                rotate(vp, vq, c, s, e_conj);
                sq[p] = norm_sqr(w.col(p));
                sq[q] = norm_sqr(w.col(q));
            }
        }
        converged = !rotated;
    }
    if !converged {
        let sigmas: Vec<T> = sq.iter().map(|x| x.sqrt()).collect();
        return Err(LinalgError::NoConvergence {
            rows: m,
            cols: n,
            sweeps: MAX_SWEEPS,
            condition: condition_of(&sigmas).to_f64_lossy(),
        });
    }

    let sigma: Vec<T> = (0..n).map(|j| norm_sqr(w.col(j)).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal values keep the rotation order
    order.sort_by(|&x, &y| sigma[y].partial_cmp(&sigma[x]).unwrap_or(std::cmp::Ordering::Equal));

    let k = m.min(n);
    let singular_values: Vec<T> = order[..k].iter().map(|&j| sigma[j]).collect();
    let v = v.select_cols(&order);

    let sigma_max = singular_values.first().copied().unwrap_or_else(T::zero);
    let zero_cut = sigma_max * eps * T::lit(m.max(n) as f64);
    let mut u = CMatrix::zeros(m, k);
    let mut missing = Vec::new();
    for (j, &src) in order[..k].iter().enumerate() {
        let s = sigma[src];
        if s > zero_cut && s > T::zero() {
            let inv = s.recip();
            for (dst, &x) in u.col_mut(j).iter_mut().zip(w.col(src)) {
                *dst = x * inv;
            }
        } else {
            missing.push(j);
        }
    }
    complete_orthonormal(&mut u, &missing);

    Ok(SvdFactors { u, singular_values, v })
}

#[inline]
fn rotation<T: Real>(alpha: T, beta: T, gamma: Cx<T>, g: T) -> (T, T, Cx<T>) {
    let one = T::one();
    let zeta = (beta - alpha) / (g + g);
    let t = zeta.signum() / (zeta.abs() + (one + zeta * zeta).sqrt());
    let c = (one + t * t).sqrt().recip();
    (c, c * t, (gamma / g).conj())
}

/// `[p q] ← [p q] · [[c, s], [−s·ē, c·ē]]`, a unitary column rotation.
#[inline]
fn rotate<T: Real>(p: &mut [Cx<T>], q: &mut [Cx<T>], c: T, s: T, e_conj: Cx<T>) {
    for (x, y) in p.iter_mut().zip(q.iter_mut()) {
        let ye = *y * e_conj;
        let xp = *x;
        *x = xp * c - ye * s;
        *y = xp * s + ye * c;
    }
}

/// Fills the listed columns with unit vectors orthogonal to every other column.
fn complete_orthonormal<T: Real>(u: &mut CMatrix<T>, missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let m = u.rows();
    let mut filled: Vec<usize> = (0..u.cols()).filter(|j| !missing.contains(j)).collect();
    for &j in missing {
        let mut best: Option<(T, Vec<Cx<T>>)> = None;
        for i in 0..m {
            let mut x = vec![Complex::zero(); m];
            x[i] = Complex::new(T::one(), T::zero());
            // two passes of Gram-Schmidt
            for _ in 0..2 {
                for &f in &filled {
                    let proj = dot_conj(u.col(f), &x);
                    for (xi, &ui) in x.iter_mut().zip(u.col(f)) {
                        *xi = *xi - ui * proj;
                    }
                }
            }
            let nrm = norm_sqr(&x).sqrt();
            if best.as_ref().is_none_or(|(b, _)| nrm > *b) {
                best = Some((nrm, x));
            }
        }
        let (nrm, x) = best.expect("at least one candidate");
        for (dst, xi) in u.col_mut(j).iter_mut().zip(x) {
            *dst = xi / nrm;
        }
        filled.push(j);
    }
}
