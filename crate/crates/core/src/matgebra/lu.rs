//! LU with partial pivoting for the small square systems of the metric layer.

use num_complex::Complex;
use num_traits::Zero;

use super::{CMatrix, LinalgError};
use crate::scalar::{Cx, Real};

pub struct Lu<T> {
    lu: CMatrix<T>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Real> Lu<T> {
    pub fn new(a: &CMatrix<T>) -> Result<Self, LinalgError> {
        let n = a.rows();
        if a.cols() != n {
            return Err(LinalgError::DimensionMismatch { op: "lu", left: a.shape(), right: a.shape() });
        }
        a.ensure_finite()?;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        let scale = a.max_abs();
        for k in 0..n {
            let (piv, piv_abs) = (k..n)
                .map(|r| (r, lu[(r, k)].norm()))
                .fold((k, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if piv_abs <= scale * T::epsilon() * T::lit(n as f64) || piv_abs == T::zero() {
                return Err(LinalgError::Singular { n });
            }
            if piv != k {
                for c in 0..n {
                    let tmp = lu[(k, c)];
                    lu[(k, c)] = lu[(piv, c)];
                    lu[(piv, c)] = tmp;
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let d = lu[(k, k)];
            for r in k + 1..n {
                let f = lu[(r, k)] / d;
                lu[(r, k)] = f;
                for c in k + 1..n {
                    let upd = f * lu[(k, c)];
                    lu[(r, c)] = lu[(r, c)] - upd;
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn determinant(&self) -> Cx<T> {
        let n = self.lu.rows();
        (0..n).fold(Complex::new(self.sign, T::zero()), |acc, i| acc * self.lu[(i, i)])
    }

    /// Solves `A X = B`.
    pub fn solve(&self, b: &CMatrix<T>) -> Result<CMatrix<T>, LinalgError> {
        let n = self.lu.rows();
        if b.rows() != n {
            return Err(LinalgError::DimensionMismatch { op: "lu_solve", left: self.lu.shape(), right: b.shape() });
        }
        let mut x = CMatrix::zeros(n, b.cols());
        for j in 0..b.cols() {
            let mut y: Vec<Cx<T>> = self.perm.iter().map(|&p| b[(p, j)]).collect();
            for i in 0..n {
                let mut acc = y[i];
                for k in 0..i {
                    acc = acc - self.lu[(i, k)] * y[k];
                }
                y[i] = acc;
            }
            for i in (0..n).rev() {
                let mut acc = y[i];
                for k in i + 1..n {
                    acc = acc - self.lu[(i, k)] * y[k];
                }
                y[i] = acc / self.lu[(i, i)];
            }
            x.col_mut(j).copy_from_slice(&y);
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<CMatrix<T>, LinalgError> {
        self.solve(&CMatrix::identity(self.lu.rows()))
    }
}

pub fn determinant<T: Real>(a: &CMatrix<T>) -> Result<Cx<T>, LinalgError> {
    match Lu::new(a) {
        Ok(lu) => Ok(lu.determinant()),
        Err(LinalgError::Singular { .. }) => Ok(Complex::zero()),
        Err(e) => Err(e),
    }
}

pub fn inverse<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>, LinalgError> {
    Lu::new(a)?.inverse()
}
