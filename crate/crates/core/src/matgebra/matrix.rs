use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use super::LinalgError;
use crate::scalar::{Cx, Real};

/// Dense complex matrix, column-major.
///
/// Both dimensions are at least one. Entries are expected to be finite; the
/// decomposition entry points check this, the arithmetic does not.
#[derive(Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive, got {rows}x{cols}");
        Self { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cx<T>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m.data[c * rows + r] = f(r, c);
            }
        }
        m
    }

    /// Builds from row-major entries, which is how literals read in source.
    pub fn from_rows(rows: usize, cols: usize, entries: &[Cx<T>]) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(LinalgError::Shape { op: "from_rows", rows, cols, got: entries.len() });
        }
        let m = Self::from_fn(rows, cols, |r, c| entries[r * cols + c]);
        m.ensure_finite()?;
        Ok(m)
    }

    pub fn from_real_rows(rows: usize, cols: usize, entries: &[T]) -> Result<Self, LinalgError> {
        let cx: Vec<_> = entries.iter().map(|&x| Complex::new(x, T::zero())).collect();
        Self::from_rows(rows, cols, &cx)
    }

    pub fn diag(values: &[Cx<T>]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn diag_real(values: &[T]) -> Self {
        let cx: Vec<_> = values.iter().map(|&x| Complex::new(x, T::zero())).collect();
        Self::diag(&cx)
    }

    /// Column vector from a slice.
    pub fn column_vector(values: &[Cx<T>]) -> Self {
        Self::from_fn(values.len(), 1, |r, _| values[r])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn col(&self, c: usize) -> &[Cx<T>] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, c: usize) -> &mut [Cx<T>] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    /// Mutable access to two distinct columns at once.
    pub(crate) fn col_pair_mut(&mut self, p: usize, q: usize) -> (&mut [Cx<T>], &mut [Cx<T>]) {
        debug_assert!(p < q);
        let rows = self.rows;
        let (lo, hi) = self.data.split_at_mut(q * rows);
        (&mut lo[p * rows..(p + 1) * rows], &mut hi[..rows])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<(), LinalgError> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(LinalgError::NonFinite { rows: self.rows, cols: self.cols })
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, k: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * k).collect() }
    }

    pub fn scale_cx(&self, k: Cx<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * k).collect() }
    }

    pub fn norm_fro_sqr(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm_fro(&self) -> T {
        self.norm_fro_sqr().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn trace(&self) -> Cx<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).fold(Complex::zero(), |a, b| a + b)
    }

    /// `self * rhs`, with a shape check.
    pub fn try_mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "mul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let out_col = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in rhs.col(j).iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                for (o, &a) in out_col.iter_mut().zip(self.col(k)) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᴴ * rhs` without materializing the adjoint.
    pub fn adjoint_mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.rows != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "adjoint_mul",
                left: (self.cols, self.rows),
                right: rhs.shape(),
            });
        }
        Ok(Self::from_fn(self.cols, rhs.cols, |i, j| dot_conj(self.col(i), rhs.col(j))))
    }

    fn zip_with(&self, rhs: &Self, op: &'static str, f: impl Fn(Cx<T>, Cx<T>) -> Cx<T>) -> Result<Self, LinalgError> {
        if self.shape() != rhs.shape() {
            return Err(LinalgError::DimensionMismatch { op, left: self.shape(), right: rhs.shape() });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    /// Stacks blocks vertically; all blocks must share a column count.
    pub fn vstack(blocks: &[&Self]) -> Result<Self, LinalgError> {
        let first = blocks.first().ok_or(LinalgError::Shape { op: "vstack", rows: 0, cols: 0, got: 0 })?;
        let cols = first.cols;
        if let Some(bad) = blocks.iter().find(|b| b.cols != cols) {
            return Err(LinalgError::DimensionMismatch { op: "vstack", left: first.shape(), right: bad.shape() });
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut out = Self::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            for c in 0..cols {
                for r in 0..b.rows {
                    out[(offset + r, c)] = b[(r, c)];
                }
            }
            offset += b.rows;
        }
        Ok(out)
    }

    /// Copies the listed columns, in order.
    pub fn select_cols(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, cols.len());
        for (j, &c) in cols.iter().enumerate() {
            out.col_mut(j).copy_from_slice(self.col(c));
        }
        out
    }

    /// Leading `n` columns.
    pub fn leading_cols(&self, n: usize) -> Self {
        let idx: Vec<usize> = (0..n).collect();
        self.select_cols(&idx)
    }

    pub fn entries_col_major(&self) -> &[Cx<T>] {
        &self.data
    }

    /// Converts the scalar type (e.g. `f64` to `f32`).
    pub fn cast<U: Real>(&self) -> CMatrix<U> {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(U::lit(z.re.to_f64_lossy()), U::lit(z.im.to_f64_lossy())))
                .collect(),
        }
    }
}

/// `aᴴ b` for two equal-length slices.
#[inline]
pub(crate) fn dot_conj<T: Real>(a: &[Cx<T>], b: &[Cx<T>]) -> Cx<T> {
    a.iter().zip(b).fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}

#[inline]
pub(crate) fn norm_sqr<T: Real>(a: &[Cx<T>]) -> T {
    a.iter().map(|z| z.norm_sqr()).sum()
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Cx<T>;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Cx<T> {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[c * self.rows + r]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Cx<T> {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[c * self.rows + r]
    }
}

// Operator forms panic on shape mismatch; use the `try_*` methods where the
// shapes come from outside the crate.
impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: Self) -> CMatrix<T> {
        self.try_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: Self) -> CMatrix<T> {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: Self) -> CMatrix<T> {
        self.try_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<T: Real> fmt::Debug for CMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, " ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, " {:+.4e}{:+.4e}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
