//! Dense row-major quaternion matrices.
//!
//! Vectors are `n x 1` matrices. As linear maps matrices act on the left and
//! vectors are scaled on the right (`v·α`).

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use super::scalar::Quaternion;

#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Quaternion::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Quaternion::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        QMatrix { rows, cols, data }
    }

    /// Builds a matrix from row vectors. Panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<Quaternion>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        QMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// Real-valued matrix from row slices.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        QMatrix::from_rows(
            rows.iter().map(|row| row.iter().copied().map(Quaternion::real).collect()).collect(),
        )
    }

    pub fn from_diag(diag: &[Quaternion]) -> Self {
        let mut m = QMatrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        QMatrix::from_diag(&diag.iter().copied().map(Quaternion::real).collect::<Vec<_>>())
    }

    /// Column vector from entries.
    pub fn column_vector(entries: &[Quaternion]) -> Self {
        QMatrix { rows: entries.len(), cols: 1, data: entries.to_vec() }
    }

    /// The `i`-th standard basis vector of length `n`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = QMatrix::zeros(n, 1);
        v[(i, 0)] = Quaternion::ONE;
        v
    }

    /// Matrix whose columns are the given column vectors (all `n x 1`).
    pub fn from_columns(n: usize, cols: &[QMatrix]) -> Self {
        let mut m = QMatrix::zeros(n, cols.len());
        for (c, v) in cols.iter().enumerate() {
            assert_eq!(v.rows, n, "column length mismatch");
            for r in 0..n {
                m[(r, c)] = v[(r, 0)];
            }
        }
        m
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
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.data
    }

    pub fn column(&self, c: usize) -> QMatrix {
        QMatrix::from_fn(self.rows, 1, |r, _| self[(r, c)])
    }

    pub fn columns(&self) -> Vec<QMatrix> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    /// Columns `range` as a new matrix.
    pub fn column_range(&self, start: usize, end: usize) -> QMatrix {
        QMatrix::from_fn(self.rows, end - start, |r, c| self[(r, start + c)])
    }

    pub fn select_columns(&self, idx: &[usize]) -> QMatrix {
        QMatrix::from_fn(self.rows, idx.len(), |r, c| self[(r, idx[c])])
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> QMatrix {
        QMatrix::from_fn(rows, cols, |r, c| self[(r0 + r, c0 + c)])
    }

    pub fn set_submatrix(&mut self, r0: usize, c0: usize, block: &QMatrix) {
        for r in 0..block.rows {
            for c in 0..block.cols {
                self[(r0 + r, c0 + c)] = block[(r, c)];
            }
        }
    }

    /// Horizontal concatenation. Empty operands are allowed.
    pub fn hstack(&self, other: &QMatrix) -> QMatrix {
        if self.cols == 0 {
            return QMatrix::from_fn(other.rows, other.cols, |r, c| other[(r, c)]);
        }
        if other.cols == 0 {
            return self.clone();
        }
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        QMatrix::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self[(r, c)]
            } else {
                other[(r, c - self.cols)]
            }
        })
    }

    pub fn vstack(&self, other: &QMatrix) -> QMatrix {
        if self.rows == 0 {
            return other.clone();
        }
        if other.rows == 0 {
            return self.clone();
        }
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        QMatrix::from_fn(self.rows + other.rows, self.cols, |r, c| {
            if r < self.rows {
                self[(r, c)]
            } else {
                other[(r - self.rows, c)]
            }
        })
    }

    pub fn direct_sum(&self, other: &QMatrix) -> QMatrix {
        let mut m = QMatrix::zeros(self.rows + other.rows, self.cols + other.cols);
        m.set_submatrix(0, 0, self);
        m.set_submatrix(self.rows, self.cols, other);
        m
    }

    pub fn block_diag(blocks: &[QMatrix]) -> QMatrix {
        blocks.iter().fold(QMatrix::zeros(0, 0), |acc, b| acc.direct_sum(b))
    }

    /// Conjugate transpose `A*`.
    pub fn conj_transpose(&self) -> QMatrix {
        QMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> QMatrix {
        QMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Entrywise conjugate `Ā`.
    pub fn conj(&self) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|q| q.conj()).collect() }
    }

    pub fn scale(&self, s: f64) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&q| q * s).collect() }
    }

    /// `A·α` (every entry multiplied on the right).
    pub fn mul_scalar_right(&self, a: Quaternion) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&q| q * a).collect() }
    }

    /// `α·A`.
    pub fn mul_scalar_left(&self, a: Quaternion) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&q| a * q).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|q| q.abs()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Quaternion {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|q| q.is_finite())
    }

    /// `self^p` for square matrices.
    pub fn pow(&self, p: usize) -> QMatrix {
        assert!(self.is_square());
        let mut out = QMatrix::identity(self.rows);
        for _ in 0..p {
            out = &out * self;
        }
        out
    }

    /// `(A + A*)/2`.
    pub fn hermitian_part(&self) -> QMatrix {
        (self + &self.conj_transpose()).scale(0.5)
    }

    /// Frobenius distance `‖A − B‖`.
    pub fn distance(&self, other: &QMatrix) -> f64 {
        (self - other).frobenius_norm()
    }

    /// `y* x` for column vectors.
    pub fn dot(y: &QMatrix, x: &QMatrix) -> Quaternion {
        assert_eq!(y.shape(), x.shape());
        y.data.iter().zip(&x.data).map(|(a, b)| a.conj() * *b).sum()
    }
}

/// Conjugate transpose of `a`.
pub fn conj_transpose(a: &QMatrix) -> QMatrix {
    a.conj_transpose()
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Quaternion;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Quaternion {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Quaternion {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &QMatrix {
    type Output = QMatrix;
    fn mul(self, o: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, o.rows, "matrix product dimension mismatch");
        let mut out = QMatrix::zeros(self.rows, o.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == Quaternion::ZERO {
                    continue;
                }
                for c in 0..o.cols {
                    out.data[r * o.cols + c] += a * o[(k, c)];
                }
            }
        }
        out
    }
}

impl Mul for QMatrix {
    type Output = QMatrix;
    fn mul(self, o: QMatrix) -> QMatrix {
        &self * &o
    }
}

impl Add for &QMatrix {
    type Output = QMatrix;
    fn add(self, o: &QMatrix) -> QMatrix {
        assert_eq!(self.shape(), o.shape(), "matrix sum dimension mismatch");
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl Sub for &QMatrix {
    type Output = QMatrix;
    fn sub(self, o: &QMatrix) -> QMatrix {
        assert_eq!(self.shape(), o.shape(), "matrix difference dimension mismatch");
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl Neg for &QMatrix {
    type Output = QMatrix;
    fn neg(self) -> QMatrix {
        self.scale(-1.0)
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            write!(f, "[")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(r, c)])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(re: f64, i: f64, j: f64, k: f64) -> Quaternion {
        Quaternion::new(re, i, j, k)
    }

    #[test]
    fn conj_transpose_of_j_and_identity() {
        let a = QMatrix::from_rows(vec![vec![Quaternion::J]]);
        assert_eq!(a.conj_transpose()[(0, 0)], -Quaternion::J);
        assert_eq!(QMatrix::identity(3).conj_transpose(), QMatrix::identity(3));
    }

    #[test]
    fn conj_transpose_shape() {
        let a = QMatrix::from_fn(2, 3, |r, c| q(r as f64, c as f64, 1.0, -1.0));
        let at = a.conj_transpose();
        assert_eq!(at.shape(), (3, 2));
        assert_eq!(at[(2, 1)], a[(1, 2)].conj());
        assert_eq!(at.conj_transpose(), a);
    }

    #[test]
    fn product_is_noncommutative_entrywise() {
        let a = QMatrix::from_rows(vec![vec![Quaternion::I]]);
        let b = QMatrix::from_rows(vec![vec![Quaternion::J]]);
        assert_eq!((&a * &b)[(0, 0)], Quaternion::K);
        assert_eq!((&b * &a)[(0, 0)], -Quaternion::K);
    }

    #[test]
    fn stacking_and_blocks() {
        let a = QMatrix::identity(2);
        let b = QMatrix::from_real(&[&[3.0]]);
        let d = a.direct_sum(&b);
        assert_eq!(d.shape(), (3, 3));
        assert_eq!(d[(2, 2)], Quaternion::real(3.0));
        assert_eq!(d[(0, 2)], Quaternion::ZERO);
        let h = a.hstack(&QMatrix::zeros(2, 0));
        assert_eq!(h, a);
        let cols = QMatrix::from_columns(2, &a.columns());
        assert_eq!(cols, a);
    }
}
