use std::fmt;

use super::{Rational, Scalar};
use crate::error::{malformed, Result};

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> DenseMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return malformed(format!("matrix dimensions must be positive, got {rows}x{cols}"));
        }
        if data.len() != rows * cols {
            return malformed(format!("{} entries supplied for a {rows}x{cols} matrix", data.len()));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> DenseMatrix<U> {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return malformed(format!("cannot multiply {}x{} by {}x{}", self.rows, self.cols, other.rows, other.cols));
        }
        let mut out: DenseMatrix<T> = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = out.data[idx].add(&a.mul(other.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    /// `self * selfᵀ`.
    pub fn gram_rows(&self) -> Self {
        let mut out: DenseMatrix<T> = DenseMatrix::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in i..self.rows {
                let mut acc = T::zero();
                for (a, b) in self.row(i).iter().zip(self.row(j)) {
                    acc = acc.add(&a.mul(b));
                }
                out.data[i * self.rows + j] = acc.clone();
                out.data[j * self.rows + i] = acc;
            }
        }
        out
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return malformed(format!("shape mismatch: {}x{} vs {}x{}", self.rows, self.cols, other.rows, other.cols));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.sub(b)).collect(),
        })
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|v| v.mul(c))
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.mul(b)).collect(),
        })
    }

    /// ⟨A, B⟩ = Σ A_ij B_ij.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).fold(T::zero(), |acc, (a, b)| acc.add(&a.mul(b))))
    }

    /// Σ |A_ij|.
    pub fn entry_l1(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, a| acc.add(&a.abs()))
    }

    /// max |A_ij|.
    pub fn entry_max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, a| {
            let a = a.abs();
            if a > acc {
                a
            } else {
                acc
            }
        })
    }

    pub fn frobenius_sq(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, a| acc.add(&a.mul(a)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn to_f64(&self) -> DenseMatrix<f64> {
        self.map(|v| v.to_f64())
    }
}

impl DenseMatrix<Rational> {
    pub fn from_integers(rows: usize, cols: usize, data: &[i64]) -> Result<Self> {
        DenseMatrix::new(rows, cols, data.iter().map(|&v| Rational::from_integer(v)).collect())
    }
}

impl<T: fmt::Display> fmt::Debug for DenseMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, " ")?;
            for j in 0..self.cols {
                write!(f, " {}", self.data[i * self.cols + j])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
