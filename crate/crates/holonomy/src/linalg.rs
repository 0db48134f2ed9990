//! Dense complex matrices sized for a four-level system and its two-ion
//! tensor product (4x4 and 16x16), stored row-major.
//!
//! The operations here are deliberately small and direct: cubic matrix
//! products, an index-expanded Kronecker product, and a Jacobi eigensolver
//! for Hermitian diagnostics. Nothing is cached or parallelized; callers
//! that need throughput reuse buffers through the `_into` variants.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt;
use std::ops::{Index, IndexMut};

pub type C64 = Complex64;

/// Shorthand for a complex entry.
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Tolerance used by Hermiticity preconditions.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// All-zero matrix. Panics if either dimension is zero; matrices here
    /// always have at least one row and one column.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        ComplexMatrix {
            rows,
            cols,
            data: vec![C64::default(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c64(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].len();
        assert!(cols > 0, "matrix needs at least one column");
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        ComplexMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// Column vector (n x 1).
    pub fn column(entries: &[C64]) -> Self {
        assert!(!entries.is_empty(), "vector needs at least one entry");
        ComplexMatrix {
            rows: entries.len(),
            cols: 1,
            data: entries.to_vec(),
        }
    }

    /// Elementary matrix with a single unit entry at (row, col).
    pub fn unit_entry(n: usize, row: usize, col: usize) -> Self {
        let mut m = ComplexMatrix::zeros(n, n);
        m[(row, col)] = c64(1.0, 0.0);
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Kronecker product; entry (i1*r2 + i2, j1*c2 + j2) = a(i1,j1) * b(i2,j2).
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self[(i1, j1)];
                if a == C64::default() {
                    continue;
                }
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        out[(i1 * other.rows + i2, j1 * other.cols + j2)] = a * other[(i2, j2)];
                    }
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        self.mul_into(other, &mut out);
        Ok(out)
    }

    /// `out = self * other`, no allocation. Dimensions are asserted.
    pub(crate) fn mul_into(&self, other: &ComplexMatrix, out: &mut ComplexMatrix) {
        debug_assert_eq!(self.cols, other.rows);
        debug_assert_eq!(out.rows, self.rows);
        debug_assert_eq!(out.cols, other.cols);
        let n = self.cols;
        let oc = other.cols;
        for i in 0..self.rows {
            let arow = &self.data[i * n..(i + 1) * n];
            let orow = &mut out.data[i * oc..(i + 1) * oc];
            orow.fill(C64::default());
            for (k, &a) in arow.iter().enumerate() {
                if a == C64::default() {
                    continue;
                }
                let brow = &other.data[k * oc..(k + 1) * oc];
                for (o, &b) in orow.iter_mut().zip(brow.iter()) {
                    *o += a * b;
                }
            }
        }
    }

    /// a*b - b*a.
    pub fn commutator(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        let ab = self.matmul(other)?;
        let ba = other.matmul(self)?;
        ab.sub(&ba)
    }

    pub fn trace(&self) -> Result<C64> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut t = C64::default();
        for i in 0..self.rows {
            t += self[(i, i)];
        }
        Ok(t)
    }

    pub fn scale(&self, factor: C64) -> ComplexMatrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= factor;
        }
        out
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_check("add", other)?;
        let mut out = self.clone();
        for (o, &b) in out.data.iter_mut().zip(other.data.iter()) {
            *o += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_check("sub", other)?;
        let mut out = self.clone();
        for (o, &b) in out.data.iter_mut().zip(other.data.iter()) {
            *o -= b;
        }
        Ok(out)
    }

    fn zip_check(&self, op: &'static str, other: &ComplexMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                op,
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        Ok(())
    }

    /// `self += factor * other`, no allocation.
    pub fn add_scaled_assign(&mut self, factor: C64, other: &ComplexMatrix) {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        for (o, &b) in self.data.iter_mut().zip(other.data.iter()) {
            *o += factor * b;
        }
    }

    pub fn copy_from(&mut self, other: &ComplexMatrix) {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        self.data.copy_from_slice(&other.data);
    }

    pub fn set_zero(&mut self) {
        self.data.fill(C64::default());
    }

    /// Largest entry magnitude (max norm).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max deviation from the conjugate transpose; 0 for exactly Hermitian input.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Replaces the matrix with its Hermitian part (a + a^H)/2.
    pub(crate) fn hermitize(&mut self) {
        debug_assert!(self.is_square());
        for i in 0..self.rows {
            for j in i..self.cols {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)].conj());
                self[(i, j)] = avg;
                self[(j, i)] = avg.conj();
            }
        }
    }

    /// All eigenvalues of a Hermitian matrix, ascending. The matrix is
    /// embedded as a real symmetric one of twice the size and diagonalized
    /// by cyclic Jacobi rotations; each eigenvalue appears twice in the
    /// embedding, so every other sorted value is returned.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let dev = self.hermiticity_deviation();
        let tol = HERMITIAN_TOL * self.max_abs().max(1.0);
        if dev > tol {
            return Err(Error::NotHermitian {
                deviation: dev,
                tol,
            });
        }
        let n = self.rows;
        // S = [[A, -B], [B, A]] for H = A + iB is symmetric with doubled spectrum.
        let m = 2 * n;
        let mut s = vec![0.0f64; m * m];
        for i in 0..n {
            for j in 0..n {
                let v = self[(i, j)];
                s[i * m + j] = v.re;
                s[(i + n) * m + (j + n)] = v.re;
                s[i * m + (j + n)] = -v.im;
                s[(i + n) * m + j] = v.im;
            }
        }
        let mut eigs = jacobi_symmetric(&mut s, m);
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(eigs.into_iter().step_by(2).collect())
    }

    /// Smallest eigenvalue of a Hermitian matrix, used as a positivity
    /// diagnostic for density matrices.
    pub fn min_eigenvalue_hermitian(&self) -> Result<f64> {
        let eigs = self.hermitian_eigenvalues()?;
        Ok(eigs[0])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let v = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i  ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Cyclic Jacobi on a dense symmetric matrix stored row-major; returns the
/// diagonal after convergence. Sizes here are at most 32, so no pivot
/// bookkeeping is needed.
fn jacobi_symmetric(s: &mut [f64], n: usize) -> Vec<f64> {
    let scale = s
        .iter()
        .map(|v| v.abs())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let stop = 1e-14 * scale;
    for _sweep in 0..100 {
        let mut off: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(s[i * n + j].abs());
            }
        }
        if off < stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = s[p * n + q];
                if apq.abs() < stop * 1e-2 {
                    continue;
                }
                let app = s[p * n + p];
                let aqq = s[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let skp = s[k * n + p];
                    let skq = s[k * n + q];
                    s[k * n + p] = c * skp - sn * skq;
                    s[k * n + q] = sn * skp + c * skq;
                }
                for k in 0..n {
                    let spk = s[p * n + k];
                    let sqk = s[q * n + k];
                    s[p * n + k] = c * spk - sn * sqk;
                    s[q * n + k] = sn * spk + c * sqk;
                }
            }
        }
    }
    (0..n).map(|i| s[i * n + i]).collect()
}
