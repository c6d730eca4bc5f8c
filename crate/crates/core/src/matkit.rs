//! Dense complex linear algebra.
//!
//! Matrices are stored row-major. Every constructor enforces the per-axis
//! dimension cap and rejects non-finite entries, so downstream code can assume
//! both. Eigenvalues of Hermitian matrices go through `nalgebra`'s symmetric
//! eigensolver; the spectral norm of a general matrix is found by power
//! iteration on `a†a`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Per-axis dimension cap for every dense matrix.
pub const MAX_DIM: usize = 8192;

/// Numerical tolerances used by the kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative Hermiticity tolerance: `‖h − h†‖_max ≤ hermitian·(1 + max|h_ij|)`.
    pub hermitian: f64,
    /// Relative change of the Rayleigh quotient that stops power iteration.
    pub power_rel_tol: f64,
    pub power_max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            power_rel_tol: 1e-12,
            power_max_iter: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

fn check_cap(op: &'static str, rows: usize, cols: usize) -> Result<()> {
    if rows > MAX_DIM || cols > MAX_DIM {
        return Err(Error::SizeCap {
            op,
            rows,
            cols,
            cap: MAX_DIM,
        });
    }
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument(format!(
            "{op}: matrix dimensions must be positive, got {rows}x{cols}"
        )));
    }
    Ok(())
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        check_cap("zeros", rows, cols)?;
        Ok(Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        Ok(m)
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        check_cap("from_row_major", rows, cols)?;
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_row_major(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_diagonal(diag: &[C64]) -> Result<Self> {
        let n = diag.len();
        let mut m = Self::zeros(n, n)?;
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        Ok(m)
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

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r}, {c}) out of bounds"
        );
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: C64) {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r}, {c}) out of bounds"
        );
        self.data[r * self.cols + c] = value;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    fn zip_with(
        &self,
        other: &Self,
        op: &'static str,
        f: impl Fn(C64, C64) -> C64,
    ) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖self − other‖_max`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn trace(&self) -> Result<C64> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                op: "trace",
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok((0..self.rows).map(|i| self.data[i * self.cols + i]).sum())
    }

    /// `‖self − self†‖_max`; `None` for non-square input.
    pub fn hermitian_defect(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        Some(worst)
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        match self.hermitian_defect() {
            Some(d) => d <= rel_tol * (1.0 + self.max_abs()),
            None => false,
        }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(
            v.len(),
            self.cols,
            "mul_vec: vector length must equal column count"
        );
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> Result<Self> {
        let (rows, cols) = m.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(m[(r, c)]);
            }
        }
        Self::from_row_major(rows, cols, data)
    }
}

pub fn mat_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            op: "mat_mul",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let (n, m, p) = (a.rows, a.cols, b.cols);
    let mut out = vec![C64::new(0.0, 0.0); n * p];
    for (i, out_row) in out.chunks_exact_mut(p).enumerate() {
        let a_row = &a.data[i * m..(i + 1) * m];
        for (k, &aik) in a_row.iter().enumerate() {
            if aik.re == 0.0 && aik.im == 0.0 {
                continue;
            }
            let b_row = &b.data[k * p..(k + 1) * p];
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                *o += aik * bkj;
            }
        }
    }
    Ok(ComplexMatrix {
        rows: n,
        cols: p,
        data: out,
    })
}

/// Conjugate transpose.
pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    let mut data = Vec::with_capacity(a.data.len());
    for c in 0..a.cols {
        for r in 0..a.rows {
            data.push(a.get(r, c).conj());
        }
    }
    ComplexMatrix {
        rows: a.cols,
        cols: a.rows,
        data,
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_with_cap(a, b, MAX_DIM)
}

/// Kronecker product with an explicit per-axis cap on the result.
pub fn kron_with_cap(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix> {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let cap = cap.min(MAX_DIM);
    if rows > cap || cols > cap {
        return Err(Error::SizeCap {
            op: "kron",
            rows,
            cols,
            cap,
        });
    }
    let mut data = vec![C64::new(0.0, 0.0); rows * cols];
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let s = a.get(ar, ac);
            if s.re == 0.0 && s.im == 0.0 {
                continue;
            }
            for br in 0..b.rows {
                let row = ar * b.rows + br;
                let dst = &mut data[row * cols + ac * b.cols..row * cols + (ac + 1) * b.cols];
                let src = &b.data[br * b.cols..(br + 1) * b.cols];
                for (d, &v) in dst.iter_mut().zip(src) {
                    *d = s * v;
                }
            }
        }
    }
    Ok(ComplexMatrix { rows, cols, data })
}

/// `ab − ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            op: "commutator",
            left: a.shape(),
            right: b.shape(),
        });
    }
    mat_mul(a, b)?.sub(&mat_mul(b, a)?)
}

/// `Tr(a)/N`.
pub fn normalized_trace(a: &ComplexMatrix) -> Result<C64> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            op: "normalized_trace",
            rows: a.rows,
            cols: a.cols,
        });
    }
    Ok(a.trace()? / a.rows as f64)
}

/// Real spectrum of a Hermitian matrix, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianSpectrum {
    pub values: Vec<f64>,
}

impl HermitianSpectrum {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Largest eigenvalue modulus, i.e. the operator norm.
    pub fn abs_max(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<HermitianSpectrum> {
    hermitian_eigenvalues_with(h, &Tolerances::default())
}

pub fn hermitian_eigenvalues_with(
    h: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<HermitianSpectrum> {
    let defect = h.hermitian_defect().ok_or(Error::NotSquare {
        op: "hermitian_eigenvalues",
        rows: h.rows,
        cols: h.cols,
    })?;
    let allowed = tol.hermitian * (1.0 + h.max_abs());
    if defect > allowed {
        return Err(Error::NotHermitian {
            asymmetry: defect,
            tolerance: allowed,
        });
    }
    let m = h.to_nalgebra();
    // symmetrize so the solver sees an exactly Hermitian input
    let sym = (&m + m.adjoint()).scale(0.5);
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(HermitianSpectrum { values })
}

/// Largest singular value.
///
/// Hermitian inputs (within the default tolerance) use the eigensolver;
/// everything else uses power iteration on `a†a`.
pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    spectral_norm_with(a, &Tolerances::default())
}

pub fn spectral_norm_with(a: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    if a.is_hermitian(tol.hermitian) {
        return Ok(hermitian_eigenvalues_with(a, tol)?.abs_max());
    }
    spectral_norm_power(a, tol)
}

/// Power iteration on `a†a` from a fixed pseudo-random start vector.
pub fn spectral_norm_power(a: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0005_eed0_fa11);
    let mut v: Vec<C64> = (0..a.cols)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    normalize(&mut v);
    let ad = dagger(a);
    let mut theta = 0.0f64;
    let mut prev_delta = f64::INFINITY;
    for _ in 0..tol.power_max_iter {
        let av = a.mul_vec(&v);
        let next_theta: f64 = av.iter().map(|z| z.norm_sqr()).sum();
        if next_theta == 0.0 {
            return Ok(0.0);
        }
        let mut w = ad.mul_vec(&av);
        normalize(&mut w);
        v = w;
        let delta = (next_theta - theta).abs();
        // the remaining error of a geometric sequence is delta·ρ/(1−ρ)
        let ratio = (delta / prev_delta).min(0.999_999);
        let tail = delta * ratio / (1.0 - ratio);
        let at_roundoff = delta <= 8.0 * f64::EPSILON * next_theta;
        if delta <= tol.power_rel_tol * next_theta
            && (tail <= tol.power_rel_tol * next_theta || at_roundoff)
        {
            return Ok(next_theta.sqrt());
        }
        prev_delta = delta;
        theta = next_theta;
    }
    Err(Error::NoConvergence {
        what: "spectral_norm power iteration",
        iterations: tol.power_max_iter,
        estimate: theta.sqrt(),
    })
}

fn normalize(v: &mut [C64]) {
    let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

/// Pauli matrices, mostly for tests and the fixed observable families.
pub mod pauli {
    use super::{ComplexMatrix, C64};

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2")
    }

    pub fn y() -> ComplexMatrix {
        let i = C64::new(0.0, 1.0);
        let o = C64::new(0.0, 0.0);
        ComplexMatrix::from_row_major(2, 2, vec![o, -i, i, o]).expect("2x2")
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).expect("2x2")
    }
}
