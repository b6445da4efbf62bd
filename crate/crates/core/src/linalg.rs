//! Dense complex linear algebra for the small dimensions used by the
//! protocols (2 to 16).
//!
//! Tensor ordering: in `kron(a, b)` the first factor occupies the
//! high-order index, so a composite index is `i_a * b.rows + i_b`. Every
//! multi-particle state in this crate lists particles from high to low
//! order in the order they are named (unknown qubit, Alice's half, Bob).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Complex = Complex64;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);

/// Shorthand for a real-valued complex number.
pub fn re(x: f64) -> Complex {
    Complex::new(x, 0.0)
}

/// Numerical tolerance used by validation routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    eps: f64,
}

impl Tolerance {
    pub const DEFAULT_EPS: f64 = 1e-9;

    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidParameter {
                name: "eps",
                value: eps,
                reason: "tolerance must be positive and finite",
            });
        }
        Ok(Self { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            eps: Self::DEFAULT_EPS,
        }
    }
}

/// Which factor of a bipartite system a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Immutable dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Panics on ragged or non-finite input;
    /// intended for literals.
    pub fn from_rows<R: AsRef<[Complex]>>(rows: &[R]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        assert!(
            rows.iter().all(|r| r.as_ref().len() == n_cols),
            "ragged matrix literal"
        );
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(n_rows, n_cols, data).expect("invalid matrix literal")
    }

    /// Builds a matrix from real nested rows.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let rows: Vec<Vec<Complex>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| re(x)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![ONE; n])
    }

    pub fn diag(values: &[Complex]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    pub fn real_diag(values: &[f64]) -> Self {
        let v: Vec<Complex> = values.iter().map(|&x| re(x)).collect();
        Self::diag(&v)
    }

    /// Column vector from amplitudes.
    pub fn column(values: &[Complex]) -> Self {
        Self::new(values.len(), 1, values.to_vec()).expect("invalid column vector")
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[Complex], v: &[Complex]) -> Self {
        let mut data = Vec::with_capacity(u.len() * v.len());
        for a in u {
            for b in v {
                data.push(a * b.conj());
            }
        }
        Self::new(u.len(), v.len(), data).expect("invalid outer product")
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

    pub fn get(&self, r: usize, c: usize) -> Complex {
        self.data[r * self.cols + c]
    }

    pub fn entries(&self) -> &[Complex] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c).conj());
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn trace(&self) -> Complex {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, k: Complex) -> Self {
        self.map(|z| z * k)
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.map(|z| z * k)
    }

    fn map(&self, f: impl Fn(Complex) -> Complex) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex, Complex) -> Complex) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "elementwise operation on mismatched shapes"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = vec![ZERO; self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let out = &mut data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    /// `self · m · self†`.
    pub fn conjugate(&self, m: &Self) -> Self {
        &(self * m) * &self.adjoint()
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                dev = dev.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        dev
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.max_abs_diff(other) <= tol
    }

    /// Sub-block restricted to the given row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                data.push(self.get(r, c));
            }
        }
        Self::new(rows.len(), cols.len(), data).expect("empty selection")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self.get(r, c);
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

/// Kronecker product; `a` is the high-order factor.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut data = vec![ZERO; rows * cols];
    for ia in 0..a.rows {
        for ja in 0..a.cols {
            let x = a.get(ia, ja);
            if x == ZERO {
                continue;
            }
            for ib in 0..b.rows {
                for jb in 0..b.cols {
                    data[(ia * b.rows + ib) * cols + ja * b.cols + jb] = x * b.get(ib, jb);
                }
            }
        }
    }
    ComplexMatrix { rows, cols, data }
}

/// Kronecker product of a sequence of factors, first factor highest order.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    let mut iter = factors.into_iter();
    let first = iter.next().expect("kron_all needs at least one factor").clone();
    iter.fold(first, |acc, m| kron(&acc, m))
}

/// Traces out one factor of a bipartite operator with factor dims `(d_a, d_b)`.
pub fn partial_trace(
    m: &ComplexMatrix,
    dims: (usize, usize),
    traced: Subsystem,
) -> Result<ComplexMatrix> {
    let keep = match traced {
        Subsystem::A => [1],
        Subsystem::B => [0],
    };
    reduce(m, &[dims.0, dims.1], &keep)
}

/// Partial trace over a multipartite operator, keeping the listed factors
/// (in their original order) and tracing out the rest.
pub fn reduce(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows != total {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but factor dims {:?} multiply to {}",
            m.rows, m.cols, dims, total
        )));
    }
    if dims.iter().any(|&d| d == 0) {
        return Err(Error::DimensionMismatch("zero factor dimension".into()));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "kept factors {keep:?} must be increasing indices below {}",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let traced_total: usize = traced_dims.iter().product();

    // strides of each factor in the full index
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let offset = |kept_idx: usize, traced_idx: usize| -> usize {
        let mut full = 0;
        let mut k = kept_idx;
        for (pos, &f) in keep.iter().enumerate().rev() {
            full += (k % kept_dims[pos]) * strides[f];
            k /= kept_dims[pos];
        }
        let mut t = traced_idx;
        for (pos, &f) in traced.iter().enumerate().rev() {
            full += (t % traced_dims[pos]) * strides[f];
            t /= traced_dims[pos];
        }
        full
    };

    let mut data = vec![ZERO; out_dim * out_dim];
    for r in 0..out_dim {
        for c in 0..out_dim {
            let mut acc = ZERO;
            for t in 0..traced_total {
                acc += m.get(offset(r, t), offset(c, t));
            }
            data[r * out_dim + c] = acc;
        }
    }
    ComplexMatrix::new(out_dim, out_dim, data)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Unitary whose columns are the matching eigenvectors.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, i: usize) -> Vec<Complex> {
        (0..self.vectors.rows).map(|r| self.vectors.get(r, i)).collect()
    }

    /// Rebuilds `Σ f(λᵢ) vᵢvᵢ†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d: Vec<Complex> = self.values.iter().map(|&l| re(f(l))).collect();
        self.vectors.conjugate(&ComplexMatrix::diag(&d))
    }
}

/// Cyclic Jacobi eigendecomposition for Hermitian matrices.
pub fn eigh(m: &ComplexMatrix, tol: Tolerance) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let deviation = m.hermitian_deviation();
    if deviation > tol.eps() {
        return Err(Error::NotHermitian { deviation });
    }
    let n = m.rows;
    // symmetrize so rounding noise in the input does not bias the result
    let mut a: Vec<Complex> = vec![ZERO; n * n];
    for r in 0..n {
        for c in 0..n {
            a[r * n + c] = (m.get(r, c) + m.get(c, r).conj()) * 0.5;
        }
    }
    let mut v = ComplexMatrix::identity(n).data;
    let scale = m.max_abs().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[r * n + c].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = diag(1, e^{-iθ}) · [[c, s], [-s, c]] on the (p, q) plane
                let jpp = re(c);
                let jpq = re(s);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                // A ← A J
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * jpp + akq * jqp;
                    a[k * n + q] = akp * jpq + akq * jqq;
                }
                // A ← J† A
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[q * n + k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p] = re(a[p * n + p].re);
                a[q * n + q] = re(a[q * n + q].re);
                // V ← V J
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * jpp + vkq * jqp;
                    v[k * n + q] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut vectors = vec![ZERO; n * n];
    for (new_c, &old_c) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + new_c] = v[r * n + old_c];
        }
    }
    Ok(HermitianEigen {
        values,
        vectors: ComplexMatrix::new(n, n, vectors)?,
    })
}

/// Principal square root of a positive semidefinite matrix. Eigenvalues in
/// `[-eps, 0)` are clamped to zero.
pub fn sqrt_psd(m: &ComplexMatrix, tol: Tolerance) -> Result<ComplexMatrix> {
    let eig = eigh(m, tol)?;
    if let Some(&min) = eig.values.first() {
        if min < -tol.eps() {
            return Err(Error::NegativeEigenvalue { eigenvalue: min });
        }
    }
    Ok(eig.reconstruct_with(|l| l.max(0.0).sqrt()))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix, tol: Tolerance) -> Result<f64> {
    Ok(eigh(m, tol)?.values[0])
}

pub fn is_psd(m: &ComplexMatrix, tol: Tolerance) -> bool {
    match eigh(m, tol) {
        Ok(eig) => eig.values[0] >= -tol.eps(),
        Err(_) => false,
    }
}

/// `max |U†U − I|`.
pub fn unitarity_deviation(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    (&u.adjoint() * u).max_abs_diff(&ComplexMatrix::identity(u.rows))
}
