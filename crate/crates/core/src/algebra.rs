//! Small dense linear algebra and polynomial arithmetic in the rate parameter.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Square row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::precondition("matrix rows must form a square array"));
        }
        Ok(DenseMatrix {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `I + self * diag(d)`.
    pub fn identity_plus_scaled_columns(&self, d: &[T]) -> Self {
        Self::from_fn(self.n, |i, j| {
            let delta = if i == j { T::one() } else { T::zero() };
            delta + self[(i, j)] * d[j]
        })
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn determinant(&self) -> T {
        match Lu::factor(self) {
            Ok(lu) => lu.determinant(),
            Err(_) => T::zero(),
        }
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// LU factorisation with partial (row) pivoting, reusable across right-hand sides.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: DenseMatrix<T>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Real> Lu<T> {
    pub fn factor(a: &DenseMatrix<T>) -> Result<Self> {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        // pivots below this are zero to working precision
        let floor = a.max_abs() * T::epsilon() * T::from_usize(n.max(1)).expect("n");
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(best > floor) {
                return Err(Error::Singular {
                    pivot: k,
                    magnitude: best.as_f64(),
                });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor != T::zero() {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= factor * u;
                    }
                }
            }
        }
        Ok(Lu { lu, perm, sign })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.dim();
        assert_eq!(b.len(), n, "right-hand side length");
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: T = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: T = (i + 1..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }

    pub fn determinant(&self) -> T {
        (0..self.lu.dim()).fold(self.sign, |d, i| d * self.lu[(i, i)])
    }
}

/// Solves `A x = b` by row-pivoted Gaussian elimination.
pub fn solve_linear<T: Real>(a: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    if b.len() != a.dim() {
        return Err(Error::precondition(format!(
            "right-hand side has length {}, matrix is {}x{}",
            b.len(),
            a.dim(),
            a.dim()
        )));
    }
    Ok(Lu::factor(a)?.solve(b))
}

/// `G^(j)`: `G` with row `j` subtracted from every row.
pub fn row_subtracted<T: Real>(g: &DenseMatrix<T>, j: usize) -> Result<DenseMatrix<T>> {
    if j >= g.dim() {
        return Err(Error::precondition(format!(
            "row index {j} out of range for dimension {}",
            g.dim()
        )));
    }
    Ok(DenseMatrix::from_fn(g.dim(), |i, k| g[(i, k)] - g[(j, k)]))
}

/// Polynomial in one variable; `coeffs[i]` multiplies `x^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| *c == T::zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Polynomial {
            coeffs: vec![T::one()],
        }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `x^i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).copied().unwrap_or_else(T::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * x + c)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn leading(&self) -> T {
        self.coeffs.last().copied().unwrap_or_else(T::zero)
    }

    /// Drops coefficients whose magnitude is at most `tol` times the largest.
    pub fn chop(&self, tol: T) -> Self {
        let m = self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()));
        Self::new(
            self.coeffs
                .iter()
                .map(|&c| if c.abs() <= tol * m { T::zero() } else { c })
                .collect(),
        )
    }
}

impl<T: Real> Add for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<T: Real> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<T: Real> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: Self) -> Polynomial<T> {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Polynomial::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl<T: Real> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Ratio of two polynomials; normalised so that `denominator(0) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalForm<T> {
    pub numerator: Polynomial<T>,
    pub denominator: Polynomial<T>,
}

impl<T: Real> RationalForm<T> {
    /// Builds the form and rescales both sides so the denominator's
    /// constant term is one. Fails when that term is zero.
    pub fn normalized(numerator: Polynomial<T>, denominator: Polynomial<T>) -> Result<Self> {
        let c0 = denominator.coeff(0);
        if c0 == T::zero() {
            return Err(Error::precondition("denominator vanishes at zero"));
        }
        let s = T::one() / c0;
        let mut den = denominator.scale(s);
        if let Some(first) = den.coeffs.first_mut() {
            *first = T::one();
        }
        Ok(RationalForm {
            numerator: numerator.scale(s),
            denominator: den,
        })
    }

    pub fn eval(&self, x: T) -> T {
        self.numerator.eval(x) / self.denominator.eval(x)
    }

    /// Derivative at zero, i.e. the small-argument slope.
    pub fn slope_at_zero(&self) -> T {
        let (a0, a1) = (self.numerator.coeff(0), self.numerator.coeff(1));
        let (b0, b1) = (self.denominator.coeff(0), self.denominator.coeff(1));
        (a1 * b0 - a0 * b1) / (b0 * b0)
    }
}

/// Coefficients of `det(I + k G)` as a polynomial in `k`.
///
/// The coefficient of `k^m` is the sum of the `m x m` principal minors of
/// `G`. They are recovered by evaluating the determinant at `k = 1..=C` and
/// solving the Vandermonde system; the constant term is exactly one.
pub fn det_poly<T: Real>(g: &DenseMatrix<T>) -> Polynomial<T> {
    let c = g.dim();
    if c == 0 {
        return Polynomial::one();
    }
    let nodes: Vec<T> = (1..=c).map(|t| T::from_usize(t).expect("node")).collect();
    let vander = DenseMatrix::from_fn(c, |r, m| nodes[r].powi(m as i32 + 1));
    let rhs: Vec<T> = nodes
        .iter()
        .map(|&k| g.identity_plus_scaled_columns(&vec![k; c]).determinant() - T::one())
        .collect();
    let higher = solve_linear(&vander, &rhs).expect("distinct interpolation nodes");
    let mut coeffs = Vec::with_capacity(c + 1);
    coeffs.push(T::one());
    coeffs.extend(higher);
    Polynomial::new(coeffs)
}
