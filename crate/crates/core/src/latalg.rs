//! Exact linear algebra over Z and Q: dense matrices, Smith normal form,
//! inertia, LLL reduction and budgeted Fincke–Pohst enumeration.

use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactnum::{floor_sqrt, FieldElem, Rational};

/// Ring operations needed by the generic matrix code. Method names avoid
/// clashing with `num_traits` when both are in scope.
pub trait Scalar: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_nil(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negated(&self) -> Self;
}

pub trait FieldScalar: Scalar {
    fn recip_of(&self) -> Option<Self>;
}

macro_rules! num_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn zero_like(&self) -> Self {
                <$t>::zero()
            }
            fn one_like(&self) -> Self {
                <$t>::one()
            }
            fn is_nil(&self) -> bool {
                Zero::is_zero(self)
            }
            fn plus(&self, o: &Self) -> Self {
                self + o
            }
            fn minus(&self, o: &Self) -> Self {
                self - o
            }
            fn times(&self, o: &Self) -> Self {
                self * o
            }
            fn negated(&self) -> Self {
                -self
            }
        }
    };
}

num_scalar!(BigInt);
num_scalar!(Rational);

impl FieldScalar for Rational {
    fn recip_of(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
}

impl Scalar for FieldElem {
    fn zero_like(&self) -> Self {
        FieldElem::zero(self.d())
    }
    fn one_like(&self) -> Self {
        FieldElem::one(self.d())
    }
    fn is_nil(&self) -> bool {
        self.is_zero()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
}

impl FieldScalar for FieldElem {
    fn recip_of(&self) -> Option<Self> {
        self.inv()
    }
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type IntMatrix = Matrix<BigInt>;
pub type RatMatrix = Matrix<Rational>;

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut l = f.debug_list();
        for i in 0..self.rows {
            l.entry(&&self.data[i * self.cols..(i + 1) * self.cols]);
        }
        l.finish()
    }
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from rows; `cols` is needed to describe a 0 x n matrix.
    pub fn from_rows_with_cols(rows: Vec<Vec<T>>, cols: usize) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend(r);
        }
        Ok(Matrix {
            rows: n,
            cols,
            data,
        })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_rows_with_cols(rows, cols)
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

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Matrix::from_fn(idx.len(), self.cols, |i, j| self.get(idx[i], j).clone())
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }
}

impl<T: PartialEq + Clone> Matrix<T> {
    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn identity_like(n: usize, sample: &T) -> Self {
        let (z, o) = (sample.zero_like(), sample.one_like());
        Matrix::from_fn(n, n, |i, j| if i == j { o.clone() } else { z.clone() })
    }

    pub fn zeros_like(rows: usize, cols: usize, sample: &T) -> Self {
        let z = sample.zero_like();
        Matrix::from_fn(rows, cols, |_, _| z.clone())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "matrix product dimension mismatch");
        let zero = self.data.first().or(o.data.first()).map(Scalar::zero_like);
        Matrix::from_fn(self.rows, o.cols, |i, j| {
            let mut acc = zero.clone().expect("empty product");
            for k in 0..self.cols {
                let (a, b) = (self.get(i, k), o.get(k, j));
                if !a.is_nil() && !b.is_nil() {
                    acc = acc.plus(&a.times(b));
                }
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| dot(self.row(i), v).expect("nonempty row"))
            .collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).plus(o.get(i, j))
        })
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.times(s))
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.data.iter().all(Scalar::is_nil)
    }

    /// Block diagonal sum.
    pub fn direct_sum(&self, o: &Self, sample: &T) -> Self {
        let z = sample.zero_like();
        let n = self.rows + o.rows;
        let m = self.cols + o.cols;
        Matrix::from_fn(n, m, |i, j| {
            if i < self.rows && j < self.cols {
                self.get(i, j).clone()
            } else if i >= self.rows && j >= self.cols {
                o.get(i - self.rows, j - self.cols).clone()
            } else {
                z.clone()
            }
        })
    }
}

/// Dot product; `None` for empty slices (no sample to take zero from).
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> Option<T> {
    let mut it = a.iter().zip(b);
    let (x, y) = it.next()?;
    Some(it.fold(x.times(y), |acc, (x, y)| acc.plus(&x.times(y))))
}

impl<T: FieldScalar> Matrix<T> {
    /// Gauss–Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return Some(self.clone());
        }
        let mut a = self.clone();
        let mut inv = Matrix::identity_like(n, &self.data[0]);
        for c in 0..n {
            let p = (c..n).find(|&r| !a.get(r, c).is_nil())?;
            a.swap_rows(c, p);
            inv.swap_rows(c, p);
            let piv = a.get(c, c).recip_of()?;
            for j in 0..n {
                let x = a.get(c, j).times(&piv);
                a.set(c, j, x);
                let y = inv.get(c, j).times(&piv);
                inv.set(c, j, y);
            }
            for r in 0..n {
                if r == c || a.get(r, c).is_nil() {
                    continue;
                }
                let f = a.get(r, c).clone();
                for j in 0..n {
                    let x = a.get(r, j).minus(&f.times(a.get(c, j)));
                    a.set(r, j, x);
                    let y = inv.get(r, j).minus(&f.times(inv.get(c, j)));
                    inv.set(r, j, y);
                }
            }
        }
        Some(inv)
    }

    pub fn determinant(&self) -> T {
        assert!(self.is_square());
        let n = self.rows;
        assert!(n > 0, "determinant of an empty matrix needs a sample");
        let mut a = self.clone();
        let mut det = self.data[0].one_like();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !a.get(r, c).is_nil()) else {
                return det.zero_like();
            };
            if p != c {
                a.swap_rows(c, p);
                det = det.negated();
            }
            let piv = a.get(c, c).clone();
            det = det.times(&piv);
            let inv = piv.recip_of().unwrap();
            for r in c + 1..n {
                if a.get(r, c).is_nil() {
                    continue;
                }
                let f = a.get(r, c).times(&inv);
                for j in c..n {
                    let x = a.get(r, j).minus(&f.times(a.get(c, j)));
                    a.set(r, j, x);
                }
            }
        }
        det
    }
}

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        Matrix::identity_like(n, &BigInt::zero())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::zeros_like(rows, cols, &BigInt::zero())
    }

    pub fn from_i64<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let rows: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Matrix::from_rows(rows).expect("ragged integer matrix")
    }

    pub fn diag(entries: &[i64]) -> Self {
        let n = entries.len();
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                BigInt::from(entries[i])
            } else {
                BigInt::zero()
            }
        })
    }

    pub fn to_rational(&self) -> RatMatrix {
        self.map(|x| Rational::from_integer(x.clone()))
    }

    /// Fraction-free (Bareiss) determinant.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&r| !a.get(r, k).is_zero()) {
                    Some(p) => {
                        a.swap_rows(k, p);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let x = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, x);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }

    pub fn is_unimodular(&self) -> bool {
        self.is_square() && self.det().abs().is_one()
    }

    /// `vᵀ G w` for a symmetric Gram matrix.
    pub fn bilinear(&self, v: &[BigInt], w: &[BigInt]) -> BigInt {
        let gw = self.mul_vec(w);
        v.iter().zip(&gw).map(|(a, b)| a * b).sum()
    }

    /// `T G Tᵀ`: Gram matrix of the vectors given by the rows of `t`.
    pub fn congruent(&self, t: &IntMatrix) -> IntMatrix {
        t.mul(self).mul(&t.transpose())
    }
}

impl RatMatrix {
    pub fn identity(n: usize) -> Self {
        Matrix::identity_like(n, &Rational::zero())
    }

    /// Integer matrix when every entry is integral.
    pub fn to_integer(&self) -> Option<IntMatrix> {
        self.data
            .iter()
            .all(|x| x.is_integer())
            .then(|| self.map(|x| x.to_integer()))
    }
}

// ---------------------------------------------------------------------------
// Smith normal form

/// `d = u * m * v` with `d` diagonal (d₁ | d₂ | …, nonnegative), `u`, `v`
/// unimodular. `v_inv` is kept because kernels and saturations read it.
#[derive(Clone, Debug)]
pub struct Snf {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
}

impl Snf {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols()))
            .map(|i| self.d.get(i, i).clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }

    /// Checks the certificate; used by debug builds and the test suites.
    pub fn verify(&self, m: &IntMatrix) -> bool {
        let (r, c) = (m.rows(), m.cols());
        let diag_ok = (0..r).all(|i| (0..c).all(|j| i == j || self.d.get(i, j).is_zero()));
        let divides = self.diagonal().windows(2).all(|w| {
            if w[0].is_zero() {
                w[1].is_zero()
            } else {
                w[1].is_multiple_of(&w[0])
            }
        });
        let nonneg = self.diagonal().iter().all(|x| !x.is_negative());
        diag_ok
            && divides
            && nonneg
            && self.u.mul_or_empty(m, c).mul_or_empty(&self.v, c) == self.d
            && self.v.mul_or_empty(&self.v_inv, c) == IntMatrix::identity(c)
            && self.u.is_unimodular()
            && self.v.is_unimodular()
    }
}

impl IntMatrix {
    /// Product that also handles an empty inner dimension.
    fn mul_or_empty(&self, o: &IntMatrix, _hint: usize) -> IntMatrix {
        assert_eq!(self.cols, o.rows);
        if self.cols == 0 {
            return IntMatrix::zeros(self.rows, o.cols);
        }
        if self.rows == 0 || o.cols == 0 {
            return IntMatrix::zeros(self.rows, o.cols);
        }
        self.mul(o)
    }
}

pub fn snf(m: &IntMatrix) -> Snf {
    let (rows, cols) = (m.rows(), m.cols());
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let mut vi = IntMatrix::identity(cols);

    // elementary operations, mirrored on the transforms
    let row_addmul = |d: &mut IntMatrix, u: &mut IntMatrix, dst: usize, src: usize, q: &BigInt| {
        for j in 0..d.cols {
            let x = d.get(dst, j) - q * d.get(src, j);
            d.set(dst, j, x);
        }
        for j in 0..u.cols {
            let x = u.get(dst, j) - q * u.get(src, j);
            u.set(dst, j, x);
        }
    };
    // col_dst -= q col_src  <=>  v_inv row_src += q row_dst
    let col_addmul = |d: &mut IntMatrix,
                      v: &mut IntMatrix,
                      vi: &mut IntMatrix,
                      dst: usize,
                      src: usize,
                      q: &BigInt| {
        for i in 0..d.rows {
            let x = d.get(i, dst) - q * d.get(i, src);
            d.set(i, dst, x);
        }
        for i in 0..v.rows {
            let x = v.get(i, dst) - q * v.get(i, src);
            v.set(i, dst, x);
        }
        for j in 0..vi.cols {
            let x = vi.get(src, j) + q * vi.get(dst, j);
            vi.set(src, j, x);
        }
    };

    for t in 0..rows.min(cols) {
        // smallest nonzero entry of the trailing block becomes the pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let x = d.get(i, j);
                if !x.is_zero() && best.map_or(true, |(bi, bj)| x.abs() < d.get(bi, bj).abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);
        vi.swap_rows(t, pj);

        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if d.get(i, t).is_zero() {
                    continue;
                }
                let q = d.get(i, t).div_floor(d.get(t, t));
                row_addmul(&mut d, &mut u, i, t, &q);
                if !d.get(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if d.get(t, j).is_zero() {
                    continue;
                }
                let q = d.get(t, j).div_floor(d.get(t, t));
                col_addmul(&mut d, &mut v, &mut vi, j, t, &q);
                if !d.get(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                // a smaller remainder sits in row or column t: move it to the pivot
                let mut best = (t, t);
                for i in t + 1..rows {
                    let x = d.get(i, t);
                    if !x.is_zero() && x.abs() < d.get(best.0, best.1).abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..cols {
                    let x = d.get(t, j);
                    if !x.is_zero() && x.abs() < d.get(best.0, best.1).abs() {
                        best = (t, j);
                    }
                }
                if best.0 != t {
                    d.swap_rows(t, best.0);
                    u.swap_rows(t, best.0);
                }
                if best.1 != t {
                    d.swap_cols(t, best.1);
                    v.swap_cols(t, best.1);
                    vi.swap_rows(t, best.1);
                }
                continue;
            }
            // divisibility condition on the trailing block
            let bad = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !d.get(i, j).is_multiple_of(d.get(t, t)));
            match bad {
                Some((i, _)) => row_addmul(&mut d, &mut u, t, i, &-BigInt::one()),
                None => break,
            }
        }
        if d.get(t, t).is_negative() {
            for j in 0..cols {
                let x = -d.get(t, j);
                d.set(t, j, x);
            }
            for j in 0..rows {
                let x = -u.get(t, j);
                u.set(t, j, x);
            }
        }
    }
    let out = Snf { d, u, v, v_inv: vi };
    debug_assert!(out.verify(m), "SNF certificate failed");
    out
}

/// Basis (as rows) of the integer kernel {x : m x = 0}.
pub fn integer_kernel(m: &IntMatrix) -> IntMatrix {
    let s = snf(m);
    let r = s.rank();
    let n = m.cols();
    let cols: Vec<usize> = (r..n).collect();
    Matrix::from_fn(cols.len(), n, |i, j| s.v.get(j, cols[i]).clone())
}

/// Basis (as rows) of the lattice spanned by the rows of `gens`.
pub fn row_lattice_basis(gens: &IntMatrix) -> IntMatrix {
    let s = snf(gens);
    let diag = s.diagonal();
    let r = s.rank();
    Matrix::from_fn(r, gens.cols(), |i, j| &diag[i] * s.v_inv.get(i, j))
}

/// Basis of (Q-span of the rows) ∩ Zⁿ, and a complement completing it to
/// a basis of Zⁿ.
pub fn saturation_and_complement(gens: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let s = snf(gens);
    let r = s.rank();
    let n = gens.cols();
    let sat = s.v_inv.select_rows(&(0..r).collect::<Vec<_>>());
    let comp = s.v_inv.select_rows(&(r..n).collect::<Vec<_>>());
    (sat, comp)
}

// ---------------------------------------------------------------------------
// Inertia

/// (positive, negative, zero) inertia of a symmetric rational matrix via
/// LDLᵀ with symmetric pivoting.
pub fn signature(m: &RatMatrix) -> (usize, usize, usize) {
    assert!(m.is_symmetric(), "signature of a non-symmetric matrix");
    let n = m.rows();
    let mut a = m.clone();
    let mut active: Vec<usize> = (0..n).collect();
    let (mut pos, mut neg) = (0, 0);
    while !active.is_empty() {
        let pivot = active.iter().copied().find(|&i| !a.get(i, i).is_zero());
        let p = match pivot {
            Some(p) => p,
            None => {
                // zero diagonal: e_i <- e_i + e_j makes (i,i) = 2 a_ij
                let pair = active.iter().find_map(|&i| {
                    active
                        .iter()
                        .find(|&&j| j != i && !a.get(i, j).is_zero())
                        .map(|&j| (i, j))
                });
                let Some((i, j)) = pair else { break };
                for &k in &active {
                    let x = a.get(i, k) + a.get(j, k);
                    a.set(i, k, x);
                }
                for &k in &active {
                    let x = a.get(k, i) + a.get(k, j);
                    a.set(k, i, x);
                }
                i
            }
        };
        let piv = a.get(p, p).clone();
        if piv.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        active.retain(|&i| i != p);
        for &i in &active {
            if a.get(i, p).is_zero() {
                continue;
            }
            let f = a.get(i, p) / &piv;
            for &j in &active {
                let x = a.get(i, j) - &f * a.get(p, j);
                a.set(i, j, x);
            }
        }
    }
    (pos, neg, n - pos - neg)
}

pub fn int_signature(m: &IntMatrix) -> (usize, usize, usize) {
    signature(&m.to_rational())
}

/// +1 / -1 for positive / negative definite, `None` otherwise.
pub fn definiteness(m: &IntMatrix) -> Option<i32> {
    let n = m.rows();
    match int_signature(m) {
        (p, 0, 0) if p == n && n > 0 => Some(1),
        (0, q, 0) if q == n && n > 0 => Some(-1),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// LLL

fn round_rational(x: &Rational) -> BigInt {
    (x + Rational::new(BigInt::one(), BigInt::from(2)))
        .floor()
        .to_integer()
}

/// Exact LLL on a positive definite Gram matrix. Returns a unimodular `t`
/// whose rows express the reduced basis; `t g tᵀ` is LLL-reduced.
pub fn lll(gram: &IntMatrix, delta: &Rational) -> Result<IntMatrix> {
    let quarter = Rational::new(BigInt::one(), BigInt::from(4));
    if !(delta > &quarter && delta < &Rational::one()) {
        return Err(Error::InvalidArgument(format!(
            "LLL parameter {delta} outside (1/4, 1)"
        )));
    }
    if !gram.is_symmetric() {
        return Err(Error::InvalidArgument(
            "Gram matrix is not symmetric".into(),
        ));
    }
    let n = gram.rows();
    let mut t = IntMatrix::identity(n);
    if n == 0 {
        return Ok(t);
    }
    let mut g = gram.clone();
    let mut mu = vec![vec![Rational::zero(); n]; n];
    let mut b = vec![Rational::zero(); n];
    let half = Rational::new(BigInt::one(), BigInt::from(2));

    let gso_row = |g: &IntMatrix, mu: &mut Vec<Vec<Rational>>, b: &mut Vec<Rational>, k: usize| {
        for j in 0..k {
            let mut x = Rational::from_integer(g.get(k, j).clone());
            for i in 0..j {
                x -= &mu[j][i] * &mu[k][i] * &b[i];
            }
            mu[k][j] = x / &b[j];
        }
        let mut bk = Rational::from_integer(g.get(k, k).clone());
        for j in 0..k {
            bk -= &mu[k][j] * &mu[k][j] * &b[j];
        }
        b[k] = bk;
    };

    gso_row(&g, &mut mu, &mut b, 0);
    if !b[0].is_positive() {
        return Err(Error::NotPositiveDefinite);
    }
    let mut k = 1;
    let mut kmax = 0;
    while k < n {
        if k > kmax {
            kmax = k;
            gso_row(&g, &mut mu, &mut b, k);
            if !b[k].is_positive() {
                return Err(Error::NotPositiveDefinite);
            }
        }
        reduce(&mut g, &mut t, &mut mu, k, k - 1, &half);
        let lhs = &b[k];
        let rhs = (delta - &mu[k][k - 1] * &mu[k][k - 1]) * &b[k - 1];
        if *lhs < rhs {
            // swap b_k and b_{k-1}
            t.swap_rows(k, k - 1);
            g.swap_rows(k, k - 1);
            g.swap_cols(k, k - 1);
            for j in 0..k - 1 {
                let tmp = mu[k][j].clone();
                mu[k][j] = mu[k - 1][j].clone();
                mu[k - 1][j] = tmp;
            }
            let m = mu[k][k - 1].clone();
            let bn = &b[k] + &m * &m * &b[k - 1];
            mu[k][k - 1] = &m * &b[k - 1] / &bn;
            let bk = &b[k - 1] * &b[k] / &bn;
            b[k] = bk;
            b[k - 1] = bn;
            for i in k + 1..=kmax {
                let tt = mu[i][k].clone();
                mu[i][k] = &mu[i][k - 1] - &m * &tt;
                mu[i][k - 1] = tt + &mu[k][k - 1] * &mu[i][k];
            }
            k = (k - 1).max(1);
        } else {
            for l in (0..k - 1).rev() {
                reduce(&mut g, &mut t, &mut mu, k, l, &half);
            }
            k += 1;
        }
    }
    debug_assert_eq!(gram.congruent(&t), g);
    Ok(t)
}

fn reduce(
    g: &mut IntMatrix,
    t: &mut IntMatrix,
    mu: &mut [Vec<Rational>],
    k: usize,
    l: usize,
    half: &Rational,
) {
    if mu[k][l].abs() <= *half {
        return;
    }
    let q = round_rational(&mu[k][l]);
    let n = g.rows();
    for j in 0..n {
        let x = t.get(k, j) - &q * t.get(l, j);
        t.set(k, j, x);
    }
    for j in 0..n {
        let x = g.get(k, j) - &q * g.get(l, j);
        g.set(k, j, x);
    }
    for i in 0..n {
        let x = g.get(i, k) - &q * g.get(i, l);
        g.set(i, k, x);
    }
    let qr = Rational::from_integer(q);
    mu[k][l] -= &qr;
    for i in 0..l {
        let x = &qr * &mu[l][i];
        mu[k][i] -= x;
    }
}

pub fn lll_default(gram: &IntMatrix) -> Result<IntMatrix> {
    lll(gram, &Rational::new(BigInt::from(3), BigInt::from(4)))
}

// ---------------------------------------------------------------------------
// Fincke–Pohst

/// Work limits for an enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumBudget {
    pub max_nodes: u64,
    pub max_results: Option<usize>,
}

impl EnumBudget {
    /// Default node budget, sized for the rank-24 rootlessness check.
    pub const DEFAULT_NODES: u64 = 100_000_000;

    pub fn new(max_nodes: u64) -> Self {
        EnumBudget {
            max_nodes: max_nodes.max(1),
            max_results: None,
        }
    }

    pub fn with_max_results(mut self, n: usize) -> Self {
        self.max_results = Some(n.max(1));
        self
    }
}

impl Default for EnumBudget {
    fn default() -> Self {
        EnumBudget::new(Self::DEFAULT_NODES)
    }
}

/// Result of an enumeration; `exhaustive` is false when the budget ran out
/// (or the result cap was hit) and `vectors` is then partial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumeration {
    pub vectors: Vec<Vec<BigInt>>,
    pub exhaustive: bool,
    pub nodes: u64,
}

impl Enumeration {
    pub fn require_exhaustive(self) -> Result<Self> {
        if self.exhaustive {
            Ok(self)
        } else {
            Err(Error::BudgetExceeded {
                nodes: self.nodes,
                partial: self.vectors.len(),
            })
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Vectors of a positive definite form with their norms.
#[derive(Clone, Debug)]
pub struct ShortVectors {
    /// (coordinates, norm), one per ±pair, first nonzero coordinate positive.
    pub vectors: Vec<(Vec<BigInt>, BigInt)>,
    pub exhaustive: bool,
    pub nodes: u64,
}

struct Search<'a> {
    n: usize,
    q: Vec<Vec<Rational>>,
    max_nodes: u64,
    max_results: Option<usize>,
    nodes: &'a AtomicU64,
    found: &'a AtomicUsize,
    stop: &'a AtomicBool,
}

/// A partial assignment of coordinates n-1, …, level+1.
#[derive(Clone)]
struct Prefix {
    x: Vec<i64>,
    rem: Rational,
    leading_zero: bool,
}

impl Search<'_> {
    fn tick(&self) -> bool {
        if self.stop.load(Ordering::Relaxed) {
            return false;
        }
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.max_nodes {
            self.stop.store(true, Ordering::Relaxed);
            return false;
        }
        true
    }

    /// Children of `p` at coordinate `i`: (value, remaining bound).
    fn children(&self, i: usize, p: &Prefix) -> Vec<(i64, Rational)> {
        let mut c = Rational::zero();
        for j in i + 1..self.n {
            if p.x[j] != 0 {
                c += &self.q[i][j] * Rational::from_integer(BigInt::from(p.x[j]));
            }
        }
        let qii = &self.q[i][i];
        let s = floor_sqrt(&(&p.rem / qii));
        let lo = (-&c - Rational::from_integer(s.clone() + 1))
            .floor()
            .to_integer();
        let hi = (-&c + Rational::from_integer(s + 1)).ceil().to_integer();
        let mut lo = lo.to_i64().expect("coordinate range");
        let hi = hi.to_i64().expect("coordinate range");
        if p.leading_zero {
            lo = lo.max(0);
        }
        let mut out = Vec::new();
        for xi in lo..=hi {
            let t = Rational::from_integer(BigInt::from(xi)) + &c;
            let used = qii * &t * &t;
            if used <= p.rem {
                out.push((xi, &p.rem - used));
            }
        }
        out
    }

    fn dfs(&self, i: usize, p: &mut Prefix, bound: &Rational, out: &mut Vec<(Vec<i64>, BigInt)>) {
        for (xi, rem) in self.children(i, p) {
            if !self.tick() {
                return;
            }
            let saved = (p.x[i], p.rem.clone(), p.leading_zero);
            p.x[i] = xi;
            p.rem = rem;
            p.leading_zero = saved.2 && xi == 0;
            if i == 0 {
                if !p.leading_zero {
                    let norm = (bound - &p.rem).to_integer();
                    out.push((p.x.clone(), norm));
                    let total = self.found.fetch_add(1, Ordering::Relaxed) + 1;
                    if self.max_results.is_some_and(|m| total >= m) {
                        self.stop.store(true, Ordering::Relaxed);
                    }
                }
            } else {
                self.dfs(i - 1, p, bound, out);
            }
            p.x[i] = saved.0;
            p.rem = saved.1;
            p.leading_zero = saved.2;
        }
    }
}

/// All nonzero v (up to sign) with 0 < vᵀ g v ≤ bound, for positive definite
/// `g`. Runs LLL first and fans the top levels out to rayon workers.
pub fn short_vectors(g: &IntMatrix, bound: &BigInt, budget: &EnumBudget) -> Result<ShortVectors> {
    if definiteness(g) != Some(1) {
        return Err(Error::NotPositiveDefinite);
    }
    let n = g.rows();
    let t = lll_default(g)?;
    let p = g.congruent(&t).to_rational();

    // Cholesky-style decomposition Q(x) = Σ q_ii (x_i + Σ_{j>i} q_ij x_j)²
    let mut q: Vec<Vec<Rational>> = p.to_rows();
    for i in 0..n {
        for j in i + 1..n {
            q[j][i] = q[i][j].clone();
            q[i][j] = &q[i][j] / &q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                let x = &q[k][i] * &q[i][l];
                q[k][l] -= x;
            }
        }
    }

    let nodes = AtomicU64::new(0);
    let found = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let search = Search {
        n,
        q,
        max_nodes: budget.max_nodes,
        max_results: budget.max_results,
        nodes: &nodes,
        found: &found,
        stop: &stop,
    };
    let boundr = Rational::from_integer(bound.clone());

    // expand the two top levels sequentially, then fan out
    let root = Prefix {
        x: vec![0; n],
        rem: boundr.clone(),
        leading_zero: true,
    };
    let mut frontier = vec![(n, root)];
    let mut leaves: Vec<(Vec<i64>, BigInt)> = Vec::new();
    for _ in 0..2 {
        let mut next = Vec::new();
        for (level, pre) in frontier {
            if level == 0 {
                continue;
            }
            let i = level - 1;
            for (xi, rem) in search.children(i, &pre) {
                if !search.tick() {
                    break;
                }
                let mut x = pre.x.clone();
                x[i] = xi;
                let lz = pre.leading_zero && xi == 0;
                if i == 0 {
                    if !lz {
                        leaves.push((x, (&boundr - &rem).to_integer()));
                        found.fetch_add(1, Ordering::Relaxed);
                    }
                } else {
                    next.push((
                        i,
                        Prefix {
                            x,
                            rem,
                            leading_zero: lz,
                        },
                    ));
                }
            }
        }
        frontier = next;
    }
    let mut found_vecs: Vec<(Vec<i64>, BigInt)> = frontier
        .into_par_iter()
        .flat_map_iter(|(level, mut pre)| {
            let mut out = Vec::new();
            search.dfs(level - 1, &mut pre, &boundr, &mut out);
            out
        })
        .collect();
    found_vecs.extend(leaves);

    let tt = t.transpose();
    let mut vectors: Vec<(Vec<BigInt>, BigInt)> = found_vecs
        .into_iter()
        .map(|(x, norm)| {
            let xb: Vec<BigInt> = x.into_iter().map(BigInt::from).collect();
            let mut v = tt.mul_vec(&xb);
            if v.iter()
                .find(|c| !c.is_zero())
                .is_some_and(|c| c.is_negative())
            {
                v.iter_mut().for_each(|c| *c = -&*c);
            }
            (v, norm)
        })
        .collect();
    vectors.sort();
    vectors.dedup();
    if let Some(m) = budget.max_results {
        vectors.truncate(m);
    }
    let exhausted = stop.load(Ordering::Relaxed);
    Ok(ShortVectors {
        vectors,
        exhaustive: !exhausted,
        nodes: nodes.load(Ordering::Relaxed),
    })
}

/// All v ≠ 0 with vᵀ g v = target for a definite `g` (target must carry the
/// sign of the form). With `up_to_sign`, one vector per ±pair (first
/// nonzero coordinate positive); otherwise both signs. Sorted.
pub fn enumerate_norm_vectors(
    g: &IntMatrix,
    target: &BigInt,
    budget: &EnumBudget,
    up_to_sign: bool,
) -> Result<Enumeration> {
    let sign = definiteness(g).ok_or(Error::NotDefinite)?;
    if target.is_zero() || (target.is_positive() != (sign > 0)) {
        return Err(Error::InvalidArgument(format!(
            "target {target} does not carry the sign of the form"
        )));
    }
    let (pos, bound) = if sign > 0 {
        (g.clone(), target.clone())
    } else {
        (g.map(|x| -x), -target)
    };
    // the node budget applies to the whole ball; results are filtered after
    let inner = EnumBudget {
        max_nodes: budget.max_nodes,
        max_results: None,
    };
    let sv = short_vectors(&pos, &bound, &inner)?;
    let mut vectors: Vec<Vec<BigInt>> = sv
        .vectors
        .into_iter()
        .filter(|(_, nv)| *nv == bound)
        .map(|(v, _)| v)
        .collect();
    if !up_to_sign {
        let neg: Vec<Vec<BigInt>> = vectors
            .iter()
            .map(|v| v.iter().map(|c| -c).collect())
            .collect();
        vectors.extend(neg);
        vectors.sort();
    }
    let mut exhaustive = sv.exhaustive;
    if let Some(m) = budget.max_results {
        if vectors.len() > m {
            vectors.truncate(m);
            exhaustive = false;
        }
    }
    Ok(Enumeration {
        vectors,
        exhaustive,
        nodes: sv.nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn e8() -> IntMatrix {
        // Bourbaki labelling: 1-3-4-5-6-7-8 with 2 attached to 4
        let edges = [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3)];
        let mut m = IntMatrix::diag(&[2; 8]);
        for (a, b) in edges {
            m.set(a, b, BigInt::from(-1));
            m.set(b, a, BigInt::from(-1));
        }
        m
    }

    #[test]
    fn snf_examples() {
        let s = snf(&IntMatrix::diag(&[2, 2]));
        assert_eq!(s.d, IntMatrix::diag(&[2, 2]));
        assert_eq!(s.u, IntMatrix::identity(2));
        assert_eq!(s.v, IntMatrix::identity(2));

        let m = IntMatrix::from_i64(&[[0, 1], [1, 0]]);
        let s = snf(&m);
        assert_eq!(s.diagonal(), vec![BigInt::one(), BigInt::one()]);
        assert!(s.verify(&m));

        let s = snf(&e8());
        assert!(s.diagonal().iter().all(One::is_one));
        assert!(s.verify(&e8()));

        let m = IntMatrix::from_i64(&[[2, 4, 4], [-6, 6, 12], [10, -4, -16]]);
        let s = snf(&m);
        assert_eq!(
            s.diagonal(),
            vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]
        );
    }

    #[test]
    fn snf_rectangular() {
        let m = IntMatrix::from_i64(&[[1, 2, 3], [2, 4, 6]]);
        let s = snf(&m);
        assert!(s.verify(&m));
        assert_eq!(s.rank(), 1);
        let k = integer_kernel(&m);
        assert_eq!(k.rows(), 2);
        for r in 0..2 {
            assert!(m.mul_vec(k.row(r)).iter().all(Zero::is_zero));
        }
        let b = row_lattice_basis(&IntMatrix::from_i64(&[[2, 0], [0, 2], [2, 2]]));
        assert_eq!(b.rows(), 2);
        assert_eq!(b.det().abs(), BigInt::from(4));
    }

    #[test]
    fn signatures() {
        assert_eq!(
            int_signature(&IntMatrix::from_i64(&[[0, 1], [1, 0]])),
            (1, 1, 0)
        );
        assert_eq!(int_signature(&e8().map(|x| -x)), (0, 8, 0));
        assert_eq!(int_signature(&IntMatrix::zeros(3, 3)), (0, 0, 3));
    }

    #[test]
    fn lll_examples() {
        let d = Rational::new(BigInt::from(3), BigInt::from(4));
        assert_eq!(
            lll(&IntMatrix::identity(3), &d).unwrap(),
            IntMatrix::identity(3)
        );
        let g = IntMatrix::from_i64(&[[4, 2], [2, 4]]);
        let t = lll(&g, &d).unwrap();
        let r = g.congruent(&t);
        assert!(t.is_unimodular());
        assert!(r.get(0, 0) <= g.get(0, 0) && r.get(1, 1) <= g.get(1, 1));
        // scrambled E8
        let s = IntMatrix::from_i64(&[
            [1, 3, 0, 0, 0, 0, 0, 0],
            [0, 1, 5, 0, 0, 0, 0, 0],
            [0, 0, 1, 2, 0, 0, 0, 0],
            [0, 0, 0, 1, 7, 0, 0, 0],
            [0, 0, 0, 0, 1, 1, 0, 0],
            [0, 0, 0, 0, 0, 1, 4, 0],
            [0, 0, 0, 0, 0, 0, 1, 3],
            [0, 0, 0, 0, 0, 0, 0, 1],
        ]);
        assert!(s.is_unimodular());
        let g = e8().congruent(&s);
        let t = lll(&g, &d).unwrap();
        let r = g.congruent(&t);
        assert!((0..8).all(|i| r.get(i, i) <= &BigInt::from(4)));
        assert_eq!(
            lll(&IntMatrix::from_i64(&[[1, 2], [2, 1]]), &d),
            Err(Error::NotPositiveDefinite)
        );
    }

    #[test]
    fn enumeration_examples() {
        let b = EnumBudget::default();
        let a1 = IntMatrix::from_i64(&[[-2]]);
        let e = enumerate_norm_vectors(&a1, &BigInt::from(-2), &b, false).unwrap();
        assert_eq!(e.vectors.len(), 2);
        let e = enumerate_norm_vectors(&a1, &BigInt::from(-2), &b, true).unwrap();
        assert_eq!(e.vectors, vec![vec![BigInt::one()]]);

        let e8n = e8().map(|x| -x);
        let e = enumerate_norm_vectors(&e8n, &BigInt::from(-2), &b, false).unwrap();
        assert_eq!(e.vectors.len(), 240);
        assert!(e.exhaustive);
        for v in &e.vectors {
            assert_eq!(e8n.bilinear(v, v), BigInt::from(-2));
        }
        assert!(matches!(
            enumerate_norm_vectors(
                &IntMatrix::from_i64(&[[0, 1], [1, 0]]),
                &BigInt::from(2),
                &b,
                true
            ),
            Err(Error::NotDefinite)
        ));
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let e =
            enumerate_norm_vectors(&e8(), &BigInt::from(4), &EnumBudget::new(50), true).unwrap();
        assert!(!e.exhaustive);
        assert!(matches!(
            e.require_exhaustive(),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn inverse_and_det() {
        let m = e8().to_rational();
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), RatMatrix::identity(8));
        assert_eq!(m.determinant(), Rational::one());
        assert_eq!(e8().det(), BigInt::one());
        assert_eq!(
            IntMatrix::from_i64(&[[0, 2], [2, 0]]).det(),
            BigInt::from(-4)
        );
    }
}

/// Basis (as rows) of {x ∈ Zᵏ : φ x ∈ Zᵐ} for a rational m×k matrix φ.
pub fn integral_preimage(phi: &RatMatrix) -> IntMatrix {
    let (m, k) = (phi.rows(), phi.cols());
    let l = phi
        .entries()
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    if l.is_one() || m == 0 {
        return IntMatrix::identity(k);
    }
    // P x + l y = 0 with P = lφ
    let big = IntMatrix::from_fn(m, k + m, |i, j| {
        if j < k {
            (phi.get(i, j) * Rational::from_integer(l.clone())).to_integer()
        } else if j - k == i {
            l.clone()
        } else {
            BigInt::zero()
        }
    });
    let ker = integer_kernel(&big);
    let proj = IntMatrix::from_fn(ker.rows(), k, |i, j| ker.get(i, j).clone());
    row_lattice_basis(&proj)
}
