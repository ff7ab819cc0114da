//! Minimal field abstraction shared by the floating-point and exact kernels.

use crate::linalg::{CMatrix, C64};

pub trait Ring: Clone + Send + Sync + 'static {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn conj(&self) -> Self;
    fn is_zero(&self) -> bool;
}

impl Ring for C64 {
    #[inline]
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    #[inline]
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    #[inline]
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    #[inline]
    fn conj(&self) -> Self {
        C64::conj(self)
    }
    #[inline]
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<S> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<S>,
}

impl<S: Ring> Dense<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Dense { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Ring::is_zero)
    }

    /// `out = self · v`.
    #[inline]
    pub fn apply_into(&self, v: &[S], out: &mut Vec<S>) {
        out.clear();
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = S::zero();
            for (m, x) in row.iter().zip(v) {
                acc = acc.add(&m.mul(x));
            }
            out.push(acc);
        }
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        let mut out = Vec::with_capacity(self.rows);
        self.apply_into(v, &mut out);
        out
    }

    /// Sesquilinear pairing `v* · self · u`, linear in `u`.
    #[inline]
    pub fn pair(&self, u: &[S], v: &[S]) -> S {
        let mut acc = S::zero();
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut r = S::zero();
            for (m, x) in row.iter().zip(u) {
                r = r.add(&m.mul(x));
            }
            acc = acc.add(&v[i].conj().mul(&r));
        }
        acc
    }
}

impl Dense<C64> {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(m[(i, j)]);
            }
        }
        Dense { rows, cols, data }
    }
}
