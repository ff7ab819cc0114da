//! Small dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerance ladder.
pub mod tol {
    /// Structural checks (zero blocks, Hermitian symmetry).
    pub const VALIDATION: f64 = 1e-12;
    /// Fixed-point residual of compatible forms.
    pub const FIXED_POINT: f64 = 1e-9;
    /// Invariance of subspaces.
    pub const SUBSPACE: f64 = 1e-8;
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= tol * max_abs(m).max(1.0)
}

/// Eigenvalues of a Hermitian matrix (ascending).
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let e = SymmetricEigen::new(hermitian_part(m));
    let mut v: Vec<f64> = e.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = m.nrows();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let e = SymmetricEigen::new(hermitian_part(m));
    let d = CMatrix::from_diagonal(&DVector::from_iterator(
        n,
        e.eigenvalues.iter().map(|&l| C64::new(f(l), 0.0)),
    ));
    &e.eigenvectors * d * e.eigenvectors.adjoint()
}

/// Orthonormal basis (columns) of the range of a PSD matrix, keeping
/// eigenvalues above `rel_tol · λ_max`.
pub fn psd_range(m: &CMatrix, rel_tol: f64) -> (CMatrix, Vec<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (CMatrix::zeros(0, 0), Vec::new());
    }
    let e = SymmetricEigen::new(hermitian_part(m));
    let lmax = e.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let keep: Vec<usize> = (0..n)
        .filter(|&i| lmax > 0.0 && e.eigenvalues[i] > rel_tol * lmax)
        .collect();
    let mut q = CMatrix::zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        q.set_column(j, &e.eigenvectors.column(i));
    }
    (q, keep.iter().map(|&i| e.eigenvalues[i]).collect())
}

/// Incrementally built orthonormal family.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    dim: usize,
    vectors: Vec<CVector>,
}

impl OrthoBasis {
    pub fn new(dim: usize) -> Self {
        OrthoBasis { dim, vectors: Vec::new() }
    }

    pub fn from_columns(m: &CMatrix, tol: f64) -> Self {
        let mut b = OrthoBasis::new(m.nrows());
        for j in 0..m.ncols() {
            b.insert(&m.column(j).into_owned(), tol);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.vectors.len() == self.dim
    }

    /// Adds the component of `v` orthogonal to the family when its norm
    /// exceeds `tol · ‖v‖`. Returns whether the family grew.
    pub fn insert(&mut self, v: &CVector, tol: f64) -> bool {
        let norm0 = v.norm();
        if norm0 == 0.0 || self.is_full() {
            return false;
        }
        let mut r = v.clone();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for q in &self.vectors {
                let c = q.dotc(&r);
                r -= q * c;
            }
        }
        let n = r.norm();
        if n > tol * norm0 {
            self.vectors.push(r / C64::new(n, 0.0));
            true
        } else {
            false
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.vectors.len());
        for (j, v) in self.vectors.iter().enumerate() {
            m.set_column(j, v);
        }
        m
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> CMatrix {
        let mut full = self.clone();
        let start = full.len();
        for i in 0..self.dim {
            let mut e = CVector::zeros(self.dim);
            e[i] = ONE;
            full.insert(&e, 1e-6);
        }
        let mut m = CMatrix::zeros(self.dim, full.len() - start);
        for (j, v) in full.vectors[start..].iter().enumerate() {
            m.set_column(j, v);
        }
        m
    }
}

/// Orthonormal basis of the (numerical) null space of `m`.
pub fn null_space(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let (r, c) = m.shape();
    if c == 0 {
        return CMatrix::zeros(0, 0);
    }
    let padded = if r < c {
        let mut p = CMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let cols: Vec<CVector> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= rel_tol * smax.max(f64::MIN_POSITIVE))
        .map(|i| v_t.row(i).adjoint())
        .collect();
    let mut out = CMatrix::zeros(c, cols.len());
    for (j, v) in cols.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

/// Right singular vector of the smallest singular value of a square matrix.
pub fn smallest_singular_vector(m: &CMatrix) -> CVector {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let (i, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    v_t.row(i).adjoint()
}

/// Eigenvalues of a general complex square matrix.
pub fn eigenvalues(m: &CMatrix) -> Vec<C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    nalgebra::Schur::new(m.clone())
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .unwrap_or_default()
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| random_complex(rng))
}

/// Haar-ish random unitary via QR of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let qr = random_matrix(rng, n, n).qr();
    qr.q()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ortho_basis_and_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_matrix(&mut rng, 4, 2);
        let b = OrthoBasis::from_columns(&m, 1e-10);
        assert_eq!(b.len(), 2);
        let q = b.to_matrix();
        let c = b.complement();
        assert_eq!(c.ncols(), 2);
        assert!(max_abs(&(q.adjoint() * &c)) < 1e-12);
        assert!(max_abs(&(c.adjoint() * &c - CMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = CMatrix::from_row_slice(1, 3, &[ONE, ONE, ZERO]);
        let n = null_space(&m, 1e-10);
        assert_eq!(n.ncols(), 2);
        assert!(max_abs(&(&m * &n)) < 1e-12);
    }

    #[test]
    fn psd_sqrt_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = random_matrix(&mut rng, 3, 3);
        let p = &g * g.adjoint();
        let s = hermitian_fn(&p, f64::sqrt);
        assert!(max_abs(&(&s * &s - &p)) < 1e-10);
        assert!(min_eigenvalue(&p) > 0.0);
    }
}
