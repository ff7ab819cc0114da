//! Matrix systems `(V_a, H_ba)` with inner products `B_a`.
//!
//! A system assigns a space `V_a` to every letter and a map
//! `H_ba: V_a → V_b` to every ordered pair, with `H_ba = 0` whenever `ba = e`.
//! A form tuple is compatible when `B_a = Σ_b H_ba* B_b H_ba`.

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermitian_fn, max_abs, psd_range, random_complex, random_vector, smallest_singular_vector,
    tol, CMatrix, CVector, OrthoBasis, C64, ONE,
};
use crate::words::{Alphabet, Letter};

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSystem {
    alphabet: Alphabet,
    dims: Vec<usize>,
    maps: Vec<CMatrix>,
}

impl MatrixSystem {
    /// `maps[b * n + a]` is `H_ba`, of shape `dims[b] × dims[a]`.
    pub fn new(alphabet: Alphabet, dims: Vec<usize>, maps: Vec<CMatrix>) -> Result<Self> {
        let n = alphabet.len();
        if dims.len() != n {
            return Err(Error::Shape(format!("expected {n} dimensions, got {}", dims.len())));
        }
        if maps.len() != n * n {
            return Err(Error::Shape(format!("expected {} maps, got {}", n * n, maps.len())));
        }
        for b in 0..n {
            for a in 0..n {
                let m = &maps[b * n + a];
                if m.shape() != (dims[b], dims[a]) {
                    return Err(Error::Shape(format!(
                        "map {}|{} has shape {:?}, expected {:?}",
                        alphabet.name(b),
                        alphabet.name(a),
                        m.shape(),
                        (dims[b], dims[a])
                    )));
                }
            }
        }
        Ok(MatrixSystem { alphabet, dims, maps })
    }

    pub fn zeros(alphabet: Alphabet, dims: Vec<usize>) -> Self {
        let n = alphabet.len();
        let maps = (0..n * n)
            .map(|i| CMatrix::zeros(dims[i / n], dims[i % n]))
            .collect();
        MatrixSystem { alphabet, dims, maps }
    }

    /// Builds a system from a closure, zeroing inverse pairs.
    pub fn from_fn(
        alphabet: Alphabet,
        dims: Vec<usize>,
        mut f: impl FnMut(Letter, Letter) -> CMatrix,
    ) -> Result<Self> {
        let n = alphabet.len();
        let mut maps = Vec::with_capacity(n * n);
        for b in 0..n {
            for a in 0..n {
                if alphabet.inverse(a) == b {
                    maps.push(CMatrix::zeros(dims[b], dims[a]));
                } else {
                    maps.push(f(b, a));
                }
            }
        }
        Self::new(alphabet, dims, maps)
    }

    /// All dimensions 1, `H_ba = scale` whenever `ba ≠ e`.
    pub fn spherical(rank: usize, scale: f64) -> Self {
        let alphabet = Alphabet::standard(rank);
        let dims = vec![1; alphabet.len()];
        Self::from_fn(alphabet, dims, |_, _| CMatrix::from_element(1, 1, C64::new(scale, 0.0)))
            .expect("consistent shapes")
    }

    /// Random system with the given dimensions and complex Gaussian entries.
    pub fn random<R: Rng + ?Sized>(alphabet: Alphabet, dims: Vec<usize>, rng: &mut R) -> Self {
        let d = dims.clone();
        Self::from_fn(alphabet, dims, |b, a| linalg::random_matrix(rng, d[b], d[a]))
            .expect("consistent shapes")
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, a: Letter) -> usize {
        self.dims[a]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn max_dim(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(0)
    }

    #[inline]
    pub fn map(&self, b: Letter, a: Letter) -> &CMatrix {
        &self.maps[b * self.alphabet.len() + a]
    }

    pub fn set_map(&mut self, b: Letter, a: Letter, m: CMatrix) -> Result<()> {
        if m.shape() != (self.dims[b], self.dims[a]) {
            return Err(Error::Shape(format!(
                "map {}|{} must be {}×{}",
                self.alphabet.name(b),
                self.alphabet.name(a),
                self.dims[b],
                self.dims[a]
            )));
        }
        let n = self.alphabet.len();
        self.maps[b * n + a] = m;
        Ok(())
    }

    pub fn max_norm(&self) -> f64 {
        self.maps.iter().map(max_abs).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.max_norm() == 0.0
    }

    pub fn scaled(&self, c: f64) -> Self {
        let s = C64::new(c, 0.0);
        MatrixSystem {
            alphabet: self.alphabet.clone(),
            dims: self.dims.clone(),
            maps: self.maps.iter().map(|m| m * s).collect(),
        }
    }

    /// The adjoint system, with maps `G_ab = H_ba*` running backwards.
    pub fn adjoint(&self) -> Self {
        let n = self.alphabet.len();
        let mut maps = Vec::with_capacity(n * n);
        for b in 0..n {
            for a in 0..n {
                maps.push(self.map(a, b).adjoint());
            }
        }
        MatrixSystem { alphabet: self.alphabet.clone(), dims: self.dims.clone(), maps }
    }

    /// Change of coordinates per letter: `H'_ba = left_b · H_ba · right_a`.
    pub fn conjugate(&self, left: &[CMatrix], right: &[CMatrix]) -> Self {
        let n = self.alphabet.len();
        let dims: Vec<usize> = (0..n).map(|a| right[a].ncols()).collect();
        let mut maps = Vec::with_capacity(n * n);
        for b in 0..n {
            for a in 0..n {
                maps.push(&left[b] * self.map(b, a) * &right[a]);
            }
        }
        MatrixSystem { alphabet: self.alphabet.clone(), dims, maps }
    }

    /// Whether `H_ba` carries any weight.
    pub fn is_edge(&self, b: Letter, a: Letter) -> bool {
        let m = self.map(b, a);
        m.nrows() > 0 && m.ncols() > 0 && max_abs(m) > 0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormTuple {
    forms: Vec<CMatrix>,
}

impl FormTuple {
    pub fn new(forms: Vec<CMatrix>) -> Self {
        FormTuple { forms }
    }

    pub fn identity(dims: &[usize]) -> Self {
        FormTuple { forms: dims.iter().map(|&d| CMatrix::identity(d, d)).collect() }
    }

    pub fn scalar(dims: &[usize], c: f64) -> Self {
        FormTuple {
            forms: dims.iter().map(|&d| CMatrix::identity(d, d) * C64::new(c, 0.0)).collect(),
        }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        FormTuple { forms: dims.iter().map(|&d| CMatrix::zeros(d, d)).collect() }
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn get(&self, a: Letter) -> &CMatrix {
        &self.forms[a]
    }

    pub fn forms(&self) -> &[CMatrix] {
        &self.forms
    }

    pub fn trace_sum(&self) -> f64 {
        self.forms.iter().map(|m| m.trace().re).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let s = C64::new(c, 0.0);
        FormTuple { forms: self.forms.iter().map(|m| m * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.forms.iter().map(max_abs).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &FormTuple) -> f64 {
        self.forms
            .iter()
            .zip(&other.forms)
            .map(|(x, y)| max_abs(&(x - y)))
            .fold(0.0, f64::max)
    }

    /// Real Frobenius inner product summed over letters.
    pub fn dot(&self, other: &FormTuple) -> f64 {
        self.forms
            .iter()
            .zip(&other.forms)
            .map(|(x, y)| x.iter().zip(y.iter()).map(|(p, q)| (p.conj() * q).re).sum::<f64>())
            .sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.forms
            .iter()
            .filter(|m| m.nrows() > 0)
            .map(linalg::min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol * self.max_abs().max(1.0)
    }

    fn hermitized(&self) -> Self {
        FormTuple { forms: self.forms.iter().map(linalg::hermitian_part).collect() }
    }

    fn check_shapes(&self, s: &MatrixSystem) -> Result<()> {
        if self.forms.len() != s.alphabet().len() {
            return Err(Error::Shape(format!(
                "expected {} forms, got {}",
                s.alphabet().len(),
                self.forms.len()
            )));
        }
        for (a, m) in self.forms.iter().enumerate() {
            if m.shape() != (s.dim(a), s.dim(a)) {
                return Err(Error::Shape(format!(
                    "form at `{}` must be {}×{}",
                    s.alphabet().name(a),
                    s.dim(a),
                    s.dim(a)
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Diagnostic {
    ZeroDimension { letter: String },
    NonzeroInversePair { b: String, a: String, norm: f64 },
    NonFinite { b: String, a: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::ZeroDimension { letter } => write!(f, "dimension of `{letter}` is zero"),
            Diagnostic::NonzeroInversePair { b, a, norm } => {
                write!(f, "map {b}|{a} must vanish since {b}{a} = e (max entry {norm:e})")
            }
            Diagnostic::NonFinite { b, a } => write!(f, "map {b}|{a} has non-finite entries"),
        }
    }
}

/// Structural checks; an empty list means the system is valid.
pub fn validate(s: &MatrixSystem) -> Vec<Diagnostic> {
    let al = s.alphabet();
    let mut out = Vec::new();
    for a in al.letters() {
        if s.dim(a) == 0 {
            out.push(Diagnostic::ZeroDimension { letter: al.name(a).into() });
        }
    }
    for b in al.letters() {
        for a in al.letters() {
            let m = s.map(b, a);
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                out.push(Diagnostic::NonFinite { b: al.name(b).into(), a: al.name(a).into() });
            } else if al.inverse(a) == b && max_abs(m) > tol::VALIDATION {
                out.push(Diagnostic::NonzeroInversePair {
                    b: al.name(b).into(),
                    a: al.name(a).into(),
                    norm: max_abs(m),
                });
            }
        }
    }
    out
}

/// `a ↦ Σ_b H_ba* B_b H_ba`.
pub fn transfer_apply(s: &MatrixSystem, forms: &FormTuple) -> Result<FormTuple> {
    forms.check_shapes(s)?;
    Ok(transfer_unchecked(s, forms))
}

fn transfer_unchecked(s: &MatrixSystem, forms: &FormTuple) -> FormTuple {
    let al = s.alphabet();
    let out = al
        .letters()
        .map(|a| {
            let mut acc = CMatrix::zeros(s.dim(a), s.dim(a));
            for b in al.letters() {
                if s.is_edge(b, a) {
                    let h = s.map(b, a);
                    acc += h.adjoint() * forms.get(b) * h;
                }
            }
            acc
        })
        .collect();
    FormTuple::new(out)
}

/// Max-norm of `transfer_apply(S, B) − B`.
pub fn compatibility_residual(s: &MatrixSystem, forms: &FormTuple) -> Result<f64> {
    let t = transfer_apply(s, forms)?;
    Ok(t.max_abs_diff(forms))
}

#[derive(Clone, Debug)]
pub struct NormalizeOptions {
    pub max_iterations: usize,
    /// Relative eigen-residual at which power iteration stops.
    pub tolerance: f64,
    /// Largest tuple-space dimension for which the peripheral spectrum is computed.
    pub spectrum_limit: usize,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions { max_iterations: 100_000, tolerance: 1e-13, spectrum_limit: 400 }
    }
}

/// Eigenvalues of the transfer operator on the spectral circle.
#[derive(Clone, Debug, Default)]
pub struct PeripheralSpectrum {
    pub computed: bool,
    pub eigenvalues: Vec<C64>,
    /// More than one eigenvalue of maximal modulus.
    pub degenerate: bool,
    /// A peripheral eigenvalue other than the spectral radius itself.
    pub periodic: bool,
}

#[derive(Clone, Debug)]
pub struct Normalized {
    pub system: MatrixSystem,
    pub forms: FormTuple,
    pub spectral_radius: f64,
    pub iterations: usize,
    pub residual: f64,
    pub peripheral: PeripheralSpectrum,
}

/// Rescales the maps by `ρ^{-1/2}` and returns a PSD fixed point of the
/// transfer operator with `Σ_a tr B_a = 1`.
pub fn normalize(s: &MatrixSystem) -> Result<Normalized> {
    normalize_with(s, &NormalizeOptions::default())
}

pub fn normalize_with(s: &MatrixSystem, opts: &NormalizeOptions) -> Result<Normalized> {
    let (forms, rho, iterations) = perron_tuple(s, opts)?;
    let system = s.scaled(rho.powf(-0.5));
    let residual = compatibility_residual(&system, &forms)?;
    if residual > tol::FIXED_POINT {
        return Err(Error::NormalizationFailed { iterations, residual });
    }
    let peripheral = peripheral_spectrum(s, rho, opts.spectrum_limit);
    Ok(Normalized { system, forms, spectral_radius: rho, iterations, residual, peripheral })
}

/// Lazy power iteration `B ← (T(B)/ρ_k + B)/2` from the identity tuple.
/// The shift by the identity keeps periodic systems from oscillating.
fn perron_tuple(s: &MatrixSystem, opts: &NormalizeOptions) -> Result<(FormTuple, f64, usize)> {
    let mut b = FormTuple::identity(s.dims());
    let t0 = b.trace_sum();
    if t0 <= 0.0 {
        return Err(Error::DegenerateSystem(0.0));
    }
    b = b.scaled(1.0 / t0);
    let mut rho = 0.0;
    let mut residual = f64::INFINITY;
    for k in 1..=opts.max_iterations {
        let tb = transfer_unchecked(s, &b);
        let bb = b.dot(&b);
        rho = b.dot(&tb) / bb;
        if !(rho > 1e-12 * s.max_norm().powi(2).max(f64::MIN_POSITIVE)) || tb.max_abs() == 0.0 {
            return Err(Error::DegenerateSystem(rho.max(0.0)));
        }
        let diff = tb
            .forms()
            .iter()
            .zip(b.forms())
            .map(|(x, y)| max_abs(&(x - y * C64::new(rho, 0.0))))
            .fold(0.0, f64::max);
        residual = diff / (rho * b.max_abs());
        if residual < opts.tolerance {
            let out = tb.scaled(1.0 / rho).hermitized();
            let ts = out.trace_sum();
            return Ok((out.scaled(1.0 / ts), rho, k));
        }
        let next = FormTuple::new(
            tb.forms()
                .iter()
                .zip(b.forms())
                .map(|(x, y)| (x * C64::new(1.0 / rho, 0.0) + y) * C64::new(0.5, 0.0))
                .collect(),
        )
        .hermitized();
        let ts = next.trace_sum();
        if ts <= 0.0 {
            return Err(Error::DegenerateSystem(rho));
        }
        b = next.scaled(1.0 / ts);
    }
    if residual < tol::FIXED_POINT {
        let ts = b.trace_sum();
        return Ok((b.scaled(1.0 / ts), rho, opts.max_iterations));
    }
    Err(Error::NormalizationFailed { iterations: opts.max_iterations, residual })
}

fn hermitian_coords(d: usize) -> usize {
    d * d
}

fn herm_to_vec(m: &CMatrix, out: &mut Vec<f64>) {
    let d = m.nrows();
    for i in 0..d {
        out.push(m[(i, i)].re);
        for j in i + 1..d {
            out.push(m[(i, j)].re);
            out.push(m[(i, j)].im);
        }
    }
}

fn vec_to_herm(v: &[f64], d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        m[(i, i)] = C64::new(v[k], 0.0);
        k += 1;
        for j in i + 1..d {
            m[(i, j)] = C64::new(v[k], v[k + 1]);
            m[(j, i)] = C64::new(v[k], -v[k + 1]);
            k += 2;
        }
    }
    m
}

/// Real matrix of the transfer operator on Hermitian tuples.
pub fn transfer_matrix(s: &MatrixSystem) -> DMatrix<f64> {
    let dims = s.dims();
    let offsets: Vec<usize> = dims
        .iter()
        .scan(0, |acc, &d| {
            let o = *acc;
            *acc += hermitian_coords(d);
            Some(o)
        })
        .collect();
    let total: usize = dims.iter().map(|&d| hermitian_coords(d)).sum();
    let mut m = DMatrix::<f64>::zeros(total, total);
    for (a, &d) in dims.iter().enumerate() {
        for k in 0..hermitian_coords(d) {
            let mut unit = vec![0.0; hermitian_coords(d)];
            unit[k] = 1.0;
            let mut forms = FormTuple::zeros(dims);
            forms.forms[a] = vec_to_herm(&unit, d);
            let image = transfer_unchecked(s, &forms);
            let mut col = Vec::with_capacity(total);
            for f in image.forms() {
                herm_to_vec(f, &mut col);
            }
            m.set_column(offsets[a] + k, &nalgebra::DVector::from_vec(col));
        }
    }
    m
}

fn peripheral_spectrum(s: &MatrixSystem, rho: f64, limit: usize) -> PeripheralSpectrum {
    let total: usize = s.dims().iter().map(|&d| hermitian_coords(d)).sum();
    if total > limit || total == 0 {
        return PeripheralSpectrum::default();
    }
    let m = transfer_matrix(s);
    let eig = m.complex_eigenvalues();
    let eigenvalues: Vec<C64> = eig.iter().copied().filter(|z| z.norm() >= rho * (1.0 - 1e-6)).collect();
    let degenerate = eigenvalues.len() > 1;
    let periodic = eigenvalues.iter().any(|z| (z - C64::new(rho, 0.0)).norm() > 1e-6 * rho);
    PeripheralSpectrum { computed: true, eigenvalues, degenerate, periodic }
}

#[derive(Clone, Debug)]
pub struct RadicalQuotient {
    pub system: MatrixSystem,
    pub forms: FormTuple,
    /// Per letter, the map `V_a → V_a / ker B_a` in orthonormal coordinates.
    pub projections: Vec<CMatrix>,
    pub removed: Vec<usize>,
    /// Every quotient space is zero.
    pub degenerate: bool,
}

/// Quotients each `V_a` by `ker B_a`; the kernels form an invariant
/// subsystem whenever `B` is compatible.
pub fn radical_quotient(s: &MatrixSystem, forms: &FormTuple) -> Result<RadicalQuotient> {
    radical_quotient_at(s, forms, forms.max_abs())
}

/// As [`radical_quotient`], with eigenvalues below `1e-10·scale` counted as
/// zero.
fn radical_quotient_at(s: &MatrixSystem, forms: &FormTuple, scale: f64) -> Result<RadicalQuotient> {
    let res = compatibility_residual(s, forms)?;
    if res > tol::FIXED_POINT * forms.max_abs().max(1.0) {
        return Err(Error::NotCompatible(res));
    }
    let mut q = Vec::with_capacity(s.alphabet().len());
    let mut removed = Vec::with_capacity(s.alphabet().len());
    for a in s.alphabet().letters() {
        let basis = if scale == 0.0 {
            CMatrix::zeros(s.dim(a), 0)
        } else {
            // drop directions that are negligible against the whole tuple
            let (basis, ev) = psd_range(forms.get(a), 0.0);
            let keep: Vec<usize> = (0..ev.len()).filter(|&i| ev[i] > 1e-10 * scale).collect();
            let mut kept = CMatrix::zeros(s.dim(a), keep.len());
            for (j, &i) in keep.iter().enumerate() {
                kept.set_column(j, &basis.column(i));
            }
            kept
        };
        removed.push(s.dim(a) - basis.ncols());
        q.push(basis);
    }
    let proj: Vec<CMatrix> = q.iter().map(|m| m.adjoint()).collect();
    let system = s.conjugate(&proj, &q);
    let out_forms = FormTuple::new(
        s.alphabet().letters().map(|a| linalg::hermitian_part(&(&proj[a] * forms.get(a) * &q[a]))).collect(),
    );
    let degenerate = system.total_dim() == 0;
    Ok(RadicalQuotient { system, forms: out_forms, projections: proj, removed, degenerate })
}

/// An invariant subsystem, stored as orthonormal bases of `W_a ⊆ V_a`.
#[derive(Clone, Debug)]
pub struct Subsystem {
    pub bases: Vec<CMatrix>,
}

impl Subsystem {
    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(|m| m.ncols()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.bases.iter().map(|m| m.ncols()).sum()
    }

    /// `max_{b,a} ‖(I − P_b) H_ba P_a‖`.
    pub fn invariance_residual(&self, s: &MatrixSystem) -> f64 {
        let al = s.alphabet();
        let mut worst = 0.0f64;
        for b in al.letters() {
            let pb = &self.bases[b] * self.bases[b].adjoint();
            let ib = CMatrix::identity(s.dim(b), s.dim(b));
            for a in al.letters() {
                let img = s.map(b, a) * &self.bases[a];
                worst = worst.max(max_abs(&((&ib - &pb) * img)));
            }
        }
        worst
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub rounds: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { rounds: 50, seed: 0x5eed }
    }
}

/// Randomized search for a nontrivial proper invariant subsystem.
///
/// Each round closes random vectors and eigenvectors of random loop-algebra
/// elements under the maps, on the system and on its adjoint (whose invariant
/// subsystems have invariant orthogonal complements). A returned subsystem is
/// an exact witness; `None` certifies irreducibility only probabilistically.
pub fn find_invariant_subsystem(s: &MatrixSystem, opts: &SearchOptions) -> Option<Subsystem> {
    let total = s.total_dim();
    if total <= 1 {
        return None;
    }
    let adj = s.adjoint();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let letters: Vec<Letter> = s.alphabet().letters().filter(|&a| s.dim(a) > 0).collect();
    for round in 0..opts.rounds.max(1) {
        for (sys, dual) in [(s, false), (&adj, true)] {
            let mut seeds: Vec<(Letter, CVector)> = Vec::new();
            for &a in &letters {
                seeds.push((a, random_vector(&mut rng, s.dim(a))));
            }
            let a = letters[round % letters.len()];
            if let Some(theta) = random_loop_element(sys, a, &mut rng) {
                let d = s.dim(a);
                for lambda in linalg::eigenvalues(&theta) {
                    let shifted = &theta - CMatrix::identity(d, d) * lambda;
                    seeds.push((a, smallest_singular_vector(&shifted)));
                }
            }
            for (a, v) in seeds {
                let w = closure(sys, &[(a, v)]);
                let dim: usize = w.iter().map(|b| b.len()).sum();
                if dim == 0 || dim == total {
                    continue;
                }
                let bases: Vec<CMatrix> = if dual {
                    w.iter().map(|b| b.complement()).collect()
                } else {
                    w.iter().map(|b| b.to_matrix()).collect()
                };
                let sub = Subsystem { bases };
                if sub.invariance_residual(s) <= tol::SUBSPACE * s.max_norm().max(1.0) {
                    return Some(sub);
                }
            }
        }
    }
    None
}

/// Smallest graded subspace containing the seeds and closed under all maps.
pub fn closure(s: &MatrixSystem, seeds: &[(Letter, CVector)]) -> Vec<OrthoBasis> {
    let al = s.alphabet();
    let threshold = 1e-9 * s.max_norm().max(1.0);
    let mut bases: Vec<OrthoBasis> = al.letters().map(|a| OrthoBasis::new(s.dim(a))).collect();
    let mut queue: Vec<(Letter, usize)> = Vec::new();
    for (a, v) in seeds {
        let n = v.norm();
        if n > 0.0 && bases[*a].insert(&(v / C64::new(n, 0.0)), 1e-9) {
            queue.push((*a, bases[*a].len() - 1));
        }
    }
    while let Some((a, k)) = queue.pop() {
        let v = bases[a].to_matrix().column(k).into_owned();
        for b in al.letters() {
            if !s.is_edge(b, a) || bases[b].is_full() {
                continue;
            }
            let w = s.map(b, a) * &v;
            if w.norm() > threshold && insert_abs(&mut bases[b], &w, threshold) {
                queue.push((b, bases[b].len() - 1));
            }
        }
    }
    bases
}

fn insert_abs(basis: &mut OrthoBasis, w: &CVector, threshold: f64) -> bool {
    basis.insert(w, (threshold / w.norm()).max(1e-9))
}

/// Random combination of products of maps along closed paths at `a`.
fn random_loop_element<R: Rng>(s: &MatrixSystem, a: Letter, rng: &mut R) -> Option<CMatrix> {
    let d = s.dim(a);
    let al = s.alphabet();
    let mut theta = CMatrix::zeros(d, d);
    let mut found = 0;
    for _ in 0..40 {
        if found >= 4 {
            break;
        }
        let mut cur = a;
        let mut prod = CMatrix::identity(d, d);
        for step in 0..16 {
            let next: Vec<Letter> = al.letters().filter(|&b| s.is_edge(b, cur) && s.dim(b) > 0).collect();
            if next.is_empty() {
                break;
            }
            let b = next[rng.random_range(0..next.len())];
            prod = s.map(b, cur) * prod;
            cur = b;
            if cur == a && (step > 0 || rng.random_bool(0.5)) && rng.random_bool(0.5) {
                theta += prod.clone() * random_complex(rng);
                found += 1;
                break;
            }
        }
    }
    (found > 0).then_some(theta)
}

/// One irreducible piece of a decomposition.
#[derive(Clone, Debug)]
pub struct Component {
    pub system: MatrixSystem,
    pub forms: FormTuple,
    /// Per letter, the linear map from `V_a` to the component space.
    pub projection: Vec<CMatrix>,
    /// Per letter, a right inverse of `projection`, landing in `V_a`.
    pub embedding: Vec<CMatrix>,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub components: Vec<Component>,
    /// Dimensions carried by zero limit forms (vectors of norm zero).
    pub null_dims: Vec<usize>,
    /// Every complement met during the recursion was itself invariant, so
    /// the components are B-orthogonal invariant subsystems of the input.
    pub orthogonal_split: bool,
}

impl Decomposition {
    pub fn dims_sum(&self) -> Vec<usize> {
        let mut out = self.null_dims.clone();
        for c in &self.components {
            for (o, d) in out.iter_mut().zip(c.system.dims()) {
                *o += d;
            }
        }
        out
    }
}

/// Splits a system with strictly positive compatible forms into irreducible
/// pieces, orthogonal with respect to `B`.
///
/// Recursion: find an invariant subsystem `W`, restrict to it, and continue
/// on the B-orthogonal complement viewed as the quotient `V/W`. The quotient
/// carries the limit form `lim T̃ⁿ(B|W⊥)`, the norm of the quotient
/// representation; directions where it vanishes are reported as null.
pub fn decompose(s: &MatrixSystem, forms: &FormTuple, opts: &SearchOptions) -> Result<Decomposition> {
    let res = compatibility_residual(s, forms)?;
    if res > tol::FIXED_POINT * forms.max_abs().max(1.0) {
        return Err(Error::NotCompatible(res));
    }
    for a in s.alphabet().letters() {
        let m = forms.get(a);
        if m.nrows() == 0 || linalg::min_eigenvalue(m) <= 1e-10 * forms.max_abs() {
            return Err(Error::NotPositiveDefinite(s.alphabet().name(a).to_string()));
        }
    }
    let mut out = Decomposition {
        components: Vec::new(),
        null_dims: vec![0; s.alphabet().len()],
        orthogonal_split: true,
    };
    let identity: Vec<CMatrix> = s.dims().iter().map(|&d| CMatrix::identity(d, d)).collect();
    decompose_rec(s, forms, identity.clone(), identity, opts, 0, &mut out)?;
    Ok(out)
}

fn decompose_rec(
    s: &MatrixSystem,
    forms: &FormTuple,
    proj: Vec<CMatrix>,
    emb: Vec<CMatrix>,
    opts: &SearchOptions,
    depth: u64,
    out: &mut Decomposition,
) -> Result<()> {
    let n = s.alphabet().len();
    // move to coordinates where the forms are the identity
    let root: Vec<CMatrix> = forms.forms().iter().map(|m| hermitian_fn(m, |l| l.max(0.0).sqrt())).collect();
    let root_inv: Vec<CMatrix> =
        forms.forms().iter().map(|m| hermitian_fn(m, |l| 1.0 / l.max(f64::MIN_POSITIVE).sqrt())).collect();
    let frame = s.conjugate(&root, &root_inv);
    let proj: Vec<CMatrix> = (0..n).map(|a| &root[a] * &proj[a]).collect();
    let emb: Vec<CMatrix> = (0..n).map(|a| &emb[a] * &root_inv[a]).collect();

    let search = SearchOptions { rounds: opts.rounds, seed: opts.seed.wrapping_add(depth.wrapping_mul(0x9e37_79b9)) };
    let Some(sub) = find_invariant_subsystem(&frame, &search) else {
        out.components.push(Component {
            forms: FormTuple::identity(frame.dims()),
            system: frame,
            projection: proj,
            embedding: emb,
        });
        return Ok(());
    };
    let q = sub.bases;
    let r: Vec<CMatrix> = q.iter().map(|m| OrthoBasis::from_columns(m, 1e-9).complement()).collect();

    // invariant part, forms restrict to the identity
    let qa: Vec<CMatrix> = q.iter().map(|m| m.adjoint()).collect();
    let w_sys = frame.conjugate(&qa, &q);
    let w_proj: Vec<CMatrix> = (0..n).map(|a| &qa[a] * &proj[a]).collect();
    let w_emb: Vec<CMatrix> = (0..n).map(|a| &emb[a] * &q[a]).collect();
    decompose_rec(&w_sys, &FormTuple::identity(w_sys.dims()), w_proj, w_emb, opts, 2 * depth + 1, out)?;

    // quotient part, with the limit form
    let ra: Vec<CMatrix> = r.iter().map(|m| m.adjoint()).collect();
    let quot = frame.conjugate(&ra, &r);
    if quot.total_dim() == 0 {
        return Ok(());
    }
    let start = FormTuple::identity(quot.dims());
    let limit = limit_form(&quot, &start)?;
    if limit.max_abs_diff(&start) > tol::FIXED_POINT {
        out.orthogonal_split = false;
    }
    let rq = radical_quotient_at(&quot, &limit, start.max_abs())?;
    for (o, d) in out.null_dims.iter_mut().zip(&rq.removed) {
        *o += d;
    }
    if rq.removed.iter().any(|&d| d > 0) {
        out.orthogonal_split = false;
    }
    if rq.degenerate {
        return Ok(());
    }
    let q_proj: Vec<CMatrix> = (0..n).map(|a| &rq.projections[a] * &ra[a] * &proj[a]).collect();
    let q_emb: Vec<CMatrix> = (0..n).map(|a| &emb[a] * &r[a] * rq.projections[a].adjoint()).collect();
    decompose_rec(&rq.system, &rq.forms, q_proj, q_emb, opts, 2 * depth + 2, out)
}

/// Decreasing limit of `Tⁿ(B)` for a sub-compatible start `T(B) ≤ B`.
fn limit_form(s: &MatrixSystem, start: &FormTuple) -> Result<FormTuple> {
    let mut cur = start.clone();
    for _ in 0..100_000 {
        let next = transfer_unchecked(s, &cur).hermitized();
        let delta = next.max_abs_diff(&cur);
        cur = next;
        if delta <= 1e-15 * start.max_abs().max(1.0) {
            return Ok(cur);
        }
    }
    let residual = transfer_unchecked(s, &cur).max_abs_diff(&cur);
    if residual <= 1e-11 {
        Ok(cur)
    } else {
        Err(Error::DecompositionFailed(format!("limit form residual {residual:e}")))
    }
}

/// Direct sum of systems over the same alphabet, block-diagonal maps.
pub fn direct_sum(parts: &[&MatrixSystem]) -> Result<MatrixSystem> {
    let al = parts
        .first()
        .ok_or_else(|| Error::Precondition("empty direct sum".into()))?
        .alphabet()
        .clone();
    if parts.iter().any(|p| p.alphabet() != &al) {
        return Err(Error::SystemMismatch);
    }
    let n = al.len();
    let dims: Vec<usize> = (0..n).map(|a| parts.iter().map(|p| p.dim(a)).sum()).collect();
    let mut out = MatrixSystem::zeros(al.clone(), dims.clone());
    for b in 0..n {
        for a in 0..n {
            let mut m = CMatrix::zeros(dims[b], dims[a]);
            let (mut ro, mut co) = (0, 0);
            for p in parts {
                m.view_mut((ro, co), (p.dim(b), p.dim(a))).copy_from(p.map(b, a));
                ro += p.dim(b);
                co += p.dim(a);
            }
            out.set_map(b, a, m)?;
        }
    }
    Ok(out)
}

/// Block-diagonal form tuple matching [`direct_sum`].
pub fn direct_sum_forms(parts: &[&FormTuple]) -> FormTuple {
    let n = parts[0].len();
    FormTuple::new(
        (0..n)
            .map(|a| {
                let d: usize = parts.iter().map(|p| p.get(a).nrows()).sum();
                let mut m = CMatrix::zeros(d, d);
                let mut o = 0;
                for p in parts {
                    let k = p.get(a).nrows();
                    m.view_mut((o, o), (k, k)).copy_from(p.get(a));
                    o += k;
                }
                m
            })
            .collect(),
    )
}

#[doc(hidden)]
pub fn unit_vector(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = ONE;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    fn spherical_unit() -> (MatrixSystem, FormTuple) {
        let s = MatrixSystem::spherical(2, 1.0 / 3f64.sqrt());
        let b = FormTuple::scalar(s.dims(), 1.0);
        (s, b)
    }

    #[test]
    fn validate_examples() {
        let (s, _) = spherical_unit();
        assert!(validate(&s).is_empty());
        let mut bad = s.clone();
        let al = bad.alphabet().clone();
        let (a, big_a) = (al.letter("a").unwrap(), al.letter("A").unwrap());
        bad.set_map(big_a, a, CMatrix::from_element(1, 1, ONE)).unwrap();
        let d = validate(&bad);
        assert_eq!(d.len(), 1);
        assert!(matches!(&d[0], Diagnostic::NonzeroInversePair { b, a, .. } if b == "A" && a == "a"));
        let z = MatrixSystem::zeros(al.clone(), vec![0, 1, 1, 1]);
        assert!(validate(&z).iter().any(|d| matches!(d, Diagnostic::ZeroDimension { letter } if letter == "a")));
    }

    #[test]
    fn transfer_examples() {
        let (s, b) = spherical_unit();
        let t = transfer_apply(&s, &b).unwrap();
        assert!(t.max_abs_diff(&b) < 1e-15);
        let raw = MatrixSystem::spherical(2, 1.0);
        let t = transfer_apply(&raw, &b).unwrap();
        assert!(t.max_abs_diff(&b.scaled(3.0)) < 1e-15);
        let zero = MatrixSystem::zeros(Alphabet::standard(2), vec![2, 1, 3, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let forms = FormTuple::new(
            zero.dims()
                .iter()
                .map(|&d| {
                    let g = linalg::random_matrix(&mut rng, d, d);
                    &g * g.adjoint()
                })
                .collect(),
        );
        assert_eq!(transfer_apply(&zero, &forms).unwrap().max_abs(), 0.0);
        assert!(matches!(transfer_apply(&zero, &b), Err(Error::Shape(_))));
    }

    #[test]
    fn normalize_spherical() {
        let raw = MatrixSystem::spherical(2, 1.0);
        let n = normalize(&raw).unwrap();
        assert!((n.spectral_radius - 3.0).abs() < 1e-9);
        for a in 0..4 {
            assert!((n.forms.get(a)[(0, 0)].re - 0.25).abs() < 1e-12);
            assert!((n.system.map(2, a)[(0, 0)].re.abs() - if a == 3 { 0.0 } else { 1.0 / 3f64.sqrt() }).abs() < 1e-12);
        }
        assert!(n.residual <= 1e-9);
        assert!(!n.peripheral.degenerate);
        let again = normalize(&n.system).unwrap();
        assert!((again.spectral_radius - 1.0).abs() < 1e-9);
        assert!((again.system.max_norm() - n.system.max_norm()).abs() < 1e-9);
    }

    #[test]
    fn normalize_degenerate() {
        let zero = MatrixSystem::zeros(Alphabet::standard(2), vec![1, 1, 1, 1]);
        assert!(matches!(normalize(&zero), Err(Error::DegenerateSystem(_))));
    }

    #[test]
    fn residual_examples() {
        let (s, b) = spherical_unit();
        assert!(compatibility_residual(&s, &b).unwrap() <= 1e-12);
        let mut forms = b.forms().to_vec();
        forms[0] *= C64::new(2.0, 0.0);
        // letter a: T(B)_a = (B_a + B_b + B_B)/3 = 4/3 against B_a = 2
        let r = compatibility_residual(&s, &FormTuple::new(forms)).unwrap();
        assert!((r - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn radical_quotient_strips_null_summand() {
        // lower-triangular maps keep span(e2) invariant; B = e1 e1* is
        // compatible and its kernel is exactly that span
        let al = Alphabet::standard(2);
        let h = 1.0 / 3f64.sqrt();
        let s = MatrixSystem::from_fn(al, vec![2; 4], |_, _| {
            CMatrix::from_row_slice(2, 2, &[C64::new(h, 0.0), ZERO, C64::new(0.3, 0.0), C64::new(0.2, 0.0)])
        })
        .unwrap();
        let e1 = unit_vector(2, 0);
        let forms = FormTuple::new(vec![&e1 * e1.adjoint(); 4]);
        assert!(compatibility_residual(&s, &forms).unwrap() < 1e-12);
        let rq = radical_quotient(&s, &forms).unwrap();
        assert_eq!(rq.system.dims(), &[1, 1, 1, 1]);
        assert_eq!(rq.removed, vec![1; 4]);
        assert!(compatibility_residual(&rq.system, &rq.forms).unwrap() < 1e-12);
        assert!(rq.forms.min_eigenvalue() > 0.0);

        let (sp, bp) = spherical_unit();
        let rq = radical_quotient(&sp, &bp).unwrap();
        assert_eq!(rq.system.dims(), sp.dims());
        assert!((rq.system.map(0, 0)[(0, 0)].norm() - h).abs() < 1e-12);
        let rq = radical_quotient(&sp, &FormTuple::zeros(sp.dims())).unwrap();
        assert!(rq.degenerate);
        let mut skew = bp.forms().to_vec();
        skew[0] *= C64::new(5.0, 0.0);
        assert!(matches!(radical_quotient(&sp, &FormTuple::new(skew)), Err(Error::NotCompatible(_))));
    }

    #[test]
    fn spherical_is_irreducible() {
        let (s, _) = spherical_unit();
        assert!(find_invariant_subsystem(&s, &SearchOptions::default()).is_none());
    }

    #[test]
    fn direct_sum_has_invariant_block() {
        let (s, _) = spherical_unit();
        let sum = direct_sum(&[&s, &s]).unwrap();
        let sub = find_invariant_subsystem(&sum, &SearchOptions::default()).expect("reducible");
        assert_eq!(sub.dims(), vec![1; 4]);
        assert!(sub.invariance_residual(&sum) < 1e-8);
    }

    #[test]
    fn lower_triangular_finds_lower_block_only() {
        let al = Alphabet::standard(2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = MatrixSystem::from_fn(al, vec![2; 4], |_, _| {
            let mut m = linalg::random_matrix(&mut rng, 2, 2);
            m[(0, 1)] = C64::new(0.0, 0.0);
            m
        })
        .unwrap();
        for seed in 0..5 {
            let sub = find_invariant_subsystem(&s, &SearchOptions { rounds: 50, seed }).expect("reducible");
            assert_eq!(sub.dims(), vec![1; 4]);
            for q in &sub.bases {
                // spanned by e2
                assert!(q[(0, 0)].norm() < 1e-8);
                assert!((q[(1, 0)].norm() - 1.0).abs() < 1e-8);
            }
        }
        // the complement span(e1) is not invariant
        let e1 = Subsystem { bases: vec![CMatrix::from_column_slice(2, 1, unit_vector(2, 0).as_slice()); 4] };
        assert!(e1.invariance_residual(&s) > 1e-3);
    }

    #[test]
    fn decompose_two_summands() {
        let (s1, b1) = spherical_unit();
        let al = Alphabet::standard(2);
        // 1-dim system with distinct weights, columns of unit norm
        let w = [0.8f64, 0.5, 0.33166247903554];
        let s2 = MatrixSystem::from_fn(al, vec![1; 4], |b, a| {
            let k = (b + 4 - a) % 4;
            let idx = if k == 0 { 0 } else if k == 2 { 1 } else { 2 };
            CMatrix::from_element(1, 1, C64::new(w[idx], 0.0))
        })
        .unwrap();
        let b2 = FormTuple::scalar(s2.dims(), 1.0);
        assert!(compatibility_residual(&s2, &b2).unwrap() < 1e-12);
        let sum = direct_sum(&[&s1, &s2]).unwrap();
        let forms = direct_sum_forms(&[&b1, &b2]);
        let dec = decompose(&sum, &forms, &SearchOptions::default()).unwrap();
        assert_eq!(dec.components.len(), 2);
        assert!(dec.orthogonal_split);
        assert_eq!(dec.dims_sum(), sum.dims());
        let single = decompose(&s1, &b1, &SearchOptions::default()).unwrap();
        assert_eq!(single.components.len(), 1);
    }
}
