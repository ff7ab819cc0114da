//! Multiplicative vectors and the unitary action of the free group on them.
//!
//! A vector is stored by its values on the sphere of radius `depth`; values
//! further out follow from `f(xb) = H_{b,last(x)} f(x)`. The inner product is
//! `⟨f, g⟩ = Σ_{|x|=N} B_{last x}(f(x), g(x))`, linear in `f`, and does not
//! depend on `N ≥ depth` when the forms are compatible.

pub mod brute;
mod crossed;
pub mod fast;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;

pub use crossed::{apply_crossed, precompose, CrossedElement, CrossedTerm, Endomorphism, Region};

use crate::error::{Error, Result};
use crate::exact::ExactSystem;
use crate::linalg::{self, tol, CVector, C64};
use crate::par::Execution;
use crate::scalar::Dense;
use crate::system::{compatibility_residual, Component, FormTuple, MatrixSystem};
use crate::words::{cylinder_image, multiply, Alphabet, Cylinder, Letter, Word};
use brute::{Kernel, Seeds};

/// A matrix system together with compatible positive semidefinite forms.
#[derive(Debug)]
pub struct SystemWithForms {
    system: MatrixSystem,
    forms: FormTuple,
    kernel: Kernel<C64>,
    cross: Vec<Dense<C64>>,
    exact: Option<ExactSystem>,
}

impl SystemWithForms {
    pub fn new(system: MatrixSystem, forms: FormTuple) -> Result<Self> {
        let res = compatibility_residual(&system, &forms)?;
        if res > tol::FIXED_POINT * forms.max_abs().max(1.0) {
            return Err(Error::NotCompatible(res));
        }
        if !forms.is_psd(tol::FIXED_POINT) {
            return Err(Error::NotPositiveDefinite("forms are not positive semidefinite".into()));
        }
        let kernel = Kernel::from_system(&system, &forms);
        let cross = fast::cross_forms(&kernel);
        Ok(SystemWithForms { system, forms, kernel, cross, exact: None })
    }

    /// Attaches an exact description; its float image must match this system.
    pub fn with_exact(mut self, exact: ExactSystem) -> Result<Self> {
        let (s, b) = exact.to_float();
        let drift = s
            .alphabet()
            .letters()
            .flat_map(|x| s.alphabet().letters().map(move |y| (x, y)))
            .map(|(x, y)| linalg::max_abs(&(s.map(x, y) - self.system.map(x, y))))
            .fold(b.max_abs_diff(&self.forms), f64::max);
        if s.dims() != self.system.dims() || drift > tol::VALIDATION {
            return Err(Error::Exact("exact data does not match the floating-point system".into()));
        }
        self.exact = Some(exact);
        Ok(self)
    }

    pub fn shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn system(&self) -> &MatrixSystem {
        &self.system
    }

    pub fn forms(&self) -> &FormTuple {
        &self.forms
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.system.alphabet()
    }

    pub fn kernel(&self) -> &Kernel<C64> {
        &self.kernel
    }

    pub fn exact(&self) -> Option<&ExactSystem> {
        self.exact.as_ref()
    }

    fn same(a: &Arc<Self>, b: &Arc<Self>) -> bool {
        Arc::ptr_eq(a, b) || (a.system == b.system && a.forms == b.forms)
    }
}

/// Rescales a form tuple so that its largest eigenvalue over all letters is 1.
pub fn unit_forms(forms: &FormTuple) -> FormTuple {
    let top = forms
        .forms()
        .iter()
        .filter(|m| m.nrows() > 0)
        .map(|m| linalg::hermitian_eigenvalues(m).last().copied().unwrap_or(0.0))
        .fold(0.0f64, f64::max);
    if top > 0.0 {
        forms.scaled(1.0 / top)
    } else {
        forms.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Brute,
    Fast,
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(Backend::Brute),
            "fast" => Ok(Backend::Fast),
            other => Err(Error::Parse(format!("unknown backend `{other}`"))),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Brute => "brute",
            Backend::Fast => "fast",
        })
    }
}

#[derive(Clone)]
pub struct MultVector {
    sys: Arc<SystemWithForms>,
    depth: usize,
    stride: usize,
    values: Vec<C64>,
}

impl fmt::Debug for MultVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultVector").field("depth", &self.depth).field("values", &self.values).finish()
    }
}

impl MultVector {
    /// `values` lists the seeds in sphere order.
    pub fn new(sys: Arc<SystemWithForms>, depth: usize, values: Vec<CVector>) -> Result<Self> {
        let al = sys.alphabet().clone();
        let size = check_depth(&al, depth)?;
        if values.len() != size {
            return Err(Error::Shape(format!("expected {size} seed values, got {}", values.len())));
        }
        let mut iter = values.into_iter();
        Self::from_fn(sys, depth, |_| iter.next().expect("length checked"))
    }

    pub fn from_fn(sys: Arc<SystemWithForms>, depth: usize, mut f: impl FnMut(&Word) -> CVector) -> Result<Self> {
        let al = sys.alphabet().clone();
        let size = check_depth(&al, depth)?;
        let stride = sys.system.max_dim();
        let mut values = vec![C64::new(0.0, 0.0); size * stride];
        for (i, w) in al.sphere(depth).enumerate() {
            let v = f(&w);
            let d = sys.system.dim(w.last().expect("depth ≥ 1"));
            if v.len() != d {
                return Err(Error::Shape(format!(
                    "value at `{}` has length {}, expected {d}",
                    al.format_word(&w),
                    v.len()
                )));
            }
            values[i * stride..i * stride + d].copy_from_slice(v.as_slice());
        }
        Ok(MultVector { sys, depth, stride, values })
    }

    pub fn zero(sys: Arc<SystemWithForms>, depth: usize) -> Result<Self> {
        let size = check_depth(sys.alphabet(), depth)?;
        let stride = sys.system.max_dim();
        Ok(MultVector { sys, depth, stride, values: vec![C64::new(0.0, 0.0); size * stride] })
    }

    /// Vector with value `v` at the nonempty word `at` and zero elsewhere on
    /// its sphere.
    pub fn seed_at(sys: Arc<SystemWithForms>, at: &Word, v: CVector) -> Result<Self> {
        if at.is_empty() {
            return Err(Error::Precondition("seed word must be nonempty".into()));
        }
        let mut out = Self::zero(sys, at.len())?;
        out.set(at, v.as_slice())?;
        Ok(out)
    }

    pub fn random<R: Rng + ?Sized>(sys: Arc<SystemWithForms>, depth: usize, rng: &mut R) -> Result<Self> {
        let dims = sys.system.dims().to_vec();
        Self::from_fn(sys, depth, |w| linalg::random_vector(rng, dims[w.last().expect("nonempty")]))
    }

    pub fn system(&self) -> &Arc<SystemWithForms> {
        &self.sys
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.sys.alphabet()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn seeds(&self) -> Seeds<'_, C64> {
        Seeds { depth: self.depth, stride: self.stride, values: &self.values }
    }

    fn slot(&self, idx: usize, last: Letter) -> &[C64] {
        &self.values[idx * self.stride..idx * self.stride + self.sys.system.dim(last)]
    }

    pub fn set(&mut self, at: &Word, v: &[C64]) -> Result<()> {
        if at.len() != self.depth {
            return Err(Error::Shape(format!("seed word must have length {}", self.depth)));
        }
        let last = at.last().expect("depth ≥ 1");
        let d = self.sys.system.dim(last);
        if v.len() != d {
            return Err(Error::Shape(format!("value must have length {d}")));
        }
        let idx = self.alphabet().sphere_index(at);
        self.values[idx * self.stride..idx * self.stride + d].copy_from_slice(v);
        Ok(())
    }

    /// Seed values with their words, in sphere order.
    pub fn entries(&self) -> impl Iterator<Item = (Word, CVector)> + '_ {
        self.alphabet().sphere(self.depth).enumerate().map(move |(i, w)| {
            let v = CVector::from_column_slice(self.slot(i, w.last().expect("nonempty")));
            (w, v)
        })
    }

    /// Value at a reduced word of length at least `depth`.
    pub fn eval(&self, y: &Word) -> Option<CVector> {
        if y.len() < self.depth {
            return None;
        }
        Some(CVector::from_vec(self.seeds().eval(self.sys.kernel(), y.letters())))
    }

    pub fn deepen(&self, depth: usize) -> Result<MultVector> {
        if depth < self.depth {
            return Err(Error::Precondition(format!("cannot deepen from {} to {depth}", self.depth)));
        }
        let al = self.alphabet().clone();
        al.check_cap(depth)?;
        let q = al.len() - 1;
        let mut cur = self.values.clone();
        let mut lasts: Vec<Letter> = al.sphere(self.depth).map(|w| w.last().expect("nonempty")).collect();
        let s = &self.sys.system;
        for _ in self.depth..depth {
            let mut next = vec![C64::new(0.0, 0.0); lasts.len() * q * self.stride];
            let mut next_lasts = Vec::with_capacity(lasts.len() * q);
            for (p, &a) in lasts.iter().enumerate() {
                let v = CVector::from_column_slice(&cur[p * self.stride..p * self.stride + s.dim(a)]);
                for slot in 0..q {
                    let b = al.successor(a, slot);
                    let i = p * q + slot;
                    let w = s.map(b, a) * &v;
                    next[i * self.stride..i * self.stride + s.dim(b)].copy_from_slice(w.as_slice());
                    next_lasts.push(b);
                }
            }
            cur = next;
            lasts = next_lasts;
        }
        Ok(MultVector { sys: self.sys.clone(), depth, stride: self.stride, values: cur })
    }

    fn check_same(&self, other: &MultVector) -> Result<()> {
        if SystemWithForms::same(&self.sys, &other.sys) {
            Ok(())
        } else {
            Err(Error::SystemMismatch)
        }
    }

    /// `⟨self, other⟩`, linear in `self`.
    pub fn inner(&self, other: &MultVector) -> Result<C64> {
        self.check_same(other)?;
        let m = self.depth.max(other.depth);
        let f = if self.depth < m { self.deepen(m)? } else { self.clone() };
        let g = if other.depth < m { other.deepen(m)? } else { other.clone() };
        let forms = &self.sys.kernel().forms;
        let mut acc = C64::new(0.0, 0.0);
        for (i, w) in self.alphabet().sphere(m).enumerate() {
            let a = w.last().expect("nonempty");
            acc += forms[a].pair(f.slot(i, a), g.slot(i, a));
        }
        Ok(acc)
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).map(|z| z.re).unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().max(0.0).sqrt()
    }

    pub fn scale(&self, c: C64) -> MultVector {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// `self + c · other`, at the larger of the two depths.
    pub fn axpy(&self, c: C64, other: &MultVector) -> Result<MultVector> {
        self.check_same(other)?;
        let m = self.depth.max(other.depth);
        let mut out = self.deepen(m)?;
        let o = other.deepen(m)?;
        out.values.iter_mut().zip(&o.values).for_each(|(x, y)| *x += c * y);
        Ok(out)
    }

    pub fn add(&self, other: &MultVector) -> Result<MultVector> {
        self.axpy(C64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &MultVector) -> Result<MultVector> {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    /// `π(x)f`, the function `y ↦ f(x⁻¹y)`, at depth `depth + |x|`.
    pub fn act(&self, x: &Word) -> Result<MultVector> {
        if x.is_empty() {
            return Ok(self.clone());
        }
        let al = self.alphabet().clone();
        let x_inv = x.inverse(&al);
        let depth = self.depth + x.len();
        Self::from_fn(self.sys.clone(), depth, |y| {
            self.eval(&multiply(&al, &x_inv, y)).expect("|x⁻¹y| ≥ depth")
        })
    }

    /// Restriction to the cone of words starting with `z`.
    pub fn cylinder_op(&self, z: &Word) -> Result<MultVector> {
        if z.is_empty() {
            return Err(Error::Precondition("cylinder stem must be nonempty".into()));
        }
        let al = self.alphabet();
        let depth = self.depth.max(z.len());
        let mut out = self.deepen(depth)?;
        // words extending z form a contiguous block of the sphere
        let block = (al.len() - 1).pow((depth - z.len()) as u32);
        let start = al.sphere_index(z) * block;
        for (i, v) in out.values.chunks_mut(self.stride).enumerate() {
            if i < start || i >= start + block {
                v.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
            }
        }
        Ok(out)
    }

    /// `⟨π(x)self, g⟩`.
    pub fn coefficient(&self, x: &Word, g: &MultVector, backend: Backend) -> Result<C64> {
        coefficient_with(x, self, g, backend, Execution::default())
    }

    /// Maps every seed through the component projection of a decomposition.
    pub fn project(&self, component: &Component, target: Arc<SystemWithForms>) -> Result<MultVector> {
        let dims = target.system().dims().to_vec();
        let sys = self.sys.system();
        if target.alphabet() != self.alphabet() {
            return Err(Error::SystemMismatch);
        }
        for a in self.alphabet().letters() {
            let p = &component.projection[a];
            if p.shape() != (dims[a], sys.dim(a)) {
                return Err(Error::Shape("projection does not match the component".into()));
            }
        }
        Self::from_fn(target, self.depth, |w| {
            let a = w.last().expect("nonempty");
            let idx = self.alphabet().sphere_index(w);
            &component.projection[a] * CVector::from_column_slice(self.slot(idx, a))
        })
    }

    pub(crate) fn values(&self) -> &[C64] {
        &self.values
    }

    pub(crate) fn stride(&self) -> usize {
        self.stride
    }
}

fn check_depth(al: &Alphabet, depth: usize) -> Result<usize> {
    if depth == 0 {
        return Err(Error::Precondition("depth must be at least 1".into()));
    }
    al.check_cap(depth)
}

pub fn deepen(f: &MultVector, depth: usize) -> Result<MultVector> {
    f.deepen(depth)
}

pub fn inner(f: &MultVector, g: &MultVector) -> Result<C64> {
    f.inner(g)
}

pub fn act(x: &Word, f: &MultVector) -> Result<MultVector> {
    f.act(x)
}

pub fn cylinder_op(z: &Word, f: &MultVector) -> Result<MultVector> {
    f.cylinder_op(z)
}

/// `⟨π(x)f, g⟩` with the default execution policy.
pub fn coefficient(x: &Word, f: &MultVector, g: &MultVector, backend: Backend) -> Result<C64> {
    coefficient_with(x, f, g, backend, Execution::default())
}

pub fn coefficient_with(x: &Word, f: &MultVector, g: &MultVector, backend: Backend, exec: Execution) -> Result<C64> {
    f.check_same(g)?;
    let al = f.alphabet();
    if !x.is_reduced(al) {
        return Err(Error::NotReduced(al.format_word(x)));
    }
    let k = f.sys.kernel();
    match backend {
        Backend::Brute => brute::coefficient(k, x, f.seeds(), g.seeds(), exec),
        Backend::Fast => Ok(fast::coefficient(k, &f.sys.cross, x, f.seeds(), g.seeds())),
    }
}

/// Norm of `π(x)α(1_{∂Γ(z)})π(x⁻¹)f − Σ_C α(1_C)f` over the parts `C` of
/// `x·∂Γ(z)`.
pub fn covariance_check(x: &Word, z: &Word, f: &MultVector) -> Result<f64> {
    let al = f.alphabet().clone();
    let c = Cylinder::new(z.clone())?;
    let lhs = f.act(&x.inverse(&al))?.cylinder_op(z)?.act(x)?;
    let mut rhs = MultVector::zero(f.sys.clone(), f.depth)?;
    for part in cylinder_image(&al, x, &c).parts() {
        rhs = rhs.add(&f.cylinder_op(part.stem())?)?;
    }
    Ok(lhs.sub(&rhs)?.norm())
}
