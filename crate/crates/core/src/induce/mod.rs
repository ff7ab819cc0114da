//! Induction of matrix systems from a finite-index subgroup `Γ0 ≤ Γ`, the
//! intertwiner onto the induced system, and block induction to free
//! products of finite cyclic groups.
//!
//! The induced space is presented by one multiplicative vector `F_u` over
//! `A′` per transversal element `u ∈ D`. With `u·g = w·u′` (`w ∈ Γ0`,
//! `u′ ∈ D`) the induced action is `(ρ(g)F)_u = π0(w) F_{u′}`.

mod intertwiner;
pub mod vf;

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{tol, CMatrix, C64};
use crate::multrep::{Backend, MultVector, SystemWithForms};
use crate::par::Execution;
use crate::subgroups::SchreierData;
use crate::system::{compatibility_residual, validate, FormTuple, MatrixSystem};
use crate::words::{multiply, Letter, Word};

pub use intertwiner::{boundary_op, intertwine, InducedVector, IntertwineOptions};

/// Block structure of the induced spaces `V_a = ⊕ V_{c′}` over the pairs
/// `(u, c′)` with `u⁻¹c′ ∈ P(a)`.
#[derive(Clone, Debug)]
pub struct InducedLayout {
    pairs: Vec<Vec<(usize, Letter)>>,
    offsets: Vec<Vec<usize>>,
    dims: Vec<usize>,
    position: HashMap<(usize, Letter), (Letter, usize)>,
}

impl InducedLayout {
    pub fn new(s: &SchreierData, gen_dims: &[usize]) -> Result<Self> {
        let al = s.alphabet();
        let mut pairs = Vec::with_capacity(al.len());
        let mut offsets = Vec::with_capacity(al.len());
        let mut dims = Vec::with_capacity(al.len());
        let mut position = HashMap::new();
        for a in al.letters() {
            let ps = s.p(a).to_vec();
            let mut off = Vec::with_capacity(ps.len());
            let mut d = 0;
            for (k, &(u, c)) in ps.iter().enumerate() {
                off.push(d);
                d += gen_dims[c];
                if position.insert((u, c), (a, k)).is_some() {
                    return Err(Error::Layout(format!("pair ({u}, {c}) appears under two letters")));
                }
            }
            pairs.push(ps);
            offsets.push(off);
            dims.push(d);
        }
        if position.len() != s.index() * s.generators().len() {
            return Err(Error::Layout(format!(
                "{} pairs for {} transversal elements and {} generators",
                position.len(),
                s.index(),
                s.generators().len()
            )));
        }
        Ok(InducedLayout { pairs, offsets, dims, position })
    }

    pub fn pairs(&self, a: Letter) -> &[(usize, Letter)] {
        &self.pairs[a]
    }

    pub fn offset(&self, a: Letter, k: usize) -> usize {
        self.offsets[a][k]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// The letter and block number of the pair `(u, c′)`.
    pub fn position(&self, u: usize, c: Letter) -> Option<(Letter, usize)> {
        self.position.get(&(u, c)).copied()
    }
}

/// Result of [`induce_system`].
#[derive(Clone, Debug)]
pub struct Induced {
    pub system: MatrixSystem,
    pub forms: FormTuple,
    pub layout: InducedLayout,
}

impl Induced {
    pub fn with_forms(&self) -> Result<Arc<SystemWithForms>> {
        Ok(SystemWithForms::new(self.system.clone(), self.forms.clone())?.shared())
    }
}

fn block_source(s: &SchreierData, layout: &InducedLayout, a: Letter, v: usize, d: Letter) -> Result<(usize, Option<Letter>)> {
    let al = s.alphabet();
    let ai = al.inverse(a);
    let mut va = s.transversal()[v].clone();
    va.push_reduce(al, ai);
    let u = s.coset_of(&va);
    if s.transversal()[u] == va {
        // v·a⁻¹ ∈ D: the block (v·a⁻¹, d′) is copied
        let (b, k) = layout
            .position(u, d)
            .ok_or_else(|| Error::Layout(format!("missing copy source ({u}, {d})")))?;
        if b != a {
            return Err(Error::Layout(format!("copy source ({u}, {d}) sits under the wrong letter")));
        }
        return Ok((k, None));
    }
    // otherwise the unique source (u, c′) has u⁻¹c′ = a·v⁻¹
    let (c, next) = s.step(u, a);
    let c = c.ok_or_else(|| Error::Layout(format!("trivial Schreier step into transversal element {v}")))?;
    if next != v {
        return Err(Error::Layout(format!("Schreier step from {u} by `{}` misses {v}", al.name(a))));
    }
    let lhs = multiply(al, &s.transversal()[u].inverse(al), &s.generators()[c]);
    let rhs = multiply(al, &Word::letter(a), &s.transversal()[v].inverse(al));
    if lhs != rhs {
        return Err(Error::Layout("source pair does not satisfy u⁻¹c′ = a·v⁻¹".into()));
    }
    let (b, k) = layout
        .position(u, c)
        .ok_or_else(|| Error::Layout(format!("missing map source ({u}, {c})")))?;
    if b != a {
        return Err(Error::Layout(format!("map source ({u}, {c}) sits under the wrong letter")));
    }
    Ok((k, Some(c)))
}

/// The induced system over `A` of a system over the free basis `A′`.
pub fn induce_system(sys0: &SystemWithForms, s: &SchreierData) -> Result<Induced> {
    let s0 = sys0.system();
    if s0.alphabet() != s.gen_alphabet() {
        return Err(Error::Shape(format!(
            "system alphabet has rank {}, the subgroup has rank {}",
            s0.alphabet().rank(),
            s.rank()
        )));
    }
    let al = s.alphabet().clone();
    let layout = InducedLayout::new(s, s0.dims())?;
    let dims = layout.dims().to_vec();
    let n = al.len();
    let mut maps = Vec::with_capacity(n * n);
    for b in al.letters() {
        for a in al.letters() {
            let mut m = CMatrix::zeros(dims[b], dims[a]);
            if b != al.inverse(a) {
                for (kb, &(v, d)) in layout.pairs(b).iter().enumerate() {
                    let ob = layout.offset(b, kb);
                    let (ka, c) = block_source(s, &layout, a, v, d)?;
                    let oa = layout.offset(a, ka);
                    match c {
                        None => {
                            for i in 0..s0.dim(d) {
                                m[(ob + i, oa + i)] = C64::new(1.0, 0.0);
                            }
                        }
                        Some(c) => {
                            m.view_mut((ob, oa), (s0.dim(d), s0.dim(c))).copy_from(s0.map(d, c));
                        }
                    }
                }
            }
            maps.push(m);
        }
    }
    let system = MatrixSystem::new(al.clone(), dims.clone(), maps)?;
    if let Some(d) = validate(&system).into_iter().next() {
        return Err(Error::Layout(format!("induced system fails validation: {d}")));
    }
    let forms = FormTuple::new(
        al.letters()
            .map(|a| {
                let mut m = CMatrix::zeros(dims[a], dims[a]);
                for (k, &(_, c)) in layout.pairs(a).iter().enumerate() {
                    let o = layout.offset(a, k);
                    m.view_mut((o, o), (s0.dim(c), s0.dim(c))).copy_from(sys0.forms().get(c));
                }
                m
            })
            .collect(),
    );
    let res = compatibility_residual(&system, &forms)?;
    if res > tol::FIXED_POINT * forms.max_abs().max(1.0) {
        return Err(Error::NotCompatible(res));
    }
    Ok(Induced { system, forms, layout })
}

/// `⟨ρ(g)F, F′⟩ = Σ_u ⟨π0(w_u) F_{u′}, F′_u⟩` from precomputed routes
/// `u·g = w_u·u′`.
pub fn routed_coefficient(
    routes: &[(Word, usize)],
    f: &[MultVector],
    g: &[MultVector],
    backend: Backend,
    exec: Execution,
) -> Result<C64> {
    if routes.len() != f.len() || f.len() != g.len() {
        return Err(Error::Shape("one block per coset is required".into()));
    }
    let terms = exec.map((0..routes.len()).collect(), |u| {
        let (w, next) = &routes[u];
        crate::multrep::coefficient_with(w, &f[*next], &g[u], backend, Execution::Sequential)
    });
    terms.into_iter().try_fold(C64::new(0.0, 0.0), |acc, t| Ok(acc + t?))
}

/// Matrix coefficient of the induced representation of `Γ` on block
/// vectors indexed by the transversal.
pub fn induced_coefficient(s: &SchreierData, x: &Word, f: &InducedVector, g: &InducedVector, backend: Backend) -> Result<C64> {
    let routes: Vec<(Word, usize)> = (0..s.index()).map(|u| s.route(u, x)).collect();
    routed_coefficient(&routes, f.blocks(), g.blocks(), backend, Execution::default())
}
