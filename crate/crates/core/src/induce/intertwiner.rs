//! Block vectors of the induced representation, the boundary action on
//! them, and the intertwiner `J` onto the induced matrix system.
//!
//! A block vector `F` stands for the function `f̃(g) = F_r(r·g)` on `Γ`,
//! where `r ∈ D` represents the coset `Γ0·g⁻¹` and `r·g ∈ Γ0` is read as a
//! word over `A′`. Then `(JF)(xa) = ⊕_{(u,c′)} f̃(x·u⁻¹c′)`.

use std::sync::Arc;

use rand::Rng;

use super::InducedLayout;
use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};
use crate::multrep::{MultVector, SystemWithForms};
use crate::subgroups::SchreierData;
use crate::words::{cylinder_image, multiply, Cylinder, Word};

/// One multiplicative vector over `A′` per transversal element.
#[derive(Clone, Debug)]
pub struct InducedVector {
    blocks: Vec<MultVector>,
}

impl InducedVector {
    pub fn new(s: &SchreierData, blocks: Vec<MultVector>) -> Result<Self> {
        if blocks.len() != s.index() {
            return Err(Error::Shape(format!("expected {} blocks, got {}", s.index(), blocks.len())));
        }
        if blocks.iter().any(|b| b.alphabet() != s.gen_alphabet()) {
            return Err(Error::SystemMismatch);
        }
        Ok(InducedVector { blocks })
    }

    pub fn zero(s: &SchreierData, sys0: &Arc<SystemWithForms>, depth: usize) -> Result<Self> {
        let blocks = (0..s.index()).map(|_| MultVector::zero(sys0.clone(), depth)).collect::<Result<_>>()?;
        Self::new(s, blocks)
    }

    pub fn random<R: Rng + ?Sized>(s: &SchreierData, sys0: &Arc<SystemWithForms>, depth: usize, rng: &mut R) -> Result<Self> {
        let blocks = (0..s.index())
            .map(|_| MultVector::random(sys0.clone(), depth, rng))
            .collect::<Result<_>>()?;
        Self::new(s, blocks)
    }

    /// The vector supported on the coset of transversal element `u`.
    pub fn supported_on(s: &SchreierData, u: usize, f: MultVector) -> Result<Self> {
        let mut out = Self::zero(s, f.system(), f.depth())?;
        out.blocks[u] = f;
        Self::new(s, out.blocks)
    }

    pub fn blocks(&self) -> &[MultVector] {
        &self.blocks
    }

    pub fn inner(&self, other: &InducedVector) -> Result<C64> {
        self.blocks.iter().zip(&other.blocks).try_fold(C64::new(0.0, 0.0), |acc, (f, g)| Ok(acc + f.inner(g)?))
    }

    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_sq()).sum::<f64>().max(0.0).sqrt()
    }

    pub fn sub(&self, other: &InducedVector) -> Result<InducedVector> {
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(f, g)| f.sub(g)).collect::<Result<_>>()?;
        Ok(InducedVector { blocks })
    }

    /// `ρ(x)F` with `(ρ(x)F)_u = π0(w) F_{u′}` for `u·x = w·u′`.
    pub fn act(&self, s: &SchreierData, x: &Word) -> Result<InducedVector> {
        let blocks = (0..s.index())
            .map(|u| {
                let (w, next) = s.route(u, x);
                self.blocks[next].act(&w)
            })
            .collect::<Result<_>>()?;
        Ok(InducedVector { blocks })
    }
}

/// `Π(1_{∂Γ(y)})F`, acting on block `u` by the boundary projection onto
/// the preimage of `u·∂Γ(y)` in the boundary of `Γ0`.
pub fn boundary_op(s: &SchreierData, f: &InducedVector, y: &Word) -> Result<InducedVector> {
    let al = s.alphabet();
    let cyl = Cylinder::new(y.clone())?;
    let blocks = f
        .blocks
        .iter()
        .enumerate()
        .map(|(u, b)| {
            let image = cylinder_image(al, &s.transversal()[u], &cyl);
            let stems: Vec<&Word> = image.parts().iter().map(|c| c.stem()).collect();
            // after k letters over A′ the first k letters of the expansion
            // are final
            let depth = stems.iter().map(|w| w.len()).max().unwrap_or(1).max(b.depth());
            let deep = b.deepen(depth)?;
            let dims = b.system().system().dims().to_vec();
            MultVector::from_fn(b.system().clone(), depth, |w| {
                let e = s.expand(w);
                if stems.iter().any(|st| e.starts_with(st)) {
                    deep.eval(w).expect("at depth")
                } else {
                    CVector::zeros(dims[w.last().expect("nonempty")])
                }
            })
        })
        .collect::<Result<_>>()?;
    Ok(InducedVector { blocks })
}

#[derive(Clone, Copy, Debug)]
pub struct IntertwineOptions {
    pub max_depth: usize,
    pub tolerance: f64,
}

impl Default for IntertwineOptions {
    fn default() -> Self {
        IntertwineOptions { max_depth: 10, tolerance: 1e-12 }
    }
}

fn table(
    s: &SchreierData,
    layout: &InducedLayout,
    target: &Arc<SystemWithForms>,
    f: &InducedVector,
    p_words: &[Vec<Word>],
    m: usize,
) -> Result<Option<MultVector>> {
    let al = s.alphabet();
    let mut values = Vec::new();
    for w in al.sphere(m) {
        let a = w.last().expect("nonempty");
        let x = w.prefix(m - 1);
        let mut v = CVector::zeros(layout.dims()[a]);
        for (k, &(_, c)) in layout.pairs(a).iter().enumerate() {
            let g = multiply(al, &x, &p_words[a][k]);
            let r = s.coset_of(&g.inverse(al));
            let (h, end) = s.route(r, &g);
            debug_assert_eq!(end, 0);
            let Some(val) = f.blocks[r].eval(&h) else {
                return Ok(None);
            };
            if h.last() != Some(c) {
                return Err(Error::Layout("subgroup word does not end with its block letter".into()));
            }
            let o = layout.offset(a, k);
            v.rows_mut(o, val.len()).copy_from(&val);
        }
        values.push(v);
    }
    MultVector::new(target.clone(), m, values).map(Some)
}

/// `J F` as a multiplicative vector over the induced system `target`, at
/// the least depth where every block is defined and one further level
/// agrees with propagation by the induced maps.
pub fn intertwine(
    s: &SchreierData,
    layout: &InducedLayout,
    target: &Arc<SystemWithForms>,
    f: &InducedVector,
    opts: &IntertwineOptions,
) -> Result<MultVector> {
    let al = s.alphabet();
    if target.alphabet() != al || target.system().dims() != layout.dims() {
        return Err(Error::SystemMismatch);
    }
    let p_words: Vec<Vec<Word>> = al
        .letters()
        .map(|a| {
            layout
                .pairs(a)
                .iter()
                .map(|&(u, c)| multiply(al, &s.transversal()[u].inverse(al), &s.generators()[c]))
                .collect()
        })
        .collect();
    let scale = f.norm().max(1.0);
    let mut prev: Option<MultVector> = None;
    for m in 1..=opts.max_depth {
        al.check_cap(m)?;
        let cur = table(s, layout, target, f, &p_words, m)?;
        if let (Some(p), Some(c)) = (&prev, &cur) {
            let d = p.deepen(m)?;
            let gap = d.values().iter().zip(c.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            if gap <= opts.tolerance * scale {
                return Ok(prev.expect("checked"));
            }
        }
        prev = cur;
    }
    Err(Error::DepthTooSmall(format!("no consistent presentation up to depth {}", opts.max_depth)))
}
