//! Literal sphere-sum evaluation of `⟨π(x)f, g⟩ = Σ_{|y|=N} B(f(x⁻¹y), g(y))`.
//!
//! The sphere is streamed depth-first, so memory stays linear in `N`. The
//! top levels are cut into a fixed list of subtrees that are summed
//! independently and combined in order.

use crate::error::Result;
use crate::linalg::C64;
use crate::par::Execution;
use crate::scalar::{Dense, Ring};
use crate::system::{FormTuple, MatrixSystem};
use crate::words::{Alphabet, Letter, Word};

/// Maps and forms in the layout used by the sphere walkers.
#[derive(Clone, Debug)]
pub struct Kernel<S> {
    pub alphabet: Alphabet,
    pub dims: Vec<usize>,
    pub maps: Vec<Dense<S>>,
    pub forms: Vec<Dense<S>>,
}

impl<S: Ring> Kernel<S> {
    #[inline]
    pub fn map(&self, b: Letter, a: Letter) -> &Dense<S> {
        &self.maps[b * self.alphabet.len() + a]
    }
}

impl Kernel<C64> {
    pub fn from_system(s: &MatrixSystem, forms: &FormTuple) -> Self {
        let al = s.alphabet();
        let mut maps = Vec::with_capacity(al.len() * al.len());
        for b in al.letters() {
            for a in al.letters() {
                maps.push(Dense::from_matrix(s.map(b, a)));
            }
        }
        Kernel {
            alphabet: al.clone(),
            dims: s.dims().to_vec(),
            maps,
            forms: forms.forms().iter().map(Dense::from_matrix).collect(),
        }
    }
}

/// Seed table of a multiplicative vector: values on the sphere of radius
/// `depth`, each padded to `stride` entries, in sphere order.
#[derive(Clone, Copy, Debug)]
pub struct Seeds<'a, S> {
    pub depth: usize,
    pub stride: usize,
    pub values: &'a [S],
}

impl<'a, S: Ring> Seeds<'a, S> {
    #[inline]
    pub fn seed(&self, idx: usize, dim: usize) -> &'a [S] {
        &self.values[idx * self.stride..idx * self.stride + dim]
    }

    /// Value at a reduced word of length at least `depth`.
    pub fn eval(&self, k: &Kernel<S>, w: &[Letter]) -> Vec<S> {
        let d = self.depth;
        debug_assert!(w.len() >= d && d >= 1);
        let idx = k.alphabet.sphere_index_of(&w[..d]);
        let mut v = self.seed(idx, k.dims[w[d - 1]]).to_vec();
        let mut buf = Vec::new();
        for i in d..w.len() {
            k.map(w[i], w[i - 1]).apply_into(&v, &mut buf);
            std::mem::swap(&mut v, &mut buf);
        }
        v
    }
}

#[derive(Clone)]
struct Level<S> {
    f: Vec<S>,
    has_f: bool,
    g: Vec<S>,
    has_g: bool,
}

struct Walker<'a, S> {
    k: &'a Kernel<S>,
    f: Seeds<'a, S>,
    g: Seeds<'a, S>,
    radius: usize,
    q: usize,
}

impl<S: Ring> Walker<'_, S> {
    /// Extends `y` by `c`; fills `levels[level + 1]` and updates `w = x⁻¹y`.
    /// Returns the sphere index of the extended word and the letter removed
    /// from `w` by cancellation, if any.
    fn step(
        &self,
        level: usize,
        last: Letter,
        idx: usize,
        w: &mut Vec<Letter>,
        levels: &mut [Level<S>],
        c: Letter,
    ) -> (usize, Option<Letter>) {
        let al = &self.k.alphabet;
        let popped = if w.last() == Some(&al.inverse(c)) {
            w.pop()
        } else {
            w.push(c);
            None
        };
        let (head, tail) = levels.split_at_mut(level + 1);
        let parent = &head[level];
        let child = &mut tail[0];
        child.has_f = false;
        if popped.is_none() && parent.has_f {
            let prev = w[w.len() - 2];
            self.k.map(c, prev).apply_into(&parent.f, &mut child.f);
            child.has_f = true;
        } else if w.len() >= self.f.depth {
            child.f = self.f.eval(self.k, w);
            child.has_f = true;
        }
        let len = level + 1;
        let cidx = if level == 0 { c } else { idx.wrapping_mul(self.q).wrapping_add(al.slot(last, c)) };
        child.has_g = false;
        if len == self.g.depth {
            child.g.clear();
            child.g.extend_from_slice(self.g.seed(cidx, self.k.dims[c]));
            child.has_g = true;
        } else if len > self.g.depth {
            self.k.map(c, last).apply_into(&parent.g, &mut child.g);
            child.has_g = true;
        }
        (cidx, popped)
    }

    fn undo(w: &mut Vec<Letter>, popped: Option<Letter>) {
        match popped {
            Some(l) => w.push(l),
            None => {
                w.pop();
            }
        }
    }

    fn dfs(&self, level: usize, last: Letter, idx: usize, w: &mut Vec<Letter>, levels: &mut [Level<S>], acc: &mut S) {
        if level == self.radius {
            let l = &levels[level];
            debug_assert!(l.has_f && l.has_g);
            *acc = acc.add(&self.k.forms[last].pair(&l.f, &l.g));
            return;
        }
        let al = &self.k.alphabet;
        for c in al.letters() {
            if level > 0 && c == al.inverse(last) {
                continue;
            }
            let (cidx, popped) = self.step(level, last, idx, w, levels, c);
            self.dfs(level + 1, c, cidx, w, levels, acc);
            Self::undo(w, popped);
        }
    }

    fn fresh_levels(&self) -> Vec<Level<S>> {
        let stride = self.k.dims.iter().copied().max().unwrap_or(0);
        vec![
            Level {
                f: Vec::with_capacity(stride),
                has_f: false,
                g: Vec::with_capacity(stride),
                has_g: false,
            };
            self.radius + 1
        ]
    }

    fn subtree(&self, x_inv: &[Letter], prefix: &[Letter]) -> S {
        let mut levels = self.fresh_levels();
        let mut w: Vec<Letter> = x_inv.to_vec();
        let mut last = 0;
        let mut idx = 0;
        for (level, &c) in prefix.iter().enumerate() {
            let (cidx, _) = self.step(level, last, idx, &mut w, &mut levels, c);
            last = c;
            idx = cidx;
        }
        let mut acc = S::zero();
        self.dfs(prefix.len(), last, idx, &mut w, &mut levels, &mut acc);
        acc
    }
}

/// Number of subtrees the sphere is cut into, at least.
const CHUNKS: u128 = 64;

/// Spheres up to this size are walked as a single subtree.
const SMALL: u128 = 1 << 14;

/// `⟨π(x)f, g⟩` by the literal sphere sum at radius `max(depths) + |x| + 1`.
pub fn coefficient<S: Ring>(k: &Kernel<S>, x: &Word, f: Seeds<S>, g: Seeds<S>, exec: Execution) -> Result<S> {
    let al = &k.alphabet;
    let radius = f.depth.max(g.depth) + x.len() + 1;
    al.check_cap(radius)?;
    let walker = Walker { k, f, g, radius, q: al.len() - 1 };
    let x_inv = x.inverse(al);
    // the root level never holds values: f and g have depth at least one
    let prefixes: Vec<Word> = if al.sphere_size(radius).unwrap_or(u128::MAX) <= SMALL {
        vec![Word::identity()]
    } else {
        let mut split = 1;
        while split < radius && al.sphere_size(split).unwrap_or(u128::MAX) < CHUNKS {
            split += 1;
        }
        al.sphere(split).collect()
    };
    let parts = exec.map(prefixes, |p| walker.subtree(x_inv.letters(), p.letters()));
    Ok(parts.iter().fold(S::zero(), |acc, p| acc.add(p)))
}
