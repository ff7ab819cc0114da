//! Reduced words over a symmetric alphabet, spheres, cones and boundary cylinders.
//!
//! Letters are plain indices into an [`Alphabet`]; inversion is a table lookup.
//! A nonempty word `x` names both the cone of group elements whose reduced form
//! starts with `x` and the boundary cylinder of infinite reduced words starting
//! with `x`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use crate::error::{Error, Result};

pub type Letter = usize;

/// Default bound on the number of words in a materialized sphere.
pub const DEFAULT_SPHERE_CAP: u64 = 10_000_000;

static SPHERE_CAP: AtomicU64 = AtomicU64::new(DEFAULT_SPHERE_CAP);

/// Sets the process-wide sphere cap. Values below 10^3 are clamped up.
pub fn set_sphere_cap(cap: u64) {
    SPHERE_CAP.store(cap.max(1_000), AtomicOrdering::Relaxed);
}

pub fn sphere_cap() -> u64 {
    SPHERE_CAP.load(AtomicOrdering::Relaxed)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    inverse: Vec<Letter>,
}

impl Alphabet {
    /// Builds an alphabet from letter names and an inverse table.
    pub fn new(names: Vec<String>, inverse: Vec<Letter>) -> Result<Self> {
        let n = names.len();
        if inverse.len() != n {
            return Err(Error::InvalidAlphabet("inverse table has the wrong length".into()));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidAlphabet(format!(
                "need an even number of letters, at least 4 (got {n})"
            )));
        }
        for (i, &j) in inverse.iter().enumerate() {
            if j >= n || j == i || inverse[j] != i {
                return Err(Error::InvalidAlphabet(format!(
                    "inverse of `{}` is not a fixed-point-free involution",
                    names[i]
                )));
            }
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if name.is_empty() || name == "e" {
                return Err(Error::InvalidAlphabet(format!("letter name `{name}` is reserved")));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidAlphabet(format!("duplicate letter `{name}`")));
            }
        }
        Ok(Self { names, inverse })
    }

    /// Builds an alphabet from names and explicit inverse pairs.
    pub fn from_pairs(names: Vec<String>, pairs: &[(String, String)]) -> Result<Self> {
        let mut inverse = vec![usize::MAX; names.len()];
        let find = |s: &str| {
            names
                .iter()
                .position(|n| n == s)
                .ok_or_else(|| Error::UnknownLetter(s.to_string()))
        };
        for (x, y) in pairs {
            let (i, j) = (find(x)?, find(y)?);
            if inverse[i] != usize::MAX || inverse[j] != usize::MAX {
                return Err(Error::InvalidAlphabet(format!("letter paired twice in ({x},{y})")));
            }
            inverse[i] = j;
            inverse[j] = i;
        }
        if let Some(i) = inverse.iter().position(|&j| j == usize::MAX) {
            return Err(Error::InvalidAlphabet(format!("letter `{}` has no inverse", names[i])));
        }
        Self::new(names, inverse)
    }

    /// The alphabet `a, A, b, B, ...` of the given rank.
    pub fn standard(rank: usize) -> Self {
        assert!((2..=26).contains(&rank), "standard alphabets have rank 2..=26");
        let mut names = Vec::with_capacity(2 * rank);
        let mut inverse = Vec::with_capacity(2 * rank);
        for i in 0..rank {
            let c = (b'a' + i as u8) as char;
            names.push(c.to_string());
            names.push(c.to_ascii_uppercase().to_string());
            inverse.push(2 * i + 1);
            inverse.push(2 * i);
        }
        Self { names, inverse }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.names.len() / 2
    }

    pub fn letters(&self) -> std::ops::Range<Letter> {
        0..self.names.len()
    }

    #[inline]
    pub fn inverse(&self, l: Letter) -> Letter {
        self.inverse[l]
    }

    pub fn name(&self, l: Letter) -> &str {
        &self.names[l]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn letter(&self, name: &str) -> Option<Letter> {
        self.names.iter().position(|n| n == name)
    }

    /// Inverse pairs in canonical order: scan letters in order, skipping a
    /// letter whose inverse was already emitted.
    pub fn pairs(&self) -> Vec<(Letter, Letter)> {
        let mut out = Vec::with_capacity(self.rank());
        let mut used = vec![false; self.len()];
        for l in self.letters() {
            if !used[l] {
                used[l] = true;
                used[self.inverse(l)] = true;
                out.push((l, self.inverse(l)));
            }
        }
        out
    }

    /// Parses a concatenation of letter names (greedy longest match) and
    /// freely reduces it. `"e"` and `""` denote the identity.
    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let raw = self.tokenize(s)?;
        let mut w = Word::identity();
        for l in raw {
            w.push_reduce(self, l);
        }
        Ok(w)
    }

    /// Like [`parse_word`](Self::parse_word) but rejects unreduced input.
    pub fn parse_reduced(&self, s: &str) -> Result<Word> {
        let raw = self.tokenize(s)?;
        let w = Word(raw);
        if !w.is_reduced(self) {
            return Err(Error::NotReduced(s.to_string()));
        }
        Ok(w)
    }

    fn tokenize(&self, s: &str) -> Result<Vec<Letter>> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let best = self
                .letters()
                .filter(|&l| rest.starts_with(self.names[l].as_str()))
                .max_by_key(|&l| self.names[l].len())
                .ok_or_else(|| Error::UnknownLetter(s.to_string()))?;
            out.push(best);
            rest = &rest[self.names[best].len()..];
        }
        Ok(out)
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_identity() {
            return "e".to_string();
        }
        w.0.iter().map(|&l| self.names[l].as_str()).collect()
    }

    /// Number of reduced words of length `r`, or `None` on overflow.
    pub fn sphere_size(&self, r: usize) -> Option<u128> {
        if r == 0 {
            return Some(1);
        }
        let q = (self.len() - 1) as u128;
        let mut n = self.len() as u128;
        for _ in 1..r {
            n = n.checked_mul(q)?;
        }
        Some(n)
    }

    /// Fails with `CapExceeded` if the sphere of radius `r` is above the cap.
    pub fn check_cap(&self, r: usize) -> Result<usize> {
        let cap = sphere_cap();
        match self.sphere_size(r) {
            Some(n) if n <= cap as u128 => Ok(n as usize),
            n => Err(Error::CapExceeded {
                radius: r,
                size: n.unwrap_or(u128::MAX),
                cap,
            }),
        }
    }

    /// Position of a letter among the successors of `prev` (all letters except
    /// `prev⁻¹`, in alphabet order).
    #[inline]
    pub fn slot(&self, prev: Letter, next: Letter) -> usize {
        let forbidden = self.inverse(prev);
        debug_assert_ne!(next, forbidden);
        if next > forbidden {
            next - 1
        } else {
            next
        }
    }

    #[inline]
    pub fn successor(&self, prev: Letter, slot: usize) -> Letter {
        let forbidden = self.inverse(prev);
        if slot >= forbidden {
            slot + 1
        } else {
            slot
        }
    }

    /// Index of a reduced word within its sphere (lexicographic order).
    pub fn sphere_index(&self, w: &Word) -> usize {
        self.sphere_index_of(&w.0)
    }

    pub fn sphere_index_of(&self, letters: &[Letter]) -> usize {
        let q = self.len() - 1;
        let mut idx = 0usize;
        let mut prev: Option<Letter> = None;
        for &l in letters {
            idx = match prev {
                None => l,
                Some(p) => idx * q + self.slot(p, l),
            };
            prev = Some(l);
        }
        idx
    }

    /// Inverse of [`sphere_index`](Self::sphere_index).
    pub fn sphere_word(&self, r: usize, mut idx: usize) -> Word {
        if r == 0 {
            return Word::identity();
        }
        let q = self.len() - 1;
        let mut slots = vec![0usize; r];
        for k in (1..r).rev() {
            slots[k] = idx % q;
            idx /= q;
        }
        let mut letters = Vec::with_capacity(r);
        letters.push(idx);
        for k in 1..r {
            let prev = letters[k - 1];
            letters.push(self.successor(prev, slots[k]));
        }
        Word(letters)
    }

    /// Streams the reduced words of length `r` in lexicographic order.
    pub fn sphere(&self, r: usize) -> Sphere<'_> {
        Sphere::new(self, r)
    }

    /// All reduced words of length at most `r`, shortlex ordered.
    pub fn ball(&self, r: usize) -> Result<Vec<Word>> {
        let mut out = Vec::new();
        for k in 0..=r {
            self.check_cap(k)?;
            out.extend(self.sphere(k));
        }
        Ok(out)
    }
}

/// A reduced word. The empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Wraps letters without reducing; callers must pass a reduced sequence.
    pub fn from_letters_unchecked(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduced(alphabet: &Alphabet, letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut w = Word::identity();
        for l in letters {
            w.push_reduce(alphabet, l);
        }
        w
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn suffix_from(&self, n: usize) -> Word {
        Word(self.0[n.min(self.0.len())..].to_vec())
    }

    pub fn starts_with(&self, other: &Word) -> bool {
        self.0.starts_with(&other.0)
    }

    pub fn is_reduced(&self, alphabet: &Alphabet) -> bool {
        self.0.windows(2).all(|p| alphabet.inverse(p[0]) != p[1])
    }

    /// Appends a letter, cancelling against the current last letter.
    pub fn push_reduce(&mut self, alphabet: &Alphabet, l: Letter) {
        if self.0.last() == Some(&alphabet.inverse(l)) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    /// Appends a letter that is known not to cancel.
    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn inverse(&self, alphabet: &Alphabet) -> Word {
        Word(self.0.iter().rev().map(|&l| alphabet.inverse(l)).collect())
    }

    pub fn shortlex_cmp(&self, other: &Word) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> WordDisplay<'a> {
        WordDisplay { word: self, alphabet }
    }
}

pub struct WordDisplay<'a> {
    word: &'a Word,
    alphabet: &'a Alphabet,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.alphabet.format_word(self.word))
    }
}

/// Number of letters cancelled when forming `x·y`.
pub fn cancellation(alphabet: &Alphabet, x: &Word, y: &Word) -> usize {
    let (xs, ys) = (x.letters(), y.letters());
    let mut k = 0;
    while k < xs.len() && k < ys.len() && alphabet.inverse(xs[xs.len() - 1 - k]) == ys[k] {
        k += 1;
    }
    k
}

/// Free product of two reduced words.
pub fn multiply(alphabet: &Alphabet, x: &Word, y: &Word) -> Word {
    let k = cancellation(alphabet, x, y);
    let mut out = Vec::with_capacity(x.len() + y.len() - 2 * k);
    out.extend_from_slice(&x.letters()[..x.len() - k]);
    out.extend_from_slice(&y.letters()[k..]);
    Word(out)
}

/// Iterator over a sphere, in lexicographic letter order.
pub struct Sphere<'a> {
    alphabet: &'a Alphabet,
    current: Option<Vec<Letter>>,
    radius: usize,
}

impl<'a> Sphere<'a> {
    fn new(alphabet: &'a Alphabet, radius: usize) -> Self {
        let first = if radius == 0 {
            Vec::new()
        } else {
            let mut v = Vec::with_capacity(radius);
            v.push(0);
            for k in 1..radius {
                v.push(alphabet.successor(v[k - 1], 0));
            }
            v
        };
        Sphere { alphabet, current: Some(first), radius }
    }
}

impl Iterator for Sphere<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let cur = self.current.take()?;
        let out = Word(cur.clone());
        // advance: bump the deepest position that still has a successor slot
        let a = self.alphabet;
        let q = a.len() - 1;
        let mut next = cur;
        let mut pos = self.radius;
        let advanced = loop {
            if pos == 0 {
                break false;
            }
            pos -= 1;
            if pos == 0 {
                if next[0] + 1 < a.len() {
                    next[0] += 1;
                    break true;
                }
            } else {
                let s = a.slot(next[pos - 1], next[pos]);
                if s + 1 < q {
                    next[pos] = a.successor(next[pos - 1], s + 1);
                    break true;
                }
            }
        };
        if advanced {
            for k in pos + 1..self.radius {
                next[k] = a.successor(next[k - 1], 0);
            }
            self.current = Some(next);
        }
        Some(out)
    }
}

/// A boundary cylinder: all infinite reduced words starting with `stem`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cylinder {
    stem: Word,
}

impl Cylinder {
    pub fn new(stem: Word) -> Result<Self> {
        if stem.is_identity() {
            return Err(Error::Precondition("cylinder stems must be nonempty".into()));
        }
        Ok(Cylinder { stem })
    }

    pub fn stem(&self) -> &Word {
        &self.stem
    }

    /// Whether `other` is contained in `self`.
    pub fn contains(&self, other: &Cylinder) -> bool {
        other.stem.starts_with(&self.stem)
    }

    /// The one-letter-deeper cylinders partitioning `self`.
    pub fn children(&self, alphabet: &Alphabet) -> Vec<Cylinder> {
        let last = self.stem.last().expect("nonempty stem");
        (0..alphabet.len() - 1)
            .map(|s| {
                let mut w = self.stem.clone();
                w.push(alphabet.successor(last, s));
                Cylinder { stem: w }
            })
            .collect()
    }
}

/// A finite disjoint union of cylinders.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CylinderUnion {
    parts: Vec<Cylinder>,
}

impl CylinderUnion {
    /// Builds a union, rejecting overlapping parts.
    pub fn new(parts: Vec<Cylinder>) -> Result<Self> {
        for (i, p) in parts.iter().enumerate() {
            for q in &parts[i + 1..] {
                if p.contains(q) || q.contains(p) {
                    return Err(Error::Precondition(format!(
                        "cylinders with stems of lengths {} and {} overlap",
                        p.stem.len(),
                        q.stem.len()
                    )));
                }
            }
        }
        Ok(CylinderUnion { parts })
    }

    pub fn parts(&self) -> &[Cylinder] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// The stems of the depth-`depth` refinement, as a set.
    pub fn stems_at_depth(&self, alphabet: &Alphabet, depth: usize) -> Result<BTreeSet<Word>> {
        let mut out = BTreeSet::new();
        for p in &self.parts {
            for c in refine(alphabet, p, depth.max(p.stem.len()))?.parts {
                if c.stem.len() > depth {
                    return Err(Error::Precondition(format!(
                        "cannot express a depth-{} cylinder at depth {depth}",
                        c.stem.len()
                    )));
                }
                out.insert(c.stem);
            }
        }
        Ok(out)
    }
}

/// All cylinders with stems of length `depth` extending `c`.
pub fn refine(alphabet: &Alphabet, c: &Cylinder, depth: usize) -> Result<CylinderUnion> {
    if depth < c.stem.len() {
        return Err(Error::Precondition(format!(
            "refinement depth {depth} is shorter than the stem ({})",
            c.stem.len()
        )));
    }
    let mut level = vec![c.clone()];
    for _ in c.stem.len()..depth {
        level = level.iter().flat_map(|p| p.children(alphabet)).collect();
    }
    Ok(CylinderUnion { parts: level })
}

/// The image `x·∂Γ(stem)` as a disjoint union of cylinders.
///
/// Without full cancellation the image is the single cylinder of `x·stem`.
/// When `x` swallows the whole stem the cylinder is refined one level and
/// each child mapped; the cancelling suffix shortens at each step.
pub fn cylinder_image(alphabet: &Alphabet, x: &Word, c: &Cylinder) -> CylinderUnion {
    let mut parts = Vec::new();
    image_into(alphabet, x, c, &mut parts);
    parts.sort_by(|p, q| p.stem.shortlex_cmp(&q.stem));
    CylinderUnion { parts }
}

fn image_into(alphabet: &Alphabet, x: &Word, c: &Cylinder, out: &mut Vec<Cylinder>) {
    let k = cancellation(alphabet, x, &c.stem);
    if k < c.stem.len() {
        out.push(Cylinder { stem: multiply(alphabet, x, &c.stem) });
    } else {
        for child in c.children(alphabet) {
            image_into(alphabet, x, &child, out);
        }
    }
}
