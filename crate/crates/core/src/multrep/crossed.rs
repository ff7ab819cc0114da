//! Finite crossed-product elements `Σ ζ_i δ_{γ_i}` and precomposition of
//! coefficient functions by free-group endomorphisms.

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::words::{Alphabet, Cylinder, Letter, Word};

use super::MultVector;

#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    /// The whole boundary; its indicator acts as the identity.
    Whole,
    Cylinder(Cylinder),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossedTerm {
    pub coefficient: C64,
    pub region: Region,
    pub element: Word,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CrossedElement {
    pub terms: Vec<CrossedTerm>,
}

impl CrossedElement {
    pub fn new(terms: Vec<CrossedTerm>) -> Self {
        CrossedElement { terms }
    }

    pub fn term(mut self, coefficient: C64, region: Region, element: Word) -> Self {
        self.terms.push(CrossedTerm { coefficient, region, element });
        self
    }
}

/// `Σ_i c_i · α(1_{C_i}) π(γ_i) f`.
pub fn apply_crossed(e: &CrossedElement, f: &MultVector) -> Result<MultVector> {
    let mut acc = MultVector::zero(f.system().clone(), f.depth())?;
    for t in &e.terms {
        let mut v = f.act(&t.element)?;
        if let Region::Cylinder(c) = &t.region {
            v = v.cylinder_op(c.stem())?;
        }
        acc = acc.axpy(t.coefficient, &v)?;
    }
    Ok(acc)
}

/// Endomorphism of the free group given by the images of the letters.
#[derive(Clone, Debug, PartialEq)]
pub struct Endomorphism {
    alphabet: Alphabet,
    images: Vec<Word>,
}

impl Endomorphism {
    /// Images of inverse letters are derived when absent; when both a letter
    /// and its inverse are given the images must be mutually inverse.
    pub fn new(alphabet: &Alphabet, images: &[(Letter, Word)]) -> Result<Self> {
        let mut slots: Vec<Option<Word>> = vec![None; alphabet.len()];
        for (l, w) in images {
            let w = Word::reduced(alphabet, w.letters().iter().copied());
            if slots[*l].replace(w).is_some() {
                return Err(Error::Precondition(format!("letter `{}` given twice", alphabet.name(*l))));
            }
        }
        for a in alphabet.letters() {
            let inv = alphabet.inverse(a);
            match (&slots[a], &slots[inv]) {
                (Some(x), Some(y)) if x.inverse(alphabet) != *y => {
                    return Err(Error::Precondition(format!(
                        "images of `{}` and `{}` are not inverse",
                        alphabet.name(a),
                        alphabet.name(inv)
                    )));
                }
                (None, Some(y)) => slots[a] = Some(y.inverse(alphabet)),
                _ => {}
            }
        }
        let images = slots
            .into_iter()
            .enumerate()
            .map(|(a, w)| w.ok_or_else(|| Error::Precondition(format!("no image for `{}`", alphabet.name(a)))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Endomorphism { alphabet: alphabet.clone(), images })
    }

    pub fn identity(alphabet: &Alphabet) -> Self {
        Endomorphism { alphabet: alphabet.clone(), images: alphabet.letters().map(Word::letter).collect() }
    }

    pub fn image(&self, a: Letter) -> &Word {
        &self.images[a]
    }

    /// `φ(x)`, freely reduced.
    pub fn apply(&self, x: &Word) -> Word {
        Word::reduced(&self.alphabet, x.letters().iter().flat_map(|&l| self.images[l].letters().iter().copied()))
    }
}

/// `x ↦ coef(φ(x))`.
pub fn precompose<'a, F>(coef: F, phi: &'a Endomorphism) -> impl Fn(&Word) -> Result<C64> + 'a
where
    F: Fn(&Word) -> Result<C64> + 'a,
{
    move |x| coef(&phi.apply(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CVector, ONE};
    use crate::multrep::{tests::spherical, Backend};

    #[test]
    fn crossed_examples() {
        let sys = spherical();
        let al = sys.alphabet().clone();
        let w = |s: &str| al.parse_word(s).unwrap();
        let f = MultVector::seed_at(sys.clone(), &w("a"), CVector::from_element(1, ONE)).unwrap();
        let whole = CrossedElement::default().term(ONE, Region::Whole, w("ab"));
        let got = apply_crossed(&whole, &f).unwrap();
        assert!(got.sub(&f.act(&w("ab")).unwrap()).unwrap().norm() < 1e-14);
        let cyl = CrossedElement::default().term(ONE, Region::Cylinder(Cylinder::new(w("aa")).unwrap()), Word::identity());
        let got = apply_crossed(&cyl, &f).unwrap();
        assert!(got.sub(&f.cylinder_op(&w("aa")).unwrap()).unwrap().norm() < 1e-14);
        // α(1_{∂Γ(a)}) − Σ over the three children cancels
        let mut e = CrossedElement::default().term(ONE, Region::Cylinder(Cylinder::new(w("a")).unwrap()), Word::identity());
        for c in ["aa", "ab", "aB"] {
            e = e.term(-ONE, Region::Cylinder(Cylinder::new(w(c)).unwrap()), Word::identity());
        }
        assert!(apply_crossed(&e, &f).unwrap().norm() < 1e-14);
    }

    #[test]
    fn precompose_examples() {
        let sys = spherical();
        let al = sys.alphabet().clone();
        let w = |s: &str| al.parse_word(s).unwrap();
        let f = MultVector::seed_at(sys.clone(), &w("a"), CVector::from_element(1, ONE)).unwrap();
        let coef = |x: &Word| f.coefficient(x, &f, Backend::Fast);
        let id = Endomorphism::identity(&al);
        let (a, b) = (al.letter("a").unwrap(), al.letter("b").unwrap());
        assert_eq!(precompose(coef, &id)(&w("ab")).unwrap(), coef(&w("ab")).unwrap());
        let inv = Endomorphism::new(&al, &[(a, w("A")), (b, w("B"))]).unwrap();
        assert_eq!(precompose(coef, &inv)(&w("a")).unwrap(), coef(&w("A")).unwrap());
        let phi = Endomorphism::new(&al, &[(a, w("ab")), (b, w("b"))]).unwrap();
        assert_eq!(phi.apply(&w("a")), w("ab"));
        assert_eq!(phi.apply(&w("aB")), w("a"));
        assert_eq!(phi.apply(&w("A")), w("BA"));
        assert_eq!(precompose(coef, &phi)(&w("a")).unwrap(), coef(&w("ab")).unwrap());
        let bad = Endomorphism::new(&al, &[(a, w("ab")), (al.inverse(a), w("b"))]);
        assert!(bad.is_err());
    }
}
