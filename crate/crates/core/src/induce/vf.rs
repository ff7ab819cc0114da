//! Free products of finite cyclic groups with a free subgroup of finite
//! index, and induction from that subgroup by block routing.
//!
//! The factorization table stores, for each transversal element `t` and
//! generator `s`, the pair `(t′, w)` with `t·s = w·t′` where `w` is a word
//! over the free basis. Routing a word `λ = s_1…s_L` from `t` multiplies
//! the table words in order, giving `t·λ = w·t′`, and the induced action
//! is `(ρ(λ)F)_t = π(w) F_{t′}`.

use std::collections::{BTreeSet, HashMap};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::routed_coefficient;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::multrep::{Backend, MultVector};
use crate::par::Execution;
use crate::words::{Alphabet, Letter, Word};

/// `Z_{m_1} ∗ … ∗ Z_{m_k}` with one named generator per factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicFreeProduct {
    orders: Vec<usize>,
    names: Vec<String>,
}

/// Normal form: syllables `(factor, exponent)` with exponents in
/// `1..order` and adjacent factors distinct.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LambdaElement(Vec<(usize, usize)>);

impl LambdaElement {
    pub fn identity() -> Self {
        LambdaElement(Vec::new())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn syllables(&self) -> &[(usize, usize)] {
        &self.0
    }
}

impl CyclicFreeProduct {
    pub fn new(orders: Vec<usize>, names: Vec<String>) -> Result<Self> {
        if orders.len() < 2 || orders.len() != names.len() {
            return Err(Error::InvalidDatum("need at least two factors, one name each".into()));
        }
        if orders.iter().any(|&m| m < 2) {
            return Err(Error::InvalidDatum("factor orders must be at least 2".into()));
        }
        let distinct: BTreeSet<&String> = names.iter().collect();
        if distinct.len() != names.len() || names.iter().any(|n| n.is_empty() || n == "e") {
            return Err(Error::InvalidDatum("generator names must be distinct and not `e`".into()));
        }
        Ok(CyclicFreeProduct { orders, names })
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn generators(&self) -> usize {
        self.orders.len()
    }

    pub fn generator(&self, i: usize) -> LambdaElement {
        LambdaElement(vec![(i, 1)])
    }

    fn push(&self, x: &mut LambdaElement, (f, e): (usize, usize)) {
        let m = self.orders[f];
        match x.0.last_mut() {
            Some((g, d)) if *g == f => {
                *d = (*d + e) % m;
                if *d == 0 {
                    x.0.pop();
                }
            }
            _ => {
                if e % m != 0 {
                    x.0.push((f, e % m));
                }
            }
        }
    }

    pub fn mul(&self, x: &LambdaElement, y: &LambdaElement) -> LambdaElement {
        let mut out = x.clone();
        for &s in &y.0 {
            self.push(&mut out, s);
        }
        out
    }

    pub fn inverse(&self, x: &LambdaElement) -> LambdaElement {
        LambdaElement(x.0.iter().rev().map(|&(f, e)| (f, self.orders[f] - e)).collect())
    }

    pub fn from_tokens(&self, tokens: &[usize]) -> LambdaElement {
        let mut out = LambdaElement::identity();
        for &g in tokens {
            self.push(&mut out, (g, 1));
        }
        out
    }

    /// The normal form spelled in generators, each syllable `(f, e)` as `e`
    /// copies of generator `f`.
    pub fn tokens(&self, x: &LambdaElement) -> Vec<usize> {
        x.0.iter().flat_map(|&(f, e)| std::iter::repeat_n(f, e)).collect()
    }

    /// Parses a concatenation of generator names; `"e"` or `""` is the
    /// identity.
    pub fn parse_tokens(&self, s: &str) -> Result<Vec<usize>> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let g = (0..self.names.len())
                .filter(|&g| rest.starts_with(self.names[g].as_str()))
                .max_by_key(|&g| self.names[g].len())
                .ok_or_else(|| Error::UnknownLetter(s.to_string()))?;
            out.push(g);
            rest = &rest[self.names[g].len()..];
        }
        Ok(out)
    }

    pub fn parse(&self, s: &str) -> Result<LambdaElement> {
        Ok(self.from_tokens(&self.parse_tokens(s)?))
    }

    pub fn format(&self, x: &LambdaElement) -> String {
        if x.is_identity() {
            return "e".into();
        }
        self.tokens(x).into_iter().map(|g| self.names[g].as_str()).collect()
    }

    /// Distinct elements spelled by at most `radius` generators, in order
    /// of first appearance.
    pub fn ball(&self, radius: usize) -> Vec<LambdaElement> {
        let mut seen = BTreeSet::from([LambdaElement::identity()]);
        let mut out = vec![LambdaElement::identity()];
        let mut frontier = vec![LambdaElement::identity()];
        for _ in 0..radius {
            let mut next = Vec::new();
            for x in &frontier {
                for g in 0..self.generators() {
                    let y = self.mul(x, &self.generator(g));
                    if seen.insert(y.clone()) {
                        out.push(y.clone());
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        out
    }
}

/// A free subgroup of finite index in a free product of cyclic groups,
/// with a transversal and factorization table.
#[derive(Clone, Debug)]
pub struct VfDatum {
    group: CyclicFreeProduct,
    transversal: Vec<LambdaElement>,
    basis: Vec<LambdaElement>,
    free: Alphabet,
    table: Vec<(usize, Word)>,
}

const SEARCH_BUDGET: u128 = 200_000;

impl VfDatum {
    /// Builds a datum; a missing table is found by searching short words
    /// over the free basis.
    pub fn new(
        group: CyclicFreeProduct,
        transversal: Vec<LambdaElement>,
        basis: Vec<LambdaElement>,
        table: Option<Vec<(usize, Word)>>,
    ) -> Result<Self> {
        if transversal.first().is_none_or(|t| !t.is_identity()) {
            return Err(Error::InvalidDatum("the transversal must start with the identity".into()));
        }
        if transversal.iter().collect::<BTreeSet<_>>().len() != transversal.len() {
            return Err(Error::InvalidDatum("transversal elements must be distinct".into()));
        }
        let rank = basis.len();
        if rank < 2 {
            return Err(Error::InvalidDatum(format!("free subgroup rank {rank} is below the required 2")));
        }
        if rank > 26 {
            return Err(Error::InvalidDatum(format!("free subgroup rank {rank} is above 26")));
        }
        let free = Alphabet::standard(rank);
        let k = group.generators();
        let table = match table {
            Some(t) => {
                if t.len() != transversal.len() * k {
                    return Err(Error::InvalidDatum("factorization table is not total".into()));
                }
                if t.iter().any(|(tt, w)| *tt >= transversal.len() || !w.is_reduced(&free)) {
                    return Err(Error::InvalidDatum("table entry out of range or unreduced".into()));
                }
                t
            }
            None => Vec::new(),
        };
        let mut d = VfDatum { group, transversal, basis, free, table };
        if d.table.is_empty() {
            d.table = d.search_table()?;
        }
        Ok(d)
    }

    fn search_table(&self) -> Result<Vec<(usize, Word)>> {
        let mut len = 1;
        while self.free.sphere_size(len + 1).is_some_and(|n| n * (len as u128 + 1) < SEARCH_BUDGET) {
            len += 1;
        }
        let mut lookup: HashMap<LambdaElement, Word> = HashMap::new();
        for r in 0..=len {
            let words: Vec<Word> = if r == 0 { vec![Word::identity()] } else { self.free.sphere(r).collect() };
            for w in words {
                lookup.entry(self.expand(&w)).or_insert(w);
            }
        }
        let mut out = Vec::with_capacity(self.transversal.len() * self.group.generators());
        for t in &self.transversal {
            for g in 0..self.group.generators() {
                let ts = self.group.mul(t, &self.group.generator(g));
                let hit = self.transversal.iter().enumerate().find_map(|(i, t2)| {
                    let h = self.group.mul(&ts, &self.group.inverse(t2));
                    lookup.get(&h).map(|w| (i, w.clone()))
                });
                match hit {
                    Some(e) => out.push(e),
                    None => {
                        return Err(Error::InvalidDatum(format!(
                            "no factorization of {}·{} within free-basis length {len}",
                            self.group.format(t),
                            self.group.names()[g]
                        )))
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn group(&self) -> &CyclicFreeProduct {
        &self.group
    }

    pub fn transversal(&self) -> &[LambdaElement] {
        &self.transversal
    }

    pub fn basis(&self) -> &[LambdaElement] {
        &self.basis
    }

    /// Alphabet of the free basis: letter `2i` is basis element `i`, letter
    /// `2i + 1` its inverse.
    pub fn free_alphabet(&self) -> &Alphabet {
        &self.free
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn index(&self) -> usize {
        self.transversal.len()
    }

    /// `(t′, w)` with `t·s = w·t′`.
    pub fn entry(&self, t: usize, s: usize) -> &(usize, Word) {
        &self.table[t * self.group.generators() + s]
    }

    pub fn set_entry(&mut self, t: usize, s: usize, entry: (usize, Word)) {
        let k = self.group.generators();
        self.table[t * k + s] = entry;
    }

    pub fn expand(&self, w: &Word) -> LambdaElement {
        let mut out = LambdaElement::identity();
        for &l in w.letters() {
            let b = &self.basis[l / 2];
            let b = if l % 2 == 0 { b.clone() } else { self.group.inverse(b) };
            out = self.group.mul(&out, &b);
        }
        out
    }

    pub fn route_tokens(&self, t: usize, tokens: &[usize]) -> (Word, usize) {
        let mut w = Word::identity();
        let mut cur = t;
        for &g in tokens {
            let (next, piece) = self.entry(cur, g);
            for &l in piece.letters() {
                w.push_reduce(&self.free, l);
            }
            cur = *next;
        }
        (w, cur)
    }

    /// `t·λ = w·t′`, routed along the normal form of `λ`.
    pub fn route(&self, t: usize, lambda: &LambdaElement) -> (Word, usize) {
        self.route_tokens(t, &self.group.tokens(lambda))
    }

    /// `|T|·(k − 1 − Σ 1/m_i) + 1`, the rank forced by the Euler
    /// characteristic.
    pub fn euler_rank(&self) -> Ratio<i64> {
        let k = self.group.generators() as i64;
        let inv: Ratio<i64> = self.group.orders().iter().map(|&m| Ratio::new(1, m as i64)).sum();
        Ratio::from_integer(self.index() as i64) * (Ratio::from_integer(k - 1) - inv) + 1
    }
}

/// Outcome of [`vf_validate`].
#[derive(Clone, Debug, Default)]
pub struct VfReport {
    pub entries_checked: usize,
    pub probes: usize,
    pub failures: Vec<String>,
}

impl VfReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Exhaustive table checks plus `probes` random associativity probes.
pub fn vf_validate(d: &VfDatum, probes: usize, seed: u64) -> VfReport {
    let g = &d.group;
    let mut rep = VfReport::default();
    let holds = |t: usize, lambda: &LambdaElement, (w, t2): &(Word, usize)| {
        g.mul(&d.transversal[t], lambda) == g.mul(&d.expand(w), &d.transversal[*t2])
    };
    for t in 0..d.index() {
        for s in 0..g.generators() {
            rep.entries_checked += 1;
            let (t2, w) = d.entry(t, s).clone();
            if !holds(t, &g.generator(s), &(w, t2)) {
                rep.failures.push(format!(
                    "table entry ({}|{}) is inconsistent",
                    g.format(&d.transversal[t]),
                    g.names()[s]
                ));
            }
        }
    }
    for (i, t) in d.transversal.iter().enumerate() {
        let (w, t2) = d.route(0, t);
        if t2 != i || !w.is_identity() {
            rep.failures.push(format!("transversal element {} does not route to itself", g.format(t)));
        }
    }
    for (i, b) in d.basis.iter().enumerate() {
        let (w, t2) = d.route(0, b);
        if t2 != 0 || w != Word::letter(2 * i as Letter) {
            rep.failures.push(format!("basis element {} does not route to its letter", g.format(b)));
        }
    }
    let euler = d.euler_rank();
    if euler != Ratio::from_integer(d.rank() as i64) {
        rep.failures.push(format!("rank {} differs from the Euler characteristic value {euler}", d.rank()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..probes {
        rep.probes += 1;
        let t = rng.random_range(0..d.index());
        let len = rng.random_range(1..=8);
        let raw: Vec<usize> = (0..len).map(|_| rng.random_range(0..g.generators())).collect();
        let lambda = g.from_tokens(&raw);
        let by_letters = d.route_tokens(t, &raw);
        let by_normal_form = d.route(t, &lambda);
        if by_letters != by_normal_form || !holds(t, &lambda, &by_letters) {
            let word: String = raw.iter().map(|&s| g.names()[s].as_str()).collect();
            rep.failures.push(format!("probe {}·{word} routes inconsistently", g.format(&d.transversal[t])));
        }
    }
    rep
}

/// `⟨Ind π(λ) F, G⟩` for block vectors indexed by the transversal.
pub fn induce_to_vf(d: &VfDatum, lambda: &LambdaElement, f: &[MultVector], g: &[MultVector], backend: Backend) -> Result<C64> {
    if f.iter().chain(g).any(|b| b.alphabet() != d.free_alphabet()) {
        return Err(Error::SystemMismatch);
    }
    let routes: Vec<(Word, usize)> = (0..d.index()).map(|t| d.route(t, lambda)).collect();
    routed_coefficient(&routes, f, g, backend, Execution::default())
}

/// `PSL(2,Z) = Z_2 ∗ Z_3` with its commutator subgroup, free on
/// `srsr²` and `sr²sr`.
pub fn psl2z() -> VfDatum {
    let g = CyclicFreeProduct::new(vec![2, 3], vec!["s".into(), "r".into()]).expect("static datum");
    let t = ["e", "s", "r", "rr", "sr", "srr"].iter().map(|x| g.parse(x).expect("static")).collect();
    let b = ["srsrr", "srrsr"].iter().map(|x| g.parse(x).expect("static")).collect();
    VfDatum::new(g, t, b, None).expect("static datum")
}
