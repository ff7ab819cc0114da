//! Finite-index subgroups of free groups given as preimages of subgroups of
//! finite groups, with their Schreier transversals and free bases.
//!
//! Cosets are right cosets `Γ0·g`; the free group acts on them by right
//! multiplication. The transversal `D` is the shortlex-minimal
//! prefix-closed set of representatives, and `A′` consists of the
//! nontrivial words `u·a·rep(ua)⁻¹`.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::words::{multiply, Alphabet, Letter, Word};

/// A finite group with elements `0..order`, `0` being the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FiniteGroup {
    /// Direct product of cyclic groups, elements in mixed radix (first
    /// factor least significant).
    Cyclic(Vec<usize>),
    /// Multiplication table `table[g][h] = g·h`.
    Table(Vec<Vec<usize>>),
}

impl FiniteGroup {
    pub fn validate(&self) -> Result<()> {
        match self {
            FiniteGroup::Cyclic(orders) => {
                if orders.iter().any(|&m| m == 0) {
                    return Err(Error::InvalidQuotient("cyclic orders must be positive".into()));
                }
                if orders.iter().try_fold(1usize, |acc, &m| acc.checked_mul(m)).is_none() {
                    return Err(Error::InvalidQuotient("group order overflows".into()));
                }
                Ok(())
            }
            FiniteGroup::Table(t) => {
                let n = t.len();
                if n == 0 || t.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
                    return Err(Error::InvalidQuotient("multiplication table must be square over 0..n".into()));
                }
                for g in 0..n {
                    if t[0][g] != g || t[g][0] != g {
                        return Err(Error::InvalidQuotient("element 0 must be the identity".into()));
                    }
                    let mut seen = vec![false; n];
                    for &x in &t[g] {
                        if std::mem::replace(&mut seen[x], true) {
                            return Err(Error::InvalidQuotient(format!("row {g} is not a permutation")));
                        }
                    }
                }
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            if t[t[a][b]][c] != t[a][t[b][c]] {
                                return Err(Error::InvalidQuotient(format!(
                                    "multiplication is not associative at ({a},{b},{c})"
                                )));
                            }
                        }
                    }
                }
                Ok(())
            }
        }
    }

    pub fn order(&self) -> usize {
        match self {
            FiniteGroup::Cyclic(orders) => orders.iter().product(),
            FiniteGroup::Table(t) => t.len(),
        }
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        match self {
            FiniteGroup::Cyclic(orders) => {
                let (mut g, mut h, mut out, mut base) = (g, h, 0, 1);
                for &m in orders {
                    out += ((g % m + h % m) % m) * base;
                    g /= m;
                    h /= m;
                    base *= m;
                }
                out
            }
            FiniteGroup::Table(t) => t[g][h],
        }
    }

    pub fn inv(&self, g: usize) -> usize {
        match self {
            FiniteGroup::Cyclic(orders) => {
                let (mut g, mut out, mut base) = (g, 0, 1);
                for &m in orders {
                    out += ((m - g % m) % m) * base;
                    g /= m;
                    base *= m;
                }
                out
            }
            FiniteGroup::Table(t) => t[g].iter().position(|&x| x == 0).expect("validated group"),
        }
    }

    /// Element from its cyclic coordinates.
    pub fn from_coords(&self, coords: &[usize]) -> Result<usize> {
        match self {
            FiniteGroup::Cyclic(orders) => {
                if coords.len() != orders.len() {
                    return Err(Error::InvalidQuotient(format!(
                        "element needs {} coordinates, got {}",
                        orders.len(),
                        coords.len()
                    )));
                }
                let (mut out, mut base) = (0, 1);
                for (&c, &m) in coords.iter().zip(orders) {
                    out += (c % m) * base;
                    base *= m;
                }
                Ok(out)
            }
            FiniteGroup::Table(_) => match coords {
                [g] if *g < self.order() => Ok(*g),
                _ => Err(Error::InvalidQuotient("table elements are single indices".into())),
            },
        }
    }
}

/// A homomorphism `F(A) → Q` given on letters, and the subgroup `K ≤ Q`
/// whose preimage is the subgroup of interest. `K` defaults to the trivial
/// subgroup, making the subgroup a kernel.
#[derive(Clone, Debug)]
pub struct QuotientSpec {
    pub group: FiniteGroup,
    pub images: Vec<usize>,
    pub subgroup: Option<Vec<usize>>,
}

/// Right action of the free group on the cosets of a finite-index subgroup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetTable {
    alphabet: Alphabet,
    index: usize,
    action: Vec<usize>,
}

impl CosetTable {
    /// `action[c * |A| + a]` is the coset `c·a`; coset 0 is the subgroup.
    pub fn new(alphabet: Alphabet, index: usize, action: Vec<usize>) -> Result<Self> {
        let n = alphabet.len();
        if index == 0 || action.len() != index * n {
            return Err(Error::InvalidQuotient("coset table has the wrong shape".into()));
        }
        if action.iter().any(|&c| c >= index) {
            return Err(Error::InvalidQuotient("coset out of range".into()));
        }
        for a in alphabet.letters() {
            let ai = alphabet.inverse(a);
            for c in 0..index {
                if action[action[c * n + a] * n + ai] != c {
                    return Err(Error::InvalidQuotient(format!(
                        "letter `{}` does not act inversely to `{}`",
                        alphabet.name(ai),
                        alphabet.name(a)
                    )));
                }
            }
        }
        let t = CosetTable { alphabet, index, action };
        if t.bfs().0.iter().any(|r| r.is_none()) {
            return Err(Error::Disconnected);
        }
        Ok(t)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn index(&self) -> usize {
        self.index
    }

    #[inline]
    pub fn act(&self, coset: usize, a: Letter) -> usize {
        self.action[coset * self.alphabet.len() + a]
    }

    pub fn walk(&self, coset: usize, w: &Word) -> usize {
        w.letters().iter().fold(coset, |c, &a| self.act(c, a))
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.walk(0, w) == 0
    }

    /// Shortlex-minimal representatives by breadth-first search, and the
    /// cosets in discovery order.
    fn bfs(&self) -> (Vec<Option<Word>>, Vec<usize>) {
        let mut reps: Vec<Option<Word>> = vec![None; self.index];
        let mut order = Vec::with_capacity(self.index);
        reps[0] = Some(Word::identity());
        let mut queue = VecDeque::from([0usize]);
        while let Some(c) = queue.pop_front() {
            order.push(c);
            let rep = reps[c].clone().expect("queued cosets have representatives");
            for a in self.alphabet.letters() {
                if rep.last() == Some(self.alphabet.inverse(a)) {
                    continue;
                }
                let d = self.act(c, a);
                if reps[d].is_none() {
                    let mut w = rep.clone();
                    w.push(a);
                    reps[d] = Some(w);
                    queue.push_back(d);
                }
            }
        }
        (reps, order)
    }
}

pub fn coset_table_from_quotient(alphabet: &Alphabet, spec: &QuotientSpec) -> Result<CosetTable> {
    let q = &spec.group;
    q.validate()?;
    let n = q.order();
    if spec.images.len() != alphabet.len() {
        return Err(Error::InvalidQuotient(format!(
            "need an image for each of the {} letters, got {}",
            alphabet.len(),
            spec.images.len()
        )));
    }
    if spec.images.iter().any(|&g| g >= n) {
        return Err(Error::InvalidQuotient("image outside the group".into()));
    }
    for a in alphabet.letters() {
        if q.inv(spec.images[a]) != spec.images[alphabet.inverse(a)] {
            return Err(Error::InvalidQuotient(format!(
                "images of `{}` and `{}` are not mutually inverse",
                alphabet.name(a),
                alphabet.name(alphabet.inverse(a))
            )));
        }
    }
    let k: BTreeSet<usize> = match &spec.subgroup {
        None => BTreeSet::from([0]),
        Some(elems) => {
            let k: BTreeSet<usize> = elems.iter().copied().collect();
            if k.iter().any(|&g| g >= n) || !k.contains(&0) {
                return Err(Error::InvalidQuotient("subgroup must contain the identity".into()));
            }
            for &g in &k {
                for &h in &k {
                    if !k.contains(&q.mul(g, h)) {
                        return Err(Error::InvalidQuotient("subgroup is not closed under multiplication".into()));
                    }
                }
            }
            k
        }
    };
    // the coset Γ0·g corresponds to the right coset K·φ(g), keyed by its
    // least element
    let key = |g: usize| k.iter().map(|&h| q.mul(h, g)).min().expect("K is nonempty");
    let mut ids: HashMap<usize, usize> = HashMap::from([(key(0), 0)]);
    let mut elems = vec![0usize];
    let mut action = Vec::new();
    let mut c = 0;
    while c < elems.len() {
        for a in alphabet.letters() {
            let g = q.mul(elems[c], spec.images[a]);
            let next = ids.len();
            let id = *ids.entry(key(g)).or_insert(next);
            if id == elems.len() {
                elems.push(g);
            }
            action.push(id);
        }
        c += 1;
    }
    CosetTable::new(alphabet.clone(), elems.len(), action)
}

/// Schreier transversal, free basis and the block index sets of a
/// finite-index subgroup.
#[derive(Clone, Debug)]
pub struct SchreierData {
    table: CosetTable,
    transversal: Vec<Word>,
    coset_rep: Vec<usize>,
    rep_coset: Vec<usize>,
    generators: Vec<Word>,
    gen_alphabet: Alphabet,
    gen_index: HashMap<Word, Letter>,
    /// `(D index, letter)` → Schreier generator and next transversal index.
    steps: Vec<(Option<Letter>, usize)>,
    p: Vec<Vec<(usize, Letter)>>,
}

pub fn schreier(table: &CosetTable) -> Result<SchreierData> {
    let al = table.alphabet();
    let n = al.len();
    let (reps, order) = table.bfs();
    if reps.iter().any(|r| r.is_none()) {
        return Err(Error::Disconnected);
    }
    let reps: Vec<Word> = reps.into_iter().map(|r| r.expect("connected")).collect();
    let mut sorted = order.clone();
    sorted.sort_by(|&x, &y| reps[x].shortlex_cmp(&reps[y]));
    let transversal: Vec<Word> = sorted.iter().map(|&c| reps[c].clone()).collect();
    let mut coset_rep = vec![0; table.index()];
    for (i, &c) in sorted.iter().enumerate() {
        coset_rep[c] = i;
    }

    let mut raw: Vec<(usize, Letter, usize, Word)> = Vec::new();
    let mut found: BTreeSet<Word> = BTreeSet::new();
    for (i, u) in transversal.iter().enumerate() {
        for a in al.letters() {
            let next = coset_rep[table.act(sorted[i], a)];
            let mut ua = u.clone();
            ua.push_reduce(al, a);
            let g = multiply(al, &ua, &transversal[next].inverse(al));
            if !g.is_identity() {
                found.insert(g.clone());
            }
            raw.push((i, a, next, g));
        }
    }
    let mut reps_pairs: Vec<Word> = found
        .iter()
        .filter(|g| g.shortlex_cmp(&g.inverse(al)).is_lt())
        .cloned()
        .collect();
    reps_pairs.sort_by(|x, y| x.shortlex_cmp(y));
    if reps_pairs.len() * 2 != found.len() {
        return Err(Error::Layout("Schreier generators are not closed under inversion".into()));
    }
    let rank = reps_pairs.len();
    let expected = 1 + table.index() * (al.rank() - 1);
    if rank != expected {
        return Err(Error::Layout(format!("Schreier rank {rank} differs from the Nielsen–Schreier value {expected}")));
    }
    if !(2..=26).contains(&rank) {
        return Err(Error::InvalidQuotient(format!("subgroup rank {rank} is outside 2..=26")));
    }
    let mut generators = Vec::with_capacity(2 * rank);
    for g in reps_pairs {
        let gi = g.inverse(al);
        generators.push(g);
        generators.push(gi);
    }
    let gen_alphabet = Alphabet::standard(rank);
    let gen_index: HashMap<Word, Letter> = generators.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
    let steps = raw
        .into_iter()
        .map(|(_, _, next, g)| ((!g.is_identity()).then(|| gen_index[&g]), next))
        .collect::<Vec<_>>();
    debug_assert_eq!(steps.len(), transversal.len() * n);

    let mut p: Vec<Vec<(usize, Letter, Word)>> = vec![Vec::new(); n];
    for (i, u) in transversal.iter().enumerate() {
        let ui = u.inverse(al);
        for (c, g) in generators.iter().enumerate() {
            let w = multiply(al, &ui, g);
            if let Some(a) = w.first() {
                p[a].push((i, c, w));
            }
        }
    }
    let p = p
        .into_iter()
        .map(|mut v| {
            v.sort_by(|x, y| x.2.shortlex_cmp(&y.2));
            v.into_iter().map(|(i, c, _)| (i, c)).collect()
        })
        .collect();
    Ok(SchreierData {
        table: table.clone(),
        transversal,
        coset_rep,
        rep_coset: sorted,
        generators,
        gen_alphabet,
        gen_index,
        steps,
        p,
    })
}

impl SchreierData {
    pub fn alphabet(&self) -> &Alphabet {
        self.table.alphabet()
    }

    pub fn table(&self) -> &CosetTable {
        &self.table
    }

    pub fn index(&self) -> usize {
        self.transversal.len()
    }

    /// The transversal `D` in shortlex order; index 0 is the identity.
    pub fn transversal(&self) -> &[Word] {
        &self.transversal
    }

    /// `A′` as words over `A`; letter `i` of [`gen_alphabet`](Self::gen_alphabet)
    /// expands to `generators()[i]`.
    pub fn generators(&self) -> &[Word] {
        &self.generators
    }

    pub fn gen_alphabet(&self) -> &Alphabet {
        &self.gen_alphabet
    }

    pub fn rank(&self) -> usize {
        self.gen_alphabet.rank()
    }

    pub fn generator_letter(&self, g: &Word) -> Option<Letter> {
        self.gen_index.get(g).copied()
    }

    /// Pairs `(u, c′)` (as transversal index and `A′` letter) with
    /// `u⁻¹c′ ∈ Γ(a)`, ordered by the shortlex order of `u⁻¹c′`.
    pub fn p(&self, a: Letter) -> &[(usize, Letter)] {
        &self.p[a]
    }

    /// The words of `P(a)`.
    pub fn p_words(&self, a: Letter) -> Vec<Word> {
        let al = self.alphabet();
        self.p[a]
            .iter()
            .map(|&(u, c)| multiply(al, &self.transversal[u].inverse(al), &self.generators[c]))
            .collect()
    }

    /// Transversal index of the coset `Γ0·g`.
    pub fn coset_of(&self, g: &Word) -> usize {
        self.coset_rep[self.table.walk(0, g)]
    }

    pub fn rep_of(&self, g: &Word) -> &Word {
        &self.transversal[self.coset_of(g)]
    }

    /// Schreier generator `u·a·rep(ua)⁻¹` for transversal index `u` (or
    /// `None` when trivial) and the transversal index of `rep(ua)`.
    #[inline]
    pub fn step(&self, u: usize, a: Letter) -> (Option<Letter>, usize) {
        self.steps[u * self.alphabet().len() + a]
    }

    /// Routes `u·g = w·rep(ug)` and returns `(w, rep(ug))` with `w` over `A′`.
    pub fn route(&self, u: usize, g: &Word) -> (Word, usize) {
        let mut w = Word::identity();
        let mut cur = u;
        for &a in g.letters() {
            let (s, next) = self.step(cur, a);
            if let Some(s) = s {
                w.push_reduce(&self.gen_alphabet, s);
            }
            cur = next;
        }
        (w, cur)
    }

    /// The coset of transversal index `u` in the underlying table.
    pub fn coset_id(&self, u: usize) -> usize {
        self.rep_coset[u]
    }

    pub fn rewrite_to_subgroup(&self, w: &Word) -> Result<Word> {
        let (out, end) = self.route(0, w);
        if end != 0 {
            return Err(Error::NotInSubgroup(self.alphabet().format_word(w)));
        }
        Ok(out)
    }

    /// Evaluates a word over `A′` in the free group on `A`.
    pub fn expand(&self, w: &Word) -> Word {
        let al = self.alphabet();
        let mut out = Word::identity();
        for &c in w.letters() {
            for &l in self.generators[c].letters() {
                out.push_reduce(al, l);
            }
        }
        out
    }
}
