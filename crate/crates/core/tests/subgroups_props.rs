mod common;

use boundary_reps::subgroups::{coset_table_from_quotient, schreier, FiniteGroup, QuotientSpec, SchreierData};
use boundary_reps::words::{multiply, Alphabet, Word};
use common::*;
use proptest::prelude::*;

fn from_spec(orders: Vec<usize>, images: Vec<usize>, subgroup: Option<Vec<usize>>) -> Option<SchreierData> {
    let spec = QuotientSpec { group: FiniteGroup::Cyclic(orders), images, subgroup };
    let t = coset_table_from_quotient(&Alphabet::standard(2), &spec).ok()?;
    schreier(&t).ok()
}

fn s3() -> SchreierData {
    // elements e, r, r², s, sr, sr² with s·r = r²·s
    let mul = |x: usize, y: usize| -> usize {
        let (sx, rx) = (x / 3, x % 3);
        let (sy, ry) = (y / 3, y % 3);
        let r = if sy == 1 { (3 - rx + ry) % 3 } else { (rx + ry) % 3 };
        3 * ((sx + sy) % 2) + r
    };
    let table: Vec<Vec<usize>> = (0..6).map(|x| (0..6).map(|y| mul(x, y)).collect()).collect();
    let g = FiniteGroup::Table(table);
    let images = vec![1, 2, 3, 3];
    let spec = QuotientSpec { group: g, images, subgroup: None };
    schreier(&coset_table_from_quotient(&Alphabet::standard(2), &spec).unwrap()).unwrap()
}

fn check_structure(s: &SchreierData) {
    let al = s.alphabet();
    let d = s.transversal();
    assert_eq!(d.len(), s.table().index());
    assert!(d[0].is_identity());
    for u in d {
        assert!(d.contains(&u.prefix(u.len().saturating_sub(1))));
    }
    let mut cosets: Vec<usize> = d.iter().map(|u| s.table().walk(0, u)).collect();
    cosets.sort();
    cosets.dedup();
    assert_eq!(cosets.len(), d.len());

    assert_eq!(s.rank(), 1 + s.index() * (al.rank() - 1));
    assert_eq!(s.generators().len(), 2 * s.rank());
    for (i, g) in s.generators().iter().enumerate() {
        assert!(s.table().contains(g));
        assert_eq!(&g.inverse(al), &s.generators()[i ^ 1]);
        let dist = d
            .iter()
            .flat_map(|u| d.iter().map(move |v| (u, v)))
            .map(|(u, v)| multiply(al, &multiply(al, &u.inverse(al), g), v).len())
            .min()
            .unwrap();
        assert_eq!(dist, 1, "generator {}", al.format_word(g));
    }

    let pairs: usize = al.letters().map(|a| s.p(a).len()).sum();
    assert_eq!(pairs, d.len() * s.generators().len());
    for a in al.letters() {
        for w in s.p_words(a) {
            assert_eq!(w.first(), Some(a));
        }
    }
}

#[test]
fn s3_kernel_structure() {
    let s = s3();
    assert_eq!(s.index(), 6);
    assert_eq!(s.rank(), 7);
    check_structure(&s);
}

#[test]
fn rewriting_inverts_expansion() {
    let mut r = rng(31);
    for s in [from_spec(vec![2], vec![1, 1, 0, 0], None).unwrap(), from_spec(vec![3], vec![1, 2, 1, 2], None).unwrap(), s3()] {
        let al = s.alphabet().clone();
        let mut done = 0;
        while done < 200 {
            let w = random_word(&al, 1 + done % 10, &mut r);
            let g = multiply(&al, &w, &s.rep_of(&w).inverse(&al));
            if g.len() > 12 {
                continue;
            }
            let h = s.rewrite_to_subgroup(&g).unwrap();
            assert_eq!(s.expand(&h), g);
            done += 1;
        }
        let outside = (0..al.len())
            .map(|a| Word::letter(a))
            .find(|w| !s.table().contains(w));
        if let Some(w) = outside {
            assert!(s.rewrite_to_subgroup(&w).is_err());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cyclic_quotients_give_schreier_data(
        m in 2usize..=5,
        n in 1usize..=3,
        ia in 0usize..15,
        ib in 0usize..15,
        use_sub in any::<bool>(),
    ) {
        let orders = vec![m, n];
        let order = m * n;
        let (ia, ib) = (ia % order, ib % order);
        let g = FiniteGroup::Cyclic(orders.clone());
        let images = vec![ia, g.inv(ia), ib, g.inv(ib)];
        let sub = use_sub.then(|| {
            let mut k = vec![0];
            let x = g.from_coords(&[0, 1 % n]).unwrap();
            if x != 0 {
                k.push(x);
                let mut y = g.mul(x, x);
                while y != 0 {
                    k.push(y);
                    y = g.mul(y, x);
                }
            }
            k
        });
        if let Some(s) = from_spec(orders, images, sub) {
            check_structure(&s);
        }
    }
}
