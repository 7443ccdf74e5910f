mod common;

use num_rational::BigRational;
use num_bigint::BigInt;
use proptest::prelude::*;
use qflag_core::calculus::*;
use qflag_core::freealg::{Alphabet, FreeElement, TruncatedGB, Word};
use qflag_core::linalg::{Echelon, SparseVec};
use qflag_core::oq::{self, OqElement, OqWord};
use qflag_core::parse::Vars;
use qflag_core::uqsl::{serre_relations, simple_alphabet, Uq};
use qflag_core::weyl::{self, Rank};
use qflag_core::RatQ;

fn ratq() -> impl Strategy<Value = RatQ> {
    let poly = || prop::collection::vec(-3i128..=3, 1..4);
    (poly(), poly(), -2i32..=2).prop_map(|(n, d, s)| {
        let d = if d.iter().all(|c| *c == 0) { vec![1] } else { d };
        RatQ::from_parts(n, d) * RatQ::q_pow(s)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn field_axioms(a in ratq(), b in ratq(), c in ratq()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, RatQ::zero());
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
        prop_assert_eq!((&a * &b).bar(), a.bar() * b.bar());
        prop_assert_eq!(a.bar().bar(), a);
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in ratq(), b in ratq(), p in 2i64..9, s in 1i64..5) {
        let x = BigRational::new(BigInt::from(p), BigInt::from(s));
        if let (Ok(ea), Ok(eb)) = (a.eval(&x), b.eval(&x)) {
            prop_assert_eq!((&a + &b).eval(&x).unwrap(), &ea + &eb);
            prop_assert_eq!((&a * &b).eval(&x).unwrap(), &ea * &eb);
        }
    }

    #[test]
    fn scalar_text_round_trip(a in ratq()) {
        let back: RatQ = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn hopf_structure(raw in common::raw_elem(2, 3, 3), raw2 in common::raw_elem(2, 2, 2)) {
        let u = Uq::get(2);
        let x = common::build(&u, &raw);
        let y = common::build(&u, &raw2);
        prop_assert_eq!(u.mul(&x, &y).counit(), x.counit() * y.counit());
        let d = u.coproduct(&x);
        prop_assert_eq!(d.counit_left(), x.clone());
        prop_assert_eq!(d.counit_right(), x.clone());
        let mut s = u.zero();
        for ((a, b), c) in &d.terms {
            s = s.add(&u.mul(&u.antipode(&u.mono(a.clone())), &u.mono(b.clone())).scale(c));
        }
        prop_assert_eq!(s, u.scalar(x.counit()));
    }

    #[test]
    fn element_text_round_trip(raw in common::raw_elem(3, 3, 3)) {
        let u = Uq::get(3);
        let x = common::build(&u, &raw);
        prop_assert_eq!(u.parse(&x.render(), &Vars::new()).unwrap(), x);
    }

    #[test]
    fn normal_form_strategy_independence(w in prop::collection::vec(0u8..3, 1..=6), picks in prop::collection::vec(0usize..1000, 64)) {
        let gb = TruncatedGB::complete(&simple_alphabet(3, "E"), &serre_relations(3), 6).unwrap();
        let e = FreeElement::word(Word::from_slice(&w));
        let mut it = picks.into_iter().cycle();
        let by = gb.nf_reduce_by(&e, &mut |k| it.next().unwrap() % k).unwrap();
        prop_assert_eq!(by, gb.nf_reduce(&e).unwrap());
    }

    #[test]
    fn ideal_rank_matches_brute_force(rels in prop::collection::vec(prop::collection::vec((0u8..3, 0u8..3, 0usize..8), 1..4), 1..4)) {
        let alpha = Alphabet::plain(3);
        let rels: Vec<FreeElement> = rels
            .into_iter()
            .map(|terms| FreeElement::from_terms(terms.into_iter().map(|(a, b, c)| (Word::from_slice(&[a, b]), common::coeff(c)))))
            .filter(|r| !r.is_zero())
            .collect();
        let gb = TruncatedGB::complete(&alpha, &rels, 3).unwrap();
        let dims = gb.count_normal_words(3);
        for k in 2..=3usize {
            let mut ideal: Echelon<Word> = Echelon::new();
            for r in &rels {
                for pre in 0..=k - 2 {
                    for p in words(3, pre) {
                        for s in words(3, k - 2 - pre) {
                            let v: SparseVec<Word> = r.terms.iter().map(|(w, c)| (p.concat(w).concat(&s), c.clone())).collect();
                            ideal.insert(&v);
                        }
                    }
                }
            }
            prop_assert_eq!(dims[k], 3u128.pow(k as u32) - ideal.rank() as u128);
        }
    }

    #[test]
    fn reduced_word_combinatorics(k in 0usize..768, moves in prop::collection::vec(0usize..4, 0..4)) {
        let words = weyl::reduced_words(3, weyl::DEFAULT_WORD_BUDGET).unwrap();
        let mut w = words[k % words.len()].clone();
        for m in moves {
            let nb = weyl::braid_neighbours(&w);
            if !nb.is_empty() {
                w = nb[m % nb.len()].clone();
            }
        }
        let props = weyl::word_props(&w, 3).unwrap();
        prop_assert!(props.is_reduced && props.is_longest);
        let betas = weyl::beta_sequence(&w, 3).unwrap();
        prop_assert!(weyl::is_convex(&betas));
        let mut sorted = betas.clone();
        sorted.sort();
        prop_assert_eq!(sorted, weyl::positive_roots(3));
        prop_assert_eq!(weyl::opposite_word(&weyl::opposite_word(&w, 3), 3), w);
    }

    #[test]
    fn left_action_is_a_module_action(raw in common::raw_elem(2, 2, 2), raw2 in common::raw_elem(2, 2, 2), k in 0usize..90) {
        let u = Uq::get(2);
        let (x, y) = (common::build(&u, &raw), common::build(&u, &raw2));
        let words: Vec<OqWord> = (1..=2).flat_map(|d| oq::all_words(2, d)).collect();
        let a = OqElement::word(words[k % words.len()].clone());
        let lhs = oq::left_act(&x, &oq::left_act(&y, &a).unwrap()).unwrap();
        let rhs = oq::left_act(&u.mul(&x, &y), &a).unwrap();
        let d = a.length().unwrap().unwrap();
        prop_assert!(oq::oq_equal(2, &lhs, &rhs, d).unwrap());
    }

    #[test]
    fn relation_dimension_balance(k in 0usize..768) {
        let words = weyl::reduced_words(3, weyl::DEFAULT_WORD_BUDGET).unwrap();
        let t = TangentSpace::from_word(&words[k % words.len()], Rank::new(3).unwrap()).unwrap();
        for (_, r, c, pairs) in relation_balance(&t) {
            prop_assert_eq!(r + c, pairs);
        }
        let first = coideal_check(&t);
        prop_assert_eq!(first, coideal_check(&t));
    }
}

fn words(k: usize, len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    for _ in 0..len {
        out = out.iter().flat_map(|w| (0..k as u8).map(move |l| w.concat(&Word::from_slice(&[l])))).collect();
    }
    out
}
