#![allow(dead_code)]

use proptest::prelude::*;
use qflag_core::uqsl::{Uq, UqElement};
use qflag_core::RatQ;

pub fn coeff(i: usize) -> RatQ {
    match i % 8 {
        0 => RatQ::one(),
        1 => RatQ::int(-1),
        2 => RatQ::q(),
        3 => RatQ::q_pow(-1),
        4 => RatQ::int(2),
        5 => RatQ::nu(),
        6 => RatQ::ratio(1, 3).unwrap(),
        _ => RatQ::qint(2),
    }
}

/// Generator code: 0 = E, 1 = F, 2 = K, 3 = K^-1.
pub fn generator(u: &Uq, kind: u8, i: usize) -> UqElement {
    match kind {
        0 => u.e(i).unwrap(),
        1 => u.f(i).unwrap(),
        2 => u.k(i, 1).unwrap(),
        _ => u.k(i, -1).unwrap(),
    }
}

pub type RawElem = Vec<(usize, Vec<(u8, usize)>)>;

pub fn raw_elem(n: usize, terms: usize, len: usize) -> impl Strategy<Value = RawElem> {
    prop::collection::vec((0usize..8, prop::collection::vec((0u8..4, 1..=n), 0..=len)), 1..=terms)
}

pub fn raw_positive(n: usize, terms: usize, len: usize) -> impl Strategy<Value = RawElem> {
    prop::collection::vec((0usize..8, prop::collection::vec((0u8..1, 1..=n), 0..=len)), 1..=terms)
}

pub fn build(u: &Uq, raw: &RawElem) -> UqElement {
    let mut x = u.zero();
    for (c, gens) in raw {
        let factors: Vec<UqElement> = gens.iter().map(|(k, i)| generator(u, *k, *i)).collect();
        x = x.add(&u.product(&factors).scale(&coeff(*c)));
    }
    x
}

pub fn report(id: usize, title: &str, ok: bool) {
    println!("criterion {id:>2}: {} {title}", if ok { "PASS" } else { "FAIL" });
}
