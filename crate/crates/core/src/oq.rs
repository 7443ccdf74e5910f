//! Matrix coefficients `u_ij` of the vector representation, paired with
//! `U_q(sl_{n+1})` through tensor powers.
//!
//! Words in the `u_ij` are kept free; two words are identified only when they
//! define the same functional on `U_q`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use std::sync::LazyLock;
use parking_lot::Mutex;
use serde::Serialize;
use thiserror::Error;

use crate::freealg::render_terms;
use crate::linalg::{self, Echelon, SparseVec};
use crate::parse::{eval_in, parse_expr, Expr, ExprTarget, ParseError, Vars};
use crate::scalars::RatQ;
use crate::uqsl::{Mono, Uq, UqElement};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OqError {
    #[error("index u[{0},{1}] out of range for rank {2}")]
    Index(usize, usize, usize),
    #[error("expected words of length {expected}, found length {found}")]
    MixedLength { expected: usize, found: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// `u_{a_1 b_1} ... u_{a_k b_k}`, indices 1-based.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct OqWord(pub Vec<(u8, u8)>);

impl OqWord {
    pub fn empty() -> Self {
        OqWord(Vec::new())
    }

    pub fn single(a: usize, b: usize) -> Self {
        OqWord(vec![(a as u8, b as u8)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, o: &OqWord) -> OqWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&o.0);
        OqWord(v)
    }

    pub fn rows(&self) -> Vec<u8> {
        self.0.iter().map(|p| p.0 - 1).collect()
    }

    pub fn cols(&self) -> Vec<u8> {
        self.0.iter().map(|p| p.1 - 1).collect()
    }

    /// Column weight minus row weight, in the simple-root basis.
    pub fn weight(&self, n: usize) -> Vec<i32> {
        // e_c has weight -(alpha_1 + ... + alpha_{c-1}) up to a constant
        let depth = |c: u8| -> Vec<i32> { (0..n).map(|i| i32::from((i as u8) < c - 1)).collect() };
        let mut w = vec![0; n];
        for (a, b) in &self.0 {
            let (da, db) = (depth(*a), depth(*b));
            for i in 0..n {
                w[i] += da[i] - db[i];
            }
        }
        w
    }

    pub fn render(&self) -> String {
        if self.0.is_empty() {
            return "1".into();
        }
        self.0.iter().map(|(a, b)| format!("u[{a},{b}]")).collect::<Vec<_>>().join("*")
    }
}

impl fmt::Debug for OqWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Display for OqWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Linear combination of free words in the `u_ij`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct OqElement {
    pub terms: BTreeMap<OqWord, RatQ>,
}

impl OqElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::word(OqWord::empty())
    }

    pub fn word(w: OqWord) -> Self {
        let mut e = Self::zero();
        e.add_term(w, &RatQ::one());
        e
    }

    pub fn u(a: usize, b: usize) -> Self {
        Self::word(OqWord::single(a, b))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, w: OqWord, c: &RatQ) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(x) => {
                *x += c;
                if x.is_zero() {
                    self.terms.remove(&w);
                }
            }
            None => {
                self.terms.insert(w, c.clone());
            }
        }
    }

    pub fn add_scaled(&mut self, o: &OqElement, c: &RatQ) {
        for (w, x) in &o.terms {
            self.add_term(w.clone(), &(c * x));
        }
    }

    pub fn add(&self, o: &OqElement) -> OqElement {
        let mut r = self.clone();
        r.add_scaled(o, &RatQ::one());
        r
    }

    pub fn sub(&self, o: &OqElement) -> OqElement {
        let mut r = self.clone();
        r.add_scaled(o, &RatQ::int(-1));
        r
    }

    pub fn scale(&self, c: &RatQ) -> OqElement {
        let mut r = OqElement::zero();
        r.add_scaled(self, c);
        r
    }

    /// Concatenation product of free words.
    pub fn mul(&self, o: &OqElement) -> OqElement {
        let mut r = OqElement::zero();
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                r.add_term(a.concat(b), &(x * y));
            }
        }
        r
    }

    /// The common word length; errors on mixed lengths.
    pub fn length(&self) -> Result<Option<usize>, OqError> {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Ok(None);
        };
        for w in it {
            if w.len() != first.len() {
                return Err(OqError::MixedLength { expected: first.len(), found: w.len() });
            }
        }
        Ok(Some(first.len()))
    }

    pub fn render(&self) -> String {
        render_terms(self.terms.iter().map(|(w, c)| (w.render(), c)))
    }
}

impl fmt::Display for OqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for OqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for OqElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.render())
    }
}

/// Exponent of `q` in `K_{i+1} e_c` (0-based `i`, `c`).
fn k_exp(i: u8, c: u8) -> i32 {
    i32::from(c == i + 1) - i32::from(c == i)
}

type TensorVec = BTreeMap<Vec<u8>, RatQ>;

fn add_into(acc: &mut TensorVec, v: Vec<u8>, c: RatQ) {
    if c.is_zero() {
        return;
    }
    let e = acc.entry(v.clone()).or_insert_with(RatQ::zero);
    *e += &c;
    if e.is_zero() {
        acc.remove(&v);
    }
}

/// The vector representation and its tensor powers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VectorRep {
    pub n: usize,
}

impl VectorRep {
    pub fn new(n: usize) -> Self {
        VectorRep { n }
    }

    /// `rho(g)` as an `(n+1) x (n+1)` matrix for a generator monomial.
    pub fn matrix(&self, m: &Mono) -> Vec<Vec<RatQ>> {
        let d = self.n + 1;
        let mut out = vec![vec![RatQ::zero(); d]; d];
        for b in 0..d {
            for (v, c) in self.act_mono(m, &[b as u8]) {
                out[v[0] as usize][b] = c;
            }
        }
        out
    }

    fn apply_e(&self, l: u8, v: &TensorVec) -> TensorVec {
        let mut r = TensorVec::new();
        for (t, c) in v {
            for p in 0..t.len() {
                if t[p] == l {
                    let s: i32 = t[p + 1..].iter().map(|x| k_exp(l, *x)).sum();
                    let mut u = t.clone();
                    u[p] = l + 1;
                    add_into(&mut r, u, c * &RatQ::q_pow(s));
                }
            }
        }
        r
    }

    fn apply_f(&self, l: u8, v: &TensorVec) -> TensorVec {
        let mut r = TensorVec::new();
        for (t, c) in v {
            for p in 0..t.len() {
                if t[p] == l + 1 {
                    let s: i32 = t[..p].iter().map(|x| k_exp(l, *x)).sum();
                    let mut u = t.clone();
                    u[p] = l;
                    add_into(&mut r, u, c * &RatQ::q_pow(-s));
                }
            }
        }
        r
    }

    fn apply_k(&self, k: &[i32], v: &TensorVec) -> TensorVec {
        let mut r = TensorVec::new();
        for (t, c) in v {
            let mut s = 0;
            for (i, ki) in k.iter().enumerate() {
                if *ki != 0 {
                    s += ki * t.iter().map(|x| k_exp(i as u8, *x)).sum::<i32>();
                }
            }
            add_into(&mut r, t.clone(), c * &RatQ::q_pow(s));
        }
        r
    }

    /// `rho_k(m) e_b` for a basis tensor `b` (0-based entries).
    pub fn act_mono(&self, m: &Mono, b: &[u8]) -> TensorVec {
        let mut v = TensorVec::new();
        v.insert(b.to_vec(), RatQ::one());
        for l in m.e.letters().iter().rev() {
            v = self.apply_e(*l, &v);
            if v.is_empty() {
                return v;
            }
        }
        v = self.apply_k(&m.k, &v);
        for l in m.f.letters().iter().rev() {
            v = self.apply_f(*l, &v);
            if v.is_empty() {
                return v;
            }
        }
        v
    }

    /// `rho_k(x) e_b`.
    pub fn act(&self, x: &UqElement, b: &[u8]) -> TensorVec {
        let mut r = TensorVec::new();
        for (m, c) in &x.terms {
            for (t, y) in self.act_mono(m, b) {
                add_into(&mut r, t, c * &y);
            }
        }
        r
    }
}

/// `<x, w>`: the `(rows, cols)` entry of `rho_k(x)`.
pub fn pair_word(x: &UqElement, w: &OqWord) -> RatQ {
    let rep = VectorRep::new(x.n);
    rep.act(x, &w.cols()).get(&w.rows()).cloned().unwrap_or_else(RatQ::zero)
}

/// Bilinear extension of [`pair_word`].
pub fn pair(x: &UqElement, e: &OqElement) -> RatQ {
    let rep = VectorRep::new(x.n);
    let mut by_cols: BTreeMap<Vec<u8>, Vec<(Vec<u8>, &RatQ)>> = BTreeMap::new();
    for (w, c) in &e.terms {
        by_cols.entry(w.cols()).or_default().push((w.rows(), c));
    }
    let mut s = RatQ::zero();
    for (cols, rows) in by_cols {
        let v = rep.act(x, &cols);
        for (r, c) in rows {
            if let Some(y) = v.get(&r) {
                s += &(c * y);
            }
        }
    }
    s
}

/// `x |> e = e_(1) <x, e_(2)>`.
pub fn left_act(x: &UqElement, e: &OqElement) -> Result<OqElement, OqError> {
    e.length()?;
    let rep = VectorRep::new(x.n);
    let mut out = OqElement::zero();
    for (w, c) in &e.terms {
        let rows = w.rows();
        for (cols, y) in rep.act(x, &w.cols()) {
            let word = OqWord(rows.iter().zip(&cols).map(|(a, b)| (a + 1, b + 1)).collect());
            out.add_term(word, &(c * &y));
        }
    }
    Ok(out)
}

fn tensor_index(t: &[u8], d: usize) -> usize {
    t.iter().fold(0, |acc, x| acc * d + *x as usize)
}

fn tensor_from_index(mut i: usize, d: usize, k: usize) -> Vec<u8> {
    let mut t = vec![0u8; k];
    for p in (0..k).rev() {
        t[p] = (i % d) as u8;
        i /= d;
    }
    t
}

/// Basis of `rho_k(U_q)` as flattened matrices `row * D + col`.
pub struct ImageAlgebra {
    pub n: usize,
    pub k: usize,
    pub basis: Vec<SparseVec<usize>>,
}

static IMAGE_CACHE: LazyLock<Mutex<HashMap<(usize, usize), Arc<ImageAlgebra>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// `rho_k(U_q)`, spanned by products of generator images until stable.
pub fn image_algebra(n: usize, k: usize) -> Arc<ImageAlgebra> {
    if let Some(a) = IMAGE_CACHE.lock().get(&(n, k)) {
        return a.clone();
    }
    let rep = VectorRep::new(n);
    let u = Uq::get(n);
    let d = n + 1;
    let dim = d.pow(k as u32);
    let mut gens: Vec<Vec<TensorVec>> = Vec::new();
    for i in 1..=n {
        for g in [u.e(i).unwrap(), u.f(i).unwrap(), u.k(i, 1).unwrap(), u.k(i, -1).unwrap()] {
            let cols = (0..dim).map(|b| rep.act(&g, &tensor_from_index(b, d, k))).collect();
            gens.push(cols);
        }
    }
    let flat = |cols: &[TensorVec]| -> SparseVec<usize> {
        let mut v = SparseVec::new();
        for (b, col) in cols.iter().enumerate() {
            for (t, c) in col {
                v.insert(tensor_index(t, d) * dim + b, c.clone());
            }
        }
        v
    };
    let identity: Vec<TensorVec> = (0..dim)
        .map(|b| {
            let mut t = TensorVec::new();
            t.insert(tensor_from_index(b, d, k), RatQ::one());
            t
        })
        .collect();
    let mut ech: Echelon<usize> = Echelon::new();
    ech.insert(&flat(&identity));
    let mut frontier = vec![identity];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for m in &frontier {
            for g in &gens {
                // g * m, column by column
                let prod: Vec<TensorVec> = m
                    .iter()
                    .map(|col| {
                        let mut r = TensorVec::new();
                        for (t, c) in col {
                            for (s, y) in &g[tensor_index(t, d)] {
                                add_into(&mut r, s.clone(), c * y);
                            }
                        }
                        r
                    })
                    .collect();
                if ech.insert(&flat(&prod)) {
                    next.push(prod);
                }
            }
        }
        frontier = next;
    }
    let a = Arc::new(ImageAlgebra { n, k, basis: ech.rref() });
    IMAGE_CACHE.lock().insert((n, k), a.clone());
    a
}

impl ImageAlgebra {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Values of `e` on the basis; zero iff `e` vanishes in `O_q`.
    pub fn evaluate(&self, e: &OqElement) -> Result<Vec<RatQ>, OqError> {
        let d = self.n + 1;
        let dim = d.pow(self.k as u32);
        let mut coeffs: BTreeMap<usize, RatQ> = BTreeMap::new();
        for (w, c) in &e.terms {
            if w.len() != self.k {
                return Err(OqError::MixedLength { expected: self.k, found: w.len() });
            }
            let key = tensor_index(&w.rows(), d) * dim + tensor_index(&w.cols(), d);
            let x = coeffs.entry(key).or_insert_with(RatQ::zero);
            *x += c;
        }
        Ok(self
            .basis
            .iter()
            .map(|m| {
                let mut s = RatQ::zero();
                for (key, c) in &coeffs {
                    if let Some(y) = m.get(key) {
                        s += &(c * y);
                    }
                }
                s
            })
            .collect())
    }
}

/// Equality in `O_q` of two elements homogeneous of length `k`.
pub fn oq_equal(n: usize, a: &OqElement, b: &OqElement, k: usize) -> Result<bool, OqError> {
    let diff = a.sub(b);
    if let Some(l) = diff.length()? {
        if l != k {
            return Err(OqError::MixedLength { expected: k, found: l });
        }
    }
    for e in [a, b] {
        if let Some(l) = e.length()? {
            if l != k {
                return Err(OqError::MixedLength { expected: k, found: l });
            }
        }
    }
    let alg = image_algebra(n, k);
    Ok(alg.evaluate(&diff)?.iter().all(RatQ::is_zero))
}

/// All words of length `k` in the `u_ab`.
pub fn all_words(n: usize, k: usize) -> Vec<OqWord> {
    let d = n + 1;
    let mut out = vec![OqWord::empty()];
    for _ in 0..k {
        let mut next = Vec::new();
        for w in &out {
            for a in 1..=d {
                for b in 1..=d {
                    let mut v = w.clone();
                    v.0.push((a as u8, b as u8));
                    next.push(v);
                }
            }
        }
        out = next;
    }
    out
}

/// Joint kernel of `x |> -` for `x` in `ops`, on the span of `words`,
/// modulo elements vanishing in `O_q`. Returns a basis of representatives.
pub fn joint_kernel(n: usize, words: &[OqWord], ops: &[UqElement]) -> Result<Vec<OqElement>, OqError> {
    let Some(first) = words.first() else {
        return Ok(Vec::new());
    };
    let k = first.len();
    if let Some(w) = words.iter().find(|w| w.len() != k) {
        return Err(OqError::MixedLength { expected: k, found: w.len() });
    }
    let alg = image_algebra(n, k);
    // images of each word: its own values and the values of every x |> word
    let mut null_cols: Vec<SparseVec<usize>> = Vec::new();
    let mut op_cols: Vec<SparseVec<usize>> = Vec::new();
    for w in words {
        let e = OqElement::word(w.clone());
        let vals = alg.evaluate(&e)?;
        null_cols.push(vals.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect());
        let mut col = SparseVec::new();
        for (j, x) in ops.iter().enumerate() {
            let img = left_act(x, &e)?;
            for (r, c) in alg.evaluate(&img)?.into_iter().enumerate() {
                if !c.is_zero() {
                    col.insert(j * alg.dim() + r, c);
                }
            }
        }
        op_cols.push(col);
    }
    let null = linalg::kernel(&null_cols);
    let full = linalg::kernel(&op_cols);
    let mut ech: Echelon<usize> = Echelon::new();
    for v in &null {
        ech.insert(v);
    }
    let mut reps = Echelon::new();
    for v in &full {
        let r = ech.reduce(v);
        if !r.is_empty() {
            ech.insert(&r);
            reps.insert(&r);
        }
    }
    Ok(reps
        .rref()
        .into_iter()
        .map(|v| {
            let mut e = OqElement::zero();
            for (i, c) in v {
                e.add_term(words[i].clone(), &c);
            }
            e
        })
        .collect())
}

/// Expression target for the grammar: `u[a,b]` atoms, free products.
pub struct OqTarget {
    pub n: usize,
}

impl ExprTarget for OqTarget {
    type Elem = OqElement;

    fn scalar(&self, c: RatQ) -> Result<OqElement, ParseError> {
        Ok(OqElement::one().scale(&c))
    }

    fn atom(&self, a: &Expr, power: i32) -> Result<OqElement, ParseError> {
        match a {
            Expr::U(i, j) => {
                let d = self.n + 1;
                if *i == 0 || *j == 0 || *i > d || *j > d {
                    return Err(ParseError::Invalid(format!("u[{i},{j}] out of range for rank {}", self.n)));
                }
                if power < 0 {
                    return Err(ParseError::Invalid("negative power of u".into()));
                }
                let mut acc = OqElement::one();
                for _ in 0..power {
                    acc = acc.mul(&OqElement::u(*i, *j));
                }
                Ok(acc)
            }
            _ => Err(ParseError::Invalid("only u[a,b] atoms are allowed here".into())),
        }
    }

    fn add(&self, a: &OqElement, b: &OqElement) -> OqElement {
        a.add(b)
    }

    fn mul(&self, a: &OqElement, b: &OqElement) -> OqElement {
        a.mul(b)
    }

    fn scale(&self, a: &OqElement, c: &RatQ) -> OqElement {
        a.scale(c)
    }
}

pub fn parse_oq(n: usize, s: &str, vars: &Vars) -> Result<OqElement, OqError> {
    let e = parse_expr(s)?;
    Ok(eval_in(&OqTarget { n }, &e, vars)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ux(n: usize, s: &str) -> UqElement {
        Uq::get(n).parse(s, &Vars::new()).unwrap()
    }

    fn o(n: usize, s: &str) -> OqElement {
        parse_oq(n, s, &Vars::new()).unwrap()
    }

    #[test]
    fn generator_pairings() {
        let n = 3;
        for i in 1..=n {
            for a in 1..=n + 1 {
                for b in 1..=n + 1 {
                    let w = OqWord::single(a, b);
                    let e = pair_word(&ux(n, &format!("E{i}")), &w);
                    let f = pair_word(&ux(n, &format!("F{i}")), &w);
                    assert_eq!(e, RatQ::int(i64::from(a == i + 1 && b == i)));
                    assert_eq!(f, RatQ::int(i64::from(a == i && b == i + 1)));
                    let k = pair_word(&ux(n, &format!("K{i}")), &w);
                    let expect = if a == b {
                        RatQ::q_pow(i32::from(a == i + 1) - i32::from(a == i))
                    } else {
                        RatQ::zero()
                    };
                    assert_eq!(k, expect);
                }
            }
        }
    }

    #[test]
    fn unit_and_counit() {
        assert_eq!(pair(&ux(2, "K1"), &o(2, "u[1,1]u[2,2]")), RatQ::one());
        assert_eq!(pair(&ux(2, "3 E1 + 2"), &OqElement::one()), RatQ::int(2));
    }

    #[test]
    fn left_action() {
        let n = 2;
        let e = o(n, "u[1,1]");
        assert_eq!(left_act(&ux(n, "1"), &e).unwrap(), e);
        assert_eq!(left_act(&ux(n, "E1"), &e).unwrap(), o(n, "u[1,2]"));
        assert!(left_act(&ux(n, "E1"), &o(n, "u[1,3]")).unwrap().is_zero());
        assert_eq!(left_act(&ux(n, "K2"), &o(n, "u[2,3]")).unwrap(), o(n, "q u[2,3]"));
        assert!(left_act(&ux(n, "E1"), &o(n, "u[1,1] + u[1,1]u[1,1]")).is_err());
    }

    #[test]
    fn frt_relations_hold() {
        assert!(oq_equal(1, &o(1, "u[1,1]u[1,2]"), &o(1, "q u[1,2]u[1,1]"), 2).unwrap());
        assert!(!oq_equal(1, &o(1, "u[1,1]u[1,2]"), &o(1, "u[1,2]u[1,1]"), 2).unwrap());
        assert!(oq_equal(1, &o(1, "u[1,1]u[2,2]"), &o(1, "u[2,2]u[1,1] + nu u[1,2]u[2,1]"), 2).unwrap());
    }

    #[test]
    fn quantum_determinant_is_counit() {
        let det = o(1, "u[1,1]u[2,2] - q u[1,2]u[2,1]");
        let u = Uq::get(1);
        let gens = ["E1", "F1", "K1", "K1^-1"];
        let mut monos = vec![u.one()];
        for _ in 0..3 {
            let mut next = monos.clone();
            for m in &monos {
                for g in gens {
                    next.push(u.mul(m, &ux(1, g)));
                }
            }
            monos = next;
        }
        for x in &monos {
            assert_eq!(pair(x, &det), x.counit());
        }
    }

    #[test]
    fn kernels() {
        for n in 1..=2 {
            let u = Uq::get(n);
            let ops: Vec<UqElement> = (1..=n).map(|i| u.e(i).unwrap()).collect();
            let ker = joint_kernel(n, &all_words(n, 1), &ops).unwrap();
            assert_eq!(ker.len(), n + 1);
            for (a, v) in ker.iter().enumerate() {
                assert_eq!(v, &OqElement::u(n + 1 - a, n + 1));
            }
        }
    }
}
