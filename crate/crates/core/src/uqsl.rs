//! `U_q(sl_{n+1})` in triangular normal form.
//!
//! A monomial is `F_w K^k E_v` with `w`, `v` normal words for the Serre
//! rewriting system (letters `0..n` stand for indices `1..=n`).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use std::sync::LazyLock;
use parking_lot::{Mutex, RwLock};
use serde::Serialize;
use smallvec::SmallVec;
use thiserror::Error;

use crate::freealg::{render_terms, Alphabet, FreeElement, TruncatedGB, Word};
use crate::parse::{eval_in, parse_expr, Expr, ExprTarget, GenKind, ParseError, Vars};
use crate::scalars::RatQ;
use crate::weyl::{self, Root, WeylError, WeylWord};

pub type KVec = SmallVec<[i32; 6]>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UqError {
    #[error("generator index {index} out of range for rank {n}")]
    Index { index: usize, n: usize },
    #[error("element is not weight-homogeneous: {0}")]
    Inhomogeneous(String),
    #[error("root vector for letter {k} left the positive part: {elem}")]
    NotPositive { k: usize, elem: String },
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

fn cartan(i: u8, j: u8) -> i32 {
    match i.abs_diff(j) {
        0 => 2,
        1 => -1,
        _ => 0,
    }
}

/// `sum_i k_i (alpha_i, wt w)` for a word of simple letters.
fn k_pair(k: &[i32], w: &[u8]) -> i32 {
    let mut s = 0;
    for (i, ki) in k.iter().enumerate() {
        if *ki != 0 {
            for l in w {
                s += ki * cartan(i as u8, *l);
            }
        }
    }
    s
}

/// `F_f K^k E_e`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mono {
    pub f: Word,
    pub k: KVec,
    pub e: Word,
}

impl Mono {
    pub fn unit(n: usize) -> Self {
        Mono { f: Word::empty(), k: SmallVec::from_elem(0, n), e: Word::empty() }
    }

    pub fn is_unit(&self) -> bool {
        self.f.is_empty() && self.e.is_empty() && self.k.iter().all(|x| *x == 0)
    }

    pub fn is_positive(&self) -> bool {
        self.f.is_empty() && self.k.iter().all(|x| *x == 0)
    }

    /// Weight in the simple-root basis.
    pub fn weight(&self) -> Vec<i32> {
        let mut w = vec![0; self.k.len()];
        for l in self.e.letters() {
            w[*l as usize] += 1;
        }
        for l in self.f.letters() {
            w[*l as usize] -= 1;
        }
        w
    }

    pub fn render(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        for l in self.f.letters() {
            parts.push(format!("F{}", l + 1));
        }
        for (i, k) in self.k.iter().enumerate() {
            match k {
                0 => {}
                1 => parts.push(format!("K{}", i + 1)),
                _ => parts.push(format!("K{}^{}", i + 1, k)),
            }
        }
        for l in self.e.letters() {
            parts.push(format!("E{}", l + 1));
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Element of `U_q(sl_{n+1})` in normal form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct UqElement {
    pub n: usize,
    pub terms: BTreeMap<Mono, RatQ>,
}

impl UqElement {
    pub fn zero(n: usize) -> Self {
        UqElement { n, terms: BTreeMap::new() }
    }

    pub fn scalar(n: usize, c: RatQ) -> Self {
        let mut e = Self::zero(n);
        e.add_term(Mono::unit(n), &c);
        e
    }

    pub fn one(n: usize) -> Self {
        Self::scalar(n, RatQ::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Mono, c: &RatQ) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(x) => {
                *x += c;
                if x.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn add_scaled(&mut self, o: &UqElement, c: &RatQ) {
        if c.is_zero() {
            return;
        }
        for (m, x) in &o.terms {
            self.add_term(m.clone(), &(c * x));
        }
    }

    pub fn add(&self, o: &UqElement) -> UqElement {
        let mut r = self.clone();
        r.add_scaled(o, &RatQ::one());
        r
    }

    pub fn sub(&self, o: &UqElement) -> UqElement {
        let mut r = self.clone();
        r.add_scaled(o, &RatQ::int(-1));
        r
    }

    pub fn scale(&self, c: &RatQ) -> UqElement {
        let mut r = UqElement::zero(self.n);
        r.add_scaled(self, c);
        r
    }

    /// No `F` and no `K` anywhere.
    pub fn is_positive_part(&self) -> bool {
        self.terms.keys().all(Mono::is_positive)
    }

    /// Coefficient map on `E`-words; meaningful for positive-part elements.
    pub fn e_coords(&self) -> BTreeMap<Word, RatQ> {
        self.terms.iter().filter(|(m, _)| m.is_positive()).map(|(m, c)| (m.e.clone(), c.clone())).collect()
    }

    pub fn from_e_coords(n: usize, coords: &BTreeMap<Word, RatQ>) -> Self {
        let mut r = UqElement::zero(n);
        for (w, c) in coords {
            r.add_term(Mono { f: Word::empty(), k: SmallVec::from_elem(0, n), e: w.clone() }, c);
        }
        r
    }

    /// Greatest monomial with its coefficient.
    pub fn leading(&self) -> Option<(&Mono, &RatQ)> {
        self.terms.iter().next_back()
    }

    /// Scales so the leading coefficient is 1.
    pub fn monic(&self) -> UqElement {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.inv().expect("nonzero")),
        }
    }

    pub fn counit(&self) -> RatQ {
        let mut s = RatQ::zero();
        for (m, c) in &self.terms {
            if m.f.is_empty() && m.e.is_empty() {
                s += c;
            }
        }
        s
    }

    /// The common weight; errors on inhomogeneous input.
    pub fn weight(&self) -> Result<Vec<i32>, UqError> {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Ok(vec![0; self.n]);
        };
        let w = first.weight();
        let bad: Vec<String> = self
            .terms
            .keys()
            .filter(|m| m.weight() != w)
            .map(Mono::render)
            .collect();
        if !bad.is_empty() {
            return Err(UqError::Inhomogeneous(format!("{} vs {}", first.render(), bad.join(", "))));
        }
        Ok(w)
    }

    /// Sets every `K_i^{+-1}` to 1.
    pub fn drop_k(&self) -> UqElement {
        let mut r = UqElement::zero(self.n);
        for (m, c) in &self.terms {
            r.add_term(Mono { f: m.f.clone(), k: SmallVec::from_elem(0, self.n), e: m.e.clone() }, c);
        }
        r
    }

    pub fn render(&self) -> String {
        render_terms(self.terms.iter().rev().map(|(m, c)| (m.render(), c)))
    }
}

impl fmt::Display for UqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for UqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for UqElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.render())
    }
}

/// Element of `U_q ⊗ U_q`.
#[derive(Clone, PartialEq, Eq)]
pub struct TensorSquare {
    pub n: usize,
    pub terms: BTreeMap<(Mono, Mono), RatQ>,
}

impl TensorSquare {
    pub fn zero(n: usize) -> Self {
        TensorSquare { n, terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, a: Mono, b: Mono, c: &RatQ) {
        if c.is_zero() {
            return;
        }
        let key = (a, b);
        match self.terms.get_mut(&key) {
            Some(x) => {
                *x += c;
                if x.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c.clone());
            }
        }
    }

    pub fn add_scaled(&mut self, o: &TensorSquare, c: &RatQ) {
        for ((a, b), x) in &o.terms {
            self.add_term(a.clone(), b.clone(), &(c * x));
        }
    }

    /// `sum_k a_k ⊗ b_k` built from element pairs.
    pub fn from_pairs(n: usize, pairs: &[(RatQ, UqElement, UqElement)]) -> Self {
        let mut t = TensorSquare::zero(n);
        for (c, a, b) in pairs {
            for (ma, xa) in &a.terms {
                for (mb, xb) in &b.terms {
                    t.add_term(ma.clone(), mb.clone(), &(c * &(xa * xb)));
                }
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn sub(&self, o: &TensorSquare) -> TensorSquare {
        let mut r = self.clone();
        r.add_scaled(o, &RatQ::int(-1));
        r
    }

    /// `(id ⊗ eps)`.
    pub fn counit_right(&self) -> UqElement {
        let mut r = UqElement::zero(self.n);
        for ((a, b), c) in &self.terms {
            if b.f.is_empty() && b.e.is_empty() {
                r.add_term(a.clone(), c);
            }
        }
        r
    }

    /// `(eps ⊗ id)`.
    pub fn counit_left(&self) -> UqElement {
        let mut r = UqElement::zero(self.n);
        for ((a, b), c) in &self.terms {
            if a.f.is_empty() && a.e.is_empty() {
                r.add_term(b.clone(), c);
            }
        }
        r
    }

    /// Sets `K -> 1` in the first (`left = true`) or second leg.
    pub fn drop_k(&self, left: bool) -> TensorSquare {
        let mut r = TensorSquare::zero(self.n);
        let strip = |m: &Mono| Mono { f: m.f.clone(), k: SmallVec::from_elem(0, self.n), e: m.e.clone() };
        for ((a, b), c) in &self.terms {
            if left {
                r.add_term(strip(a), b.clone(), c);
            } else {
                r.add_term(a.clone(), strip(b), c);
            }
        }
        r
    }

    /// Groups by the second leg: `b -> sum_a c a`.
    pub fn by_right(&self) -> BTreeMap<Mono, UqElement> {
        let mut out: BTreeMap<Mono, UqElement> = BTreeMap::new();
        for ((a, b), c) in &self.terms {
            out.entry(b.clone()).or_insert_with(|| UqElement::zero(self.n)).add_term(a.clone(), c);
        }
        out
    }

    /// Groups by the first leg: `a -> sum_b c b`.
    pub fn by_left(&self) -> BTreeMap<Mono, UqElement> {
        let mut out: BTreeMap<Mono, UqElement> = BTreeMap::new();
        for ((a, b), c) in &self.terms {
            out.entry(a.clone()).or_insert_with(|| UqElement::zero(self.n)).add_term(b.clone(), c);
        }
        out
    }

    pub fn render(&self) -> String {
        render_terms(
            self.terms
                .iter()
                .rev()
                .map(|((a, b), c)| (format!("{} ⊗ {}", a.render(), b.render()), c)),
        )
    }
}

impl fmt::Display for TensorSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for TensorSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Which adjoint action `ad` denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjointSide {
    /// `S(Y_(1)) X Y_(2)`
    #[default]
    Right,
    /// `Y_(1) X S(Y_(2))`
    Left,
}

/// Free-word expansion `sum c F_f K^k E_e`; words not yet reduced.
type Expansion = Vec<(Word, KVec, Word, RatQ)>;
type CoproductTerms = Vec<(Mono, Mono, RatQ)>;

/// Per-rank context: the Serre rewriting system and product caches.
pub struct Uq {
    n: usize,
    alphabet: Alphabet,
    gb: RwLock<TruncatedGB>,
    ef_cache: Mutex<HashMap<(Word, Word), Arc<Expansion>>>,
    mono_cache: Mutex<HashMap<(Mono, Mono), Arc<UqElement>>>,
    delta_cache: Mutex<HashMap<Mono, Arc<CoproductTerms>>>,
    braid_cache: Mutex<HashMap<(u8, bool, u8), Arc<UqElement>>>,
}

static REGISTRY: LazyLock<Mutex<HashMap<usize, Arc<Uq>>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

/// Quantum Serre relations on letters `0..n`.
pub fn serre_relations(n: usize) -> Vec<FreeElement> {
    let mut rels = Vec::new();
    let two = RatQ::qint(2);
    for i in 0..n as u8 {
        for j in 0..n as u8 {
            if i == j {
                continue;
            }
            if i.abs_diff(j) == 1 {
                let mut r = FreeElement::letters(&[j, j, i]);
                r.add_term(Word::from_slice(&[j, i, j]), &-two.clone());
                r.add_term(Word::from_slice(&[i, j, j]), &RatQ::one());
                rels.push(r);
            } else if i > j {
                let mut r = FreeElement::letters(&[i, j]);
                r.add_term(Word::from_slice(&[j, i]), &RatQ::int(-1));
                rels.push(r);
            }
        }
    }
    rels
}

pub fn simple_alphabet(n: usize, prefix: &str) -> Alphabet {
    let labels = (1..=n).map(|i| format!("{prefix}{i}")).collect();
    let weights = (0..n)
        .map(|i| {
            let mut w = vec![0; n];
            w[i] = 1;
            w
        })
        .collect();
    Alphabet::new(labels, weights)
}

impl Uq {
    /// Shared context for rank `n`.
    pub fn get(n: usize) -> Arc<Uq> {
        assert!(n >= 1);
        REGISTRY
            .lock()
            .entry(n)
            .or_insert_with(|| {
                let alphabet = simple_alphabet(n, "E");
                let gb = TruncatedGB::complete(&alphabet, &serre_relations(n), 3)
                    .expect("Serre relations are homogeneous");
                Arc::new(Uq {
                    n,
                    alphabet,
                    gb: RwLock::new(gb),
                    ef_cache: Mutex::new(HashMap::new()),
                    mono_cache: Mutex::new(HashMap::new()),
                    delta_cache: Mutex::new(HashMap::new()),
                    braid_cache: Mutex::new(HashMap::new()),
                })
            })
            .clone()
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    /// Degree to which the Serre system is currently certified.
    pub fn serre_degree(&self) -> usize {
        self.gb.read().valid_degree()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn zk(&self) -> KVec {
        SmallVec::from_elem(0, self.n)
    }

    fn check(&self, i: usize) -> Result<u8, UqError> {
        if i == 0 || i > self.n {
            return Err(UqError::Index { index: i, n: self.n });
        }
        Ok((i - 1) as u8)
    }

    pub fn zero(&self) -> UqElement {
        UqElement::zero(self.n)
    }

    pub fn one(&self) -> UqElement {
        UqElement::one(self.n)
    }

    pub fn scalar(&self, c: RatQ) -> UqElement {
        UqElement::scalar(self.n, c)
    }

    pub fn mono(&self, m: Mono) -> UqElement {
        let mut r = self.zero();
        r.add_term(m, &RatQ::one());
        r
    }

    pub fn e(&self, i: usize) -> Result<UqElement, UqError> {
        let l = self.check(i)?;
        Ok(self.mono(Mono { f: Word::empty(), k: self.zk(), e: Word::from_slice(&[l]) }))
    }

    pub fn f(&self, i: usize) -> Result<UqElement, UqError> {
        let l = self.check(i)?;
        Ok(self.mono(Mono { f: Word::from_slice(&[l]), k: self.zk(), e: Word::empty() }))
    }

    /// `K_i^p`.
    pub fn k(&self, i: usize, p: i32) -> Result<UqElement, UqError> {
        let l = self.check(i)?;
        let mut k = self.zk();
        k[l as usize] = p;
        Ok(self.mono(Mono { f: Word::empty(), k, e: Word::empty() }))
    }

    /// `K^k` for an exponent vector.
    pub fn k_vec(&self, k: &[i32]) -> UqElement {
        self.mono(Mono { f: Word::empty(), k: SmallVec::from_slice(k), e: Word::empty() })
    }

    /// `E_{w_1} ... E_{w_r}` for letters `w` in `1..=n`, reduced.
    pub fn e_word(&self, w: &[usize]) -> Result<UqElement, UqError> {
        let mut letters = Vec::new();
        for i in w {
            letters.push(self.check(*i)?);
        }
        Ok(self.reduce_free(&Word::empty(), &self.zk(), &Word::from_slice(&letters), &RatQ::one()))
    }

    /// Normal form of a word; extends the Serre completion on demand.
    pub fn nf_word(&self, w: &Word) -> FreeElement {
        if w.len() < 2 {
            return FreeElement::word(w.clone());
        }
        {
            let gb = self.gb.read();
            if gb.valid_degree() >= w.len() {
                return gb.nf_word_external(w).expect("within certified degree");
            }
        }
        let mut gb = self.gb.write();
        if gb.valid_degree() < w.len() {
            let target = w.len().max(2 * self.n);
            gb.extend_to(target);
        }
        gb.nf_word_external(w).expect("within certified degree")
    }

    /// Makes sure words of length `d` reduce without further completion.
    pub fn ensure_degree(&self, d: usize) {
        if self.gb.read().valid_degree() < d {
            self.gb.write().extend_to(d);
        }
    }

    /// Normal words of `U_q(n^+)` in degree `d`.
    pub fn normal_words(&self, d: usize) -> Vec<Word> {
        self.ensure_degree(d);
        self.gb.read().normal_words(d)
    }

    fn reduce_free(&self, f: &Word, k: &KVec, e: &Word, c: &RatQ) -> UqElement {
        let mut r = self.zero();
        let nf = self.nf_word(f);
        let ne = self.nf_word(e);
        for (fw, fc) in &nf.terms {
            let fc = c * fc;
            for (ew, ec) in &ne.terms {
                r.add_term(Mono { f: fw.clone(), k: k.clone(), e: ew.clone() }, &(&fc * ec));
            }
        }
        r
    }

    /// `E_e F_f` as a free-word expansion.
    fn ef(&self, e: &Word, f: &Word) -> Arc<Expansion> {
        if e.is_empty() || f.is_empty() {
            return Arc::new(vec![(f.clone(), self.zk(), e.clone(), RatQ::one())]);
        }
        let key = (e.clone(), f.clone());
        if let Some(r) = self.ef_cache.lock().get(&key) {
            return r.clone();
        }
        let i = *e.letters().last().unwrap();
        let e0 = Word::from_slice(&e.letters()[..e.len() - 1]);
        let mut out: HashMap<(Word, KVec, Word), RatQ> = HashMap::new();
        let mut push = |fw: Word, k: KVec, ew: Word, c: RatQ| {
            if c.is_zero() {
                return;
            }
            let key = (fw, k, ew);
            let v = out.entry(key.clone()).or_insert_with(RatQ::zero);
            *v += &c;
            if v.is_zero() {
                out.remove(&key);
            }
        };
        // E_i F_f = F_f E_i + sum_t F_{f without t} [E_i, F_i] terms
        for (fw, k, ew, c) in self.ef(&e0, f).iter() {
            let mut ew = ew.clone();
            ew.0.push(i);
            push(fw.clone(), k.clone(), ew, c.clone());
        }
        let nu_inv = RatQ::nu().inv().unwrap();
        for t in 0..f.len() {
            if f.0[t] != i {
                continue;
            }
            let rest = &f.letters()[t + 1..];
            let a: i32 = rest.iter().map(|l| cartan(i, *l)).sum();
            let mut fw = f.clone();
            fw.0.remove(t);
            for sign in [1i32, -1] {
                // K_i^s F_rest = q^{-s a} F_rest K_i^s
                let coef = &(&RatQ::q_pow(-sign * a) * &nu_inv) * &RatQ::int(sign as i64);
                for (fw2, k2, ew2, c2) in self.ef(&e0, &fw).iter() {
                    // E' K_i^s = q^{-s (alpha_i, wt E')} K_i^s E'
                    let b: i32 = ew2.letters().iter().map(|l| cartan(i, *l)).sum();
                    let mut k = k2.clone();
                    k[i as usize] += sign;
                    let c = &(c2 * &coef) * &RatQ::q_pow(-sign * b);
                    push(fw2.clone(), k, ew2.clone(), c);
                }
            }
        }
        let mut v: Expansion = out.into_iter().map(|((f, k, e), c)| (f, k, e, c)).collect();
        v.sort_by(|a, b| (&a.0, &a.1, &a.2).cmp(&(&b.0, &b.1, &b.2)));
        let v = Arc::new(v);
        self.ef_cache.lock().insert(key, v.clone());
        v
    }

    fn mul_mono(&self, a: &Mono, b: &Mono) -> Arc<UqElement> {
        let key = (a.clone(), b.clone());
        if let Some(r) = self.mono_cache.lock().get(&key) {
            return r.clone();
        }
        let mut r = self.zero();
        for (f2, k2, e2, c) in self.ef(&a.e, &b.f).iter() {
            // F_a K_a F' K' E' K_b E_b
            let p = -k_pair(&a.k, f2.letters()) - k_pair(&b.k, e2.letters());
            let k: KVec = (0..self.n).map(|i| a.k[i] + k2[i] + b.k[i]).collect();
            let f = a.f.concat(f2);
            let e = e2.concat(&b.e);
            let part = self.reduce_free(&f, &k, &e, &(c * &RatQ::q_pow(p)));
            r.add_scaled(&part, &RatQ::one());
        }
        let r = Arc::new(r);
        self.mono_cache.lock().insert(key, r.clone());
        r
    }

    pub fn mul(&self, x: &UqElement, y: &UqElement) -> UqElement {
        let mut r = self.zero();
        for (a, ca) in &x.terms {
            for (b, cb) in &y.terms {
                let p = self.mul_mono(a, b);
                r.add_scaled(&p, &(ca * cb));
            }
        }
        r
    }

    pub fn product(&self, xs: &[UqElement]) -> UqElement {
        let mut acc = self.one();
        for x in xs {
            acc = self.mul(&acc, x);
        }
        acc
    }

    /// `[x, y]_c = xy - c yx`.
    pub fn qcomm(&self, x: &UqElement, y: &UqElement, c: &RatQ) -> UqElement {
        self.mul(x, y).sub(&self.mul(y, x).scale(c))
    }

    /// `E_{ji} = [E_{j-1}, E_{j-1,i}]_{q^{-1}}`, with `E_{i+1,i} = E_i`.
    pub fn build_eji(&self, i: usize, j: usize) -> Result<UqElement, UqError> {
        if i == 0 || j <= i || j > self.n + 1 {
            return Err(UqError::Index { index: if i == 0 { i } else { j }, n: self.n });
        }
        let mut x = self.e(i)?;
        for k in i + 1..j {
            x = self.qcomm(&self.e(k)?, &x, &RatQ::q_pow(-1));
        }
        Ok(x)
    }

    /// `E_{ji}` for `alpha_ij`.
    pub fn build_root(&self, r: Root) -> Result<UqElement, UqError> {
        self.build_eji(r.i, r.j)
    }

    /// Coproduct of a single monomial.
    fn delta_mono(&self, m: &Mono) -> Arc<CoproductTerms> {
        if let Some(r) = self.delta_cache.lock().get(m) {
            return r.clone();
        }
        let n = self.n;
        let mut acc = TensorSquare::zero(n);
        let fl = m.f.letters();
        let el = m.e.letters();
        // F-part: prod (F ⊗ 1 + K^{-1} ⊗ F); mask bit set = F on the left
        let mut fparts: Vec<(Word, KVec, Word, RatQ)> = Vec::new();
        for mask in 0u32..(1 << fl.len()) {
            let mut left = Word::empty();
            let mut right = Word::empty();
            let mut kl = self.zk();
            let mut p = 0;
            for (t, l) in fl.iter().enumerate() {
                if mask >> t & 1 == 1 {
                    // K_b^{-1} F_a = q^{a_ba} F_a K_b^{-1}
                    p += k_pair(&kl, &[*l]);
                    left.0.push(*l);
                } else {
                    kl[*l as usize] -= 1;
                    right.0.push(*l);
                }
            }
            fparts.push((left, kl, right, RatQ::q_pow(-p)));
        }
        // E-part: prod (E ⊗ K + 1 ⊗ E); mask bit set = E on the left
        let mut eparts: Vec<(Word, KVec, Word, RatQ)> = Vec::new();
        for mask in 0u32..(1 << el.len()) {
            let mut left = Word::empty();
            let mut right = Word::empty();
            let mut kr = self.zk();
            let mut p = 0;
            for (t, l) in el.iter().enumerate() {
                if mask >> t & 1 == 1 {
                    // K_l moves left past the E's already on the right
                    let mut kk = self.zk();
                    kk[*l as usize] = 1;
                    p += k_pair(&kk, right.letters());
                    kr[*l as usize] += 1;
                    left.0.push(*l);
                } else {
                    right.0.push(*l);
                }
            }
            eparts.push((left, kr, right, RatQ::q_pow(-p)));
        }
        for (fl_w, kl, fr_w, cf) in &fparts {
            for (el_w, kr, er_w, ce) in &eparts {
                // left: F_fl K^{kl} K^m E_el; right: F_fr K^m K^{kr} E_er
                let kleft: KVec = (0..n).map(|i| kl[i] + m.k[i]).collect();
                let kright: KVec = (0..n).map(|i| kr[i] + m.k[i]).collect();
                let c = cf * ce;
                let a = self.reduce_free(fl_w, &kleft, el_w, &RatQ::one());
                let b = self.reduce_free(fr_w, &kright, er_w, &RatQ::one());
                for (ma, xa) in &a.terms {
                    for (mb, xb) in &b.terms {
                        acc.add_term(ma.clone(), mb.clone(), &(&c * &(xa * xb)));
                    }
                }
            }
        }
        let v: CoproductTerms = acc.terms.into_iter().map(|((a, b), c)| (a, b, c)).collect();
        let v = Arc::new(v);
        self.delta_cache.lock().insert(m.clone(), v.clone());
        v
    }

    pub fn coproduct(&self, x: &UqElement) -> TensorSquare {
        let mut t = TensorSquare::zero(self.n);
        for (m, c) in &x.terms {
            for (a, b, d) in self.delta_mono(m).iter() {
                t.add_term(a.clone(), b.clone(), &(c * d));
            }
        }
        t
    }

    /// Product in `U_q ⊗ U_q`.
    pub fn tensor_mul(&self, x: &TensorSquare, y: &TensorSquare) -> TensorSquare {
        let mut t = TensorSquare::zero(self.n);
        for ((a1, b1), c1) in &x.terms {
            for ((a2, b2), c2) in &y.terms {
                let l = self.mul_mono(a1, a2);
                let r = self.mul_mono(b1, b2);
                let c = c1 * c2;
                for (ma, xa) in &l.terms {
                    for (mb, xb) in &r.terms {
                        t.add_term(ma.clone(), mb.clone(), &(&c * &(xa * xb)));
                    }
                }
            }
        }
        t
    }

    /// Antipode, anti-multiplicative extension of
    /// `S(E_i) = -E_i K_i^{-1}`, `S(F_i) = -K_i F_i`, `S(K) = K^{-1}`.
    pub fn antipode(&self, x: &UqElement) -> UqElement {
        let mut r = self.zero();
        for (m, c) in &x.terms {
            let mut acc = self.one();
            // S(F_f K E_e) = S(E_e) S(K) S(F_f), each word reversed
            for l in m.e.letters().iter().rev() {
                let i = *l as usize + 1;
                let s = self.mul(&self.e(i).unwrap(), &self.k(i, -1).unwrap()).scale(&RatQ::int(-1));
                acc = self.mul(&acc, &s);
            }
            let kinv: Vec<i32> = m.k.iter().map(|x| -x).collect();
            acc = self.mul(&acc, &self.k_vec(&kinv));
            for l in m.f.letters().iter().rev() {
                let i = *l as usize + 1;
                let s = self.mul(&self.k(i, 1).unwrap(), &self.f(i).unwrap()).scale(&RatQ::int(-1));
                acc = self.mul(&acc, &s);
            }
            r.add_scaled(&acc, c);
        }
        r
    }

    /// Adjoint action of `y` on `x`.
    pub fn adjoint(&self, y: &UqElement, x: &UqElement, side: AdjointSide) -> UqElement {
        let d = self.coproduct(y);
        let mut r = self.zero();
        for ((a, b), c) in &d.terms {
            let a = self.mono(a.clone());
            let b = self.mono(b.clone());
            let t = match side {
                AdjointSide::Right => self.product(&[self.antipode(&a), x.clone(), b]),
                AdjointSide::Left => self.product(&[a, x.clone(), self.antipode(&b)]),
            };
            r.add_scaled(&t, c);
        }
        r
    }

    fn braid_gen(&self, i: u8, is_e: bool, k: u8) -> Arc<UqElement> {
        let key = (i, is_e, k);
        if let Some(r) = self.braid_cache.lock().get(&key) {
            return r.clone();
        }
        let (iu, ku) = (i as usize + 1, k as usize + 1);
        let neg = RatQ::int(-1);
        let r = if is_e {
            if i == k {
                self.mul(&self.f(iu).unwrap(), &self.k(iu, 1).unwrap()).scale(&neg)
            } else if i.abs_diff(k) == 1 {
                self.qcomm(&self.e(iu).unwrap(), &self.e(ku).unwrap(), &RatQ::q_pow(-1)).scale(&neg)
            } else {
                self.e(ku).unwrap()
            }
        } else if i == k {
            self.mul(&self.k(iu, -1).unwrap(), &self.e(iu).unwrap()).scale(&neg)
        } else if i.abs_diff(k) == 1 {
            self.qcomm(&self.f(ku).unwrap(), &self.f(iu).unwrap(), &RatQ::q()).scale(&neg)
        } else {
            self.f(ku).unwrap()
        };
        let r = Arc::new(r);
        self.braid_cache.lock().insert(key, r.clone());
        r
    }

    /// Lusztig's automorphism `T_i`.
    pub fn braid(&self, i: usize, x: &UqElement) -> Result<UqElement, UqError> {
        let l = self.check(i)?;
        let mut r = self.zero();
        for (m, c) in &x.terms {
            let mut acc = self.one();
            for fl in m.f.letters() {
                acc = self.mul(&acc, &self.braid_gen(l, false, *fl));
            }
            // T_i(K_j) = K_j K_i^{-a_ij}
            let mut k = m.k.clone();
            let s: i32 = (0..self.n).map(|j| cartan(l, j as u8) * m.k[j]).sum();
            k[l as usize] -= s;
            acc = self.mul(&acc, &self.k_vec(&k));
            for el in m.e.letters() {
                acc = self.mul(&acc, &self.braid_gen(l, true, *el));
            }
            r.add_scaled(&acc, c);
        }
        Ok(r)
    }

    /// Monic Lusztig root vectors `T_{i_1} ... T_{i_{k-1}}(E_{i_k})`, with
    /// their roots, in the order of the word.
    pub fn root_vectors(&self, w: &WeylWord) -> Result<Vec<(Root, UqElement)>, UqError> {
        let betas = weyl::beta_sequence(w, self.n)?;
        self.ensure_degree(2 * self.n);
        let mut out = Vec::with_capacity(betas.len());
        for (k, beta) in betas.iter().enumerate() {
            let mut x = self.e(w.0[k] as usize)?;
            for s in w.0[..k].iter().rev() {
                x = self.braid(*s as usize, &x)?;
            }
            if !x.is_positive_part() {
                return Err(UqError::NotPositive { k: k + 1, elem: x.render() });
            }
            let wt = x.weight()?;
            debug_assert_eq!(wt, beta.weight(self.n));
            out.push((*beta, x.monic()));
        }
        Ok(out)
    }

    /// Parses an expression over `E_i`, `F_i`, `K_i^{+-1}` and scalars.
    pub fn parse(&self, s: &str, vars: &Vars) -> Result<UqElement, UqError> {
        let e = parse_expr(s)?;
        Ok(eval_in(self, &e, vars)?)
    }
}

impl ExprTarget for Uq {
    type Elem = UqElement;

    fn scalar(&self, c: RatQ) -> Result<UqElement, ParseError> {
        Ok(UqElement::scalar(self.n, c))
    }

    fn atom(&self, a: &Expr, power: i32) -> Result<UqElement, ParseError> {
        let bad = |i: usize| ParseError::Invalid(format!("generator index {i} out of range for rank {}", self.n));
        match a {
            Expr::Gen(GenKind::K, i) => self.k(*i, power).map_err(|_| bad(*i)),
            Expr::Gen(kind, i) => {
                if power < 0 {
                    return Err(ParseError::Invalid("only K generators are invertible".into()));
                }
                let g = match kind {
                    GenKind::E => self.e(*i),
                    _ => self.f(*i),
                }
                .map_err(|_| bad(*i))?;
                let mut acc = self.one();
                for _ in 0..power {
                    acc = self.mul(&acc, &g);
                }
                Ok(acc)
            }
            Expr::U(..) => Err(ParseError::Invalid("matrix coefficients are not elements of U_q".into())),
            _ => Err(ParseError::Invalid("not an atom".into())),
        }
    }

    fn add(&self, a: &UqElement, b: &UqElement) -> UqElement {
        a.add(b)
    }

    fn mul(&self, a: &UqElement, b: &UqElement) -> UqElement {
        Uq::mul(self, a, b)
    }

    fn scale(&self, a: &UqElement, c: &RatQ) -> UqElement {
        a.scale(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(u: &Uq, s: &str) -> UqElement {
        u.parse(s, &Vars::new()).unwrap()
    }

    #[test]
    fn defining_relations() {
        let u = Uq::get(2);
        assert_eq!(p(&u, "E1 F1"), p(&u, "F1 E1 + (K1 - K1^-1)/nu"));
        assert_eq!(p(&u, "K1 E1"), p(&u, "q^2 E1 K1"));
        assert_eq!(p(&u, "K1 F2"), p(&u, "q F2 K1"));
        assert!(p(&u, "E1 F2 - F2 E1").is_zero());
        assert!(p(&u, "K1 K1^-1 - 1").is_zero());
        assert_eq!(p(&u, "E2 E2 E1"), p(&u, "(q + q^-1) E2 E1 E2 - E1 E2 E2"));
        assert!(p(&u, "F1 F1 F2 - (q+q^-1) F1 F2 F1 + F2 F1 F1").is_zero());
        let u3 = Uq::get(3);
        assert!(p(&u3, "E1 E3 - E3 E1").is_zero());
    }

    #[test]
    fn coproduct_generators() {
        let u = Uq::get(2);
        let d = u.coproduct(&p(&u, "E1"));
        let expect = TensorSquare::from_pairs(
            2,
            &[(RatQ::one(), p(&u, "E1"), p(&u, "K1")), (RatQ::one(), u.one(), p(&u, "E1"))],
        );
        assert_eq!(d, expect);
        let d = u.coproduct(&p(&u, "F2"));
        let expect = TensorSquare::from_pairs(
            2,
            &[(RatQ::one(), p(&u, "F2"), u.one()), (RatQ::one(), p(&u, "K2^-1"), p(&u, "F2"))],
        );
        assert_eq!(d, expect);
        let one = u.coproduct(&u.one());
        assert_eq!(one, TensorSquare::from_pairs(2, &[(RatQ::one(), u.one(), u.one())]));
    }

    #[test]
    fn coproduct_is_multiplicative() {
        let u = Uq::get(2);
        let xs = ["E1 F2", "F1 E1", "E2 E1 K1", "F1 F2 E2", "K2^-1 E1 E2"];
        for a in xs {
            for b in xs {
                let (x, y) = (p(&u, a), p(&u, b));
                let lhs = u.coproduct(&u.mul(&x, &y));
                let rhs = u.tensor_mul(&u.coproduct(&x), &u.coproduct(&y));
                assert_eq!(lhs, rhs, "{a} * {b}");
            }
        }
    }

    #[test]
    fn example_coproduct() {
        let u = Uq::get(2);
        let x = u.build_eji(1, 3).unwrap();
        assert_eq!(x, p(&u, "E2 E1 - q^-1 E1 E2"));
        let lhs = u.coproduct(&x);
        let rhs = TensorSquare::from_pairs(
            2,
            &[
                (RatQ::one(), x.clone(), p(&u, "K1 K2")),
                (&RatQ::q_pow(-1) * &RatQ::nu(), p(&u, "E1"), p(&u, "E2 K1")),
                (RatQ::one(), u.one(), x.clone()),
            ],
        );
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn braid_table() {
        let u = Uq::get(3);
        assert_eq!(u.braid(1, &p(&u, "E1")).unwrap(), p(&u, "-F1 K1"));
        assert_eq!(u.braid(2, &p(&u, "E1")).unwrap(), p(&u, "-[E2, E1]_{q^-1}"));
        assert_eq!(u.braid(1, &p(&u, "E3")).unwrap(), p(&u, "E3"));
        assert_eq!(u.braid(1, &p(&u, "K2")).unwrap(), p(&u, "K2 K1"));
        assert_eq!(u.braid(1, &p(&u, "F1")).unwrap(), p(&u, "-K1^-1 E1"));
    }

    #[test]
    fn braid_relations_on_generators() {
        let u = Uq::get(2);
        for g in ["E1", "E2", "F1", "F2", "K1", "K2^-1"] {
            let x = p(&u, g);
            let a = u.braid(1, &u.braid(2, &u.braid(1, &x).unwrap()).unwrap()).unwrap();
            let b = u.braid(2, &u.braid(1, &u.braid(2, &x).unwrap()).unwrap()).unwrap();
            assert_eq!(a, b, "{g}");
        }
    }

    #[test]
    fn root_vectors_sl3() {
        let u = Uq::get(2);
        let rv = u.root_vectors(&weyl::nice_word(2)).unwrap();
        let roots: Vec<Root> = rv.iter().map(|r| r.0).collect();
        assert_eq!(roots, vec![Root::new(2, 3), Root::new(1, 3), Root::new(1, 2)]);
        assert_eq!(rv[0].1, p(&u, "E2"));
        assert_eq!(rv[2].1, p(&u, "E1"));
        assert_eq!(rv[1].1, u.build_eji(1, 3).unwrap().monic());
    }

    #[test]
    fn nestings_agree() {
        let u = Uq::get(3);
        let l = p(&u, "[[E3, E2]_{q^-1}, E1]_{q^-1}");
        let r = p(&u, "[E3, [E2, E1]_{q^-1}]_{q^-1}");
        assert_eq!(l, r);
        assert_eq!(r, u.build_eji(1, 4).unwrap());
    }

    #[test]
    fn weights_and_counit() {
        let u = Uq::get(2);
        assert_eq!(u.build_eji(1, 3).unwrap().weight().unwrap(), vec![1, 1]);
        assert_eq!(p(&u, "K1").weight().unwrap(), vec![0, 0]);
        assert!(p(&u, "E1 + E2").weight().is_err());
        assert_eq!(p(&u, "3 K1 + E1").counit(), RatQ::int(3));
    }

    #[test]
    fn adjoint_of_k() {
        let u = Uq::get(2);
        let x = u.build_eji(1, 3).unwrap();
        let k = p(&u, "K1");
        // (alpha_1, alpha_1 + alpha_2) = 1
        assert_eq!(u.adjoint(&k, &x, AdjointSide::Right), x.scale(&RatQ::q_pow(-1)));
        assert_eq!(u.adjoint(&u.one(), &x, AdjointSide::Right), x);
        let e = p(&u, "E2");
        assert_eq!(u.adjoint(&e, &p(&u, "E1"), AdjointSide::Right), p(&u, "-q [E2, E1]_{q^-1}"));
    }
}
