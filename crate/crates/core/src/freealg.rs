//! Noncommutative polynomials over `Q(q)`, rewriting to normal form, and
//! degree-truncated completion of homogeneous relation systems.
//!
//! Words are sequences of letter indices. The monomial order is
//! degree-lexicographic, where letters compare by their precedence rank.
//! By default the rank of a letter is its index in the [`Alphabet`]; a
//! [`MonomialOrder`] can assign any other ranking.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use parking_lot::Mutex;
use smallvec::SmallVec;
use thiserror::Error;

use crate::linalg::{axpy, Echelon, SparseVec};
use crate::scalars::RatQ;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FreeAlgError {
    #[error("relation is not homogeneous: {0}")]
    Inhomogeneous(String),
    #[error("degree {degree} exceeds the certified degree {valid} of the rewriting system")]
    DegreeAboveValid { degree: usize, valid: usize },
    #[error("letter {0} is outside the alphabet")]
    BadLetter(usize),
    #[error("monomial order is not a permutation of the alphabet")]
    BadOrder,
}

/// A word over an alphabet; ordered by length, then lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub SmallVec<[u8; 12]>);

impl Word {
    pub fn empty() -> Self {
        Word(SmallVec::new())
    }

    pub fn from_slice(s: &[u8]) -> Self {
        Word(SmallVec::from_slice(s))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn concat(&self, o: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&o.0);
        Word(v)
    }

    pub fn contains_factor(&self, f: &[u8]) -> bool {
        f.len() <= self.len() && self.0.windows(f.len().max(1)).any(|w| w == f)
    }
}

impl Ord for Word {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.len().cmp(&o.0.len()).then_with(|| self.0.cmp(&o.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{:?}", self.0.as_slice())
    }
}

/// Ordered generator labels with root-lattice weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
    weights: Vec<Vec<i32>>,
}

impl Alphabet {
    pub fn new(labels: Vec<String>, weights: Vec<Vec<i32>>) -> Self {
        assert_eq!(labels.len(), weights.len());
        let distinct: BTreeSet<&String> = labels.iter().collect();
        assert_eq!(distinct.len(), labels.len(), "alphabet labels must be distinct");
        assert!(labels.len() <= u8::MAX as usize);
        Alphabet { labels, weights }
    }

    /// Letters `x1..xk`, all of weight zero.
    pub fn plain(k: usize) -> Self {
        Self::new((1..=k).map(|i| format!("x{i}")).collect(), vec![Vec::new(); k])
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: u8) -> &str {
        &self.labels[i as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weight(&self, i: u8) -> &[i32] {
        &self.weights[i as usize]
    }

    pub fn word_weight(&self, w: &Word) -> Vec<i32> {
        let dim = self.weights.first().map_or(0, |v| v.len());
        let mut acc = vec![0; dim];
        for &l in w.letters() {
            for (a, b) in acc.iter_mut().zip(&self.weights[l as usize]) {
                *a += b;
            }
        }
        acc
    }

    pub fn render_word(&self, w: &Word, sep: &str) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        w.letters().iter().map(|l| self.label(*l)).collect::<Vec<_>>().join(sep)
    }
}

/// A noncommutative polynomial: words with nonzero coefficients.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct FreeElement {
    pub terms: BTreeMap<Word, RatQ>,
}

impl FreeElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::word(Word::empty())
    }

    pub fn word(w: Word) -> Self {
        Self::term(w, RatQ::one())
    }

    pub fn letters(ls: &[u8]) -> Self {
        Self::word(Word::from_slice(ls))
    }

    pub fn term(w: Word, c: RatQ) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(w, c);
        }
        FreeElement { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Word, RatQ)>>(it: I) -> Self {
        let mut e = Self::zero();
        for (w, c) in it {
            e.add_term(w, &c);
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, w: Word, c: &RatQ) {
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

    pub fn add_scaled(&mut self, o: &FreeElement, c: &RatQ) {
        axpy(&mut self.terms, c, &o.terms);
    }

    pub fn add(&self, o: &FreeElement) -> FreeElement {
        let mut r = self.clone();
        r.add_scaled(o, &RatQ::one());
        r
    }

    pub fn sub(&self, o: &FreeElement) -> FreeElement {
        let mut r = self.clone();
        r.add_scaled(o, &RatQ::int(-1));
        r
    }

    pub fn scale(&self, c: &RatQ) -> FreeElement {
        FreeElement { terms: crate::linalg::scale(&self.terms, c) }
    }

    pub fn mul(&self, o: &FreeElement) -> FreeElement {
        let mut r = FreeElement::zero();
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                r.add_term(a.concat(b), &(x * y));
            }
        }
        r
    }

    /// Greatest word and its coefficient.
    pub fn leading(&self) -> Option<(&Word, &RatQ)> {
        self.terms.iter().next_back()
    }

    pub fn degrees(&self) -> BTreeSet<usize> {
        self.terms.keys().map(|w| w.len()).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    /// Checks homogeneity in total degree and weight; returns (degree, weight).
    pub fn homogeneous_degree(&self, alpha: &Alphabet) -> Result<Option<(usize, Vec<i32>)>, FreeAlgError> {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Ok(None);
        };
        let d = first.len();
        let wt = alpha.word_weight(first);
        for w in it {
            if w.len() != d || alpha.word_weight(w) != wt {
                return Err(FreeAlgError::Inhomogeneous(self.render(alpha)));
            }
        }
        Ok(Some((d, wt)))
    }

    pub fn map_letters(&self, f: &dyn Fn(u8) -> u8) -> FreeElement {
        FreeElement::from_terms(
            self.terms
                .iter()
                .map(|(w, c)| (Word(w.0.iter().map(|l| f(*l)).collect()), c.clone())),
        )
    }

    /// Renders with the highest word first, e.g. `e1*e2 + q*e2*e1`.
    pub fn render(&self, alpha: &Alphabet) -> String {
        render_terms(self.terms.iter().rev().map(|(w, c)| (alpha.render_word(w, "*"), c)))
    }
}

/// True when `s` is a sum at parenthesis depth zero.
pub fn is_top_level_sum(s: &str) -> bool {
    let mut depth = 0i32;
    let b = s.as_bytes();
    for i in 0..b.len() {
        match b[i] {
            b'(' | b'[' | b'{' => depth += 1,
            b')' | b']' | b'}' => depth -= 1,
            b'+' | b'-' if depth == 0 && i > 0 && b[i - 1] == b' ' => return true,
            _ => {}
        }
    }
    false
}

/// Joins `(monomial, coefficient)` pairs into `a*m1 + b*m2 - ...`.
pub fn render_terms<'a, I: Iterator<Item = (String, &'a RatQ)>>(it: I) -> String {
    let mut s = String::new();
    for (m, c) in it {
        let cs = c.to_string();
        let negated = (-c).to_string();
        let neg = cs.starts_with('-') && !negated.starts_with('-');
        let mag = if neg { negated } else { cs };
        let mag = if is_top_level_sum(&mag) { format!("({mag})") } else { mag };
        let body = if m == "1" {
            mag
        } else if mag == "1" {
            m
        } else {
            format!("{mag}*{m}")
        };
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        s.push_str(&body);
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

/// Rewrite rule `lead -> tail`, every word of `tail` smaller than `lead`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    pub lead: Word,
    pub tail: FreeElement,
}

/// A precedence ranking of letters for the degree-lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialOrder {
    rank: Vec<u8>,
}

impl MonomialOrder {
    pub fn natural(k: usize) -> Self {
        MonomialOrder { rank: (0..k as u8).collect() }
    }

    /// `rank[i]` is the precedence of letter `i` (higher is greater).
    pub fn from_ranks(rank: Vec<u8>) -> Result<Self, FreeAlgError> {
        let mut s = rank.clone();
        s.sort_unstable();
        if s.iter().enumerate().any(|(i, r)| *r as usize != i) {
            return Err(FreeAlgError::BadOrder);
        }
        Ok(MonomialOrder { rank })
    }

    pub fn reversed(k: usize) -> Self {
        MonomialOrder { rank: (0..k as u8).rev().collect() }
    }

    fn inverse(&self) -> Vec<u8> {
        let mut inv = vec![0u8; self.rank.len()];
        for (i, r) in self.rank.iter().enumerate() {
            inv[*r as usize] = i as u8;
        }
        inv
    }
}

/// A rewriting system certified confluent up to `valid_degree`.
pub struct TruncatedGB {
    alphabet: Alphabet,
    order: MonomialOrder,
    inv: Vec<u8>,
    relations: Vec<FreeElement>,
    rules: Vec<RewriteRule>,
    lead_index: HashMap<Word, usize>,
    lead_lengths: BTreeSet<usize>,
    valid_degree: usize,
    cache: Mutex<HashMap<Word, Arc<FreeElement>>>,
}

impl fmt::Debug for TruncatedGB {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruncatedGB")
            .field("rules", &self.rules.len())
            .field("valid_degree", &self.valid_degree)
            .finish()
    }
}

impl Clone for TruncatedGB {
    fn clone(&self) -> Self {
        TruncatedGB {
            alphabet: self.alphabet.clone(),
            order: self.order.clone(),
            inv: self.inv.clone(),
            relations: self.relations.clone(),
            rules: self.rules.clone(),
            lead_index: self.lead_index.clone(),
            lead_lengths: self.lead_lengths.clone(),
            valid_degree: self.valid_degree,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl TruncatedGB {
    /// Completes `relations` up to degree `dmax` with the natural order.
    pub fn complete(alphabet: &Alphabet, relations: &[FreeElement], dmax: usize) -> Result<Self, FreeAlgError> {
        Self::complete_with_order(alphabet, relations, MonomialOrder::natural(alphabet.len()), dmax)
    }

    pub fn complete_with_order(
        alphabet: &Alphabet,
        relations: &[FreeElement],
        order: MonomialOrder,
        dmax: usize,
    ) -> Result<Self, FreeAlgError> {
        if order.rank.len() != alphabet.len() {
            return Err(FreeAlgError::BadOrder);
        }
        let inv = order.inverse();
        let mut internal = Vec::new();
        for r in relations {
            for w in r.terms.keys() {
                if let Some(&l) = w.letters().iter().find(|l| **l as usize >= alphabet.len()) {
                    return Err(FreeAlgError::BadLetter(l as usize));
                }
            }
            r.homogeneous_degree(alphabet)?;
            if !r.is_zero() {
                internal.push(r.map_letters(&|l| order.rank[l as usize]));
            }
        }
        let mut gb = TruncatedGB {
            alphabet: alphabet.clone(),
            order,
            inv,
            relations: internal,
            rules: Vec::new(),
            lead_index: HashMap::new(),
            lead_lengths: BTreeSet::new(),
            valid_degree: 0,
            cache: Mutex::new(HashMap::new()),
        };
        gb.extend_to(dmax);
        Ok(gb)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn valid_degree(&self) -> usize {
        self.valid_degree
    }

    /// Rules in the caller's letters, in order of creation.
    pub fn rules(&self) -> Vec<RewriteRule> {
        self.rules
            .iter()
            .map(|r| RewriteRule {
                lead: self.to_external_word(&r.lead),
                tail: self.to_external(&r.tail),
            })
            .collect()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    fn to_external_word(&self, w: &Word) -> Word {
        Word(w.0.iter().map(|l| self.inv[*l as usize]).collect())
    }

    fn to_external(&self, e: &FreeElement) -> FreeElement {
        e.map_letters(&|l| self.inv[l as usize])
    }

    fn to_internal(&self, e: &FreeElement) -> FreeElement {
        e.map_letters(&|l| self.order.rank[l as usize])
    }

    /// Continues the completion so that it is certified up to degree `d`.
    pub fn extend_to(&mut self, d: usize) {
        while self.valid_degree < d {
            let deg = self.valid_degree + 1;
            self.complete_degree(deg);
            self.valid_degree = deg;
        }
    }

    fn complete_degree(&mut self, d: usize) {
        let mut cands: Vec<FreeElement> = self
            .relations
            .iter()
            .filter(|r| r.terms.keys().next().is_some_and(|w| w.len() == d))
            .cloned()
            .collect();
        for r1 in &self.rules {
            let l1 = r1.lead.len();
            for r2 in &self.rules {
                let l2 = r2.lead.len();
                if l1 + l2 <= d {
                    continue;
                }
                let o = l1 + l2 - d;
                if o == 0 || o >= l1.min(l2) {
                    continue;
                }
                if r1.lead.0[l1 - o..] != r2.lead.0[..o] {
                    continue;
                }
                let v = Word::from_slice(&r2.lead.0[o..]);
                let u = Word::from_slice(&r1.lead.0[..l1 - o]);
                let s = r1
                    .tail
                    .mul(&FreeElement::word(v))
                    .sub(&FreeElement::word(u).mul(&r2.tail));
                cands.push(s);
            }
        }
        if cands.is_empty() {
            return;
        }
        let mut ech: Echelon<Word> = Echelon::new();
        for c in &cands {
            let r = self.nf_internal(c);
            if !r.is_zero() {
                ech.insert(&r.terms);
            }
        }
        if ech.rank() == 0 {
            return;
        }
        for row in ech.rref() {
            let (lead, _) = row.iter().next_back().unwrap();
            let lead = lead.clone();
            let mut tail = FreeElement { terms: row };
            tail.terms.remove(&lead);
            let tail = tail.scale(&RatQ::int(-1));
            self.lead_lengths.insert(lead.len());
            self.lead_index.insert(lead.clone(), self.rules.len());
            self.rules.push(RewriteRule { lead, tail });
        }
        self.cache.lock().retain(|w, _| w.len() < d);
    }

    fn matching_rule(&self, w: &[u8]) -> Option<(usize, usize)> {
        for &l in &self.lead_lengths {
            if l > w.len() {
                break;
            }
            let suffix = &w[w.len() - l..];
            if let Some(&r) = self.lead_index.get(&Word::from_slice(suffix)) {
                return Some((r, w.len() - l));
            }
        }
        None
    }

    fn nf_word(&self, w: &Word) -> Arc<FreeElement> {
        if let Some(e) = self.cache.lock().get(w) {
            return e.clone();
        }
        let result = if w.is_empty() {
            FreeElement::word(w.clone())
        } else {
            let n = w.len();
            let last = w.0[n - 1];
            let prefix = Word::from_slice(&w.0[..n - 1]);
            let p = self.nf_word(&prefix);
            let mut acc = FreeElement::zero();
            for (u, c) in &p.terms {
                let mut v = u.clone();
                v.0.push(last);
                if &v == w {
                    match self.matching_rule(&v.0) {
                        None => acc.add_term(v, c),
                        Some((r, at)) => {
                            let rule = &self.rules[r];
                            let head = Word::from_slice(&v.0[..at]);
                            for (t, tc) in &rule.tail.terms {
                                let red = self.nf_word(&head.concat(t));
                                acc.add_scaled(&red, &(c * tc));
                            }
                        }
                    }
                } else {
                    let red = self.nf_word(&v);
                    acc.add_scaled(&red, c);
                }
            }
            acc
        };
        let result = Arc::new(result);
        self.cache.lock().insert(w.clone(), result.clone());
        result
    }

    fn nf_internal(&self, e: &FreeElement) -> FreeElement {
        let mut acc = FreeElement::zero();
        for (w, c) in &e.terms {
            acc.add_scaled(&self.nf_word(w), c);
        }
        acc
    }

    /// Normal form; errors if a word exceeds the certified degree.
    pub fn nf_reduce(&self, e: &FreeElement) -> Result<FreeElement, FreeAlgError> {
        let d = e.max_degree();
        if d > self.valid_degree {
            return Err(FreeAlgError::DegreeAboveValid { degree: d, valid: self.valid_degree });
        }
        Ok(self.to_external(&self.nf_internal(&self.to_internal(e))))
    }

    /// Normal form of a single word, in the caller's letters.
    pub fn nf_word_external(&self, w: &Word) -> Result<FreeElement, FreeAlgError> {
        self.nf_reduce(&FreeElement::word(w.clone()))
    }

    /// Rewrites one reducible occurrence at a time, picking which word and
    /// which occurrence through `choose(count)`; the result is the normal
    /// form whenever the system is confluent at this degree.
    pub fn nf_reduce_by(
        &self,
        e: &FreeElement,
        choose: &mut dyn FnMut(usize) -> usize,
    ) -> Result<FreeElement, FreeAlgError> {
        let d = e.max_degree();
        if d > self.valid_degree {
            return Err(FreeAlgError::DegreeAboveValid { degree: d, valid: self.valid_degree });
        }
        let mut cur = self.to_internal(e);
        loop {
            let reducible: Vec<(Word, Vec<(usize, usize)>)> = cur
                .terms
                .keys()
                .filter_map(|w| {
                    let occ = self.occurrences(w);
                    (!occ.is_empty()).then(|| (w.clone(), occ))
                })
                .collect();
            if reducible.is_empty() {
                return Ok(self.to_external(&cur));
            }
            let (w, occ) = &reducible[choose(reducible.len())];
            let (r, at) = occ[choose(occ.len())];
            let rule = &self.rules[r];
            let c = cur.terms.remove(w).unwrap();
            let head = Word::from_slice(&w.0[..at]);
            let tail = Word::from_slice(&w.0[at + rule.lead.len()..]);
            for (t, tc) in &rule.tail.terms {
                cur.add_term(head.concat(t).concat(&tail), &(&c * tc));
            }
        }
    }

    fn occurrences(&self, w: &Word) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for &l in &self.lead_lengths {
            if l > w.len() {
                break;
            }
            for at in 0..=w.len() - l {
                if let Some(&r) = self.lead_index.get(&Word::from_slice(&w.0[at..at + l])) {
                    out.push((r, at));
                }
            }
        }
        out
    }

    pub fn is_normal(&self, w: &Word) -> bool {
        let w = Word(w.0.iter().map(|l| self.order.rank[*l as usize]).collect());
        self.occurrences(&w).is_empty()
    }

    /// Number of normal words in each degree `0..=kmax`.
    ///
    /// Exact for degrees up to `valid_degree`; callers extend first.
    pub fn count_normal_words(&self, kmax: usize) -> Vec<u128> {
        let k = self.alphabet.len() as u8;
        let maxlen = self.lead_lengths.iter().next_back().copied().unwrap_or(1);
        let keep = maxlen.saturating_sub(1);
        let mut dims = vec![1u128];
        let mut states: HashMap<Word, u128> = HashMap::new();
        states.insert(Word::empty(), 1);
        for _ in 1..=kmax {
            let mut next: HashMap<Word, u128> = HashMap::new();
            for (s, c) in &states {
                for x in 0..k {
                    let mut w = s.clone();
                    w.0.push(x);
                    if self.matching_rule(&w.0).is_some() {
                        continue;
                    }
                    let st = if w.len() > keep { Word::from_slice(&w.0[w.len() - keep..]) } else { w };
                    *next.entry(st).or_insert(0) += c;
                }
            }
            dims.push(next.values().sum());
            states = next;
        }
        dims
    }

    /// Normal words of degree `k`, in increasing order, in the caller's letters.
    pub fn normal_words(&self, k: usize) -> Vec<Word> {
        let n = self.alphabet.len() as u8;
        let mut cur = vec![Word::empty()];
        for _ in 0..k {
            let mut next = Vec::new();
            for w in &cur {
                for x in 0..n {
                    let mut v = w.clone();
                    v.0.push(x);
                    if self.matching_rule(&v.0).is_none() {
                        next.push(v);
                    }
                }
            }
            cur = next;
        }
        let mut out: Vec<Word> = cur.iter().map(|w| self.to_external_word(w)).collect();
        out.sort_by(|a, b| self.cmp_external(a, b));
        out
    }

    /// Compares two words in the active monomial order.
    pub fn cmp_external(&self, a: &Word, b: &Word) -> Ordering {
        let ia = Word(a.0.iter().map(|l| self.order.rank[*l as usize]).collect());
        let ib = Word(b.0.iter().map(|l| self.order.rank[*l as usize]).collect());
        ia.cmp(&ib)
    }
}

/// Hilbert function of `T(V)/(relations)` in degrees `0..=kmax`.
pub fn graded_dims(
    alphabet: &Alphabet,
    relations: &[FreeElement],
    order: MonomialOrder,
    kmax: usize,
) -> Result<Vec<u128>, FreeAlgError> {
    let gb = TruncatedGB::complete_with_order(alphabet, relations, order, kmax)?;
    Ok(gb.count_normal_words(kmax))
}

/// Convenience: coefficient vector of an element keyed by word.
pub fn as_sparse(e: &FreeElement) -> SparseVec<Word> {
    e.terms.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn serre_sl3() -> (Alphabet, Vec<FreeElement>) {
        let a = Alphabet::new(vec!["E1".into(), "E2".into()], vec![vec![1, 0], vec![0, 1]]);
        let two = RatQ::qint(2);
        let r1 = FreeElement::from_terms([
            (Word::from_slice(&[1, 1, 0]), RatQ::one()),
            (Word::from_slice(&[1, 0, 1]), -two.clone()),
            (Word::from_slice(&[0, 1, 1]), RatQ::one()),
        ]);
        let r2 = FreeElement::from_terms([
            (Word::from_slice(&[0, 0, 1]), RatQ::one()),
            (Word::from_slice(&[0, 1, 0]), -two),
            (Word::from_slice(&[1, 0, 0]), RatQ::one()),
        ]);
        (a, vec![r1, r2])
    }

    #[test]
    fn serre_reduction() {
        let (a, rels) = serre_sl3();
        let gb = TruncatedGB::complete(&a, &rels, 6).unwrap();
        assert_eq!(gb.rule_count(), 2);
        let red = gb.nf_reduce(&FreeElement::letters(&[1, 1, 0])).unwrap();
        let expect = FreeElement::from_terms([
            (Word::from_slice(&[1, 0, 1]), RatQ::qint(2)),
            (Word::from_slice(&[0, 1, 1]), RatQ::int(-1)),
        ]);
        assert_eq!(red, expect);
        let normal = FreeElement::letters(&[0, 1]);
        assert_eq!(gb.nf_reduce(&normal).unwrap(), normal);
        assert_eq!(gb.count_normal_words(4)[4], 9);
        assert!(gb.nf_reduce(&FreeElement::letters(&[0; 7])).is_err());
    }

    #[test]
    fn free_algebra_dims() {
        let a = Alphabet::plain(2);
        let d = graded_dims(&a, &[], MonomialOrder::natural(2), 5).unwrap();
        assert_eq!(d, vec![1, 2, 4, 8, 16, 32]);
    }

    #[test]
    fn inhomogeneous_rejected() {
        let a = Alphabet::plain(2);
        let r = FreeElement::letters(&[0]).add(&FreeElement::letters(&[0, 1]));
        assert!(matches!(TruncatedGB::complete(&a, &[r], 3), Err(FreeAlgError::Inhomogeneous(_))));
    }

    #[test]
    fn completion_adds_rules() {
        // x2 x2 = x1 x2 has a self-overlap that forces a cubic rule
        let a = Alphabet::plain(2);
        let r = FreeElement::letters(&[1, 1]).sub(&FreeElement::letters(&[0, 1]));
        let gb = TruncatedGB::complete(&a, std::slice::from_ref(&r), 4).unwrap();
        assert!(gb.rule_count() >= 2);
        let x2 = FreeElement::letters(&[1]);
        for e in [r.mul(&x2), x2.mul(&r), x2.mul(&r).mul(&x2)] {
            assert!(gb.nf_reduce(&e).unwrap().is_zero());
        }
    }

    #[test]
    fn render_element() {
        let a = Alphabet::plain(2);
        let e = FreeElement::from_terms([
            (Word::from_slice(&[1, 0]), RatQ::one()),
            (Word::from_slice(&[0, 1]), RatQ::q_pow(-1)),
            (Word::from_slice(&[0, 0]), -RatQ::nu()),
        ]);
        assert_eq!(e.render(&a), "x2*x1 + q^-1*x1*x2 - nu*x1*x1");
    }
}
