//! Tangent spaces spanned by root vectors and the differential calculi they
//! define: coideal verdicts, quadratic relations, exterior algebras and the
//! data attached to them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::freealg::{Alphabet, FreeAlgError, FreeElement, MonomialOrder, TruncatedGB, Word};
use crate::linalg::{self, Echelon, SparseVec};
use crate::oq::{self, OqElement, OqError, OqWord};
use crate::parse::Vars;
use crate::scalars::RatQ;
use crate::uqsl::{AdjointSide, TensorSquare, Uq, UqElement, UqError};
use crate::weyl::{self, positive_roots, root_pairing, Rank, Root, WeylError, WeylWord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalculusError {
    #[error(transparent)]
    Uq(#[from] UqError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Oq(#[from] OqError),
    #[error(transparent)]
    FreeAlg(#[from] FreeAlgError),
    #[error("tangent vectors are linearly dependent: {0}")]
    Dependent(String),
    #[error("not in the positive part: {0}")]
    NotPositive(String),
    #[error("tangent vector has zero weight: {0}")]
    ZeroWeight(String),
    #[error("the calculus is not classical, dims {0:?}")]
    NotClassical(Vec<u128>),
    #[error("no dual matrix coefficient for {0}")]
    NoDual(String),
    #[error("needs a tangent space built from a reduced word")]
    NeedsWord,
    #[error("index {index} out of range for rank {n}")]
    Index { index: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TangentVector {
    pub label: String,
    pub root: Option<Root>,
    pub weight: Vec<i32>,
    pub elem: UqElement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Word(WeylWord),
    Exprs(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TangentSpace {
    pub n: usize,
    pub basis: Vec<TangentVector>,
    pub provenance: Provenance,
}

fn root_of_weight(w: &[i32]) -> Option<Root> {
    let first = w.iter().position(|x| *x != 0)?;
    let last = w.iter().rposition(|x| *x != 0)?;
    if w[first..=last].iter().all(|x| *x == 1) {
        Some(Root::new(first + 1, last + 2))
    } else {
        None
    }
}

impl TangentSpace {
    /// Span of the Lusztig root vectors of a reduced word of `w_0`, ordered by
    /// the convex order of the word.
    pub fn from_word(w: &WeylWord, n: Rank) -> Result<Self, CalculusError> {
        let n = n.get();
        let u = Uq::get(n);
        let basis = u
            .root_vectors(w)?
            .into_iter()
            .map(|(r, x)| TangentVector { label: r.label(), root: Some(r), weight: r.weight(n), elem: x })
            .collect();
        Ok(TangentSpace { n, basis, provenance: Provenance::Word(w.clone()) })
    }

    /// Span of explicit positive-part expressions, in the given order.
    pub fn from_exprs<S: AsRef<str>>(n: Rank, exprs: &[S], vars: &Vars) -> Result<Self, CalculusError> {
        let n = n.get();
        let u = Uq::get(n);
        let mut elems = Vec::new();
        for s in exprs {
            let x = u.parse(s.as_ref(), vars)?;
            if !x.is_positive_part() {
                return Err(CalculusError::NotPositive(s.as_ref().to_string()));
            }
            let wt = x.weight()?;
            if wt.iter().all(|c| *c == 0) {
                return Err(CalculusError::ZeroWeight(s.as_ref().to_string()));
            }
            elems.push((x, wt));
        }
        let mut ech: Echelon<Word> = Echelon::new();
        for ((x, _), s) in elems.iter().zip(exprs) {
            if !ech.insert(&x.e_coords()) {
                return Err(CalculusError::Dependent(s.as_ref().to_string()));
            }
        }
        let mut counts: BTreeMap<Vec<i32>, usize> = BTreeMap::new();
        for (_, w) in &elems {
            *counts.entry(w.clone()).or_default() += 1;
        }
        let basis = elems
            .into_iter()
            .enumerate()
            .map(|(k, (x, w))| {
                let root = if counts[&w] == 1 { root_of_weight(&w) } else { None };
                let label = match root {
                    Some(r) => r.label(),
                    None => format!("x{}", k + 1),
                };
                TangentVector { label, root, weight: w, elem: x }
            })
            .collect();
        Ok(TangentSpace {
            n,
            basis,
            provenance: Provenance::Exprs(exprs.iter().map(|s| s.as_ref().to_string()).collect()),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn word(&self) -> Option<&WeylWord> {
        match &self.provenance {
            Provenance::Word(w) => Some(w),
            Provenance::Exprs(_) => None,
        }
    }

    /// Cotangent generators `e_label`, weighted, in basis order.
    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(
            self.basis.iter().map(|b| format!("e{}", b.label)).collect(),
            self.basis.iter().map(|b| b.weight.clone()).collect(),
        )
    }

    /// Letter of the cotangent generator dual to `root`.
    pub fn letter(&self, root: Root) -> Option<u8> {
        self.basis.iter().position(|b| b.root == Some(root)).map(|p| p as u8)
    }

    fn span(&self, with_one: bool) -> Echelon<Word> {
        let mut e = Echelon::new();
        if with_one {
            let mut one = SparseVec::new();
            one.insert(Word::empty(), RatQ::one());
            e.insert(&one);
        }
        for b in &self.basis {
            e.insert(&b.elem.e_coords());
        }
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    TwoSided,
    LeftOnly,
    RightOnly,
    Neither,
}

impl Verdict {
    pub fn from_sides(left: bool, right: bool) -> Self {
        match (left, right) {
            (true, true) => Verdict::TwoSided,
            (true, false) => Verdict::LeftOnly,
            (false, true) => Verdict::RightOnly,
            (false, false) => Verdict::Neither,
        }
    }

    pub fn left(self) -> bool {
        matches!(self, Verdict::TwoSided | Verdict::LeftOnly)
    }

    pub fn right(self) -> bool {
        matches!(self, Verdict::TwoSided | Verdict::RightOnly)
    }

    /// Swaps left and right.
    pub fn mirror(self) -> Self {
        Verdict::from_sides(self.right(), self.left())
    }

    pub fn admits_calculus(self) -> bool {
        self != Verdict::Neither
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::TwoSided => "two_sided",
            Verdict::LeftOnly => "left_only",
            Verdict::RightOnly => "right_only",
            Verdict::Neither => "neither",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub side: Side,
    /// Label of the tangent vector whose coproduct fails.
    pub element: String,
    /// The fixed monomial in the other leg.
    pub other_leg: String,
    /// Component of the tested leg outside `span(T ∪ {1})`.
    pub component: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoidealReport {
    pub verdict: Verdict,
    pub witness: Vec<Witness>,
}

fn side_witness(t: &TangentSpace, span: &Echelon<Word>, side: Side) -> Option<Witness> {
    let u = Uq::get(t.n);
    for b in &t.basis {
        let d = u.coproduct(&b.elem);
        let groups = match side {
            Side::Right => d.drop_k(true).by_right(),
            Side::Left => d.drop_k(false).by_left(),
        };
        for (other, leg) in groups {
            let residual = span.reduce(&leg.e_coords());
            if !residual.is_empty() || !leg.is_positive_part() {
                let comp = if leg.is_positive_part() {
                    UqElement::from_e_coords(t.n, &residual).render()
                } else {
                    leg.render()
                };
                return Some(Witness {
                    side,
                    element: format!("e{}", b.label),
                    other_leg: other.render(),
                    component: comp,
                });
            }
        }
    }
    None
}

/// Right test: with `K -> 1` in the first legs, every first-leg component of
/// `Δ(X)` lies in `span(T ∪ {1})`. Left test: the same on second legs.
pub fn coideal_check(t: &TangentSpace) -> CoidealReport {
    let span = t.span(true);
    let right = side_witness(t, &span, Side::Right);
    let left = side_witness(t, &span, Side::Left);
    CoidealReport {
        verdict: Verdict::from_sides(left.is_none(), right.is_none()),
        witness: [left, right].into_iter().flatten().collect(),
    }
}

/// Quadratic relations grouped by weight; each group row-reduced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationSpace {
    pub alphabet: Alphabet,
    pub by_weight: BTreeMap<Vec<i32>, Vec<FreeElement>>,
}

impl RelationSpace {
    pub fn all(&self) -> Vec<FreeElement> {
        self.by_weight.values().flatten().cloned().collect()
    }

    pub fn dim(&self) -> usize {
        self.by_weight.values().map(Vec::len).sum()
    }

    /// Exact span membership.
    pub fn contains(&self, r: &FreeElement) -> bool {
        let mut e: Echelon<Word> = Echelon::new();
        for x in self.all() {
            e.insert(&x.terms);
        }
        e.contains(&r.terms)
    }

    /// Same span as another relation set over the same alphabet.
    pub fn same_span(&self, others: &[FreeElement]) -> bool {
        let mut a: Echelon<Word> = Echelon::new();
        for x in self.all() {
            a.insert(&x.terms);
        }
        let mut b: Echelon<Word> = Echelon::new();
        for x in others {
            b.insert(&x.terms);
        }
        a.rref() == b.rref()
    }

    pub fn render_lines(&self) -> Vec<String> {
        self.all().iter().map(|r| render_relation(r, &self.alphabet)).collect()
    }
}

/// `e21⊗e32 + q*e32⊗e21`.
pub fn render_relation(r: &FreeElement, alpha: &Alphabet) -> String {
    crate::freealg::render_terms(r.terms.iter().rev().map(|(w, c)| (alpha.render_word(w, "⊗"), c)))
}

fn pairs_by_weight(t: &TangentSpace) -> BTreeMap<Vec<i32>, Vec<(u8, u8)>> {
    let mut out: BTreeMap<Vec<i32>, Vec<(u8, u8)>> = BTreeMap::new();
    for (k, a) in t.basis.iter().enumerate() {
        for (l, b) in t.basis.iter().enumerate() {
            let w: Vec<i32> = a.weight.iter().zip(&b.weight).map(|(x, y)| x + y).collect();
            out.entry(w).or_default().push((k as u8, l as u8));
        }
    }
    out
}

/// Products `X_k X_l` landing in `span(T)`, per weight, as coefficient
/// vectors over the pair list.
fn product_space(t: &TangentSpace, pairs: &[(u8, u8)], weight: &[i32]) -> Vec<SparseVec<usize>> {
    let u = Uq::get(t.n);
    let mut span: Echelon<Word> = Echelon::new();
    for b in &t.basis {
        if b.weight == weight {
            span.insert(&b.elem.e_coords());
        }
    }
    let vecs: Vec<SparseVec<Word>> = pairs
        .iter()
        .map(|(k, l)| {
            let p = u.mul(&t.basis[*k as usize].elem, &t.basis[*l as usize].elem);
            span.reduce(&p.e_coords())
        })
        .collect();
    linalg::kernel(&vecs)
}

/// The degree-two relations of the maximal prolongation.
pub fn quadratic_relations(t: &TangentSpace) -> RelationSpace {
    let groups: Vec<(Vec<i32>, Vec<(u8, u8)>)> = pairs_by_weight(t).into_iter().collect();
    let by_weight = groups
        .par_iter()
        .map(|(w, pairs)| {
            let c = product_space(t, pairs, w);
            let ann = linalg::annihilator(&c, pairs.len());
            let rels: Vec<FreeElement> = ann
                .into_iter()
                .map(|v| {
                    FreeElement::from_terms(
                        v.into_iter().map(|(i, c)| (Word::from_slice(&[pairs[i].0, pairs[i].1]), c)),
                    )
                })
                .collect();
            (w.clone(), rels)
        })
        .filter(|(_, r)| !r.is_empty())
        .collect();
    RelationSpace { alphabet: t.alphabet(), by_weight }
}

/// `dim R(mu) + dim C_mu` and the pair count, per weight.
pub fn relation_balance(t: &TangentSpace) -> Vec<(Vec<i32>, usize, usize, usize)> {
    let rel = quadratic_relations(t);
    pairs_by_weight(t)
        .into_iter()
        .map(|(w, pairs)| {
            let c = product_space(t, &pairs, &w).len();
            let r = rel.by_weight.get(&w).map_or(0, Vec::len);
            (w, r, c, pairs.len())
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DimensionTable {
    pub dims: Vec<u128>,
    pub classical: Option<bool>,
}

impl DimensionTable {
    /// `classical` is `None` when a table stopping before degree `d + 1`
    /// agrees with the binomials so far.
    pub fn new(dims: Vec<u128>, d: usize) -> Self {
        let agrees = dims.iter().enumerate().all(|(k, x)| *x == if k <= d { binomial(d, k) } else { 0 });
        let classical = match (agrees, dims.len() > d + 1) {
            (false, _) => Some(false),
            (true, true) => Some(true),
            (true, false) => None,
        };
        DimensionTable { dims, classical }
    }

    pub fn total(&self) -> u128 {
        self.dims.iter().sum()
    }

    /// Highest degree with a nonzero entry.
    pub fn top_degree(&self) -> usize {
        self.dims.iter().rposition(|x| *x != 0).unwrap_or(0)
    }
}

/// Monomial order from a precedence list of letters, lowest first.
pub fn order_from_precedence(prec: &[u8]) -> MonomialOrder {
    let mut rank = vec![0u8; prec.len()];
    for (r, l) in prec.iter().enumerate() {
        rank[*l as usize] = r as u8;
    }
    MonomialOrder::from_ranks(rank).expect("permutation")
}

/// Completed exterior algebra `T(Λ^1)/<I^(2)>` up to degree `kmax`.
pub fn exterior_algebra(
    t: &TangentSpace,
    rel: &RelationSpace,
    order: MonomialOrder,
    kmax: usize,
) -> Result<TruncatedGB, CalculusError> {
    Ok(TruncatedGB::complete_with_order(&t.alphabet(), &rel.all(), order, kmax)?)
}

pub fn exterior_dims(t: &TangentSpace, kmax: Option<usize>) -> Result<DimensionTable, CalculusError> {
    exterior_dims_with_order(t, kmax, MonomialOrder::natural(t.dim()))
}

pub fn exterior_dims_with_order(
    t: &TangentSpace,
    kmax: Option<usize>,
    order: MonomialOrder,
) -> Result<DimensionTable, CalculusError> {
    let kmax = kmax.unwrap_or(t.dim() + 1);
    let rel = quadratic_relations(t);
    let gb = exterior_algebra(t, &rel, order, kmax)?;
    Ok(DimensionTable::new(gb.count_normal_words(kmax), t.dim()))
}

/// Dual matrix coefficients: `u_k` with `<X_l, u_k> = δ_kl`, combinations of
/// the degree-one words.
pub fn dual_words(t: &TangentSpace) -> Result<Vec<OqElement>, CalculusError> {
    let words = oq::all_words(t.n, 1);
    let cols: Vec<SparseVec<usize>> = words
        .iter()
        .map(|w| {
            t.basis
                .iter()
                .enumerate()
                .map(|(l, b)| (l, oq::pair_word(&b.elem, w)))
                .filter(|(_, c)| !c.is_zero())
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for k in 0..t.dim() {
        let mut target = SparseVec::new();
        target.insert(k, RatQ::int(-1));
        let mut all = cols.clone();
        all.push(target);
        let ker = linalg::kernel(&all);
        let sol = ker
            .iter()
            .find(|v| v.contains_key(&words.len()))
            .ok_or_else(|| CalculusError::NoDual(format!("e{}", t.basis[k].label)))?;
        let s = sol[&words.len()].inv().unwrap();
        let mut e = OqElement::zero();
        for (i, c) in sol {
            if *i < words.len() {
                e.add_term(words[*i].clone(), &(c * &s));
            }
        }
        out.push(e);
    }
    Ok(out)
}

/// Matrix of right multiplication by `u_ab` on the cotangent basis: column
/// `γ` holds `(<X_k, u_γ u_ab>)_k`.
pub fn cotangent_action(t: &TangentSpace, a: usize, b: usize) -> Result<Vec<Vec<RatQ>>, CalculusError> {
    if a == 0 || b == 0 || a > t.n + 1 || b > t.n + 1 {
        return Err(CalculusError::Index { index: a.max(b), n: t.n });
    }
    let duals = dual_words(t)?;
    let uab = OqElement::u(a, b);
    let d = t.dim();
    let mut m = vec![vec![RatQ::zero(); d]; d];
    for (g, ug) in duals.iter().enumerate() {
        let w = ug.mul(&uab);
        for (k, x) in t.basis.iter().enumerate() {
            m[k][g] = oq::pair(&x.elem, &w);
        }
    }
    Ok(m)
}

/// Sorted-ascending letter ranks of a degree-two word.
fn block_key(w: &Word, rank: &[u8]) -> Vec<u8> {
    let mut v: Vec<u8> = w.letters().iter().map(|l| rank[*l as usize]).collect();
    v.sort_unstable();
    v
}

/// Leading forms of the relations for the filtration by generator multisets,
/// multisets compared through their ascending rank sequences (larger leads).
/// Ranks follow the convex order of the word.
pub fn gr_leading_relations(t: &TangentSpace) -> Result<RelationSpace, CalculusError> {
    if t.word().is_none() {
        return Err(CalculusError::NeedsWord);
    }
    let rank: Vec<u8> = (0..t.dim() as u8).collect();
    let rel = quadratic_relations(t);
    let mut by_weight = BTreeMap::new();
    for (w, rels) in &rel.by_weight {
        let mut ech: Echelon<(Vec<u8>, Word)> = Echelon::new();
        for r in rels {
            let v: SparseVec<(Vec<u8>, Word)> =
                r.terms.iter().map(|(w, c)| ((block_key(w, &rank), w.clone()), c.clone())).collect();
            ech.insert(&v);
        }
        let lead: Vec<FreeElement> = ech
            .rref()
            .into_iter()
            .map(|row| {
                let top = row.keys().next_back().unwrap().0.clone();
                FreeElement::from_terms(row.into_iter().filter(|((b, _), _)| *b == top).map(|((_, w), c)| (w, c)))
            })
            .collect();
        by_weight.insert(w.clone(), lead);
    }
    Ok(RelationSpace { alphabet: rel.alphabet, by_weight })
}

/// Whether every relation is `e_k⊗e_k` or a multiple of
/// `e_k⊗e_l + q^{(β_k,β_l)} e_l⊗e_k` with `k` later than `l`.
pub fn is_q_commutation_set(t: &TangentSpace, rel: &RelationSpace) -> bool {
    rel.all().iter().all(|r| {
        let monic = r.scale(&r.leading().unwrap().1.inv().unwrap());
        let words: Vec<&Word> = monic.terms.keys().collect();
        match words.len() {
            1 => words[0].0[0] == words[0].0[1],
            2 => {
                let (a, b) = (words[0].letters(), words[1].letters());
                if a[0] != b[1] || a[1] != b[0] || a[0] == a[1] {
                    return false;
                }
                let (k, l) = (a[0].max(a[1]), a[0].min(a[1]));
                let (bk, bl) = (&t.basis[k as usize], &t.basis[l as usize]);
                let p: i32 = match (bk.root, bl.root) {
                    (Some(x), Some(y)) => root_pairing(x, y),
                    _ => return false,
                };
                let c_kl = &monic.terms[&Word::from_slice(&[k, l])];
                let c_lk = &monic.terms[&Word::from_slice(&[l, k])];
                c_lk == &(c_kl * &RatQ::q_pow(p))
            }
            _ => false,
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NakayamaEntry {
    pub generator: String,
    pub coefficient: RatQ,
    /// `Some(±1)` when the coefficient is a sign.
    pub sign: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrobeniusReport {
    pub top_degree: usize,
    pub top_dimension: u128,
    /// `(k, nondegenerate)` for `Λ^k × Λ^{top-k} -> Λ^top`.
    pub pairing_nondegenerate: Vec<(usize, bool)>,
    pub nakayama_sign: Vec<NakayamaEntry>,
}

pub fn frobenius_report(t: &TangentSpace) -> Result<FrobeniusReport, CalculusError> {
    let kmax = t.dim() + 1;
    let rel = quadratic_relations(t);
    let gb = exterior_algebra(t, &rel, MonomialOrder::natural(t.dim()), kmax)?;
    let table = DimensionTable::new(gb.count_normal_words(kmax), t.dim());
    let top = table.top_degree();
    let top_dim = table.dims[top];
    let mut report = FrobeniusReport {
        top_degree: top,
        top_dimension: top_dim,
        pairing_nondegenerate: Vec::new(),
        nakayama_sign: Vec::new(),
    };
    if top_dim != 1 || table.dims[kmax] != 0 {
        return Ok(report);
    }
    let top_word = gb.normal_words(top).pop().unwrap();
    let coeff = |a: &Word, b: &Word| -> RatQ {
        let p = gb.nf_word_external(&a.concat(b)).expect("within degree");
        p.terms.get(&top_word).cloned().unwrap_or_else(RatQ::zero)
    };
    for k in 0..=top {
        let left = gb.normal_words(k);
        let right = gb.normal_words(top - k);
        let rows: Vec<SparseVec<usize>> = left
            .iter()
            .map(|a| {
                right
                    .iter()
                    .enumerate()
                    .map(|(j, b)| (j, coeff(a, b)))
                    .filter(|(_, c)| !c.is_zero())
                    .collect()
            })
            .collect();
        let r = linalg::rank(&rows);
        report.pairing_nondegenerate.push((k, r == left.len() && r == right.len()));
    }
    let letters: Vec<u8> = (0..t.dim() as u8).collect();
    for g in &letters {
        let hat = Word(letters.iter().copied().filter(|l| l != g).collect());
        let e = Word::from_slice(&[*g]);
        let lhs = gb.nf_word_external(&e.concat(&hat))?;
        let rhs = gb.nf_word_external(&hat.concat(&e))?;
        let (Some(x), Some(y)) = (lhs.terms.get(&top_word), rhs.terms.get(&top_word)) else {
            continue;
        };
        let c = x.try_div(y).expect("nonzero");
        let sign = c.as_integer().filter(|v| v.abs() == 1).map(|v| v as i32);
        report.nakayama_sign.push(NakayamaEntry {
            generator: format!("e{}", t.basis[*g as usize].label),
            coefficient: c,
            sign,
        });
    }
    Ok(report)
}

/// Weights `γ_{i_1} + ... + γ_{i_k}` over increasing `k`-subsets, sorted.
pub fn line_decomposition(t: &TangentSpace, k: usize) -> Result<Vec<Vec<i32>>, CalculusError> {
    let table = exterior_dims(t, None)?;
    if table.classical != Some(true) {
        return Err(CalculusError::NotClassical(table.dims));
    }
    let mut out = Vec::new();
    let d = t.dim();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > d {
        return Ok(out);
    }
    loop {
        let mut w = vec![0; t.n];
        for i in &idx {
            for (a, x) in w.iter_mut().zip(&t.basis[*i].weight) {
                *a += x;
            }
        }
        out.push(w);
        // next combination
        let mut p = k;
        loop {
            if p == 0 {
                out.sort();
                return Ok(out);
            }
            p -= 1;
            if idx[p] < d - k + p {
                idx[p] += 1;
                for q in p + 1..k {
                    idx[q] = idx[q - 1] + 1;
                }
                break;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrassmannReport {
    pub r: usize,
    pub basis: Vec<TangentVector>,
    pub ad_closed: bool,
    /// `(generator, vector)` pairs whose adjoint image leaves the span.
    pub failures: Vec<(String, String)>,
}

/// Levi generators of `U_q(l_S)` for `S = Π \ {α_r}`.
pub fn levi_generators(n: usize, r: usize) -> Vec<(String, UqElement)> {
    let u = Uq::get(n);
    let mut out = Vec::new();
    for j in 1..=n {
        if j != r {
            out.push((format!("E{j}"), u.e(j).unwrap()));
            out.push((format!("F{j}"), u.f(j).unwrap()));
        }
        out.push((format!("K{j}"), u.k(j, 1).unwrap()));
        out.push((format!("K{j}^-1"), u.k(j, -1).unwrap()));
    }
    out
}

/// Image in the dual of the Grassmannian: `U_q(l_S)` acts on the right
/// through the counit, so `K_i -> 1` with `K` written to the right, and the
/// right ideal generated by the Levi `E_j` is discarded.
struct LeviQuotient {
    n: usize,
    r: usize,
    ideal: BTreeMap<usize, Echelon<Word>>,
}

impl LeviQuotient {
    fn new(n: usize, r: usize) -> Self {
        LeviQuotient { n, r, ideal: BTreeMap::new() }
    }

    fn ideal(&mut self, d: usize) -> &Echelon<Word> {
        let (n, r) = (self.n, self.r);
        self.ideal.entry(d).or_insert_with(|| {
            let u = Uq::get(n);
            let mut e = Echelon::new();
            if d == 0 {
                return e;
            }
            for w in u.normal_words(d - 1) {
                for j in (0..n as u8).filter(|j| *j as usize + 1 != r) {
                    e.insert(&u.nf_word(&w.concat(&Word::from_slice(&[j]))).terms);
                }
            }
            e
        })
    }

    fn image(&mut self, x: &UqElement) -> Option<SparseVec<Word>> {
        let mut flat: SparseVec<Word> = SparseVec::new();
        for (m, c) in &x.terms {
            if !m.f.is_empty() {
                return None;
            }
            let mut shift = 0;
            for (i, ki) in m.k.iter().enumerate() {
                for l in m.e.letters() {
                    shift += ki * match i.abs_diff(*l as usize) {
                        0 => 2,
                        1 => -1,
                        _ => 0,
                    };
                }
            }
            let mut one = SparseVec::new();
            one.insert(m.e.clone(), RatQ::one());
            linalg::axpy(&mut flat, &(c * &RatQ::q_pow(shift)), &one);
        }
        let mut out = SparseVec::new();
        let degrees: BTreeSet<usize> = flat.keys().map(Word::len).collect();
        for d in degrees {
            let part: SparseVec<Word> = flat.iter().filter(|(w, _)| w.len() == d).map(|(w, c)| (w.clone(), c.clone())).collect();
            out.extend(self.ideal(d).reduce(&part));
        }
        Some(out)
    }
}

/// Root vectors whose root involves `α_r`, and their closure under the
/// adjoint action of the Levi factor, in the dual of the Grassmannian.
pub fn grassmann_restriction(t: &TangentSpace, r: usize, side: AdjointSide) -> Result<GrassmannReport, CalculusError> {
    if t.word().is_none() {
        return Err(CalculusError::NeedsWord);
    }
    if r == 0 || r > t.n {
        return Err(CalculusError::Index { index: r, n: t.n });
    }
    let basis: Vec<TangentVector> = t
        .basis
        .iter()
        .filter(|b| b.root.is_some_and(|x| x.contains_simple(r)))
        .cloned()
        .collect();
    let mut quot = LeviQuotient::new(t.n, r);
    let mut span: Echelon<Word> = Echelon::new();
    for b in &basis {
        span.insert(&quot.image(&b.elem).expect("positive part"));
    }
    let u = Uq::get(t.n);
    let mut failures = Vec::new();
    for (name, y) in levi_generators(t.n, r) {
        for b in &basis {
            let img = u.adjoint(&y, &b.elem, side);
            if !quot.image(&img).is_some_and(|v| span.contains(&v)) {
                failures.push((name.clone(), format!("e{}", b.label)));
            }
        }
    }
    Ok(GrassmannReport { r, basis, ad_closed: failures.is_empty(), failures })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KernelReport {
    pub dimension: usize,
    pub basis: Vec<OqElement>,
}

/// Joint kernel of `E_γ |> -` on the span of `words`, modulo `O_q`-equality.
pub fn dbar_kernel(words: &[OqWord], t: &TangentSpace) -> Result<KernelReport, CalculusError> {
    let ops: Vec<UqElement> = t.basis.iter().map(|b| b.elem.clone()).collect();
    let basis = oq::joint_kernel(t.n, words, &ops)?;
    Ok(KernelReport { dimension: basis.len(), basis })
}

/// The same kernel for the simple `E_i` alone.
pub fn simple_kernel(words: &[OqWord], n: usize) -> Result<KernelReport, CalculusError> {
    let u = Uq::get(n);
    let ops: Vec<UqElement> = (1..=n).map(|i| u.e(i).unwrap()).collect();
    let basis = oq::joint_kernel(n, words, &ops)?;
    Ok(KernelReport { dimension: basis.len(), basis })
}

/// Generators of the ideal of the full-flag cotangent space:
/// `u_ij (i<j)`, `u_kk - 1`, `u_ji u_kl (j>i, k<l)`, `u_ji u_lk (j>i, l>k, j≠k)`.
pub fn ideal_generators(n: usize) -> Vec<OqElement> {
    let d = n + 1;
    let mut out = Vec::new();
    for i in 1..=d {
        for j in i + 1..=d {
            out.push(OqElement::u(i, j));
        }
    }
    for k in 1..=d {
        out.push(OqElement::u(k, k).sub(&OqElement::one()));
    }
    for i in 1..=d {
        for j in i + 1..=d {
            for k in 1..=d {
                for l in k + 1..=d {
                    out.push(OqElement::u(j, i).mul(&OqElement::u(k, l)));
                }
                for l in k + 1..=d {
                    if j != k {
                        out.push(OqElement::u(j, i).mul(&OqElement::u(l, k)));
                    }
                }
            }
        }
    }
    out
}

/// The five relation families for the convex order of the nice word.
pub fn relation_families(t: &TangentSpace) -> Vec<FreeElement> {
    let n = t.n;
    let e = |j: usize, i: usize| t.letter(Root::new(i, j)).expect("nice basis");
    let tensor = |a: u8, b: u8, c: RatQ| FreeElement::term(Word::from_slice(&[a, b]), c);
    let one = RatQ::one;
    let mut out = Vec::new();
    let d = n + 1;
    for i in 1..=d {
        for ip in i + 1..=d {
            for j in ip + 1..=d {
                out.push(tensor(e(j, i), e(j, ip), one()).add(&tensor(e(j, ip), e(j, i), RatQ::q())));
            }
        }
    }
    for i in 1..=d {
        for j in i + 1..=d {
            for jp in j + 1..=d {
                out.push(tensor(e(j, i), e(jp, i), one()).add(&tensor(e(jp, i), e(j, i), RatQ::q())));
            }
        }
    }
    for r in positive_roots(n) {
        out.push(tensor(e(r.j, r.i), e(r.j, r.i), one()));
    }
    for i in 1..=d {
        for ip in i + 1..=d {
            for j in ip + 1..=d {
                for jp in j + 1..=d {
                    out.push(
                        tensor(e(j, ip), e(jp, i), one())
                            .add(&tensor(e(jp, i), e(j, ip), one()))
                            .add(&tensor(e(jp, ip), e(j, i), RatQ::nu())),
                    );
                }
            }
        }
    }
    for x in positive_roots(n) {
        for y in positive_roots(n) {
            // e_jk with j = x.j, k = x.i; e_j'k' with j' > j, k' > k
            let (j, k, jp, kp) = (x.j, x.i, y.j, y.i);
            if jp > j && kp > k {
                let c = RatQ::q_pow(-i32::from(j == kp));
                out.push(tensor(e(j, k), e(jp, kp), one()).add(&tensor(e(jp, kp), e(j, k), c)));
            }
        }
    }
    out
}

/// `E_ji ⊗ K_{j-1..i} + q^-1 ν Σ_a E_ai ⊗ E_ja K_{a-1..i} + 1 ⊗ E_ji`.
pub fn coproduct_closed_form(n: usize, r: Root) -> Result<TensorSquare, CalculusError> {
    let u = Uq::get(n);
    let kspan = |lo: usize, hi: usize| {
        let mut k = vec![0; n];
        for x in &mut k[lo - 1..hi] {
            *x = 1;
        }
        u.k_vec(&k)
    };
    let (i, j) = (r.i, r.j);
    let eji = u.build_eji(i, j)?;
    let c = RatQ::q_pow(-1) * RatQ::nu();
    let mut pairs = vec![(RatQ::one(), eji.clone(), kspan(i, j - 1)), (RatQ::one(), u.one(), eji)];
    for a in i + 1..j {
        let right = u.mul(&u.build_eji(a, j)?, &kspan(i, a - 1));
        pairs.push((c.clone(), u.build_eji(i, a)?, right));
    }
    Ok(TensorSquare::from_pairs(n, &pairs))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurveyRow {
    pub word: WeylWord,
    pub class_size: usize,
    pub verdict: Verdict,
    pub dims: Option<Vec<u128>>,
    pub classical: Option<bool>,
}

/// Verdict and exterior dimensions for one reduced word.
pub fn survey_row(w: &WeylWord, n: Rank, class_size: usize, kmax: Option<usize>) -> Result<SurveyRow, CalculusError> {
    let t = TangentSpace::from_word(w, n)?;
    let verdict = coideal_check(&t).verdict;
    let (dims, classical) = if verdict.admits_calculus() {
        let table = exterior_dims(&t, kmax)?;
        (Some(table.dims), table.classical)
    } else {
        (None, None)
    };
    Ok(SurveyRow { word: w.clone(), class_size, verdict, dims, classical })
}

/// One row per commutation class, in class order, computed in parallel.
pub fn survey(n: Rank, budget: u128, kmax: Option<usize>) -> Result<Vec<SurveyRow>, CalculusError> {
    survey_classes(&weyl::commutation_classes_with_budget(n, budget)?, n, kmax)
}

/// [`survey`] over an already enumerated class graph.
pub fn survey_classes(g: &weyl::ClassGraph, n: Rank, kmax: Option<usize>) -> Result<Vec<SurveyRow>, CalculusError> {
    g.nodes
        .par_iter()
        .map(|c| survey_row(&c.representative, n, c.size, kmax))
        .collect()
}

/// The classes of the nice word and its opposite.
pub fn nice_classes(n: usize) -> BTreeSet<WeylWord> {
    let w = weyl::nice_word(n);
    [weyl::canonical_representative(&w), weyl::canonical_representative(&weyl::opposite_word(&w, n))]
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nice(n: usize) -> TangentSpace {
        TangentSpace::from_word(&weyl::nice_word(n), Rank::new(n).unwrap()).unwrap()
    }

    #[test]
    fn sl2() {
        let t = nice(1);
        assert_eq!(t.dim(), 1);
        let rel = quadratic_relations(&t);
        assert_eq!(rel.all(), vec![FreeElement::letters(&[0, 0])]);
        assert_eq!(exterior_dims(&t, None).unwrap().dims, vec![1, 1, 0]);
    }

    #[test]
    fn sl3_nice() {
        let t = nice(2);
        let labels: Vec<&str> = t.basis.iter().map(|b| b.label.as_str()).collect();
        assert_eq!(labels, vec!["32", "31", "21"]);
        assert_eq!(coideal_check(&t).verdict, Verdict::TwoSided);
        let rel = quadratic_relations(&t);
        assert_eq!(rel.dim(), 6);
        assert!(rel.same_span(&relation_families(&t)));
        let dims = exterior_dims(&t, None).unwrap();
        assert_eq!(dims.dims, vec![1, 3, 3, 1, 0]);
        assert_eq!(dims.classical, Some(true));
    }

    #[test]
    fn theta_family() {
        let mut vars = Vars::new();
        vars.insert("t".into(), RatQ::one());
        let rank = Rank::new(2).unwrap();
        let t = TangentSpace::from_exprs(rank, &["E1", "E2", "[E2,E1]_{t}"], &vars).unwrap();
        assert_eq!(exterior_dims(&t, Some(3)).unwrap().dims, vec![1, 3, 1, 0]);
        vars.insert("t".into(), RatQ::q_pow(-1));
        let t = TangentSpace::from_exprs(rank, &["E1", "E2", "[E2,E1]_{t}"], &vars).unwrap();
        assert_eq!(exterior_dims(&t, None).unwrap().dims, vec![1, 3, 3, 1, 0]);
        assert!(TangentSpace::from_exprs(rank, &["E1", "2 E1"], &vars).is_err());
        assert!(TangentSpace::from_exprs(rank, &["E1 + E2"], &vars).is_err());
    }

    #[test]
    fn lines_sl3() {
        let t = nice(2);
        assert_eq!(line_decomposition(&t, 0).unwrap(), vec![vec![0, 0]]);
        assert_eq!(line_decomposition(&t, 1).unwrap(), vec![vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(line_decomposition(&t, 3).unwrap(), vec![vec![2, 2]]);
    }
}
