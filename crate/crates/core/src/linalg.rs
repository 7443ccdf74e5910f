//! Sparse Gaussian elimination over `Q(q)`.
//!
//! Vectors are ordered maps from an ordered column key to a coefficient. The
//! pivot of a row is its greatest key, so elimination order follows the key
//! order (for words this is the active monomial order).

use std::collections::BTreeMap;
use std::ops::Bound;

use crate::scalars::RatQ;

pub type SparseVec<K> = BTreeMap<K, RatQ>;

/// `acc += c * v`, pruning zeros.
pub fn axpy<K: Ord + Clone>(acc: &mut SparseVec<K>, c: &RatQ, v: &SparseVec<K>) {
    if c.is_zero() {
        return;
    }
    for (k, x) in v {
        let t = c * x;
        match acc.get_mut(k) {
            Some(y) => {
                *y += &t;
                if y.is_zero() {
                    acc.remove(k);
                }
            }
            None => {
                acc.insert(k.clone(), t);
            }
        }
    }
}

pub fn scale<K: Ord + Clone>(v: &SparseVec<K>, c: &RatQ) -> SparseVec<K> {
    if c.is_zero() {
        return SparseVec::new();
    }
    v.iter().map(|(k, x)| (k.clone(), x * c)).collect()
}

/// Row-echelon form with monic rows, built incrementally.
#[derive(Clone, Debug)]
pub struct Echelon<K: Ord + Clone> {
    rows: Vec<SparseVec<K>>,
    pivots: BTreeMap<K, usize>,
}

impl<K: Ord + Clone> Default for Echelon<K> {
    fn default() -> Self {
        Echelon { rows: Vec::new(), pivots: BTreeMap::new() }
    }
}

impl<K: Ord + Clone> Echelon<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[SparseVec<K>] {
        &self.rows
    }

    pub fn pivot_keys(&self) -> impl Iterator<Item = &K> {
        self.pivots.keys()
    }

    fn next_pivot_below(&self, v: &SparseVec<K>, bound: Option<&K>) -> Option<(K, usize)> {
        let range = match bound {
            Some(b) => v.range((Bound::Unbounded, Bound::Excluded(b))),
            None => v.range::<K, _>(..),
        };
        for (k, _) in range.rev() {
            if let Some(&r) = self.pivots.get(k) {
                return Some((k.clone(), r));
            }
        }
        None
    }

    /// Reduces `v` modulo the row space.
    pub fn reduce(&self, v: &SparseVec<K>) -> SparseVec<K> {
        self.reduce_tracked(v, &mut |_, _| {})
    }

    fn reduce_tracked(
        &self,
        v: &SparseVec<K>,
        track: &mut dyn FnMut(usize, &RatQ),
    ) -> SparseVec<K> {
        let mut v = v.clone();
        let mut bound: Option<K> = None;
        while let Some((k, r)) = self.next_pivot_below(&v, bound.as_ref()) {
            let c = -v[&k].clone();
            axpy(&mut v, &c, &self.rows[r]);
            track(r, &c);
            bound = Some(k);
        }
        v
    }

    pub fn contains(&self, v: &SparseVec<K>) -> bool {
        self.reduce(v).is_empty()
    }

    /// Inserts `v`; returns false when it was already in the span.
    pub fn insert(&mut self, v: &SparseVec<K>) -> bool {
        let r = self.reduce(v);
        self.push_reduced(r)
    }

    fn push_reduced(&mut self, r: SparseVec<K>) -> bool {
        let Some((k, lead)) = r.iter().next_back() else {
            return false;
        };
        let k = k.clone();
        let inv = lead.inv().expect("nonzero pivot");
        let r = scale(&r, &inv);
        self.pivots.insert(k, self.rows.len());
        self.rows.push(r);
        true
    }

    /// Canonical reduced row-echelon basis, sorted by decreasing pivot.
    pub fn rref(&self) -> Vec<SparseVec<K>> {
        let order: Vec<(K, usize)> = self.pivots.iter().map(|(k, r)| (k.clone(), *r)).collect();
        let mut out: Vec<SparseVec<K>> = Vec::with_capacity(order.len());
        // process from the smallest pivot upward; each row is reduced by the
        // already-final rows of smaller pivot
        let mut done: Echelon<K> = Echelon::new();
        for (_, r) in order.iter() {
            let row = &self.rows[*r];
            let mut v = row.clone();
            let lead_key = row.keys().next_back().unwrap().clone();
            let lower: Vec<(K, usize)> = done
                .pivots
                .range::<K, _>(..lead_key.clone())
                .map(|(k, i)| (k.clone(), *i))
                .collect();
            for (k, i) in lower.iter().rev() {
                if let Some(c) = v.get(k).cloned() {
                    axpy(&mut v, &(-c), &done.rows[*i]);
                }
            }
            done.pivots.insert(lead_key, done.rows.len());
            done.rows.push(v);
        }
        for (_, i) in done.pivots.iter().rev() {
            out.push(done.rows[*i].clone());
        }
        out
    }
}

/// Basis of the relations `sum x_i v_i = 0` among the given vectors.
pub fn kernel<K: Ord + Clone>(vectors: &[SparseVec<K>]) -> Vec<SparseVec<usize>> {
    let mut ech: Echelon<K> = Echelon::new();
    let mut combos: Vec<SparseVec<usize>> = Vec::new();
    let mut out = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        let mut combo: SparseVec<usize> = SparseVec::new();
        combo.insert(i, RatQ::one());
        let mut v = v.clone();
        let mut bound: Option<K> = None;
        while let Some((k, r)) = ech.next_pivot_below(&v, bound.as_ref()) {
            let c = -v[&k].clone();
            axpy(&mut v, &c, &ech.rows[r]);
            axpy(&mut combo, &c, &combos[r]);
            bound = Some(k);
        }
        match v.iter().next_back() {
            None => out.push(combo),
            Some((_, lead)) => {
                let inv = lead.inv().unwrap();
                combos.push(scale(&combo, &inv));
                ech.push_reduced(v);
            }
        }
    }
    out
}

/// Rank of a set of vectors.
pub fn rank<K: Ord + Clone>(vectors: &[SparseVec<K>]) -> usize {
    let mut e = Echelon::new();
    for v in vectors {
        e.insert(v);
    }
    e.rank()
}

/// Annihilator of a subspace of `F^m` under the standard pairing, as a
/// reduced echelon basis over column indices `0..m`.
pub fn annihilator(space: &[SparseVec<usize>], m: usize) -> Vec<SparseVec<usize>> {
    // x is in the annihilator iff <x, s> = 0 for every s; that is the kernel
    // of the transpose.
    let mut cols: Vec<SparseVec<usize>> = vec![SparseVec::new(); m];
    for (j, s) in space.iter().enumerate() {
        for (i, c) in s {
            cols[*i].insert(j, c.clone());
        }
    }
    let ker = kernel(&cols);
    let mut e = Echelon::new();
    for v in &ker {
        e.insert(v);
    }
    e.rref()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(entries: &[(usize, i64)]) -> SparseVec<usize> {
        entries.iter().map(|(k, c)| (*k, RatQ::int(*c))).collect()
    }

    #[test]
    fn kernel_and_rank() {
        let vs = vec![v(&[(0, 1), (1, 1)]), v(&[(1, 1)]), v(&[(0, 2), (1, 3)])];
        assert_eq!(rank(&vs), 2);
        let k = kernel(&vs);
        assert_eq!(k.len(), 1);
        let mut acc = SparseVec::new();
        for (i, c) in &k[0] {
            axpy(&mut acc, c, &vs[*i]);
        }
        assert!(acc.is_empty());
    }

    #[test]
    fn rref_is_canonical() {
        let mut a = Echelon::new();
        a.insert(&v(&[(0, 1), (2, 1)]));
        a.insert(&v(&[(1, 1), (2, 1)]));
        let mut b = Echelon::new();
        b.insert(&v(&[(0, 1), (1, -1)]));
        b.insert(&v(&[(0, 2), (1, 1), (2, 3)]));
        assert_eq!(a.rref(), b.rref());
    }

    #[test]
    fn annihilator_dims() {
        let s = vec![v(&[(0, 1), (1, 1)])];
        let a = annihilator(&s, 3);
        assert_eq!(a.len(), 2);
    }
}
