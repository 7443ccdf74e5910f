//! Type `A_n` root system and Weyl group combinatorics.
//!
//! Simple reflections are numbered `1..=n`; `s_i` swaps `e_i` and `e_{i+1}`.
//! Positive roots are `alpha_ij = e_i - e_j` with `i < j`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_RANK_CAP: usize = 6;
/// Upper bound on the number of reduced words enumerated for class graphs.
pub const DEFAULT_WORD_BUDGET: u128 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeylError {
    #[error("index {index} out of range for rank {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("rank {n} exceeds the cap {cap}")]
    RankAboveCap { n: usize, cap: usize },
    #[error("word {0} is not reduced")]
    NotReduced(String),
    #[error("word {0} is not a reduced word of the longest element")]
    NotLongest(String),
    #[error("rank {n} has {count} reduced words of the longest element, above the budget of {budget}")]
    TooManyWords { n: usize, count: u128, budget: u128 },
    #[error("roots {0} and {1} are not orthogonal")]
    NotOrthogonal(Root, Root),
    #[error("roots {0} and {1} are orthogonal but not comparable")]
    Incomparable(Root, Root),
    #[error("cannot parse word `{0}`")]
    BadWord(String),
}

/// Rank of `sl_{n+1}`, checked against a cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Rank(usize);

impl Rank {
    pub fn new(n: usize) -> Result<Self, WeylError> {
        Self::with_cap(n, DEFAULT_RANK_CAP)
    }

    pub fn with_cap(n: usize, cap: usize) -> Result<Self, WeylError> {
        if n == 0 {
            return Err(WeylError::ZeroRank);
        }
        if n > cap {
            return Err(WeylError::RankAboveCap { n, cap });
        }
        Ok(Rank(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// `|Delta^+| = n(n+1)/2`.
    pub fn num_positive_roots(self) -> usize {
        self.0 * (self.0 + 1) / 2
    }
}

/// Positive root `alpha_ij = e_i - e_j`, `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Root {
    pub i: usize,
    pub j: usize,
}

impl Root {
    pub fn new(i: usize, j: usize) -> Self {
        assert!(i < j, "positive root needs i < j");
        Root { i, j }
    }

    pub fn simple(i: usize) -> Self {
        Root { i, j: i + 1 }
    }

    pub fn height(self) -> usize {
        self.j - self.i
    }

    pub fn is_simple(self) -> bool {
        self.height() == 1
    }

    /// Coordinates in the simple-root basis, length `n`.
    pub fn weight(self, n: usize) -> Vec<i32> {
        let mut w = vec![0; n];
        for k in self.i..self.j {
            w[k - 1] = 1;
        }
        w
    }

    /// Whether `alpha_r` occurs in the support.
    pub fn contains_simple(self, r: usize) -> bool {
        self.i <= r && r < self.j
    }

    fn eps(self, n: usize) -> Vec<i32> {
        let mut v = vec![0; n + 1];
        v[self.i - 1] = 1;
        v[self.j - 1] = -1;
        v
    }

    /// Label `ji` used for cotangent generators `e_ji`.
    pub fn label(self) -> String {
        if self.j <= 9 {
            format!("{}{}", self.j, self.i)
        } else {
            format!("{},{}", self.j, self.i)
        }
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}{}", self.i, self.j)
    }
}

/// All positive roots of `A_n`, ordered by `(i, j)`.
pub fn positive_roots(n: usize) -> Vec<Root> {
    let mut v = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n + 1 {
            v.push(Root { i, j });
        }
    }
    v
}

/// Euclidean inner product of the `e`-vectors.
pub fn root_pairing(b: Root, g: Root) -> i32 {
    let d = |x: usize, y: usize| i32::from(x == y);
    d(b.i, g.i) - d(b.i, g.j) - d(b.j, g.i) + d(b.j, g.j)
}

/// The prime pair of an orthogonal comparable pair: crossing roots
/// `{alpha_ab, alpha_cd}` with `a < c < b < d` map to the nested pair
/// `(alpha_ad, alpha_cb)`, and nested pairs map back to the crossing pair.
pub fn prime_pair(b: Root, g: Root) -> Result<(Root, Root), WeylError> {
    if root_pairing(b, g) != 0 || b == g {
        return Err(WeylError::NotOrthogonal(b, g));
    }
    let (x, y) = if b.i < g.i { (b, g) } else { (g, b) };
    if x.i < y.i && y.i < x.j && x.j < y.j {
        return Ok((Root::new(x.i, y.j), Root::new(y.i, x.j)));
    }
    if x.i < y.i && y.j < x.j {
        // nested: outer x = alpha_ad, inner y = alpha_cb
        return Ok((Root::new(x.i, y.j), Root::new(y.i, x.j)));
    }
    Err(WeylError::Incomparable(b, g))
}

/// A word in the simple reflections.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct WeylWord(pub Vec<u8>);

impl WeylWord {
    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn check(&self, n: usize) -> Result<(), WeylError> {
        for &l in &self.0 {
            if l == 0 || l as usize > n {
                return Err(WeylError::IndexOutOfRange { index: l as usize, n });
            }
        }
        Ok(())
    }

    /// Digits when every letter is below 10, comma-separated otherwise.
    pub fn render(&self) -> String {
        if self.0.iter().all(|l| *l <= 9) {
            self.0.iter().map(|l| l.to_string()).collect()
        } else {
            self.0.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
        }
    }
}

impl fmt::Display for WeylWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Parses `nice`, `nice-op`, a digit string (rank at most 9) or a
/// comma-separated list.
pub fn parse_word(s: &str, n: usize) -> Result<WeylWord, WeylError> {
    let s = s.trim();
    let w = match s {
        "nice" => nice_word(n),
        "nice-op" => opposite_word(&nice_word(n), n),
        _ if s.contains(',') => WeylWord(
            s.split(',')
                .map(|t| t.trim().parse::<u8>().map_err(|_| WeylError::BadWord(s.to_string())))
                .collect::<Result<_, _>>()?,
        ),
        _ if !s.is_empty() && s.chars().all(|c| c.is_ascii_digit()) => {
            if n > 9 {
                return Err(WeylError::BadWord(s.to_string()));
            }
            WeylWord(s.bytes().map(|b| b - b'0').collect())
        }
        _ => return Err(WeylError::BadWord(s.to_string())),
    };
    w.check(n)?;
    Ok(w)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordProps {
    /// One-line notation of the permutation `w`, values `1..=n+1`.
    pub permutation: Vec<usize>,
    pub length: usize,
    pub is_reduced: bool,
    pub is_longest: bool,
}

fn permutation(w: &WeylWord, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (1..=n + 1).collect();
    for &s in w.letters() {
        p.swap(s as usize - 1, s as usize);
    }
    p
}

fn inversions(p: &[usize]) -> usize {
    let mut c = 0;
    for a in 0..p.len() {
        for b in a + 1..p.len() {
            if p[a] > p[b] {
                c += 1;
            }
        }
    }
    c
}

pub fn word_props(w: &WeylWord, n: usize) -> Result<WordProps, WeylError> {
    w.check(n)?;
    let permutation = permutation(w, n);
    let inv = inversions(&permutation);
    let is_reduced = inv == w.len();
    Ok(WordProps {
        permutation,
        length: inv,
        is_reduced,
        is_longest: is_reduced && w.len() == n * (n + 1) / 2,
    })
}

pub fn require_longest(w: &WeylWord, n: usize) -> Result<(), WeylError> {
    let p = word_props(w, n)?;
    if !p.is_reduced {
        return Err(WeylError::NotReduced(w.render()));
    }
    if !p.is_longest {
        return Err(WeylError::NotLongest(w.render()));
    }
    Ok(())
}

/// `(s_n ... s_1)(s_n ... s_2) ... (s_n s_{n-1}) s_n`.
pub fn nice_word(n: usize) -> WeylWord {
    let mut v = Vec::new();
    for low in 1..=n {
        for k in (low..=n).rev() {
            v.push(k as u8);
        }
    }
    WeylWord(v)
}

/// Applies `s_i -> s_{n+1-i}`.
pub fn opposite_word(w: &WeylWord, n: usize) -> WeylWord {
    WeylWord(w.0.iter().map(|l| (n + 1) as u8 - l).collect())
}

/// `beta_k = s_{i_1} ... s_{i_{k-1}}(alpha_{i_k})`.
pub fn beta_sequence(w: &WeylWord, n: usize) -> Result<Vec<Root>, WeylError> {
    require_longest(w, n)?;
    let mut out = Vec::with_capacity(w.len());
    for k in 0..w.len() {
        let mut v = Root::simple(w.0[k] as usize).eps(n);
        for &s in w.0[..k].iter().rev() {
            v.swap(s as usize - 1, s as usize);
        }
        let a = v.iter().position(|x| *x == 1).unwrap() + 1;
        let b = v.iter().position(|x| *x == -1).unwrap() + 1;
        debug_assert!(a < b, "reduced words give positive roots");
        out.push(Root::new(a, b));
    }
    Ok(out)
}

/// Whether every root sum lies strictly between its summands.
pub fn is_convex(seq: &[Root]) -> bool {
    let pos: HashMap<Root, usize> = seq.iter().enumerate().map(|(k, r)| (*r, k)).collect();
    for (a, x) in seq.iter().enumerate() {
        for (b, y) in seq.iter().enumerate().skip(a + 1) {
            let sum = if x.j == y.i {
                Some(Root::new(x.i, y.j))
            } else if y.j == x.i {
                Some(Root::new(y.i, x.j))
            } else {
                None
            };
            if let Some(s) = sum {
                match pos.get(&s) {
                    Some(&p) if a < p && p < b => {}
                    _ => return false,
                }
            }
        }
    }
    true
}

/// Number of reduced words of the longest element: the number of standard
/// tableaux of staircase shape.
pub fn count_reduced_words(n: usize) -> u128 {
    let d = n * (n + 1) / 2;
    let mut num: u128 = 1;
    let mut hooks: Vec<u128> = Vec::new();
    // row r (0-based) has n - r boxes; hook of box (r, c) = arm + leg + 1
    for r in 0..n {
        let len = n - r;
        for c in 0..len {
            let arm = len - c - 1;
            let leg = (r + 1..n).filter(|rr| n - rr > c).count();
            hooks.push((arm + leg + 1) as u128);
        }
    }
    let mut hooks_left = hooks;
    for k in 1..=d as u128 {
        num *= k;
        hooks_left.retain(|h| {
            if num.is_multiple_of(*h) {
                num /= h;
                false
            } else {
                true
            }
        });
    }
    for h in hooks_left {
        num /= h;
    }
    num
}

/// Every reduced word of the longest element, in lexicographic order.
pub fn reduced_words(n: usize, budget: u128) -> Result<Vec<WeylWord>, WeylError> {
    let count = count_reduced_words(n);
    if count > budget {
        return Err(WeylError::TooManyWords { n, count, budget });
    }
    let d = n * (n + 1) / 2;
    let mut out = Vec::with_capacity(count as usize);
    let mut perm: Vec<usize> = (1..=n + 1).collect();
    let mut cur = Vec::with_capacity(d);
    fn rec(perm: &mut Vec<usize>, cur: &mut Vec<u8>, d: usize, n: usize, out: &mut Vec<WeylWord>) {
        if cur.len() == d {
            out.push(WeylWord(cur.clone()));
            return;
        }
        for i in 1..=n {
            if perm[i - 1] < perm[i] {
                perm.swap(i - 1, i);
                cur.push(i as u8);
                rec(perm, cur, d, n, out);
                cur.pop();
                perm.swap(i - 1, i);
            }
        }
    }
    rec(&mut perm, &mut cur, d, n, &mut out);
    Ok(out)
}

/// All words reachable from `w` by commuting adjacent distant letters.
pub fn commutation_class(w: &WeylWord) -> BTreeSet<WeylWord> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(w.clone());
    queue.push_back(w.clone());
    while let Some(x) = queue.pop_front() {
        for k in 0..x.len().saturating_sub(1) {
            if x.0[k].abs_diff(x.0[k + 1]) > 1 {
                let mut y = x.clone();
                y.0.swap(k, k + 1);
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
    }
    seen
}

/// Lexicographically smallest member of the commutation class.
pub fn canonical_representative(w: &WeylWord) -> WeylWord {
    commutation_class(w).into_iter().min_by(|a, b| a.0.cmp(&b.0)).unwrap()
}

/// All words obtained from `w` by one braid move `aba -> bab`.
pub fn braid_neighbours(w: &WeylWord) -> Vec<WeylWord> {
    let mut out = Vec::new();
    for k in 0..w.len().saturating_sub(2) {
        let (a, b, c) = (w.0[k], w.0[k + 1], w.0[k + 2]);
        if a == c && a.abs_diff(b) == 1 {
            let mut y = w.clone();
            y.0[k] = b;
            y.0[k + 1] = a;
            y.0[k + 2] = b;
            out.push(y);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassNode {
    pub representative: WeylWord,
    pub size: usize,
}

/// Commutation classes of reduced words of `w0` and the braid-move graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassGraph {
    pub n: usize,
    pub nodes: Vec<ClassNode>,
    /// Undirected edges `(a, b)` with `a < b`, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Image of each class under the opposite involution.
    pub opposite: Vec<usize>,
}

pub fn commutation_classes(n: Rank) -> Result<ClassGraph, WeylError> {
    commutation_classes_with_budget(n, DEFAULT_WORD_BUDGET)
}

pub fn commutation_classes_with_budget(rank: Rank, budget: u128) -> Result<ClassGraph, WeylError> {
    let n = rank.get();
    let words = reduced_words(n, budget)?;
    let index: HashMap<&[u8], usize> = words.iter().enumerate().map(|(k, w)| (w.0.as_slice(), k)).collect();
    let mut parent: Vec<usize> = (0..words.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (k, w) in words.iter().enumerate() {
        for t in 0..w.len().saturating_sub(1) {
            if w.0[t].abs_diff(w.0[t + 1]) > 1 {
                let mut y = w.0.clone();
                y.swap(t, t + 1);
                let j = index[y.as_slice()];
                let (a, b) = (find(&mut parent, k), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    // words are generated in lexicographic order, so the first member seen
    // of each class is its smallest
    let mut root_to_class: BTreeMap<usize, usize> = BTreeMap::new();
    let mut reps: Vec<(usize, usize)> = Vec::new();
    let mut word_class = vec![0usize; words.len()];
    for k in 0..words.len() {
        let r = find(&mut parent, k);
        let c = *root_to_class.entry(r).or_insert_with(|| {
            reps.push((k, 0));
            reps.len() - 1
        });
        reps[c].1 += 1;
        word_class[k] = c;
    }
    let mut order: Vec<usize> = (0..reps.len()).collect();
    order.sort_by(|a, b| words[reps[*a].0].0.cmp(&words[reps[*b].0].0));
    let mut relabel = vec![0; reps.len()];
    for (new, old) in order.iter().enumerate() {
        relabel[*old] = new;
    }
    let nodes: Vec<ClassNode> = order
        .iter()
        .map(|c| ClassNode { representative: words[reps[*c].0].clone(), size: reps[*c].1 })
        .collect();
    let mut edges = BTreeSet::new();
    for (k, w) in words.iter().enumerate() {
        let a = relabel[word_class[k]];
        for y in braid_neighbours(w) {
            let b = relabel[word_class[index[y.0.as_slice()]]];
            if a != b {
                edges.insert((a.min(b), a.max(b)));
            }
        }
    }
    let opposite = nodes
        .iter()
        .map(|node| {
            let o = opposite_word(&node.representative, n);
            relabel[word_class[index[o.0.as_slice()]]]
        })
        .collect();
    Ok(ClassGraph { n, nodes, edges: edges.into_iter().collect(), opposite })
}

impl ClassGraph {
    /// Index of the class containing `w`.
    pub fn class_of(&self, w: &WeylWord) -> Option<usize> {
        let rep = canonical_representative(w);
        self.nodes.iter().position(|c| c.representative == rep)
    }

    pub fn neighbours(&self, c: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| if a == c { Some(b) } else if b == c { Some(a) } else { None })
            .collect();
        v.sort_unstable();
        v
    }

    /// Graphviz rendering; involution edges are drawn blue and dashed.
    pub fn to_dot(&self, involution: bool) -> String {
        let mut s = String::new();
        s.push_str(&format!("graph classes_a{} {{\n", self.n));
        s.push_str("  node [shape=box, fontname=\"monospace\"];\n");
        for (k, node) in self.nodes.iter().enumerate() {
            s.push_str(&format!(
                "  c{k} [label=\"{}\", tooltip=\"{} words\"];\n",
                node.representative, node.size
            ));
        }
        for (a, b) in &self.edges {
            s.push_str(&format!("  c{a} -- c{b};\n"));
        }
        if involution {
            for (a, b) in self.opposite.iter().enumerate() {
                if a <= *b {
                    s.push_str(&format!("  c{a} -- c{b} [color=blue, style=dashed, constraint=false];\n"));
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> WeylWord {
        parse_word(s, 9).unwrap()
    }

    #[test]
    fn props() {
        let p = word_props(&w("321323"), 3).unwrap();
        assert!(p.is_reduced && p.is_longest);
        assert!(!word_props(&w("11"), 3).unwrap().is_reduced);
        let p = word_props(&nice_word(4), 4).unwrap();
        assert_eq!(p.length, 10);
        assert!(p.is_longest);
        assert!(word_props(&w("14"), 3).is_err());
    }

    #[test]
    fn nice_words() {
        assert_eq!(nice_word(1).render(), "1");
        assert_eq!(nice_word(2).render(), "212");
        assert_eq!(nice_word(3).render(), "321323");
        assert_eq!(nice_word(4).render(), "4321432434");
    }

    #[test]
    fn beta_sequences() {
        let b = beta_sequence(&w("212"), 2).unwrap();
        assert_eq!(b, vec![Root::new(2, 3), Root::new(1, 3), Root::new(1, 2)]);
        let b = beta_sequence(&nice_word(3), 3).unwrap();
        let expect = [(3, 4), (2, 4), (1, 4), (2, 3), (1, 3), (1, 2)];
        assert_eq!(b, expect.iter().map(|(i, j)| Root::new(*i, *j)).collect::<Vec<_>>());
        assert!(beta_sequence(&w("21"), 2).is_err());
    }

    #[test]
    fn opposite() {
        assert_eq!(opposite_word(&w("321323"), 3).render(), "123121");
        assert_eq!(opposite_word(&w("121"), 2).render(), "212");
        let c = w("312132");
        assert!(commutation_class(&c).contains(&opposite_word(&c, 3)));
    }

    #[test]
    fn pairings() {
        assert_eq!(root_pairing(Root::simple(1), Root::simple(1)), 2);
        assert_eq!(root_pairing(Root::simple(1), Root::simple(2)), -1);
        assert_eq!(root_pairing(Root::new(1, 2), Root::new(3, 4)), 0);
        assert_eq!(prime_pair(Root::new(1, 4), Root::new(2, 3)).unwrap(), (Root::new(1, 3), Root::new(2, 4)));
        assert_eq!(prime_pair(Root::new(1, 3), Root::new(2, 4)).unwrap(), (Root::new(1, 4), Root::new(2, 3)));
        assert!(prime_pair(Root::new(1, 2), Root::new(2, 3)).is_err());
        assert!(matches!(prime_pair(Root::new(1, 2), Root::new(3, 4)), Err(WeylError::Incomparable(..))));
    }

    #[test]
    fn word_counts() {
        assert_eq!(count_reduced_words(2), 2);
        assert_eq!(count_reduced_words(3), 16);
        assert_eq!(count_reduced_words(4), 768);
        assert_eq!(count_reduced_words(5), 292864);
        for n in 1..=4 {
            assert_eq!(reduced_words(n, DEFAULT_WORD_BUDGET).unwrap().len() as u128, count_reduced_words(n));
        }
    }

    #[test]
    fn class_graphs() {
        let g = commutation_classes(Rank::new(2).unwrap()).unwrap();
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges, vec![(0, 1)]);
        let g = commutation_classes(Rank::new(3).unwrap()).unwrap();
        assert_eq!(g.nodes.len(), 8);
        assert_eq!(g.edges.len(), 8);
        let g = commutation_classes(Rank::new(4).unwrap()).unwrap();
        assert_eq!(g.nodes.len(), 62);
        let err = commutation_classes_with_budget(Rank::new(6).unwrap(), 1000).unwrap_err();
        assert!(matches!(err, WeylError::TooManyWords { .. }));
        assert!(Rank::new(7).is_err());
    }
}
