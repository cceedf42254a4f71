//! Enumeration of simple graphs up to isomorphism and their partition into
//! inner, outer, move, Cuntz move and stable classes.
//!
//! A simple graph on `n ≤ 5` vertices is coded as an `n²`-bit integer whose
//! bits, most significant first, list `(k,k)` and then `(i,k), (k,i)` for
//! `i < k`, for `k = 0, 1, …`. The canonical code is the least code over all
//! relabellings. Restricting a canonical code to its first `(n−1)²` bits
//! gives a canonical code again, so codes grow one vertex at a time.

use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use super::decide::{decide, DecideOptions};
use super::outer::{outer_key, OuterKey};
use super::{Relation, Verdict};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::moves::{apply, col_add, row_add, MoveSpec};

pub const ATLAS_MAX: usize = 5;

#[derive(Clone, Copy)]
struct Adj {
    n: usize,
    /// Bit `c` of `rows[r]` is the edge `r → c`.
    rows: [u8; ATLAS_MAX],
}

fn code_block(n: usize, code: u32, d: usize) -> u32 {
    (code >> (n * n - (d + 1) * (d + 1))) & ((1 << (2 * d + 1)) - 1)
}

fn decode(n: usize, code: u32) -> Adj {
    let mut rows = [0u8; ATLAS_MAX];
    let mut t = n * n;
    let mut bit = |r: usize, c: usize, rows: &mut [u8; ATLAS_MAX]| {
        t -= 1;
        if code >> t & 1 == 1 {
            rows[r] |= 1 << c;
        }
    };
    for k in 0..n {
        bit(k, k, &mut rows);
        for i in 0..k {
            bit(i, k, &mut rows);
            bit(k, i, &mut rows);
        }
    }
    Adj { n, rows }
}

/// Bits contributed by placing vertex `v` after the vertices in `perm`.
fn block(adj: &Adj, perm: &[usize], v: usize) -> u32 {
    let mut b = u32::from(adj.rows[v] >> v & 1);
    for &p in perm {
        b = b << 2 | u32::from(adj.rows[p] >> v & 1) << 1 | u32::from(adj.rows[v] >> p & 1);
    }
    b
}

fn is_canonical(n: usize, code: u32) -> bool {
    fn go(adj: &Adj, code: u32, perm: &mut Vec<usize>, used: u8) -> bool {
        let d = perm.len();
        if d == adj.n {
            return true;
        }
        let target = code_block(adj.n, code, d);
        for v in 0..adj.n {
            if used >> v & 1 == 1 {
                continue;
            }
            let b = block(adj, perm, v);
            if b < target {
                return false;
            }
            if b == target {
                perm.push(v);
                let ok = go(adj, code, perm, used | 1 << v);
                perm.pop();
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    let adj = decode(n, code);
    go(&adj, code, &mut Vec::with_capacity(n), 0)
}

fn canonical_code(adj: &Adj) -> u32 {
    fn go(adj: &Adj, perm: &mut Vec<usize>, used: u8, cur: u32, best: &mut u32) {
        let n = adj.n;
        let d = perm.len();
        if d == n {
            *best = (*best).min(cur);
            return;
        }
        let blocks: Vec<(usize, u32)> =
            (0..n).filter(|&v| used >> v & 1 == 0).map(|v| (v, block(adj, perm, v))).collect();
        let min = blocks.iter().map(|&(_, b)| b).min().unwrap();
        let next = cur << (2 * d + 1) | min;
        if *best != u32::MAX && next > *best >> (n * n - (d + 1) * (d + 1)) {
            return;
        }
        for &(v, b) in &blocks {
            if b == min {
                perm.push(v);
                go(adj, perm, used | 1 << v, next, best);
                perm.pop();
            }
        }
    }
    let mut best = u32::MAX;
    go(adj, &mut Vec::with_capacity(adj.n), 0, 0, &mut best);
    best
}

fn adj_of(g: &Graph) -> Adj {
    let mut rows = [0u8; ATLAS_MAX];
    for (r, row) in rows.iter_mut().enumerate().take(g.n()) {
        for c in 0..g.n() {
            if g.get(r, c) > 0 {
                *row |= 1 << c;
            }
        }
    }
    Adj { n: g.n(), rows }
}

fn graph_of(adj: &Adj) -> Graph {
    Graph::from_fn(adj.n, |r, c| u64::from(adj.rows[r] >> c & 1)).expect("n ≥ 1")
}

/// Canonical codes of all simple graphs on `n` vertices, ascending.
fn canonical_codes(n: usize) -> Vec<u32> {
    assert!((1..=ATLAS_MAX).contains(&n));
    if n == 1 {
        return vec![0, 1];
    }
    let width = 2 * n - 1;
    let mut out: Vec<u32> = canonical_codes(n - 1)
        .par_iter()
        .flat_map_iter(|&c| {
            (0..1u32 << width).map(move |ext| c << width | ext).filter(move |&code| is_canonical(n, code))
        })
        .collect();
    out.par_sort_unstable();
    out
}

fn check_m(m: usize) -> Result<()> {
    if !(1..=ATLAS_MAX).contains(&m) {
        return Err(Error::Atlas(format!("M must lie in 1..={ATLAS_MAX}, got {m}")));
    }
    Ok(())
}

/// One graph per isomorphism class of simple graphs on `n` vertices.
pub fn enumerate_simple(n: usize) -> Result<Vec<Graph>> {
    check_m(n)?;
    Ok(canonical_codes(n).iter().map(|&c| graph_of(&decode(n, c))).collect())
}

/// Simple graphs reachable by one elementary step: legal row and column
/// additions, deletion of a regular source, legal collapse.
fn elementary_steps(g: &Graph) -> Vec<Graph> {
    let n = g.n();
    let mut out = Vec::new();
    for a in 0..n {
        for b in (0..n).filter(|&b| b != a) {
            out.extend(row_add(g, a, b, 1).ok());
            out.extend(col_add(g, a, b, 1).ok());
        }
        if n > 1 {
            out.extend(apply(g, &MoveSpec::S { v: a }).ok());
            out.extend(apply(g, &MoveSpec::Col { v: a }).ok());
        }
    }
    out.retain(Graph::is_simple);
    out
}

/// One elementary step through simple graphs with at most `m` vertices
/// relates the two graphs, in either direction.
pub fn elementary_equivalent(ge: &Graph, gf: &Graph, m: usize) -> Result<bool> {
    for g in [ge, gf] {
        if !g.is_simple() {
            return Err(Error::Precondition(format!("graph {g} is not simple")));
        }
        if g.n() > m {
            return Err(Error::Precondition(format!("graph has {} vertices, more than M = {m}", g.n())));
        }
    }
    let (ce, cf) = (ge.canonical_form()?, gf.canonical_form()?);
    if ce == cf {
        return Ok(true);
    }
    for (from, to) in [(ge, &cf), (gf, &ce)] {
        for h in elementary_steps(from) {
            if h.canonical_form()? == *to {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.0[hi] = lo;
        true
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AtlasClass {
    pub representative: Graph,
    /// Number of `M`-vertex graphs in the class.
    pub size: usize,
    pub k0: String,
    pub k_temperatures: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AtlasReport {
    pub m: usize,
    pub relation: String,
    pub graph_count: usize,
    pub class_count: usize,
    pub classes: Vec<AtlasClass>,
    #[serde(skip)]
    pub elapsed: Duration,
}

fn summarize(members: &[Graph]) -> AtlasClass {
    let rep = members[0].canonical_form().unwrap_or_else(|_| members[0].clone());
    let key = outer_key(&rep);
    AtlasClass {
        size: members.len(),
        k0: key.k0.to_string(),
        k_temperatures: key.labels.iter().map(|l| l.to_string()).collect(),
        representative: rep,
    }
}

/// Inner classes of all simple graphs with at most `m` vertices, as lists
/// of `m`-vertex members (possibly empty), plus the node index of each
/// `m`-vertex graph.
struct InnerPartition {
    graphs: Vec<Graph>,
    /// Class label of each `m`-vertex graph, in `graphs` order.
    class_of: Vec<usize>,
    class_count: usize,
    /// For each class: its members with the fewest vertices come first.
    smallest: Vec<Graph>,
}

fn inner_partition(m: usize) -> Result<InnerPartition> {
    check_m(m)?;
    let mut nodes: Vec<(usize, u32)> = Vec::new();
    for n in 1..=m {
        nodes.extend(canonical_codes(n).into_iter().map(|c| (n, c)));
    }
    let index: HashMap<(usize, u32), usize> = nodes.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let edges: Vec<Vec<usize>> = nodes
        .par_iter()
        .map(|&(n, c)| {
            let g = graph_of(&decode(n, c));
            elementary_steps(&g).iter().map(|h| index[&(h.n(), canonical_code(&adj_of(h)))]).collect()
        })
        .collect();
    let mut uf = UnionFind::new(nodes.len());
    for (i, es) in edges.iter().enumerate() {
        for &j in es {
            uf.union(i, j);
        }
    }
    let top: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].0 == m).collect();
    let mut label: BTreeMap<usize, usize> = BTreeMap::new();
    let mut class_of = Vec::with_capacity(top.len());
    for &i in &top {
        let r = uf.find(i);
        let next = label.len();
        class_of.push(*label.entry(r).or_insert(next));
    }
    let mut smallest = vec![None; label.len()];
    for i in 0..nodes.len() {
        if let Some(&l) = label.get(&uf.find(i)) {
            if smallest[l].is_none() {
                smallest[l] = Some(i);
            }
        }
    }
    let graphs = top.iter().map(|&i| graph_of(&decode(m, nodes[i].1))).collect();
    let smallest = smallest.into_iter().map(|i| {
        let (n, c) = nodes[i.expect("every class has a member")];
        graph_of(&decode(n, c))
    });
    Ok(InnerPartition { graphs, class_of, class_count: label.len(), smallest: smallest.collect() })
}

fn group_members(graphs: &[Graph], class_of: &[usize], count: usize) -> Vec<Vec<Graph>> {
    let mut out = vec![Vec::new(); count];
    for (g, &c) in graphs.iter().zip(class_of) {
        out[c].push(g.clone());
    }
    out
}

/// Inner equivalence classes of the simple graphs with `m` vertices.
pub fn partition_inner(m: usize) -> Result<AtlasReport> {
    let start = Instant::now();
    let p = inner_partition(m)?;
    let classes: Vec<AtlasClass> =
        group_members(&p.graphs, &p.class_of, p.class_count).iter().map(|c| summarize(c)).collect();
    Ok(AtlasReport {
        m,
        relation: "inner".into(),
        graph_count: p.graphs.len(),
        class_count: p.class_count,
        classes,
        elapsed: start.elapsed(),
    })
}

/// Outer equivalence classes of the simple graphs with `m` vertices.
pub fn partition_outer(m: usize) -> Result<AtlasReport> {
    check_m(m)?;
    let start = Instant::now();
    let graphs: Vec<Graph> = enumerate_simple(m)?;
    let keys: Vec<OuterKey> = graphs.par_iter().map(outer_key).collect();
    let mut groups: BTreeMap<&OuterKey, Vec<Graph>> = BTreeMap::new();
    for (g, k) in graphs.iter().zip(&keys) {
        groups.entry(k).or_default().push(g.clone());
    }
    let classes: Vec<AtlasClass> = groups.values().map(|c| summarize(c)).collect();
    Ok(AtlasReport {
        m,
        relation: "outer".into(),
        graph_count: graphs.len(),
        class_count: classes.len(),
        classes,
        elapsed: start.elapsed(),
    })
}

/// An outer class containing several inner classes, with the classes each
/// relation produces among them.
#[derive(Clone, Debug, Serialize)]
pub struct SplitClass {
    pub k0: String,
    pub k_temperatures: Vec<String>,
    /// One representative per inner class.
    pub representatives: Vec<Graph>,
    pub me: Vec<usize>,
    pub ce: Vec<usize>,
    pub stable: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnresolvedPair {
    pub relation: Relation,
    pub left: Graph,
    pub right: Graph,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub m: usize,
    pub graph_count: usize,
    pub inner: usize,
    pub outer: usize,
    pub me: usize,
    pub ce: usize,
    pub stable: usize,
    pub lookup_merges: usize,
    pub split: Vec<SplitClass>,
    pub unresolved: Vec<UnresolvedPair>,
    #[serde(skip)]
    pub elapsed: Duration,
}

fn labels_of(uf: &mut UnionFind, k: usize) -> Vec<usize> {
    let mut seen: Vec<usize> = Vec::new();
    (0..k)
        .map(|i| {
            let r = uf.find(i);
            match seen.iter().position(|&x| x == r) {
                Some(p) => p,
                None => {
                    seen.push(r);
                    seen.len() - 1
                }
            }
        })
        .collect()
}

/// Full classification of the `m`-vertex simple graphs: inner and outer
/// classes, then pairwise decisions inside every outer class that splits.
pub fn classify(m: usize, opts: &DecideOptions) -> Result<ClassificationReport> {
    let start = Instant::now();
    let p = inner_partition(m)?;
    let mut by_outer: BTreeMap<OuterKey, Vec<usize>> = BTreeMap::new();
    let mut seen = vec![false; p.class_count];
    for &c in &p.class_of {
        if !std::mem::replace(&mut seen[c], true) {
            by_outer.entry(outer_key(&p.smallest[c])).or_default().push(c);
        }
    }
    let mut report = ClassificationReport {
        m,
        graph_count: p.graphs.len(),
        inner: p.class_count,
        outer: by_outer.len(),
        me: 0,
        ce: 0,
        stable: 0,
        lookup_merges: 0,
        split: Vec::new(),
        unresolved: Vec::new(),
        elapsed: Duration::ZERO,
    };
    for (key, classes) in &by_outer {
        let k = classes.len();
        if k == 1 {
            report.me += 1;
            report.ce += 1;
            report.stable += 1;
            continue;
        }
        let reps: Vec<Graph> = classes.iter().map(|&c| p.smallest[c].clone()).collect();
        let mut labels = Vec::new();
        for relation in [Relation::Me, Relation::Ce, Relation::Stable] {
            let o = DecideOptions { relation, ..opts.clone() };
            let mut uf = UnionFind::new(k);
            for a in 0..k {
                for b in a + 1..k {
                    if uf.find(a) == uf.find(b) {
                        continue;
                    }
                    let v = decide(&reps[a], &reps[b], &o)?;
                    match v.verdict {
                        Verdict::Yes => {
                            if v.rule == "lookup" {
                                report.lookup_merges += 1;
                            }
                            uf.union(a, b);
                        }
                        Verdict::No => {}
                        Verdict::Unknown => report.unresolved.push(UnresolvedPair {
                            relation,
                            left: reps[a].clone(),
                            right: reps[b].clone(),
                            note: v.note.unwrap_or_default(),
                        }),
                    }
                }
            }
            labels.push(labels_of(&mut uf, k));
        }
        let count = |l: &[usize]| l.iter().max().map_or(0, |x| x + 1);
        report.me += count(&labels[0]);
        report.ce += count(&labels[1]);
        report.stable += count(&labels[2]);
        report.split.push(SplitClass {
            k0: key.k0.to_string(),
            k_temperatures: key.labels.iter().map(|l| l.to_string()).collect(),
            representatives: reps,
            me: labels[0].clone(),
            ce: labels[1].clone(),
            stable: labels[2].clone(),
        });
    }
    report.elapsed = start.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip() {
        for n in 1..=3 {
            for code in 0..1u32 << (n * n) {
                let adj = decode(n, code);
                let g = graph_of(&adj);
                let back = adj_of(&g);
                assert_eq!(canonical_code(&back), canonical_code(&adj));
                assert_eq!(is_canonical(n, code), canonical_code(&adj) == code);
            }
        }
    }

    #[test]
    fn small_counts() {
        let counts: Vec<usize> = (1..=3).map(|n| canonical_codes(n).len()).collect();
        assert_eq!(counts, vec![2, 10, 104]);
    }

    #[test]
    fn source_deletion_is_elementary() {
        let e = Graph::from_rows(vec![vec![0, 1], vec![0, 0]]).unwrap();
        let f = Graph::from_rows(vec![vec![0]]).unwrap();
        assert!(elementary_equivalent(&e, &f, 2).unwrap());
        assert!(elementary_equivalent(&e, &e, 2).unwrap());
        let multi = Graph::from_rows(vec![vec![2]]).unwrap();
        assert!(elementary_equivalent(&multi, &f, 2).is_err());
    }

    #[test]
    fn inner_and_outer_agree_up_to_three() {
        for (m, want) in [(1, 2), (2, 8), (3, 35)] {
            assert_eq!(partition_inner(m).unwrap().class_count, want);
            assert_eq!(partition_outer(m).unwrap().class_count, want);
        }
    }
}
