//! Finite directed multigraphs stored as adjacency matrices.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cokernel, AbelianGroupInvariants, IntMatrix};
use crate::structure::temperature;

/// Default vertex bound for [`Graph::canonical_form`].
pub const CANONICAL_BOUND: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Graph {
    n: usize,
    adj: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    adj: Vec<Vec<u64>>,
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphJson { n: self.n, adj: self.rows() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let g = GraphJson::deserialize(d)?;
        if g.adj.len() != g.n {
            return Err(serde::de::Error::custom("adj must have n rows"));
        }
        Graph::from_rows(g.adj).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Regular,
    Sink,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnPaths {
    None,
    Unique,
    Multiple,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VertexClass {
    pub kind: VertexKind,
    pub source: bool,
    pub transition: bool,
    pub return_paths: ReturnPaths,
}

impl Graph {
    pub fn new(n: usize, adj: Vec<u64>) -> Result<Graph> {
        if n == 0 {
            return Err(Error::Graph("a graph needs at least one vertex".into()));
        }
        if adj.len() != n * n {
            return Err(Error::Graph(format!("expected {} entries, got {}", n * n, adj.len())));
        }
        Ok(Graph { n, adj })
    }

    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Graph> {
        let n = rows.len();
        if let Some(i) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::Graph(format!("row {i} has {} entries, expected {n}", rows[i].len())));
        }
        Graph::new(n, rows.into_iter().flatten().collect())
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> u64) -> Result<Graph> {
        Graph::new(n, (0..n * n).map(|k| f(k / n, k % n)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: usize, v: usize) -> u64 {
        self.adj[u * self.n + v]
    }

    pub(crate) fn set(&mut self, u: usize, v: usize, x: u64) {
        self.adj[u * self.n + v] = x;
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.adj.chunks(self.n).map(<[u64]>::to_vec).collect()
    }

    pub fn out_degree(&self, u: usize) -> u64 {
        (0..self.n).map(|v| self.get(u, v)).sum()
    }

    pub fn in_degree(&self, v: usize) -> u64 {
        (0..self.n).map(|u| self.get(u, v)).sum()
    }

    pub fn has_loop(&self, v: usize) -> bool {
        self.get(v, v) > 0
    }

    pub fn is_sink(&self, v: usize) -> bool {
        self.out_degree(v) == 0
    }

    pub fn is_regular(&self, v: usize) -> bool {
        !self.is_sink(v)
    }

    pub fn is_source(&self, v: usize) -> bool {
        self.in_degree(v) == 0
    }

    pub fn sinks(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.is_sink(v)).collect()
    }

    pub fn edge_count(&self) -> u64 {
        self.adj.iter().sum()
    }

    /// All entries in `{0, 1}`.
    pub fn is_simple(&self) -> bool {
        self.adj.iter().all(|&x| x <= 1)
    }

    /// `B_E = A_E − I`.
    pub fn b_matrix(&self) -> IntMatrix {
        IntMatrix::from_fn(self.n, self.n, |u, v| BigInt::from(self.get(u, v)) - BigInt::from(u8::from(u == v)))
    }

    /// `B_E` with the sink rows removed.
    pub fn b_bullet(&self) -> IntMatrix {
        let regular: Vec<usize> = (0..self.n).filter(|&v| self.is_regular(v)).collect();
        let all: Vec<usize> = (0..self.n).collect();
        self.b_matrix().select(&regular, &all)
    }

    /// `cok((B•)ᵀ)`, the K₀-group of the graph algebra.
    pub fn k0(&self) -> AbelianGroupInvariants {
        cokernel(&self.b_bullet().transpose())
    }

    /// Bowen–Franks group `cok(B_E) ≅ cok(I − A_E)`.
    pub fn bowen_franks(&self) -> AbelianGroupInvariants {
        cokernel(&self.b_matrix())
    }

    /// Sign of `det(I − A) = (−1)^n det(B_E)`.
    pub fn det_sign(&self) -> i8 {
        let d = self.b_matrix().det();
        let d = if self.n % 2 == 1 { -d } else { d };
        if d.is_zero() {
            0
        } else if d.is_positive() {
            1
        } else {
            -1
        }
    }

    /// Reflexive-transitive closure: `r[u][v]` iff a possibly empty path
    /// runs from `u` to `v`.
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.n;
        let mut r: Vec<Vec<bool>> = (0..n).map(|u| (0..n).map(|v| u == v || self.get(u, v) > 0).collect()).collect();
        for k in 0..n {
            for u in 0..n {
                if r[u][k] {
                    for v in 0..n {
                        if r[k][v] {
                            r[u][v] = true;
                        }
                    }
                }
            }
        }
        r
    }

    /// Strongly connected components (Tarjan), each sorted, listed in
    /// order of their smallest vertex.
    pub fn sccs(&self) -> Vec<Vec<usize>> {
        struct State {
            index: Vec<Option<usize>>,
            low: Vec<usize>,
            on_stack: Vec<bool>,
            stack: Vec<usize>,
            next: usize,
            out: Vec<Vec<usize>>,
        }
        fn visit(g: &Graph, v: usize, st: &mut State) {
            st.index[v] = Some(st.next);
            st.low[v] = st.next;
            st.next += 1;
            st.stack.push(v);
            st.on_stack[v] = true;
            for w in 0..g.n {
                if g.get(v, w) == 0 {
                    continue;
                }
                match st.index[w] {
                    None => {
                        visit(g, w, st);
                        st.low[v] = st.low[v].min(st.low[w]);
                    }
                    Some(iw) if st.on_stack[w] => st.low[v] = st.low[v].min(iw),
                    Some(_) => {}
                }
            }
            if Some(st.low[v]) == st.index[v] {
                let mut comp = Vec::new();
                while let Some(w) = st.stack.pop() {
                    st.on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                st.out.push(comp);
            }
        }
        let mut st = State {
            index: vec![None; self.n],
            low: vec![0; self.n],
            on_stack: vec![false; self.n],
            stack: Vec::new(),
            next: 0,
            out: Vec::new(),
        };
        for v in 0..self.n {
            if st.index[v].is_none() {
                visit(self, v, &mut st);
            }
        }
        st.out.sort_by_key(|c| c[0]);
        st.out
    }

    pub fn return_path_class(&self, v: usize) -> ReturnPaths {
        let tp = temperature(self);
        match tp.poset.component_of(v) {
            Some(c) if tp.tau[c] == 1 => ReturnPaths::Multiple,
            Some(c) if tp.tau[c] == 0 => ReturnPaths::Unique,
            _ => ReturnPaths::None,
        }
    }

    pub fn vertex_classes(&self) -> Vec<VertexClass> {
        let tp = temperature(self);
        (0..self.n)
            .map(|v| {
                let return_paths = match tp.poset.component_of(v) {
                    Some(c) if tp.tau[c] == 1 => ReturnPaths::Multiple,
                    Some(c) if tp.tau[c] == 0 => ReturnPaths::Unique,
                    _ => ReturnPaths::None,
                };
                VertexClass {
                    kind: if self.is_sink(v) { VertexKind::Sink } else { VertexKind::Regular },
                    source: self.is_source(v),
                    transition: tp.poset.transition_states.contains(&v),
                    return_paths,
                }
            })
            .collect()
    }

    /// No vertex supports exactly one return path.
    pub fn condition_k(&self) -> bool {
        temperature(self).tau.iter().all(|&t| t != 0)
    }

    /// Every cycle has an exit.
    pub fn condition_l(&self) -> bool {
        let tp = temperature(self);
        tp.poset.components.iter().zip(&tp.tau).all(|(c, &t)| t != 0 || self.has_exit(c))
    }

    /// Condition (H), read off the tempered component poset: every cyclic
    /// component with a successor has an immediate successor of
    /// temperature at most 0.
    pub fn condition_h(&self) -> bool {
        temperature(self).condition_h()
    }

    /// Condition (H) straight from the path formulation: for every vertex
    /// `v` with a unique return path, either that path has no exit or some
    /// vertex `w` outside the component of `v`, singular or with a unique
    /// return path, is reachable from `v` and no path from `v` to `w` meets
    /// a vertex with two return paths.
    pub fn condition_h_paths(&self) -> bool {
        let reach = self.reachability();
        let classes = self.vertex_classes();
        let tp = temperature(self);
        (0..self.n).all(|v| {
            if classes[v].return_paths != ReturnPaths::Unique {
                return true;
            }
            let comp = &tp.poset.components[tp.poset.component_of(v).unwrap()];
            if !self.has_exit(comp) {
                return true;
            }
            (0..self.n).any(|w| {
                !comp.contains(&w)
                    && reach[v][w]
                    && (classes[w].kind == VertexKind::Sink || classes[w].return_paths == ReturnPaths::Unique)
                    && !(0..self.n)
                        .any(|x| classes[x].return_paths == ReturnPaths::Multiple && reach[v][x] && reach[x][w])
            })
        })
    }

    fn has_exit(&self, comp: &[usize]) -> bool {
        comp.iter().any(|&u| (0..self.n).any(|w| !comp.contains(&w) && self.get(u, w) > 0))
    }

    /// Relabels vertex `u` as `p[u]`.
    pub fn permute(&self, p: &[usize]) -> Graph {
        assert_eq!(p.len(), self.n);
        let mut out = Graph { n: self.n, adj: vec![0; self.adj.len()] };
        for u in 0..self.n {
            for v in 0..self.n {
                out.set(p[u], p[v], self.get(u, v));
            }
        }
        out
    }

    /// The lexicographically least (row-major) adjacency matrix over all
    /// relabelings, with the default bound of [`CANONICAL_BOUND`] vertices.
    pub fn canonical_form(&self) -> Result<Graph> {
        self.canonical_form_bounded(CANONICAL_BOUND)
    }

    pub fn canonical_form_bounded(&self, bound: usize) -> Result<Graph> {
        if self.n > bound {
            return Err(Error::CanonicalBound { n: self.n, bound });
        }
        let n = self.n;
        // order[i] = original vertex placed at position i
        let mut order: Vec<usize> = (0..n).collect();
        let mut best = order.clone();
        let mut c = vec![0usize; n];
        let mut i = 1;
        // Heap's algorithm over all permutations.
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    order.swap(0, i);
                } else {
                    order.swap(c[i], i);
                }
                if self.precedes_under(&order, &best) {
                    best.clone_from(&order);
                }
                c[i] += 1;
                i = 1;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        Graph::from_fn(n, |a, b| self.get(best[a], best[b]))
    }

    fn precedes_under(&self, a: &[usize], b: &[usize]) -> bool {
        for i in 0..self.n {
            for j in 0..self.n {
                let (x, y) = (self.get(a[i], a[j]), self.get(b[i], b[j]));
                if x != y {
                    return x < y;
                }
            }
        }
        false
    }

    /// Parses the text format (vertex count, then one row per line) or the
    /// JSON form `{"n": …, "adj": [[…]]}`. Blank lines and lines starting
    /// with `#` are ignored.
    pub fn parse(input: &str) -> Result<Graph> {
        if input.trim_start().starts_with('{') {
            return Graph::parse_json(input);
        }
        let mut lines = input
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (first, head) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let n: usize = head
            .parse()
            .map_err(|_| Error::Parse { line: first, msg: format!("expected vertex count, found {head:?}") })?;
        if n == 0 {
            return Err(Error::Parse { line: first, msg: "vertex count must be positive".into() });
        }
        let mut rows = Vec::with_capacity(n);
        let mut last = first;
        for _ in 0..n {
            let (line, text) = lines.next().ok_or(Error::Parse {
                line: last + 1,
                msg: format!("expected {n} matrix rows, found {}", rows.len()),
            })?;
            last = line;
            let row = text.split_whitespace().map(|tok| parse_entry(tok, line)).collect::<Result<Vec<u64>>>()?;
            if row.len() != n {
                return Err(Error::Parse { line, msg: format!("expected {n} entries, found {}", row.len()) });
            }
            rows.push(row);
        }
        if let Some((line, _)) = lines.next() {
            return Err(Error::Parse { line, msg: "trailing content after the matrix".into() });
        }
        Graph::from_rows(rows)
    }

    pub fn parse_json(input: &str) -> Result<Graph> {
        serde_json::from_str(input).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        s
    }

    pub(crate) fn remove_vertex(&self, v: usize) -> Graph {
        let keep: Vec<usize> = (0..self.n).filter(|&u| u != v).collect();
        Graph {
            n: self.n - 1,
            adj: keep.iter().flat_map(|&a| keep.iter().map(move |&b| (a, b))).map(|(a, b)| self.get(a, b)).collect(),
        }
    }

    pub(crate) fn with_extra_vertices(&self, k: usize) -> Graph {
        let m = self.n + k;
        let mut out = Graph { n: m, adj: vec![0; m * m] };
        for u in 0..self.n {
            for v in 0..self.n {
                out.set(u, v, self.get(u, v));
            }
        }
        out
    }
}

fn parse_entry(tok: &str, line: usize) -> Result<u64> {
    match tok {
        "inf" | "∞" | "infinity" => Err(Error::Parse { line, msg: "infinite emitters are not supported".into() }),
        _ => tok.parse().map_err(|_| Error::Parse { line, msg: format!("not a nonnegative integer: {tok:?}") }),
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| format!("[{}]", r.iter().map(u64::to_string).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(rows: &[&[u64]]) -> Graph {
        Graph::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn b_matrices() {
        let a = g(&[&[2, 1, 0], &[0, 1, 1], &[0, 0, 1]]);
        assert_eq!(a.b_matrix(), IntMatrix::from_rows(&[vec![1, 1, 0], vec![0, 0, 1], vec![0, 0, 0]]));
        assert_eq!(g(&[&[1]]).b_matrix(), IntMatrix::from_rows(&[vec![0]]));
        assert_eq!(g(&[&[0]]).b_matrix(), IntMatrix::from_rows(&[vec![-1]]));
        assert_eq!(g(&[&[1, 1], &[0, 0]]).b_bullet(), IntMatrix::from_rows(&[vec![0, 1]]));
        assert_eq!(g(&[&[0, 1], &[0, 0]]).b_bullet(), IntMatrix::from_rows(&[vec![-1, 1]]));
        let cyc = g(&[&[0, 1], &[1, 0]]);
        assert_eq!(cyc.b_bullet(), cyc.b_matrix());
    }

    #[test]
    fn reachability_examples() {
        assert!(g(&[&[0, 1], &[1, 0]]).reachability().iter().flatten().all(|&x| x));
        let r = g(&[&[0, 1], &[0, 0]]).reachability();
        assert_eq!(r, vec![vec![true, true], vec![false, true]]);
        let r = g(&[&[2, 1, 0], &[0, 1, 1], &[0, 0, 1]]).reachability();
        for u in 0..3 {
            for v in 0..3 {
                assert_eq!(r[u][v], u <= v);
            }
        }
    }

    #[test]
    fn return_paths() {
        assert_eq!(g(&[&[1]]).return_path_class(0), ReturnPaths::Unique);
        assert_eq!(g(&[&[2]]).return_path_class(0), ReturnPaths::Multiple);
        assert_eq!(g(&[&[0]]).return_path_class(0), ReturnPaths::None);
    }

    #[test]
    fn conditions() {
        let a_left = g(&[&[2, 1, 0], &[0, 1, 1], &[0, 0, 1]]);
        let a_right = g(&[&[2, 2, 1], &[0, 1, 1], &[0, 0, 1]]);
        let b_left = g(&[&[1, 1, 2], &[0, 2, 1], &[0, 0, 1]]);
        let b_right = g(&[&[1, 1, 0], &[0, 2, 1], &[0, 0, 1]]);
        assert!(a_left.condition_h() && a_right.condition_h());
        assert!(!b_left.condition_h() && !b_right.condition_h());
        let acyclic = g(&[&[0, 1, 1], &[0, 0, 1], &[0, 0, 0]]);
        assert!(acyclic.condition_k() && acyclic.condition_h());
        assert!(!g(&[&[1]]).condition_l());
        assert!(g(&[&[1, 1], &[0, 0]]).condition_l());
    }

    #[test]
    fn canonical_forms() {
        let a = g(&[&[0, 1], &[0, 0]]).canonical_form().unwrap();
        let b = g(&[&[0, 0], &[1, 0]]).canonical_form().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.canonical_form().unwrap(), a);
        let big = Graph::from_fn(9, |_, _| 0).unwrap();
        assert!(matches!(big.canonical_form(), Err(Error::CanonicalBound { .. })));
    }

    #[test]
    fn parsing() {
        let t = "3\n2 1 0\n0 1 1\n0 0 1\n";
        let a = Graph::parse(t).unwrap();
        assert_eq!(a.to_text(), t);
        let j = Graph::parse(r#"{"n":2,"adj":[[0,1],[0,0]]}"#).unwrap();
        assert_eq!(j, g(&[&[0, 1], &[0, 0]]));
        match Graph::parse("2\n0 1\n0 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(Graph::parse("1\ninf\n"), Err(Error::Parse { line: 2, .. })));
        assert!(Graph::parse("2\n0 1\n").is_err());
    }

    #[test]
    fn det_sign_of_splice() {
        assert_eq!(g(&[&[2]]).det_sign(), -1);
        assert_eq!(g(&[&[2, 1, 0], &[1, 1, 1], &[0, 1, 1]]).det_sign(), 1);
    }
}
