//! Elementary moves, legal row and column additions, plugging and
//! unplugging of sinks, and the standard form pipeline.

mod standard;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, ReturnPaths};
use crate::structure::temperature;

pub use standard::{compact_form, standard_form_pair, standard_form_pairs, FormLevel, Reduction, StandardPair};

/// One move with exactly the parameters it needs. Vertex indices refer to
/// the graph the move is applied to; new vertices are appended at the end.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "move")]
pub enum MoveSpec {
    /// Delete a regular source.
    S {
        v: usize,
    },
    /// Reduce the vertex `v`.
    R {
        v: usize,
    },
    /// Split one edge `v → target` through a fresh vertex.
    Rinv {
        v: usize,
        target: usize,
    },
    /// Out-split `v`; each part lists out-edge counts per range vertex.
    O {
        v: usize,
        parts: Vec<Vec<u64>>,
    },
    /// In-split `v`; each part lists in-edge counts per source vertex.
    I {
        v: usize,
        parts: Vec<Vec<u64>>,
    },
    /// Cuntz splice at `v`.
    C {
        v: usize,
    },
    /// Collapse `v`.
    Col {
        v: usize,
    },
    /// Row `from` added to (sign +1) or subtracted from (sign −1) row `into`.
    RowAdd {
        from: usize,
        into: usize,
        sign: i8,
    },
    /// Column `from` added to or subtracted from column `into`.
    ColAdd {
        from: usize,
        into: usize,
        sign: i8,
    },
    Plug,
    Unplug,
    /// Relabel vertex `u` as `perm[u]`.
    Permute {
        perm: Vec<usize>,
    },
}

impl MoveSpec {
    /// Parses one line of a text move script, e.g. `C 0`, `Col 2`,
    /// `RowAdd 1 0 -1`, `O 0 1,1,0 0,0,1`, `Permute 2 0 1`.
    pub fn parse_line(line: &str, lineno: usize) -> Result<MoveSpec> {
        let err = |msg: String| Error::Parse { line: lineno, msg };
        let mut toks = line.split_whitespace();
        let name = toks.next().ok_or_else(|| err("empty move".into()))?;
        let rest: Vec<&str> = toks.collect();
        let num = |i: usize| -> Result<usize> {
            rest.get(i)
                .ok_or_else(|| err(format!("{name}: missing argument {}", i + 1)))?
                .parse()
                .map_err(|_| err(format!("{name}: argument {} is not a vertex index", i + 1)))
        };
        let sign = |i: usize| -> Result<i8> {
            match rest.get(i).copied() {
                None | Some("+") | Some("+1") | Some("1") => Ok(1),
                Some("-") | Some("-1") => Ok(-1),
                Some(s) => Err(err(format!("{name}: sign must be +1 or -1, found {s:?}"))),
            }
        };
        let parts = || -> Result<Vec<Vec<u64>>> {
            rest[1..]
                .iter()
                .map(|p| {
                    p.split(',')
                        .map(|x| x.parse().map_err(|_| err(format!("{name}: bad partition entry {x:?}"))))
                        .collect()
                })
                .collect()
        };
        let spec = match name {
            "S" => MoveSpec::S { v: num(0)? },
            "R" => MoveSpec::R { v: num(0)? },
            "Rinv" => MoveSpec::Rinv { v: num(0)?, target: num(1)? },
            "O" => MoveSpec::O { v: num(0)?, parts: parts()? },
            "I" => MoveSpec::I { v: num(0)?, parts: parts()? },
            "C" => MoveSpec::C { v: num(0)? },
            "Col" => MoveSpec::Col { v: num(0)? },
            "RowAdd" => MoveSpec::RowAdd { from: num(0)?, into: num(1)?, sign: sign(2)? },
            "ColAdd" => MoveSpec::ColAdd { from: num(0)?, into: num(1)?, sign: sign(2)? },
            "Plug" => MoveSpec::Plug,
            "Unplug" => MoveSpec::Unplug,
            "Permute" => MoveSpec::Permute { perm: (0..rest.len()).map(num).collect::<Result<_>>()? },
            other => return Err(err(format!("unknown move {other:?}"))),
        };
        Ok(spec)
    }

    /// Parses a script: either a JSON array of moves or one move per line
    /// (blank lines and `#` comments ignored).
    pub fn parse_script(input: &str) -> Result<Vec<MoveSpec>> {
        if input.trim_start().starts_with('[') {
            return serde_json::from_str(input).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() });
        }
        input
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .map(|(i, l)| MoveSpec::parse_line(l, i))
            .collect()
    }
}

impl fmt::Display for MoveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |p: &[u64]| p.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        match self {
            MoveSpec::S { v } => write!(f, "S {v}"),
            MoveSpec::R { v } => write!(f, "R {v}"),
            MoveSpec::Rinv { v, target } => write!(f, "Rinv {v} {target}"),
            MoveSpec::O { v, parts } | MoveSpec::I { v, parts } => {
                let tag = if matches!(self, MoveSpec::O { .. }) { "O" } else { "I" };
                write!(f, "{tag} {v}")?;
                for p in parts {
                    write!(f, " {}", join(p))?;
                }
                Ok(())
            }
            MoveSpec::C { v } => write!(f, "C {v}"),
            MoveSpec::Col { v } => write!(f, "Col {v}"),
            MoveSpec::RowAdd { from, into, sign } => write!(f, "RowAdd {from} {into} {sign:+}"),
            MoveSpec::ColAdd { from, into, sign } => write!(f, "ColAdd {from} {into} {sign:+}"),
            MoveSpec::Plug => write!(f, "Plug"),
            MoveSpec::Unplug => write!(f, "Unplug"),
            MoveSpec::Permute { perm } => {
                write!(f, "Permute")?;
                for p in perm {
                    write!(f, " {p}")?;
                }
                Ok(())
            }
        }
    }
}

fn illegal(mv: impl fmt::Display, clause: &str) -> Error {
    Error::IllegalMove { mv: mv.to_string(), clause: clause.to_string() }
}

fn check_vertex(g: &Graph, v: usize, mv: &MoveSpec) -> Result<()> {
    if v >= g.n() {
        return Err(illegal(mv, &format!("vertex {v} out of range (graph has {} vertices)", g.n())));
    }
    Ok(())
}

pub fn apply(g: &Graph, m: &MoveSpec) -> Result<Graph> {
    match m {
        MoveSpec::S { v } => {
            check_vertex(g, *v, m)?;
            if !g.is_regular(*v) {
                return Err(illegal(m, "the vertex must be regular"));
            }
            if !g.is_source(*v) {
                return Err(illegal(m, "the vertex must be a source"));
            }
            Ok(g.remove_vertex(*v))
        }
        MoveSpec::R { v } => reduce(g, *v, m),
        MoveSpec::Rinv { v, target } => {
            check_vertex(g, *v, m)?;
            check_vertex(g, *target, m)?;
            if g.get(*v, *target) == 0 {
                return Err(illegal(m, "there must be an edge v → target to split"));
            }
            let n = g.n();
            let mut out = g.with_extra_vertices(1);
            out.set(*v, *target, g.get(*v, *target) - 1);
            out.set(*v, n, 1);
            out.set(n, *target, 1);
            Ok(out)
        }
        MoveSpec::O { v, parts } => outsplit(g, *v, parts, m),
        MoveSpec::I { v, parts } => insplit(g, *v, parts, m),
        MoveSpec::C { v } => {
            check_vertex(g, *v, m)?;
            if g.return_path_class(*v) != ReturnPaths::Multiple {
                return Err(illegal(m, "v must support at least two distinct return paths"));
            }
            let n = g.n();
            let (u1, u2) = (n, n + 1);
            let mut out = g.with_extra_vertices(2);
            out.set(*v, u1, 1);
            out.set(u1, *v, 1);
            out.set(u1, u1, 1);
            out.set(u1, u2, 1);
            out.set(u2, u1, 1);
            out.set(u2, u2, 1);
            Ok(out)
        }
        MoveSpec::Col { v } => {
            check_vertex(g, *v, m)?;
            if !g.is_regular(*v) {
                return Err(illegal(m, "v must be regular"));
            }
            if g.has_loop(*v) {
                return Err(illegal(m, "v must not support a loop"));
            }
            let mut out = g.clone();
            for x in 0..g.n() {
                for y in 0..g.n() {
                    let extra = g.get(x, *v) * g.get(*v, y);
                    if extra > 0 {
                        out.set(x, y, out.get(x, y) + extra);
                    }
                }
            }
            Ok(out.remove_vertex(*v))
        }
        MoveSpec::RowAdd { from, into, sign } => row_add(g, *from, *into, *sign),
        MoveSpec::ColAdd { from, into, sign } => col_add(g, *from, *into, *sign),
        MoveSpec::Plug => Ok(plug(g)),
        MoveSpec::Unplug => unplug(g),
        MoveSpec::Permute { perm } => {
            let mut seen = vec![false; g.n()];
            if perm.len() != g.n() || perm.iter().any(|&p| p >= g.n() || std::mem::replace(&mut seen[p], true)) {
                return Err(illegal(m, "not a permutation of the vertices"));
            }
            Ok(g.permute(perm))
        }
    }
}

/// Applies a list of moves in order, stopping at the first illegal one.
pub fn apply_all(g: &Graph, moves: &[MoveSpec]) -> Result<Graph> {
    moves.iter().try_fold(g.clone(), |acc, m| apply(&acc, m))
}

fn reduce(g: &Graph, w: usize, m: &MoveSpec) -> Result<Graph> {
    check_vertex(g, w, m)?;
    let senders: Vec<usize> = (0..g.n()).filter(|&x| g.get(x, w) > 0).collect();
    if senders.len() != 1 {
        return Err(illegal(m, "s(r⁻¹(w)) = {x}: all edges into w must come from a single vertex"));
    }
    if g.out_degree(w) != 1 {
        return Err(illegal(m, "s⁻¹(w) = {f}: w must emit exactly one edge"));
    }
    let x = senders[0];
    let y = (0..g.n()).find(|&y| g.get(w, y) > 0).unwrap();
    if y == w {
        return Err(illegal(m, "r(f) ≠ w"));
    }
    let mut out = g.clone();
    out.set(x, y, g.get(x, y) + g.get(x, w));
    Ok(out.remove_vertex(w))
}

fn check_parts(g: &Graph, parts: &[Vec<u64>], total: &[u64], m: &MoveSpec) -> Result<()> {
    if parts.is_empty() {
        return Err(illegal(m, "the partition needs at least one part"));
    }
    if parts.iter().any(|p| p.len() != g.n()) {
        return Err(illegal(m, "each part must list one count per vertex"));
    }
    if parts.iter().any(|p| p.iter().sum::<u64>() == 0) {
        return Err(illegal(m, "parts must be nonempty"));
    }
    for (j, &t) in total.iter().enumerate() {
        if parts.iter().map(|p| p[j]).sum::<u64>() != t {
            return Err(illegal(m, &format!("parts do not add up to the edge count at vertex {j}")));
        }
    }
    Ok(())
}

fn outsplit(g: &Graph, v: usize, parts: &[Vec<u64>], m: &MoveSpec) -> Result<Graph> {
    check_vertex(g, v, m)?;
    if g.is_sink(v) {
        return Err(illegal(m, "v must not be a sink"));
    }
    let row: Vec<u64> = (0..g.n()).map(|y| g.get(v, y)).collect();
    check_parts(g, parts, &row, m)?;
    let n = g.n();
    let k = parts.len();
    let copy = |i: usize| if i == 0 { v } else { n + i - 1 };
    let mut out = g.with_extra_vertices(k - 1);
    for i in 0..k {
        for y in 0..n {
            if y == v {
                for j in 0..k {
                    out.set(copy(i), copy(j), parts[i][v]);
                }
            } else {
                out.set(copy(i), y, parts[i][y]);
            }
        }
    }
    for x in (0..n).filter(|&x| x != v) {
        for j in 0..k {
            out.set(x, copy(j), g.get(x, v));
        }
    }
    Ok(out)
}

fn insplit(g: &Graph, v: usize, parts: &[Vec<u64>], m: &MoveSpec) -> Result<Graph> {
    check_vertex(g, v, m)?;
    if !g.is_regular(v) {
        return Err(illegal(m, "v must be regular"));
    }
    if g.is_source(v) {
        return Err(illegal(m, "v must not be a source"));
    }
    let col: Vec<u64> = (0..g.n()).map(|x| g.get(x, v)).collect();
    check_parts(g, parts, &col, m)?;
    let n = g.n();
    let k = parts.len();
    let copy = |i: usize| if i == 0 { v } else { n + i - 1 };
    let mut out = g.with_extra_vertices(k - 1);
    for j in 0..k {
        for x in 0..n {
            if x == v {
                for i in 0..k {
                    out.set(copy(i), copy(j), parts[j][v]);
                }
            } else {
                out.set(x, copy(j), parts[j][x]);
            }
        }
    }
    for y in (0..n).filter(|&y| y != v) {
        for i in 0..k {
            out.set(copy(i), y, g.get(v, y));
        }
    }
    Ok(out)
}

fn path_exists(g: &Graph, u: usize, v: usize) -> bool {
    g.reachability()[u][v]
}

fn addition_clause_col(g: &Graph, from: usize, into: usize) -> Option<&'static str> {
    if !path_exists(g, from, into) {
        return Some("there must be a path from u to v");
    }
    if !(g.has_loop(from) || (g.get(from, into) > 0 && g.out_degree(from) >= 2)) {
        return Some("u supports a loop, or there is an edge u → v and u emits at least two edges");
    }
    None
}

fn addition_clause_row(g: &Graph, from: usize, into: usize) -> Option<&'static str> {
    if !path_exists(g, into, from) {
        return Some("there must be a path from u to v");
    }
    if !g.is_regular(from) {
        return Some("v must be regular");
    }
    if !(g.has_loop(from) || g.get(into, from) > 0) {
        return Some("v supports a loop or there is an edge u → v");
    }
    None
}

/// Column `from` (u) added into column `into` (v) of `B_E` (sign +1), or
/// subtracted (sign −1, legal when the reverse addition is).
pub fn col_add(g: &Graph, from: usize, into: usize, sign: i8) -> Result<Graph> {
    let m = MoveSpec::ColAdd { from, into, sign };
    check_vertex(g, from, &m)?;
    check_vertex(g, into, &m)?;
    if from == into {
        return Err(illegal(&m, "u and v must differ"));
    }
    if sign != 1 && sign != -1 {
        return Err(illegal(&m, "sign must be +1 or -1"));
    }
    let mut out = g.clone();
    for x in 0..g.n() {
        let b = g.get(x, from) as i128 - i128::from(x == from);
        let val = g.get(x, into) as i128 + i128::from(sign) * b;
        if val < 0 {
            return Err(illegal(&m, "the result would have a negative entry"));
        }
        out.set(x, into, val as u64);
    }
    let check = if sign == 1 { g } else { &out };
    if let Some(clause) = addition_clause_col(check, from, into) {
        return Err(illegal(&m, clause));
    }
    Ok(out)
}

/// Row `from` (v) added into row `into` (u) of `B_E` (sign +1), or
/// subtracted (sign −1, legal when the reverse addition is).
pub fn row_add(g: &Graph, from: usize, into: usize, sign: i8) -> Result<Graph> {
    let m = MoveSpec::RowAdd { from, into, sign };
    check_vertex(g, from, &m)?;
    check_vertex(g, into, &m)?;
    if from == into {
        return Err(illegal(&m, "u and v must differ"));
    }
    if sign != 1 && sign != -1 {
        return Err(illegal(&m, "sign must be +1 or -1"));
    }
    let mut out = g.clone();
    for y in 0..g.n() {
        let b = g.get(from, y) as i128 - i128::from(y == from);
        let val = g.get(into, y) as i128 + i128::from(sign) * b;
        if val < 0 {
            return Err(illegal(&m, "the result would have a negative entry"));
        }
        out.set(into, y, val as u64);
    }
    let check = if sign == 1 { g } else { &out };
    if let Some(clause) = addition_clause_row(check, from, into) {
        return Err(illegal(&m, clause));
    }
    Ok(out)
}

pub fn legal_col_add(g: &Graph, from: usize, into: usize) -> Result<Graph> {
    col_add(g, from, into, 1)
}

pub fn legal_row_add(g: &Graph, from: usize, into: usize) -> Result<Graph> {
    row_add(g, from, into, 1)
}

pub fn legal_col_sub(g: &Graph, from: usize, into: usize) -> Result<Graph> {
    col_add(g, from, into, -1)
}

pub fn legal_row_sub(g: &Graph, from: usize, into: usize) -> Result<Graph> {
    row_add(g, from, into, -1)
}

/// Adds a loop at every sink.
pub fn plug(g: &Graph) -> Graph {
    let mut out = g.clone();
    for v in g.sinks() {
        out.set(v, v, 1);
    }
    out
}

/// Removes the loop at every vertex whose loop is a cycle without exit.
pub fn unplug(g: &Graph) -> Result<Graph> {
    let tp = temperature(g);
    let mut out = g.clone();
    for (c, &t) in tp.poset.components.iter().zip(&tp.tau) {
        if t != 0 {
            continue;
        }
        let exit = c.iter().any(|&u| (0..g.n()).any(|w| !c.contains(&w) && g.get(u, w) > 0));
        if exit {
            continue;
        }
        if c.len() > 1 {
            return Err(illegal(MoveSpec::Unplug, "every vertex-simple cycle without exit must be a loop"));
        }
        out.set(c[0], c[0], 0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(rows: &[&[u64]]) -> Graph {
        Graph::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn cuntz_splice_of_two_loops() {
        let out = apply(&g(&[&[2]]), &MoveSpec::C { v: 0 }).unwrap();
        assert_eq!(out, g(&[&[2, 1, 0], &[1, 1, 1], &[0, 1, 1]]));
        assert!(apply(&g(&[&[1]]), &MoveSpec::C { v: 0 }).is_err());
    }

    #[test]
    fn collapse_and_source_removal() {
        let line = g(&[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]]);
        assert_eq!(apply(&line, &MoveSpec::Col { v: 1 }).unwrap(), g(&[&[0, 1], &[0, 0]]));
        let out = apply(&g(&[&[0, 1], &[0, 0]]), &MoveSpec::S { v: 0 }).unwrap();
        assert_eq!(out, g(&[&[0]]));
    }

    #[test]
    fn reduction_clauses() {
        match apply(&g(&[&[1]]), &MoveSpec::R { v: 0 }) {
            Err(Error::IllegalMove { clause, .. }) => assert!(clause.contains("r(f) ≠ w")),
            other => panic!("{other:?}"),
        }
        let split = apply(&g(&[&[2]]), &MoveSpec::Rinv { v: 0, target: 0 }).unwrap();
        assert_eq!(split, g(&[&[1, 1], &[1, 0]]));
        assert_eq!(apply(&split, &MoveSpec::R { v: 1 }).unwrap(), g(&[&[2]]));
    }

    #[test]
    fn splits() {
        let two = g(&[&[2]]);
        let o = apply(&two, &MoveSpec::O { v: 0, parts: vec![vec![1], vec![1]] }).unwrap();
        assert_eq!(o, g(&[&[1, 1], &[1, 1]]));
        let i = apply(&two, &MoveSpec::I { v: 0, parts: vec![vec![1], vec![1]] }).unwrap();
        assert_eq!(i, g(&[&[1, 1], &[1, 1]]));
        let e = g(&[&[1, 1], &[0, 0]]);
        let o = apply(&e, &MoveSpec::O { v: 0, parts: vec![vec![1, 0], vec![0, 1]] }).unwrap();
        assert_eq!(o, g(&[&[1, 0, 1], &[0, 0, 0], &[0, 1, 0]]));
        assert!(apply(&e, &MoveSpec::O { v: 0, parts: vec![vec![1, 1], vec![0, 0]] }).is_err());
        assert!(apply(&e, &MoveSpec::I { v: 1, parts: vec![vec![1, 0]] }).is_err());
    }

    #[test]
    fn column_addition() {
        // u = 0 has a loop and an edge to v = 1.
        let e = g(&[&[2, 1], &[0, 1]]);
        let out = legal_col_add(&e, 0, 1).unwrap();
        let b = e.b_matrix();
        assert_eq!(out.b_matrix()[(0, 1)], &b[(0, 1)] + &b[(0, 0)]);
        assert_eq!(legal_col_sub(&out, 0, 1).unwrap(), e);
        let sink = g(&[&[1, 1], &[0, 0]]);
        assert!(legal_col_add(&sink, 1, 0).is_err());
    }

    #[test]
    fn row_addition() {
        let e = g(&[&[1, 1], &[0, 2]]);
        let out = legal_row_add(&e, 1, 0).unwrap();
        assert_eq!(out, g(&[&[1, 2], &[0, 2]]));
        assert_eq!(legal_row_sub(&out, 1, 0).unwrap(), e);
        assert!(legal_row_add(&g(&[&[1, 1], &[0, 0]]), 1, 0).is_err());
    }

    #[test]
    fn plugging() {
        assert_eq!(plug(&g(&[&[0]])), g(&[&[1]]));
        assert_eq!(unplug(&g(&[&[1]])).unwrap(), g(&[&[0]]));
        let mixed = g(&[&[1, 0], &[0, 0]]);
        assert_ne!(plug(&unplug(&mixed).unwrap()), mixed);
        assert_ne!(unplug(&plug(&mixed)).unwrap(), mixed);
        assert!(unplug(&g(&[&[0, 1], &[1, 0]])).is_err());
    }

    #[test]
    fn scripts() {
        let s = "# demo\nC 0\nRowAdd 1 0 -1\nO 0 1,0 0,1\nPermute 1 0\n";
        let moves = MoveSpec::parse_script(s).unwrap();
        assert_eq!(moves.len(), 4);
        assert_eq!(moves[1], MoveSpec::RowAdd { from: 1, into: 0, sign: -1 });
        let json = serde_json::to_string(&moves).unwrap();
        assert_eq!(MoveSpec::parse_script(&json).unwrap(), moves);
        for m in &moves {
            assert_eq!(&MoveSpec::parse_line(&m.to_string(), 1).unwrap(), m);
        }
    }
}
