use serde::Serialize;

use super::{apply, plug, MoveSpec};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::block::smith_ones;
use crate::linalg::{BlockMatrix, BlockStructure};
use crate::structure::{gamma, k_temperature, tau_isos, temperature, tempered_isos};

/// A graph reached from an input by a recorded list of moves.
#[derive(Clone, Debug, Serialize)]
pub struct Reduction {
    pub graph: Graph,
    pub moves: Vec<MoveSpec>,
}

impl Reduction {
    fn start(g: &Graph) -> Reduction {
        Reduction { graph: g.clone(), moves: Vec::new() }
    }

    fn step(&mut self, m: MoveSpec) -> Result<()> {
        self.graph = apply(&self.graph, &m)?;
        self.moves.push(m);
        Ok(())
    }

    /// Relabels so vertices appear grouped by `block_of`, keeping the
    /// relative order inside each block. Returns the new block labels.
    fn sort_blocks(&mut self, block_of: &[usize]) -> Result<Vec<usize>> {
        let mut order: Vec<usize> = (0..block_of.len()).collect();
        order.sort_by_key(|&v| (block_of[v], v));
        let mut perm = vec![0; order.len()];
        for (pos, &v) in order.iter().enumerate() {
            perm[v] = pos;
        }
        if perm.iter().enumerate().any(|(i, &p)| i != p) {
            self.step(MoveSpec::Permute { perm })?;
        }
        Ok(order.iter().map(|&v| block_of[v]).collect())
    }
}

/// Removes every transition state and shrinks components as far as
/// collapses allow: cyclic components end up as single loops, and
/// components with several return paths keep only vertices with loops.
/// The result is relabelled into component order.
pub fn compact_form(g: &Graph) -> Result<Reduction> {
    let mut red = Reduction::start(g);
    loop {
        let p = gamma(&red.graph);
        let pick = (0..red.graph.n()).find(|&v| match p.component_of(v) {
            None => true,
            Some(c) => p.components[c].len() > 1 && !red.graph.has_loop(v),
        });
        let Some(v) = pick else { break };
        let m = if red.graph.is_source(v) { MoveSpec::S { v } } else { MoveSpec::Col { v } };
        red.step(m)?;
    }
    let p = gamma(&red.graph);
    let mut block_of = vec![0; red.graph.n()];
    for (i, c) in p.components.iter().enumerate() {
        for &v in c {
            block_of[v] = i;
        }
    }
    red.sort_blocks(&block_of)?;
    Ok(red)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormLevel {
    /// Collapsed form: singleton cyclic components, no transition states.
    Compact,
    /// Full positive standard form.
    Positive,
}

/// Two graphs in a shared block shape, with the moves that produced them.
#[derive(Clone, Debug, Serialize)]
pub struct StandardPair {
    pub e: Reduction,
    pub f: Reduction,
    /// Shape of `B•`: sink blocks have `m_i = 0`.
    pub blocks: BlockStructure,
    pub tau: Vec<i8>,
    /// Component `i` of the first input's compact form corresponds to
    /// component `iso[i]` of the second's.
    pub iso: Vec<usize>,
}

impl StandardPair {
    pub fn b_bullet_e(&self) -> BlockMatrix {
        BlockMatrix { matrix: self.e.graph.b_bullet(), blocks: self.blocks.clone() }
    }

    pub fn b_bullet_f(&self) -> BlockMatrix {
        BlockMatrix { matrix: self.f.graph.b_bullet(), blocks: self.blocks.clone() }
    }

    /// `B` of the plugged graphs, square blocks.
    pub fn plugged(&self) -> (BlockMatrix, BlockMatrix) {
        let blocks = self.blocks.with_sizes(self.blocks.n.clone(), self.blocks.n.clone());
        (
            BlockMatrix { matrix: plug(&self.e.graph).b_matrix(), blocks: blocks.clone() },
            BlockMatrix { matrix: plug(&self.f.graph).b_matrix(), blocks },
        )
    }
}

/// Brings two graphs into a common block shape, or returns `None` when
/// their tempered component posets are not isomorphic.
pub fn standard_form_pair(ge: &Graph, gf: &Graph, level: FormLevel) -> Result<Option<StandardPair>> {
    let (e, f) = (compact_form(ge)?, compact_form(gf)?);
    let Some(iso) = poset_isos(&e.graph, &f.graph).into_iter().next() else { return Ok(None) };
    build_pair(e, f, iso, level).map(Some)
}

/// One aligned pair per isomorphism of the component posets, preferring
/// isomorphisms that preserve K-temperatures.
pub fn standard_form_pairs(ge: &Graph, gf: &Graph, level: FormLevel) -> Result<Vec<StandardPair>> {
    let (e, f) = (compact_form(ge)?, compact_form(gf)?);
    poset_isos(&e.graph, &f.graph).into_iter().map(|iso| build_pair(e.clone(), f.clone(), iso, level)).collect()
}

fn poset_isos(e: &Graph, f: &Graph) -> Vec<Vec<usize>> {
    let kisos = tempered_isos(&k_temperature(e), &k_temperature(f));
    if kisos.is_empty() {
        tau_isos(&temperature(e), &temperature(f))
    } else {
        kisos
    }
}

fn build_pair(mut e: Reduction, mut f: Reduction, iso: Vec<usize>, level: FormLevel) -> Result<StandardPair> {
    let (te, tf) = (temperature(&e.graph), temperature(&f.graph));
    let k = iso.len();
    let mut inverse = vec![0; k];
    for (i, &j) in iso.iter().enumerate() {
        inverse[j] = i;
    }
    let mut be: Vec<usize> = (0..e.graph.n()).map(|v| te.poset.component_of(v).unwrap()).collect();
    let bf_raw: Vec<usize> = (0..f.graph.n()).map(|v| inverse[tf.poset.component_of(v).unwrap()]).collect();
    let mut bf = f.sort_blocks(&bf_raw)?;
    let tau = te.tau.clone();
    let above = te.poset.above.clone();

    for i in (0..k).filter(|&i| tau[i] == 1) {
        let size = |b: &[usize]| b.iter().filter(|&&x| x == i).count();
        let need = |red: &Reduction, b: &[usize]| {
            if level == FormLevel::Compact {
                return 0;
            }
            let s = size(b);
            let members: Vec<usize> = (0..b.len()).filter(|&v| b[v] == i).collect();
            let ones = smith_ones(&red.graph.b_matrix().select(&members, &members));
            (3usize.saturating_sub(s)).max(2usize.saturating_sub(ones))
        };
        let (ne, nf) = (need(&e, &be), need(&f, &bf));
        let target = (size(&be) + ne).max(size(&bf) + nf);
        for (red, b) in [(&mut e, &mut be), (&mut f, &mut bf)] {
            while size(b) < target {
                if level == FormLevel::Positive {
                    positivize(red, b, &above, &tau, Some(i))?;
                }
                let members: Vec<usize> = (0..b.len()).filter(|&v| b[v] == i).collect();
                let v = *members.iter().max_by_key(|&&v| (red.graph.get(v, v), std::cmp::Reverse(v))).unwrap();
                red.step(MoveSpec::Rinv { v, target: v })?;
                b.push(i);
            }
        }
    }
    let be = e.sort_blocks(&be)?;
    let bf = f.sort_blocks(&bf)?;
    if level == FormLevel::Positive {
        positivize(&mut e, &be, &above, &tau, None)?;
        positivize(&mut f, &bf, &above, &tau, None)?;
    }
    let sizes: Vec<usize> = (0..k).map(|i| be.iter().filter(|&&x| x == i).count()).collect();
    let rows: Vec<usize> = (0..k).map(|i| if tau[i] == -1 { 0 } else { sizes[i] }).collect();
    let blocks = BlockStructure::new(above, rows, sizes)?;
    let pair = StandardPair { e, f, blocks, tau, iso };
    if level == FormLevel::Positive {
        for (name, bm) in [("first", pair.b_bullet_e()), ("second", pair.b_bullet_f())] {
            if let Some(v) = bm.positive_form_violation() {
                return Err(Error::StandardForm(format!("{name} graph misses the positive form: {v}")));
            }
        }
    }
    Ok(pair)
}

fn b_entry(g: &Graph, p: usize, q: usize) -> i128 {
    g.get(p, q) as i128 - i128::from(p == q)
}

/// Makes the required entries of `B` positive: the diagonal block `only`
/// if given, else every diagonal block of temperature 1 followed by every
/// off-diagonal block `(i, j)` with `γ_i > γ_j`.
///
/// Only rows and columns of vertices with a loop are ever added. Such a
/// row or column of `B` has no negative entry, so no entry decreases.
fn positivize(
    red: &mut Reduction,
    block_of: &[usize],
    above: &[Vec<bool>],
    tau: &[i8],
    only: Option<usize>,
) -> Result<()> {
    let k = tau.len();
    let members = |i: usize| -> Vec<usize> { (0..block_of.len()).filter(|&v| block_of[v] == i).collect() };
    let diagonal: Vec<usize> = match only {
        Some(i) => vec![i],
        None => (0..k).filter(|&i| tau[i] == 1).collect(),
    };
    for i in diagonal {
        positivize_diagonal(red, &members(i))?;
    }
    if only.is_some() {
        return Ok(());
    }
    let mut required = Vec::new();
    for i in (0..k).filter(|&i| tau[i] != -1) {
        for j in (0..k).filter(|&j| j != i && above[i][j]) {
            for x in members(i) {
                required.extend(members(j).into_iter().map(|y| (x, y)));
            }
        }
    }
    // Each pass raises every deficient entry reachable through one looped
    // intermediate vertex; paths shorten pass by pass.
    loop {
        let mut progress = false;
        let mut deficient = None;
        for &(x, y) in &required {
            if b_entry(&red.graph, x, y) > 0 {
                continue;
            }
            let g = &red.graph;
            let w = (0..g.n()).find(|&w| w != x && g.has_loop(w) && b_entry(g, x, w) > 0 && b_entry(g, w, y) > 0);
            match w {
                Some(w) => {
                    red.step(MoveSpec::RowAdd { from: w, into: x, sign: 1 })?;
                    progress = true;
                }
                None => deficient = Some((x, y)),
            }
        }
        match (deficient, progress) {
            (None, _) => return Ok(()),
            (Some(_), true) => continue,
            (Some((x, y)), false) => {
                let b = red.graph.b_matrix();
                return Err(Error::StandardForm(format!(
                    "no looped vertex links ({x},{y}); B = {b}, blocks = {block_of:?}"
                )));
            }
        }
    }
}

/// Makes a strongly connected block of temperature 1 entrywise positive in
/// `B`.
fn positivize_diagonal(red: &mut Reduction, members: &[usize]) -> Result<()> {
    let fail = |red: &Reduction, what: &str| {
        Error::StandardForm(format!("cannot positivize block {members:?}: {what}; B = {}", red.graph.b_matrix()))
    };
    // Give every member a loop: adding the column of a looped successor u
    // into w raises B(w,w) by the edges w → u.
    for _ in 0..members.len() {
        let g = &red.graph;
        let fix = members
            .iter()
            .copied()
            .filter(|&w| !g.has_loop(w))
            .find_map(|w| members.iter().copied().find(|&u| g.has_loop(u) && b_entry(g, w, u) > 0).map(|u| (u, w)));
        match fix {
            Some((u, w)) => red.step(MoveSpec::ColAdd { from: u, into: w, sign: 1 })?,
            None => break,
        }
    }
    if members.iter().any(|&w| !red.graph.has_loop(w)) {
        return Err(fail(red, "some vertex cannot acquire a loop"));
    }
    let v = *members.iter().max_by_key(|&&v| (red.graph.get(v, v), std::cmp::Reverse(v))).unwrap();
    if b_entry(&red.graph, v, v) < 1 {
        let g = &red.graph;
        let Some(u) = members.iter().copied().find(|&u| u != v && b_entry(g, u, v) > 0) else {
            return Err(fail(red, "nothing feeds the pivot"));
        };
        red.step(MoveSpec::RowAdd { from: u, into: v, sign: 1 })?;
    }
    // Row v positive on the block by adding column v, then every other row
    // of the block by adding row v.
    for &y in members {
        while b_entry(&red.graph, v, y) <= 0 {
            red.step(MoveSpec::ColAdd { from: v, into: y, sign: 1 })?;
        }
    }
    for &u in members.iter().filter(|&&u| u != v) {
        for _ in 0..3 {
            if members.iter().all(|&y| b_entry(&red.graph, u, y) > 0) {
                break;
            }
            red.step(MoveSpec::RowAdd { from: v, into: u, sign: 1 })?;
        }
        if members.iter().any(|&y| b_entry(&red.graph, u, y) <= 0) {
            return Err(fail(red, "row additions did not converge"));
        }
    }
    Ok(())
}
