//! The component poset Γ_E with temperatures and K-temperatures.

use std::fmt;

use serde::Serialize;

use crate::graph::Graph;
use crate::linalg::{cokernel, AbelianGroupInvariants};

/// Components are the strongly connected components supporting a cycle,
/// plus one singleton per sink. They are listed predecessor-first: a path
/// from component `a` to component `b ≠ a` forces `a < b`; ties go to the
/// component with the smaller least vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentPoset {
    pub components: Vec<Vec<usize>>,
    pub transition_states: Vec<usize>,
    /// `above[a][b]` iff `γ_a ≥ γ_b`, i.e. some path runs from `γ_a` to `γ_b`.
    pub above: Vec<Vec<bool>>,
    /// Number of edges with both ends in the component.
    pub edge_counts: Vec<u64>,
    #[serde(skip)]
    membership: Vec<Option<usize>>,
}

impl ComponentPoset {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component_of(&self, v: usize) -> Option<usize> {
        self.membership[v]
    }

    /// Pairs `(a, b)` with `γ_b` an immediate successor of `γ_a`.
    pub fn hasse(&self) -> Vec<(usize, usize)> {
        let k = self.len();
        let strict = |a: usize, b: usize| a != b && self.above[a][b];
        let mut out = Vec::new();
        for a in 0..k {
            for b in 0..k {
                if strict(a, b) && !(0..k).any(|c| strict(a, c) && strict(c, b)) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn immediate_successors(&self, a: usize) -> Vec<usize> {
        self.hasse().into_iter().filter(|&(x, _)| x == a).map(|(_, b)| b).collect()
    }

    pub fn has_successor(&self, a: usize) -> bool {
        (0..self.len()).any(|b| b != a && self.above[a][b])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TemperedPoset {
    pub poset: ComponentPoset,
    /// `sgn(|γ¹| − |γ|)` per component.
    pub tau: Vec<i8>,
}

impl TemperedPoset {
    /// Every component of temperature 0 that has a successor has an
    /// immediate successor of temperature at most 0.
    pub fn condition_h(&self) -> bool {
        (0..self.poset.len()).all(|a| {
            self.tau[a] != 0
                || !self.poset.has_successor(a)
                || self.poset.immediate_successors(a).iter().any(|&b| self.tau[b] <= 0)
        })
    }
}

/// Temperature refined by the K₀-group at components of temperature 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(untagged)]
pub enum KTemperature {
    Number(i8),
    Group(AbelianGroupInvariants),
}

impl fmt::Display for KTemperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KTemperature::Number(t) => write!(f, "{t}"),
            KTemperature::Group(g) => write!(f, "{g}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KTempered {
    pub tempered: TemperedPoset,
    /// `cok((A_γ − I)ᵀ)` for components with `τ = 1`.
    pub groups: Vec<Option<AbelianGroupInvariants>>,
}

impl KTempered {
    pub fn poset(&self) -> &ComponentPoset {
        &self.tempered.poset
    }

    pub fn tau(&self) -> &[i8] {
        &self.tempered.tau
    }

    pub fn labels(&self) -> Vec<KTemperature> {
        self.tempered
            .tau
            .iter()
            .zip(&self.groups)
            .map(|(&t, g)| match g {
                Some(g) => KTemperature::Group(g.clone()),
                None => KTemperature::Number(t),
            })
            .collect()
    }
}

pub fn gamma(g: &Graph) -> ComponentPoset {
    let n = g.n();
    let reach = g.reachability();
    let mut comps: Vec<Vec<usize>> =
        g.sccs().into_iter().filter(|c| c.len() > 1 || g.has_loop(c[0]) || g.is_sink(c[0])).collect();
    let mut ordered = Vec::with_capacity(comps.len());
    while !comps.is_empty() {
        // Minimal in the predecessor-first sense: nothing left lies above it.
        let pick = (0..comps.len())
            .filter(|&i| !(0..comps.len()).any(|j| j != i && reach[comps[j][0]][comps[i][0]]))
            .min_by_key(|&i| comps[i][0])
            .expect("component graph is acyclic");
        ordered.push(comps.remove(pick));
    }
    let mut membership = vec![None; n];
    for (i, c) in ordered.iter().enumerate() {
        for &v in c {
            membership[v] = Some(i);
        }
    }
    let transition_states = (0..n).filter(|&v| membership[v].is_none()).collect();
    let above = ordered.iter().map(|a| ordered.iter().map(|b| reach[a[0]][b[0]]).collect()).collect();
    let edge_counts = ordered
        .iter()
        .map(|c| c.iter().flat_map(|&u| c.iter().map(move |&v| (u, v))).map(|(u, v)| g.get(u, v)).sum())
        .collect();
    ComponentPoset { components: ordered, transition_states, above, edge_counts, membership }
}

pub fn temperature(g: &Graph) -> TemperedPoset {
    let poset = gamma(g);
    let tau = poset
        .components
        .iter()
        .zip(&poset.edge_counts)
        .map(|(c, &e)| match e.cmp(&(c.len() as u64)) {
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => 1,
        })
        .collect();
    TemperedPoset { poset, tau }
}

pub fn k_temperature(g: &Graph) -> KTempered {
    let tempered = temperature(g);
    let b = g.b_matrix();
    let groups = tempered
        .poset
        .components
        .iter()
        .zip(&tempered.tau)
        .map(|(c, &t)| (t == 1).then(|| cokernel(&b.select(c, c).transpose())))
        .collect();
    KTempered { tempered, groups }
}

pub fn hasse(g: &Graph) -> Vec<(usize, usize)> {
    gamma(g).hasse()
}

/// All order isomorphisms between two labelled posets that preserve labels.
/// `h[a]` is the image of `a`.
pub fn order_isomorphisms<L: PartialEq>(
    above_a: &[Vec<bool>],
    labels_a: &[L],
    above_b: &[Vec<bool>],
    labels_b: &[L],
) -> Vec<Vec<usize>> {
    let k = above_a.len();
    if above_b.len() != k {
        return Vec::new();
    }
    let degree = |above: &[Vec<bool>], x: usize| {
        let up = (0..k).filter(|&y| above[y][x]).count();
        let down = (0..k).filter(|&y| above[x][y]).count();
        (up, down)
    };
    let deg_a: Vec<_> = (0..k).map(|x| degree(above_a, x)).collect();
    let deg_b: Vec<_> = (0..k).map(|x| degree(above_b, x)).collect();
    let mut out = Vec::new();
    let mut h = Vec::with_capacity(k);
    let mut used = vec![false; k];
    fn go<L: PartialEq>(
        a: usize,
        ctx: (&[Vec<bool>], &[L], &[Vec<bool>], &[L], &[(usize, usize)], &[(usize, usize)]),
        h: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        let (above_a, labels_a, above_b, labels_b, deg_a, deg_b) = ctx;
        if a == above_a.len() {
            out.push(h.clone());
            return;
        }
        for b in 0..above_b.len() {
            if used[b] || labels_a[a] != labels_b[b] || deg_a[a] != deg_b[b] {
                continue;
            }
            let consistent = (0..a).all(|x| above_a[a][x] == above_b[b][h[x]] && above_a[x][a] == above_b[h[x]][b]);
            if !consistent {
                continue;
            }
            used[b] = true;
            h.push(b);
            go(a + 1, ctx, h, used, out);
            h.pop();
            used[b] = false;
        }
    }
    go(0, (above_a, labels_a, above_b, labels_b, &deg_a, &deg_b), &mut h, &mut used, &mut out);
    out
}

/// Order isomorphisms `Γ_E → Γ_F` matching K-temperatures.
pub fn tempered_isos(e: &KTempered, f: &KTempered) -> Vec<Vec<usize>> {
    order_isomorphisms(&e.poset().above, &e.labels(), &f.poset().above, &f.labels())
}

/// Order isomorphisms `Γ_E → Γ_F` matching temperatures only.
pub fn tau_isos(e: &TemperedPoset, f: &TemperedPoset) -> Vec<Vec<usize>> {
    order_isomorphisms(&e.poset.above, &e.tau, &f.poset.above, &f.tau)
}

/// Hasse diagram in DOT, nodes coloured by temperature (−1 blue, 0 gray,
/// 1 red) and labelled with the K-temperature.
pub fn to_dot(kt: &KTempered) -> String {
    let mut s = String::from("digraph gamma {\n  node [style=filled, fontcolor=white];\n");
    for (i, c) in kt.poset().components.iter().enumerate() {
        let colour = match kt.tau()[i] {
            -1 => "blue",
            0 => "gray",
            _ => "red",
        };
        let verts: Vec<String> = c.iter().map(usize::to_string).collect();
        let k = match &kt.groups[i] {
            Some(g) => format!("\\nK0 = {g}"),
            None => String::new(),
        };
        s.push_str(&format!(
            "  c{i} [label=\"γ{i} {{{}}}\\nτ = {}{k}\", fillcolor={colour}];\n",
            verts.join(","),
            kt.tau()[i]
        ));
    }
    for (a, b) in kt.poset().hasse() {
        s.push_str(&format!("  c{a} -> c{b};\n"));
    }
    s.push_str("}\n");
    s
}
