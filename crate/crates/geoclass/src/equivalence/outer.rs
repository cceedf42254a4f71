use serde::Serialize;

use crate::graph::Graph;
use crate::linalg::AbelianGroupInvariants;
use crate::structure::{k_temperature, tempered_isos, KTemperature};

/// Complete invariant of outer equivalence: the K₀-group together with a
/// canonical labelling of the K-tempered component poset.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OuterKey {
    pub k0: AbelianGroupInvariants,
    pub labels: Vec<KTemperature>,
    /// Row-major `γ_a ≥ γ_b` after relabelling.
    pub order: Vec<bool>,
}

pub fn outer_key(g: &Graph) -> OuterKey {
    let kt = k_temperature(g);
    let labels = kt.labels();
    let above = &kt.poset().above;
    let k = labels.len();
    let mut sorted: Vec<usize> = (0..k).collect();
    sorted.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
    let target: Vec<&KTemperature> = sorted.iter().map(|&a| &labels[a]).collect();

    // Minimise the order bits over label-sorted arrangements.
    let mut best: Option<Vec<bool>> = None;
    let mut arrangement = Vec::with_capacity(k);
    let mut used = vec![false; k];
    fn go(
        arr: &mut Vec<usize>,
        used: &mut [bool],
        labels: &[KTemperature],
        target: &[&KTemperature],
        above: &[Vec<bool>],
        best: &mut Option<Vec<bool>>,
    ) {
        let k = labels.len();
        let p = arr.len();
        if p == k {
            let bits: Vec<bool> = arr.iter().flat_map(|&a| arr.iter().map(move |&b| above[a][b])).collect();
            if best.as_ref().is_none_or(|b| bits < *b) {
                *best = Some(bits);
            }
            return;
        }
        for c in 0..k {
            if !used[c] && &labels[c] == target[p] {
                used[c] = true;
                arr.push(c);
                go(arr, used, labels, target, above, best);
                arr.pop();
                used[c] = false;
            }
        }
    }
    go(&mut arrangement, &mut used, &labels, &target, above, &mut best);
    OuterKey { k0: g.k0(), labels: target.into_iter().cloned().collect(), order: best.unwrap_or_default() }
}

/// Same K₀-group and isomorphic K-tempered posets.
pub fn outer_equivalent(ge: &Graph, gf: &Graph) -> bool {
    ge.k0() == gf.k0() && !tempered_isos(&k_temperature(ge), &k_temperature(gf)).is_empty()
}
