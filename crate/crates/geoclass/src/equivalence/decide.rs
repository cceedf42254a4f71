use serde::Serialize;

use super::linear::{bounded_search, decide_glp_signed, SignRule};
use super::{EquivalenceVerdict, Relation, Verdict};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::moves::{compact_form, standard_form_pairs, FormLevel, StandardPair};
use crate::structure::{k_temperature, tau_isos, temperature, tempered_isos, KTempered, TemperedPoset};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecideOptions {
    pub relation: Relation,
    /// Entry bound of the fallback search.
    pub search_bound: i64,
    /// Candidate budget of the fallback search.
    pub search_cap: u64,
    /// Answer the known stably isomorphic pairs that no matrix criterion
    /// reaches.
    pub lookup: bool,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions { relation: Relation::Me, search_bound: 2, search_cap: 10_000_000, lookup: true }
    }
}

impl DecideOptions {
    pub fn relation(relation: Relation) -> Self {
        DecideOptions { relation, ..Default::default() }
    }
}

fn show_tempered(t: &TemperedPoset) -> String {
    format!("tau={:?} hasse={:?}", t.tau, t.poset.hasse())
}

fn show_k(t: &KTempered) -> String {
    let labels: Vec<String> = t.labels().iter().map(|l| l.to_string()).collect();
    format!("labels=[{}] hasse={:?}", labels.join(", "), t.poset().hasse())
}

/// Invariant filters shared by every relation.
fn filters(ge: &Graph, gf: &Graph) -> Option<EquivalenceVerdict> {
    let (te, tf) = (temperature(ge), temperature(gf));
    if tau_isos(&te, &tf).is_empty() {
        return Some(EquivalenceVerdict::no(
            "invariant filter",
            "tempered component poset",
            show_tempered(&te),
            show_tempered(&tf),
        ));
    }
    let (ke, kf) = (k_temperature(ge), k_temperature(gf));
    if tempered_isos(&ke, &kf).is_empty() {
        return Some(EquivalenceVerdict::no(
            "invariant filter",
            "K-tempered component poset",
            show_k(&ke),
            show_k(&kf),
        ));
    }
    let (k0e, k0f) = (ge.k0(), gf.k0());
    if k0e != k0f {
        return Some(EquivalenceVerdict::no("invariant filter", "K0 = cok((B•)^T)", k0e, k0f));
    }
    None
}

fn is_irreducible(g: &Graph) -> bool {
    let t = temperature(g);
    t.tau == [1]
}

/// Graphs whose compact form is one component of temperature 1: decided
/// by the Bowen–Franks group, plus the sign of `det(I − A)` for move
/// equivalence.
pub fn decide_irreducible(ge: &Graph, gf: &Graph, relation: Relation) -> Result<EquivalenceVerdict> {
    let (e, f) = (compact_form(ge)?.graph, compact_form(gf)?.graph);
    if !is_irreducible(&e) || !is_irreducible(&f) {
        return Err(Error::Precondition("both graphs must reduce to a single component of temperature 1".into()));
    }
    let rule = "irreducible classification";
    let (bfe, bff) = (e.bowen_franks(), f.bowen_franks());
    if bfe != bff {
        return Ok(EquivalenceVerdict::no(rule, "Bowen-Franks group cok(I - A)", bfe, bff));
    }
    if relation == Relation::Me && e.det_sign() != f.det_sign() {
        return Ok(EquivalenceVerdict::no(rule, "sign of det(I - A)", e.det_sign(), f.det_sign()));
    }
    Ok(EquivalenceVerdict::yes(rule))
}

fn lookup_pairs() -> Vec<(Graph, Graph)> {
    let g = |rows: [[u64; 3]; 3]| Graph::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap();
    let e = g([[1, 1, 2], [0, 2, 1], [0, 0, 1]]);
    let f = g([[1, 1, 0], [0, 2, 1], [0, 0, 1]]);
    let ev = g([[1, 1, 2], [0, 2, 1], [0, 0, 0]]);
    let fv = g([[1, 1, 0], [0, 2, 1], [0, 0, 0]]);
    vec![(e, f), (ev, fv)]
}

fn compact_canonical(g: &Graph) -> Result<Option<Graph>> {
    let c = compact_form(g)?.graph;
    if c.n() > crate::graph::CANONICAL_BOUND {
        return Ok(None);
    }
    c.canonical_form().map(Some)
}

/// Pairs known to have stably isomorphic algebras although they are not
/// Cuntz move equivalent. Matched up to moves and relabelling.
pub fn stable_lookup(ge: &Graph, gf: &Graph) -> Result<bool> {
    let (Some(ce), Some(cf)) = (compact_canonical(ge)?, compact_canonical(gf)?) else { return Ok(false) };
    for (a, b) in lookup_pairs() {
        let (a, b) = (a.canonical_form()?, b.canonical_form()?);
        if (ce == a && cf == b) || (ce == b && cf == a) {
            return Ok(true);
        }
    }
    Ok(false)
}

fn sign_rule(relation: Relation, tau: &[i8]) -> SignRule {
    match relation {
        Relation::Me => SignRule::special(tau.len()),
        _ => SignRule::cuntz(tau),
    }
}

fn with_moves(mut v: EquivalenceVerdict, pair: &StandardPair) -> EquivalenceVerdict {
    v.moves = Some((pair.e.moves.clone(), pair.f.moves.clone()));
    v
}

/// Move equivalence or Cuntz move equivalence.
fn decide_moves(ge: &Graph, gf: &Graph, relation: Relation, opts: &DecideOptions) -> Result<EquivalenceVerdict> {
    if let Some(v) = filters(ge, gf) {
        return Ok(v);
    }
    let pairs = standard_form_pairs(ge, gf, FormLevel::Compact)?;
    if pairs.is_empty() {
        return Err(Error::StandardForm("compact forms lost the poset isomorphism".into()));
    }
    if pairs[0].tau == [1] {
        return decide_irreducible(ge, gf, relation);
    }

    if pairs[0].blocks.n.iter().all(|&s| s == 1) {
        let mut last = None;
        for pair in &pairs {
            let (be, bf) = pair.plugged();
            let v = decide_glp_signed(&be, &bf, &sign_rule(relation, &pair.tau))?;
            if v.is_yes() {
                return Ok(with_moves(v, pair));
            }
            last = Some((v, pair));
        }
        // Unit blocks of temperature 1 are exact when the component is a
        // pair of loops; otherwise a No here only rules out this shape.
        let exact = pairs.iter().all(|pair| {
            (0..pair.tau.len())
                .filter(|&i| pair.tau[i] == 1)
                .all(|i| pair.e.graph.get(i, i) == 2 && pair.f.graph.get(i, i) == 2)
        });
        if exact {
            let (v, pair) = last.expect("at least one pair");
            return Ok(with_moves(v, pair).with_note(format!("checked {} poset isomorphisms", pairs.len())));
        }
    }

    // K-web refutation: every admissible identification must fail.
    let mut refuted = Vec::new();
    for pair in &pairs {
        let (we, wf) = (pair.b_bullet_e().kweb_invariants()?, pair.b_bullet_f().kweb_invariants()?);
        if we == wf {
            break;
        }
        refuted.push((we, wf));
    }
    if refuted.len() == pairs.len() {
        let (we, wf) = &refuted[0];
        let show = |w: &crate::linalg::KWebInvariants| serde_json::to_string(w).unwrap_or_default();
        return Ok(EquivalenceVerdict::no("K-web", "cokernels and kernel ranks of the K-web", show(we), show(wf)));
    }

    let positive = match standard_form_pairs(ge, gf, FormLevel::Positive) {
        Ok(p) => p,
        Err(e) => {
            return Ok(EquivalenceVerdict::unknown(
                "bounded search",
                format!("positive standard form unavailable: {e}"),
            ))
        }
    };
    let mut last = None;
    for pair in &positive {
        let (be, bf) = pair.plugged();
        let v = bounded_search(&be, &bf, &sign_rule(relation, &pair.tau), opts.search_bound, opts.search_cap)?;
        if v.is_yes() {
            return Ok(with_moves(v, pair));
        }
        last = Some(v);
    }
    Ok(last.unwrap_or_else(|| EquivalenceVerdict::unknown("bounded search", "no aligned standard forms")))
}

pub fn decide(ge: &Graph, gf: &Graph, opts: &DecideOptions) -> Result<EquivalenceVerdict> {
    match opts.relation {
        Relation::Me | Relation::Ce => decide_moves(ge, gf, opts.relation, opts),
        Relation::Stable => {
            let ce = decide_moves(ge, gf, Relation::Ce, opts)?;
            if ce.is_yes() {
                return Ok(ce);
            }
            if opts.lookup && stable_lookup(ge, gf)? {
                let mut v = EquivalenceVerdict::yes("lookup");
                v.note = Some("known stably isomorphic pair outside Cuntz move equivalence; no matrix witness".into());
                return Ok(v);
            }
            if ce.verdict == Verdict::No && ge.condition_h() && gf.condition_h() {
                let mut v = ce;
                v.rule = format!("{} under condition (H)", v.rule);
                return Ok(v);
            }
            let note = match ce.verdict {
                Verdict::No => {
                    "not Cuntz move equivalent, but condition (H) fails so stable isomorphism stays open".to_string()
                }
                _ => format!("Cuntz move equivalence undecided: {}", ce.note.clone().unwrap_or_default()),
            };
            Ok(EquivalenceVerdict::unknown(ce.rule, note))
        }
    }
}
