//! Decisions for outer equivalence, inner equivalence through simple
//! graphs, block-matrix equivalence, move equivalence and Cuntz move
//! equivalence.

pub mod atlas;
mod decide;
mod linear;
mod outer;

use std::fmt;

use serde::Serialize;

use crate::linalg::{BlockStructure, IntMatrix};
use crate::moves::MoveSpec;

pub use atlas::{
    classify, elementary_equivalent, enumerate_simple, partition_inner, partition_outer, AtlasReport,
    ClassificationReport,
};
pub use decide::{decide, decide_irreducible, stable_lookup, DecideOptions};
pub use linear::{bounded_search, decide_glp_signed, decide_slp_unit, BlockDet, SignRule};
pub use outer::{outer_equivalent, outer_key, OuterKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// Move equivalence.
    Me,
    /// Cuntz move equivalence.
    Ce,
    /// Stable isomorphism of the graph algebras.
    Stable,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Me => "ME",
            Relation::Ce => "CE",
            Relation::Stable => "stable",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

impl Verdict {
    /// CLI exit status: 0 yes, 1 no, 2 unknown.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Yes => 0,
            Verdict::No => 1,
            Verdict::Unknown => 2,
        }
    }
}

/// `U · be · V = bf` with `U`, `V` in the block group fixed by `rule`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatrixWitness {
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub be: IntMatrix,
    pub bf: IntMatrix,
    pub blocks: BlockStructure,
    pub rule: SignRule,
}

impl MatrixWitness {
    /// Re-checks the product and the block constraints on `U` and `V`.
    pub fn verify(&self) -> bool {
        self.u.mul(&self.be).mul(&self.v) == self.bf
            && linear::in_group(&self.u, &self.blocks, &self.blocks.m, &self.rule.u)
            && linear::in_group(&self.v, &self.blocks, &self.blocks.n, &self.rule.v)
    }
}

/// An invariant on which the two inputs differ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Distinguisher {
    pub invariant: String,
    pub left: String,
    pub right: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceVerdict {
    pub verdict: Verdict,
    /// The procedure that produced the verdict.
    pub rule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<MatrixWitness>,
    /// Moves bringing each input to the matrices of the witness.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moves: Option<(Vec<MoveSpec>, Vec<MoveSpec>)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distinguisher: Option<Distinguisher>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl EquivalenceVerdict {
    pub fn yes(rule: impl Into<String>) -> Self {
        EquivalenceVerdict {
            verdict: Verdict::Yes,
            rule: rule.into(),
            witness: None,
            moves: None,
            distinguisher: None,
            note: None,
        }
    }

    pub fn no(
        rule: impl Into<String>,
        invariant: impl Into<String>,
        left: impl fmt::Display,
        right: impl fmt::Display,
    ) -> Self {
        EquivalenceVerdict {
            verdict: Verdict::No,
            rule: rule.into(),
            witness: None,
            moves: None,
            distinguisher: Some(Distinguisher {
                invariant: invariant.into(),
                left: left.to_string(),
                right: right.to_string(),
            }),
            note: None,
        }
    }

    pub fn unknown(rule: impl Into<String>, note: impl Into<String>) -> Self {
        EquivalenceVerdict {
            verdict: Verdict::Unknown,
            rule: rule.into(),
            witness: None,
            moves: None,
            distinguisher: None,
            note: Some(note.into()),
        }
    }

    pub fn with_witness(mut self, w: MatrixWitness) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn is_yes(&self) -> bool {
        self.verdict == Verdict::Yes
    }

    pub fn is_no(&self) -> bool {
        self.verdict == Verdict::No
    }
}
