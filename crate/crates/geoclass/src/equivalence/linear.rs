//! Block-matrix equivalence `U · B_E · V = B_F` with `U`, `V` block upper
//! triangular over the same poset.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{EquivalenceVerdict, MatrixWitness};
use crate::error::{Error, Result};
use crate::linalg::{BlockMatrix, BlockStructure, IntMatrix, IntegerSolution, LinearSolver};

/// Allowed determinant of a diagonal block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockDet {
    One,
    Signed,
}

impl BlockDet {
    fn admits(self, d: &BigInt) -> bool {
        match self {
            BlockDet::One => d.is_one(),
            BlockDet::Signed => d.abs().is_one(),
        }
    }
}

/// Determinant constraints on the diagonal blocks of `U` and `V`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignRule {
    pub u: Vec<BlockDet>,
    pub v: Vec<BlockDet>,
}

impl SignRule {
    /// `SL_P`: every diagonal block has determinant 1.
    pub fn special(k: usize) -> SignRule {
        SignRule { u: vec![BlockDet::One; k], v: vec![BlockDet::One; k] }
    }

    /// `GL_P`.
    pub fn general(k: usize) -> SignRule {
        SignRule { u: vec![BlockDet::Signed; k], v: vec![BlockDet::Signed; k] }
    }

    /// Cuntz move equivalence: fixed blocks where `τ ≤ 0`, signs free where
    /// `τ = 1`.
    pub fn cuntz(tau: &[i8]) -> SignRule {
        let d: Vec<BlockDet> = tau.iter().map(|&t| if t == 1 { BlockDet::Signed } else { BlockDet::One }).collect();
        SignRule { u: d.clone(), v: d }
    }

    /// `V` special, signs of `U` free. Matches the filtered K-theory
    /// isomorphisms induced on cokernels.
    pub fn k_theory(k: usize) -> SignRule {
        SignRule { u: vec![BlockDet::Signed; k], v: vec![BlockDet::One; k] }
    }
}

/// `m` is block upper triangular for `order` with block sizes `sizes` and
/// diagonal blocks admitted by `rule`.
pub(crate) fn in_group(m: &IntMatrix, order: &BlockStructure, sizes: &[usize], rule: &[BlockDet]) -> bool {
    let total: usize = sizes.iter().sum();
    if m.rows() != total || m.cols() != total || rule.len() != order.len() {
        return false;
    }
    let blocks = order.with_sizes(sizes.to_vec(), sizes.to_vec());
    let bm = BlockMatrix { matrix: m.clone(), blocks };
    if !bm.in_mp() {
        return false;
    }
    (0..order.len()).all(|i| rule[i].admits(&bm.block(i, i).det()))
}

fn check_pair(be: &BlockMatrix, bf: &BlockMatrix) -> Result<()> {
    if be.blocks != bf.blocks {
        return Err(Error::Precondition("the two matrices carry different block structures".into()));
    }
    if be.blocks.m != be.blocks.n {
        return Err(Error::Precondition("blocks must be square".into()));
    }
    for (name, b) in [("first", be), ("second", bf)] {
        if let Some((r, c)) = b.pattern_violation() {
            return Err(Error::Precondition(format!(
                "{name} matrix has a nonzero entry at ({r},{c}) outside the block pattern"
            )));
        }
    }
    Ok(())
}

fn sign(d: i8) -> BigInt {
    BigInt::from(d)
}

/// Solves `U · be = bf · W` for unit blocks with prescribed diagonals
/// `du`, `dw`, then returns `(U, W⁻¹)`.
fn solve_unit(
    be: &IntMatrix,
    bf: &IntMatrix,
    blocks: &BlockStructure,
    du: &[i8],
    dw: &[i8],
) -> Option<(IntMatrix, IntMatrix)> {
    let k = blocks.len();
    let strict: Vec<(usize, usize)> =
        (0..k).flat_map(|p| (0..k).map(move |q| (p, q))).filter(|&(p, q)| p != q && blocks.precedes(p, q)).collect();
    let s = strict.len();
    // Unknowns: U'(p,q) then W'(p,q) over the strict pairs.
    let a = IntMatrix::from_fn(k * k, 2 * s, |row, col| {
        let (ra, rc) = (row / k, row % k);
        if col < s {
            let (p, q) = strict[col];
            if p == ra {
                be[(q, rc)].clone()
            } else {
                BigInt::zero()
            }
        } else {
            let (p, q) = strict[col - s];
            if q == rc {
                -bf[(ra, p)].clone()
            } else {
                BigInt::zero()
            }
        }
    });
    let rhs: Vec<BigInt> = (0..k * k)
        .map(|row| (row / k, row % k))
        .map(|(x, c)| &bf[(x, c)] * sign(dw[c]) - sign(du[x]) * &be[(x, c)])
        .collect();
    let IntegerSolution::Solutions { particular, .. } = LinearSolver::new(&a).solve(&rhs) else { return None };
    let mut u = IntMatrix::diagonal(&du.iter().map(|&d| sign(d)).collect::<Vec<_>>());
    let mut w = IntMatrix::diagonal(&dw.iter().map(|&d| sign(d)).collect::<Vec<_>>());
    for (idx, &(p, q)) in strict.iter().enumerate() {
        u[(p, q)] = particular[idx].clone();
        w[(p, q)] = particular[s + idx].clone();
    }
    let v = w.unimodular_inverse()?;
    (u.mul(be).mul(&v) == *bf).then_some((u, v))
}

fn sign_choices(rule: &[BlockDet]) -> Vec<Vec<i8>> {
    let free: Vec<usize> = (0..rule.len()).filter(|&i| rule[i] == BlockDet::Signed).collect();
    (0u64..1 << free.len())
        .map(|mask| {
            let mut d = vec![1i8; rule.len()];
            for (bit, &i) in free.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    d[i] = -1;
                }
            }
            d
        })
        .collect()
}

/// Exact `SL_P` equivalence for 1×1 blocks: the off-diagonal entries of
/// `U` and `V⁻¹` enter linearly, so one integer system decides.
pub fn decide_slp_unit(be: &BlockMatrix, bf: &BlockMatrix) -> Result<EquivalenceVerdict> {
    decide_glp_signed(be, bf, &SignRule::special(be.blocks.len()))
}

/// Exact equivalence for 1×1 blocks with the diagonal signs of `U` and `V`
/// ranging over what `rule` allows.
pub fn decide_glp_signed(be: &BlockMatrix, bf: &BlockMatrix, rule: &SignRule) -> Result<EquivalenceVerdict> {
    check_pair(be, bf)?;
    if !be.blocks.is_square_unit() {
        return Err(Error::Precondition("every block must be 1×1".into()));
    }
    let k = be.blocks.len();
    if rule.u.len() != k || rule.v.len() != k {
        return Err(Error::Precondition("sign rule length differs from the poset".into()));
    }
    let group =
        if rule.u.iter().chain(&rule.v).all(|&d| d == BlockDet::One) { "SL_P" } else { "GL_P (restricted signs)" };
    for du in sign_choices(&rule.u) {
        for dv in sign_choices(&rule.v) {
            if let Some((u, v)) = solve_unit(&be.matrix, &bf.matrix, &be.blocks, &du, &dv) {
                let w = MatrixWitness {
                    u,
                    v,
                    be: be.matrix.clone(),
                    bf: bf.matrix.clone(),
                    blocks: be.blocks.clone(),
                    rule: rule.clone(),
                };
                debug_assert!(w.verify());
                return Ok(EquivalenceVerdict::yes(format!("{group} linear system (unit blocks)")).with_witness(w));
            }
        }
    }
    Ok(EquivalenceVerdict::no(
        format!("{group} linear system (unit blocks)"),
        format!("no {group} equivalence: the integer system has no solution for any admissible diagonal"),
        &be.matrix,
        &bf.matrix,
    ))
}

/// Searches `U` with entries in `[−bound, bound]`, solving `bf · W = U · be`
/// for `W = V⁻¹` in the block pattern. Returns Yes with a verified witness
/// or Unknown once the space or `cap` candidates are exhausted.
pub fn bounded_search(
    be: &BlockMatrix,
    bf: &BlockMatrix,
    rule: &SignRule,
    bound: i64,
    cap: u64,
) -> Result<EquivalenceVerdict> {
    check_pair(be, bf)?;
    let blocks = &be.blocks;
    let n = blocks.cols();
    let k = blocks.len();
    let fixed_one = |r: usize, c: usize| {
        let (i, j) = (blocks.row_block_of(r), blocks.col_block_of(c));
        i == j && blocks.n[i] == 1 && rule.u[i] == BlockDet::One
    };
    let pattern: Vec<(usize, usize)> = (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .filter(|&(r, c)| blocks.precedes(blocks.row_block_of(r), blocks.col_block_of(c)))
        .collect();
    let free_u: Vec<(usize, usize)> = pattern.iter().copied().filter(|&(r, c)| !fixed_one(r, c)).collect();
    // bf · W = R, unknowns W over the pattern.
    let a = IntMatrix::from_fn(n * n, pattern.len(), |row, col| {
        let (x, c) = (row / n, row % n);
        let (p, q) = pattern[col];
        if q == c {
            bf.matrix[(x, p)].clone()
        } else {
            BigInt::zero()
        }
    });
    let solver = LinearSolver::new(&a);
    let sizes = blocks.n.clone();
    let mut u = IntMatrix::zeros(n, n);
    for &(r, c) in &pattern {
        if fixed_one(r, c) {
            u[(r, c)] = BigInt::one();
        }
    }
    let mut digits = vec![-bound; free_u.len()];
    let mut tried = 0u64;
    loop {
        if tried >= cap {
            return Ok(EquivalenceVerdict::unknown(
                "bounded search",
                format!("budget of {cap} candidates exhausted with entries in [-{bound},{bound}]"),
            ));
        }
        tried += 1;
        for (idx, &(r, c)) in free_u.iter().enumerate() {
            u[(r, c)] = BigInt::from(digits[idx]);
        }
        let diag_ok = (0..k).all(|i| {
            let range: Vec<usize> = blocks.col_range(i).collect();
            rule.u[i].admits(&u.select(&range, &range).det())
        });
        if diag_ok {
            if let Some(v) = complete(&u, be, &solver, &pattern, &sizes, rule) {
                let w = MatrixWitness {
                    u: u.clone(),
                    v,
                    be: be.matrix.clone(),
                    bf: bf.matrix.clone(),
                    blocks: blocks.clone(),
                    rule: rule.clone(),
                };
                if w.verify() {
                    return Ok(EquivalenceVerdict::yes("bounded search")
                        .with_witness(w)
                        .with_note(format!("found after {tried} candidates")));
                }
            }
        }
        // Odometer step.
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return Ok(EquivalenceVerdict::unknown(
                    "bounded search",
                    format!("all {tried} candidates with entries in [-{bound},{bound}] exhausted"),
                ));
            }
            if digits[pos] < bound {
                digits[pos] += 1;
                break;
            }
            digits[pos] = -bound;
            pos += 1;
        }
    }
}

fn complete(
    u: &IntMatrix,
    be: &BlockMatrix,
    solver: &LinearSolver,
    pattern: &[(usize, usize)],
    sizes: &[usize],
    rule: &SignRule,
) -> Option<IntMatrix> {
    let n = u.rows();
    let r = u.mul(&be.matrix);
    let rhs: Vec<BigInt> = (0..n * n).map(|row| r[(row / n, row % n)].clone()).collect();
    let IntegerSolution::Solutions { particular, lattice } = solver.solve(&rhs) else { return None };
    let build = |x: &[BigInt]| {
        let mut w = IntMatrix::zeros(n, n);
        for (idx, &(p, q)) in pattern.iter().enumerate() {
            w[(p, q)] = x[idx].clone();
        }
        w
    };
    let mut candidates = vec![particular.clone()];
    for l in &lattice {
        for s in [1i64, -1] {
            candidates.push(particular.iter().zip(l).map(|(a, b)| a + b * s).collect());
        }
    }
    candidates.into_iter().find_map(|x| {
        let w = build(&x);
        if !in_group(&w, &be.blocks, sizes, &rule.v) {
            return None;
        }
        w.unimodular_inverse()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit3() -> BlockStructure {
        BlockStructure::linear(vec![1; 3], vec![1; 3]).unwrap()
    }

    fn bm(rows: &[Vec<i64>]) -> BlockMatrix {
        BlockMatrix::new(IntMatrix::from_rows(rows), unit3()).unwrap()
    }

    fn unsolvable() -> (BlockMatrix, BlockMatrix) {
        (bm(&[vec![0, 1, 2], vec![0, 1, 1], vec![0, 0, 0]]), bm(&[vec![0, 1, 0], vec![0, 1, 1], vec![0, 0, 0]]))
    }

    #[test]
    fn unsolvable_pair_has_no_slp_solution() {
        let (e, f) = unsolvable();
        assert!(decide_slp_unit(&e, &f).unwrap().is_no());
        assert!(decide_glp_signed(&e, &f, &SignRule::cuntz(&[0, 1, 0])).unwrap().is_no());
    }

    #[test]
    fn k_theory_rule_finds_sign_flip_witness() {
        let (e, f) = unsolvable();
        let v = decide_glp_signed(&e, &f, &SignRule::k_theory(3)).unwrap();
        assert!(v.is_yes());
        assert!(v.witness.unwrap().verify());
    }

    #[test]
    fn identical_matrices_are_equivalent() {
        let (e, _) = unsolvable();
        let v = decide_slp_unit(&e, &e).unwrap();
        let w = v.witness.unwrap();
        assert!(w.verify());
    }

    #[test]
    fn bounded_search_recovers_unit_witness() {
        let e = bm(&[vec![1, 2, 0], vec![0, 1, 1], vec![0, 0, 2]]);
        let u = IntMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, -1], vec![0, 0, 1]]);
        let v = IntMatrix::from_rows(&[vec![1, 0, 1], vec![0, 1, 0], vec![0, 0, 1]]);
        let f = BlockMatrix::new(u.mul(&e.matrix).mul(&v), unit3()).unwrap();
        let r = bounded_search(&e, &f, &SignRule::special(3), 1, 1_000_000).unwrap();
        assert!(r.is_yes());
        assert!(decide_slp_unit(&e, &f).unwrap().is_yes());
    }

    #[test]
    fn pattern_violation_is_a_precondition_error() {
        let bad = BlockMatrix {
            matrix: IntMatrix::from_rows(&[vec![0, 0, 0], vec![1, 0, 0], vec![0, 0, 0]]),
            blocks: unit3(),
        };
        let (e, _) = unsolvable();
        assert!(matches!(decide_slp_unit(&bad, &e), Err(Error::Precondition(_))));
    }
}
