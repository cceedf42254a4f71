use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntMatrix;

/// Row-style Hermite form: `u · a = h`, `u` unimodular, `h` in row echelon
/// form with positive pivots and entries above each pivot reduced into
/// `[0, pivot)`.
#[derive(Clone, Debug)]
pub struct Hermite {
    pub u: IntMatrix,
    pub h: IntMatrix,
    /// Pivot column of each nonzero row of `h`, in order.
    pub pivots: Vec<usize>,
}

pub fn hermite_normal_form(a: &IntMatrix) -> Hermite {
    let (m, n) = (a.rows(), a.cols());
    let mut h = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        loop {
            let pivot = (r..m)
                .filter(|&i| !h[(i, c)].is_zero())
                .min_by(|&x, &y| h[(x, c)].abs().cmp(&h[(y, c)].abs()).then(x.cmp(&y)));
            let Some(p) = pivot else { break };
            h.swap_rows(r, p);
            u.swap_rows(r, p);
            let mut clean = true;
            for i in r + 1..m {
                if h[(i, c)].is_zero() {
                    continue;
                }
                let q = -h[(i, c)].div_floor(&h[(r, c)]);
                h.add_row_multiple(i, r, &q);
                u.add_row_multiple(i, r, &q);
                clean &= h[(i, c)].is_zero();
            }
            if clean {
                break;
            }
        }
        if h[(r, c)].is_zero() {
            continue;
        }
        if h[(r, c)].is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        for i in 0..r {
            let q = -h[(i, c)].div_floor(&h[(r, c)]);
            h.add_row_multiple(i, r, &q);
            u.add_row_multiple(i, r, &q);
        }
        pivots.push(c);
        r += 1;
    }
    Hermite { u, h, pivots }
}

/// Integer solutions of `a · x = b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntegerSolution {
    NoSolution,
    /// One solution plus a basis of the homogeneous solution lattice.
    Solutions {
        particular: Vec<BigInt>,
        lattice: Vec<Vec<BigInt>>,
    },
}

impl IntegerSolution {
    pub fn is_solvable(&self) -> bool {
        matches!(self, IntegerSolution::Solutions { .. })
    }
}

pub fn solve_integer(a: &IntMatrix, b: &[BigInt]) -> IntegerSolution {
    LinearSolver::new(a).solve(b)
}

/// Factorizes `a` once for repeated solves with different right-hand sides.
#[derive(Clone, Debug)]
pub struct LinearSolver {
    v: IntMatrix,
    l: IntMatrix,
    pivots: Vec<usize>,
}

impl LinearSolver {
    pub fn new(a: &IntMatrix) -> LinearSolver {
        // Column Hermite form a · v = l via the row form of the transpose.
        let herm = hermite_normal_form(&a.transpose());
        LinearSolver { v: herm.u.transpose(), l: herm.h.transpose(), pivots: herm.pivots }
    }

    pub fn solve(&self, b: &[BigInt]) -> IntegerSolution {
        let (l, v) = (&self.l, &self.v);
        assert_eq!(l.rows(), b.len(), "right-hand side length mismatch");
        let n = v.rows();
        let r = self.pivots.len();
        let mut y = vec![BigInt::zero(); n];
        for k in 0..r {
            let p = self.pivots[k];
            let mut rhs = b[p].clone();
            for j in 0..k {
                rhs -= &l[(p, j)] * &y[j];
            }
            let (q, rem) = rhs.div_rem(&l[(p, k)]);
            if !rem.is_zero() {
                return IntegerSolution::NoSolution;
            }
            y[k] = q;
        }
        if l.mul_vec(&y) != b {
            return IntegerSolution::NoSolution;
        }
        let particular = v.mul_vec(&y);
        let lattice = (r..n)
            .map(|k| {
                let mut col: Vec<BigInt> = (0..n).map(|i| v[(i, k)].clone()).collect();
                if col.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
                    col.iter_mut().for_each(|x| *x = -std::mem::take(x));
                }
                col
            })
            .collect();
        IntegerSolution::Solutions { particular, lattice }
    }
}
