use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::snf::smith_diagonal;
use super::IntMatrix;

/// A finitely generated abelian group `Z^free ⊕ Z/d1 ⊕ … ⊕ Z/dk` with
/// `d1 | d2 | … | dk` and every `di ≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AbelianGroupInvariants {
    pub free_rank: usize,
    #[serde(serialize_with = "ser_factors")]
    pub factors: Vec<BigInt>,
}

fn ser_factors<S: serde::Serializer>(f: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(f.iter().map(|x| x.to_string()))
}

impl AbelianGroupInvariants {
    pub fn trivial() -> Self {
        AbelianGroupInvariants { free_rank: 0, factors: Vec::new() }
    }

    pub fn free(rank: usize) -> Self {
        AbelianGroupInvariants { free_rank: rank, factors: Vec::new() }
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.factors.is_empty()
    }

    /// Order of the torsion subgroup.
    pub fn torsion_order(&self) -> BigInt {
        self.factors.iter().fold(BigInt::one(), |acc, d| acc * d)
    }
}

impl fmt::Display for AbelianGroupInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.factors.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// `Z^m / A Z^n`. An `m×0` matrix has cokernel `Z^m`.
pub fn cokernel(a: &IntMatrix) -> AbelianGroupInvariants {
    let diag = smith_diagonal(a);
    let rank = diag.iter().filter(|d| !d.is_zero()).count();
    let factors = diag.into_iter().filter(|d| !d.is_zero() && !d.abs().is_one()).map(|d| d.abs()).collect();
    AbelianGroupInvariants { free_rank: a.rows() - rank, factors }
}

/// Rank of the (free) kernel of `A: Z^n → Z^m`.
pub fn kernel_rank(a: &IntMatrix) -> usize {
    a.cols() - a.rank()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cokernels() {
        assert_eq!(cokernel(&IntMatrix::from_rows(&[vec![3]])).to_string(), "Z/3");
        assert_eq!(cokernel(&IntMatrix::zeros(2, 0)), AbelianGroupInvariants::free(2));
        assert_eq!(kernel_rank(&IntMatrix::zeros(2, 0)), 0);
        assert_eq!(cokernel(&IntMatrix::zeros(0, 3)), AbelianGroupInvariants::trivial());
        assert_eq!(kernel_rank(&IntMatrix::zeros(0, 3)), 3);
        let g = cokernel(&IntMatrix::from_rows(&[vec![2, 0], vec![0, 3], vec![0, 0]]));
        assert_eq!(g.to_string(), "Z + Z/6");
        assert_eq!(g.torsion_order(), BigInt::from(6));
    }
}
