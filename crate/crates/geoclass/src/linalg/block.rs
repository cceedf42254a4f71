use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::Serialize;

use super::abelian::{cokernel, kernel_rank, AbelianGroupInvariants};
use super::snf::smith_diagonal;
use super::IntMatrix;
use crate::error::{Error, Result};

/// A partial order on `0..N` compatible with the natural order, together
/// with row and column multiindices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockStructure {
    #[serde(rename = "poset_edges", serialize_with = "ser_order")]
    leq: Vec<Vec<bool>>,
    pub m: Vec<usize>,
    pub n: Vec<usize>,
}

fn ser_order<S: serde::Serializer>(leq: &[Vec<bool>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<(usize, usize)> = (0..leq.len())
        .flat_map(|i| (0..leq.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && leq[i][j])
        .collect();
    s.collect_seq(pairs)
}

impl BlockStructure {
    /// `leq[i][j]` means `i ⪯ j`. The relation is checked to be a partial
    /// order with `i ⪯ j ⇒ i ≤ j`.
    pub fn new(leq: Vec<Vec<bool>>, m: Vec<usize>, n: Vec<usize>) -> Result<BlockStructure> {
        let k = leq.len();
        if m.len() != k || n.len() != k || leq.iter().any(|r| r.len() != k) {
            return Err(Error::Block("multiindex length differs from poset size".into()));
        }
        for i in 0..k {
            if !leq[i][i] {
                return Err(Error::Block(format!("order is not reflexive at {i}")));
            }
            for j in 0..k {
                if leq[i][j] && j < i {
                    return Err(Error::Block(format!("{i} ⪯ {j} violates i ⪯ j ⇒ i ≤ j")));
                }
                for l in 0..k {
                    if leq[i][j] && leq[j][l] && !leq[i][l] {
                        return Err(Error::Block(format!("order is not transitive at {i},{j},{l}")));
                    }
                }
            }
        }
        Ok(BlockStructure { leq, m, n })
    }

    pub fn linear(m: Vec<usize>, n: Vec<usize>) -> Result<BlockStructure> {
        let k = m.len();
        let leq = (0..k).map(|i| (0..k).map(|j| i <= j).collect()).collect();
        BlockStructure::new(leq, m, n)
    }

    /// All blocks 1×1.
    pub fn unit(leq: Vec<Vec<bool>>) -> Result<BlockStructure> {
        let k = leq.len();
        BlockStructure::new(leq, vec![1; k], vec![1; k])
    }

    pub fn len(&self) -> usize {
        self.leq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leq.is_empty()
    }

    pub fn precedes(&self, i: usize, j: usize) -> bool {
        self.leq[i][j]
    }

    pub fn order(&self) -> &[Vec<bool>] {
        &self.leq
    }

    pub fn rows(&self) -> usize {
        self.m.iter().sum()
    }

    pub fn cols(&self) -> usize {
        self.n.iter().sum()
    }

    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        let s: usize = self.m[..i].iter().sum();
        s..s + self.m[i]
    }

    pub fn col_range(&self, i: usize) -> std::ops::Range<usize> {
        let s: usize = self.n[..i].iter().sum();
        s..s + self.n[i]
    }

    pub fn row_block_of(&self, r: usize) -> usize {
        (0..self.len()).find(|&i| self.row_range(i).contains(&r)).expect("row out of range")
    }

    pub fn col_block_of(&self, c: usize) -> usize {
        (0..self.len()).find(|&i| self.col_range(i).contains(&c)).expect("column out of range")
    }

    pub fn is_square_unit(&self) -> bool {
        self.m.iter().chain(&self.n).all(|&x| x == 1)
    }

    pub fn with_sizes(&self, m: Vec<usize>, n: Vec<usize>) -> BlockStructure {
        assert_eq!(m.len(), self.len());
        assert_eq!(n.len(), self.len());
        BlockStructure { leq: self.leq.clone(), m, n }
    }
}

/// An integer matrix carrying a block structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockMatrix {
    pub matrix: IntMatrix,
    pub blocks: BlockStructure,
}

/// Group data of the K-web: cokernels over `I₀` and kernel ranks over `I₁`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KWebInvariants {
    pub cokernels: BTreeMap<Vec<usize>, AbelianGroupInvariants>,
    pub kernel_ranks: BTreeMap<usize, usize>,
}

impl BlockMatrix {
    pub fn new(matrix: IntMatrix, blocks: BlockStructure) -> Result<BlockMatrix> {
        if matrix.rows() != blocks.rows() || matrix.cols() != blocks.cols() {
            return Err(Error::Block(format!(
                "matrix is {}×{} but multiindices sum to {}×{}",
                matrix.rows(),
                matrix.cols(),
                blocks.rows(),
                blocks.cols()
            )));
        }
        Ok(BlockMatrix { matrix, blocks })
    }

    pub fn block(&self, i: usize, j: usize) -> IntMatrix {
        let rows: Vec<usize> = self.blocks.row_range(i).collect();
        let cols: Vec<usize> = self.blocks.col_range(j).collect();
        self.matrix.select(&rows, &cols)
    }

    /// `B{s}` for a set of block indices.
    pub fn sub(&self, s: &[usize]) -> IntMatrix {
        let rows: Vec<usize> = s.iter().flat_map(|&i| self.blocks.row_range(i)).collect();
        let cols: Vec<usize> = s.iter().flat_map(|&i| self.blocks.col_range(i)).collect();
        self.matrix.select(&rows, &cols)
    }

    /// First block `(i, j)` with `B{i,j} ≠ 0` although `i ⋠ j`.
    pub fn pattern_violation(&self) -> Option<(usize, usize)> {
        let k = self.blocks.len();
        (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .find(|&(i, j)| !self.blocks.precedes(i, j) && !self.block(i, j).is_zero())
    }

    pub fn in_mp(&self) -> bool {
        self.pattern_violation().is_none()
    }

    /// Enlarges each diagonal block by an `r_i × r_i` identity in its lower
    /// right corner.
    pub fn iota(&self, r: &[usize]) -> BlockMatrix {
        let k = self.blocks.len();
        assert_eq!(r.len(), k);
        let m: Vec<usize> = (0..k).map(|i| self.blocks.m[i] + r[i]).collect();
        let n: Vec<usize> = (0..k).map(|i| self.blocks.n[i] + r[i]).collect();
        let blocks = self.blocks.with_sizes(m, n);
        let mut out = IntMatrix::zeros(blocks.rows(), blocks.cols());
        for i in 0..k {
            for j in 0..k {
                let (r0, c0) = (blocks.row_range(i).start, blocks.col_range(j).start);
                let (s0, t0) = (self.blocks.row_range(i).start, self.blocks.col_range(j).start);
                for a in 0..self.blocks.m[i] {
                    for b in 0..self.blocks.n[j] {
                        out[(r0 + a, c0 + b)] = self.matrix[(s0 + a, t0 + b)].clone();
                    }
                }
            }
            let (r0, c0) = (blocks.row_range(i).start + self.blocks.m[i], blocks.col_range(i).start + self.blocks.n[i]);
            for a in 0..r[i] {
                out[(r0 + a, c0 + a)] = BigInt::one();
            }
        }
        BlockMatrix { matrix: out, blocks }
    }

    pub fn neg(&self) -> BlockMatrix {
        BlockMatrix { matrix: self.matrix.neg(), blocks: self.blocks.clone() }
    }

    pub fn kweb_invariants(&self) -> Result<KWebInvariants> {
        if let Some((i, j)) = self.pattern_violation() {
            return Err(Error::Block(format!("block ({i},{j}) is nonzero but {i} ⋠ {j}")));
        }
        let k = self.blocks.len();
        let mut cokernels = BTreeMap::new();
        let mut kernel_ranks = BTreeMap::new();
        for i in 0..k {
            let below: Vec<usize> = (0..k).filter(|&j| j != i && self.blocks.precedes(j, i)).collect();
            let closed: Vec<usize> = (0..k).filter(|&j| self.blocks.precedes(j, i)).collect();
            if !below.is_empty() {
                cokernels.insert(below.clone(), cokernel(&self.sub(&below)));
                kernel_ranks.insert(i, kernel_rank(&self.block(i, i)));
            }
            cokernels.insert(closed.clone(), cokernel(&self.sub(&closed)));
            cokernels.insert(vec![i], cokernel(&self.block(i, i)));
        }
        Ok(KWebInvariants { cokernels, kernel_ranks })
    }

    /// Checks the positive standard form predicate and names the first
    /// failing clause.
    pub fn positive_form_violation(&self) -> Option<String> {
        if let Some((i, j)) = self.pattern_violation() {
            return Some(format!("pattern: block ({i},{j}) nonzero outside the order"));
        }
        let k = self.blocks.len();
        for i in 0..k {
            for j in 0..k {
                if i != j && self.blocks.precedes(i, j) {
                    let b = self.block(i, j);
                    if b.rows() > 0 && b.cols() > 0 && !all_positive(&b) {
                        return Some(format!("(i) block ({i},{j}) is not positive"));
                    }
                }
            }
        }
        for i in 0..k {
            let (mi, ni) = (self.blocks.m[i], self.blocks.n[i]);
            let b = self.block(i, i);
            match mi {
                0 if ni != 1 => return Some(format!("(ii) block {i} has m=0 but n={ni}")),
                0 => {}
                1 if ni != 1 || !b.is_zero() => {
                    return Some(format!("(iii) block {i} has m=1 but is not the 1×1 zero block"))
                }
                1 => {}
                _ => {
                    if !all_positive(&b) {
                        return Some(format!("(iv) diagonal block {i} is not positive"));
                    }
                    if mi < 3 || ni < 3 {
                        return Some(format!("(iv) diagonal block {i} is smaller than 3×3"));
                    }
                    let ones = smith_diagonal(&b).iter().filter(|d| d.is_one()).count();
                    if ones < 2 {
                        return Some(format!("(iv) Smith form of block {i} has fewer than two 1's"));
                    }
                }
            }
        }
        None
    }
}

fn all_positive(m: &IntMatrix) -> bool {
    (0..m.rows()).all(|i| m.row(i).iter().all(|x| x.is_positive()))
}

/// Number of unit entries in the Smith form.
pub fn smith_ones(m: &IntMatrix) -> usize {
    smith_diagonal(m).iter().filter(|d| d.is_one()).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unsolvable_left() -> BlockMatrix {
        let b = IntMatrix::from_rows(&[vec![0, 1, 2], vec![0, 1, 1], vec![0, 0, 0]]);
        BlockMatrix::new(b, BlockStructure::linear(vec![1; 3], vec![1; 3]).unwrap()).unwrap()
    }

    #[test]
    fn rejects_bad_orders() {
        let leq = vec![vec![true, false], vec![true, true]];
        assert!(BlockStructure::new(leq, vec![1, 1], vec![1, 1]).is_err());
    }

    #[test]
    fn iota_basics() {
        let b = BlockMatrix::new(IntMatrix::from_rows(&[vec![5]]), BlockStructure::linear(vec![1], vec![1]).unwrap())
            .unwrap();
        assert_eq!(b.iota(&[1]).matrix, IntMatrix::from_rows(&[vec![5, 0], vec![0, 1]]));
        assert_eq!(b.iota(&[0]), b);
    }

    #[test]
    fn kweb_of_unsolvable_matrix() {
        let kw = unsolvable_left().kweb_invariants().unwrap();
        assert!(kw.cokernels[&vec![1]].is_trivial());
        assert_eq!(kw.cokernels[&vec![0, 1, 2]], AbelianGroupInvariants::free(1));
        assert_eq!(kw.kernel_ranks.len(), 2);
    }

    #[test]
    fn kweb_rejects_pattern_violation() {
        let b = IntMatrix::from_rows(&[vec![0, 0], vec![1, 0]]);
        let bm = BlockMatrix::new(b, BlockStructure::linear(vec![1, 1], vec![1, 1]).unwrap()).unwrap();
        assert!(bm.kweb_invariants().is_err());
    }

    #[test]
    fn positive_form_clauses() {
        let bm = unsolvable_left();
        assert!(bm.positive_form_violation().unwrap().starts_with("(iii)"));
    }
}
