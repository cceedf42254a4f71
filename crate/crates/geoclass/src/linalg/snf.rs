use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntMatrix;

/// `u · a · v = d` with `u`, `v` unimodular and `d` in Smith form.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl Smith {
    /// Diagonal entries of `d`, length `min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols())).map(|i| self.d[(i, i)].clone()).collect()
    }
}

pub fn smith_normal_form(a: &IntMatrix) -> Smith {
    let mut u = IntMatrix::identity(a.rows());
    let mut v = IntMatrix::identity(a.cols());
    let d = reduce(a.clone(), Some((&mut u, &mut v)));
    Smith { u, d, v }
}

/// Smith diagonal without the transforms.
pub fn smith_diagonal(a: &IntMatrix) -> Vec<BigInt> {
    let d = reduce(a.clone(), None);
    (0..d.rows().min(d.cols())).map(|i| d[(i, i)].clone()).collect()
}

fn smallest_nonzero(a: &IntMatrix, cells: impl Iterator<Item = (usize, usize)>) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, j) in cells {
        let x = &a[(i, j)];
        if x.is_zero() {
            continue;
        }
        match best {
            Some(b) if a[b].abs() <= x.abs() => {}
            _ => best = Some((i, j)),
        }
    }
    best
}

fn reduce(mut a: IntMatrix, mut track: Option<(&mut IntMatrix, &mut IntMatrix)>) -> IntMatrix {
    let (m, n) = (a.rows(), a.cols());

    macro_rules! row_op {
        ($dst:expr, $src:expr, $f:expr) => {{
            a.add_row_multiple($dst, $src, $f);
            if let Some((u, _)) = track.as_mut() {
                u.add_row_multiple($dst, $src, $f);
            }
        }};
    }
    macro_rules! col_op {
        ($dst:expr, $src:expr, $f:expr) => {{
            a.add_col_multiple($dst, $src, $f);
            if let Some((_, v)) = track.as_mut() {
                v.add_col_multiple($dst, $src, $f);
            }
        }};
    }
    macro_rules! swap {
        ($t:expr, $i:expr, $j:expr) => {{
            a.swap_rows($t, $i);
            a.swap_cols($t, $j);
            if let Some((u, v)) = track.as_mut() {
                u.swap_rows($t, $i);
                v.swap_cols($t, $j);
            }
        }};
    }

    for t in 0..m.min(n) {
        let cells = (t..m).flat_map(|i| (t..n).map(move |j| (i, j)));
        let Some((pi, pj)) = smallest_nonzero(&a, cells) else { break };
        swap!(t, pi, pj);
        loop {
            let mut clean = true;
            for i in t + 1..m {
                if !a[(i, t)].is_zero() {
                    let q = -(&a[(i, t)] / &a[(t, t)]);
                    row_op!(i, t, &q);
                    clean &= a[(i, t)].is_zero();
                }
            }
            for j in t + 1..n {
                if !a[(t, j)].is_zero() {
                    let q = -(&a[(t, j)] / &a[(t, t)]);
                    col_op!(j, t, &q);
                    clean &= a[(t, j)].is_zero();
                }
            }
            if !clean {
                // A remainder smaller than the pivot survived; move it to (t, t).
                let cells = std::iter::once((t, t)).chain((t + 1..m).map(|i| (i, t))).chain((t + 1..n).map(|j| (t, j)));
                let (pi, pj) = smallest_nonzero(&a, cells).expect("pivot vanished");
                swap!(t, pi, pj);
                continue;
            }
            let bad = (t + 1..m)
                .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| !a[(i, j)].is_multiple_of(&a[(t, t)]));
            match bad {
                Some((i, _)) => row_op!(t, i, &BigInt::from(1)),
                None => break,
            }
        }
        if a[(t, t)].is_negative() {
            a.negate_row(t);
            if let Some((u, _)) = track.as_mut() {
                u.negate_row(t);
            }
        }
    }
    a
}
