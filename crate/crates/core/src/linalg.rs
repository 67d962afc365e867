//! Exact linear algebra over the scalar fields in [`crate::field`].
//!
//! The matrices that show up here have integer entries and modest size
//! (hundreds of rows), so exact elimination is both feasible and the point:
//! ranks feed dimension counts that must not suffer float drift.

use crate::field::Field;
use num_bigint::BigInt;
use num_traits::Zero;

/// Dense row-major matrix over a field.
#[derive(Clone, Debug)]
pub struct FieldMatrix<F: Field> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<F>,
}

impl<F: Field> FieldMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FieldMatrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> &F {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: F) {
        self.data[r * self.cols + c] = v;
    }

    /// Rank by Gaussian elimination with exact field arithmetic.
    pub fn rank(mut self) -> usize {
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let pivot = (rank..self.rows).find(|&r| !self.get(r, col).is_zero());
            let Some(pr) = pivot else { continue };
            self.swap_rows(rank, pr);
            let inv = self.get(rank, col).inv().expect("nonzero pivot");
            for r in rank + 1..self.rows {
                if self.get(r, col).is_zero() {
                    continue;
                }
                let factor = self.get(r, col).mul(&inv);
                for c in col..self.cols {
                    let v = self.get(r, c).sub(&factor.mul(self.get(rank, c)));
                    self.set(r, c, v);
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

/// Rank of an integer matrix over the rationals, computed fraction-free
/// (Bareiss): every intermediate entry is a minor of the input, and the
/// divisions are exact in the integers.
pub fn rank_bigint(rows: usize, cols: usize, entries: &[i64]) -> usize {
    assert_eq!(entries.len(), rows * cols);
    let mut a: Vec<Vec<BigInt>> = (0..rows)
        .map(|r| {
            (0..cols)
                .map(|c| BigInt::from(entries[r * cols + c]))
                .collect()
        })
        .collect();
    let mut prev = BigInt::from(1);
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let pivot = (rank..rows).find(|&r| !a[r][col].is_zero());
        let Some(pr) = pivot else { continue };
        a.swap(rank, pr);
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let num = &a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c];
                debug_assert!((&num % &prev).is_zero());
                a[r][c] = num / &prev;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Solves `sum_j x_j * cols[j] = rhs` for one solution, or returns `None`
/// if the system is inconsistent. Free variables are set to zero, so the
/// result is deterministic.
pub fn solve_columns<F: Field>(cols: &[Vec<F>], rhs: &[F]) -> Option<Vec<F>> {
    let nrows = rhs.len();
    let ncols = cols.len();
    for c in cols {
        assert_eq!(c.len(), nrows, "column height mismatch");
    }
    // Augmented row-major matrix [cols | rhs].
    let mut m = FieldMatrix::<F>::zeros(nrows, ncols + 1);
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            m.set(i, j, v.clone());
        }
    }
    for (i, v) in rhs.iter().enumerate() {
        m.set(i, ncols, v.clone());
    }

    // Forward elimination, remembering the pivot column of each pivot row.
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == nrows {
            break;
        }
        let pivot = (row..nrows).find(|&r| !m.get(r, col).is_zero());
        let Some(pr) = pivot else { continue };
        m.swap_rows(row, pr);
        let inv = m.get(row, col).inv().expect("nonzero pivot");
        for r in row + 1..nrows {
            if m.get(r, col).is_zero() {
                continue;
            }
            let factor = m.get(r, col).mul(&inv);
            for c in col..=ncols {
                let v = m.get(r, c).sub(&factor.mul(m.get(row, c)));
                m.set(r, c, v);
            }
        }
        pivots.push(col);
        row += 1;
    }
    // A nonzero right-hand side below the pivot rows means "inconsistent".
    for r in row..nrows {
        if !m.get(r, ncols).is_zero() {
            return None;
        }
    }

    // Back substitution with free variables pinned to zero.
    let mut x = vec![F::zero(); ncols];
    for (r, &pc) in pivots.iter().enumerate().rev() {
        let mut v = m.get(r, ncols).clone();
        for (c, xc) in x.iter().enumerate().skip(pc + 1) {
            if !xc.is_zero() {
                v = v.sub(&m.get(r, c).mul(xc));
            }
        }
        x[pc] = v.mul(&m.get(r, pc).inv().expect("pivot"));
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{F2, F5, Q};

    #[test]
    fn bigint_rank_simple() {
        // Rank-2 matrix with a dependent third row.
        let m = [1, 2, 3, 4, 5, 6, 5, 7, 9];
        assert_eq!(rank_bigint(3, 3, &m), 2);
        assert_eq!(rank_bigint(3, 3, &[0; 9]), 0);
        assert_eq!(rank_bigint(2, 2, &[1, 0, 0, 1]), 2);
    }

    #[test]
    fn bigint_rank_rectangular() {
        let m = [1, 0, 0, 0, 0, 1, 0, 0];
        assert_eq!(rank_bigint(2, 4, &m), 2);
        assert_eq!(rank_bigint(4, 2, &[1, 0, 0, 1, 1, 1, 2, 2]), 2);
    }

    #[test]
    fn field_rank_matches_bigint_on_q() {
        let entries = [2i64, 4, -2, 1, 3, 0, 3, 7, -2];
        let mut m = FieldMatrix::<Q>::zeros(3, 3);
        for r in 0..3 {
            for c in 0..3 {
                m.set(r, c, Q::from_int(entries[r * 3 + c]));
            }
        }
        assert_eq!(m.rank(), rank_bigint(3, 3, &entries));
    }

    #[test]
    fn rank_depends_on_characteristic() {
        // [[1,1],[1,-1]] has rank 2 over Q but rank 1 over F2.
        let entries = [1i64, 1, 1, -1];
        assert_eq!(rank_bigint(2, 2, &entries), 2);
        let mut m = FieldMatrix::<F2>::zeros(2, 2);
        for r in 0..2 {
            for c in 0..2 {
                m.set(r, c, F2::from_int(entries[r * 2 + c]));
            }
        }
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn solve_unique_system() {
        // x*[1,0] + y*[1,1] = [3,2] => y=2, x=1.
        let cols = vec![
            vec![Q::from_int(1), Q::from_int(0)],
            vec![Q::from_int(1), Q::from_int(1)],
        ];
        let rhs = vec![Q::from_int(3), Q::from_int(2)];
        let x = solve_columns(&cols, &rhs).unwrap();
        assert_eq!(x, vec![Q::from_int(1), Q::from_int(2)]);
    }

    #[test]
    fn solve_detects_inconsistency() {
        let cols = vec![vec![Q::from_int(1), Q::from_int(2)]];
        let rhs = vec![Q::from_int(1), Q::from_int(3)];
        assert!(solve_columns(&cols, &rhs).is_none());
    }

    #[test]
    fn solve_underdetermined_pins_free_vars() {
        // Two equal columns: the second (free) coordinate stays zero.
        let col = vec![F5::from_int(2), F5::from_int(1)];
        let cols = vec![col.clone(), col.clone()];
        let rhs = vec![F5::from_int(4), F5::from_int(2)];
        let x = solve_columns(&cols, &rhs).unwrap();
        assert_eq!(x, vec![F5::from_int(2), F5::zero()]);
    }
}
