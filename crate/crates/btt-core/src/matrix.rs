//! Small dense matrices over an exact field, with Gaussian elimination for
//! solving, inversion and canonical column spaces. Row-major storage.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::field::ValuedField;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LinError {
    Singular,
    DimensionMismatch,
}

impl fmt::Display for LinError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinError::Singular => write!(f, "singular matrix"),
            LinError::DimensionMismatch => write!(f, "matrix dimension mismatch"),
        }
    }
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows_data: Vec<Vec<T>>) -> Self {
        let rows = rows_data.len();
        let cols = rows_data.first().map_or(0, |r| r.len());
        assert!(rows_data.iter().all(|r| r.len() == cols));
        Matrix {
            rows,
            cols,
            data: rows_data.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.cols).map(|j| self.at(i, j).clone()).collect()
    }

    pub fn from_cols(rows: usize, cols_data: Vec<Vec<T>>) -> Self {
        let cols = cols_data.len();
        assert!(cols_data.iter().all(|c| c.len() == rows));
        Matrix::from_fn(rows, cols, |i, j| cols_data[j][i].clone())
    }

    pub fn hstack(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.rows, other.rows);
        Matrix::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.at(i, j).clone()
            } else {
                other.at(i, j - self.cols).clone()
            }
        })
    }

    pub fn submatrix_cols(&self, keep: &[usize]) -> Matrix<T> {
        Matrix::from_fn(self.rows, keep.len(), |i, j| self.at(i, keep[j]).clone())
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

pub fn identity<F: ValuedField>(f: &F, n: usize) -> Matrix<F::Elem> {
    Matrix::from_fn(n, n, |i, j| if i == j { f.one() } else { f.zero() })
}

pub fn zero<F: ValuedField>(f: &F, rows: usize, cols: usize) -> Matrix<F::Elem> {
    Matrix::from_fn(rows, cols, |_, _| f.zero())
}

pub fn mul<F: ValuedField>(f: &F, a: &Matrix<F::Elem>, b: &Matrix<F::Elem>) -> Matrix<F::Elem> {
    assert_eq!(a.cols, b.rows, "inner dimensions must agree");
    Matrix::from_fn(a.rows, b.cols, |i, j| {
        let mut acc = f.zero();
        for k in 0..a.cols {
            acc = f.add(&acc, &f.mul(a.at(i, k), b.at(k, j)));
        }
        acc
    })
}

pub fn mul_vec<F: ValuedField>(f: &F, a: &Matrix<F::Elem>, v: &[F::Elem]) -> Vec<F::Elem> {
    assert_eq!(a.cols, v.len());
    (0..a.rows)
        .map(|i| {
            let mut acc = f.zero();
            for k in 0..a.cols {
                acc = f.add(&acc, &f.mul(a.at(i, k), &v[k]));
            }
            acc
        })
        .collect()
}

pub fn scale_col<F: ValuedField>(f: &F, m: &mut Matrix<F::Elem>, j: usize, c: &F::Elem) {
    for i in 0..m.rows {
        let v = f.mul(m.at(i, j), c);
        m.set(i, j, v);
    }
}

/// col_dst += c * col_src
pub fn add_col_multiple<F: ValuedField>(
    f: &F,
    m: &mut Matrix<F::Elem>,
    dst: usize,
    src: usize,
    c: &F::Elem,
) {
    for i in 0..m.rows {
        let v = f.add(m.at(i, dst), &f.mul(m.at(i, src), c));
        m.set(i, dst, v);
    }
}

pub fn scale_row<F: ValuedField>(f: &F, m: &mut Matrix<F::Elem>, i: usize, c: &F::Elem) {
    for j in 0..m.cols {
        let v = f.mul(m.at(i, j), c);
        m.set(i, j, v);
    }
}

/// row_dst += c * row_src
pub fn add_row_multiple<F: ValuedField>(
    f: &F,
    m: &mut Matrix<F::Elem>,
    dst: usize,
    src: usize,
    c: &F::Elem,
) {
    for j in 0..m.cols {
        let v = f.add(m.at(dst, j), &f.mul(m.at(src, j), c));
        m.set(dst, j, v);
    }
}

/// Solves A X = B for square invertible A by Gauss-Jordan elimination.
pub fn solve<F: ValuedField>(
    f: &F,
    a: &Matrix<F::Elem>,
    b: &Matrix<F::Elem>,
) -> Result<Matrix<F::Elem>, LinError> {
    if a.rows != a.cols || a.rows != b.rows {
        return Err(LinError::DimensionMismatch);
    }
    let n = a.rows;
    let mut work = a.hstack(b);
    for col in 0..n {
        let pivot_row = (col..n)
            .find(|&i| !f.is_zero(work.at(i, col)))
            .ok_or(LinError::Singular)?;
        work.swap_rows(col, pivot_row);
        let pivot_inv = f.inv(work.at(col, col)).expect("nonzero pivot");
        scale_row(f, &mut work, col, &pivot_inv);
        for i in 0..n {
            if i != col && !f.is_zero(work.at(i, col)) {
                let c = f.neg(work.at(i, col));
                add_row_multiple(f, &mut work, i, col, &c);
            }
        }
    }
    Ok(Matrix::from_fn(n, b.cols, |i, j| work.at(i, n + j).clone()))
}

pub fn solve_vec<F: ValuedField>(
    f: &F,
    a: &Matrix<F::Elem>,
    v: &[F::Elem],
) -> Result<Vec<F::Elem>, LinError> {
    let b = Matrix::from_fn(v.len(), 1, |i, _| v[i].clone());
    Ok(solve(f, a, &b)?.col(0))
}

pub fn inverse<F: ValuedField>(f: &F, a: &Matrix<F::Elem>) -> Result<Matrix<F::Elem>, LinError> {
    solve(f, a, &identity(f, a.rows))
}

pub fn rank<F: ValuedField>(f: &F, a: &Matrix<F::Elem>) -> usize {
    let mut work = a.clone();
    let mut rank = 0;
    for col in 0..work.cols {
        let pivot = (rank..work.rows).find(|&i| !f.is_zero(work.at(i, col)));
        let Some(pivot_row) = pivot else { continue };
        work.swap_rows(rank, pivot_row);
        let inv = f.inv(work.at(rank, col)).expect("nonzero pivot");
        scale_row(f, &mut work, rank, &inv);
        for i in 0..work.rows {
            if i != rank && !f.is_zero(work.at(i, col)) {
                let c = f.neg(work.at(i, col));
                add_row_multiple(f, &mut work, i, rank, &c);
            }
        }
        rank += 1;
        if rank == work.rows {
            break;
        }
    }
    rank
}

/// Canonical basis matrix of the column space: reduced column echelon form
/// with pivot rows ascending and unit pivots. Two matrices have equal column
/// spans exactly when their canonical forms are identical.
pub fn column_space_canonical<F: ValuedField>(f: &F, a: &Matrix<F::Elem>) -> Matrix<F::Elem> {
    // Row-reduce the transpose, then transpose back.
    let mut work = Matrix::from_fn(a.cols, a.rows, |i, j| a.at(j, i).clone());
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..work.cols {
        let pivot = (r..work.rows).find(|&i| !f.is_zero(work.at(i, col)));
        let Some(pivot_row) = pivot else { continue };
        work.swap_rows(r, pivot_row);
        let inv = f.inv(work.at(r, col)).expect("nonzero pivot");
        scale_row(f, &mut work, r, &inv);
        for i in 0..work.rows {
            if i != r && !f.is_zero(work.at(i, col)) {
                let c = f.neg(work.at(i, col));
                add_row_multiple(f, &mut work, i, r, &c);
            }
        }
        pivot_cols.push(col);
        r += 1;
        if r == work.rows {
            break;
        }
    }
    Matrix::from_fn(a.rows, r, |i, j| work.at(j, i).clone())
}

/// Solves A y = c for A with full column rank, or None when c lies outside
/// the column space.
pub fn solve_in_column_space<F: ValuedField>(
    f: &F,
    a: &Matrix<F::Elem>,
    c: &[F::Elem],
) -> Option<Vec<F::Elem>> {
    assert_eq!(a.rows(), c.len());
    let rhs = Matrix::from_fn(c.len(), 1, |i, _| c[i].clone());
    let mut work = a.hstack(&rhs);
    let s = a.cols();
    let mut pivot_rows: Vec<usize> = Vec::with_capacity(s);
    let mut r = 0;
    for col in 0..s {
        let pivot = (r..work.rows()).find(|&i| !f.is_zero(work.at(i, col)))?;
        work.swap_rows(r, pivot);
        let inv = f.inv(work.at(r, col)).expect("nonzero pivot");
        scale_row(f, &mut work, r, &inv);
        for i in 0..work.rows() {
            if i != r && !f.is_zero(work.at(i, col)) {
                let factor = f.neg(work.at(i, col));
                add_row_multiple(f, &mut work, i, r, &factor);
            }
        }
        pivot_rows.push(r);
        r += 1;
    }
    // rows below the pivots must have vanished on the right-hand side
    for i in r..work.rows() {
        if !f.is_zero(work.at(i, s)) {
            return None;
        }
    }
    Some((0..s).map(|j| work.at(pivot_rows[j], s).clone()).collect())
}

pub fn format_matrix<F: ValuedField>(f: &F, a: &Matrix<F::Elem>) -> String {
    use core::fmt::Write;
    let mut out = String::from("[");
    for i in 0..a.rows() {
        if i > 0 {
            out.push(',');
        }
        out.push('[');
        for j in 0..a.cols() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{}", f.format_elem(a.at(i, j))).unwrap();
        }
        out.push(']');
    }
    out.push(']');
    out
}
