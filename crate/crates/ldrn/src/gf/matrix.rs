//! Dense matrices over a [`Field`] with exact Gaussian-elimination kernels.
//!
//! Elimination uses first-nonzero pivoting; exact arithmetic needs nothing
//! fancier. Matrices with zero rows or zero columns are legal and have rank
//! zero, and the determinant of the 0x0 matrix is 1.

use super::Field;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<u64>, // row-major
}

impl Matrix {
    pub fn new(field: Field, rows: usize, cols: usize, data: Vec<u64>) -> Matrix {
        assert_eq!(rows * cols, data.len(), "matrix data length mismatch");
        for &v in &data {
            assert!(field.contains(v), "{v} is not an element of {field}");
        }
        Matrix {
            field,
            rows,
            cols,
            data,
        }
    }

    pub fn zeros(field: Field, rows: usize, cols: usize) -> Matrix {
        Matrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(field: Field, rows: Vec<Vec<u64>>) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Matrix::new(field, r, c, data)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        assert!(
            self.field.contains(v),
            "{v} is not an element of {}",
            self.field
        );
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        assert!(r < self.rows, "row out of bounds");
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<u64> {
        assert!(c < self.cols, "column out of bounds");
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn replace_row(&mut self, r: usize, row: &[u64]) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        for (c, &v) in row.iter().enumerate() {
            self.set(r, c, v);
        }
    }

    pub fn push_row(&mut self, row: &[u64]) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        for &v in row {
            assert!(
                self.field.contains(v),
                "{v} is not an element of {}",
                self.field
            );
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn push_col(&mut self, col: &[u64]) {
        assert_eq!(col.len(), self.rows, "column length mismatch");
        let mut data = Vec::with_capacity(self.rows * (self.cols + 1));
        for (r, &v) in col.iter().enumerate() {
            assert!(
                self.field.contains(v),
                "{v} is not an element of {}",
                self.field
            );
            data.extend_from_slice(self.row(r));
            data.push(v);
        }
        self.data = data;
        self.cols += 1;
    }

    pub fn select_rows(&self, sel: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(sel.len() * self.cols);
        for &r in sel {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            field: self.field.clone(),
            rows: sel.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_cols(&self, sel: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * sel.len());
        for r in 0..self.rows {
            for &c in sel {
                data.push(self.get(r, c));
            }
        }
        Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: sel.len(),
            data,
        }
    }

    /// Submatrix in the order the indices are given.
    pub fn submatrix(&self, row_sel: &[usize], col_sel: &[usize]) -> Matrix {
        self.select_rows(row_sel).select_cols(col_sel)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.field.clone(), self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.field, rhs.field, "field mismatch");
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        let f = &self.field;
        let mut out = Matrix::zeros(self.field.clone(), self.rows, rhs.cols);
        for r in 0..self.rows {
            for i in 0..self.cols {
                let a = self.get(r, i);
                if a == 0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    let cur = out.get(r, c);
                    out.set(r, c, f.add(cur, f.mul(a, rhs.get(i, c))));
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[u64]) -> Vec<u64> {
        assert_eq!(x.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|r| self.field.dot(self.row(r), x))
            .collect()
    }

    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        let f = work.field.clone();
        let mut rank = 0;
        for c in 0..work.cols {
            if rank == work.rows {
                break;
            }
            let Some(pivot) = (rank..work.rows).find(|&r| work.get(r, c) != 0) else {
                continue;
            };
            work.swap_rows(rank, pivot);
            let inv = f.inv(work.get(rank, c)).unwrap();
            for r in rank + 1..work.rows {
                let factor = f.mul(work.get(r, c), inv);
                if factor == 0 {
                    continue;
                }
                for j in c..work.cols {
                    let v = f.sub(work.get(r, j), f.mul(factor, work.get(rank, j)));
                    work.set(r, j, v);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Exact inverse, or `None` when the matrix is singular. Singularity is an
    /// expected outcome for callers, not an error.
    pub fn inverse(&self) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let f = self.field.clone();
        let mut work = self.clone();
        let mut inv = Matrix::identity(f.clone(), n);
        for c in 0..n {
            let pivot = (c..n).find(|&r| work.get(r, c) != 0)?;
            work.swap_rows(c, pivot);
            inv.swap_rows(c, pivot);
            let scale = f.inv(work.get(c, c)).unwrap();
            for j in 0..n {
                work.set(c, j, f.mul(scale, work.get(c, j)));
                inv.set(c, j, f.mul(scale, inv.get(c, j)));
            }
            for r in 0..n {
                if r == c {
                    continue;
                }
                let factor = work.get(r, c);
                if factor == 0 {
                    continue;
                }
                for j in 0..n {
                    let wv = f.sub(work.get(r, j), f.mul(factor, work.get(c, j)));
                    work.set(r, j, wv);
                    let iv = f.sub(inv.get(r, j), f.mul(factor, inv.get(c, j)));
                    inv.set(r, j, iv);
                }
            }
        }
        Some(inv)
    }

    pub fn is_nonsingular(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Solve Ax = b for square A; `None` when singular.
    pub fn solve(&self, b: &[u64]) -> Option<Vec<u64>> {
        assert_eq!(self.rows, self.cols, "solve needs a square matrix");
        assert_eq!(b.len(), self.rows, "right-hand side length mismatch");
        Some(self.inverse()?.mul_vec(b))
    }

    pub fn determinant(&self) -> u64 {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        let f = self.field.clone();
        let mut work = self.clone();
        let mut det = 1u64;
        for c in 0..n {
            let Some(pivot) = (c..n).find(|&r| work.get(r, c) != 0) else {
                return 0;
            };
            if pivot != c {
                work.swap_rows(c, pivot);
                det = f.neg(det);
            }
            let p = work.get(c, c);
            det = f.mul(det, p);
            let inv = f.inv(p).unwrap();
            for r in c + 1..n {
                let factor = f.mul(work.get(r, c), inv);
                if factor == 0 {
                    continue;
                }
                for j in c..n {
                    let v = f.sub(work.get(r, j), f.mul(factor, work.get(c, j)));
                    work.set(r, j, v);
                }
            }
        }
        det
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    /// Rows as nested vectors, the shape used by the JSON formats.
    pub fn to_nested(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            let (x, y) = (self.get(a, c), self.get(b, c));
            self.set(a, c, y);
            self.set(b, c, x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf2() -> Field {
        Field::new(2, 1).unwrap()
    }

    #[test]
    fn identity_times_matrix() {
        let m = Matrix::from_rows(gf2(), vec![vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 0]]);
        let i = Matrix::identity(gf2(), 3);
        assert_eq!(i.mul(&m), m);
        let z = Matrix::zeros(gf2(), 3, 3);
        assert_eq!(z.mul(&m), z);
    }

    #[test]
    fn gf2_product_by_hand() {
        let a = Matrix::from_rows(gf2(), vec![vec![1, 1], vec![0, 1]]);
        let b = Matrix::from_rows(gf2(), vec![vec![1, 0], vec![1, 1]]);
        let expect = Matrix::from_rows(gf2(), vec![vec![0, 1], vec![1, 1]]);
        assert_eq!(a.mul(&b), expect);
    }

    #[test]
    fn rank_cases() {
        assert_eq!(Matrix::identity(gf2(), 4).rank(), 4);
        assert_eq!(Matrix::zeros(gf2(), 4, 3).rank(), 0);
        let m = Matrix::from_rows(gf2(), vec![vec![1, 1, 0], vec![1, 1, 0], vec![0, 0, 1]]);
        assert_eq!(m.rank(), 2);
        // Empty matrices are legal with rank 0.
        assert_eq!(Matrix::zeros(gf2(), 0, 5).rank(), 0);
        assert_eq!(Matrix::zeros(gf2(), 5, 0).rank(), 0);
    }

    #[test]
    fn inverse_cases() {
        let i = Matrix::identity(gf2(), 3);
        assert_eq!(i.inverse().unwrap(), i);
        // [[1,1],[0,1]] is its own inverse mod 2.
        let m = Matrix::from_rows(gf2(), vec![vec![1, 1], vec![0, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(inv, m);
        assert_eq!(m.mul(&inv), Matrix::identity(gf2(), 2));
        // A zero row forces singularity.
        let s = Matrix::from_rows(gf2(), vec![vec![1, 1], vec![0, 0]]);
        assert!(s.inverse().is_none());
        // Inverse of the empty matrix is the empty matrix.
        assert_eq!(Matrix::zeros(gf2(), 0, 0).inverse().unwrap().rows(), 0);
    }

    #[test]
    fn determinant_tracks_swaps() {
        let f = Field::new(5, 1).unwrap();
        let m = Matrix::from_rows(f.clone(), vec![vec![0, 2], vec![3, 0]]);
        // det = -(2*3) = -6 = -1 = 4 mod 5.
        assert_eq!(m.determinant(), 4);
        assert_eq!(Matrix::zeros(f.clone(), 0, 0).determinant(), 1);
        assert_eq!(Matrix::zeros(f, 2, 2).determinant(), 0);
    }

    #[test]
    fn submatrix_selection() {
        let m = Matrix::from_rows(gf2(), vec![vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 0]]);
        assert_eq!(m.submatrix(&[0, 1, 2], &[0, 1, 2]), m);
        let s = m.submatrix(&[1], &[0, 2]);
        assert_eq!(s.to_nested(), vec![vec![0, 1]]);
        let empty = m.submatrix(&[], &[]);
        assert_eq!((empty.rows(), empty.cols()), (0, 0));
    }

    #[test]
    fn solve_recovers_known_vector() {
        let f = Field::new(5, 1).unwrap();
        // det = 26 = 1 mod 5.
        let m = Matrix::from_rows(f.clone(), vec![vec![1, 2, 0], vec![0, 1, 3], vec![4, 0, 2]]);
        let x = vec![2, 3, 1];
        let b = m.mul_vec(&x);
        assert_eq!(m.solve(&b), Some(x));
        let singular = Matrix::zeros(f, 2, 2);
        assert_eq!(singular.solve(&[1, 0]), None);
    }

    #[test]
    fn gf4_inverse_round_trip() {
        let f = Field::new(2, 2).unwrap();
        let m = Matrix::from_rows(f.clone(), vec![vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 1]]);
        if let Some(inv) = m.inverse() {
            assert_eq!(m.mul(&inv), Matrix::identity(f, 3));
        }
    }
}
