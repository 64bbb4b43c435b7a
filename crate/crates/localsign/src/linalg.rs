//! Dense matrices over a finite field `F_q` (a [`Ring`] with `m = 1`).

use crate::padic_core::{Coeff, Ring};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    ring: Ring,
    rows: usize,
    cols: usize,
    data: Vec<Coeff>,
}

/// Row echelon data: reduced matrix plus pivot columns.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub reduced: Matrix,
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn zeros(ring: Ring, rows: usize, cols: usize) -> Matrix {
        assert!(ring.is_field(), "linear algebra needs a field");
        Matrix { ring, rows, cols, data: vec![ring.zero(); rows * cols] }
    }

    pub fn identity(ring: Ring, n: usize) -> Matrix {
        let mut m = Matrix::zeros(ring, n, n);
        for i in 0..n {
            m.set(i, i, ring.one());
        }
        m
    }

    pub fn from_rows(ring: Ring, rows: &[Vec<Coeff>]) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Matrix::zeros(ring, r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &x) in row.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn from_int_rows(ring: Ring, rows: &[Vec<i64>]) -> Matrix {
        let rows: Vec<Vec<Coeff>> = rows.iter().map(|r| r.iter().map(|&x| ring.from_int(x)).collect()).collect();
        Matrix::from_rows(ring, &rows)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(ring: Ring, len: usize, cols: &[Vec<Coeff>]) -> Matrix {
        let mut m = Matrix::zeros(ring, len, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, &x) in col.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn get(&self, i: usize, j: usize) -> Coeff {
        self.data[i * self.cols + j]
    }
    pub fn set(&mut self, i: usize, j: usize, x: Coeff) {
        self.data[i * self.cols + j] = x;
    }
    pub fn row(&self, i: usize) -> Vec<Coeff> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }
    pub fn column(&self, j: usize) -> Vec<Coeff> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let r = self.ring;
        let mut out = Matrix::zeros(r, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if r.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let cur = out.get(i, j);
                    out.set(i, j, r.add(cur, r.mul(a, other.get(k, j))));
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Coeff]) -> Vec<Coeff> {
        assert_eq!(self.cols, v.len());
        let r = self.ring;
        (0..self.rows)
            .map(|i| {
                let mut s = r.zero();
                for (j, &x) in v.iter().enumerate() {
                    s = r.add(s, r.mul(self.get(i, j), x));
                }
                s
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let r = self.ring;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| r.add(a, b)).collect();
        Matrix { ring: r, rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        let r = self.ring;
        let neg = Matrix { ring: r, rows: other.rows, cols: other.cols, data: other.data.iter().map(|&x| r.neg(x)).collect() };
        self.add(&neg)
    }

    pub fn scale(&self, c: Coeff) -> Matrix {
        let r = self.ring;
        Matrix { ring: r, rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| r.mul(x, c)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| self.ring.is_zero(x))
    }

    /// Horizontal concatenation.
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let mut m = Matrix::zeros(self.ring, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j));
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.get(i, j));
            }
        }
        m
    }

    /// Vertical concatenation.
    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix { ring: self.ring, rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Reduced row echelon form.
    pub fn echelon(&self) -> Echelon {
        let r = self.ring;
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..a.cols {
            if row == a.rows {
                break;
            }
            let Some(piv) = (row..a.rows).find(|&i| !r.is_zero(a.get(i, col))) else {
                continue;
            };
            if piv != row {
                for j in 0..a.cols {
                    a.data.swap(piv * a.cols + j, row * a.cols + j);
                }
            }
            let inv = r.inv(a.get(row, col)).expect("nonzero in a field");
            for j in col..a.cols {
                let x = a.get(row, j);
                a.set(row, j, r.mul(x, inv));
            }
            for i in 0..a.rows {
                if i == row {
                    continue;
                }
                let f = a.get(i, col);
                if r.is_zero(f) {
                    continue;
                }
                for j in col..a.cols {
                    let x = a.get(i, j);
                    let y = a.get(row, j);
                    a.set(i, j, r.sub(x, r.mul(f, y)));
                }
            }
            pivots.push(col);
            row += 1;
        }
        Echelon { reduced: a, pivots }
    }

    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    /// Basis of the right kernel, as column vectors.
    pub fn kernel(&self) -> Vec<Vec<Coeff>> {
        let r = self.ring;
        let e = self.echelon();
        let free: Vec<usize> = (0..self.cols).filter(|c| !e.pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![r.zero(); self.cols];
                v[fc] = r.one();
                for (i, &pc) in e.pivots.iter().enumerate() {
                    v[pc] = r.neg(e.reduced.get(i, fc));
                }
                v
            })
            .collect()
    }

    /// Some solution of `self * x = b`, if one exists.
    pub fn solve(&self, b: &[Coeff]) -> Option<Vec<Coeff>> {
        let r = self.ring;
        let aug = self.hstack(&Matrix::from_columns(r, self.rows, &[b.to_vec()]));
        let e = aug.echelon();
        if e.pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![r.zero(); self.cols];
        for (i, &pc) in e.pivots.iter().enumerate() {
            x[pc] = e.reduced.get(i, self.cols);
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let e = self.hstack(&Matrix::identity(self.ring, n)).echelon();
        if e.pivots.len() < n || e.pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Matrix::zeros(self.ring, n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, e.reduced.get(i, n + j));
            }
        }
        Some(inv)
    }

    pub fn determinant(&self) -> Coeff {
        assert_eq!(self.rows, self.cols);
        let r = self.ring;
        let mut a = self.clone();
        let n = self.rows;
        let mut det = r.one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&i| !r.is_zero(a.get(i, col))) else {
                return r.zero();
            };
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                }
                det = r.neg(det);
            }
            let d = a.get(col, col);
            det = r.mul(det, d);
            let inv = r.inv(d).expect("nonzero");
            for i in col + 1..n {
                let f = r.mul(a.get(i, col), inv);
                if r.is_zero(f) {
                    continue;
                }
                for j in col..n {
                    let x = a.get(i, j);
                    let y = a.get(col, j);
                    a.set(i, j, r.sub(x, r.mul(f, y)));
                }
            }
        }
        det
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|&c| self.ring.fmt_coeff(c)).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Column span helpers on lists of vectors.
pub fn span_rank(ring: Ring, vectors: &[Vec<Coeff>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    Matrix::from_rows(ring, vectors).rank()
}

/// Incrementally grown span, kept as rows reduced at their pivots.
#[derive(Clone, Debug)]
pub struct SpanBuilder {
    ring: Ring,
    rows: Vec<(usize, Vec<Coeff>)>,
}

impl SpanBuilder {
    pub fn new(ring: Ring) -> SpanBuilder {
        SpanBuilder { ring, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[Coeff]) -> Vec<Coeff> {
        let r = self.ring;
        let mut v = v.to_vec();
        for (piv, row) in &self.rows {
            let f = v[*piv];
            if r.is_zero(f) {
                continue;
            }
            for (x, &y) in v.iter_mut().zip(row) {
                *x = r.sub(*x, r.mul(f, y));
            }
        }
        v
    }

    pub fn contains(&self, v: &[Coeff]) -> bool {
        self.reduce(v).iter().all(|&x| self.ring.is_zero(x))
    }

    /// Adds `v`; returns whether the span grew.
    pub fn insert(&mut self, v: &[Coeff]) -> bool {
        let r = self.ring;
        let mut v = self.reduce(v);
        let Some(piv) = v.iter().position(|&x| !r.is_zero(x)) else {
            return false;
        };
        let inv = r.inv(v[piv]).expect("nonzero in a field");
        for x in v.iter_mut() {
            *x = r.mul(*x, inv);
        }
        self.rows.push((piv, v));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_determinant() {
        let r = Ring::field(7, 1).unwrap();
        let a = Matrix::from_int_rows(r, &[vec![1, 2, 3], vec![0, 1, 4], vec![5, 6, 0]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(r, 3));
        // det = 1(0-24) - 2(0-20) + 3(0-5) = 1 mod 7
        assert_eq!(a.determinant(), r.from_int(1));
        let s = Matrix::from_int_rows(r, &[vec![1, 2], vec![2, 4]]);
        assert!(s.inverse().is_none());
        assert_eq!(s.rank(), 1);
        assert_eq!(s.kernel().len(), 1);
        let k = &s.kernel()[0];
        assert!(s.mul_vec(k).iter().all(|&x| r.is_zero(x)));
    }

    #[test]
    fn solve_consistent_and_not() {
        let r = Ring::field(5, 1).unwrap();
        let a = Matrix::from_int_rows(r, &[vec![1, 1], vec![2, 2]]);
        let x = a.solve(&[r.from_int(3), r.from_int(1)]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![r.from_int(3), r.from_int(1)]);
        assert!(a.solve(&[r.from_int(3), r.from_int(2)]).is_none());
    }

    #[test]
    fn works_over_f9() {
        let r = Ring::field(3, 2).unwrap();
        let t = r.gen();
        let a = Matrix::from_rows(r, &[vec![t, r.one()], vec![r.one(), t]]);
        // det = t^2 - 1, nonzero since t is primitive
        assert!(!r.is_zero(a.determinant()));
        assert_eq!(a.mul(&a.inverse().unwrap()), Matrix::identity(r, 2));
    }
}
