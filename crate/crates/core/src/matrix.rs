//! Dense row-major matrices over a [`Field`].

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Field> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diagonal(entries: Vec<T>) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, x) in entries.into_iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn try_from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Result<T>,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j)?);
            }
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Result<Self> {
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch("column length".into()));
        }
        Ok(Self::from_fn(rows, columns.len(), |i, j| columns[j][i].clone()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[T]) {
        for (i, x) in v.iter().enumerate() {
            self[(i, j)] = x.clone();
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map(&self, f: impl Fn(&T) -> T) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Matrix product. Zero entries of the left factor are skipped, which is
    /// what keeps exact products of the sparse chain operators affordable.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    /// `self * v`.
    pub fn apply(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch("matrix-vector product".into()));
        }
        let mut out = vec![T::zero(); self.rows];
        for (j, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                let a = &self[(i, j)];
                if !a.is_zero() {
                    *o = o.clone() + a.clone() * x.clone();
                }
            }
        }
        Ok(out)
    }

    /// `w^T * self` (row vector from the left).
    pub fn apply_left(&self, w: &[T]) -> Result<Vec<T>> {
        if w.len() != self.rows {
            return Err(Error::DimensionMismatch("vector-matrix product".into()));
        }
        let mut out = vec![T::zero(); self.cols];
        for (i, x) in w.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                let a = &self[(i, j)];
                if !a.is_zero() {
                    *o = o.clone() + x.clone() * a.clone();
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product `self ⊗ other`; the right factor varies fastest.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            self[(i / other.rows, j / other.cols)].clone() * other[(i % other.rows, j % other.cols)].clone()
        })
    }

    /// Sub-matrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    pub fn diagonal_entries(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).collect()
    }

    /// Entrywise comparison in the field's notion of equality.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data.iter().zip(&other.data).all(|(a, b)| a.approx_eq(b, tol))
    }

    /// Largest entrywise magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.clone() - b.clone()).magnitude())
            .fold(0.0, f64::max)
    }

    /// Determinant: fraction-free Bareiss elimination in exact fields,
    /// partial-pivoting LU otherwise.
    pub fn det(&self) -> Result<T> {
        if !self.is_square() {
            return Err(Error::NonSquare { rows: self.rows, cols: self.cols });
        }
        if T::EXACT {
            Ok(self.det_bareiss())
        } else {
            Ok(self.det_lu())
        }
    }

    fn det_bareiss(&self) -> T {
        let n = self.rows;
        if n == 0 {
            return T::one();
        }
        let mut a = self.clone();
        let mut prev = T::one();
        let mut negate = false;
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&r| !a[(r, k)].is_zero()) {
                    Some(r) => {
                        a.swap_rows(k, r);
                        negate = !negate;
                    }
                    None => return T::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = a[(i, j)].clone() * a[(k, k)].clone() - a[(i, k)].clone() * a[(k, j)].clone();
                    // exact division is guaranteed by Sylvester's identity
                    a[(i, j)] = v / prev.clone();
                }
                a[(i, k)] = T::zero();
            }
            prev = a[(k, k)].clone();
        }
        let d = a[(n - 1, n - 1)].clone();
        if negate {
            -d
        } else {
            d
        }
    }

    fn det_lu(&self) -> T {
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| a[(x, k)].magnitude().total_cmp(&a[(y, k)].magnitude()))
                .unwrap_or(k);
            if a[(p, k)].is_zero() {
                return T::zero();
            }
            if p != k {
                a.swap_rows(p, k);
                det = -det;
            }
            let pivot = a[(k, k)].clone();
            det = det * pivot.clone();
            for i in k + 1..n {
                let factor = a[(i, k)].clone() / pivot.clone();
                if factor.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    a[(i, j)] = a[(i, j)].clone() - factor.clone() * a[(k, j)].clone();
                }
            }
        }
        det
    }

    /// Solves `self * x = rhs` by Gauss-Jordan elimination.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NonSquare { rows: self.rows, cols: self.cols });
        }
        if rhs.rows != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has {} rows, expected {}",
                rhs.rows, self.rows
            )));
        }
        let n = self.rows;
        let m = rhs.cols;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for k in 0..n {
            let pivot_row = if T::EXACT {
                (k..n).find(|&r| !a[(r, k)].is_zero())
            } else {
                (k..n)
                    .filter(|&r| !a[(r, k)].is_zero())
                    .max_by(|&x, &y| a[(x, k)].magnitude().total_cmp(&a[(y, k)].magnitude()))
            };
            let Some(p) = pivot_row else {
                return Err(Error::Singular { stage: k });
            };
            if p != k {
                a.swap_rows(p, k);
                b.swap_rows(p, k);
            }
            let inv = T::one() / a[(k, k)].clone();
            for j in 0..n {
                a[(k, j)] = a[(k, j)].clone() * inv.clone();
            }
            for j in 0..m {
                b[(k, j)] = b[(k, j)].clone() * inv.clone();
            }
            for i in 0..n {
                if i == k || a[(i, k)].is_zero() {
                    continue;
                }
                let f = a[(i, k)].clone();
                for j in 0..n {
                    if !a[(k, j)].is_zero() {
                        a[(i, j)] = a[(i, j)].clone() - f.clone() * a[(k, j)].clone();
                    }
                }
                for j in 0..m {
                    if !b[(k, j)].is_zero() {
                        b[(i, j)] = b[(i, j)].clone() - f.clone() * b[(k, j)].clone();
                    }
                }
            }
        }
        Ok(b)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.rows))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn is_zero_matrix(&self, tol: f64) -> bool {
        self.data.iter().all(|x| x.approx_eq(&T::zero(), tol))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            (0..self.rows)
                .map(|i| serde_json::Value::Array(self.row(i).iter().map(Field::to_json).collect()))
                .collect(),
        )
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> =
                self.data[i * self.cols..(i + 1) * self.cols].iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Inner product `sum_i a_i b_i` (bilinear, no conjugation).
pub fn dot<T: Field>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rational;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn random_rational_matrix(rng: &mut ChaCha8Rng, n: usize) -> Matrix<Rational> {
        Matrix::from_fn(n, n, |_, _| q(rng.gen_range(-9..=9), rng.gen_range(1..=5)))
    }

    /// Cofactor expansion along the first row; exponential, test-only oracle.
    fn cofactor_det(m: &Matrix<Rational>) -> Rational {
        let n = m.rows();
        if n == 0 {
            return Rational::from_ratio(1, 1);
        }
        if n == 1 {
            return m[(0, 0)].clone();
        }
        let mut total = Rational::from_ratio(0, 1);
        for j in 0..n {
            let rows: Vec<usize> = (1..n).collect();
            let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
            let minor = cofactor_det(&m.select(&rows, &cols));
            let term = m[(0, j)].clone() * minor;
            total = if j % 2 == 0 { total + term } else { total - term };
        }
        total
    }

    #[test]
    fn det_triangular_and_identity() {
        let m = Matrix::from_rows(vec![vec![q(2, 3), q(0, 1)], vec![q(1, 3), q(1, 1)]]).unwrap();
        assert_eq!(m.det().unwrap(), q(2, 3));
        assert_eq!(Matrix::<Rational>::identity(4).det().unwrap(), q(1, 1));
    }

    #[test]
    fn det_matches_cofactor_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let m = random_rational_matrix(&mut rng, 5);
            assert_eq!(m.det().unwrap(), cofactor_det(&m));
        }
    }

    #[test]
    fn det_needs_pivoting() {
        let m = Matrix::from_rows(vec![
            vec![q(0, 1), q(1, 1), q(2, 1)],
            vec![q(1, 1), q(0, 1), q(3, 1)],
            vec![q(4, 1), q(-3, 1), q(8, 1)],
        ])
        .unwrap();
        assert_eq!(m.det().unwrap(), cofactor_det(&m));
        assert_eq!(m.det().unwrap(), q(-2, 1));
    }

    #[test]
    fn det_rejects_non_square() {
        let m = Matrix::<Rational>::zeros(2, 3);
        assert_eq!(m.det().unwrap_err(), Error::NonSquare { rows: 2, cols: 3 });
    }

    #[test]
    fn float_det_matches_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_rational_matrix(&mut rng, 5);
        let f: Matrix<Complex64> = Matrix::from_fn(5, 5, |i, j| m[(i, j)].to_c64());
        let exact = m.det().unwrap().to_c64();
        assert!(f.det().unwrap().approx_eq(&exact, 1e-10));
    }

    #[test]
    fn solve_examples() {
        let b = Matrix::from_rows(vec![vec![q(1, 1)], vec![q(1, 1)]]).unwrap();
        assert_eq!(Matrix::identity(2).solve(&b).unwrap(), b);
        let d = Matrix::from_rows(vec![vec![q(2, 1), q(0, 1)], vec![q(0, 1), q(4, 1)]]).unwrap();
        let x = d.solve(&b).unwrap();
        assert_eq!(x, Matrix::from_rows(vec![vec![q(1, 2)], vec![q(1, 4)]]).unwrap());
    }

    #[test]
    fn solve_multiply_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let m = random_rational_matrix(&mut rng, 5);
            if m.det().unwrap() == q(0, 1) {
                continue;
            }
            let x0 = Matrix::from_fn(5, 2, |_, _| q(rng.gen_range(-5..=5), rng.gen_range(1..=4)));
            let rhs = m.mul(&x0).unwrap();
            assert_eq!(m.solve(&rhs).unwrap(), x0);
        }
    }

    #[test]
    fn solve_reports_pivot_stage() {
        let m = Matrix::from_rows(vec![
            vec![q(1, 1), q(2, 1), q(3, 1)],
            vec![q(2, 1), q(4, 1), q(6, 1)],
            vec![q(0, 1), q(0, 1), q(1, 1)],
        ])
        .unwrap();
        let err = m.solve(&Matrix::identity(3)).unwrap_err();
        assert_eq!(err, Error::Singular { stage: 1 });
    }

    #[test]
    fn det_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let a = random_rational_matrix(&mut rng, 4);
            let b = random_rational_matrix(&mut rng, 4);
            assert_eq!(a.mul(&b).unwrap().det().unwrap(), a.det().unwrap() * b.det().unwrap());
        }
    }

    #[test]
    fn kron_orders_right_factor_fastest() {
        let a = Matrix::from_rows(vec![vec![q(1, 1), q(2, 1)], vec![q(3, 1), q(4, 1)]]).unwrap();
        let i2 = Matrix::<Rational>::identity(2);
        let k = a.kron(&i2);
        assert_eq!(k[(0, 2)], q(2, 1));
        assert_eq!(k[(1, 3)], q(2, 1));
        assert_eq!(k[(0, 1)], q(0, 1));
    }
}
