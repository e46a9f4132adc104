//! Small dense linear algebra for desk-scale dimensions (d <= ~10).
//!
//! Everything here is deliberately simple: row-major matrices, Gaussian
//! elimination with partial pivoting, and cyclic Jacobi for symmetric
//! eigenproblems. No external solver dependency.

use crate::scalar::Scalar;

pub fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm<F: Scalar>(a: &[F]) -> F {
    dot(a, a).sqrt()
}

pub fn sub<F: Scalar>(a: &[F], b: &[F]) -> Vec<F> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn distance<F: Scalar>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<F>()
        .sqrt()
}

/// a += c * b
pub fn axpy<F: Scalar>(a: &mut [F], c: F, b: &[F]) {
    for (x, &y) in a.iter_mut().zip(b) {
        *x = *x + c * y;
    }
}

pub fn scale<F: Scalar>(a: &[F], c: F) -> Vec<F> {
    a.iter().map(|&x| x * c).collect()
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> Mat<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.concat() }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn diag(entries: &[F]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = entries[i];
        }
        m
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

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + aik * other[(k, j)];
                }
            }
        }
        out
    }

    /// y = M x
    pub fn matvec(&self, x: &[F]) -> Vec<F> {
        assert_eq!(self.cols, x.len());
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub_mat(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scaled(&self, c: F) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| a * c).collect() }
    }

    pub fn frobenius_norm(&self) -> F {
        self.data.iter().map(|&a| a * a).sum::<F>().sqrt()
    }

    pub fn max_abs(&self) -> F {
        self.data.iter().fold(F::zero(), |m, &a| m.max(a.abs()))
    }

    pub fn asymmetry(&self) -> F {
        let mut worst = F::zero();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl<F: Scalar> std::ops::Index<(usize, usize)> for Mat<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F: Scalar> std::ops::IndexMut<(usize, usize)> for Mat<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

/// Solve A x = b by Gaussian elimination with partial pivoting.
/// Returns `None` when the pivot falls below `pivot_tol` (rank deficiency).
pub fn solve<F: Scalar>(a: &Mat<F>, b: &[F], pivot_tol: F) -> Option<Vec<F>> {
    assert!(a.is_square());
    let n = a.rows();
    assert_eq!(b.len(), n);
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let (piv_row, piv_val) = (col..n)
            .map(|r| (r, m[(r, col)].abs()))
            .fold((col, F::zero()), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if piv_val <= pivot_tol {
            return None;
        }
        if piv_row != col {
            for j in 0..n {
                let t = m[(col, j)];
                m[(col, j)] = m[(piv_row, j)];
                m[(piv_row, j)] = t;
            }
            rhs.swap(col, piv_row);
        }
        for r in (col + 1)..n {
            let f = m[(r, col)] / m[(col, col)];
            if f == F::zero() {
                continue;
            }
            for j in col..n {
                m[(r, j)] = m[(r, j)] - f * m[(col, j)];
            }
            rhs[r] = rhs[r] - f * rhs[col];
        }
    }
    let mut x = vec![F::zero(); n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for j in (i + 1)..n {
            s = s - m[(i, j)] * x[j];
        }
        x[i] = s / m[(i, i)];
    }
    Some(x)
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues, eigenvectors as columns); A = V diag(w) V'.
pub fn symmetric_eigen<F: Scalar>(a: &Mat<F>) -> (Vec<F>, Mat<F>) {
    assert!(a.is_square());
    let n = a.rows();
    let mut m = a.clone();
    // Work on the symmetrized part; callers gate asymmetry separately.
    for i in 0..n {
        for j in (i + 1)..n {
            let s = (m[(i, j)] + m[(j, i)]) * F::half();
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
    let mut v = Mat::identity(n);
    let off = |m: &Mat<F>| -> F {
        let mut s = F::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s = s + m[(i, j)] * m[(i, j)];
                }
            }
        }
        s
    };
    let stop = F::eps() * F::eps() * F::from_f64_c((n * n) as f64) * (m.frobenius_norm() * m.frobenius_norm() + F::one());
    for _sweep in 0..100 {
        if off(&m) <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= F::eps() * (m[(p, p)].abs() + m[(q, q)].abs() + F::eps()) {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (F::two() * apq);
                let t = {
                    let s = if theta >= F::zero() { F::one() } else { -F::one() };
                    s / (theta.abs() + (F::one() + theta * theta).sqrt())
                };
                let c = F::one() / (F::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let w = (0..n).map(|i| m[(i, i)]).collect();
    (w, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let x: Vec<f64> = solve(&a, &[3.0, 5.0], 1e-14).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12);
        assert!((x[1] - 1.4).abs() < 1e-12);
    }

    #[test]
    fn solve_detects_singularity() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(solve(&a, &[1.0, 2.0], 1e-12).is_none());
    }

    #[test]
    fn jacobi_reconstructs() {
        let a = Mat::from_rows(&[vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 0.5], vec![0.0, 0.5, 1.0]]);
        let (w, v) = symmetric_eigen(&a);
        let rebuilt = v.matmul(&Mat::diag(&w)).matmul(&v.transpose());
        assert!(rebuilt.sub_mat(&a).frobenius_norm() < 1e-12);
    }

    #[test]
    fn jacobi_diag_eigenvalues() {
        let a: Mat<f64> = Mat::diag(&[4.0, 9.0, 1.0]);
        let (mut w, _) = symmetric_eigen(&a);
        w.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(w, vec![1.0, 4.0, 9.0]);
    }
}
