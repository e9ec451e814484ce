//! Small dense matrices for pointwise tensor algebra, plus the sparse and
//! banded machinery used by the mesh solvers.

use smallvec::SmallVec;

use crate::error::{FinslerError, Result};
use crate::scalar::{Real, Vector};

/// Dense square matrix, row-major, inline storage up to 4x4.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: SmallVec<[T; 16]>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: smallvec::smallvec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diagonal(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_row_major(n: usize, values: &[T]) -> Result<Self> {
        if values.len() != n * n {
            return Err(FinslerError::DimensionMismatch {
                expected: n * n,
                found: values.len(),
            });
        }
        Ok(Self {
            n,
            data: values.iter().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    /// `self + s * u v^T`
    pub fn rank_one_update(&self, s: T, u: &[T], v: &[T]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                out[(i, j)] += s * u[i] * v[j];
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vector<T> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// `u^T M v`
    pub fn bilinear(&self, u: &[T], v: &[T]) -> T {
        let mut acc = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                acc += u[i] * self[(i, j)] * v[j];
            }
        }
        acc
    }

    pub fn quad(&self, v: &[T]) -> T {
        self.bilinear(v, v)
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        let scale = T::one().max(self.max_abs());
        (0..self.n).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol * scale))
    }

    fn lu(&self) -> Option<(Self, SmallVec<[usize; 4]>, T)> {
        let n = self.n;
        let mut a = self.clone();
        let mut perm: SmallVec<[usize; 4]> = (0..n).collect();
        let mut sign = T::one();
        let scale = self.max_abs();
        if scale == T::zero() {
            return None;
        }
        for k in 0..n {
            let (p, pv) = (k..n)
                .map(|i| (i, a[(i, k)].abs()))
                .fold((k, -T::one()), |best, c| if c.1 > best.1 { c } else { best });
            if pv <= T::epsilon() * scale {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            for i in (k + 1)..n {
                let f = a[(i, k)] / a[(k, k)];
                a[(i, k)] = f;
                for j in (k + 1)..n {
                    let akj = a[(k, j)];
                    a[(i, j)] -= f * akj;
                }
            }
        }
        Some((a, perm, sign))
    }

    pub fn det(&self) -> T {
        match self.lu() {
            Some((a, _, sign)) => (0..self.n).fold(sign, |d, i| d * a[(i, i)]),
            None => T::zero(),
        }
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vector<T>> {
        let (a, perm, _) = self
            .lu()
            .ok_or_else(|| FinslerError::InvalidMetric("singular matrix".into()))?;
        let n = self.n;
        let mut x: Vector<T> = perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = a[(i, j)];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let u = a[(i, j)];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= a[(i, i)];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut out = Self::zeros(n);
        let mut e = crate::scalar::zeros::<T>(n);
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[j] = T::one();
            let col = self.solve(&e)?;
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        Ok(out)
    }

    /// True when a Cholesky factorisation succeeds.
    pub fn is_positive_definite(&self) -> bool {
        let n = self.n;
        let mut l = Self::zeros(n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d <= T::zero() {
                return false;
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in (j + 1)..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        true
    }

    /// Eigenvalues of a symmetric 2x2 matrix in ascending order; for larger
    /// sizes falls back to Jacobi sweeps.
    pub fn symmetric_eigenvalues(&self) -> Vector<T> {
        let n = self.n;
        let mut a = self.clone();
        for _ in 0..64 {
            let mut off = T::zero();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        off += a[(i, j)] * a[(i, j)];
                    }
                }
            }
            if off.sqrt() <= T::epsilon() * (T::one() + a.max_abs()) {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq == T::zero() {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (T::lit(2.0) * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vector<T> = (0..n).map(|i| a[(i, i)]).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Compressed sparse row matrix assembled from triplets.
#[derive(Debug, Clone)]
pub struct CsrMatrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Duplicate entries are summed.
    pub fn from_triplets(rows: usize, cols: usize, mut trip: Vec<(usize, usize, T)>) -> Self {
        trip.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(trip.len());
        let mut values: Vec<T> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in trip {
            if last == Some((i, j)) {
                *values.last_mut().expect("previous entry") += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|k| self.values[k] * x[self.col_idx[k]])
                    .sum()
            })
            .collect()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => T::zero(),
        }
    }

    pub fn bandwidth(&self) -> usize {
        (0..self.rows)
            .flat_map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, k))
            })
            .map(|(i, k)| i.abs_diff(self.col_idx[k]))
            .max()
            .unwrap_or(0)
    }

    /// Restriction to the rows and columns listed in `keep` (in that order).
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.cols];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut trip = Vec::new();
        for (new_i, &i) in keep.iter().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = map[self.col_idx[k]];
                if j != usize::MAX {
                    trip.push((new_i, j, self.values[k]));
                }
            }
        }
        Self::from_triplets(keep.len(), keep.len(), trip)
    }

    pub fn add_scaled(&self, s: T, other: &Self) -> Self {
        let mut trip = Vec::with_capacity(self.values.len() + other.values.len());
        for m in [(T::one(), self), (s, other)] {
            for i in 0..m.1.rows {
                for k in m.1.row_ptr[i]..m.1.row_ptr[i + 1] {
                    trip.push((i, m.1.col_idx[k], m.0 * m.1.values[k]));
                }
            }
        }
        Self::from_triplets(self.rows, self.cols, trip)
    }
}

/// Cholesky factor of a symmetric positive definite band matrix.
#[derive(Debug, Clone)]
pub struct BandedCholesky<T> {
    n: usize,
    bw: usize,
    // row i stores L[i, i-bw ..= i]
    l: Vec<T>,
}

impl<T: Real> BandedCholesky<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.rows;
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut l = vec![T::zero(); n * w];
        let at = |i: usize, j: usize| -> usize { i * w + (j + bw - i) };
        for i in 0..n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.col_idx[k];
                if j <= i {
                    l[at(i, j)] = a.values[k];
                }
            }
        }
        for j in 0..n {
            let lo = j.saturating_sub(bw);
            let mut d = l[at(j, j)];
            for k in lo..j {
                let v = l[at(j, k)];
                d -= v * v;
            }
            if d <= T::zero() {
                return Err(FinslerError::NoConvergence(format!(
                    "band matrix not positive definite at pivot {j}"
                )));
            }
            let d = d.sqrt();
            l[at(j, j)] = d;
            let hi = (j + bw).min(n - 1);
            for i in (j + 1)..=hi {
                let lo_i = i.saturating_sub(bw).max(lo);
                let mut s = l[at(i, j)];
                for k in lo_i..j {
                    s -= l[at(i, k)] * l[at(j, k)];
                }
                l[at(i, j)] = s / d;
            }
        }
        Ok(Self { n, bw, l })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let at = |i: usize, j: usize| -> usize { i * w + (j + bw - i) };
        let mut y = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = y[i];
            for k in lo..i {
                s -= self.l[at(i, k)] * y[k];
            }
            y[i] = s / self.l[at(i, i)];
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut s = y[i];
            for k in (i + 1)..=hi {
                s -= self.l[at(k, i)] * y[k];
            }
            y[i] = s / self.l[at(i, i)];
        }
        y
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_inverse_of_2x2() {
        let m = Matrix::from_row_major(2, &[2.0, 1.0, 1.0, 3.0]).unwrap();
        assert!((m.det() - 5.0_f64).abs() < 1e-14);
        let inv = m.inverse().unwrap();
        let id = m.mul(&inv);
        assert!((id[(0, 0)] - 1.0).abs() < 1e-14 && id[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = Matrix::from_row_major(2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert_eq!(m.det(), 0.0);
        assert!(m.solve(&[1.0, 1.0]).is_err());
        assert!(!m.is_positive_definite());
    }

    #[test]
    fn jacobi_eigenvalues() {
        let m = Matrix::from_row_major(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let ev = m.symmetric_eigenvalues();
        assert!((ev[0] - 1.0_f64).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn banded_cholesky_solves_tridiagonal() {
        let n = 50;
        let mut trip = Vec::new();
        for i in 0..n {
            trip.push((i, i, 2.0_f64));
            if i > 0 {
                trip.push((i, i - 1, -1.0));
                trip.push((i - 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, trip);
        assert_eq!(a.bandwidth(), 1);
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.mul_vec(&x_true);
        let x = BandedCholesky::factor(&a).unwrap().solve(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn csr_sums_duplicates_and_restricts() {
        let a = CsrMatrix::from_triplets(
            3,
            3,
            vec![(0, 0, 1.0_f64), (0, 0, 2.0), (1, 2, 5.0), (2, 1, 5.0), (2, 2, 1.0)],
        );
        assert_eq!(a.get(0, 0), 3.0);
        let s = a.submatrix(&[2, 1]);
        assert_eq!(s.get(0, 1), 5.0);
        assert_eq!(s.get(0, 0), 1.0);
    }
}
