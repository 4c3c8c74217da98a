//! Dense symmetric matrices, a guarded symmetric solve, and the central
//! finite-difference stencil shared by every numerical oracle in the crate.

use crate::error::{GeomError, Result};
use crate::scalar::{real, to_f64, Real};

/// Relative determinant guard for [`solve_sym`]. Tripping it is a signal,
/// not a nuisance: metric degeneracy is one of the facts under test, so it
/// is surfaced as [`GeomError::DegenerateMatrix`] and never regularized.
pub const DEGENERACY_GUARD: f64 = 1e-12;

/// Default step for first-derivative stencils of metric/connection fields.
pub const FD_STEP_FIRST: f64 = 1e-5;

/// Wider step for the nested second-derivative paths inside numerical
/// curvature; two stacked differences trade truncation against cancellation.
pub const FD_STEP_CURVATURE: f64 = 1e-4;

/// Symmetric n-by-n matrix with triangular storage, so `a[i][j]` and
/// `a[j][i]` are the same slot and symmetry is exact by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

#[inline]
fn tri_index(i: usize, j: usize) -> usize {
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    hi * (hi + 1) / 2 + lo
}

impl<T: Real> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![T::zero(); n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[tri_index(i, j)]
    }

    /// Writes entry (i, j); (j, i) is the same slot.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[tri_index(i, j)] = value;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, value: T) {
        self.data[tri_index(i, j)] += value;
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| (0..self.n).fold(T::zero(), |acc, j| acc + self.get(i, j) * x[j]))
            .collect()
    }

    /// Bilinear form x^T A y.
    pub fn inner(&self, x: &[T], y: &[T]) -> T {
        dot(&self.mul_vec(x), y)
    }

    fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Scale for the degeneracy guard: product of row max-norms.
    pub fn guard_scale(&self) -> T {
        (0..self.n).fold(T::one(), |acc, i| {
            let row_max = (0..self.n).fold(T::zero(), |m, j| m.max(self.get(i, j).abs()));
            acc * row_max
        })
    }

    /// Determinant via LU with partial pivoting.
    pub fn det(&self) -> T {
        let mut a = self.to_dense();
        let mut det = T::one();
        for col in 0..self.n {
            let pivot_row = (col..self.n)
                .max_by(|&r, &s| {
                    a[r][col]
                        .abs()
                        .partial_cmp(&a[s][col].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            if a[pivot_row][col] == T::zero() {
                return T::zero();
            }
            if pivot_row != col {
                a.swap(pivot_row, col);
                det = -det;
            }
            det *= a[col][col];
            for row in col + 1..self.n {
                let factor = a[row][col] / a[col][col];
                for k in col..self.n {
                    let sub = factor * a[col][k];
                    a[row][k] -= sub;
                }
            }
        }
        det
    }

    /// Whether the matrix is positive definite (Cholesky succeeds).
    pub fn is_positive_definite(&self) -> bool {
        let mut a = self.to_dense();
        for i in 0..self.n {
            for j in 0..=i {
                let mut sum = a[i][j];
                for k in 0..j {
                    let t = a[i][k] * a[j][k];
                    sum -= t;
                }
                if i == j {
                    if sum <= T::zero() {
                        return false;
                    }
                    a[i][i] = sum.sqrt();
                } else {
                    a[i][j] = sum / a[j][j];
                }
            }
        }
        true
    }

    /// Inverse, guarded like [`solve_sym`].
    pub fn inverse(&self) -> Result<SymMatrix<T>> {
        let mut cols = Vec::with_capacity(self.n);
        for j in 0..self.n {
            let mut e = vec![T::zero(); self.n];
            e[j] = T::one();
            cols.push(solve_sym(self, &e)?);
        }
        Ok(SymMatrix::from_fn(self.n, |i, j| cols[j][i]))
    }
}

/// Errors with [`GeomError::DegenerateMatrix`] when
/// `|det| <= 1e-12 * scale`, `scale` being the product of row max-norms.
pub fn check_nondegenerate<T: Real>(a: &SymMatrix<T>) -> Result<()> {
    let scale = a.guard_scale();
    let det = a.det();
    if det.abs() <= real::<T>(DEGENERACY_GUARD) * scale {
        return Err(GeomError::DegenerateMatrix {
            det: to_f64(det),
            scale: to_f64(scale),
        });
    }
    Ok(())
}

/// Solves `A x = b` for a symmetric `A`, guarded by the relative
/// determinant threshold of [`check_nondegenerate`].
pub fn solve_sym<T: Real>(a: &SymMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    let n = a.dim();
    assert_eq!(b.len(), n, "right-hand side length mismatch");
    check_nondegenerate(a)?;

    let mut m = a.to_dense();
    let mut x: Vec<T> = b.to_vec();
    // Gaussian elimination with partial pivoting.
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| {
                m[r][col]
                    .abs()
                    .partial_cmp(&m[s][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if pivot_row != col {
            m.swap(pivot_row, col);
            x.swap(pivot_row, col);
        }
        let pivot = m[col][col];
        for row in col + 1..n {
            let factor = m[row][col] / pivot;
            for k in col..n {
                let sub = factor * m[col][k];
                m[row][k] -= sub;
            }
            let sub = factor * x[col];
            x[row] -= sub;
        }
    }
    for col in (0..n).rev() {
        let mut sum = x[col];
        for k in col + 1..n {
            let t = m[col][k] * x[k];
            sum -= t;
        }
        x[col] = sum / m[col][col];
    }
    Ok(x)
}

/// Central difference `(f(p + h e_i) - f(p - h e_i)) / (2h)`.
///
/// This is the independent oracle for every first partial derivative the
/// identity checks need; it never reuses the symbolic derivatives that
/// built the quantity under test.
pub fn central_fd<T: Real, E>(
    f: impl Fn(&[T]) -> std::result::Result<T, E>,
    p: &[T],
    i: usize,
    h: T,
) -> std::result::Result<T, E> {
    let mut fwd = p.to_vec();
    let mut bwd = p.to_vec();
    fwd[i] += h;
    bwd[i] -= h;
    Ok((f(&fwd)? - f(&bwd)?) / (real::<T>(2.0) * h))
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

pub fn scale_vec<T: Real>(c: T, v: &[T]) -> Vec<T> {
    v.iter().map(|&x| c * x).collect()
}

pub fn add_vec<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn sub_vec<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

/// `target += c * v`.
pub fn axpy<T: Real>(target: &mut [T], c: T, v: &[T]) {
    assert_eq!(target.len(), v.len());
    for (t, &x) in target.iter_mut().zip(v) {
        *t += c * x;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_identity() {
        let a = SymMatrix::<f64>::identity(3);
        let x = solve_sym(&a, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn solve_diagonal_by_hand() {
        // A = diag(4, 1), b = (8, 3) -> (2, 3).
        let a = SymMatrix::from_diag(&[4.0f64, 1.0]);
        let x = solve_sym(&a, &[8.0, 3.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14);
        assert!((x[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rank_one_matrix_is_degenerate() {
        let a = SymMatrix::from_fn(2, |_, _| 1.0);
        let err = solve_sym(&a, &[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, GeomError::DegenerateMatrix { .. }));
    }

    #[test]
    fn central_fd_quadratic_and_constant() {
        let sq = |p: &[f64]| Ok::<_, ()>(p[0] * p[0]);
        let d = central_fd(sq, &[3.0], 0, 1e-5).unwrap();
        assert!((d - 6.0).abs() <= 1e-9);

        let konst = |_: &[f64]| Ok::<_, ()>(7.0);
        assert_eq!(central_fd(konst, &[1.0], 0, 1e-5).unwrap(), 0.0);
    }

    #[test]
    fn central_fd_sine_at_zero() {
        // Taylor remainder bound h^2/6 ~ 1.7e-11 at h = 1e-5.
        let f = |p: &[f64]| Ok::<_, ()>(p[0].sin());
        let d = central_fd(f, &[0.0], 0, 1e-5).unwrap();
        assert!((d - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn positive_definite_probe() {
        assert!(SymMatrix::from_diag(&[2.0, 0.5]).is_positive_definite());
        let mut indef = SymMatrix::from_diag(&[1.0, -1.0]);
        assert!(!indef.is_positive_definite());
        indef.set(0, 1, 3.0);
        assert!(!indef.is_positive_definite());
    }

    #[test]
    fn det_matches_hand_value() {
        let mut a = SymMatrix::<f64>::zeros(2);
        a.set(0, 0, 9.0);
        a.set(0, 1, 3.0);
        a.set(1, 1, 4.0);
        assert!((a.det() - 27.0).abs() < 1e-12);
    }
}
