//! Small dense vector helpers over [`Scalar`].

use crate::scalar::Scalar;

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn scale<T: Scalar>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

pub fn distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        .sqrt()
}

/// Returns `a / |a|`, or `None` for a zero (or non-finite) norm.
pub fn normalized<T: Scalar>(a: &[T]) -> Option<Vec<T>> {
    let n = norm(a);
    if n > T::zero() && n.is_finite() {
        Some(scale(a, T::one() / n))
    } else {
        None
    }
}

/// Removes from `v` its projection on every vector of `basis` (assumed orthonormal).
pub fn project_out<T: Scalar>(v: &[T], basis: &[Vec<T>]) -> Vec<T> {
    let mut out = v.to_vec();
    for u in basis {
        let c = dot(v, u);
        axpy(-c, u, &mut out);
    }
    out
}

/// Modified Gram-Schmidt. Returns `None` if the input is rank deficient.
pub fn gram_schmidt<T: Scalar>(vectors: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        // two passes keep the set orthonormal to rounding
        for _ in 0..2 {
            for u in &basis {
                let c = dot(&w, u);
                axpy(-c, u, &mut w);
            }
        }
        if norm(&w) <= T::lit(1e-10) * norm(v) {
            return None;
        }
        basis.push(normalized(&w)?);
    }
    Some(basis)
}

/// Solves `A x = b` for a symmetric positive-definite `A` (row-major, n x n)
/// by Cholesky factorisation. Returns `None` when `A` is not positive definite.
pub fn cholesky_solve<T: Scalar>(a: &[T], b: &[T], n: usize) -> Option<Vec<T>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= T::zero() || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    // forward: L y = b
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    // backward: L^T x = y
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}
