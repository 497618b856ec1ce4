//! Dense decompositions used throughout: SVD with a full right basis,
//! sorted symmetric eigendecomposition and numerical rank rules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::Real;

/// Default relative threshold below which a singular value counts as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Singular values (descending) together with a complete orthonormal
/// basis of the column space of the input's domain.
///
/// Wide inputs are padded with zero rows so that `v` is always square;
/// `singular` then has one entry per column, the padded ones being zero.
#[derive(Clone, Debug)]
pub struct RightSvd<T: Real> {
    pub singular: Vec<T>,
    pub v: DMatrix<T>,
}

impl<T: Real> RightSvd<T> {
    pub fn new(a: &DMatrix<T>) -> Self {
        let (rows, cols) = a.shape();
        if cols == 0 {
            return Self {
                singular: Vec::new(),
                v: DMatrix::zeros(0, 0),
            };
        }
        let square = if rows < cols {
            let mut padded = DMatrix::zeros(cols, cols);
            padded.view_mut((0, 0), (rows, cols)).copy_from(a);
            padded
        } else {
            a.clone()
        };
        let svd = square.svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&i, &j| {
            svd.singular_values[j]
                .partial_cmp(&svd.singular_values[i])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut v = DMatrix::zeros(cols, cols);
        let mut singular = Vec::with_capacity(cols);
        for (dst, &src) in order.iter().enumerate() {
            singular.push(svd.singular_values[src]);
            v.set_column(dst, &v_t.row(src).transpose());
        }
        Self { singular, v }
    }

    pub fn largest(&self) -> T {
        self.singular.first().copied().unwrap_or_else(T::zero)
    }

    /// Number of singular values above `rel_tol * largest`.
    pub fn rank(&self, rel_tol: T) -> usize {
        numerical_rank(&self.singular, rel_tol)
    }

    /// Orthonormal basis of the null space (columns).
    pub fn null_space(&self, rel_tol: T) -> DMatrix<T> {
        let r = self.rank(rel_tol);
        self.v.columns(r, self.v.ncols() - r).into_owned()
    }

    /// Orthonormal basis of the row space (columns).
    pub fn row_space(&self, rel_tol: T) -> DMatrix<T> {
        let r = self.rank(rel_tol);
        self.v.columns(0, r).into_owned()
    }
}

pub fn numerical_rank<T: Real>(singular_desc: &[T], rel_tol: T) -> usize {
    let largest = match singular_desc.first() {
        Some(&s) if s > T::zero() => s,
        _ => return 0,
    };
    let cutoff = rel_tol * largest;
    singular_desc.iter().filter(|&&s| s > cutoff).count()
}

/// Singular values of `a`, descending, without padding.
pub fn singular_values<T: Real>(a: &DMatrix<T>) -> Vec<T> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<T> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Eigenvalues ascending with matching eigenvector columns.
pub fn symmetric_eigen<T: Real>(m: &DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = symmetrize(m);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::lit(0.5)
}

/// Orthonormal basis for the span of the columns of `m`, keeping directions
/// whose singular value exceeds the absolute threshold `abs_tol`.
pub fn orthonormal_span<T: Real>(m: &DMatrix<T>, abs_tol: T) -> DMatrix<T> {
    if m.ncols() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = RightSvd::new(&m.transpose());
    let r = svd.singular.iter().filter(|&&s| s > abs_tol).count();
    svd.v.columns(0, r).into_owned()
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn min_norm_solve<T: Real>(a: &DMatrix<T>, b: &DVector<T>, rel_tol: T) -> DVector<T> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return DVector::zeros(a.ncols());
    }
    let svd = a.clone().svd(true, true);
    let largest = svd
        .singular_values
        .iter()
        .copied()
        .fold(T::zero(), |acc, s| if s > acc { s } else { acc });
    let eps = rel_tol * largest;
    svd.solve(b, eps)
        .unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Modified Gram-Schmidt of `v` against the unit columns in `basis`.
pub fn orthogonalize_against<T: Real>(v: &mut DVector<T>, basis: &[DVector<T>]) {
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(v);
            v.axpy(-c, b, T::one());
        }
    }
}

pub fn inf_norm<T: Real>(v: &DVector<T>) -> T {
    v.iter().fold(T::zero(), |acc, x| {
        let a = x.abs();
        if a > acc {
            a
        } else {
            acc
        }
    })
}
