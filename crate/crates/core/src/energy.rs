//! Energy functionals for the saddle search.

use nalgebra::{DMatrix, DVector};

use crate::framework::{add_edge_hessian, squared_length, write_edge_gradient, Edge, Framework};
use crate::Real;

pub trait Energy<T: Real> {
    fn value(&self, x: &DVector<T>) -> T;
    fn gradient(&self, x: &DVector<T>) -> DVector<T>;
    fn hessian(&self, x: &DVector<T>) -> DMatrix<T>;
}

/// Squared length of one designated edge, `|p_a - p_b|^2`.
#[derive(Clone, Copy, Debug)]
pub struct FreeEdgeEnergy {
    edge: Edge,
    dim: usize,
    n_coords: usize,
}

impl FreeEdgeEnergy {
    pub fn new(edge: Edge, dim: usize, n_coords: usize) -> Self {
        Self {
            edge,
            dim,
            n_coords,
        }
    }

    pub fn for_framework<T: Real>(fw: &Framework<T>) -> Self {
        let topo = fw.topology();
        Self::new(topo.edges()[topo.free_edge()], fw.dim(), fw.n_coords())
    }
}

impl<T: Real> Energy<T> for FreeEdgeEnergy {
    fn value(&self, x: &DVector<T>) -> T {
        squared_length(x, self.dim, self.edge)
    }

    fn gradient(&self, x: &DVector<T>) -> DVector<T> {
        let mut g = DVector::zeros(self.n_coords);
        write_edge_gradient(g.as_mut_slice(), x, self.dim, self.edge);
        g
    }

    fn hessian(&self, _x: &DVector<T>) -> DMatrix<T> {
        let mut h = DMatrix::zeros(self.n_coords, self.n_coords);
        add_edge_hessian(&mut h, self.edge, self.dim, T::one());
        h
    }
}

/// `E(x) = xᵀ A x` for a symmetric `A`; mostly useful as a model problem.
#[derive(Clone, Debug)]
pub struct QuadraticEnergy<T: Real> {
    a: DMatrix<T>,
}

impl<T: Real> QuadraticEnergy<T> {
    pub fn new(a: DMatrix<T>) -> Self {
        Self {
            a: crate::linalg::symmetrize(&a),
        }
    }

    pub fn diagonal(d: &[T]) -> Self {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }
}

impl<T: Real> Energy<T> for QuadraticEnergy<T> {
    fn value(&self, x: &DVector<T>) -> T {
        x.dot(&(&self.a * x))
    }

    fn gradient(&self, x: &DVector<T>) -> DVector<T> {
        &self.a * x * T::lit(2.0)
    }

    fn hessian(&self, _x: &DVector<T>) -> DMatrix<T> {
        &self.a * T::lit(2.0)
    }
}
