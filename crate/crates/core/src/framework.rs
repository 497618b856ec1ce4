//! Bar-and-joint frameworks and their rigidity primitives.
//!
//! Coordinates are stored flat: vertex `i` occupies `coords[i*d .. (i+1)*d]`.
//! Edge residuals are squared-length differences
//! `f_i(p) = |p_a - p_b|^2 - l_i^2`, so gradients are `2 (p_a - p_b)` blocks
//! and Hessians are constant.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, RightSvd};
use crate::Real;

/// Number of rigid-body motions in dimension `d`, `d(d+1)/2`.
pub fn rigid_motion_count(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

#[derive(Clone, Debug, PartialEq)]
pub struct Configuration<T: Real> {
    dim: usize,
    coords: DVector<T>,
}

impl<T: Real> Configuration<T> {
    pub fn new(dim: usize, coords: DVector<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidFramework(
                "dimension must be at least 1".into(),
            ));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidFramework(format!(
                "{} coordinates do not split into vertices of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidFramework("non-finite coordinate".into()));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_vertices(dim: usize, vertices: &[Vec<T>]) -> Result<Self> {
        let mut flat = Vec::with_capacity(vertices.len() * dim);
        for (i, v) in vertices.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::InvalidFramework(format!(
                    "vertex {i} has {} coordinates, expected {dim}",
                    v.len()
                )));
            }
            flat.extend_from_slice(v);
        }
        Self::new(dim, DVector::from_vec(flat))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn coords(&self) -> &DVector<T> {
        &self.coords
    }

    pub fn vertex(&self, i: usize) -> &[T] {
        &self.coords.as_slice()[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vertices(&self) -> Vec<Vec<T>> {
        (0..self.n_vertices())
            .map(|i| self.vertex(i).to_vec())
            .collect()
    }

    pub fn centroid(&self) -> Vec<T> {
        let n = self.n_vertices();
        let mut c = vec![T::zero(); self.dim];
        if n == 0 {
            return c;
        }
        for i in 0..n {
            for (k, ck) in c.iter_mut().enumerate() {
                *ck += self.coords[i * self.dim + k];
            }
        }
        let inv = T::one() / T::from_usize(n).unwrap();
        c.iter_mut().for_each(|ck| *ck *= inv);
        c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }

    fn key(&self) -> (usize, usize) {
        (self.a.min(self.b), self.a.max(self.b))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    n_vertices: usize,
    edges: Vec<Edge>,
    free_edge: usize,
}

impl Topology {
    pub fn new(n_vertices: usize, edges: Vec<Edge>, free_edge: usize) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, e) in edges.iter().enumerate() {
            if e.a == e.b {
                return Err(Error::InvalidFramework(format!(
                    "edge {i} is a loop on vertex {}",
                    e.a
                )));
            }
            if e.a >= n_vertices || e.b >= n_vertices {
                return Err(Error::InvalidFramework(format!(
                    "edge {i} ({}, {}) references a vertex >= {n_vertices}",
                    e.a, e.b
                )));
            }
            if !seen.insert(e.key()) {
                return Err(Error::InvalidFramework(format!(
                    "edge {i} ({}, {}) duplicates an earlier edge",
                    e.a, e.b
                )));
            }
        }
        if free_edge >= edges.len() {
            return Err(Error::IndexOutOfRange {
                what: "free edge",
                index: free_edge,
                len: edges.len(),
            });
        }
        Ok(Self {
            n_vertices,
            edges,
            free_edge,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn free_edge(&self) -> usize {
        self.free_edge
    }

    pub fn edge(&self, i: usize) -> Result<Edge> {
        self.edges.get(i).copied().ok_or(Error::IndexOutOfRange {
            what: "edge",
            index: i,
            len: self.edges.len(),
        })
    }

    /// Indices of the fixed-length edges, in declaration order.
    pub fn fixed_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(move |&i| i != self.free_edge)
    }

    /// Constant Hessian of the `i`th edge residual: `+2 I` on the diagonal
    /// blocks of both endpoints, `-2 I` on the off-diagonal blocks.
    pub fn edge_hessian<T: Real>(&self, i: usize, dim: usize) -> Result<DMatrix<T>> {
        let e = self.edge(i)?;
        let n = self.n_vertices * dim;
        let mut h = DMatrix::zeros(n, n);
        add_edge_hessian(&mut h, e, dim, T::one());
        Ok(h)
    }
}

/// Adds `weight * ∇²f_e` into `h`.
pub(crate) fn add_edge_hessian<T: Real>(h: &mut DMatrix<T>, e: Edge, dim: usize, weight: T) {
    let two = T::lit(2.0) * weight;
    for k in 0..dim {
        let (ia, ib) = (e.a * dim + k, e.b * dim + k);
        h[(ia, ia)] += two;
        h[(ib, ib)] += two;
        h[(ia, ib)] -= two;
        h[(ib, ia)] -= two;
    }
}

pub(crate) fn squared_length<T: Real>(x: &DVector<T>, dim: usize, e: Edge) -> T {
    let mut s = T::zero();
    for k in 0..dim {
        let d = x[e.a * dim + k] - x[e.b * dim + k];
        s += d * d;
    }
    s
}

/// Writes `∇f_e(x)` into `row` (a slice of length `n*d`).
pub(crate) fn write_edge_gradient<T: Real>(row: &mut [T], x: &DVector<T>, dim: usize, e: Edge) {
    let two = T::lit(2.0);
    for k in 0..dim {
        let d = x[e.a * dim + k] - x[e.b * dim + k];
        row[e.a * dim + k] = two * d;
        row[e.b * dim + k] = -two * d;
    }
}

/// Rigidity matrix of `edges` at `x`, one row per edge.
pub fn rigidity_matrix_at<T: Real>(edges: &[Edge], x: &DVector<T>, dim: usize) -> DMatrix<T> {
    let n = x.len();
    let mut r = DMatrix::zeros(edges.len(), n);
    let mut row = vec![T::zero(); n];
    for (i, &e) in edges.iter().enumerate() {
        row.iter_mut().for_each(|v| *v = T::zero());
        write_edge_gradient(&mut row, x, dim, e);
        for (j, &v) in row.iter().enumerate() {
            r[(i, j)] = v;
        }
    }
    r
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pin<T: Real> {
    pub vertex: usize,
    pub axis: usize,
    pub value: T,
}

impl<T: Real> Pin<T> {
    pub fn new(vertex: usize, axis: usize, value: T) -> Self {
        Self {
            vertex,
            axis,
            value,
        }
    }

    pub fn coordinate(&self, dim: usize) -> usize {
        self.vertex * dim + self.axis
    }
}

/// Exactly `d(d+1)/2` pinned coordinates that remove rigid-body motions.
#[derive(Clone, Debug, PartialEq)]
pub struct PinningScheme<T: Real> {
    pins: Vec<Pin<T>>,
}

impl<T: Real> PinningScheme<T> {
    pub fn new(pins: Vec<Pin<T>>, dim: usize, n_vertices: usize) -> Result<Self> {
        let want = rigid_motion_count(dim);
        if pins.len() != want {
            return Err(Error::InvalidFramework(format!(
                "expected {want} pins in dimension {dim}, got {}",
                pins.len()
            )));
        }
        let mut seen = HashSet::new();
        for p in &pins {
            if p.axis >= dim {
                return Err(Error::InvalidFramework(format!(
                    "pin axis {} out of range for dimension {dim}",
                    p.axis
                )));
            }
            if p.vertex >= n_vertices {
                return Err(Error::InvalidFramework(format!(
                    "pin references vertex {} >= {n_vertices}",
                    p.vertex
                )));
            }
            if !seen.insert((p.vertex, p.axis)) {
                return Err(Error::InvalidFramework(format!(
                    "duplicate pin on vertex {} axis {}",
                    p.vertex, p.axis
                )));
            }
        }
        Ok(Self { pins })
    }

    pub fn pins(&self) -> &[Pin<T>] {
        &self.pins
    }
}

/// Orthonormal basis of the trivial (rigid-body) infinitesimal motions.
#[derive(Clone, Debug)]
pub struct RigidBasis<T: Real> {
    pub basis: DMatrix<T>,
    /// Set when fewer than `d(d+1)/2` independent motions exist
    /// (e.g. all vertices coincident, or collinear in 3D).
    pub rank_deficient: bool,
}

/// Translations plus infinitesimal rotations about the centroid,
/// orthonormalized.
pub fn rigid_body_basis<T: Real>(config: &Configuration<T>) -> RigidBasis<T> {
    let dim = config.dim();
    let n = config.n_vertices();
    let c = config.centroid();
    let mut raw: Vec<DVector<T>> = Vec::with_capacity(rigid_motion_count(dim));
    for axis in 0..dim {
        let mut t = DVector::zeros(n * dim);
        for i in 0..n {
            t[i * dim + axis] = T::one();
        }
        raw.push(t);
    }
    for alpha in 0..dim {
        for beta in alpha + 1..dim {
            let mut r = DVector::zeros(n * dim);
            for i in 0..n {
                let p = config.vertex(i);
                r[i * dim + alpha] = -(p[beta] - c[beta]);
                r[i * dim + beta] = p[alpha] - c[alpha];
            }
            raw.push(r);
        }
    }

    let scale = raw
        .iter()
        .map(|v| v.norm())
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    let cutoff = T::lit(1e-10) * if scale > T::zero() { scale } else { T::one() };
    let mut basis: Vec<DVector<T>> = Vec::with_capacity(raw.len());
    let mut deficient = false;
    for mut v in raw {
        linalg::orthogonalize_against(&mut v, &basis);
        let norm = v.norm();
        if norm > cutoff {
            basis.push(v / norm);
        } else {
            deficient = true;
        }
    }
    let mut m = DMatrix::zeros(n * dim, basis.len());
    for (j, v) in basis.iter().enumerate() {
        m.set_column(j, v);
    }
    RigidBasis {
        basis: m,
        rank_deficient: deficient,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Framework<T: Real> {
    topology: Topology,
    config: Configuration<T>,
    rest_lengths: Vec<T>,
    pins: PinningScheme<T>,
}

impl<T: Real> Framework<T> {
    /// Builds a framework; `rest_lengths = None` measures them from `config`.
    ///
    /// Maxwell's under-constrained count is not enforced here (rigid
    /// frameworks are valid analysis inputs); see [`Framework::is_under_constrained`].
    pub fn new(
        topology: Topology,
        config: Configuration<T>,
        rest_lengths: Option<Vec<T>>,
        pins: Vec<Pin<T>>,
    ) -> Result<Self> {
        let dim = config.dim();
        if config.n_vertices() != topology.n_vertices() {
            return Err(Error::InvalidFramework(format!(
                "topology has {} vertices but configuration has {}",
                topology.n_vertices(),
                config.n_vertices()
            )));
        }
        let rest_lengths = match rest_lengths {
            Some(l) => {
                if l.len() != topology.n_edges() {
                    return Err(Error::InvalidFramework(format!(
                        "{} rest lengths for {} edges",
                        l.len(),
                        topology.n_edges()
                    )));
                }
                l
            }
            None => topology
                .edges()
                .iter()
                .map(|&e| squared_length(config.coords(), dim, e).sqrt())
                .collect(),
        };
        if let Some(i) = rest_lengths
            .iter()
            .position(|&l| !(l > T::zero()) || !l.is_finite())
        {
            return Err(Error::InvalidFramework(format!(
                "rest length of edge {i} must be strictly positive"
            )));
        }
        let pins = PinningScheme::new(pins, dim, topology.n_vertices())?;
        let tol = T::lit(1e-9);
        for p in pins.pins() {
            let x = config.coords()[p.coordinate(dim)];
            if (x - p.value).abs() > tol * (T::one() + p.value.abs()) {
                return Err(Error::InvalidFramework(format!(
                    "pin on vertex {} axis {} has value {:?} but the coordinate is {:?}",
                    p.vertex, p.axis, p.value, x
                )));
            }
        }
        Ok(Self {
            topology,
            config,
            rest_lengths,
            pins,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn config(&self) -> &Configuration<T> {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim()
    }

    pub fn n_vertices(&self) -> usize {
        self.topology.n_vertices()
    }

    pub fn n_edges(&self) -> usize {
        self.topology.n_edges()
    }

    /// `n * d`, the number of coordinates.
    pub fn n_coords(&self) -> usize {
        self.config.coords().len()
    }

    pub fn rest_lengths(&self) -> &[T] {
        &self.rest_lengths
    }

    pub fn pins(&self) -> &[Pin<T>] {
        self.pins.pins()
    }

    /// `n d > m + d(d+1)/2`.
    pub fn is_under_constrained(&self) -> bool {
        self.n_coords() > self.n_edges() + rigid_motion_count(self.dim())
    }

    /// Same topology, rest lengths and pins at a new point.
    pub fn with_coords(&self, coords: DVector<T>) -> Result<Self> {
        if coords.len() != self.n_coords() {
            return Err(Error::DimensionMismatch {
                expected: self.n_coords(),
                got: coords.len(),
            });
        }
        let config = Configuration::new(self.dim(), coords)?;
        Ok(Self {
            config,
            ..self.clone()
        })
    }

    /// Replaces every rest length (including the free edge's record) with the
    /// length measured at the current configuration.
    pub fn with_measured_lengths(&self) -> Self {
        let dim = self.dim();
        let rest_lengths = self
            .topology
            .edges()
            .iter()
            .map(|&e| squared_length(self.config.coords(), dim, e).sqrt())
            .collect();
        Self {
            rest_lengths,
            ..self.clone()
        }
    }

    pub fn edge_length(&self, i: usize) -> Result<T> {
        let e = self.topology.edge(i)?;
        Ok(squared_length(self.config.coords(), self.dim(), e).sqrt())
    }

    pub fn edge_residual(&self, i: usize) -> Result<T> {
        let e = self.topology.edge(i)?;
        let l = self.rest_lengths[i];
        Ok(squared_length(self.config.coords(), self.dim(), e) - l * l)
    }

    /// Squared length of the free edge.
    pub fn free_edge_energy(&self) -> T {
        let e = self.topology.edges()[self.topology.free_edge()];
        squared_length(self.config.coords(), self.dim(), e)
    }

    pub fn edge_gradient(&self, i: usize) -> Result<DVector<T>> {
        let e = self.topology.edge(i)?;
        let mut g = DVector::zeros(self.n_coords());
        write_edge_gradient(g.as_mut_slice(), self.config.coords(), self.dim(), e);
        Ok(g)
    }

    pub fn edge_hessian(&self, i: usize) -> Result<DMatrix<T>> {
        self.topology.edge_hessian(i, self.dim())
    }

    /// All `m` edge gradients as rows, the free edge included.
    pub fn rigidity_matrix(&self) -> DMatrix<T> {
        rigidity_matrix_at(self.topology.edges(), self.config.coords(), self.dim())
    }

    pub fn rigid_body_basis(&self) -> RigidBasis<T> {
        rigid_body_basis(&self.config)
    }

    /// Edges whose endpoints coincide (their gradient rows vanish).
    pub fn degenerate_edges(&self) -> Vec<usize> {
        let dim = self.dim();
        let scale = self
            .rest_lengths
            .iter()
            .fold(T::zero(), |a, &b| if b > a { b } else { a });
        let tol = T::lit(1e-12) * scale * scale;
        self.topology
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, &e)| squared_length(self.config.coords(), dim, e) <= tol)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn rigidity_rank(&self, rank_tol: T) -> usize {
        RightSvd::new(&self.rigidity_matrix()).rank(rank_tol)
    }

    /// Orthonormal basis of `null R(p)` restricted to the orthogonal
    /// complement of the trivial motions.
    pub fn nontrivial_flex_basis(&self, rank_tol: T) -> DMatrix<T> {
        let null = RightSvd::new(&self.rigidity_matrix()).null_space(rank_tol);
        let trivial = self.rigid_body_basis().basis;
        let n = self.n_coords();
        if null.ncols() == 0 {
            return DMatrix::zeros(n, 0);
        }
        let projected = &null - &trivial * (trivial.transpose() * &null);
        linalg::orthonormal_span(&projected, T::lit(1e-6))
    }
}
