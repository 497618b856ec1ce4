//! The constraint manifold `c(x) = 0`: Jacobians, tangent projection,
//! Lagrange multipliers, the projected Hessian of the Lagrangian and
//! Newton projection back onto the manifold.

use nalgebra::{DMatrix, DVector};

use crate::energy::Energy;
use crate::error::{Error, Result};
use crate::framework::{
    add_edge_hessian, squared_length, write_edge_gradient, Edge, Framework, Pin,
};
use crate::linalg::{self, RightSvd};
use crate::Real;

/// Relative LICQ threshold used when an operation needs LICQ but takes no
/// explicit tolerance.
pub const DEFAULT_LICQ_TOL: f64 = 1e-10;
pub const DEFAULT_PROJECTION_TOL: f64 = 1e-12;
pub const DEFAULT_PROJECTION_MAX_ITER: usize = 25;

/// A smooth equality-constraint system `c: R^N -> R^c`.
pub trait ConstraintSystem<T: Real> {
    fn ambient_dim(&self) -> usize;
    fn count(&self) -> usize;
    fn values(&self, x: &DVector<T>) -> DVector<T>;
    fn jacobian(&self, x: &DVector<T>) -> DMatrix<T>;
    /// `Σ_i w_i ∇²c_i(x)`.
    fn weighted_hessian(&self, x: &DVector<T>, weights: &DVector<T>) -> DMatrix<T>;

    /// Dimension of the manifold when LICQ holds.
    fn tangent_dim(&self) -> usize {
        self.ambient_dim().saturating_sub(self.count())
    }
}

/// Fixed edge lengths (every edge but the free one) followed by affine pins.
#[derive(Clone, Debug)]
pub struct FrameworkConstraints<T: Real> {
    dim: usize,
    n_coords: usize,
    edges: Vec<Edge>,
    rest_sq: Vec<T>,
    pins: Vec<Pin<T>>,
}

impl<T: Real> FrameworkConstraints<T> {
    /// The saddle-search constraint set: free edge omitted.
    pub fn new(fw: &Framework<T>) -> Self {
        Self::with_pins(fw, fw.pins().to_vec())
    }

    /// Same edge constraints with an arbitrary (unvalidated) list of pins.
    pub fn with_pins(fw: &Framework<T>, pins: Vec<Pin<T>>) -> Self {
        let topo = fw.topology();
        let fixed: Vec<usize> = topo.fixed_edges().collect();
        Self {
            dim: fw.dim(),
            n_coords: fw.n_coords(),
            edges: fixed.iter().map(|&i| topo.edges()[i]).collect(),
            rest_sq: fixed
                .iter()
                .map(|&i| fw.rest_lengths()[i] * fw.rest_lengths()[i])
                .collect(),
            pins,
        }
    }

    /// Every edge (free edge included, at its current length) plus pins:
    /// the level set traced by flex continuation.
    pub fn all_edges(fw: &Framework<T>) -> Self {
        let topo = fw.topology();
        let x = fw.config().coords();
        Self {
            dim: fw.dim(),
            n_coords: fw.n_coords(),
            edges: topo.edges().to_vec(),
            rest_sq: topo
                .edges()
                .iter()
                .enumerate()
                .map(|(i, &e)| {
                    if i == topo.free_edge() {
                        squared_length(x, fw.dim(), e)
                    } else {
                        fw.rest_lengths()[i] * fw.rest_lengths()[i]
                    }
                })
                .collect(),
            pins: fw.pins().to_vec(),
        }
    }

    pub fn n_edge_constraints(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Largest absolute edge residual `|f_i(x)|` (pins excluded).
    pub fn max_edge_residual(&self, x: &DVector<T>) -> T {
        self.edges
            .iter()
            .zip(&self.rest_sq)
            .map(|(&e, &l2)| (squared_length(x, self.dim, e) - l2).abs())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// Largest `| |p_a - p_b| - l |` over the edges.
    pub fn max_length_error(&self, x: &DVector<T>) -> T {
        self.edges
            .iter()
            .zip(&self.rest_sq)
            .map(|(&e, &l2)| (squared_length(x, self.dim, e).sqrt() - l2.sqrt()).abs())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn max_pin_residual(&self, x: &DVector<T>) -> T {
        self.pins
            .iter()
            .map(|p| (x[p.coordinate(self.dim)] - p.value).abs())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }
}

impl<T: Real> ConstraintSystem<T> for FrameworkConstraints<T> {
    fn ambient_dim(&self) -> usize {
        self.n_coords
    }

    fn count(&self) -> usize {
        self.edges.len() + self.pins.len()
    }

    fn values(&self, x: &DVector<T>) -> DVector<T> {
        let mut c = DVector::zeros(self.count());
        for (i, (&e, &l2)) in self.edges.iter().zip(&self.rest_sq).enumerate() {
            c[i] = squared_length(x, self.dim, e) - l2;
        }
        let off = self.edges.len();
        for (j, p) in self.pins.iter().enumerate() {
            c[off + j] = x[p.coordinate(self.dim)] - p.value;
        }
        c
    }

    fn jacobian(&self, x: &DVector<T>) -> DMatrix<T> {
        let mut jac = DMatrix::zeros(self.count(), self.n_coords);
        let mut row = vec![T::zero(); self.n_coords];
        for (i, &e) in self.edges.iter().enumerate() {
            row.iter_mut().for_each(|v| *v = T::zero());
            write_edge_gradient(&mut row, x, self.dim, e);
            for (j, &v) in row.iter().enumerate() {
                jac[(i, j)] = v;
            }
        }
        let off = self.edges.len();
        for (j, p) in self.pins.iter().enumerate() {
            jac[(off + j, p.coordinate(self.dim))] = T::one();
        }
        jac
    }

    fn weighted_hessian(&self, _x: &DVector<T>, weights: &DVector<T>) -> DMatrix<T> {
        let mut h = DMatrix::zeros(self.n_coords, self.n_coords);
        for (i, &e) in self.edges.iter().enumerate() {
            add_edge_hessian(&mut h, e, self.dim, weights[i]);
        }
        h
    }
}

/// Affine constraints `A x - b = 0`.
#[derive(Clone, Debug)]
pub struct LinearConstraints<T: Real> {
    a: DMatrix<T>,
    b: DVector<T>,
}

impl<T: Real> LinearConstraints<T> {
    pub fn new(a: DMatrix<T>, b: DVector<T>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: b.len(),
            });
        }
        Ok(Self { a, b })
    }
}

impl<T: Real> ConstraintSystem<T> for LinearConstraints<T> {
    fn ambient_dim(&self) -> usize {
        self.a.ncols()
    }

    fn count(&self) -> usize {
        self.a.nrows()
    }

    fn values(&self, x: &DVector<T>) -> DVector<T> {
        &self.a * x - &self.b
    }

    fn jacobian(&self, _x: &DVector<T>) -> DMatrix<T> {
        self.a.clone()
    }

    fn weighted_hessian(&self, _x: &DVector<T>, _w: &DVector<T>) -> DMatrix<T> {
        DMatrix::zeros(self.a.ncols(), self.a.ncols())
    }
}

fn check_dim<T: Real, C: ConstraintSystem<T> + ?Sized>(cs: &C, x: &DVector<T>) -> Result<()> {
    if x.len() != cs.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: cs.ambient_dim(),
            got: x.len(),
        });
    }
    Ok(())
}

pub fn constraint_values<T: Real, C: ConstraintSystem<T> + ?Sized>(
    cs: &C,
    x: &DVector<T>,
) -> Result<DVector<T>> {
    check_dim(cs, x)?;
    Ok(cs.values(x))
}

pub fn constraint_jacobian<T: Real, C: ConstraintSystem<T> + ?Sized>(
    cs: &C,
    x: &DVector<T>,
) -> Result<DMatrix<T>> {
    check_dim(cs, x)?;
    Ok(cs.jacobian(x))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Licq<T> {
    pub holds: bool,
    /// Smallest singular value of the constraint Jacobian.
    pub margin: T,
    pub largest: T,
}

/// LICQ holds iff `σ_min(∇c) > tol · σ_max(∇c)`.
pub fn licq_check<T: Real, C: ConstraintSystem<T> + ?Sized>(
    cs: &C,
    x: &DVector<T>,
    tol: T,
) -> Result<Licq<T>> {
    check_dim(cs, x)?;
    let jac = cs.jacobian(x);
    Ok(licq_from_singular(
        &linalg::singular_values(&jac),
        cs.count(),
        cs.ambient_dim(),
        tol,
    ))
}

fn licq_from_singular<T: Real>(s: &[T], count: usize, ambient: usize, tol: T) -> Licq<T> {
    let largest = s.first().copied().unwrap_or_else(T::zero);
    if count == 0 {
        return Licq {
            holds: true,
            margin: T::zero(),
            largest,
        };
    }
    // more constraints than unknowns: some singular value is structurally zero
    let margin = if count > ambient {
        T::zero()
    } else {
        s.get(count - 1).copied().unwrap_or_else(T::zero)
    };
    Licq {
        holds: margin > tol * largest && largest > T::zero(),
        margin,
        largest,
    }
}

/// Orthonormal tangent/normal bases at a point.
#[derive(Clone, Debug)]
pub struct TangentFrame<T: Real> {
    pub point: DVector<T>,
    /// `N × t`, spans `null ∇c(x)`.
    pub tangent: DMatrix<T>,
    /// `N × c`, spans the row space of `∇c(x)`.
    pub normal: DMatrix<T>,
    pub licq_margin: T,
}

impl<T: Real> TangentFrame<T> {
    pub fn project(&self, v: &DVector<T>) -> DVector<T> {
        &self.tangent * (self.tangent.transpose() * v)
    }

    pub fn projector(&self) -> DMatrix<T> {
        &self.tangent * self.tangent.transpose()
    }
}

pub fn tangent_frame<T: Real, C: ConstraintSystem<T> + ?Sized>(
    cs: &C,
    x: &DVector<T>,
    licq_tol: T,
) -> Result<TangentFrame<T>> {
    check_dim(cs, x)?;
    let jac = cs.jacobian(x);
    let svd = RightSvd::new(&jac);
    let count = cs.count();
    let licq = licq_from_singular(&svd.singular, count, cs.ambient_dim(), licq_tol);
    if !licq.holds {
        return Err(Error::LicqFailure {
            margin: licq.margin.as_f64(),
            largest: licq.largest.as_f64(),
        });
    }
    let n = cs.ambient_dim();
    Ok(TangentFrame {
        point: x.clone(),
        tangent: svd.v.columns(count, n - count).into_owned(),
        normal: svd.v.columns(0, count).into_owned(),
        licq_margin: licq.margin,
    })
}

/// `P_T = I - ∇cᵀ(∇c ∇cᵀ)⁻¹∇c`, assembled from an orthonormal normal basis.
pub fn tangent_projector<T: Real, C: ConstraintSystem<T> + ?Sized>(
    cs: &C,
    x: &DVector<T>,
) -> Result<DMatrix<T>> {
    let frame = tangent_frame(cs, x, T::lit(DEFAULT_LICQ_TOL))?;
    let n = cs.ambient_dim();
    Ok(DMatrix::identity(n, n) - &frame.normal * frame.normal.transpose())
}

/// Least-squares `η` with `∇E ≈ ∇cᵀ η`; exact at critical points.
pub fn lagrange_multipliers<T, C, E>(cs: &C, x: &DVector<T>, energy: &E) -> Result<DVector<T>>
where
    T: Real,
    C: ConstraintSystem<T> + ?Sized,
    E: Energy<T> + ?Sized,
{
    let licq = licq_check(cs, x, T::lit(DEFAULT_LICQ_TOL))?;
    if !licq.holds {
        return Err(Error::LicqFailure {
            margin: licq.margin.as_f64(),
            largest: licq.largest.as_f64(),
        });
    }
    Ok(multipliers_unchecked(cs, x, energy))
}

fn multipliers_unchecked<T, C, E>(cs: &C, x: &DVector<T>, energy: &E) -> DVector<T>
where
    T: Real,
    C: ConstraintSystem<T> + ?Sized,
    E: Energy<T> + ?Sized,
{
    let jt = cs.jacobian(x).transpose();
    linalg::min_norm_solve(&jt, &energy.gradient(x), T::machine_eps())
}

/// `‖∇E - ∇cᵀ η‖` with least-squares multipliers.
pub fn kkt_residual<T, C, E>(cs: &C, x: &DVector<T>, energy: &E) -> Result<T>
where
    T: Real,
    C: ConstraintSystem<T> + ?Sized,
    E: Energy<T> + ?Sized,
{
    let eta = lagrange_multipliers(cs, x, energy)?;
    Ok((energy.gradient(x) - cs.jacobian(x).transpose() * eta).norm())
}

/// `P_T (∇²E - Σ η_i ∇²c_i) P_T`, symmetrized.
pub fn projected_hessian<T, C, E>(cs: &C, x: &DVector<T>, energy: &E) -> Result<DMatrix<T>>
where
    T: Real,
    C: ConstraintSystem<T> + ?Sized,
    E: Energy<T> + ?Sized,
{
    let frame = tangent_frame(cs, x, T::lit(DEFAULT_LICQ_TOL))?;
    Ok(projected_hessian_in(cs, &frame, energy))
}

pub(crate) fn projected_hessian_in<T, C, E>(
    cs: &C,
    frame: &TangentFrame<T>,
    energy: &E,
) -> DMatrix<T>
where
    T: Real,
    C: ConstraintSystem<T> + ?Sized,
    E: Energy<T> + ?Sized,
{
    let x = &frame.point;
    let eta = multipliers_unchecked(cs, x, energy);
    let lagrangian = energy.hessian(x) - cs.weighted_hessian(x, &eta);
    let p = frame.projector();
    linalg::symmetrize(&(&p * lagrangian * &p))
}

/// Tangent-restricted Hessian `Tᵀ Ĥ T` (size `t × t`).
pub(crate) fn restricted_hessian<T, C, E>(cs: &C, frame: &TangentFrame<T>, energy: &E) -> DMatrix<T>
where
    T: Real,
    C: ConstraintSystem<T> + ?Sized,
    E: Energy<T> + ?Sized,
{
    let h = projected_hessian_in(cs, frame, energy);
    linalg::symmetrize(&(frame.tangent.transpose() * h * &frame.tangent))
}

#[derive(Clone, Debug)]
pub struct Projection<T: Real> {
    pub x: DVector<T>,
    pub alpha: DVector<T>,
    pub iterations: usize,
    pub residual: T,
}

/// Newton projection `x = x̃ + ∇c(x_base)ᵀ α` onto `c(x) = 0`.
///
/// The correction stays in the row space of the Jacobian at `x_base`; `α`
/// solves `h(α) = c(x̃ + ∇c(x_base)ᵀ α) = 0` with Jacobian
/// `∇c(x) ∇c(x_base)ᵀ`. Succeeds once `‖c(x)‖_∞ < tol`.
pub fn newton_project<T: Real, C: ConstraintSystem<T> + ?Sized>(
    cs: &C,
    x_tilde: &DVector<T>,
    x_base: &DVector<T>,
    tol: T,
    max_iter: usize,
) -> Result<Projection<T>> {
    check_dim(cs, x_tilde)?;
    check_dim(cs, x_base)?;
    let jb_t = cs.jacobian(x_base).transpose();
    let mut alpha = DVector::zeros(cs.count());
    let mut x = x_tilde.clone();
    let mut residual = linalg::inf_norm(&cs.values(&x));
    for it in 0..=max_iter {
        if residual < tol {
            return Ok(Projection {
                x,
                alpha,
                iterations: it,
                residual,
            });
        }
        if it == max_iter {
            break;
        }
        let r = cs.values(&x);
        let reduced = cs.jacobian(&x) * &jb_t;
        let Some(delta) = reduced.lu().solve(&(-r)) else {
            return Err(Error::ProjectionFailed {
                iterations: it,
                residual: residual.as_f64(),
            });
        };
        alpha += delta;
        x = x_tilde + &jb_t * &alpha;
        residual = linalg::inf_norm(&cs.values(&x));
        if !residual.is_finite() {
            return Err(Error::ProjectionFailed {
                iterations: it + 1,
                residual: f64::INFINITY,
            });
        }
    }
    Err(Error::ProjectionFailed {
        iterations: max_iter,
        residual: residual.as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::FreeEdgeEnergy;
    use crate::framework::{Configuration, Topology};

    fn four_bar_generic() -> Framework<f64> {
        // A B C D with edges CD (free), AB, BC, DA
        let topo = Topology::new(
            4,
            vec![
                Edge::new(2, 3),
                Edge::new(0, 1),
                Edge::new(1, 2),
                Edge::new(3, 0),
            ],
            0,
        )
        .unwrap();
        let a: f64 = 0.35;
        let b: f64 = 0.2;
        let verts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0 + 2.0 * b.cos(), 2.0 * b.sin()],
            vec![2.0 * a.cos(), 2.0 * a.sin()],
        ];
        let config = Configuration::from_vertices(2, &verts).unwrap();
        let pins = vec![
            Pin::new(0, 0, 0.0),
            Pin::new(0, 1, 0.0),
            Pin::new(1, 1, 0.0),
        ];
        Framework::new(topo, config, None, pins).unwrap()
    }

    #[test]
    fn start_is_on_manifold() {
        let fw = four_bar_generic();
        let cs = FrameworkConstraints::new(&fw);
        let c = constraint_values(&cs, fw.config().coords()).unwrap();
        assert_eq!(c.len(), 6);
        assert!(c.amax() < 1e-14);
    }

    #[test]
    fn pin_residual_is_affine() {
        let fw = four_bar_generic();
        let cs = FrameworkConstraints::new(&fw);
        let mut x = fw.config().coords().clone();
        x[1] += 0.3; // y of A
        let c = cs.values(&x);
        assert!((c[4] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn stretching_along_edge_matches_expansion() {
        let fw = four_bar_generic();
        let cs = FrameworkConstraints::new(&fw);
        let mut x = fw.config().coords().clone();
        let delta = 1e-3;
        x[2] += delta; // B moves along AB
        let c = cs.values(&x);
        assert!((c[0] - (2.0 * delta + delta * delta)).abs() < 1e-15);
    }

    #[test]
    fn pin_rows_and_rank() {
        let fw = four_bar_generic();
        let cs = FrameworkConstraints::new(&fw);
        let jac = constraint_jacobian(&cs, fw.config().coords()).unwrap();
        assert_eq!(
            jac.row(4).iter().copied().collect::<Vec<_>>(),
            vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(RightSvd::new(&jac).rank(1e-10), 6);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let fw = four_bar_generic();
        let cs = FrameworkConstraints::new(&fw);
        let x = DVector::zeros(5);
        assert!(matches!(
            constraint_values(&cs, &x),
            Err(Error::DimensionMismatch {
                expected: 8,
                got: 5
            })
        ));
    }

    #[test]
    fn duplicate_pin_breaks_licq() {
        let fw = four_bar_generic();
        let pins = vec![
            Pin::new(0, 0, 0.0),
            Pin::new(0, 0, 0.0),
            Pin::new(1, 1, 0.0),
        ];
        let cs = FrameworkConstraints::with_pins(&fw, pins);
        let licq = licq_check(&cs, fw.config().coords(), 1e-8).unwrap();
        assert!(!licq.holds);
        assert!(matches!(
            tangent_projector(&cs, fw.config().coords()),
            Err(Error::LicqFailure { .. })
        ));
    }

    #[test]
    fn zero_length_edge_breaks_licq() {
        let topo = Topology::new(
            4,
            vec![
                Edge::new(2, 3),
                Edge::new(0, 1),
                Edge::new(1, 2),
                Edge::new(3, 0),
            ],
            0,
        )
        .unwrap();
        // C coincides with B: edge BC has zero length at this point
        let verts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.5],
        ];
        let config = Configuration::from_vertices(2, &verts).unwrap();
        let pins = vec![
            Pin::new(0, 0, 0.0),
            Pin::new(0, 1, 0.0),
            Pin::new(1, 1, 0.0),
        ];
        let fw = Framework::new(topo, config, Some(vec![1.0, 1.0, 2.0, 1.5]), pins).unwrap();
        let cs = FrameworkConstraints::new(&fw);
        assert!(!licq_check(&cs, fw.config().coords(), 1e-8).unwrap().holds);
        assert_eq!(fw.degenerate_edges(), vec![2]);
    }

    #[test]
    fn projector_identities() {
        let fw = four_bar_generic();
        let cs = FrameworkConstraints::new(&fw);
        let x = fw.config().coords();
        let p = tangent_projector(&cs, x).unwrap();
        assert!((&p * &p - &p).amax() < 1e-10);
        assert!((&p - p.transpose()).amax() < 1e-10);
        assert!((cs.jacobian(x) * &p).amax() < 1e-10);
        assert!((p.trace() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn multipliers_vanish_for_zero_gradient() {
        let fw = four_bar_generic();
        let cs = FrameworkConstraints::new(&fw);
        let mut x = fw.config().coords().clone();
        // put D onto C so the free edge has zero length (not on manifold; fine)
        x[6] = x[4];
        x[7] = x[5];
        let eta = lagrange_multipliers(&cs, &x, &FreeEdgeEnergy::for_framework(&fw)).unwrap();
        assert!(eta.amax() < 1e-14);
    }

    #[test]
    fn multipliers_recover_a_constraint() {
        let fw = four_bar_generic();
        let cs = FrameworkConstraints::new(&fw);
        let x = fw.config().coords();
        // energy = |A - B|^2, whose gradient equals the first constraint row
        let e = FreeEdgeEnergy::new(Edge::new(0, 1), 2, 8);
        let eta = lagrange_multipliers(&cs, x, &e).unwrap();
        let mut expected = DVector::zeros(6);
        expected[0] = 1.0;
        assert!((eta - expected).amax() < 1e-12);
    }

    #[test]
    fn projected_hessian_kills_normals() {
        let fw = four_bar_generic();
        let cs = FrameworkConstraints::new(&fw);
        let x = fw.config().coords();
        let e = FreeEdgeEnergy::for_framework(&fw);
        let h = projected_hessian(&cs, x, &e).unwrap();
        assert!((&h - h.transpose()).amax() < 1e-12);
        let jac = cs.jacobian(x);
        for i in 0..jac.nrows() {
            let n = jac.row(i).transpose();
            assert!((&h * n).norm() < 1e-10);
        }
    }

    #[test]
    fn newton_projection_on_a_circle() {
        // one vertex, constraint |p|^2 - 1 = 0
        let cs = Circle;
        let x = DVector::from_vec(vec![1.1, 0.0]);
        let base = DVector::from_vec(vec![1.0, 0.0]);
        let proj = newton_project(&cs, &x, &base, 1e-12, 25).unwrap();
        assert!((proj.x[0] - 1.0).abs() < 1e-10 && proj.x[1].abs() < 1e-15);

        let on = newton_project(&cs, &base, &base, 1e-12, 25).unwrap();
        assert_eq!(on.iterations, 0);
        assert_eq!(on.alpha[0], 0.0);
        assert_eq!(on.x, base);
    }

    #[test]
    fn newton_projection_failure_is_reported() {
        let cs = Circle;
        // base at the origin: zero Jacobian, the reduced system is singular
        let x = DVector::from_vec(vec![0.5, 0.0]);
        let base = DVector::from_vec(vec![0.0, 0.0]);
        assert!(matches!(
            newton_project(&cs, &x, &base, 1e-12, 25),
            Err(Error::ProjectionFailed { .. })
        ));
        let far = DVector::from_vec(vec![0.5, 0.0]);
        assert!(matches!(
            newton_project(&cs, &far, &DVector::from_vec(vec![1.0, 0.0]), 1e-12, 0),
            Err(Error::ProjectionFailed { iterations: 0, .. })
        ));
    }

    struct Circle;

    impl ConstraintSystem<f64> for Circle {
        fn ambient_dim(&self) -> usize {
            2
        }
        fn count(&self) -> usize {
            1
        }
        fn values(&self, x: &DVector<f64>) -> DVector<f64> {
            DVector::from_vec(vec![x.norm_squared() - 1.0])
        }
        fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::from_row_slice(1, 2, &[2.0 * x[0], 2.0 * x[1]])
        }
        fn weighted_hessian(&self, _x: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::identity(2, 2) * (2.0 * w[0])
        }
    }
}
