//! Certification of converged saddles and the second-order stress test.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::energy::{Energy, FreeEdgeEnergy};
use crate::framework::{add_edge_hessian, rigid_motion_count, Framework};
use crate::linalg::{self, RightSvd};
use crate::manifold::{self, ConstraintSystem, FrameworkConstraints, TangentFrame};
use crate::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyConfig<T> {
    /// Relative singular-value threshold for ranks and null spaces.
    pub rank_tol: T,
    /// Relative threshold for LICQ (`σ_min > licq_tol · σ_max`).
    pub licq_tol: T,
    /// Eigenvalues with `|λ| ≤ degeneracy_tol · ρ(Ĥ)` count as zero.
    pub degeneracy_tol: T,
    /// Largest KKT residual accepted for the "certified" label.
    pub kkt_tol: T,
    /// Relative tolerance for a stress quadratic form to vanish on a ray.
    pub stress_tol: T,
}

impl<T: Real> Default for CertifyConfig<T> {
    fn default() -> Self {
        Self {
            rank_tol: T::lit(linalg::DEFAULT_RANK_TOL),
            licq_tol: T::lit(1e-8),
            degeneracy_tol: T::lit(1e-7),
            kkt_tol: T::lit(1e-6),
            stress_tol: T::lit(1e-8),
        }
    }
}

/// Orthonormal self-stresses, one per row (`count × m`, free edge included).
#[derive(Clone, Debug)]
pub struct SelfStressBasis<T: Real> {
    pub rows: DMatrix<T>,
}

impl<T: Real> SelfStressBasis<T> {
    pub fn count(&self) -> usize {
        self.rows.nrows()
    }

    pub fn stress(&self, i: usize) -> DVector<T> {
        self.rows.row(i).transpose()
    }
}

/// Left null space of the rigidity matrix.
pub fn self_stresses<T: Real>(fw: &Framework<T>, rank_tol: T) -> SelfStressBasis<T> {
    let r = fw.rigidity_matrix();
    let null = RightSvd::new(&r.transpose()).null_space(rank_tol);
    SelfStressBasis {
        rows: null.transpose(),
    }
}

#[derive(Clone, Debug)]
pub struct StressTestOutcome<T: Real> {
    /// `Vᵀ (Σ_i ω_i ∇²f_i) V`, one `s × s` form per stress.
    pub forms: Vec<DMatrix<T>>,
    /// Realizable rays in flex-coefficient space (unit, first significant
    /// entry positive).
    pub directions: Vec<DVector<T>>,
    /// The same rays in `R^{nd}`, `V a`.
    pub ambient: Vec<DVector<T>>,
    /// False when the common zero set was not computed (three or more flex
    /// dimensions); `forms` are still reported.
    pub solved: bool,
}

/// Second-order stress test: finds the rays `a` with `aᵀ Q_ω a = 0` for
/// every self-stress `ω`, where
/// `aᵀ Q_ω a = Σ_i ω_i · 2 |v_{i,1} - v_{i,2}|²` for `v = V a`.
///
/// Solved in closed form for one and two flex dimensions. With no
/// self-stress every ray passes, which is reported as unsolved for `s ≥ 2`.
pub fn stress_test<T: Real>(
    fw: &Framework<T>,
    flex_basis: &DMatrix<T>,
    stresses: &SelfStressBasis<T>,
    tol: T,
) -> StressTestOutcome<T> {
    let s = flex_basis.ncols();
    let dim = fw.dim();
    let n = fw.n_coords();
    let mut forms = Vec::with_capacity(stresses.count());
    let mut scales = Vec::with_capacity(stresses.count());
    for k in 0..stresses.count() {
        let omega = stresses.stress(k);
        let mut h = DMatrix::zeros(n, n);
        for (i, &e) in fw.topology().edges().iter().enumerate() {
            add_edge_hessian(&mut h, e, dim, omega[i]);
        }
        scales.push(h.norm());
        forms.push(linalg::symmetrize(
            &(flex_basis.transpose() * h * flex_basis),
        ));
    }
    // a form is "zero" relative to the stress Hessian it came from
    let significant = |q: &DMatrix<T>, scale: T| q.norm() > tol * scale;

    let mut solved = true;
    let candidates: Vec<DVector<T>> = match s {
        0 => Vec::new(),
        1 => vec![DVector::from_element(1, T::one())],
        2 => match forms
            .iter()
            .zip(&scales)
            .find(|(q, &sc)| significant(q, sc))
        {
            Some((q, _)) => binary_quadratic_rays(q, tol),
            // no stress, or every form vanishes: the whole plane passes
            None => {
                solved = false;
                Vec::new()
            }
        },
        _ => {
            solved = false;
            Vec::new()
        }
    };
    let mut directions: Vec<DVector<T>> = candidates
        .into_iter()
        .filter(|a| {
            forms
                .iter()
                .zip(&scales)
                .all(|(q, &sc)| a.dot(&(q * a)).abs() <= tol * sc)
        })
        .collect();
    directions.sort_by(|a, b| {
        let ang = |v: &DVector<T>| {
            if v.len() == 2 {
                v[1].atan2(v[0])
            } else {
                T::zero()
            }
        };
        ang(a)
            .partial_cmp(&ang(b))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let ambient = directions.iter().map(|a| flex_basis * a).collect();
    StressTestOutcome {
        forms,
        directions,
        ambient,
        solved,
    }
}

/// Real zero rays of the binary quadratic form `aᵀ Q a`.
///
/// With `Q = λ₁ e₁e₁ᵀ + λ₂ e₂e₂ᵀ`, `λ₁ < 0 < λ₂`, the rays are
/// `√λ₂ e₁ ± √(-λ₁) e₂`; a semidefinite form has the single ray along its
/// null eigenvector and a definite form has none.
pub fn binary_quadratic_rays<T: Real>(q: &DMatrix<T>, tol: T) -> Vec<DVector<T>> {
    let (vals, vecs) = linalg::symmetric_eigen(q);
    let (l1, l2) = (vals[0], vals[1]);
    let e1 = vecs.column(0).into_owned();
    let e2 = vecs.column(1).into_owned();
    let scale = l1.abs().max(l2.abs());
    if scale == T::zero() {
        return Vec::new();
    }
    let zero = tol * scale;
    let rays = if l1 < -zero && l2 > zero {
        let (a, b) = (l2.sqrt(), (-l1).sqrt());
        vec![&e1 * a + &e2 * b, &e1 * a - &e2 * b]
    } else if l1.abs() <= zero && l2.abs() > zero {
        vec![e1]
    } else if l2.abs() <= zero && l1.abs() > zero {
        vec![e2]
    } else {
        Vec::new()
    };
    rays.into_iter().map(canonical_ray).collect()
}

/// Unit vector with its first significant entry positive.
pub fn canonical_ray<T: Real>(v: DVector<T>) -> DVector<T> {
    let n = v.norm();
    let mut u = v / n;
    let cut = T::lit(1e-12);
    if let Some(first) = u.iter().find(|c| c.abs() > cut).copied() {
        if first < T::zero() {
            u = -u;
        }
    }
    u
}

/// Adds the trivial motion that makes `u` satisfy the (linearized) pins,
/// then normalizes: the representative of the flex `u` that is tangent to
/// the pinned level set.
pub fn pin_gauge<T: Real>(fw: &Framework<T>, u: &DVector<T>) -> DVector<T> {
    let dim = fw.dim();
    let trivial = fw.rigid_body_basis().basis;
    let pins = fw.pins();
    let mut g = DMatrix::zeros(pins.len(), trivial.ncols());
    let mut rhs = DVector::zeros(pins.len());
    for (r, p) in pins.iter().enumerate() {
        let c = p.coordinate(dim);
        for j in 0..trivial.ncols() {
            g[(r, j)] = trivial[(c, j)];
        }
        rhs[r] = -u[c];
    }
    let coeffs = linalg::min_norm_solve(&g, &rhs, T::lit(1e-12));
    let w = u + trivial * coeffs;
    let n = w.norm();
    if n > T::zero() {
        w / n
    } else {
        w
    }
}

#[derive(Clone, Debug)]
pub struct SingularityCertificate<T: Real> {
    pub kkt_residual: T,
    /// Smallest singular value of the constraint Jacobian.
    pub licq_margin: T,
    pub licq_ok: bool,
    pub tangent_dim: usize,
    /// Spectrum of the tangent-restricted projected Hessian, ascending.
    pub eigenvalues: Vec<T>,
    pub index: usize,
    pub positive: usize,
    pub near_zero: usize,
    pub degenerate: bool,
    /// Largest `‖Ĥ n‖` over unit normal vectors `n`.
    pub normal_residual: T,
    pub rigidity_rank: usize,
    pub nontrivial_flex_dim: usize,
    pub self_stress_dim: usize,
    pub realizable_directions: Vec<DVector<T>>,
    /// Realizable flexes in `R^{nd}`, made tangent to the pinned level set.
    pub realizable_ambient: Vec<DVector<T>>,
    pub stress_forms: Vec<DMatrix<T>>,
    pub stress_test_solved: bool,
    pub flex_basis: DMatrix<T>,
    pub self_stresses: DMatrix<T>,
    pub degenerate_edges: Vec<usize>,
    /// All hypotheses hold and the rigidity matrix is rank deficient:
    /// the framework is certified singular and flexible.
    pub certified: bool,
}

/// Assembles every certificate field at the framework's configuration.
/// Never fails: a LICQ breakdown is reported through `licq_ok`.
pub fn certify<T: Real>(fw: &Framework<T>, cfg: &CertifyConfig<T>) -> SingularityCertificate<T> {
    let cs = FrameworkConstraints::new(fw);
    let energy = FreeEdgeEnergy::for_framework(fw);
    let x = fw.config().coords();
    let n = fw.n_coords();

    let jac = cs.jacobian(x);
    let jsvd = RightSvd::new(&jac);
    let count = cs.count();
    let largest = jsvd.largest();
    let licq_margin = if count <= n && count > 0 {
        jsvd.singular[count - 1]
    } else {
        T::zero()
    };
    let licq_ok = count <= n && largest > T::zero() && licq_margin > cfg.licq_tol * largest;

    // with LICQ failing the frame is built from the numerical rank instead
    let normal_rank = if licq_ok {
        count
    } else {
        jsvd.rank(cfg.rank_tol)
    };
    let frame = TangentFrame {
        point: x.clone(),
        tangent: jsvd.v.columns(normal_rank, n - normal_rank).into_owned(),
        normal: jsvd.v.columns(0, normal_rank).into_owned(),
        licq_margin,
    };
    let grad = energy.gradient(x);
    let kkt_residual = frame.project(&grad).norm();

    let h = manifold::projected_hessian_in(&cs, &frame, &energy);
    let restricted = linalg::symmetrize(&(frame.tangent.transpose() * &h * &frame.tangent));
    let (eigenvalues, _) = linalg::symmetric_eigen(&restricted);
    let radius = eigenvalues
        .iter()
        .fold(T::zero(), |a, &b| if b.abs() > a { b.abs() } else { a });
    let zero = cfg.degeneracy_tol * radius;
    let index = eigenvalues.iter().filter(|&&l| l < -zero).count();
    let positive = eigenvalues.iter().filter(|&&l| l > zero).count();
    let near_zero = eigenvalues.len() - index - positive;
    let normal_residual = (0..frame.normal.ncols())
        .map(|j| (&h * frame.normal.column(j)).norm())
        .fold(T::zero(), |a, b| if b > a { b } else { a });

    let rigidity_rank = fw.rigidity_rank(cfg.rank_tol);
    let flex_basis = fw.nontrivial_flex_basis(cfg.rank_tol);
    let stresses = self_stresses(fw, cfg.rank_tol);
    let outcome = stress_test(fw, &flex_basis, &stresses, cfg.stress_tol);
    let realizable_ambient = outcome.ambient.iter().map(|u| pin_gauge(fw, u)).collect();

    let tangent_dim = frame.tangent.ncols();
    let generic_flex = n.saturating_sub(fw.n_edges() + rigid_motion_count(fw.dim()));
    let certified = licq_ok
        && near_zero == 0
        && index > 0
        && index < tangent_dim
        && kkt_residual <= cfg.kkt_tol
        && rigidity_rank < fw.n_edges()
        && flex_basis.ncols() > generic_flex
        && !outcome.directions.is_empty();

    SingularityCertificate {
        kkt_residual,
        licq_margin,
        licq_ok,
        tangent_dim,
        eigenvalues,
        index,
        positive,
        near_zero,
        degenerate: near_zero > 0,
        normal_residual,
        rigidity_rank,
        nontrivial_flex_dim: flex_basis.ncols(),
        self_stress_dim: stresses.count(),
        realizable_directions: outcome.directions,
        realizable_ambient,
        stress_forms: outcome.forms,
        stress_test_solved: outcome.solved,
        flex_basis,
        self_stresses: stresses.rows,
        degenerate_edges: fw.degenerate_edges(),
        certified,
    }
}
