//! Predictor–corrector tracing of nonlinear flexes out of a singular
//! configuration.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::{squared_length, Edge, Framework};
use crate::linalg::{self, RightSvd};
use crate::manifold::{ConstraintSystem, FrameworkConstraints};
use crate::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuationConfig<T> {
    pub arc_step: T,
    pub n_steps: usize,
    /// Largest accepted `| |p_a - p_b| - l |` on a path point.
    pub path_tol: T,
    pub max_halvings: usize,
    pub corrector_max_iter: usize,
    /// A corrected point must lie within `max_correction_ratio · h` of its
    /// prediction; larger corrections mean the predictor left the branch.
    pub max_correction_ratio: T,
}

impl<T: Real> Default for ContinuationConfig<T> {
    fn default() -> Self {
        Self {
            arc_step: T::lit(1e-2),
            n_steps: 50,
            path_tol: T::lit(1e-8),
            max_halvings: 5,
            corrector_max_iter: 20,
            max_correction_ratio: T::lit(0.05),
        }
    }
}

impl<T: Real> ContinuationConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.arc_step > T::zero()) {
            return Err(Error::InvalidConfig("arc_step must be positive".into()));
        }
        if !(self.path_tol > T::zero()) {
            return Err(Error::InvalidConfig("path_tol must be positive".into()));
        }
        if !(self.max_correction_ratio > T::zero()) {
            return Err(Error::InvalidConfig(
                "max_correction_ratio must be positive".into(),
            ));
        }
        if self.corrector_max_iter == 0 {
            return Err(Error::InvalidConfig(
                "corrector_max_iter must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FlexPath<T: Real> {
    /// Coordinates along the branch; `steps[0]` is the start point.
    pub steps: Vec<DVector<T>>,
    /// Cumulative chord length at each step.
    pub arc: Vec<T>,
    /// Largest edge-length error at each step.
    pub residuals: Vec<T>,
    pub arc_step: T,
    pub direction_sign: i32,
    pub dim: usize,
    pub free_edge: Edge,
    /// False when the corrector gave up before `n_steps`.
    pub completed: bool,
    pub failure: Option<String>,
}

impl<T: Real> FlexPath<T> {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn max_residual(&self) -> T {
        self.residuals
            .iter()
            .fold(T::zero(), |a, &b| if b > a { b } else { a })
    }
}

struct Corrected<T: Real> {
    x: DVector<T>,
    correction: T,
}

/// Follows the branch of the full level set (every edge at its current
/// length, pins held) leaving `fw`'s configuration along `sign · u`.
///
/// `u` is an ambient velocity; it is projected onto the null space of the
/// full Jacobian before use, so a flex that moves pinned coordinates should
/// be gauge-fixed first. The first step is a pure prediction from the start
/// point; every step's prediction is then corrected by minimum-norm
/// Gauss–Newton iterations orthogonal to the current tangent.
pub fn follow_branch<T: Real>(
    fw: &Framework<T>,
    u: &DVector<T>,
    sign: i32,
    cfg: &ContinuationConfig<T>,
) -> Result<FlexPath<T>> {
    cfg.validate()?;
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidConfig(format!(
            "direction sign must be +1 or -1, got {sign}"
        )));
    }
    let n = fw.n_coords();
    if u.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u.len(),
        });
    }
    let cs = FrameworkConstraints::all_edges(fw);
    let x0 = fw.config().coords().clone();
    let topo = fw.topology();
    let mut path = FlexPath {
        steps: vec![x0.clone()],
        arc: vec![T::zero()],
        residuals: vec![cs.max_length_error(&x0)],
        arc_step: cfg.arc_step,
        direction_sign: sign,
        dim: fw.dim(),
        free_edge: topo.edges()[topo.free_edge()],
        completed: true,
        failure: None,
    };
    if cfg.n_steps == 0 {
        return Ok(path);
    }

    let signed = if sign < 0 { -u } else { u.clone() };
    let mut tangent = match nearest_null_direction(&cs, &x0, &signed) {
        Some(t) => t,
        None => {
            path.completed = false;
            path.failure = Some("direction has no component tangent to the level set".into());
            return Ok(path);
        }
    };

    let mut x = x0;
    let mut arc = T::zero();
    for step in 0..cfg.n_steps {
        let mut h = cfg.arc_step;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let predicted = &x + &tangent * h;
            if let Some(c) = correct(&cs, &predicted, &tangent, cfg) {
                if c.correction <= cfg.max_correction_ratio * h {
                    accepted = Some(c.x);
                    break;
                }
            }
            h *= T::lit(0.5);
        }
        let next = match accepted {
            Some(next) => next,
            None => {
                path.completed = false;
                path.failure = Some(format!(
                    "corrector failed at step {} after {} halvings",
                    step + 1,
                    cfg.max_halvings
                ));
                break;
            }
        };
        let residual = cs.max_length_error(&next);
        if !(residual < cfg.path_tol) {
            path.completed = false;
            path.failure = Some(format!(
                "edge residual {:e} exceeds path tolerance at step {}",
                residual.as_f64(),
                step + 1
            ));
            break;
        }
        arc += (&next - &x).norm();
        tangent = match nearest_null_direction(&cs, &next, &tangent) {
            Some(t) => t,
            None => {
                path.completed = false;
                path.failure = Some(format!("lost the tangent at step {}", step + 1));
                break;
            }
        };
        path.steps.push(next.clone());
        path.arc.push(arc);
        path.residuals.push(residual);
        x = next;
    }
    Ok(path)
}

/// Gauss–Newton on `c(x) = 0` restricted to `tᵀ Δ = 0`, minimum-norm steps.
fn correct<T: Real>(
    cs: &FrameworkConstraints<T>,
    predicted: &DVector<T>,
    tangent: &DVector<T>,
    cfg: &ContinuationConfig<T>,
) -> Option<Corrected<T>> {
    let n = predicted.len();
    let rows = cs.count() + 1;
    // tighter than the acceptance tolerance so the reported residual has room
    let stop = cfg.path_tol * T::lit(1e-3);
    let mut x = predicted.clone();
    for _ in 0..cfg.corrector_max_iter {
        let c = cs.values(&x);
        if !c.iter().all(|v| v.is_finite()) {
            return None;
        }
        if cs.max_length_error(&x) < stop && cs.max_pin_residual(&x) < stop {
            let correction = (&x - predicted).norm();
            return Some(Corrected { x, correction });
        }
        let jac = cs.jacobian(&x);
        let mut a = DMatrix::zeros(rows, n);
        a.view_mut((0, 0), (rows - 1, n)).copy_from(&jac);
        a.row_mut(rows - 1).copy_from(&tangent.transpose());
        let mut rhs = DVector::zeros(rows);
        rhs.rows_mut(0, rows - 1).copy_from(&(-c));
        let delta = linalg::min_norm_solve(&a, &rhs, T::lit(1e-12));
        x += delta;
    }
    None
}

/// Unit vector in the (generic-dimension) null space of the Jacobian at `x`
/// closest to `reference`.
fn nearest_null_direction<T: Real>(
    cs: &FrameworkConstraints<T>,
    x: &DVector<T>,
    reference: &DVector<T>,
) -> Option<DVector<T>> {
    let n = cs.ambient_dim();
    let jac = cs.jacobian(x);
    let svd = RightSvd::new(&jac);
    // at the singular start the numerical null space is larger; use it all
    let rank = svd.rank(T::lit(linalg::DEFAULT_RANK_TOL));
    let generic = n.saturating_sub(cs.count()).max(1);
    let dim = (n - rank).max(generic).min(n);
    let basis = svd.v.columns(n - dim, dim);
    let t = basis * (basis.transpose() * reference);
    let norm = t.norm();
    if norm > T::lit(1e-10) * reference.norm() && norm > T::zero() {
        Some(t / norm)
    } else {
        None
    }
}

/// Free-edge length along a path, keyed by arc position.
pub fn reparameterize_free_edge<T: Real>(path: &FlexPath<T>) -> Vec<(T, T)> {
    path.steps
        .iter()
        .zip(&path.arc)
        .map(|(x, &s)| (s, squared_length(x, path.dim, path.free_edge).sqrt()))
        .collect()
}
