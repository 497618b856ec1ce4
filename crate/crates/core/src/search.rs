//! Index-k saddle search on a constraint manifold.
//!
//! Each iteration:
//! 1. reflected projected-gradient step
//!    `x̃ = x - h (I - 2 Σ v_i v_iᵀ) P_T(x) ∇E(x)`,
//! 2. Newton projection back onto `c(x) = 0` with the correction in the row
//!    space of `∇c(x)` (halving `h` on failure),
//! 3. deflated eigenvector update
//!    `v_i ← P_T(x')(v_i - β (I - v_i v_iᵀ - 2 Σ_{j<i} v_j v_jᵀ) Ĥ(x') v_i)`,
//!    normalized, followed by sequential re-orthonormalization.
//!
//! Iteration stops when `‖x_{n+1} - x_n‖ ≤ tol`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{Energy, FreeEdgeEnergy};
use crate::error::{Error, Result};
use crate::framework::Framework;
use crate::linalg;
use crate::manifold::{
    self, newton_project, projected_hessian_in, tangent_frame, ConstraintSystem,
    FrameworkConstraints, TangentFrame, DEFAULT_LICQ_TOL,
};
use crate::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig<T> {
    /// Saddle index (number of ascent directions).
    pub k: usize,
    pub step_size: T,
    /// Step for the eigenvector update; `None` reuses `step_size`.
    pub eigen_step: Option<T>,
    /// Stop once `‖x_{n+1} - x_n‖ ≤ tol`.
    pub tol: T,
    pub max_iters: usize,
    pub projection_tol: T,
    pub projection_max_iter: usize,
    /// Step halvings allowed when a Newton projection fails.
    pub max_backoffs: usize,
    pub seed: u64,
    pub record_history: bool,
}

impl<T: Real> Default for SearchConfig<T> {
    fn default() -> Self {
        Self {
            k: 1,
            step_size: T::lit(0.1),
            eigen_step: None,
            tol: T::lit(1e-11),
            max_iters: 20_000,
            projection_tol: T::lit(manifold::DEFAULT_PROJECTION_TOL),
            projection_max_iter: manifold::DEFAULT_PROJECTION_MAX_ITER,
            max_backoffs: 10,
            seed: 0,
            record_history: true,
        }
    }
}

impl<T: Real> SearchConfig<T> {
    /// Checks step sizes and the index range `0 < k < t`, where `t` is the
    /// manifold dimension (`nd - (m-1) - d(d+1)/2` for frameworks).
    pub fn validate(&self, tangent_dim: usize) -> Result<()> {
        if self.k == 0 || self.k >= tangent_dim {
            return Err(Error::InvalidConfig(format!(
                "saddle index k = {} must satisfy 0 < k < {tangent_dim}",
                self.k
            )));
        }
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !positive(self.step_size) {
            return Err(Error::InvalidConfig("step_size must be positive".into()));
        }
        if let Some(b) = self.eigen_step {
            if !positive(b) {
                return Err(Error::InvalidConfig("eigen_step must be positive".into()));
            }
        }
        if !positive(self.tol) {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        if !positive(self.projection_tol) {
            return Err(Error::InvalidConfig(
                "projection_tol must be positive".into(),
            ));
        }
        Ok(())
    }

    fn eigen_step(&self) -> T {
        self.eigen_step.unwrap_or(self.step_size)
    }
}

#[derive(Clone, Debug)]
pub struct SearchState<T: Real> {
    pub x: DVector<T>,
    pub v: Vec<DVector<T>>,
    pub iter: usize,
    pub last_move: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryRow<T> {
    pub iter: usize,
    pub energy: T,
    pub move_norm: T,
    pub constraint_inf: T,
    pub kkt_residual: T,
}

#[derive(Clone, Debug)]
pub struct SearchResult<T: Real> {
    pub converged: bool,
    pub x: DVector<T>,
    pub iterations: usize,
    pub energy: T,
    pub kkt_residual: T,
    pub constraint_inf: T,
    pub last_move: T,
    pub eigenvectors: Vec<DVector<T>>,
    pub history: Vec<HistoryRow<T>>,
    /// Step-size backoffs and eigenvector re-initializations.
    pub events: Vec<String>,
    pub failure_reason: Option<String>,
}

/// Move direction `(I - 2 Σ v_i v_iᵀ) g` for a tangent gradient `g`.
fn reflect<T: Real>(g: &DVector<T>, v: &[DVector<T>]) -> DVector<T> {
    let mut d = g.clone();
    let two = T::lit(2.0);
    for vi in v {
        d.axpy(-two * vi.dot(g), vi, T::one());
    }
    d
}

/// Pre-projection point `x̃ = x - h (I - 2 Σ v_i v_iᵀ) P_T(x) ∇E(x)`.
pub fn reflected_step<T, C, E>(
    state: &SearchState<T>,
    cs: &C,
    energy: &E,
    step_size: T,
) -> Result<DVector<T>>
where
    T: Real,
    C: ConstraintSystem<T> + ?Sized,
    E: Energy<T> + ?Sized,
{
    let frame = tangent_frame(cs, &state.x, T::lit(DEFAULT_LICQ_TOL))?;
    Ok(reflected_step_in(&frame, energy, &state.v, step_size))
}

fn reflected_step_in<T: Real, E: Energy<T> + ?Sized>(
    frame: &TangentFrame<T>,
    energy: &E,
    v: &[DVector<T>],
    step_size: T,
) -> DVector<T> {
    let g = frame.project(&energy.gradient(&frame.point));
    &frame.point - reflect(&g, v) * step_size
}

#[derive(Clone, Debug)]
pub struct EigenUpdate<T: Real> {
    pub v: Vec<DVector<T>>,
    /// Indices that collapsed and were re-drawn at random.
    pub reinitialized: Vec<usize>,
}

/// Deflated eigenvector update at `x_next` with step `eigen_step`.
pub fn update_eigenvectors<T, C, E, R>(
    v: &[DVector<T>],
    cs: &C,
    energy: &E,
    x_next: &DVector<T>,
    eigen_step: T,
    rng: &mut R,
) -> Result<EigenUpdate<T>>
where
    T: Real,
    C: ConstraintSystem<T> + ?Sized,
    E: Energy<T> + ?Sized,
    R: Rng + ?Sized,
{
    let frame = tangent_frame(cs, x_next, T::lit(DEFAULT_LICQ_TOL))?;
    Ok(update_eigenvectors_in(
        cs, &frame, energy, v, eigen_step, rng,
    ))
}

fn update_eigenvectors_in<T, C, E, R>(
    cs: &C,
    frame: &TangentFrame<T>,
    energy: &E,
    v: &[DVector<T>],
    eigen_step: T,
    rng: &mut R,
) -> EigenUpdate<T>
where
    T: Real,
    C: ConstraintSystem<T> + ?Sized,
    E: Energy<T> + ?Sized,
    R: Rng + ?Sized,
{
    let h = projected_hessian_in(cs, frame, energy);
    let two = T::lit(2.0);
    let mut updated = Vec::with_capacity(v.len());
    for (i, vi) in v.iter().enumerate() {
        let hv = &h * vi;
        let mut w = &hv - vi * vi.dot(&hv);
        for vj in &v[..i] {
            w.axpy(-two * vj.dot(&hv), vj, T::one());
        }
        updated.push(frame.project(&(vi - w * eigen_step)));
    }

    let tiny = T::lit(1e-14);
    let mut out: Vec<DVector<T>> = Vec::with_capacity(v.len());
    let mut reinitialized = Vec::new();
    for (i, mut u) in updated.into_iter().enumerate() {
        linalg::orthogonalize_against(&mut u, &out);
        let norm = u.norm();
        if norm > tiny {
            out.push(u / norm);
        } else {
            reinitialized.push(i);
            out.push(random_tangent(frame, &out, rng));
        }
    }
    EigenUpdate {
        v: out,
        reinitialized,
    }
}

/// Unit tangent vector orthogonal to `existing`.
fn random_tangent<T: Real, R: Rng + ?Sized>(
    frame: &TangentFrame<T>,
    existing: &[DVector<T>],
    rng: &mut R,
) -> DVector<T> {
    let t = frame.tangent.ncols();
    loop {
        let coeffs = DVector::from_fn(t, |_, _| T::lit(rng.random_range(-1.0..1.0)));
        let mut u = &frame.tangent * coeffs;
        linalg::orthogonalize_against(&mut u, existing);
        let norm = u.norm();
        if norm > T::lit(1e-8) {
            return u / norm;
        }
    }
}

/// The `k` lowest eigenvectors of the tangent-restricted Ĥ, or random
/// tangent vectors when Ĥ vanishes.
fn initial_vectors<T, C, E, R>(
    cs: &C,
    frame: &TangentFrame<T>,
    energy: &E,
    k: usize,
    rng: &mut R,
) -> (Vec<DVector<T>>, bool)
where
    T: Real,
    C: ConstraintSystem<T> + ?Sized,
    E: Energy<T> + ?Sized,
    R: Rng + ?Sized,
{
    let restricted = manifold::restricted_hessian(cs, frame, energy);
    let (vals, vecs) = linalg::symmetric_eigen(&restricted);
    let radius = vals
        .iter()
        .fold(T::zero(), |a, &b| if b.abs() > a { b.abs() } else { a });
    if radius <= T::machine_eps() {
        let mut out = Vec::with_capacity(k);
        for _ in 0..k {
            let u = random_tangent(frame, &out, rng);
            out.push(u);
        }
        return (out, true);
    }
    let v = (0..k)
        .map(|i| {
            let u = &frame.tangent * vecs.column(i);
            let n = u.norm();
            u / n
        })
        .collect();
    (v, false)
}

fn failed<T: Real>(
    x: DVector<T>,
    iterations: usize,
    v: Vec<DVector<T>>,
    history: Vec<HistoryRow<T>>,
    events: Vec<String>,
    reason: String,
) -> SearchResult<T> {
    SearchResult {
        converged: false,
        x,
        iterations,
        energy: T::nan(),
        kkt_residual: T::nan(),
        constraint_inf: T::nan(),
        last_move: T::nan(),
        eigenvectors: v,
        history,
        events,
        failure_reason: Some(reason),
    }
}

/// Runs the constrained saddle search from `x0` (projected onto the
/// manifold first when it is not on it).
///
/// Configuration errors are returned as `Err`; numerical breakdowns
/// (projection failure after all backoffs, loss of LICQ) end the run with
/// `converged = false` and a `failure_reason`.
pub fn saddle_search<T, C, E>(
    cs: &C,
    energy: &E,
    x0: &DVector<T>,
    cfg: &SearchConfig<T>,
) -> Result<SearchResult<T>>
where
    T: Real,
    C: ConstraintSystem<T> + ?Sized,
    E: Energy<T> + ?Sized,
{
    cfg.validate(cs.tangent_dim())?;
    manifold::constraint_values(cs, x0)?;
    let licq_tol = T::lit(DEFAULT_LICQ_TOL);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut events = Vec::new();
    let mut history = Vec::new();

    let x = match newton_project(cs, x0, x0, cfg.projection_tol, cfg.projection_max_iter) {
        Ok(p) => {
            if p.iterations > 0 {
                events.push(format!(
                    "start projected onto the manifold in {} iterations",
                    p.iterations
                ));
            }
            p.x
        }
        Err(e) => {
            return Ok(failed(
                x0.clone(),
                0,
                Vec::new(),
                history,
                events,
                format!("initial projection: {e}"),
            ))
        }
    };
    let mut frame = match tangent_frame(cs, &x, licq_tol) {
        Ok(f) => f,
        Err(e) => return Ok(failed(x, 0, Vec::new(), history, events, e.to_string())),
    };
    let (v, random) = initial_vectors(cs, &frame, energy, cfg.k, &mut rng);
    if random {
        events.push("initial projected Hessian vanishes; random eigenvector guess".into());
    }
    let mut state = SearchState {
        x,
        v,
        iter: 0,
        last_move: T::nan(),
    };

    let record = |frame: &TangentFrame<T>, iter: usize, move_norm: T| -> HistoryRow<T> {
        let g = energy.gradient(&frame.point);
        HistoryRow {
            iter,
            energy: energy.value(&frame.point),
            move_norm,
            constraint_inf: linalg::inf_norm(&cs.values(&frame.point)),
            kkt_residual: frame.project(&g).norm(),
        }
    };
    if cfg.record_history {
        history.push(record(&frame, 0, T::zero()));
    }

    let eigen_step = cfg.eigen_step();
    for iter in 1..=cfg.max_iters {
        let g = frame.project(&energy.gradient(&state.x));
        let direction = reflect(&g, &state.v);

        let mut accepted = None;
        let mut h = cfg.step_size;
        for attempt in 0..=cfg.max_backoffs {
            let x_tilde = &state.x - &direction * h;
            match newton_project(
                cs,
                &x_tilde,
                &state.x,
                cfg.projection_tol,
                cfg.projection_max_iter,
            ) {
                Ok(p) => {
                    accepted = Some(p.x);
                    break;
                }
                Err(e) => {
                    if attempt < cfg.max_backoffs {
                        events.push(format!(
                            "iter {iter}: {e}; halving step to {:e}",
                            (h * T::lit(0.5)).as_f64()
                        ));
                    }
                    h *= T::lit(0.5);
                }
            }
        }
        let Some(x_next) = accepted else {
            let reason = format!(
                "iter {iter}: Newton projection failed after {} step halvings",
                cfg.max_backoffs
            );
            return Ok(failed(state.x, iter, state.v, history, events, reason));
        };

        let frame_next = match tangent_frame(cs, &x_next, licq_tol) {
            Ok(f) => f,
            Err(e) => {
                return Ok(failed(
                    x_next,
                    iter,
                    state.v,
                    history,
                    events,
                    format!("iter {iter}: {e}"),
                ))
            }
        };
        let upd = update_eigenvectors_in(cs, &frame_next, energy, &state.v, eigen_step, &mut rng);
        for i in &upd.reinitialized {
            events.push(format!(
                "iter {iter}: eigenvector {i} vanished; re-initialized"
            ));
        }

        let move_norm = (&x_next - &state.x).norm();
        state = SearchState {
            x: x_next,
            v: upd.v,
            iter,
            last_move: move_norm,
        };
        frame = frame_next;
        if cfg.record_history {
            history.push(record(&frame, iter, move_norm));
        }
        if !move_norm.is_finite() {
            return Ok(failed(
                state.x,
                iter,
                state.v,
                history,
                events,
                "non-finite iterate".into(),
            ));
        }
        if move_norm <= cfg.tol {
            let last = record(&frame, iter, move_norm);
            return Ok(SearchResult {
                converged: true,
                x: state.x,
                iterations: iter,
                energy: last.energy,
                kkt_residual: last.kkt_residual,
                constraint_inf: last.constraint_inf,
                last_move: move_norm,
                eigenvectors: state.v,
                history,
                events,
                failure_reason: None,
            });
        }
    }

    let last = record(&frame, state.iter, state.last_move);
    Ok(SearchResult {
        converged: false,
        x: state.x,
        iterations: state.iter,
        energy: last.energy,
        kkt_residual: last.kkt_residual,
        constraint_inf: last.constraint_inf,
        last_move: state.last_move,
        eigenvectors: state.v,
        history,
        events,
        failure_reason: Some(format!(
            "no convergence within {} iterations",
            cfg.max_iters
        )),
    })
}

/// Saddle search for the squared free-edge length of `fw`.
pub fn run_search<T: Real>(fw: &Framework<T>, cfg: &SearchConfig<T>) -> Result<SearchResult<T>> {
    let cs = FrameworkConstraints::new(fw);
    let energy = FreeEdgeEnergy::for_framework(fw);
    saddle_search(&cs, &energy, fw.config().coords(), cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiStartOptions<T> {
    pub n_starts: usize,
    /// Arc length of the random walk on the manifold used to perturb each
    /// start (start 0 is never perturbed).
    pub perturbation: T,
    /// Length of one walk sub-step.
    pub walk_step: T,
    pub parallel: bool,
}

impl<T: Real> Default for MultiStartOptions<T> {
    fn default() -> Self {
        Self {
            n_starts: 1,
            perturbation: T::lit(1.0),
            walk_step: T::lit(0.1),
            parallel: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StartOutcome<T: Real> {
    pub start: usize,
    pub seed: u64,
    pub initial: DVector<T>,
    pub result: SearchResult<T>,
}

/// Seed of start `i`; start 0 keeps the base seed.
pub fn start_seed(base: u64, i: usize) -> u64 {
    if i == 0 {
        return base;
    }
    // splitmix64 finalizer
    let mut z = base ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random walk of total length `length` along a fixed random ambient
/// direction, projected to the tangent space and back onto the manifold at
/// every sub-step.
pub fn random_walk<T, C, R>(
    cs: &C,
    x0: &DVector<T>,
    length: T,
    walk_step: T,
    projection_tol: T,
    rng: &mut R,
) -> DVector<T>
where
    T: Real,
    C: ConstraintSystem<T> + ?Sized,
    R: Rng + ?Sized,
{
    let direction = DVector::from_fn(cs.ambient_dim(), |_, _| T::lit(rng.random_range(-1.0..1.0)));
    if !(length > T::zero()) || !(walk_step > T::zero()) {
        return x0.clone();
    }
    let n_sub = (length / walk_step).ceil().to_usize().unwrap_or(1).max(1);
    let sub = length / T::from_usize(n_sub).unwrap();
    let mut x = x0.clone();
    let mut previous: Option<DVector<T>> = None;
    for _ in 0..n_sub {
        let Ok(frame) = tangent_frame(cs, &x, T::lit(DEFAULT_LICQ_TOL)) else {
            break;
        };
        let mut t = frame.project(&direction);
        // keep heading the same way once the walk has started
        if let Some(prev) = &previous {
            let pt = frame.project(prev);
            if pt.norm() > T::lit(1e-8) {
                t = pt;
            }
        }
        let norm = t.norm();
        if norm < T::lit(1e-12) {
            break;
        }
        let t = t / norm;
        let mut h = sub;
        let mut moved = false;
        for _ in 0..10 {
            let trial = &x + &t * h;
            if let Ok(p) = newton_project(
                cs,
                &trial,
                &x,
                projection_tol,
                manifold::DEFAULT_PROJECTION_MAX_ITER,
            ) {
                x = p.x;
                moved = true;
                break;
            }
            h *= T::lit(0.5);
        }
        if !moved {
            break;
        }
        previous = Some(t);
    }
    x
}

/// Runs [`run_search`] from `opts.n_starts` starting points: the framework's
/// own configuration plus random-walk perturbations of it. Results are
/// sorted converged-first, then by KKT residual, then by start index.
pub fn multi_start<T: Real>(
    fw: &Framework<T>,
    cfg: &SearchConfig<T>,
    opts: &MultiStartOptions<T>,
) -> Result<Vec<StartOutcome<T>>> {
    if opts.n_starts == 0 {
        return Err(Error::InvalidConfig("n_starts must be at least 1".into()));
    }
    let cs = FrameworkConstraints::new(fw);
    cfg.validate(cs.tangent_dim())?;
    let energy = FreeEdgeEnergy::for_framework(fw);
    let x0 = fw.config().coords();

    let run_one = |i: usize| -> Result<StartOutcome<T>> {
        let seed = start_seed(cfg.seed, i);
        let initial = if i == 0 {
            x0.clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_walk(
                &cs,
                x0,
                opts.perturbation,
                opts.walk_step,
                cfg.projection_tol,
                &mut rng,
            )
        };
        let sub_cfg = SearchConfig {
            seed,
            ..cfg.clone()
        };
        let result = saddle_search(&cs, &energy, &initial, &sub_cfg)?;
        Ok(StartOutcome {
            start: i,
            seed,
            initial,
            result,
        })
    };

    let mut outcomes: Vec<StartOutcome<T>> = if opts.parallel {
        (0..opts.n_starts)
            .into_par_iter()
            .map(run_one)
            .collect::<Result<_>>()?
    } else {
        (0..opts.n_starts).map(run_one).collect::<Result<_>>()?
    };
    outcomes.sort_by(|a, b| {
        let key = |o: &StartOutcome<T>| {
            let kkt = o.result.kkt_residual;
            (
                !o.result.converged,
                if kkt.is_finite() {
                    kkt
                } else {
                    T::max_value().unwrap()
                },
            )
        };
        let (ca, ka) = key(a);
        let (cb, kb) = key(b);
        ca.cmp(&cb)
            .then(ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.start.cmp(&b.start))
    });
    Ok(outcomes)
}
