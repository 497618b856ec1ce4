//! JSON views of library results. Vectors become arrays, matrices arrays of
//! rows (or, for `flex_basis`, arrays of basis columns).

use framesaddle::analysis::SingularityCertificate;
use framesaddle::continuation::FlexPath;
use framesaddle::framework::rigid_motion_count;
use framesaddle::search::SearchResult;
use framesaddle::Framework64;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::schema::FrameworkJson;

fn vec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn columns(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.column_iter()
        .map(|c| c.iter().copied().collect())
        .collect()
}

#[derive(Serialize)]
pub struct CertificateJson {
    pub kkt_residual: f64,
    pub licq_margin: f64,
    pub licq_ok: bool,
    pub tangent_dim: usize,
    pub eigenvalues: Vec<f64>,
    pub index: usize,
    pub positive: usize,
    pub near_zero: usize,
    pub degenerate: bool,
    pub normal_residual: f64,
    pub rigidity_rank: usize,
    pub nontrivial_flex_dim: usize,
    pub self_stress_dim: usize,
    pub realizable_directions: Vec<Vec<f64>>,
    pub realizable_ambient: Vec<Vec<f64>>,
    pub stress_test_solved: bool,
    pub stress_forms: Vec<Vec<Vec<f64>>>,
    pub flex_basis: Vec<Vec<f64>>,
    pub self_stresses: Vec<Vec<f64>>,
    pub degenerate_edges: Vec<usize>,
    pub certified: bool,
}

impl From<&SingularityCertificate<f64>> for CertificateJson {
    fn from(c: &SingularityCertificate<f64>) -> Self {
        Self {
            kkt_residual: c.kkt_residual,
            licq_margin: c.licq_margin,
            licq_ok: c.licq_ok,
            tangent_dim: c.tangent_dim,
            eigenvalues: c.eigenvalues.clone(),
            index: c.index,
            positive: c.positive,
            near_zero: c.near_zero,
            degenerate: c.degenerate,
            normal_residual: c.normal_residual,
            rigidity_rank: c.rigidity_rank,
            nontrivial_flex_dim: c.nontrivial_flex_dim,
            self_stress_dim: c.self_stress_dim,
            realizable_directions: c.realizable_directions.iter().map(vec).collect(),
            realizable_ambient: c.realizable_ambient.iter().map(vec).collect(),
            stress_test_solved: c.stress_test_solved,
            stress_forms: c.stress_forms.iter().map(rows).collect(),
            flex_basis: columns(&c.flex_basis),
            self_stresses: rows(&c.self_stresses),
            degenerate_edges: c.degenerate_edges.clone(),
            certified: c.certified,
        }
    }
}

#[derive(Serialize)]
pub struct MaxwellJson {
    pub edges: usize,
    pub trivial_motions: usize,
    pub coordinates: usize,
    /// `m + d(d+1)/2 < nd`, the count an under-constrained framework meets.
    pub under_constrained: bool,
}

#[derive(Serialize)]
pub struct AnalysisJson {
    pub dim: usize,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub rigidity_rank: usize,
    pub flex_dim: usize,
    pub nontrivial_flex_dim: usize,
    pub self_stress_dim: usize,
    pub licq_margin: f64,
    pub licq_ok: bool,
    pub tangent_dim: usize,
    pub maxwell: MaxwellJson,
    pub degenerate_edges: Vec<usize>,
}

impl AnalysisJson {
    pub fn new(fw: &Framework64, c: &SingularityCertificate<f64>) -> Self {
        let nd = fw.n_coords();
        let trivial = rigid_motion_count(fw.dim());
        Self {
            dim: fw.dim(),
            n_vertices: fw.n_vertices(),
            n_edges: fw.n_edges(),
            rigidity_rank: c.rigidity_rank,
            flex_dim: nd - c.rigidity_rank,
            nontrivial_flex_dim: c.nontrivial_flex_dim,
            self_stress_dim: c.self_stress_dim,
            licq_margin: c.licq_margin,
            licq_ok: c.licq_ok,
            tangent_dim: c.tangent_dim,
            maxwell: MaxwellJson {
                edges: fw.n_edges(),
                trivial_motions: trivial,
                coordinates: nd,
                under_constrained: fw.is_under_constrained(),
            },
            degenerate_edges: c.degenerate_edges.clone(),
        }
    }
}

#[derive(Serialize)]
pub struct StartJson {
    pub start: usize,
    pub seed: u64,
    pub converged: bool,
    pub iterations: usize,
    pub energy: f64,
    pub kkt_residual: f64,
    pub coordinates: Vec<f64>,
}

#[derive(Serialize)]
pub struct SearchJson {
    pub converged: bool,
    pub start: usize,
    pub seed: u64,
    pub iterations: usize,
    pub energy: f64,
    pub kkt_residual: f64,
    pub constraint_inf: f64,
    pub last_move: f64,
    pub failure_reason: Option<String>,
    pub events: Vec<String>,
    pub framework: FrameworkJson,
    pub certificate: CertificateJson,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub starts: Vec<StartJson>,
}

impl SearchJson {
    pub fn new(
        start: usize,
        seed: u64,
        r: &SearchResult<f64>,
        fw: &Framework64,
        cert: &SingularityCertificate<f64>,
    ) -> Self {
        Self {
            converged: r.converged,
            start,
            seed,
            iterations: r.iterations,
            energy: r.energy,
            kkt_residual: r.kkt_residual,
            constraint_inf: r.constraint_inf,
            last_move: r.last_move,
            failure_reason: r.failure_reason.clone(),
            events: r.events.clone(),
            framework: FrameworkJson::from_framework(fw),
            certificate: cert.into(),
            starts: Vec::new(),
        }
    }
}

pub fn history_csv(r: &SearchResult<f64>) -> String {
    let mut s = String::from("iter,energy,move_norm,constraint_inf,kkt_residual\n");
    for h in &r.history {
        s.push_str(&format!(
            "{},{:e},{:e},{:e},{:e}\n",
            h.iter, h.energy, h.move_norm, h.constraint_inf, h.kkt_residual
        ));
    }
    s
}

#[derive(Serialize)]
pub struct PathPoint {
    pub t: f64,
    pub coords: Vec<f64>,
    pub residual: f64,
}

pub fn path_jsonl(path: &FlexPath<f64>) -> String {
    let mut s = String::new();
    for ((x, &t), &residual) in path.steps.iter().zip(&path.arc).zip(&path.residuals) {
        let p = PathPoint {
            t,
            coords: vec(x),
            residual,
        };
        s.push_str(&serde_json::to_string(&p).expect("path points serialize"));
        s.push('\n');
    }
    s
}

/// Reads `coords` back out of a path file.
pub fn parse_path_jsonl(text: &str) -> anyhow::Result<Vec<Vec<f64>>> {
    #[derive(serde::Deserialize)]
    struct Line {
        coords: Vec<f64>,
    }
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<Line>(l)
                .map(|p| p.coords)
                .map_err(|e| anyhow::anyhow!("path line {}: {e}", i + 1))
        })
        .collect()
}
