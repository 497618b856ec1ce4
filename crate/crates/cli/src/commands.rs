use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use framesaddle::analysis::{certify, pin_gauge, SingularityCertificate};
use framesaddle::continuation::follow_branch;
use framesaddle::search::multi_start;
use framesaddle::{fixtures, Framework64};
use nalgebra::DVector;
use serde::Serialize;

use crate::config::RunConfig;
use crate::render::{flex_arrows, render_svg};
use crate::report::{self, AnalysisJson, CertificateJson, SearchJson, StartJson};
use crate::schema;
use crate::{Cli, Command, FollowArgs, Global, Input, RenderArgs, SearchArgs, StressArgs};

/// How a command that ran to the end went.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    NotConverged,
    ContinuationFailed,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::NotConverged => 3,
            Status::ContinuationFailed => 4,
        }
    }
}

/// Input and configuration problems exit with 2; numerical breakdowns that
/// surface as errors count as non-convergence.
pub fn error_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<framesaddle::Error>() {
        Some(
            framesaddle::Error::LicqFailure { .. } | framesaddle::Error::ProjectionFailed { .. },
        ) => 3,
        _ => 2,
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    input: String,
    config: &'a RunConfig,
    wall_time_s: f64,
    files: Vec<String>,
}

/// Collects the files a command writes and finishes with a manifest.
struct Run<'a> {
    command: &'a str,
    input: String,
    dir: Option<PathBuf>,
    files: Vec<String>,
    started: Instant,
}

impl<'a> Run<'a> {
    fn new(command: &'a str, input: String, dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        }
        Ok(Self {
            command,
            input,
            dir,
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let path = dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<()> {
        self.write(name, &(pretty(value)? + "\n"))
    }

    fn finish(mut self, cfg: &RunConfig) -> Result<()> {
        if self.dir.is_none() {
            return Ok(());
        }
        self.write_json("config.snapshot.json", cfg)?;
        self.files.push("manifest.json".into());
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            input: self.input.clone(),
            config: cfg,
            wall_time_s: self.started.elapsed().as_secs_f64(),
            files: self.files.clone(),
        };
        let path = self.dir.as_ref().unwrap().join("manifest.json");
        std::fs::write(&path, pretty(&manifest)? + "\n")
            .with_context(|| format!("writing {}", path.display()))
    }
}

fn pretty<S: Serialize>(value: &S) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn emit<S: Serialize>(g: &Global, value: &S, text: impl FnOnce() -> String) -> Result<()> {
    if g.json {
        println!("{}", pretty(value)?);
    } else {
        print!("{}", text());
    }
    Ok(())
}

fn load_input(g: &Global, input: &Input) -> Result<(Framework64, String)> {
    match (&g.fixture, &input.input) {
        (Some(_), Some(_)) => bail!("give either an input file or --fixture, not both"),
        (Some(name), None) => {
            let fw = fixtures::by_name(name).ok_or_else(|| anyhow!("unknown fixture {name}"))??;
            Ok((fw, format!("fixture:{name}")))
        }
        (None, Some(path)) => Ok((schema::load_framework(path)?, path.display().to_string())),
        (None, None) => bail!("no input: give a framework JSON file or --fixture"),
    }
}

fn load_config(g: &Global) -> Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.search.seed = seed;
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<Status> {
    let g = &cli.global;
    let mut cfg = load_config(g)?;
    match &cli.command {
        Command::Analyze(input) => analyze(g, &cfg, input),
        Command::Certify(input) => certify_cmd(g, &cfg, input),
        Command::StressTest(args) => stress_test(g, &cfg, args),
        Command::Search(args) => search(g, &mut cfg, args),
        Command::Follow(args) => follow(g, &mut cfg, args),
        Command::Render(args) => render(g, &cfg, args),
    }
}

fn analyze(g: &Global, cfg: &RunConfig, input: &Input) -> Result<Status> {
    let (fw, source) = load_input(g, input)?;
    let cert = certify(&fw, &cfg.certify);
    let a = AnalysisJson::new(&fw, &cert);
    emit(g, &a, || {
        let m = &a.maxwell;
        format!(
            "vertices {}  edges {}  dim {}\n\
             rigidity rank {}\n\
             flex dim {} (nontrivial {})\n\
             self-stress dim {}\n\
             LICQ margin {:.6e} ({})\n\
             Maxwell count: m + d(d+1)/2 = {} {} nd = {}{}\n",
            a.n_vertices,
            a.n_edges,
            a.dim,
            a.rigidity_rank,
            a.flex_dim,
            a.nontrivial_flex_dim,
            a.self_stress_dim,
            a.licq_margin,
            if a.licq_ok { "holds" } else { "fails" },
            m.edges + m.trivial_motions,
            if m.under_constrained { "<" } else { ">=" },
            m.coordinates,
            if m.under_constrained {
                ""
            } else {
                "  (not under-constrained)"
            },
        )
    })?;
    let mut run = Run::new("analyze", source, g.out_dir.clone())?;
    run.write_json("analysis.json", &a)?;
    run.finish(cfg)?;
    Ok(Status::Success)
}

fn certificate_text(c: &SingularityCertificate<f64>) -> String {
    format!(
        "certified {}\n\
         KKT residual {:.3e}, LICQ margin {:.3e} ({})\n\
         tangent eigenvalues {:?}\n\
         index {}, positive {}, near zero {}\n\
         rigidity rank {}, nontrivial flex dim {}, self-stress dim {}\n\
         realizable directions {}\n",
        c.certified,
        c.kkt_residual,
        c.licq_margin,
        if c.licq_ok { "holds" } else { "fails" },
        c.eigenvalues,
        c.index,
        c.positive,
        c.near_zero,
        c.rigidity_rank,
        c.nontrivial_flex_dim,
        c.self_stress_dim,
        c.realizable_directions.len(),
    )
}

fn certify_cmd(g: &Global, cfg: &RunConfig, input: &Input) -> Result<Status> {
    let (fw, source) = load_input(g, input)?;
    let cert = certify(&fw, &cfg.certify);
    let json = CertificateJson::from(&cert);
    emit(g, &json, || certificate_text(&cert))?;
    let mut run = Run::new("certify", source, g.out_dir.clone())?;
    run.write_json("certificate.json", &json)?;
    run.finish(cfg)?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct CoeffCheck {
    coeffs: Vec<f64>,
    /// `aᵀ Q a / ‖Q‖₂` for each stress form, with `a` normalized.
    relative_values: Vec<f64>,
    passes: bool,
}

#[derive(Serialize)]
struct StressJson {
    nontrivial_flex_dim: usize,
    self_stress_dim: usize,
    solved: bool,
    stress_forms: Vec<Vec<Vec<f64>>>,
    realizable_directions: Vec<Vec<f64>>,
    realizable_ambient: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    check: Option<CoeffCheck>,
}

fn normalized_coeffs(coeffs: &[f64], dim: usize) -> Result<DVector<f64>> {
    if coeffs.len() != dim {
        bail!(
            "--coeffs has {} entries but the nontrivial flex space has dimension {dim}",
            coeffs.len()
        );
    }
    let a = DVector::from_column_slice(coeffs);
    let norm = a.norm();
    if norm == 0.0 || !norm.is_finite() {
        bail!("--coeffs must be a nonzero finite vector");
    }
    Ok(a / norm)
}

fn stress_test(g: &Global, cfg: &RunConfig, args: &StressArgs) -> Result<Status> {
    let (fw, source) = load_input(g, &args.input)?;
    let cert = certify(&fw, &cfg.certify);
    let check = match &args.coeffs {
        Some(c) => {
            let a = normalized_coeffs(c, cert.nontrivial_flex_dim)?;
            let relative_values: Vec<f64> = cert
                .stress_forms
                .iter()
                .map(|q| {
                    let scale = q.norm();
                    let v = (a.transpose() * q * &a)[0];
                    if scale > 0.0 {
                        v / scale
                    } else {
                        0.0
                    }
                })
                .collect();
            let passes = relative_values
                .iter()
                .all(|v| v.abs() <= cfg.certify.stress_tol);
            Some(CoeffCheck {
                coeffs: a.iter().copied().collect(),
                relative_values,
                passes,
            })
        }
        None => None,
    };
    let full = CertificateJson::from(&cert);
    let json = StressJson {
        nontrivial_flex_dim: cert.nontrivial_flex_dim,
        self_stress_dim: cert.self_stress_dim,
        solved: cert.stress_test_solved,
        stress_forms: full.stress_forms,
        realizable_directions: full.realizable_directions,
        realizable_ambient: full.realizable_ambient,
        check,
    };
    emit(g, &json, || {
        let mut s = format!(
            "flex dim {}, self-stress dim {}, solved {}\n",
            json.nontrivial_flex_dim, json.self_stress_dim, json.solved
        );
        for (i, d) in json.realizable_directions.iter().enumerate() {
            s += &format!("direction {i}: {d:?}\n");
        }
        if let Some(c) = &json.check {
            s += &format!(
                "coefficients {:?}: relative form values {:?} -> {}\n",
                c.coeffs,
                c.relative_values,
                if c.passes { "passes" } else { "fails" }
            );
        }
        s
    })?;
    let mut run = Run::new("stress-test", source, g.out_dir.clone())?;
    run.write_json("stress_test.json", &json)?;
    run.finish(cfg)?;
    Ok(Status::Success)
}

fn search(g: &Global, cfg: &mut RunConfig, args: &SearchArgs) -> Result<Status> {
    let (fw, source) = load_input(g, &args.input)?;
    if let Some(k) = args.k {
        cfg.search.k = k;
    }
    if let Some(h) = args.step_size {
        cfg.search.step_size = h;
    }
    if let Some(n) = args.max_iters {
        cfg.search.max_iters = n;
    }
    if let Some(n) = args.starts {
        cfg.multi_start.n_starts = n;
    }
    if let Some(p) = args.perturbation {
        cfg.multi_start.perturbation = p;
    }
    if args.parallel {
        cfg.multi_start.parallel = true;
    }
    let dir = g.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let outcomes = multi_start(&fw, &cfg.search, &cfg.multi_start)?;
    let best = &outcomes[0];
    let r = &best.result;

    // keep a partial result even when the final point is not a valid framework
    let found = fw.with_coords(r.x.clone()).ok();
    let certificate = found.as_ref().map(|f| certify(f, &cfg.certify));
    let mut json = match (&found, &certificate) {
        (Some(f), Some(cert)) => SearchJson::new(best.start, best.seed, r, f, cert),
        _ => {
            let mut j = SearchJson::new(best.start, best.seed, r, &fw, &certify(&fw, &cfg.certify));
            j.framework.vertices =
                r.x.as_slice()
                    .chunks(fw.dim())
                    .map(<[f64]>::to_vec)
                    .collect();
            j.certificate.certified = false;
            j
        }
    };
    if outcomes.len() > 1 {
        let mut starts: Vec<StartJson> = outcomes
            .iter()
            .map(|o| StartJson {
                start: o.start,
                seed: o.seed,
                converged: o.result.converged,
                iterations: o.result.iterations,
                energy: o.result.energy,
                kkt_residual: o.result.kkt_residual,
                coordinates: o.result.x.iter().copied().collect(),
            })
            .collect();
        starts.sort_by_key(|s| s.start);
        json.starts = starts;
    }

    let mut run = Run::new("search", source, Some(dir))?;
    run.write_json("result.json", &json)?;
    run.write("history.csv", &report::history_csv(r))?;
    run.finish(cfg)?;

    emit(g, &json, || {
        let mut s = format!(
            "converged {} after {} iterations (start {})\nenergy {:.12}, KKT residual {:.3e}\n",
            json.converged, json.iterations, json.start, json.energy, json.kkt_residual
        );
        if let Some(reason) = &json.failure_reason {
            s += &format!("failure: {reason}\n");
        }
        if let Some(c) = &certificate {
            s += &certificate_text(c);
        }
        s
    })?;
    Ok(if r.converged {
        Status::Success
    } else {
        Status::NotConverged
    })
}

fn last_velocity(steps: &[DVector<f64>]) -> Option<DVector<f64>> {
    match steps {
        [.., a, b] => Some(b - a),
        _ => None,
    }
}

fn follow(g: &Global, cfg: &mut RunConfig, args: &FollowArgs) -> Result<Status> {
    let (fw, source) = load_input(g, &args.input)?;
    if let Some(n) = args.steps {
        cfg.continuation.n_steps = n;
    }
    if let Some(h) = args.arc_step {
        cfg.continuation.arc_step = h;
    }
    cfg.continuation.validate()?;
    if args.sign != 1 && args.sign != -1 {
        bail!("--sign must be 1 or -1");
    }
    let cert = certify(&fw, &cfg.certify);
    let u = match &args.coeffs {
        Some(c) => {
            let a = normalized_coeffs(c, cert.nontrivial_flex_dim)?;
            pin_gauge(&fw, &(&cert.flex_basis * a))
        }
        None => cert
            .realizable_ambient
            .get(args.direction)
            .cloned()
            .ok_or_else(|| {
                anyhow!(
                    "direction index {} out of range: the certificate has {} realizable directions",
                    args.direction,
                    cert.realizable_ambient.len()
                )
            })?,
    };
    let path = follow_branch(&fw, &u, args.sign, &cfg.continuation)?;

    let dir = g.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut run = Run::new("follow", source, Some(dir))?;
    run.write("path.jsonl", &report::path_jsonl(&path))?;
    if args.svg && fw.dim() == 2 {
        let start = render_svg(&fw, None, &flex_arrows(&(&u * f64::from(args.sign))))?;
        run.write("path_first.svg", &start)?;
        let last = path.steps.last().expect("paths keep their start");
        let arrows = last_velocity(&path.steps)
            .map(|v| flex_arrows(&v))
            .unwrap_or_default();
        run.write("path_last.svg", &render_svg(&fw, Some(last), &arrows)?)?;
    }
    run.finish(cfg)?;

    #[derive(Serialize)]
    struct FollowJson<'a> {
        completed: bool,
        failure: &'a Option<String>,
        steps: usize,
        arc_length: f64,
        max_residual: f64,
    }
    let json = FollowJson {
        completed: path.completed,
        failure: &path.failure,
        steps: path.len() - 1,
        arc_length: path.arc.last().copied().unwrap_or(0.0),
        max_residual: path.max_residual(),
    };
    emit(g, &json, || {
        let mut s = format!(
            "{} steps, arc length {:.6}, max residual {:.3e}\n",
            json.steps, json.arc_length, json.max_residual
        );
        if let Some(f) = &path.failure {
            s += &format!("continuation stopped: {f}\n");
        }
        s
    })?;
    Ok(if path.completed {
        Status::Success
    } else {
        Status::ContinuationFailed
    })
}

fn read_frame(path: &Path, frame: Option<usize>, n: usize) -> Result<DVector<f64>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let frames =
        report::parse_path_jsonl(&text).with_context(|| format!("in {}", path.display()))?;
    let i = frame.unwrap_or(frames.len().saturating_sub(1));
    let coords = frames.get(i).ok_or_else(|| {
        anyhow!(
            "frame {i} out of range: {} has {} frames",
            path.display(),
            frames.len()
        )
    })?;
    if coords.len() != n {
        bail!(
            "frame {i} has {} coordinates, the framework has {n}",
            coords.len()
        );
    }
    Ok(DVector::from_column_slice(coords))
}

fn render(g: &Global, cfg: &RunConfig, args: &RenderArgs) -> Result<Status> {
    let (fw, source) = load_input(g, &args.input)?;
    if fw.dim() != 2 {
        bail!(
            "rendering needs a planar framework (dim = 2, got {}); 3D rendering is unsupported",
            fw.dim()
        );
    }
    let fw = match &args.path {
        Some(p) => fw.with_coords(read_frame(p, args.frame, fw.n_coords())?)?,
        None => fw,
    };
    let arrows = match args.flex {
        Some(i) => {
            let cert = certify(&fw, &cfg.certify);
            let u = cert.realizable_ambient.get(i).ok_or_else(|| {
                anyhow!(
                    "flex index {i} out of range: the certificate has {} realizable directions",
                    cert.realizable_ambient.len()
                )
            })?;
            flex_arrows(u)
        }
        None => Vec::new(),
    };
    let svg = render_svg(&fw, None, &arrows)?;
    let output = match (&args.output, &g.out_dir) {
        (Some(o), _) => o.clone(),
        (None, Some(d)) => d.join("framework.svg"),
        (None, None) => PathBuf::from("framework.svg"),
    };
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&output, &svg).with_context(|| format!("writing {}", output.display()))?;
    #[derive(Serialize)]
    struct RenderJson {
        output: String,
        lines: usize,
        arrows: usize,
    }
    let json = RenderJson {
        output: output.display().to_string(),
        lines: fw.n_edges(),
        arrows: arrows.len(),
    };
    emit(g, &json, || {
        format!(
            "wrote {} ({} edges, {} arrows)\n",
            json.output, json.lines, json.arrows
        )
    })?;
    let mut run = Run::new("render", source, g.out_dir.clone())?;
    run.files.push(json.output.clone());
    run.finish(cfg)?;
    Ok(Status::Success)
}
