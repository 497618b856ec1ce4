//! End-to-end runs of the binary: exit codes, output files and SVG contents.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use framesaddle::fixtures::{self, HEPTAGON_1_EDGES, HEPTAGON_1_SINGULAR};
use serde_json::{json, Value};

fn framesaddle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_framesaddle"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_json(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, value.to_string()).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn triangle() -> Value {
    json!({
        "dim": 2,
        "vertices": [[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]],
        "edges": [[0, 1], [1, 2], [2, 0]],
        "free_edge": 1,
        "pins": [{"vertex": 0, "axis": 0, "value": 0.0}, {"vertex": 0, "axis": 1, "value": 0.0},
                 {"vertex": 1, "axis": 1, "value": 0.0}]
    })
}

/// Planar heptagon document, pins `x_A`, `y_A`, `y_G`.
fn heptagon_json(edges: &[(usize, usize)], verts: &[[f64; 2]; 7]) -> Value {
    json!({
        "dim": 2,
        "vertices": verts.iter().map(|p| vec![p[0], p[1]]).collect::<Vec<_>>(),
        "edges": edges.iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>(),
        "free_edge": 0,
        "pins": [{"vertex": 0, "axis": 0, "value": verts[0][0]}, {"vertex": 0, "axis": 1, "value": verts[0][1]},
                 {"vertex": 6, "axis": 1, "value": verts[6][1]}]
    })
}

/// Converged four-bar search in `dir`, returning the result path.
fn four_bar_result(dir: &Path) -> PathBuf {
    let out = framesaddle(&["--fixture", "four-bar", "--out-dir", s(dir), "search"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("result.json")
}

#[test]
fn analyze_reports_ranks_and_dimensions() {
    let tmp = tempfile::tempdir().unwrap();
    let tri = write_json(tmp.path(), "triangle.json", &triangle());
    let out = framesaddle(&["--json", "analyze", s(&tri)]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rigidity_rank"], 3);
    assert_eq!(v["nontrivial_flex_dim"], 0);
    assert_eq!(v["self_stress_dim"], 0);
    assert_eq!(v["maxwell"]["under_constrained"], false);

    let out = framesaddle(&["--fixture", "heptagon-1", "--json", "analyze"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["nontrivial_flex_dim"], 1);
    assert_eq!(v["maxwell"]["under_constrained"], true);

    let text =
        String::from_utf8(framesaddle(&["--fixture", "four-bar", "analyze"]).stdout).unwrap();
    assert!(
        text.contains("rigidity rank 4")
            && text.contains("LICQ margin")
            && text.contains("Maxwell")
    );
}

#[test]
fn bad_input_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, "{\"dim\": 2,\n \"vertices\": [[0, 0]").unwrap();
    let out = framesaddle(&["analyze", s(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let mut missing = triangle();
    missing.as_object_mut().unwrap().remove("edges");
    let path = write_json(tmp.path(), "missing.json", &missing);
    let out = framesaddle(&["analyze", s(&path)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("edges"));

    assert_eq!(
        code(&framesaddle(&[
            "analyze",
            s(&tmp.path().join("absent.json"))
        ])),
        2
    );
    assert_eq!(code(&framesaddle(&["analyze"])), 2);
    assert_eq!(code(&framesaddle(&["--fixture", "pentagon", "analyze"])), 2);

    let config = tmp.path().join("bad.toml");
    std::fs::write(&config, "[search]\nstepsize = 0.1\n").unwrap();
    assert_eq!(
        code(&framesaddle(&[
            "--fixture",
            "four-bar",
            "--config",
            s(&config),
            "analyze"
        ])),
        2
    );
}

#[test]
fn search_writes_result_history_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let result = read_json(&four_bar_result(tmp.path()));
    assert_eq!(result["converged"], true);
    assert_eq!(result["certificate"]["index"], 1);
    assert_eq!(result["certificate"]["certified"], true);
    assert_eq!(result["framework"]["vertices"].as_array().unwrap().len(), 4);
    assert!(result.get("wall_time_s").is_none());

    let history = std::fs::read_to_string(tmp.path().join("history.csv")).unwrap();
    let mut lines = history.lines();
    assert_eq!(
        lines.next(),
        Some("iter,energy,move_norm,constraint_inf,kkt_residual")
    );
    assert_eq!(
        lines.count(),
        result["iterations"].as_u64().unwrap() as usize + 1
    );

    let manifest = read_json(&tmp.path().join("manifest.json"));
    assert_eq!(manifest["command"], "search");
    assert_eq!(manifest["input"], "fixture:four-bar");
    assert!(manifest["wall_time_s"].as_f64().unwrap() >= 0.0);
    let mut files: Vec<&str> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap())
        .collect();
    files.sort();
    assert_eq!(
        files,
        [
            "config.snapshot.json",
            "history.csv",
            "manifest.json",
            "result.json"
        ]
    );
    for f in files {
        assert!(tmp.path().join(f).exists());
    }
}

#[test]
fn heptagon_search_certifies_a_two_dimensional_flex_space() {
    let tmp = tempfile::tempdir().unwrap();
    let out = framesaddle(&[
        "--fixture",
        "heptagon-2",
        "--out-dir",
        s(tmp.path()),
        "search",
    ]);
    assert_eq!(code(&out), 0);
    let cert = &read_json(&tmp.path().join("result.json"))["certificate"];
    assert_eq!(cert["nontrivial_flex_dim"], 2);
    assert_eq!(cert["self_stress_dim"], 1);
    assert_eq!(cert["realizable_directions"].as_array().unwrap().len(), 2);
}

#[test]
fn manifest_snapshot_reproduces_the_result() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let out = framesaddle(&[
        "--fixture",
        "four-bar",
        "--seed",
        "5",
        "--out-dir",
        s(&a),
        "search",
        "--starts",
        "4",
        "--perturbation",
        "3",
        "--step-size",
        "0.05",
    ]);
    assert_eq!(code(&out), 0);
    let snapshot = a.join("config.snapshot.json");
    let out = framesaddle(&[
        "--fixture",
        "four-bar",
        "--config",
        s(&snapshot),
        "--out-dir",
        s(&b),
        "search",
    ]);
    assert_eq!(code(&out), 0);
    let ra = std::fs::read(a.join("result.json")).unwrap();
    let rb = std::fs::read(b.join("result.json")).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(
        read_json(&a.join("result.json"))["starts"]
            .as_array()
            .unwrap()
            .len(),
        4
    );
}

#[test]
fn parallel_starts_match_serial_starts() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (dir, extra) in [(&a, None), (&b, Some("--parallel"))] {
        let mut args = vec![
            "--fixture",
            "four-bar",
            "--out-dir",
            s(dir),
            "search",
            "--starts",
            "6",
        ];
        args.extend(extra);
        assert_eq!(code(&framesaddle(&args)), 0);
    }
    assert_eq!(
        std::fs::read(a.join("result.json")).unwrap(),
        std::fs::read(b.join("result.json")).unwrap()
    );
}

#[test]
fn index_out_of_range_exits_with_2_before_searching() {
    let tmp = tempfile::tempdir().unwrap();
    let out = framesaddle(&[
        "--fixture",
        "four-bar",
        "--out-dir",
        s(tmp.path()),
        "search",
        "--k",
        "2",
    ]);
    assert_eq!(code(&out), 2);
    assert!(!tmp.path().join("result.json").exists());
    let out = framesaddle(&[
        "--fixture",
        "four-bar",
        "--out-dir",
        s(tmp.path()),
        "search",
        "--k",
        "0",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn non_convergence_exits_with_3_and_keeps_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = framesaddle(&[
        "--fixture",
        "four-bar",
        "--out-dir",
        s(tmp.path()),
        "search",
        "--max-iters",
        "5",
    ]);
    assert_eq!(code(&out), 3);
    let result = read_json(&tmp.path().join("result.json"));
    assert_eq!(result["converged"], false);
    assert!(result["failure_reason"].is_string());
    let history = std::fs::read_to_string(tmp.path().join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 7);
    assert!(tmp.path().join("manifest.json").exists());
}

#[test]
fn follow_writes_one_line_per_step() {
    let tmp = tempfile::tempdir().unwrap();
    let result = four_bar_result(&tmp.path().join("search"));
    let dir = tmp.path().join("follow");
    let out = framesaddle(&[
        "--out-dir",
        s(&dir),
        "follow",
        s(&result),
        "--direction",
        "0",
        "--steps",
        "50",
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(dir.join("path.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 51);
    for (i, line) in text.lines().enumerate() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert!(v["residual"].as_f64().unwrap() < 1e-8);
        assert_eq!(v["coords"].as_array().unwrap().len(), 8);
        if i == 0 {
            assert_eq!(v["t"], 0.0);
        }
    }

    let out = framesaddle(&["--out-dir", s(&dir), "follow", s(&result), "--steps", "0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        std::fs::read_to_string(dir.join("path.jsonl"))
            .unwrap()
            .lines()
            .count(),
        1
    );
}

#[test]
fn follow_errors_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let result = four_bar_result(&tmp.path().join("search"));
    let dir = tmp.path().join("follow");

    let out = framesaddle(&[
        "--out-dir",
        s(&dir),
        "follow",
        s(&result),
        "--direction",
        "2",
    ]);
    assert_eq!(code(&out), 2);

    // a flex that fails the stress test has no branch to follow
    let out = framesaddle(&[
        "--out-dir",
        s(&dir),
        "follow",
        s(&result),
        "--coeffs",
        "1,0",
    ]);
    assert_eq!(code(&out), 4);
    let text = std::fs::read_to_string(dir.join("path.jsonl")).unwrap();
    assert!(text.lines().count() < 51);

    let out = framesaddle(&[
        "--out-dir",
        s(&dir),
        "follow",
        s(&result),
        "--coeffs",
        "1,0,0",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn follow_draws_first_and_last_frames() {
    let tmp = tempfile::tempdir().unwrap();
    let result = four_bar_result(&tmp.path().join("search"));
    let dir = tmp.path().join("follow");
    let out = framesaddle(&[
        "--out-dir",
        s(&dir),
        "follow",
        s(&result),
        "--svg",
        "--sign",
        "-1",
    ]);
    assert_eq!(code(&out), 0);
    for name in ["path_first.svg", "path_last.svg"] {
        let svg = std::fs::read_to_string(dir.join(name)).unwrap();
        assert_eq!(svg.matches("<line").count(), 4);
        assert!(svg.matches("class=\"arrow\"").count() >= 1);
    }
    let files = read_json(&dir.join("manifest.json"))["files"].clone();
    assert!(files
        .as_array()
        .unwrap()
        .iter()
        .any(|f| f == "path_last.svg"));

    let out = framesaddle(&[
        "--out-dir",
        s(&dir),
        "render",
        s(&result),
        "--path",
        s(&dir.join("path.jsonl")),
        "--frame",
        "3",
    ]);
    assert_eq!(code(&out), 0);
    let out = framesaddle(&[
        "--out-dir",
        s(&dir),
        "render",
        s(&result),
        "--path",
        s(&dir.join("path.jsonl")),
        "--frame",
        "99",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn stress_test_reports_rays_and_checks_coefficients() {
    let tmp = tempfile::tempdir().unwrap();
    let result = four_bar_result(tmp.path());
    let out = framesaddle(&["--json", "stress-test", s(&result), "--coeffs", "1,0"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["solved"], true);
    let rays = v["realizable_directions"].as_array().unwrap();
    assert_eq!(rays.len(), 2);
    assert_eq!(v["check"]["passes"], false);

    let ray: Vec<String> = rays[0]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.to_string())
        .collect();
    let out = framesaddle(&[
        "--json",
        "stress-test",
        s(&result),
        "--coeffs",
        &ray.join(","),
    ]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["check"]["passes"], true);
}

#[test]
fn certify_reports_the_certificate_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let result = four_bar_result(&tmp.path().join("search"));
    let dir = tmp.path().join("certify");
    let out = framesaddle(&["--json", "--out-dir", s(&dir), "certify", s(&result)]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rigidity_rank"], 3);
    assert_eq!(v["degenerate"], false);
    assert_eq!(read_json(&dir.join("certificate.json")), v);

    // the generic starting state is not singular
    let v: Value = serde_json::from_slice(
        &framesaddle(&["--fixture", "four-bar", "--json", "certify"]).stdout,
    )
    .unwrap();
    assert_eq!(v["certified"], false);
}

#[test]
fn render_four_bar_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a.svg"), tmp.path().join("b.svg"));
    for p in [&a, &b] {
        assert_eq!(
            code(&framesaddle(&[
                "--fixture",
                "four-bar",
                "render",
                "-o",
                s(p)
            ])),
            0
        );
    }
    let svg = std::fs::read_to_string(&a).unwrap();
    assert_eq!(svg.matches("<line").count(), 4);
    assert_eq!(svg.matches("stroke-dasharray").count(), 1);
    assert_eq!(svg, std::fs::read_to_string(&b).unwrap());
    for label in ["A", "B", "C", "D"] {
        assert!(svg.contains(&format!(">{label}</text>")));
    }
}

#[test]
fn heptagon_flex_arrows_sit_at_d_e_f() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_json(
        tmp.path(),
        "singular.json",
        &heptagon_json(&HEPTAGON_1_EDGES, &HEPTAGON_1_SINGULAR),
    );
    for flex in ["0", "1"] {
        let out_svg = tmp.path().join(format!("flex{flex}.svg"));
        let out = framesaddle(&["render", s(&input), "--flex", flex, "-o", s(&out_svg)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let svg = std::fs::read_to_string(&out_svg).unwrap();
        assert_eq!(svg.matches("class=\"arrow\"").count(), 3);
        assert_eq!(svg.matches("<line").count(), 10);

        // arrows start at D, E and F
        let fw: framesaddle::Framework64 =
            fixtures::heptagon(&HEPTAGON_1_EDGES, &HEPTAGON_1_SINGULAR).unwrap();
        for v in [3, 4, 5] {
            let p = fw.config().vertex(v);
            let start = format!("d=\"M {:.4} {:.4} ", p[0], -p[1]);
            assert!(svg.contains(&start), "no arrow at vertex {v}");
        }
    }
    let out = framesaddle(&[
        "render",
        s(&input),
        "--flex",
        "2",
        "-o",
        s(&tmp.path().join("x.svg")),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn rendering_a_spatial_framework_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let tet = json!({
        "dim": 3,
        "vertices": [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]],
        "edges": [[0, 1], [1, 2], [2, 0], [0, 3], [1, 3]],
        "free_edge": 0,
        "pins": [{"vertex": 0, "axis": 0, "value": 0}, {"vertex": 0, "axis": 1, "value": 0},
                 {"vertex": 0, "axis": 2, "value": 0}, {"vertex": 1, "axis": 1, "value": 0},
                 {"vertex": 1, "axis": 2, "value": 0}, {"vertex": 2, "axis": 2, "value": 0}]
    });
    let input = write_json(tmp.path(), "tet.json", &tet);
    let out = framesaddle(&["render", s(&input), "-o", s(&tmp.path().join("t.svg"))]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("3D rendering is unsupported"));
    // analysis works in any dimension
    assert_eq!(code(&framesaddle(&["analyze", s(&input)])), 0);
}
