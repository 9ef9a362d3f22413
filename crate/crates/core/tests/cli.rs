use std::path::{Path, PathBuf};
use std::process::Command;

use posmap::cli::{run_args, Outcome};
use posmap::io::{self, MatrixFile};
use posmap::matcore::{bell_projector, swap_operator};
use posmap::{BipartiteOperator, CMatrix, QMap};
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Outcome {
    run_args(std::iter::once("posmap").chain(args.iter().copied()))
}

fn write_file(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn write_op(dir: &Path, name: &str, b: &BipartiteOperator) -> String {
    write_file(dir, name, &io::to_json(&MatrixFile::from_bipartite(b)))
}

fn report(out: &Outcome) -> Value {
    serde_json::from_str(out.stdout.as_deref().expect("stdout")).expect("one JSON document")
}

fn verdict<'a>(r: &'a Value, property: &str) -> &'a Value {
    r["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["property"] == property)
        .unwrap_or_else(|| panic!("no verdict {property}"))
}

fn status<'a>(r: &'a Value, property: &str) -> &'a str {
    verdict(r, property)["status"].as_str().unwrap()
}

fn without_runtime(text: &str) -> Value {
    let mut v: Value = serde_json::from_str(text).unwrap();
    v.as_object_mut().unwrap().remove("runtime_ms");
    v
}

#[test]
fn classify_swap_identity_and_maximally_mixed() {
    let dir = TempDir::new().unwrap();
    let swap = write_op(dir.path(), "swap.json", &swap_operator(2));
    let out = run(&["classify-map", "--in", &swap, "--restarts", "16"]);
    assert_eq!(out.code, 0, "{:?}", out.stderr);
    let r = report(&out);
    assert_eq!(status(&r, "block-positive"), "no-violation-found");
    assert_eq!(status(&r, "completely-positive"), "certified-no");
    assert_eq!(status(&r, "completely-copositive"), "certified-yes");
    assert_eq!(status(&r, "decomposable"), "certified-yes");
    assert_eq!(verdict(&r, "completely-positive")["witness"]["kind"], "eigenvector");

    let id = write_op(dir.path(), "id.json", QMap::identity(2).choi());
    let r = report(&run(&["classify-map", "--in", &id, "--restarts", "16"]));
    assert_eq!(status(&r, "completely-positive"), "certified-yes");
    assert_eq!(status(&r, "member-D"), "certified-yes");

    let half = BipartiteOperator::new(CMatrix::identity(4).scale_re(0.5), 2, 2).unwrap();
    let mixed = write_op(dir.path(), "mixed.json", &half);
    let r = report(&run(&["classify-map", "--in", &mixed, "--restarts", "16"]));
    for p in ["block-positive", "1-positive", "completely-positive", "completely-copositive", "decomposable"] {
        assert_eq!(status(&r, p), "certified-yes", "{p}");
    }
}

#[test]
fn classify_kraus_and_superop_inputs() {
    let dir = TempDir::new().unwrap();
    let x = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
    let s = 0.5f64.sqrt();
    let list = format!(
        "[{},{}]",
        io::to_json(&MatrixFile::from_matrix(&CMatrix::identity(2).scale_re(s), None)),
        io::to_json(&MatrixFile::from_matrix(&x.scale_re(s), None))
    );
    let kraus = write_file(dir.path(), "kraus.json", &list);
    let out = run(&["classify-map", "--in", &kraus, "--rep", "kraus", "--restarts", "8"]);
    assert_eq!(out.code, 0, "{:?}", out.stderr);
    let r = report(&out);
    assert_eq!(status(&r, "completely-positive"), "certified-yes");
    assert_eq!(r["details"]["unital"], true);

    let sup = QMap::transpose(2).superop();
    let sp = write_file(dir.path(), "s.json", &io::to_json(&MatrixFile::from_matrix(&sup, None)));
    let r = report(&run(&["classify-map", "--in", &sp, "--rep", "superop", "--restarts", "8"]));
    assert_eq!(status(&r, "completely-positive"), "certified-no");
    assert_eq!(status(&r, "completely-copositive"), "certified-yes");
}

#[test]
fn analyze_bell_product_werner_and_separable() {
    let dir = TempDir::new().unwrap();
    let bell = bell_projector(2).map_mat(|m| m.scale_re(0.5));
    let f = write_op(dir.path(), "bell.json", &bell);
    let out = run(&["analyze-state", "--in", &f, "--samples", "20"]);
    assert_eq!(out.code, 0, "{:?}", out.stderr);
    let r = report(&out);
    assert_eq!(status(&r, "ppt"), "certified-no");
    assert_eq!(verdict(&r, "ppt")["witness"]["kind"], "eigenvector");
    assert_eq!(status(&r, "state-reconstruction-identity"), "certified-yes");
    assert_eq!(status(&r, "entanglement-operator-normalization"), "certified-yes");
    assert!(r["details"]["identity"]["phi_residual"].as_f64().unwrap() < 1e-9);

    let a = CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
    let b = CMatrix::from_real(3, 3, &[0.5, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0]).unwrap();
    let f = write_op(dir.path(), "prod.json", &BipartiteOperator::product(&a, &b).unwrap());
    let r = report(&run(&["analyze-state", "--in", &f, "--samples", "5"]));
    assert_eq!(status(&r, "ppt"), "certified-yes");

    for (p, want) in [("0.25", "certified-yes"), ("0.333333", "certified-yes"), ("0.5", "certified-no")] {
        let g = run(&["gen", "--kind", "werner", "--dims", "2,2", "--p", p]);
        assert_eq!(g.code, 0);
        let f = write_file(dir.path(), "w.json", g.stdout.as_deref().unwrap());
        let r = report(&run(&["analyze-state", "--in", &f, "--samples", "5"]));
        assert_eq!(status(&r, "ppt"), want, "p = {p}");
    }

    let g = run(&["gen", "--kind", "separable", "--n", "5", "--dims", "2,3", "--seed", "4"]);
    let f = write_file(dir.path(), "sep.json", g.stdout.as_deref().unwrap());
    let r = report(&run(&["analyze-state", "--in", &f, "--samples", "5"]));
    assert_eq!(status(&r, "ppt"), "certified-yes");
}

fn interval(v: &Value) -> (f64, f64) {
    let w = &v["witness"];
    assert_eq!(w["kind"], "interval");
    (w["lower"].as_f64().unwrap(), w["upper"].as_f64().unwrap())
}

#[test]
fn norms_examples() {
    let dir = TempDir::new().unwrap();
    let one = write_op(dir.path(), "one.json", &BipartiteOperator::new(CMatrix::identity(4), 2, 2).unwrap());
    let r = report(&run(&["norms", "--in", &one, "--which", "pi"]));
    let (lo, hi) = interval(verdict(&r, "pi-norm"));
    assert!(lo <= 2.0 + 1e-6 && hi >= 2.0 - 1e-6);

    let zero = write_op(dir.path(), "zero.json", &BipartiteOperator::new(CMatrix::zeros(4, 4), 2, 2).unwrap());
    let out = run(&["norms", "--in", &zero]);
    assert_eq!(out.code, 0, "{:?}", out.stderr);
    let r = report(&out);
    for p in ["pi-norm", "epsilon-norm", "alpha-norm"] {
        assert_eq!(interval(verdict(&r, p)), (0.0, 0.0), "{p}");
    }

    let choi = write_op(dir.path(), "choi.json", QMap::identity(2).choi());
    let r = report(&run(&["norms", "--in", &choi, "--which", "alpha"]));
    let (lo, hi) = interval(verdict(&r, "alpha-norm"));
    assert!(lo <= 1.0 + 1e-9 && hi >= 1.0 - 1e-9);

    let r = report(&run(&["norms", "--in", &choi]));
    assert_eq!(status(&r, "duality-pairing-bound"), "certified-yes");
    assert!(r["details"]["duality"].is_object());

    let rect = write_op(dir.path(), "rect.json", &BipartiteOperator::new(CMatrix::identity(6), 2, 3).unwrap());
    let out = run(&["norms", "--in", &rect]);
    assert_eq!(out.code, 0);
    let r = report(&out);
    assert!(r["details"].get("alpha").is_none());
    // Operator norm on the first factor, trace norm on the second.
    let (lo, hi) = interval(verdict(&r, "pi-norm"));
    assert!(lo <= 3.0 + 1e-6 && hi >= 3.0 - 1e-6);
}

#[test]
fn rn_examples() {
    let dir = TempDir::new().unwrap();
    let g = run(&["gen", "--kind", "cpmap", "--dims", "2,2", "--seed", "9", "--n", "4"]);
    let psi_text = g.stdout.unwrap();
    let psi = io::parse_matrix_file(&psi_text).unwrap().to_bipartite().unwrap();
    let half = psi.map_mat(|m| m.scale_re(0.5));
    let psi_f = write_file(dir.path(), "psi.json", &psi_text);
    let phi_f = write_op(dir.path(), "phi.json", &half);
    let out = run(&["rn", "--phi", &phi_f, "--psi", &psi_f]);
    assert_eq!(out.code, 0, "{:?}", out.stderr);
    let r = report(&out);
    assert_eq!(status(&r, "completely-absolutely-continuous"), "certified-yes");
    assert!(r["details"]["reconstruction_residual"].as_f64().unwrap() < 1e-10);
    let d: MatrixFile = serde_json::from_value(r["details"]["derivative"].clone()).unwrap();
    // Four Kraus operators on C^2 give a full-rank Choi, so D = I / 2.
    assert!(d.to_matrix().unwrap().max_diff(&CMatrix::identity(4).scale_re(0.5)) < 1e-10);

    let dep = write_op(dir.path(), "dep.json", QMap::completely_depolarizing(2).choi());
    let id = write_op(dir.path(), "id.json", QMap::identity(2).choi());
    let out = run(&["rn", "--phi", &dep, "--psi", &id]);
    assert_eq!(out.code, 5);
    let r = report(&out);
    assert_eq!(status(&r, "completely-absolutely-continuous"), "certified-no");
    assert_eq!(verdict(&r, "completely-absolutely-continuous")["witness"]["kind"], "matrix");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = write_file(dir.path(), "bad.json", "{\"rows\": 2, \"cols\":");
    let out = run(&["classify-map", "--in", &bad]);
    assert_eq!(out.code, 2);
    assert!(out.stdout.is_none());
    assert_eq!(out.stderr.as_deref().unwrap().lines().count(), 1);

    let short = write_file(dir.path(), "short.json", r#"{"rows": 2, "cols": 2, "data": [[1,0],[0,0],[0,0]]}"#);
    assert_eq!(run(&["classify-map", "--in", &short]).code, 3);

    let mismatch = write_file(
        dir.path(),
        "mm.json",
        r#"{"rows": 2, "cols": 2, "d1": 2, "d2": 2, "data": [[1,0],[0,0],[0,0],[1,0]]}"#,
    );
    assert_eq!(run(&["analyze-state", "--in", &mismatch]).code, 3);

    let nodims = write_file(dir.path(), "nd.json", r#"{"rows": 1, "cols": 1, "data": [[1,0]]}"#);
    assert_eq!(run(&["analyze-state", "--in", &nodims]).code, 3);

    let swap = write_op(dir.path(), "swap.json", &swap_operator(2));
    assert_eq!(run(&["analyze-state", "--in", &swap]).code, 4);
    let twice = write_op(dir.path(), "twice.json", &bell_projector(2));
    assert_eq!(run(&["analyze-state", "--in", &twice]).code, 4);

    let rect = write_op(dir.path(), "rect.json", &BipartiteOperator::new(CMatrix::identity(6), 2, 3).unwrap());
    assert_eq!(run(&["norms", "--in", &rect, "--which", "alpha"]).code, 3);
    assert_eq!(run(&["norms", "--in", &rect, "--which", "pi", "--rmax", "0"]).code, 2);

    let id = write_op(dir.path(), "id.json", QMap::identity(2).choi());
    assert_eq!(run(&["rn", "--phi", &swap, "--psi", &id]).code, 3);
    assert_eq!(run(&["classify-map", "--in", &id, "--k", "3"]).code, 2);
    assert_eq!(run(&["gen", "--kind", "werner", "--dims", "2,2"]).code, 2);
    assert_eq!(run(&["gen", "--kind", "werner", "--dims", "2,3", "--p", "0.1"]).code, 3);
    assert_eq!(run(&["gen", "--kind", "state", "--dims", "2"]).code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
    assert_eq!(run(&["classify-map", "--in", "/definitely/not/here.json"]).code, 2);
}

#[test]
fn gen_round_trip_and_determinism() {
    for kind in ["state", "separable", "cpmap"] {
        let a = run(&["gen", "--kind", kind, "--dims", "2,3", "--seed", "11"]);
        let b = run(&["gen", "--kind", kind, "--dims", "2,3", "--seed", "11"]);
        assert_eq!(a.code, 0);
        assert_eq!(a.stdout, b.stdout);
        let text = a.stdout.unwrap();
        let parsed = io::parse_matrix_file(&text).unwrap();
        assert_eq!(io::to_json(&parsed), text);
        assert_eq!(parsed.dims(), Some((2, 3)));
        let c = run(&["gen", "--kind", kind, "--dims", "2,3", "--seed", "12"]);
        assert_ne!(c.stdout.unwrap(), text);
    }
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let g = run(&["gen", "--kind", "state", "--dims", "2,2", "--seed", "3"]);
    let f = write_file(dir.path(), "s.json", g.stdout.as_deref().unwrap());
    for args in [
        vec!["classify-map", "--in", &f, "--restarts", "8", "--seed", "5"],
        vec!["analyze-state", "--in", &f, "--samples", "10", "--seed", "5"],
        vec!["norms", "--in", &f, "--seed", "5"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.code, 0, "{args:?}: {:?}", a.stderr);
        assert_eq!(without_runtime(a.stdout.as_deref().unwrap()), without_runtime(b.stdout.as_deref().unwrap()));
        let r = report(&a);
        assert_eq!(r["seed"], 5);
        assert!(r["tolerances"].is_object());
        assert!(r["runtime_ms"].is_u64());
    }
}

#[test]
fn binary_streams_and_seed_env() {
    let exe = PathBuf::from(env!("CARGO_BIN_EXE_posmap"));
    let out = Command::new(&exe)
        .args(["gen", "--kind", "state", "--dims", "2,2"])
        .env("POSMAP_SEED", "21")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stderr.is_empty());
    let via_flag = run(&["gen", "--kind", "state", "--dims", "2,2", "--seed", "21"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim_end(), via_flag.stdout.unwrap());

    let out = Command::new(&exe).args(["norms", "--in", "/nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert_eq!(String::from_utf8(out.stderr).unwrap().lines().count(), 1);
}
