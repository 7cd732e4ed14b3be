use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn kobacore(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kobacore"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("KOBACORE_THREADS", t),
        None => cmd.env_remove("KOBACORE_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ball_probe(seed: u64, output: &str) -> Value {
    json!({
        "experiment": "probe",
        "domain": {"family": "ball", "dim": 2},
        "sampler": {"quadruples": 200},
        "schedule": [2, 4, 8],
        "seed": seed,
        "output": output
    })
}

fn bidisc_probe(seed: u64, output: &str) -> Value {
    json!({
        "experiment": "probe",
        "domain": {"family": "polydisc", "radii": [1, 1]},
        "sampler": {"quadruples": 50, "planted": true},
        "schedule": [1, 2, 4, 8],
        "seed": seed,
        "output": output
    })
}

fn run_ok(config: &Path) -> (PathBuf, PathBuf) {
    let o = kobacore(&["run", config.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    let mut lines = out.lines().map(PathBuf::from);
    (lines.next().unwrap(), lines.next().unwrap())
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn validate_accepts_a_valid_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "ball.json", &ball_probe(1, "ball.csv"));
    let o = kobacore(&["validate", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "ok");
}

#[test]
fn validation_errors_exit_with_code_2() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ \"experiment\": ").unwrap();
    let o = kobacore(&["validate", bad.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("malformed JSON"));

    let mut neg = ball_probe(1, "x.csv");
    neg["schedule"] = json!([-1, 2, 4]);
    let o = kobacore(&["validate", write_config(dir.path(), "neg.json", &neg).to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("schedule strictly increasing"));

    let mut dec = ball_probe(1, "x.csv");
    dec["schedule"] = json!([4, 2]);
    let o = kobacore(&["run", write_config(dir.path(), "dec.json", &dec).to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));

    let mut fam = ball_probe(1, "x.csv");
    fam["domain"] = json!({"family": "torus", "d": 1});
    let o = kobacore(&["validate", write_config(dir.path(), "fam.json", &fam).to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("torus"));
    for f in ["ball", "polydisc", "halfplane", "pcone", "homogeneous_epigraph", "poly_epigraph", "projective"] {
        assert!(msg.contains(f), "{msg}");
    }

    let mut extra = ball_probe(1, "x.csv");
    extra["colour"] = json!("red");
    let o = kobacore(&["validate", write_config(dir.path(), "extra.json", &extra).to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"));

    let mut noseed = ball_probe(1, "x.csv");
    noseed.as_object_mut().unwrap().remove("seed");
    let o = kobacore(&["validate", write_config(dir.path(), "noseed.json", &noseed).to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));

    let missing = dir.path().join("missing.json");
    assert_eq!(kobacore(&["run", missing.to_str().unwrap()], None).status.code(), Some(2));
    assert_eq!(kobacore(&["run", write_config(dir.path(), "t.json", &ball_probe(1, "x.csv")).to_str().unwrap()], Some("zero")).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_code_3() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "experiment": "flats",
        "domain": {"family": "ball", "dim": 2},
        "x": [[1, 0], [0, 0]],
        "y": [[1, 0], [0, 0]],
        "schedule": [1, 2],
        "probe": "divergence",
        "seed": 0,
        "output": "flats.csv"
    });
    let o = kobacore(&["run", write_config(dir.path(), "flats.json", &cfg).to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("distinct"));
}

#[test]
fn probe_run_writes_csv_and_manifest_deterministically() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "ball.json", &ball_probe(11, "out/ball.csv"));
    let (csv, manifest) = run_ok(&cfg);
    assert_eq!(csv, dir.path().join("out/ball.csv"));
    let first = fs::read(&csv).unwrap();
    let (header, rows) = csv_rows(&csv);
    assert_eq!(&header[..3], &["scale", "delta", "w0_0"]);
    assert_eq!(header.len(), 2 + 16 + 4);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r[header.len() - 4], "exact");
        assert_eq!(r[header.len() - 3], "exact");
        assert_eq!(r[header.len() - 2], "11");
        let mantissa = r[1].split('e').next().unwrap();
        assert_eq!(mantissa.replace(['-', '.'], "").len(), 17, "{}", r[1]);
    }
    let m: Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["seed"], 11);
    assert_eq!(m["experiment"], "probe");
    assert_eq!(m["config"]["schedule"], json!([2, 4, 8]));
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert!(m["version"].as_str().unwrap().starts_with('v'));
    assert!(m["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(m["summary"]["verdict"], "bounded-consistent");

    run_ok(&cfg);
    assert_eq!(fs::read(&csv).unwrap(), first);
    let o = kobacore(&["run", cfg.to_str().unwrap()], Some("1"));
    assert!(o.status.success());
    assert_eq!(fs::read(&csv).unwrap(), first);

    let other = write_config(dir.path(), "ball12.json", &ball_probe(12, "out/ball12.csv"));
    let (csv12, _) = run_ok(&other);
    assert_ne!(fs::read(csv12).unwrap(), first);
}

#[test]
fn report_classifies_ball_and_bidisc() {
    let dir = TempDir::new().unwrap();
    let (_, mb) = run_ok(&write_config(dir.path(), "ball.json", &ball_probe(3, "ball.csv")));
    let (_, mp) = run_ok(&write_config(dir.path(), "bidisc.json", &bidisc_probe(3, "bidisc.csv")));
    let summary = dir.path().join("summary.csv");
    let merged = dir.path().join("merged.csv");
    let o = kobacore(
        &["report", mb.to_str().unwrap(), mp.to_str().unwrap(), "--summary", summary.to_str().unwrap(), "--merged", merged.to_str().unwrap()],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv_rows(&summary);
    let v = header.iter().position(|h| h == "verdict").unwrap();
    let w = header.iter().position(|h| h == "warning").unwrap();
    assert_eq!(rows[0][v], "bounded-consistent");
    assert_eq!(rows[1][v], "growing");
    assert!(rows.iter().all(|r| r[w].is_empty()));
    let (mh, mrows) = csv_rows(&merged);
    assert_eq!(mh[0], "source");
    assert_eq!(mrows.len(), 7);
}

#[test]
fn report_single_input_is_passthrough_and_flags_mixed_seeds() {
    let dir = TempDir::new().unwrap();
    let (csv, mb) = run_ok(&write_config(dir.path(), "ball.json", &ball_probe(3, "ball.csv")));
    let merged = dir.path().join("merged.csv");
    let o = kobacore(&["report", mb.to_str().unwrap(), "--merged", merged.to_str().unwrap()], None);
    assert!(o.status.success());
    assert_eq!(fs::read(&merged).unwrap(), fs::read(&csv).unwrap());
    assert!(String::from_utf8_lossy(&o.stdout).contains("bounded-consistent"));

    let (_, mp) = run_ok(&write_config(dir.path(), "bidisc.json", &bidisc_probe(4, "bidisc.csv")));
    let o = kobacore(&["report", mb.to_str().unwrap(), mp.to_str().unwrap()], None);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("mixed_seeds"));
    assert!(stderr(&o).contains("different seeds"));
}

#[test]
fn report_rejects_incompatible_inputs() {
    let dir = TempDir::new().unwrap();
    let (_, mb) = run_ok(&write_config(dir.path(), "ball.json", &ball_probe(3, "ball.csv")));
    let hilbert = json!({
        "experiment": "hilbert",
        "body": {"body": "disk"},
        "sampler": {"quadruples": 20},
        "schedule": [2, 4],
        "seed": 3,
        "output": "disk.csv"
    });
    let (_, mh) = run_ok(&write_config(dir.path(), "disk.json", &hilbert));
    let merged = dir.path().join("m.csv");
    let o = kobacore(&["report", mb.to_str().unwrap(), mh.to_str().unwrap(), "--merged", merged.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("incompatible"));

    let mut m: Value = serde_json::from_str(&fs::read_to_string(&mh).unwrap()).unwrap();
    m["version"] = json!("v9.9.9");
    fs::write(&mh, m.to_string()).unwrap();
    let o = kobacore(&["report", mb.to_str().unwrap(), mh.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn geodesic_sandwich_converge_and_flats_runs() {
    let dir = TempDir::new().unwrap();
    let geo = json!({
        "experiment": "geodesic",
        "domain": {"family": "ball"},
        "p": [[0, 0]],
        "q": [[0.5, 0]],
        "seed": 5,
        "output": "geo.csv"
    });
    let (csv, _) = run_ok(&write_config(dir.path(), "geo.json", &geo));
    let (header, rows) = csv_rows(&csv);
    assert_eq!(header, ["t", "z0_re", "z0_im", "cumulative_length", "estimator", "seed"]);
    let len: f64 = rows.last().unwrap()[3].parse().unwrap();
    assert!(len >= 0.5f64.atanh() - 1e-9 && len <= 2f64.ln() + 1e-6, "{len}");

    let sw = json!({
        "experiment": "sandwich",
        "domain": {"family": "polydisc", "radii": [1, 1]},
        "pairs": [[[[0, 0], [0, 0]], [[0.3, 0.1], [-0.2, 0.4]]], [[[0.1, 0], [0.5, 0]], [[0.1, 0], [0.5, 0]]]],
        "geodesic": {"nodes": 9, "max_nodes": 17},
        "seed": 5,
        "output": "sw.csv"
    });
    let (csv, manifest) = run_ok(&write_config(dir.path(), "sw.json", &sw));
    let (_, rows) = csv_rows(&csv);
    let lo: f64 = rows[0][1].parse().unwrap();
    let hi: f64 = rows[0][2].parse().unwrap();
    let ex: f64 = rows[0][5].parse().unwrap();
    assert!(lo <= ex + 1e-9 && ex <= hi + 1e-9);
    assert_eq!(rows[1][4], "trivial");
    let m: Value = serde_json::from_str(&fs::read_to_string(manifest).unwrap()).unwrap();
    assert_eq!(m["summary"]["records"][0]["estimator_tags"][1], "curve_length");

    let conv = json!({
        "experiment": "converge",
        "sequence": [{"family": "ball", "radius": 2}, {"family": "ball", "radius": 1.5}],
        "limit": {"family": "ball"},
        "radius": 2.5,
        "resolution": 64,
        "tangents": [[[[0, 0]], [[1, 0]]]],
        "seed": 0,
        "output": "conv.csv"
    });
    let (csv, _) = run_ok(&write_config(dir.path(), "conv.json", &conv));
    let (header, rows) = csv_rows(&csv);
    let k = header.iter().position(|h| h == "khat0").unwrap();
    for (r, (want_dh, want_k)) in rows.iter().zip([(1.0, 0.5), (0.5, 1.0 / 1.5)]) {
        let dh: f64 = r[1].parse().unwrap();
        let bar: f64 = r[2].parse().unwrap();
        assert!((dh - want_dh).abs() <= bar);
        assert!((r[k].parse::<f64>().unwrap() - want_k).abs() < 1e-12);
    }

    let flats = json!({
        "experiment": "flats",
        "domain": {"family": "ball", "dim": 2},
        "x": [[1, 0], [0, 0]],
        "y": [[0, 0], [1, 0]],
        "schedule": [1, 2, 3],
        "probe": "divergence",
        "seed": 0,
        "output": "flats.csv"
    });
    let (csv, manifest) = run_ok(&write_config(dir.path(), "flats.json", &flats));
    let (_, rows) = csv_rows(&csv);
    assert_eq!(rows.len(), 3);
    let m: Value = serde_json::from_str(&fs::read_to_string(manifest).unwrap()).unwrap();
    assert!(m["summary"]["slope"].as_f64().unwrap() > 0.2);
}
