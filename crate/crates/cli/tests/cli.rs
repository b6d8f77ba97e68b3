use std::io::{Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dcgpann::Genome;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dcgpann(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcgpann"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .env_remove("DCGPANN_CACHE_DIR")
        .env_remove("DCGPANN_PMLB_URL")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const SMALL: &str = r#"{"dataset": {"friedman1": {"n_samples": 300, "noise_std": 0.5}},
    "population": 5, "cycles": 3, "iterations": 2, "repeat": 3, "curve_epochs": 4,
    "rows": 4, "cols": 3, "baseline_count": 20, "baseline_epochs": 2, "seed": 3}"#;

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn evolve_writes_every_artifact_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "small.json", SMALL);
    for out in ["a", "b"] {
        let o = dcgpann(&["evolve", "--config", "small.json", "--out", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("iteration 2"));
    }
    let a = dir.path().join("a");
    let header = std::fs::read_to_string(a.join("cycles.csv")).unwrap();
    assert!(header.starts_with("iteration,cycle,best_train_mse,selected_index,n_conn_mutations,n_func_mutations\n"));
    let cycles = csv_rows(&a.join("cycles.csv"));
    assert_eq!(cycles.len(), 6);
    assert_eq!((cycles[0][0].as_str(), cycles[0][1].as_str()), ("1", "1"));
    assert_eq!((cycles[5][0].as_str(), cycles[5][1].as_str()), ("2", "3"));

    for j in 1..=2 {
        let g = Genome::load(a.join(format!("best_genome_iter{j}.json"))).unwrap();
        assert!(g.is_valid());
        assert_eq!(g.shape.rows, 4);
    }
    assert!(!a.join("best_genome_iter3.json").exists());

    let curves = csv_rows(&a.join("curves.csv"));
    // template plus two iteration bests, 3 repeats, 4 epochs
    assert_eq!(curves.len(), 3 * 3 * 4);
    assert_eq!(curves[0][..3], ["0", "1", "0"]);
    assert!(curves.iter().all(|r| r[3].parse::<f64>().unwrap() >= 0.0));

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    let its = summary["iterations"].as_array().unwrap();
    assert_eq!(its.len(), 3);
    assert_eq!(its[0]["label"], "template");
    assert_eq!(its[0]["stats"]["compression_ratio"], 1.0);
    for it in its {
        let s = &it["stats"];
        let (t, act, dup) = (
            s["total_weights"].as_f64().unwrap(),
            s["active_weights"].as_f64().unwrap(),
            s["duplicate_connections"].as_f64().unwrap(),
        );
        assert!((s["compression_ratio"].as_f64().unwrap() - (act - dup) / t).abs() < 1e-12);
    }
    assert!(summary["evolved_vs_template"]["p_less"].is_number());

    for f in ["cycles.csv", "curves.csv", "summary.json", "best_genome_iter2.json"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(dir.path().join("b").join(f)).unwrap(),
            "{f} differs between identical runs"
        );
    }
    let o = dcgpann(
        &["evolve", "--config", "small.json", "--out", "c", "--seed", "4"],
        dir.path(),
    );
    assert!(o.status.success());
    assert_ne!(
        std::fs::read(a.join("cycles.csv")).unwrap(),
        std::fs::read(dir.path().join("c/cycles.csv")).unwrap()
    );
}

#[test]
fn baseline_counts_and_compares_with_an_evolve_run() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "small.json", SMALL);
    let o = dcgpann(&["baseline", "--config", "small.json", "--out", "base"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("base/baseline.csv"));
    assert_eq!(rows.len(), 20);
    assert_eq!(rows.iter().filter(|r| r[3] == "true").count(), 1);
    let s: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("base/baseline_summary.json")).unwrap()).unwrap();
    assert_eq!(s["retained"], 19);
    assert_eq!(s["epochs"], 2);
    assert!(s["evolved_vs_baseline"].is_null());

    let big = SMALL.replace("\"baseline_count\": 20", "\"baseline_count\": 100");
    write_config(dir.path(), "big.json", &big);
    assert!(dcgpann(&["evolve", "--config", "big.json", "--out", "run"], dir.path())
        .status
        .success());
    let o = dcgpann(&["baseline", "--config", "big.json", "--out", "run"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_rows(&dir.path().join("run/baseline.csv")).len(), 100);
    let s: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run/baseline_summary.json")).unwrap()).unwrap();
    assert_eq!(s["retained"], 95);
    let cmp = &s["evolved_vs_baseline"];
    assert_eq!(cmp["iteration"], 2);
    assert_eq!(cmp["epoch"], 4);
    assert!(cmp["rank_sum"]["p_two_sided"].as_f64().unwrap() > 0.0);
    assert!(stdout(&o).contains("evolved vs baseline"));
}

#[test]
fn demo_curves_agree_until_the_first_mutation() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "demo.json", SMALL);
    let o = dcgpann(
        &[
            "demo-perturb",
            "--config",
            "demo.json",
            "--out",
            "demo",
            "--threads",
            "2",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("demo/perturb.csv"));
    assert_eq!(rows.len(), 30);
    for r in &rows[..5] {
        assert_eq!(r[1], r[2]);
        assert_eq!(r[3], "false");
    }
    let mutated: Vec<&str> = rows.iter().filter(|r| r[3] == "true").map(|r| r[0].as_str()).collect();
    assert_eq!(mutated, ["6", "11", "16", "21", "26"]);
    assert_ne!(rows[5][1], rows[5][2]);
}

#[test]
fn analyze_reports_template_and_evolved_genomes() {
    let dir = tempfile::tempdir().unwrap();
    let template = Genome::template(10, &mut ChaCha8Rng::seed_from_u64(1));
    template.save(dir.path().join("template.json")).unwrap();
    let o = dcgpann(
        &["analyze", "template.json", "--mode", "skips-only", "--out", "dots"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("compression_ratio: 1.000000"), "{text}");
    assert!(text.contains("tanh=40"), "{text}");
    let dot = std::fs::read_to_string(dir.path().join("dots/template.skips.dot")).unwrap();
    assert!(dot.starts_with("digraph") && !dot.contains("->"));

    write_config(dir.path(), "small.json", SMALL);
    assert!(
        dcgpann(&["evolve", "--config", "small.json", "--out", "run"], dir.path())
            .status
            .success()
    );
    let o = dcgpann(&["analyze", "run/best_genome_iter2.json", "--out", "dots"], dir.path());
    assert!(o.status.success());
    let field = |name: &str| -> f64 {
        let text = stdout(&o);
        let line = text.lines().find(|l| l.starts_with(name)).unwrap().to_string();
        line.split_once(": ").unwrap().1.parse().unwrap()
    };
    let ratio = (field("active_weights") - field("duplicate_connections")) / field("total_weights");
    assert!((ratio - field("compression_ratio")).abs() < 1e-6);
    assert!(std::fs::read_to_string(dir.path().join("dots/best_genome_iter2.dot"))
        .unwrap()
        .contains("->"));

    std::fs::write(dir.path().join("broken.json"), "{\"shape\": 1}").unwrap();
    let o = dcgpann(&["analyze", "broken.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes_separate_usage_from_runtime_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dcgpann(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(dcgpann(&["evolve"], dir.path()).status.code(), Some(1));
    assert_eq!(dcgpann(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(
        dcgpann(&["evolve", "--config", "missing.json"], dir.path())
            .status
            .code(),
        Some(1)
    );

    write_config(
        dir.path(),
        "typo.json",
        r#"{"dataset": {"friedman1": {"n_samples": 100}}, "popsize": 4}"#,
    );
    let o = dcgpann(&["evolve", "--config", "typo.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("popsize"));

    write_config(
        dir.path(),
        "range.json",
        r#"{"dataset": {"friedman1": {"n_samples": 100}}, "mu_connections": 2.0}"#,
    );
    let o = dcgpann(&["baseline", "--config", "range.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mu_connections"));

    write_config(dir.path(), "nodata.json", r#"{"dataset": {"path": "nowhere.tsv"}}"#);
    assert_eq!(
        dcgpann(&["evolve", "--config", "nodata.json"], dir.path())
            .status
            .code(),
        Some(2)
    );
    write_config(dir.path(), "ok.json", SMALL);
    assert_eq!(
        dcgpann(&["evolve", "--config", "ok.json", "--threads", "0"], dir.path())
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn tsv_datasets_resolve_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("conf")).unwrap();
    let data = dcgpann::friedman1(120, 0.1, 2).unwrap();
    dcgpann::data::write_tsv(&data, dir.path().join("conf/f.tsv")).unwrap();
    let body = SMALL.replace(
        r#"{"friedman1": {"n_samples": 300, "noise_std": 0.5}}"#,
        r#"{"path": "f.tsv"}"#,
    );
    write_config(&dir.path().join("conf"), "tsv.json", &body);
    let o = dcgpann(&["evolve", "--config", "conf/tsv.json", "--out", "out"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
}

fn serve_once(body: Vec<u8>) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        let (mut s, _) = listener.accept().unwrap();
        let mut buf = [0u8; 2048];
        let _ = s.read(&mut buf).unwrap();
        let head = format!(
            "HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
            body.len()
        );
        s.write_all(head.as_bytes()).unwrap();
        s.write_all(&body).unwrap();
    });
    format!("http://{addr}/{{name}}.tsv")
}

#[test]
fn fetch_caches_and_reports_hits() {
    let dir = tempfile::tempdir().unwrap();
    let url = serve_once(b"x\ttarget\n1\t2\n3\t4\n".to_vec());
    let o = dcgpann(&["fetch", "toy", "--cache-dir", "cache", "--url", &url], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("downloaded"));
    assert!(dir.path().join("cache/toy/toy.tsv").is_file());

    // the server is gone; the second call must not need it
    let o = Command::new(env!("CARGO_BIN_EXE_dcgpann"))
        .args(["fetch", "toy", "--url", &url])
        .current_dir(dir.path())
        .env("DCGPANN_CACHE_DIR", dir.path().join("cache"))
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).contains("cache hit"));

    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let dead = format!("http://127.0.0.1:{port}/{{name}}.tsv");
    let o = dcgpann(&["fetch", "other", "--cache-dir", "cache", "--url", &dead], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("offline"), "{}", stderr(&o));
}
