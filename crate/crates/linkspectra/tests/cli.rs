//! Binary-level tests: artifacts, determinism, round trips and error output.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use linkspectra::formats::stream_file;
use linkspectra::formats::tables::read_grid;
use linkspectra_core::LinkStreamMatrix;
use serde_json::Value;
use tempfile::TempDir;

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn write(&self, rel: &str, text: &str) -> PathBuf {
        let p = self.path(rel);
        fs::write(&p, text).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_linkspectra")).args(args).current_dir(self.dir.path()).output().unwrap()
    }

    fn ok(&self, args: &[&str]) -> Value {
        let out = self.run(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice(&out.stdout).unwrap()
    }

    fn stream(&self, rel: &str) -> LinkStreamMatrix {
        let p = self.path(rel);
        stream_file::read_csv(fs::File::open(&p).unwrap(), &p).unwrap()
    }

    fn bytes(&self, rel: &str) -> Vec<u8> {
        fs::read(self.path(rel)).unwrap()
    }
}

fn grid(path: &Path) -> linkspectra_core::RealMatrix {
    read_grid(fs::File::open(path).unwrap(), path).unwrap().2
}

#[test]
fn ingest_writes_dense_stream_and_config() {
    let sb = Sandbox::new();
    sb.write("links.csv", "t,u,v,w\n0,a,b,1\n1,b,c,2\n1,b,c,0.5\n7,c,a,1\n");
    let summary = sb.ok(&["ingest", "--input", "links.csv", "--window", "0:4", "--out", "o"]);
    assert_eq!(summary["nonzero"], 2);
    assert_eq!(summary["len"], 4);
    let s = sb.stream("o/stream.csv");
    assert_eq!(s.values().get(1, 4 + 2), 2.5);
    let cfg: Value = serde_json::from_slice(&sb.bytes("o/config.json")).unwrap();
    assert_eq!(cfg["command"], "ingest");
    assert_eq!(cfg["window"]["len"], 4);
}

#[test]
fn dropped_records_are_reported() {
    let sb = Sandbox::new();
    sb.write("links.csv", "0,a,b\n9,b,a\n");
    let out = sb.run(&["ingest", "--input", "links.csv", "--window", "0:2", "--out", "o"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("dropped 1 records"));
}

#[test]
fn malformed_input_gives_error_json() {
    let sb = Sandbox::new();
    sb.write("bad.csv", "0,a,b\n1,a,b\n2,a,b,heavy\n");
    let out = sb.run(&["ingest", "--input", "bad.csv", "--out", "o"]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "malformed_record");
    assert_eq!(err["line"], 3);

    sb.write("empty.csv", "");
    let out = sb.run(&["ingest", "--input", "empty.csv", "--out", "o"]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "format");
}

#[test]
fn csv_and_ndjson_ingest_identically() {
    let sb = Sandbox::new();
    sb.write("a.csv", "2,x,y,0.5\n3,y,z\n2,x,y,0.25\n");
    sb.write("a.ndjson", "{\"t\":2,\"u\":\"x\",\"v\":\"y\",\"w\":0.5}\n{\"t\":3,\"u\":\"y\",\"v\":\"z\"}\n{\"t\":2,\"u\":\"x\",\"v\":\"y\",\"w\":0.25}\n");
    sb.ok(&["ingest", "--input", "a.csv", "--out", "c"]);
    sb.ok(&["ingest", "--input", "a.ndjson", "--out", "n"]);
    assert_eq!(sb.bytes("c/stream.csv"), sb.bytes("n/stream.csv"));
}

#[test]
fn exported_streams_reingest() {
    let sb = Sandbox::new();
    sb.ok(&["synth", "daynight", "--len", "40", "--seed", "3", "--out", "csv"]);
    sb.ok(&["synth", "daynight", "--len", "40", "--seed", "3", "--emit", "raw", "--out", "raw"]);
    let from_csv = sb.stream("csv/stream.csv");
    sb.ok(&["ingest", "--input", "raw/stream.bin", "--out", "back"]);
    assert_eq!(sb.stream("back/stream.csv"), from_csv);
    sb.ok(&["ingest", "--input", "csv/stream.csv", "--emit", "raw", "--out", "back_raw"]);
    assert_eq!(sb.bytes("back_raw/stream.bin"), sb.bytes("raw/stream.bin"));

    // A filtered (weighted) stream survives the CSV round trip.
    sb.ok(&["filter", "--input", "csv/stream.csv", "--freq", "lowpass:0.1", "--out", "f"]);
    let filtered = sb.stream("f/filtered.csv");
    sb.ok(&["ingest", "--input", "f/filtered.csv", "--out", "f2"]);
    assert!(sb.stream("f2/stream.csv").values().max_abs_diff(filtered.values()) < 1e-12);
}

#[test]
fn seed_determines_output_bytes() {
    let sb = Sandbox::new();
    for out in ["a", "b"] {
        sb.ok(&["synth", "sbm", "--seed", "11", "--out", out]);
    }
    sb.ok(&["synth", "sbm", "--seed", "12", "--out", "c"]);
    assert_eq!(sb.bytes("a/stream.csv"), sb.bytes("b/stream.csv"));
    assert_ne!(sb.bytes("a/stream.csv"), sb.bytes("c/stream.csv"));
    for out in ["d1", "d2"] {
        sb.ok(&["decompose", "--input", "a/stream.csv", "--seed", "5", "--out", out]);
    }
    for f in ["tree.json", "coefficients.csv", "coefficients_magnitude.csv", "time_structure.csv"] {
        assert_eq!(sb.bytes(&format!("d1/{f}")), sb.bytes(&format!("d2/{f}")), "{f}");
    }
}

#[test]
fn decompose_bundle_on_oscillating_fixture() {
    let sb = Sandbox::new();
    sb.ok(&["synth", "oscillating", "--len", "32", "--out", "osc"]);
    let summary = sb.ok(&["decompose", "--input", "osc/stream.csv", "--basis", "osc/tree.json", "--level", "3", "--out", "d"]);
    assert_eq!(summary["support"], 4);
    let c = grid(&sb.path("d/coefficients_magnitude.csv"));
    assert_eq!((c.rows(), c.cols()), (32, 16));
    let expected = 32f64.sqrt() * 8f64.sqrt() / 2.0;
    for (u, k) in [(0, 0), (0, 1), (16, 0), (16, 1)] {
        assert!((c.get(u, k) - expected).abs() < 1e-12);
    }
    let f = grid(&sb.path("d/freq_magnitude.csv"));
    assert_eq!((f.rows(), f.cols()), (32, 16));
    let x = grid(&sb.path("d/time_structure.csv"));
    assert_eq!((x.rows(), x.cols()), (32, 16));
    let text = fs::read_to_string(sb.path("d/coefficients.csv")).unwrap();
    assert!(text.starts_with("u,freq,element,re,im\n0,0,s3_0,"));
    assert_eq!(sb.stream("d/stream.csv"), sb.stream("osc/stream.csv"));
}

#[test]
fn decompose_zero_stream_gives_zero_grids() {
    let sb = Sandbox::new();
    let mut text = String::from("t,0->0,0->1,1->0,1->1\n");
    for t in 0..8 {
        text.push_str(&format!("{t},0,0,0,0\n"));
    }
    sb.write("zero.csv", &text);
    let summary = sb.ok(&["decompose", "--input", "zero.csv", "--out", "d"]);
    assert_eq!(summary["support"], 0);
    for f in ["time_structure.csv", "freq_magnitude.csv", "coefficients_magnitude.csv"] {
        let g = grid(&sb.path(&format!("d/{f}")));
        assert!(g.as_slice().iter().all(|&v| v == 0.0), "{f}");
    }
}

#[test]
fn aggregate_window_two_is_constant_clique() {
    let sb = Sandbox::new();
    sb.ok(&["synth", "oscillating", "--len", "32", "--out", "osc"]);
    let summary = sb.ok(&["aggregate", "--input", "osc/stream.csv", "--window", "2", "--out", "agg"]);
    assert!(summary["response_at_half"].as_f64().unwrap() < 1e-12);
    let agg = sb.stream("agg/aggregated.csv");
    assert!(agg.values().as_slice().iter().all(|&v| v == 1.0));
}

#[test]
fn joint_filter_dc_coarse() {
    let sb = Sandbox::new();
    sb.ok(&["synth", "oscillating", "--len", "16", "--out", "osc"]);
    sb.ok(&[
        "filter", "--input", "osc/stream.csv", "--basis", "osc/tree.json", "--level", "3", "--freq", "dc", "--struct",
        "coarse", "--out", "f",
    ]);
    let s = sb.stream("f/filtered.csv");
    assert!(s.values().as_slice().iter().all(|&v| (v - 0.5).abs() < 1e-12));
}

#[test]
fn filter_files_match_presets() {
    let sb = Sandbox::new();
    sb.ok(&["synth", "oscillating", "--len", "16", "--out", "osc"]);
    let mut freq = String::from("u,re,im\n");
    for u in 0..16 {
        freq.push_str(&format!("{u},{},0\n", if u == 0 { 1 } else { 0 }));
    }
    sb.write("dc.csv", &freq);
    let mut structural = String::from("element,value\n");
    for l in 1..=3 {
        for k in 0..(16 >> l) {
            structural.push_str(&format!("w{l}_{k},0\n"));
        }
    }
    sb.write("coarse.csv", &structural);
    let base = ["filter", "--input", "osc/stream.csv", "--basis", "osc/tree.json", "--level", "3"];
    let with = |extra: &[&'static str]| base.iter().chain(extra).copied().collect::<Vec<_>>();
    sb.ok(&with(&["--freq", "dc", "--struct", "coarse", "--out", "p"]));
    sb.ok(&with(&["--freq", "dc.csv", "--struct", "coarse.csv", "--out", "q"]));
    assert_eq!(sb.bytes("p/filtered.csv"), sb.bytes("q/filtered.csv"));
}

#[test]
fn non_symmetric_frequency_response_is_rejected() {
    let sb = Sandbox::new();
    sb.ok(&["synth", "oscillating", "--len", "8", "--out", "osc"]);
    let mut freq = String::from("u,re,im\n");
    for u in 0..8 {
        freq.push_str(&format!("{u},{}\n", if u == 0 { "1,1" } else { "0,0" }));
    }
    sb.write("one.csv", &freq);
    let out = sb.run(&["filter", "--input", "osc/stream.csv", "--freq", "one.csv", "--out", "f"]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["message"].as_str().unwrap().contains("residue"));
}

#[test]
fn backbone_keeps_selection() {
    let sb = Sandbox::new();
    sb.ok(&["synth", "oscillating", "--len", "32", "--out", "osc"]);
    let args = ["backbone", "--input", "osc/stream.csv", "--basis", "osc/tree.json", "--level", "3"];
    let top: Vec<&str> = args.iter().copied().chain(["--keep", "top:4", "--out", "b"]).collect();
    sb.ok(&top);
    assert!(sb.stream("b/backbone.csv").values().max_abs_diff(sb.stream("osc/stream.csv").values()) < 1e-12);
    let boxed: Vec<&str> = args.iter().copied().chain(["--keep", "box:0:0,0:1", "--out", "c"]).collect();
    let summary = sb.ok(&boxed);
    assert_eq!(summary["selected"], 2);
    assert!(sb.stream("c/backbone.csv").values().as_slice().iter().all(|&v| (v - 0.5).abs() < 1e-12));
    let empty: Vec<&str> = args.iter().copied().chain(["--keep", "box:40:50,0:1", "--out", "e"]).collect();
    let out = sb.run(&empty);
    assert!(!out.status.success());
}

#[test]
fn regularity_boundaries() {
    let sb = Sandbox::new();
    sb.ok(&["synth", "oscillating", "--len", "32", "--out", "osc"]);
    let base = ["regularity", "--input", "osc/stream.csv", "--basis", "osc/tree.json", "--level", "3"];
    let circ = sb.ok(&base.iter().copied().chain(["--out", "r"]).collect::<Vec<_>>());
    let lin = sb.ok(&base.iter().copied().chain(["--linear-boundary", "--out", "s"]).collect::<Vec<_>>());
    // 16 edits per step; 32 steps with the wrap, 31 without
    assert_eq!(circ["time"], 512.0);
    assert_eq!(lin["time"], 496.0);
    assert_eq!(circ["edge"], 0.0);
    let file: Value = serde_json::from_slice(&sb.bytes("r/regularity.json")).unwrap();
    assert_eq!(file, circ);
}

#[test]
fn embed_and_basis_commands() {
    let sb = Sandbox::new();
    sb.ok(&["synth", "sbm", "--seed", "2", "--out", "sbm"]);
    sb.ok(&["embed", "--input", "sbm/stream.csv", "--basis", "sbm/tree.json", "--level", "8", "--coarse", "--out", "e"]);
    let (rows, cols, x) = read_grid(fs::File::open(sb.path("e/embedding.csv")).unwrap(), &sb.path("e/embedding.csv")).unwrap();
    assert_eq!(rows, ["0", "1"]);
    assert_eq!(cols, ["s8_0", "s8_1", "s8_2", "s8_3"]);
    // s = m / 16 for 256-relation blocks
    assert!(x.as_slice().iter().all(|v| (v * 16.0).fract().abs() < 1e-9));
    let summary = sb.ok(&["basis", "--input", "sbm/stream.csv", "--basis", "svd", "--out", "t"]);
    assert_eq!(summary["relations"], 1024);
    sb.ok(&["decompose", "--input", "sbm/stream.csv", "--basis", "t/tree.json", "--out", "d"]);
}

#[test]
fn bfs_basis_needs_power_of_two_activity() {
    let sb = Sandbox::new();
    sb.write("four.csv", "0,a,b\n1,b,a\n2,a,a\n3,b,c\n");
    let summary = sb.ok(&["decompose", "--input", "four.csv", "--basis", "bfs", "--out", "d"]);
    assert_eq!(summary["relations"], 4);
    sb.write("three.csv", "0,a,b\n1,b,a\n2,a,a\n");
    let out = sb.run(&["decompose", "--input", "three.csv", "--basis", "bfs", "--out", "e"]);
    assert!(!out.status.success());
}

#[test]
fn verify_lemmas_writes_report() {
    let sb = Sandbox::new();
    let summary = sb.ok(&["verify-lemmas", "--trials", "200", "--seed", "7", "--lemma", "1", "--lemma", "3", "--out", "v"]);
    assert_eq!(summary["all_pass"], true);
    let report: Value = serde_json::from_slice(&sb.bytes("v/report.json")).unwrap();
    assert_eq!(report["lemmas"], serde_json::json!([1, 3]));
    let out = sb.run(&["verify-lemmas", "--trials", "5", "--out", "w"]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "usage");
}

#[test]
fn verify_lemmas_full_run_passes() {
    let sb = Sandbox::new();
    let summary = sb.ok(&["verify-lemmas", "--trials", "10000", "--seed", "7", "--out", "v"]);
    assert_eq!(summary["all_pass"], true);
}
