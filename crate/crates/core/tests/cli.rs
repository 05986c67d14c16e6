use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kosr::fixtures::fixture_fig1;
use tempfile::TempDir;

fn kosr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kosr"))
        .args(args)
        .env_remove("KOSR_INDEX_DIR")
        .output()
        .expect("spawn kosr")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn build_fig1(dir: &Path) -> String {
    let fig = fixture_fig1();
    fs::write(dir.join("fig1.gr"), fig.edge_list()).unwrap();
    fs::write(dir.join("fig1.cat"), fig.category_list()).unwrap();
    let index = dir.join("index");
    let out = kosr(&[
        "build",
        "--graph",
        dir.join("fig1.gr").to_str().unwrap(),
        "--categories",
        dir.join("fig1.cat").to_str().unwrap(),
        "--out",
        index.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("avg_out_label="));
    index.to_str().unwrap().to_string()
}

fn query(index: &str, extra: &[&str]) -> Output {
    let mut args = vec![
        "query", "--index", index, "-s", "s", "-t", "t", "-c", "MA,RE,CI",
    ];
    args.extend_from_slice(extra);
    kosr(&args)
}

#[test]
fn fig1_top_two() {
    let tmp = TempDir::new().unwrap();
    let index = build_fig1(tmp.path());
    let out = query(&index, &["-k", "2", "--engine", "sk"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "1 20 s,a,b,d,t\n2 21 s,a,e,d,t\n");
}

#[test]
fn every_engine_and_mode_agree() {
    let tmp = TempDir::new().unwrap();
    let index = build_fig1(tmp.path());
    let reference = stdout(&query(&index, &["-k", "3"]));
    assert_eq!(reference.lines().count(), 3);
    for engine in ["kpne", "pk", "sk", "kpne-dij", "pk-dij", "sk-dij"] {
        for mode in ["mem", "disk"] {
            let out = query(&index, &["-k", "3", "--engine", engine, "--mode", mode]);
            assert!(out.status.success(), "{engine} {mode}: {}", stderr(&out));
            assert_eq!(stdout(&out), reference, "{engine} {mode}");
        }
    }
}

#[test]
fn disk_stats_report_segment_reads() {
    let tmp = TempDir::new().unwrap();
    let index = build_fig1(tmp.path());
    let out = query(&index, &["-k", "2", "--mode", "disk", "--stats"]);
    assert!(out.status.success());
    let err = stderr(&out);
    assert!(err.contains("examined_routes=9"), "{err}");
    assert!(err.contains("segment_reads=6"), "{err}");
}

#[test]
fn expand_prints_paths() {
    let tmp = TempDir::new().unwrap();
    let index = build_fig1(tmp.path());
    for mode in ["mem", "disk"] {
        let out = query(&index, &["-k", "1", "--expand", "--mode", mode]);
        assert!(out.status.success());
        let text = stdout(&out);
        let path = text.lines().nth(1).unwrap();
        assert!(path.starts_with("  path s,"), "{text}");
        assert!(path.ends_with(",t"), "{text}");
    }
}

#[test]
fn index_dir_from_environment() {
    let tmp = TempDir::new().unwrap();
    let index = build_fig1(tmp.path());
    let out = Command::new(env!("CARGO_BIN_EXE_kosr"))
        .args(["query", "-s", "s", "-t", "t", "-c", "MA,RE,CI"])
        .env("KOSR_INDEX_DIR", &index)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "1 20 s,a,b,d,t\n");
}

#[test]
fn bad_input_exits_nonzero() {
    let tmp = TempDir::new().unwrap();
    let index = build_fig1(tmp.path());

    let out = query(&index, &["-k", "0"]);
    assert_eq!(out.status.code(), Some(1));

    let out = kosr(&[
        "query", "--index", &index, "-s", "zz", "-t", "t", "-c", "MA",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("zz"));

    let out = kosr(&[
        "query", "--index", &index, "-s", "s", "-t", "t", "-c", "NOPE",
    ]);
    assert_eq!(out.status.code(), Some(1));

    let missing = tmp.path().join("missing.gr");
    let out = kosr(&[
        "build",
        "--graph",
        missing.to_str().unwrap(),
        "--uniform",
        "2",
        "--size",
        "2",
        "--out",
        tmp.path().join("x").to_str().unwrap(),
    ]);
    assert_ne!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("missing.gr"));

    let out = kosr(&[
        "query",
        "--index",
        tmp.path().join("nothing").to_str().unwrap(),
        "-s",
        "s",
        "-t",
        "t",
        "-c",
        "MA",
    ]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn corrupt_manifest_exits_two() {
    let tmp = TempDir::new().unwrap();
    let index = build_fig1(tmp.path());
    let manifest = Path::new(&index).join("manifest.bin");
    let mut bytes = fs::read(&manifest).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0xff;
    fs::write(&manifest, bytes).unwrap();
    let out = query(&index, &["-k", "1", "--mode", "disk"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn update_add_and_remove() {
    let tmp = TempDir::new().unwrap();
    let index = build_fig1(tmp.path());

    let out = kosr(&["update", "--index", &index, "remove", "a", "MA"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = query(&index, &["-k", "1"]);
    assert_eq!(stdout(&out).split(' ').nth(2).unwrap().trim(), "s,c,b,d,t");

    let out = kosr(&["update", "--index", &index, "remove", "a", "MA"]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("warning"));

    let out = kosr(&["update", "--index", &index, "add", "a", "MA"]);
    assert!(out.status.success());
    for mode in ["mem", "disk"] {
        let out = query(&index, &["-k", "2", "--mode", mode]);
        assert_eq!(stdout(&out), "1 20 s,a,b,d,t\n2 21 s,a,e,d,t\n", "{mode}");
    }
}

#[test]
fn build_generated_categories_and_bench() {
    let tmp = TempDir::new().unwrap();
    let graph = kosr::fixtures::random_digraph(5, 300, 600, 1..=50, true);
    let mut text = String::new();
    for (u, v, w) in graph.arcs() {
        text.push_str(&format!("a {u} {v} {w}\n"));
    }
    fs::write(tmp.path().join("g.gr"), text).unwrap();
    let index = tmp.path().join("index");
    let out = kosr(&[
        "build",
        "--graph",
        tmp.path().join("g.gr").to_str().unwrap(),
        "--zipf",
        "8",
        "--factor",
        "1.5",
        "--seed",
        "3",
        "--out",
        index.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let tsv = tmp.path().join("bench.tsv");
    let bench = |tsv: &Path| {
        kosr(&[
            "bench",
            "--index",
            index.to_str().unwrap(),
            "--sequence-len",
            "3",
            "-k",
            "5",
            "--engines",
            "pk,sk,kpne",
            "--queries",
            "50",
            "--seed",
            "9",
            "--tsv",
            tsv.to_str().unwrap(),
        ])
    };
    let out = bench(&tsv);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("bench seed=9 queries=50"), "{text}");
    for e in ["pk", "sk", "kpne"] {
        assert!(
            text.contains(&format!("engine={e} completed=50 ")),
            "{text}"
        );
    }
    let rows = fs::read_to_string(&tsv).unwrap();
    assert_eq!(rows.lines().count(), 1 + 3 * 50);

    // same seed, same per-query counters
    let tsv2 = tmp.path().join("bench2.tsv");
    bench(&tsv2);
    let counters = |s: &str| -> Vec<String> {
        // column 10 is the runtime
        s.lines()
            .map(|l| {
                l.split('\t')
                    .enumerate()
                    .filter(|&(i, _)| i != 10)
                    .map(|(_, f)| f)
                    .collect::<Vec<_>>()
                    .join("\t")
            })
            .collect()
    };
    assert_eq!(
        counters(&rows),
        counters(&fs::read_to_string(&tsv2).unwrap())
    );

    let out = kosr(&[
        "bench",
        "--index",
        index.to_str().unwrap(),
        "--engines",
        "warp",
    ]);
    assert_eq!(out.status.code(), Some(1));
}
