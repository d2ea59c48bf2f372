//! End-to-end tests driving the compiled binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lexir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lexir"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(path: &Path) -> String {
    path.to_str().expect("utf-8 path").to_string()
}

/// Three distinguishable cases plus two queries; every content word appears
/// at least twice so the default min-count keeps it.
fn write_fixture(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let cases = dir.join("cases");
    fs::create_dir(&cases).unwrap();
    fs::write(
        cases.join("C1.txt"),
        "Theft theft of movable property; dishonest dishonest taking of movable property.",
    )
    .unwrap();
    fs::write(
        cases.join("C2.txt"),
        "Murder murder culpable homicide homicide sentence sentence appeal appeal.",
    )
    .unwrap();
    fs::write(
        cases.join("C3.txt"),
        "Land land acquisition acquisition compensation compensation award award.",
    )
    .unwrap();
    let queries = dir.join("queries.txt");
    fs::write(
        &queries,
        "AILA_Q1||Dishonest dishonest theft theft of movable movable property property\n\
         AILA_Q2||Compensation compensation for land land acquisition acquisition\n",
    )
    .unwrap();
    let split = dir.join("split.txt");
    fs::write(&split, "AILA_Q2\n").unwrap();
    (cases, queries, split)
}

#[test]
fn index_reports_stats_and_errors_on_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let (cases, _, _) = write_fixture(dir.path());
    let index = dir.path().join("case.idx");
    let out = lexir(&["index", "--cases", &s(&cases), "--index", &s(&index)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("docs=3 "), "{}", stdout(&out));
    assert!(index.exists());

    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let out = lexir(&["index", "--cases", &s(&empty), "--index", &s(&index)]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("empty corpus"), "{}", stderr(&out));
}

#[test]
fn bm25_run_ranks_matching_document_first() {
    let dir = tempfile::tempdir().unwrap();
    let (cases, queries, split) = write_fixture(dir.path());
    let index = dir.path().join("case.idx");
    assert!(lexir(&["index", "--cases", &s(&cases), "--index", &s(&index)])
        .status
        .success());

    let run_path = dir.path().join("bm25.run");
    let out = lexir(&[
        "search-bm25",
        "--index",
        &s(&index),
        "--queries",
        &s(&queries),
        "--split",
        &s(&split),
        "--out",
        &s(&run_path),
        "--tag",
        "IITP_BM25_case",
        "--cutoff",
        "3",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&run_path).unwrap();
    // The split file lists AILA_Q2 as train, so only AILA_Q1 is searched.
    assert!(!text.contains("AILA_Q2"));
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("AILA_Q1 Q0 C1 1 "), "{first}");
    for line in text.lines() {
        assert!(line.ends_with(" IITP_BM25_case"), "{line}");
    }
    assert_eq!(text.lines().count(), 3, "fill pads to the cutoff");

    let parsed = lexir::eval::parse_run(&run_path).unwrap();
    assert_eq!(parsed.tag(), "IITP_BM25_case");
    assert_eq!(parsed.ranking("AILA_Q1").unwrap().len(), 3);
}

#[test]
fn bm25_no_fill_emits_no_lines_for_disjoint_query() {
    let dir = tempfile::tempdir().unwrap();
    let (cases, _, _) = write_fixture(dir.path());
    let queries = dir.path().join("queries.txt");
    fs::write(&queries, "AILA_Q9||zzz zzz qqq qqq\n").unwrap();
    let index = dir.path().join("case.idx");
    assert!(lexir(&["index", "--cases", &s(&cases), "--index", &s(&index)])
        .status
        .success());
    let run_path = dir.path().join("nofill.run");
    let out = lexir(&[
        "search-bm25",
        "--index",
        &s(&index),
        "--queries",
        &s(&queries),
        "--out",
        &s(&run_path),
        "--no-fill",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(fs::read_to_string(&run_path).unwrap(), "");
}

#[test]
fn train_logs_header_and_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (cases, queries, _) = write_fixture(dir.path());
    let model_a = dir.path().join("a.model");
    let out = lexir(&[
        "train-d2v",
        "--cases",
        &s(&cases),
        "--queries",
        &s(&queries),
        "--model",
        &s(&model_a),
        "--seed",
        "7",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let log = stderr(&out);
    assert!(
        log.contains("dim=150 window=20 epochs=50"),
        "missing defaults in header: {log}"
    );
    assert!(log.contains("epoch 1/50 mean_loss="));
    assert!(log.contains("epoch 50/50 mean_loss="));

    // Final epoch improves on the first.
    let loss = |epoch: &str| -> f64 {
        log.lines()
            .find(|l| l.starts_with(epoch))
            .and_then(|l| l.rsplit('=').next())
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(loss("epoch 50/50") < loss("epoch 1/50"), "{log}");

    let model_b = dir.path().join("b.model");
    let out = lexir(&[
        "train-d2v",
        "--cases",
        &s(&cases),
        "--queries",
        &s(&queries),
        "--model",
        &s(&model_b),
        "--seed",
        "7",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        fs::read(&model_a).unwrap(),
        fs::read(&model_b).unwrap(),
        "same seed must produce byte-identical model files"
    );
}

#[test]
fn d2v_run_ranks_near_duplicate_first() {
    let dir = tempfile::tempdir().unwrap();
    let (cases, queries, split) = write_fixture(dir.path());
    let model = dir.path().join("d2v.model");
    let out = lexir(&[
        "train-d2v",
        "--cases",
        &s(&cases),
        "--queries",
        &s(&queries),
        "--model",
        &s(&model),
        "--dim",
        "16",
        "--window",
        "3",
        "--epochs",
        "60",
        "--lr",
        "0.05",
        "--min-count",
        "1",
        "--seed",
        "3",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let run_path = dir.path().join("d2v.run");
    let out = lexir(&[
        "search-d2v",
        "--model",
        &s(&model),
        "--queries",
        &s(&queries),
        "--split",
        &s(&split),
        "--out",
        &s(&run_path),
        "--cutoff",
        "2",
        "--tag",
        "IITP_Doc2Vec_case",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&run_path).unwrap();
    // AILA_Q1 describes theft of movable property; C1 is the theft case.
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("AILA_Q1 Q0 C1 1 "), "{text}");
    assert!(text.lines().count() <= 2);

    let parsed = lexir::eval::parse_run(&run_path).unwrap();
    assert_eq!(parsed.tag(), "IITP_Doc2Vec_case");
}

#[test]
fn d2v_infers_vectors_for_queries_outside_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let (cases, queries, _) = write_fixture(dir.path());
    let model = dir.path().join("d2v.model");
    assert!(lexir(&[
        "train-d2v",
        "--cases",
        &s(&cases),
        "--queries",
        &s(&queries),
        "--model",
        &s(&model),
        "--dim",
        "16",
        "--window",
        "3",
        "--epochs",
        "40",
        "--lr",
        "0.05",
        "--min-count",
        "1",
        "--seed",
        "3",
    ])
    .status
    .success());

    // A query the model never saw: its vector must come from inference.
    let unseen = dir.path().join("unseen.txt");
    fs::write(
        &unseen,
        "AILA_Q9||Murder murder homicide homicide sentence appeal\n",
    )
    .unwrap();
    let run_path = dir.path().join("unseen.run");
    let out = lexir(&[
        "search-d2v",
        "--model",
        &s(&model),
        "--queries",
        &s(&unseen),
        "--out",
        &s(&run_path),
        "--cutoff",
        "3",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&run_path).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("AILA_Q9 Q0 "));

    // No vocabulary overlap at all: inference is impossible.
    fs::write(&unseen, "AILA_Q9||zzzz qqqq xxxx\n").unwrap();
    let out = lexir(&[
        "search-d2v",
        "--model",
        &s(&model),
        "--queries",
        &s(&unseen),
        "--out",
        &s(&run_path),
    ]);
    assert!(!out.status.success());
    assert!(
        stderr(&out).contains("AILA_Q9") && stderr(&out).contains("no vocabulary terms"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn eval_reports_perfect_run_and_machine_lines() {
    let dir = tempfile::tempdir().unwrap();
    let run_path = dir.path().join("perfect.run");
    fs::write(
        &run_path,
        "Q1 Q0 C1 1 2.000000 t\nQ1 Q0 C2 2 1.000000 t\n",
    )
    .unwrap();
    let qrels_path = dir.path().join("qrels.txt");
    fs::write(&qrels_path, "Q1 0 C1 1\nQ1 0 C2 1\n").unwrap();
    let report_path = dir.path().join("report.tsv");
    let out = lexir(&[
        "eval",
        "--run",
        &s(&run_path),
        "--qrels",
        &s(&qrels_path),
        "--out",
        &s(&report_path),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let printed = stdout(&out);
    assert!(printed.contains("map\tall\t1.000000"), "{printed}");
    assert!(printed.contains("bpref\tall\t1.000000"));
    assert!(printed.contains("recip_rank\tall\t1.000000"));
    assert!(printed.contains("p_10\tall\t0.200000"));
    assert_eq!(fs::read_to_string(&report_path).unwrap(), {
        let mut machine = String::new();
        for line in printed.lines().filter(|l| l.contains('\t')) {
            machine.push_str(line);
            machine.push('\n');
        }
        machine
    });
}

#[test]
fn eval_rejects_disjoint_run_and_qrels() {
    let dir = tempfile::tempdir().unwrap();
    let run_path = dir.path().join("r.run");
    fs::write(&run_path, "Q9 Q0 C1 1 1.000000 t\n").unwrap();
    let qrels_path = dir.path().join("q.txt");
    fs::write(&qrels_path, "Q1 0 C1 1\n").unwrap();
    let out = lexir(&["eval", "--run", &s(&run_path), "--qrels", &s(&qrels_path)]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("share no query labels"), "{}", stderr(&out));
}

#[test]
fn unknown_flags_abort() {
    let out = lexir(&["index", "--cases", "x", "--index", "y", "--frobnicate"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("unexpected argument"), "{}", stderr(&out));
}

#[test]
fn help_lists_every_subcommand() {
    let out = lexir(&["--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for sub in ["index", "search-bm25", "train-d2v", "search-d2v", "eval"] {
        assert!(text.contains(sub), "missing {sub}: {text}");
    }
}
