use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .to_str()
        .unwrap()
        .to_owned()
}

fn run(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subsim"))
        .current_dir(cwd)
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

/// A 3-dimensional table: `x`, `y`, `z` along the axes, `xy` on the diagonal.
fn small_table(dir: &TempDir) -> String {
    let path = dir.path().join("emb.txt");
    fs::write(&path, "4 3\nx 1 0 0\ny 0 1 0\nz 0 0 1\nxy 1 1 0\n").unwrap();
    path.to_str().unwrap().to_owned()
}

fn write_corpus(dir: &TempDir, name: &str, rows: &[(&str, &str, i8)]) -> String {
    let mut text = String::from("id\ttext1\ttext2\tclass\n");
    for (i, (a, b, c)) in rows.iter().enumerate() {
        text.push_str(&format!("r{i}\t{a}\t{b}\t{c}\n"));
    }
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

/// Cleanly separable three-class corpus over the small table: identical
/// sentences (1.0), one shared axis out of two (0.5), disjoint axes (0).
fn separable_corpus(dir: &TempDir) -> String {
    let mut rows = Vec::new();
    for _ in 0..10 {
        rows.push(("x y", "y x", 1));
        rows.push(("x y", "x z", 0));
        rows.push(("x", "z", -1));
    }
    write_corpus(dir, "pairs.tsv", &rows)
}

#[test]
fn sim_of_identical_and_orthogonal_sentences() {
    let dir = TempDir::new().unwrap();
    let table = small_table(&dir);
    let same = run(dir.path(), &["sim", "x y", "Y, x!", "-e", &table]);
    assert!(same.status.success(), "{}", stderr(&same));
    assert!(stdout(&same).contains("SIM 1.000000"), "{}", stdout(&same));
    assert!(stdout(&same).contains("evaluations 4"));

    let apart = run(dir.path(), &["sim", "x", "z", "-e", &table]);
    assert!(
        stdout(&apart).contains("SIM 0.000000"),
        "{}",
        stdout(&apart)
    );
}

#[test]
fn sim_gram_variant_matches_basis() {
    let dir = TempDir::new().unwrap();
    let table = small_table(&dir);
    let args = ["sim", "x", "x y z", "-e", &table];
    let basis = run(dir.path(), &args);
    let gram = run(dir.path(), &[&args[..], &["--variant", "gram"]].concat());
    assert!(gram.status.success(), "{}", stderr(&gram));
    assert_eq!(stdout(&basis), stdout(&gram));
}

#[test]
fn gram_variant_on_dependent_rows_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let table = small_table(&dir);
    let out = run(
        dir.path(),
        &["sim", "x y xy", "x", "-e", &table, "--variant", "gram"],
    );
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let basis = run(dir.path(), &["sim", "x y xy", "x", "-e", &table]);
    assert!(basis.status.success());
}

#[test]
fn missing_embeddings_file_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["sim", "a", "b", "-e", "no-such-table.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("no-such-table.txt"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn fully_oov_sentence_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let table = small_table(&dir);
    let out = run(dir.path(), &["sim", "x", "unknown words", "-e", &table]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("text2"), "{}", stderr(&out));
}

#[test]
fn score_writes_one_row_per_pair_and_marks_skips() {
    let dir = TempDir::new().unwrap();
    let table = small_table(&dir);
    let corpus = write_corpus(
        &dir,
        "pairs.tsv",
        &[("x", "x", 1), ("x", "nothing here", -1)],
    );
    let out = run(
        dir.path(),
        &["score", "-c", &corpus, "-e", &table, "-o", "scored.tsv"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("scored.tsv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "{text}");
    assert!(lines[1].starts_with("r0\t1.000000\t1"), "{}", lines[1]);
    assert!(
        lines[2].contains("text2 has no known tokens"),
        "{}",
        lines[2]
    );
    assert!(stderr(&out).contains("skipped 1"));
}

#[test]
fn train_merge_low_saves_a_single_upper_bound() {
    let dir = TempDir::new().unwrap();
    let table = small_table(&dir);
    let corpus = separable_corpus(&dir);
    let out = run(
        dir.path(),
        &[
            "train",
            "-c",
            &corpus,
            "-e",
            &table,
            "--mode",
            "two-class-merge-low",
            "-m",
            "model.txt",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let model = fs::read_to_string(dir.path().join("model.txt")).unwrap();
    assert!(model.contains("mode=two_class_merge_low"), "{model}");
    assert!(model.contains("lower_a=--"), "{model}");
    assert!(!model.contains("upper_b=--"), "{model}");
}

#[test]
fn repeated_training_writes_identical_models() {
    let dir = TempDir::new().unwrap();
    let table = small_table(&dir);
    let corpus = separable_corpus(&dir);
    let mut models = Vec::new();
    for name in ["m1.txt", "m2.txt"] {
        let out = run(
            dir.path(),
            &["train", "-c", &corpus, "-e", &table, "-m", name],
        );
        assert!(out.status.success(), "{}", stderr(&out));
        models.push(fs::read(dir.path().join(name)).unwrap());
    }
    assert_eq!(models[0], models[1]);
}

fn train_then_eval(dir: &TempDir, mode: &str, extra: &[&str]) -> Output {
    let table = small_table(dir);
    let corpus = separable_corpus(dir);
    let common = [
        "-c",
        corpus.as_str(),
        "-e",
        table.as_str(),
        "-m",
        "model.txt",
    ];
    let out = run(
        dir.path(),
        &[&["train", "--mode", mode][..], &common].concat(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    run(dir.path(), &[&["eval"][..], &common, extra].concat())
}

#[test]
fn eval_on_separable_data_is_perfect() {
    let dir = TempDir::new().unwrap();
    let out = train_then_eval(&dir, "three-class", &["--report-tsv", "report.tsv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("split: 21 train / 9 test"), "{text}");
    let report = fs::read_to_string(dir.path().join("report.tsv")).unwrap();
    let macro_row = report.lines().find(|l| l.starts_with("macro\t")).unwrap();
    let accuracy: f64 = macro_row.split('\t').nth(4).unwrap().parse().unwrap();
    assert_eq!(accuracy, 1.0, "{report}");
}

#[test]
fn merge_low_eval_only_reports_two_classes() {
    let dir = TempDir::new().unwrap();
    let out = train_then_eval(&dir, "two-class-merge-low", &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("class -1") && text.contains("class 1"),
        "{text}"
    );
    assert!(!text.contains("class 0"), "{text}");
}

#[test]
fn compare_prints_both_measures() {
    let dir = TempDir::new().unwrap();
    let out = train_then_eval(&dir, "three-class", &["--compare"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("== measure projection_sim"), "{text}");
    assert!(text.contains("== measure pairwise_mean"), "{text}");
}

#[test]
fn unreadable_model_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let table = small_table(&dir);
    let corpus = separable_corpus(&dir);
    fs::write(dir.path().join("bad.txt"), "mode=sideways\n").unwrap();
    for model in ["bad.txt", "absent.txt"] {
        let out = run(
            dir.path(),
            &["eval", "-c", &corpus, "-e", &table, "-m", model],
        );
        assert_eq!(out.status.code(), Some(1), "{model}: {}", stderr(&out));
    }
}

#[test]
fn single_class_training_data_is_degenerate() {
    let dir = TempDir::new().unwrap();
    let table = small_table(&dir);
    let rows: Vec<(&str, &str, i8)> = (0..10).map(|_| ("x", "x y", 1)).collect();
    let corpus = write_corpus(&dir, "one.tsv", &rows);
    let out = run(
        dir.path(),
        &["train", "-c", &corpus, "-e", &table, "-m", "model.txt"],
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn fixed_test_corpus_bypasses_the_split() {
    let dir = TempDir::new().unwrap();
    let table = small_table(&dir);
    let train = separable_corpus(&dir);
    let test = write_corpus(&dir, "test.tsv", &[("x", "x", 1), ("x", "z", -1)]);
    let out = run(
        dir.path(),
        &[
            "train",
            "-c",
            &train,
            "--test-corpus",
            &test,
            "-e",
            &table,
            "-m",
            "model.txt",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("split: 30 train"), "{}", stdout(&out));
}

#[test]
fn synth_reproduces_the_bundled_corpus() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &["synth", "--pairs-out", "p.tsv", "--embeddings-out", "e.txt"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let read = |p: PathBuf| fs::read(p).unwrap();
    assert_eq!(
        read(dir.path().join("p.tsv")),
        read(data("synthetic_pairs.tsv").into())
    );
    assert_eq!(
        read(dir.path().join("e.txt")),
        read(data("synthetic_embeddings.txt").into())
    );
}

#[test]
fn selftest_passes() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["selftest", "--trials", "200"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("selftest passed"));
}
