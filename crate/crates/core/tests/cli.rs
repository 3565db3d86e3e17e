use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn trajext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trajext"))
        .args(args)
        .env_remove("TRAJEXT_GAZETTEER")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Builds the corpus gazetteer into a fresh temp dir.
fn corpus_gazetteer() -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let gaz = dir.path().join("corpus.gaz");
    let source = fixtures().join("corpus/geonames.tsv");
    let out = trajext(&[
        "build-gazetteer",
        "--source",
        path(&source),
        "--output",
        path(&gaz),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    (dir, gaz)
}

#[test]
fn build_gazetteer_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let gaz = dir.path().join("small.gaz");
    let source = fixtures().join("gazetteer_small.tsv");
    let out = trajext(&[
        "build-gazetteer",
        "--source",
        path(&source),
        "--output",
        path(&gaz),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(
        stdout(&out).lines().any(|l| l == "records: 10"),
        "{}",
        stdout(&out)
    );
    assert!(gaz.is_file());
}

#[test]
fn build_gazetteer_missing_source_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = trajext(&[
        "build-gazetteer",
        "--source",
        path(&dir.path().join("nope.tsv")),
        "--output",
        path(&dir.path().join("x.gaz")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("x.gaz").exists());
}

#[test]
fn build_gazetteer_filtering_everything_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let source = fixtures().join("gazetteer_small.tsv");
    let out = trajext(&[
        "build-gazetteer",
        "--source",
        path(&source),
        "--output",
        path(&dir.path().join("x.gaz")),
        "--min-population",
        "1000000000",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn build_gazetteer_country_filter() {
    let dir = tempfile::tempdir().unwrap();
    let source = fixtures().join("gazetteer_small.tsv");
    let out = trajext(&[
        "build-gazetteer",
        "--source",
        path(&source),
        "--output",
        path(&dir.path().join("lb.gaz")),
        "--countries",
        "LB,GR",
    ]);
    assert_eq!(out.status.code(), Some(0));
    // Tripoli LB and GR, Beirut, Athens, Lebanon
    assert!(
        stdout(&out).lines().any(|l| l == "records: 5"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn parse_writes_geojson_and_map() {
    let (dir, gaz) = corpus_gazetteer();
    let input = dir.path().join("in");
    let output = dir.path().join("out");
    fs::create_dir_all(&input).unwrap();
    fs::write(
        input.join("story.txt"),
        "We fled from Aleppo to Tripoli and then to Beirut.",
    )
    .unwrap();
    let out = trajext(&[
        "parse",
        "--gazetteer",
        path(&gaz),
        "--input-dir",
        path(&input),
        "--output-dir",
        path(&output),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("story: 3 stops"));
    let json = fs::read_to_string(output.join("story.trajectory.json")).unwrap();
    let t = trajext::trajectory::from_geojson(&json).unwrap();
    let route: Vec<(&str, &str)> = t
        .places()
        .map(|p| (p.name.as_str(), p.country.as_str()))
        .collect();
    assert_eq!(
        route,
        [("Aleppo", "SY"), ("Tripoli", "LB"), ("Beirut", "LB")]
    );
    assert!(fs::read_to_string(output.join("story.map.html"))
        .unwrap()
        .contains("<svg"));
}

#[test]
fn parse_empty_directory_succeeds() {
    let (dir, gaz) = corpus_gazetteer();
    let input = dir.path().join("empty");
    fs::create_dir_all(&input).unwrap();
    let out = trajext(&[
        "parse",
        "--gazetteer",
        path(&gaz),
        "--input-dir",
        path(&input),
        "--output-dir",
        path(&dir.path().join("out")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("0 narratives"));
}

#[test]
fn parse_reads_gazetteer_from_environment_and_config() {
    let (dir, gaz) = corpus_gazetteer();
    let input = dir.path().join("in");
    fs::create_dir_all(&input).unwrap();
    fs::write(input.join("a.txt"), "Bombay was hot that year.").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_trajext"))
        .args([
            "parse",
            "--input-dir",
            path(&input),
            "--output-dir",
            path(&dir.path().join("env")),
        ])
        .env("TRAJEXT_GAZETTEER", &gaz)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("a: 1 stops"), "{}", stdout(&out));

    let config = dir.path().join("run.conf");
    fs::write(
        &config,
        format!("# settings\ngazetteer = {}\nmethod = ST\n", gaz.display()),
    )
    .unwrap();
    let out = trajext(&[
        "--config",
        path(&config),
        "parse",
        "--input-dir",
        path(&input),
        "--output-dir",
        path(&dir.path().join("cfg")),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    // untriggered mention: the ST baseline finds nothing
    assert!(stdout(&out).contains("a: 0 stops"), "{}", stdout(&out));
}

#[test]
fn parse_without_gazetteer_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = trajext(&[
        "parse",
        "--input-dir",
        path(dir.path()),
        "--output-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_method_is_input_error() {
    let (dir, gaz) = corpus_gazetteer();
    let out = trajext(&[
        "parse",
        "--gazetteer",
        path(&gaz),
        "--input-dir",
        path(dir.path()),
        "--output-dir",
        path(dir.path()),
        "--method",
        "magic",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

fn evaluate(gaz: &Path, input: &Path, gt: &Path, output: &Path, extra: &[&str]) -> Output {
    let lexicon = fixtures().join("corpus/lexicon.txt");
    let mut args = vec![
        "evaluate",
        "--gazetteer",
        path(gaz),
        "--lexicon",
        path(&lexicon),
        "--input-dir",
        path(input),
        "--ground-truth-dir",
        path(gt),
        "--output-dir",
        path(output),
    ];
    args.extend_from_slice(extra);
    trajext(&args)
}

#[test]
fn evaluate_writes_one_row_per_method() {
    let (dir, gaz) = corpus_gazetteer();
    let corpus = fixtures().join("corpus");
    let output = dir.path().join("report");
    let out = evaluate(
        &gaz,
        &corpus.join("narratives"),
        &corpus.join("ground_truth"),
        &output,
        &[],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let tsv = fs::read_to_string(output.join("results.tsv")).unwrap();
    let lines: Vec<&str> = tsv.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], "method\tprecision\trecall\tf1\taccuracy");
    assert!(lines[4].starts_with("MWT+Aug+DisAmbig\t"));
    assert!(output.join("results.txt").is_file());
}

#[test]
fn evaluate_only_filters_methods() {
    let (dir, gaz) = corpus_gazetteer();
    let corpus = fixtures().join("corpus");
    let output = dir.path().join("report");
    let out = evaluate(
        &gaz,
        &corpus.join("narratives"),
        &corpus.join("ground_truth"),
        &output,
        &["--only", "MWT", "--only", "mwt+aug+disambig"],
    );
    assert_eq!(out.status.code(), Some(0));
    let tsv = fs::read_to_string(output.join("results.tsv")).unwrap();
    let methods: Vec<&str> = tsv
        .lines()
        .skip(1)
        .map(|l| l.split('\t').next().unwrap())
        .collect();
    assert_eq!(methods, ["MWT", "MWT+Aug+DisAmbig"]);
}

#[test]
fn evaluate_missing_ground_truth_lists_ids() {
    let (dir, gaz) = corpus_gazetteer();
    let input = dir.path().join("in");
    let gt = dir.path().join("gt");
    fs::create_dir_all(&input).unwrap();
    fs::create_dir_all(&gt).unwrap();
    fs::write(input.join("alpha.txt"), "From Aleppo to Beirut.").unwrap();
    fs::write(input.join("beta.txt"), "From Athens to Piraeus.").unwrap();
    fs::write(gt.join("alpha.gt.tsv"), "Aleppo\tSY\nBeirut\tLB\n").unwrap();
    let out = evaluate(&gaz, &input, &gt, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));
}

#[test]
fn plot_rerenders_map() {
    let (dir, gaz) = corpus_gazetteer();
    let input = dir.path().join("in");
    let output = dir.path().join("out");
    fs::create_dir_all(&input).unwrap();
    fs::write(
        input.join("route.txt"),
        "They left Istanbul for Edirne, then Sofia.",
    )
    .unwrap();
    let out = trajext(&[
        "parse",
        "--gazetteer",
        path(&gaz),
        "--input-dir",
        path(&input),
        "--output-dir",
        path(&output),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let map = dir.path().join("again.html");
    let out = trajext(&[
        "plot",
        "--trajectory",
        path(&output.join("route.trajectory.json")),
        "--output",
        path(&map),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        fs::read(&map).unwrap(),
        fs::read(output.join("route.map.html")).unwrap()
    );
}

#[test]
fn plot_rejects_invalid_geojson() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"type\": \"Point\"}").unwrap();
    let out = trajext(&[
        "plot",
        "--trajectory",
        path(&bad),
        "--output",
        path(&dir.path().join("m.html")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
