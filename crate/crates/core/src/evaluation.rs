//! Ground-truth loading, order-sensitive scoring and the four-method
//! comparison report.
//!
//! Predicted stops are aligned to ground-truth entries with a longest common
//! subsequence. Aligned pairs are true positives, unaligned predictions false
//! positives and unaligned entries false negatives. True negatives are
//! tokens the pipeline rejected whose text is not a ground-truth place name.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::disambiguator::DisambiguationConfig;
use crate::disambiguator::DisambiguationError;
use crate::gazetteer::Gazetteer;
use crate::pipeline::{Method, Pipeline};
use crate::textprep::{normalize_key, Lexicon, Narrative};
use crate::trajectory::Trajectory;

#[derive(Debug, thiserror::Error)]
pub enum EvaluationError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: expected \"name<TAB>country_code\"")]
    Malformed { path: PathBuf, line: usize },
    #[error("{path}: ground truth has no entries")]
    EmptyGroundTruth { path: PathBuf },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("unmatched narrative ids: {}", .0.join(", "))]
    Unmatched(Vec<String>),
    #[error("nothing to report")]
    NoReports,
    #[error(transparent)]
    Disambiguation(#[from] DisambiguationError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthEntry {
    pub name: String,
    pub country: String,
}

/// Places of one narrative in mention order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub narrative_id: String,
    pub entries: Vec<GroundTruthEntry>,
}

/// Narrative id of a ground-truth file: the file name without `.gt.tsv`
/// (or without its last extension).
pub fn ground_truth_id(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    match name.strip_suffix(".gt.tsv") {
        Some(id) => id.to_string(),
        None => path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or(name),
    }
}

pub fn parse_ground_truth(
    narrative_id: &str,
    content: &str,
    path: &Path,
) -> Result<GroundTruth, EvaluationError> {
    let mut entries = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let malformed = || EvaluationError::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
        };
        let (name, country) = line.split_once('\t').ok_or_else(malformed)?;
        let (name, country) = (name.trim(), country.trim());
        if name.is_empty() || country.is_empty() || country.contains('\t') {
            return Err(malformed());
        }
        entries.push(GroundTruthEntry {
            name: name.to_string(),
            country: country.to_ascii_uppercase(),
        });
    }
    if entries.is_empty() {
        return Err(EvaluationError::EmptyGroundTruth {
            path: path.to_path_buf(),
        });
    }
    Ok(GroundTruth {
        narrative_id: narrative_id.to_string(),
        entries,
    })
}

pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<GroundTruth, EvaluationError> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|source| EvaluationError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_ground_truth(&ground_truth_id(path), &content, path)
}

/// How predicted stops are compared with ground-truth entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMode {
    /// Normalized name only; used for methods that resolve no country.
    Name,
    NameAndCountry,
}

impl MatchMode {
    pub fn for_method(method: Method) -> Self {
        if method.is_augmented() {
            Self::NameAndCountry
        } else {
            Self::Name
        }
    }
}

/// Length of the longest common subsequence of two sequences.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Confusion {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.tp + self.tn + self.fp + self.fn_)
    }

    pub fn report(&self, method: Method) -> MetricsReport {
        MetricsReport {
            method,
            tp: self.tp,
            fp: self.fp,
            fn_: self.fn_,
            tn: self.tn,
            precision: self.precision(),
            recall: self.recall(),
            f1: self.f1(),
            accuracy: self.accuracy(),
        }
    }
}

impl std::ops::Add for Confusion {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub method: Method,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

/// Scores a predicted route against ground truth. `rejected_candidates`
/// is the number of correctly rejected tokens, taken as true negatives.
pub fn score(
    predicted: &Trajectory,
    gt: &GroundTruth,
    rejected_candidates: usize,
    mode: MatchMode,
) -> Confusion {
    let key = |name: &str, country: &str| match mode {
        MatchMode::Name => (normalize_key(name), String::new()),
        MatchMode::NameAndCountry => (normalize_key(name), country.to_ascii_uppercase()),
    };
    let predicted: Vec<_> = predicted
        .places()
        .map(|p| key(&p.name, &p.country))
        .collect();
    let truth: Vec<_> = gt
        .entries
        .iter()
        .map(|e| key(&e.name, &e.country))
        .collect();
    let tp = lcs_len(&predicted, &truth);
    Confusion {
        tp,
        fp: predicted.len() - tp,
        fn_: truth.len() - tp,
        tn: rejected_candidates,
    }
}

/// Runs every requested method over the corpus and micro-averages the
/// counts per method. Reports come back in `methods` order.
pub fn run_suite(
    narratives: &[Narrative],
    gts: &[GroundTruth],
    g: &Gazetteer,
    lex: &Lexicon,
    config: &DisambiguationConfig,
    methods: &[Method],
) -> Result<Vec<MetricsReport>, EvaluationError> {
    if narratives.is_empty() {
        return Err(EvaluationError::EmptyCorpus);
    }
    let by_id: BTreeMap<&str, &GroundTruth> = gts
        .iter()
        .map(|gt| (gt.narrative_id.as_str(), gt))
        .collect();
    let narrative_ids: HashSet<&str> = narratives.iter().map(|n| n.id.as_str()).collect();
    let mut unmatched: Vec<String> = narratives
        .iter()
        .filter(|n| !by_id.contains_key(n.id.as_str()))
        .map(|n| n.id.clone())
        .chain(
            by_id
                .keys()
                .filter(|id| !narrative_ids.contains(*id))
                .map(|id| id.to_string()),
        )
        .collect();
    if !unmatched.is_empty() {
        unmatched.sort();
        return Err(EvaluationError::Unmatched(unmatched));
    }

    let pipeline = Pipeline::new(g, lex, config.clone());
    methods
        .iter()
        .map(|&method| {
            let mode = MatchMode::for_method(method);
            let per_narrative: Result<Vec<Confusion>, EvaluationError> = narratives
                .par_iter()
                .map(|narrative| {
                    let gt = by_id[narrative.id.as_str()];
                    let run = pipeline.run(method, narrative)?;
                    let gt_names: HashSet<String> =
                        gt.entries.iter().map(|e| normalize_key(&e.name)).collect();
                    let rejected = run
                        .rejected
                        .iter()
                        .filter(|t| !gt_names.contains(&normalize_key(&t.text)))
                        .count();
                    Ok(score(&run.trajectory, gt, rejected, mode))
                })
                .collect();
            let total = per_narrative?
                .into_iter()
                .fold(Confusion::default(), |a, b| a + b);
            Ok(total.report(method))
        })
        .collect()
}

pub fn render_tsv(reports: &[MetricsReport]) -> String {
    let mut out = String::from("method\tprecision\trecall\tf1\taccuracy\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            r.method, r.precision, r.recall, r.f1, r.accuracy
        );
    }
    out
}

pub fn render_text(reports: &[MetricsReport]) -> String {
    let header = [
        "Method",
        "Precision",
        "Recall",
        "F1",
        "Accuracy",
        "TP",
        "FP",
        "FN",
        "TN",
    ];
    let rows: Vec<[String; 9]> = reports
        .iter()
        .map(|r| {
            [
                r.method.to_string(),
                format!("{:.2}", r.precision),
                format!("{:.2}", r.recall),
                format!("{:.2}", r.f1),
                format!("{:.2}", r.accuracy),
                r.tp.to_string(),
                r.fp.to_string(),
                r.fn_.to_string(),
                r.tn.to_string(),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].len())
                .chain([header[c].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if c == 0 {
                    format!("{s:<w$}", w = widths[c])
                } else {
                    format!("{s:>w$}", w = widths[c])
                }
            })
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for row in &rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out.push_str(
        "\nTN counts tokens that produced no place and whose text is not a ground-truth name;\n\
         accuracy depends on this definition.\n",
    );
    out
}

/// Writes `results.tsv` (full precision) and `results.txt` (aligned, two
/// decimals) into `dir`, returning both paths.
pub fn render_report(
    reports: &[MetricsReport],
    dir: impl AsRef<Path>,
) -> Result<(PathBuf, PathBuf), EvaluationError> {
    if reports.is_empty() {
        return Err(EvaluationError::NoReports);
    }
    let dir = dir.as_ref();
    let tsv = dir.join("results.tsv");
    let txt = dir.join("results.txt");
    for (path, body) in [(&tsv, render_tsv(reports)), (&txt, render_text(reports))] {
        fs::write(path, body).map_err(|source| EvaluationError::Write {
            path: path.clone(),
            source,
        })?;
    }
    Ok((tsv, txt))
}
