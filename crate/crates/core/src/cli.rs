//! Command-line front end.
//!
//! Exit codes: 0 success, 1 some narratives failed, 2 configuration or
//! input error. Settings resolve as flags > `--config` file > environment
//! (`TRAJEXT_GAZETTEER`) > defaults. Logs go to standard error.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::disambiguator::{DisambiguationConfig, Fallback};
use crate::evaluation::{load_ground_truth, render_report, render_text, run_suite};
use crate::gazetteer::{build_gazetteer, load_gazetteer, save_gazetteer, BuildOptions, Gazetteer};
use crate::pipeline::{Method, Pipeline};
use crate::textprep::{load_lexicon, Lexicon, Narrative};
use crate::trajectory::{from_geojson, to_geojson, to_map_html};

pub const GAZETTEER_ENV: &str = "TRAJEXT_GAZETTEER";

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "trajext",
    version,
    about = "Extract place trajectories from narrative text"
)]
struct Cli {
    /// key=value configuration file (flags take precedence)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More log output on stderr (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a gazetteer index from a GeoNames main-table file
    BuildGazetteer(BuildArgs),
    /// Extract a trajectory from every narrative in a directory
    Parse(RunArgs),
    /// Score all methods against ground truth
    Evaluate(EvaluateArgs),
    /// Re-render the HTML map of a trajectory GeoJSON file
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct BuildArgs {
    /// GeoNames TSV (e.g. cities500.txt)
    #[arg(long)]
    source: PathBuf,
    /// Index file to write
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    min_population: Option<u64>,
    /// Comma-separated ISO country codes to keep
    #[arg(long, value_delimiter = ',')]
    countries: Vec<String>,
}

#[derive(Debug, Args, Default)]
struct RunArgs {
    #[arg(long)]
    gazetteer: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    input_dir: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// ST, MWT, ST+Aug+DisAmbig or MWT+Aug+DisAmbig
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    window_k: Option<usize>,
    #[arg(long)]
    min_population: Option<u64>,
    /// One disambiguation sweep, no fallback
    #[arg(long)]
    paper_strict: bool,
    /// population, first or none
    #[arg(long)]
    fallback: Option<String>,
    /// Worker threads (default: logical cores)
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Directory holding <id>.gt.tsv files (default: the input directory)
    #[arg(long)]
    ground_truth_dir: Option<PathBuf>,
    /// Only report these methods (repeatable)
    #[arg(long = "only", value_name = "METHOD")]
    only: Vec<String>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long)]
    trajectory: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

/// Fully resolved settings for `parse` and `evaluate`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub gazetteer_path: PathBuf,
    pub lexicon_path: Option<PathBuf>,
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    pub method: Method,
    pub window_k: usize,
    pub min_population: u64,
    pub paper_strict: bool,
    pub fallback: Fallback,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn disambiguation(&self) -> DisambiguationConfig {
        DisambiguationConfig {
            window_k: self.window_k,
            paper_strict: self.paper_strict,
            fallback: self.fallback,
        }
    }
}

/// Error carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    error: anyhow::Error,
}

fn input_error(error: anyhow::Error) -> Failure {
    Failure {
        code: EXIT_INPUT,
        error,
    }
}

/// Parses a key=value file; `#` comments and blank lines are ignored,
/// dashes in keys are read as underscores.
pub fn parse_config_file(content: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected key=value", i + 1))?;
        map.insert(key.trim().replace('-', "_"), value.trim().to_string());
    }
    Ok(map)
}

fn read_config(path: Option<&Path>) -> Result<BTreeMap<String, String>> {
    match path {
        None => Ok(BTreeMap::new()),
        Some(p) => {
            let content = fs::read_to_string(p)
                .with_context(|| format!("cannot read config {}", p.display()))?;
            parse_config_file(&content).with_context(|| format!("in {}", p.display()))
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>()
        .map_err(|e| anyhow!("invalid {key} {raw:?}: {e}"))
}

fn resolve_run_config(args: &RunArgs, file: &BTreeMap<String, String>) -> Result<RunConfig> {
    let path = |flag: &Option<PathBuf>, key: &str| {
        flag.clone().or_else(|| file.get(key).map(PathBuf::from))
    };
    let gazetteer_path = path(&args.gazetteer, "gazetteer")
        .or_else(|| std::env::var_os(GAZETTEER_ENV).map(PathBuf::from))
        .ok_or_else(|| {
            anyhow!("no gazetteer given (--gazetteer, config file or {GAZETTEER_ENV})")
        })?;
    let input_dir =
        path(&args.input_dir, "input_dir").ok_or_else(|| anyhow!("--input-dir is required"))?;
    let output_dir =
        path(&args.output_dir, "output_dir").ok_or_else(|| anyhow!("--output-dir is required"))?;

    let method = match args
        .method
        .as_deref()
        .or(file.get("method").map(String::as_str))
    {
        Some(m) => m.parse::<Method>().map_err(|e| anyhow!(e))?,
        None => Method::MwtAugDisambig,
    };
    let window_k = match (args.window_k, file.get("window_k")) {
        (Some(k), _) => k,
        (None, Some(raw)) => parse_value("window_k", raw)?,
        (None, None) => 1,
    };
    if window_k == 0 {
        bail!("window_k must be at least 1");
    }
    let min_population = match (args.min_population, file.get("min_population")) {
        (Some(p), _) => p,
        (None, Some(raw)) => parse_value("min_population", raw)?,
        (None, None) => 0,
    };
    let paper_strict = args.paper_strict
        || file
            .get("paper_strict")
            .map(|raw| parse_value::<bool>("paper_strict", raw))
            .transpose()?
            .unwrap_or(false);
    let fallback = match args
        .fallback
        .as_deref()
        .or(file.get("fallback").map(String::as_str))
    {
        Some(f) => f.parse::<Fallback>().map_err(|e| anyhow!(e))?,
        None => Fallback::Population,
    };
    let jobs = match (args.jobs, file.get("jobs")) {
        (Some(j), _) => Some(j),
        (None, Some(raw)) => Some(parse_value("jobs", raw)?),
        (None, None) => None,
    };

    Ok(RunConfig {
        gazetteer_path,
        lexicon_path: path(&args.lexicon, "lexicon"),
        input_dir,
        output_dir,
        method,
        window_k,
        min_population,
        paper_strict,
        fallback,
        jobs,
    })
}

/// Checks paths and loads the shared inputs before any narrative is touched.
fn prepare(config: &RunConfig) -> Result<(Gazetteer, Lexicon, Vec<PathBuf>)> {
    if !config.input_dir.is_dir() {
        bail!(
            "input directory {} does not exist",
            config.input_dir.display()
        );
    }
    if !config.gazetteer_path.is_file() {
        bail!(
            "gazetteer {} does not exist",
            config.gazetteer_path.display()
        );
    }
    if let Some(lex) = &config.lexicon_path {
        if !lex.is_file() {
            bail!("lexicon {} does not exist", lex.display());
        }
    }
    fs::create_dir_all(&config.output_dir).with_context(|| {
        format!(
            "cannot create output directory {}",
            config.output_dir.display()
        )
    })?;

    let mut gazetteer = load_gazetteer(&config.gazetteer_path)?;
    if config.min_population > 0 {
        gazetteer = gazetteer.with_min_population(config.min_population);
    }
    let lexicon = match &config.lexicon_path {
        Some(p) => load_lexicon(p)?,
        None => Lexicon::default(),
    };
    let narratives = narrative_files(&config.input_dir)?;
    log::info!(
        "{} gazetteer records, {} lexicon phrases, {} narratives",
        gazetteer.len(),
        lexicon.len(),
        narratives.len()
    );
    Ok((gazetteer, lexicon, narratives))
}

/// `*.txt` files of a directory, sorted by name.
fn narrative_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "txt"))
        .collect();
    files.sort();
    Ok(files)
}

fn narrative_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn read_narrative(path: &Path) -> Result<Narrative> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(Narrative::new(narrative_id(path), text))
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("cannot start worker pool")
}

fn cmd_build_gazetteer(args: &BuildArgs, file: &BTreeMap<String, String>) -> Result<i32, Failure> {
    let min_population = match (args.min_population, file.get("min_population")) {
        (Some(p), _) => p,
        (None, Some(raw)) => parse_value("min_population", raw).map_err(input_error)?,
        (None, None) => 0,
    };
    let countries: BTreeSet<String> = args
        .countries
        .iter()
        .map(|c| c.trim().to_ascii_uppercase())
        .filter(|c| !c.is_empty())
        .collect();
    let options = BuildOptions {
        min_population,
        country_filter: (!countries.is_empty()).then_some(countries),
    };
    let g = build_gazetteer(&args.source, &options).map_err(|e| input_error(e.into()))?;
    save_gazetteer(&g, &args.output).map_err(|e| input_error(e.into()))?;
    let meta = g.metadata();
    println!("records: {}", meta.canonical_records);
    println!("aliases: {}", meta.alias_records);
    println!("skipped: {}", meta.skipped_rows);
    println!("filtered: {}", meta.filtered_rows);
    Ok(EXIT_OK)
}

fn cmd_parse(args: &RunArgs, file: &BTreeMap<String, String>) -> Result<i32, Failure> {
    let config = resolve_run_config(args, file).map_err(input_error)?;
    let (gazetteer, lexicon, files) = prepare(&config).map_err(input_error)?;
    let pipeline = Pipeline::new(&gazetteer, &lexicon, config.disambiguation());
    let pool = thread_pool(config.jobs).map_err(input_error)?;

    let outcomes: Vec<(String, Result<usize>)> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let outcome = (|| {
                    let narrative = read_narrative(path)?;
                    let run = pipeline.run(config.method, &narrative)?;
                    let t = &run.trajectory;
                    if t.is_empty() {
                        log::warn!("{}: no places found", narrative.id);
                    }
                    let json_path = config
                        .output_dir
                        .join(format!("{}.trajectory.json", narrative.id));
                    let html_path = config.output_dir.join(format!("{}.map.html", narrative.id));
                    fs::write(&json_path, to_geojson(t))
                        .with_context(|| format!("cannot write {}", json_path.display()))?;
                    fs::write(&html_path, to_map_html(t))
                        .with_context(|| format!("cannot write {}", html_path.display()))?;
                    Ok(t.len())
                })();
                (narrative_id(path), outcome)
            })
            .collect()
    });

    let mut failed = 0;
    for (id, outcome) in &outcomes {
        match outcome {
            Ok(stops) => println!("{id}: {stops} stops"),
            Err(e) => {
                failed += 1;
                log::error!("{id}: {e:#}");
            }
        }
    }
    println!("{} narratives ({} failed)", outcomes.len(), failed);
    Ok(if failed > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

fn cmd_evaluate(args: &EvaluateArgs, file: &BTreeMap<String, String>) -> Result<i32, Failure> {
    let config = resolve_run_config(&args.run, file).map_err(input_error)?;
    let methods: Vec<Method> = if args.only.is_empty() {
        Method::ALL.to_vec()
    } else {
        args.only
            .iter()
            .map(|m| m.parse::<Method>().map_err(|e| input_error(anyhow!(e))))
            .collect::<Result<_, _>>()?
    };
    let gt_dir = args
        .ground_truth_dir
        .clone()
        .or_else(|| file.get("ground_truth_dir").map(PathBuf::from))
        .unwrap_or_else(|| config.input_dir.clone());
    let (gazetteer, lexicon, files) = prepare(&config).map_err(input_error)?;
    if files.is_empty() {
        return Err(input_error(anyhow!(
            "no narratives in {}",
            config.input_dir.display()
        )));
    }

    let missing: Vec<String> = files
        .iter()
        .map(|p| narrative_id(p))
        .filter(|id| !gt_dir.join(format!("{id}.gt.tsv")).is_file())
        .collect();
    if !missing.is_empty() {
        return Err(input_error(anyhow!(
            "missing ground truth for: {}",
            missing.join(", ")
        )));
    }
    let narratives: Vec<Narrative> = files
        .iter()
        .map(|p| read_narrative(p))
        .collect::<Result<_>>()
        .map_err(input_error)?;
    let gts = files
        .iter()
        .map(|p| load_ground_truth(gt_dir.join(format!("{}.gt.tsv", narrative_id(p)))))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| input_error(e.into()))?;

    let pool = thread_pool(config.jobs).map_err(input_error)?;
    let reports = pool
        .install(|| {
            run_suite(
                &narratives,
                &gts,
                &gazetteer,
                &lexicon,
                &config.disambiguation(),
                &methods,
            )
        })
        .map_err(|e| input_error(e.into()))?;
    render_report(&reports, &config.output_dir).map_err(|e| input_error(e.into()))?;
    print!("{}", render_text(&reports));
    Ok(EXIT_OK)
}

fn cmd_plot(args: &PlotArgs) -> Result<i32, Failure> {
    let text = fs::read_to_string(&args.trajectory)
        .with_context(|| format!("cannot read {}", args.trajectory.display()))
        .map_err(input_error)?;
    let t = from_geojson(&text)
        .with_context(|| format!("in {}", args.trajectory.display()))
        .map_err(input_error)?;
    fs::write(&args.output, to_map_html(&t))
        .with_context(|| format!("cannot write {}", args.output.display()))
        .map_err(input_error)?;
    Ok(EXIT_OK)
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();

    let result = read_config(cli.config.as_deref())
        .map_err(input_error)
        .and_then(|file| match &cli.command {
            Command::BuildGazetteer(args) => cmd_build_gazetteer(args, &file),
            Command::Parse(args) => cmd_parse(args, &file),
            Command::Evaluate(args) => cmd_evaluate(args, &file),
            Command::Plot(args) => cmd_plot(args),
        });
    match result {
        Ok(code) => code,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            code
        }
    }
}
