//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit status: 0 on success, 1 on a
//! usage error, 2 on a data error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::alphabet::Letter;
use crate::classifier::{classify_batch, BatchReport, DistanceMatrix};
use crate::corpus::{load_all, load_manifest, CorpusManifest, Document, FetchConfig};
use crate::histogram::{count_letters, LetterHistogram};
use crate::reducer::{reduce_least_common, reduce_random, reduction_summary, sanitize};
use crate::standards::{build_standard, derive_removal_set, emit_distribution_report, rank, AggregationMode, CategoryStandard};
use crate::stats::SignificanceTable;
use crate::tsv;

/// Extension of standard files read by `classify`.
pub const STANDARD_EXT: &str = "std";

#[derive(Debug, Parser)]
#[command(name = "letterdyn", version, about = "Letter-frequency analysis, classification and reduction for text corpora")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-category (and optionally per-document) letter frequency tables.
    Analyze(AnalyzeArgs),
    /// Category standard files.
    #[command(subcommand)]
    Standard(StandardCommand),
    /// Ranked and cumulative letter table for a standard.
    Rank(RankArgs),
    /// Distance matrix and predictions for documents against standards.
    Classify(ClassifyArgs),
    /// Erase letters from a passage.
    Reduce(ReduceArgs),
    /// Significance tests.
    #[command(subcommand)]
    Stats(StatsCommand),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Also write one row per document.
    #[arg(long)]
    pub per_doc: bool,
    #[arg(long, default_value = "pooled")]
    pub mode: AggregationMode,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum StandardCommand {
    /// Build a standard from one manifest category.
    Build(StandardBuildArgs),
}

#[derive(Debug, Args)]
pub struct StandardBuildArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub category: String,
    #[arg(long, default_value = "pooled")]
    pub mode: AggregationMode,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub standard: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Directory of `*.std` standard files.
    #[arg(long)]
    pub standards: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReduceMode {
    LeastCommon,
    Random,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(long, value_enum)]
    pub mode: ReduceMode,
    /// Standard whose ranking picks the letters (least-common).
    #[arg(long)]
    pub standard: Option<PathBuf>,
    /// Cumulative percentage of letter mass to keep (least-common).
    #[arg(long)]
    pub retain: Option<f64>,
    /// Fraction of letter positions to erase (random).
    #[arg(long)]
    pub fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Map reserved characters ('/' and '&') to look-alikes before reducing.
    #[arg(long)]
    pub sanitize: bool,
    /// Write the erasure summary here instead of stdout.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum StatsCommand {
    /// Kruskal-Wallis with Dunn-Šidák pairwise tests over matrix rows.
    Kw(KwArgs),
}

#[derive(Debug, Args)]
pub struct KwArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("letterdyn: {e}");
            if let CliError::Usage(_) = e {
                eprintln!("see `letterdyn {} --help`", subcommand_name(&cli.command));
            }
            e.exit_code()
        }
    }
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Analyze(_) => "analyze",
        Command::Standard(_) => "standard build",
        Command::Rank(_) => "rank",
        Command::Classify(_) => "classify",
        Command::Reduce(_) => "reduce",
        Command::Stats(_) => "stats kw",
    }
}

pub fn execute(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Analyze(a) => analyze(a),
        Command::Standard(StandardCommand::Build(a)) => standard_build(a),
        Command::Rank(a) => rank_cmd(a),
        Command::Classify(a) => classify_cmd(a),
        Command::Reduce(a) => reduce_cmd(a),
        Command::Stats(StatsCommand::Kw(a)) => kw_cmd(a),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn stdout(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

/// Loads every manifest document; fails listing every entry that did not load.
fn load_corpus(manifest: &CorpusManifest) -> Result<Vec<Document>, CliError> {
    let mut docs = Vec::new();
    let mut failures = String::new();
    for (entry, res) in manifest.entries.iter().zip(load_all(manifest, &FetchConfig::default())) {
        match res {
            Ok(d) => docs.push(d),
            Err(e) => {
                let _ = writeln!(failures, "  {} (line {}): {e}", entry.doc_id, entry.line);
            }
        }
    }
    if failures.is_empty() {
        Ok(docs)
    } else {
        Err(CliError::Data(format!("failed to load documents:\n{}", failures.trim_end())))
    }
}

fn letters_header(first: &[&str]) -> Vec<String> {
    first.iter().map(|s| s.to_string()).chain(Letter::all().map(|l| l.to_string())).collect()
}

fn standards_for(manifest: &CorpusManifest, docs: &[Document], mode: AggregationMode) -> Result<Vec<CategoryStandard>, CliError> {
    manifest
        .categories
        .iter()
        .filter(|c| docs.iter().any(|d| &d.category == *c))
        .map(|c| {
            let hists: Vec<LetterHistogram> = docs.iter().filter(|d| &d.category == c).map(|d| count_letters(&d.text)).collect();
            build_standard(c, &hists, mode).map_err(data)
        })
        .collect()
}

fn analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    let manifest = load_manifest(&a.manifest).map_err(data)?;
    let docs = load_corpus(&manifest)?;
    let standards = standards_for(&manifest, &docs, a.mode)?;
    let out = &a.out;

    // letter-ordered category means
    let mut rows = vec![letters_header(&["category", "n_docs"])];
    for s in &standards {
        let mut r = vec![s.category.clone(), s.n_docs.to_string()];
        r.extend(s.mean_freq.percent().iter().map(|&p| tsv::full(p)));
        rows.push(r);
    }
    write_file(&out.join("frequencies.tsv"), &tsv::render(&rows))?;

    // bar heights with error bars, x = letter
    let mut header = vec!["letter".to_owned()];
    for s in &standards {
        header.push(format!("{}_percent", s.category));
        header.push(format!("{}_sd", s.category));
    }
    let mut rows = vec![header];
    for l in Letter::all() {
        let mut r = vec![l.to_string()];
        for s in &standards {
            r.push(tsv::full(s.mean_freq.get(l)));
            r.push(tsv::full(s.dispersion[l.index()]));
        }
        rows.push(r);
    }
    write_file(&out.join("fig1.tsv"), &tsv::render(&rows))?;

    // ranked per-category columns and the cumulative curve
    let ranked: Vec<_> = standards.iter().map(|s| rank(&s.mean_freq)).collect();
    let mut header = vec!["rank".to_owned()];
    for s in &standards {
        header.push(format!("{}_letter", s.category));
        header.push(format!("{}_percent", s.category));
    }
    let mut full_rows = vec![header.clone()];
    let mut table_rows = vec![header];
    let mut cum_header = vec!["k".to_owned()];
    cum_header.extend(standards.iter().map(|s| s.category.clone()));
    let mut cum_rows = vec![cum_header];
    for i in 0..26 {
        let mut full = vec![(i + 1).to_string()];
        let mut two = vec![(i + 1).to_string()];
        let mut cum = vec![(i + 1).to_string()];
        for r in &ranked {
            full.push(r.order[i].to_string());
            full.push(tsv::full(r.sorted_percent[i]));
            two.push(r.order[i].upper().to_string());
            two.push(tsv::two(r.sorted_percent[i]));
            cum.push(tsv::full(r.cumulative[i]));
        }
        full_rows.push(full);
        table_rows.push(two);
        cum_rows.push(cum);
    }
    write_file(&out.join("table1.tsv"), &tsv::render(&full_rows))?;
    write_file(&out.join("table1.txt"), &tsv::align(&table_rows))?;
    write_file(&out.join("fig2.tsv"), &tsv::render(&cum_rows))?;

    for s in &standards {
        write_file(&out.join(format!("{}.{STANDARD_EXT}", s.category)), &s.to_file_string())?;
    }

    let mut src = vec![vec!["doc_id".to_owned(), "category".into(), "letters".into(), "source_note".into()]];
    for d in &docs {
        let note = d.source_note.replace(['\t', '\n', '\r'], " ");
        src.push(vec![d.doc_id.clone(), d.category.clone(), count_letters(&d.text).total().to_string(), note]);
    }
    write_file(&out.join("documents.tsv"), &tsv::render(&src))?;

    if a.per_doc {
        let mut rows = vec![letters_header(&["doc_id", "category", "letters"])];
        for d in &docs {
            let h = count_letters(&d.text);
            let f = h.to_frequency().map_err(|e| CliError::Data(format!("{}: {e}", d.doc_id)))?;
            let mut r = vec![d.doc_id.clone(), d.category.clone(), h.total().to_string()];
            r.extend(f.percent().iter().map(|&p| tsv::full(p)));
            rows.push(r);
        }
        write_file(&out.join("per_doc.tsv"), &tsv::render(&rows))?;
    }

    stdout(&tsv::align(&table_rows));
    Ok(())
}

fn standard_build(a: &StandardBuildArgs) -> Result<(), CliError> {
    let manifest = load_manifest(&a.manifest).map_err(data)?;
    if !manifest.categories.contains(&a.category) {
        return Err(CliError::Usage(format!(
            "category '{}' is not declared in {} (declared: {})",
            a.category,
            a.manifest.display(),
            manifest.categories.join(", ")
        )));
    }
    let subset = CorpusManifest {
        categories: vec![a.category.clone()],
        entries: manifest.entries_in(&a.category).cloned().collect(),
    };
    let docs = load_corpus(&subset)?;
    let hists: Vec<LetterHistogram> = docs.iter().map(|d| count_letters(&d.text)).collect();
    let standard = build_standard(&a.category, &hists, a.mode).map_err(data)?;
    write_file(&a.out, &standard.to_file_string())
}

fn read_standard(path: &Path) -> Result<CategoryStandard, CliError> {
    CategoryStandard::parse(&read_file(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn rank_cmd(a: &RankArgs) -> Result<(), CliError> {
    let report = emit_distribution_report(&read_standard(&a.standard)?);
    write_file(&a.out, &report.to_tsv())?;
    stdout(&report.to_table());
    Ok(())
}

/// Standards in `dir`, ordered by file name.
pub fn read_standards_dir(dir: &Path) -> Result<Vec<CategoryStandard>, CliError> {
    let rd = std::fs::read_dir(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == STANDARD_EXT))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Data(format!("no *.{STANDARD_EXT} files in {}", dir.display())));
    }
    paths.iter().map(|p| read_standard(p)).collect()
}

fn classify_cmd(a: &ClassifyArgs) -> Result<(), CliError> {
    let standards = read_standards_dir(&a.standards)?;
    let manifest = load_manifest(&a.manifest).map_err(data)?;
    let docs = load_corpus(&manifest)?;
    let vectors = docs
        .iter()
        .map(|d| {
            count_letters(&d.text)
                .to_frequency()
                .map(|f| (d.doc_id.clone(), f))
                .map_err(|e| CliError::Data(format!("{}: {e}", d.doc_id)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let report = classify_batch(&vectors, &standards).map_err(data)?;
    write_batch(&a.out, "", &report)?;

    for c in &manifest.categories {
        let subset: Vec<_> = docs.iter().zip(&vectors).filter(|(d, _)| &d.category == c).map(|(_, v)| v.clone()).collect();
        if subset.is_empty() {
            continue;
        }
        let r = classify_batch(&subset, &standards).map_err(data)?;
        write_batch(&a.out, &format!("_{c}"), &r)?;
    }
    stdout(&report.predictions_tsv());
    Ok(())
}

fn write_batch(dir: &Path, suffix: &str, r: &BatchReport) -> Result<(), CliError> {
    write_file(&dir.join(format!("matrix{suffix}.tsv")), &r.matrix_tsv())?;
    write_file(&dir.join(format!("matrix{suffix}.txt")), &r.matrix_table())?;
    write_file(&dir.join(format!("predictions{suffix}.tsv")), &r.predictions_tsv())?;
    write_file(&dir.join(format!("summary{suffix}.tsv")), &r.summary_tsv())
}

fn reduce_cmd(a: &ReduceArgs) -> Result<(), CliError> {
    let raw = read_file(&a.input)?;
    let text = if a.sanitize { sanitize(&raw) } else { raw };
    let passage = match a.mode {
        ReduceMode::LeastCommon => {
            if a.fraction.is_some() || a.seed.is_some() {
                return Err(CliError::Usage("--fraction/--seed apply to --mode random only".into()));
            }
            let (Some(std_path), Some(retain)) = (&a.standard, a.retain) else {
                return Err(CliError::Usage("--mode least-common needs --standard FILE and --retain PCT".into()));
            };
            let standard = read_standard(std_path)?;
            let removal = derive_removal_set(&standard, retain).map_err(|e| CliError::Usage(e.to_string()))?;
            reduce_least_common(&text, removal.letters).map_err(data)?
        }
        ReduceMode::Random => {
            if a.standard.is_some() || a.retain.is_some() {
                return Err(CliError::Usage("--standard/--retain apply to --mode least-common only".into()));
            }
            let (Some(fraction), Some(seed)) = (a.fraction, a.seed) else {
                return Err(CliError::Usage("--mode random needs --fraction F and --seed N".into()));
            };
            if !(0.0..=1.0).contains(&fraction) {
                return Err(CliError::Usage(format!("--fraction {fraction} is outside 0..=1")));
            }
            reduce_random(&text, fraction, seed).map_err(data)?
        }
    };
    write_file(&a.out, &passage.text)?;
    let summary = reduction_summary(&passage).to_tsv();
    match &a.summary {
        Some(p) => write_file(p, &summary),
        None => {
            stdout(&summary);
            Ok(())
        }
    }
}

fn kw_cmd(a: &KwArgs) -> Result<(), CliError> {
    let m = DistanceMatrix::parse(&read_file(&a.matrix)?).map_err(|e| CliError::Data(format!("{}: {e}", a.matrix.display())))?;
    let table = SignificanceTable::compute(&m.rows).map_err(data)?;
    let out = table.to_tsv();
    write_file(&a.out, &out)?;
    stdout(&out);
    Ok(())
}
