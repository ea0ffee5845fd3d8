//! Command-line front end. Each subcommand reads its inputs, calls one
//! library operation and writes JSON plus an aligned text table into
//! `--out`, together with `manifest.json` (argument echo and SHA-256 digests
//! of every input and output).
//!
//! Exit codes: 0 success, 1 domain error (the error name is printed first),
//! 2 usage error.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::blocks::{self, detect_blocks, verify_perron_with};
use crate::corpus::{self, CorpusConfig, TermDocumentMatrix, Vocabulary};
use crate::error::Error;
use crate::eval::{self, Comparison, QueryVector, RecallGrid, RetrievalIndex};
use crate::par::Execution;
use crate::perturb::{self, BridgeWordSetup, TwoByTwoProblem};
use crate::select::{self, SelectionPolicy};
use crate::spectral::{self, SvdTriplets, TripletSelection};
use crate::{fixtures, io, report};

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "perron-lsa",
    version,
    about = "Topic-block structure of term-document matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct Common {
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Relative cutoff for nonzero singular values.
    #[arg(long, global = true, default_value_t = spectral::DEFAULT_TOL)]
    tol: f64,
    /// Singular-vector entries at or below this fraction of the maximum are zeros.
    #[arg(long = "zero-tol", global = true, default_value_t = blocks::DEFAULT_ZERO_TOL)]
    zero_tol: f64,
    /// Nonzero entries at or below this fraction of the maximum are pseudo-zeros.
    #[arg(long = "pseudo-tol", global = true, default_value_t = blocks::DEFAULT_PSEUDO_TOL)]
    pseudo_tol: f64,
    /// Relative eigenvalue gap below which perturbation series are refused.
    #[arg(long = "gap-tol", global = true, default_value_t = perturb::DEFAULT_GAP_TOL)]
    gap_tol: f64,
    /// Term weighting applied before the decomposition.
    #[arg(long, global = true, value_enum, default_value_t = Weighting::None)]
    weighting: Weighting,
    /// Run single-threaded.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Weighting {
    None,
    LogEntropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Policy {
    Dot,
    CrossCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CompareMode {
    Scaled,
    Unscaled,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Term-document matrix from a text file with one document per line.
    Build {
        #[arg(long)]
        docs: PathBuf,
        /// Stop words, one per line.
        #[arg(long)]
        stoplist: Option<PathBuf>,
        #[arg(long = "min-frequency", default_value_t = 3)]
        min_frequency: usize,
    },
    /// Singular value decomposition.
    Svd {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Block structure from sign-homogeneous singular vectors.
    Blocks {
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Precomputed decomposition (svd.json).
        #[arg(long)]
        svd: Option<PathBuf>,
    },
    /// Bridge-word perturbation prediction, or the 2x2 closed form.
    Perturb {
        /// Matrix containing the bridge term.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Unperturbed blocks, `name: doc doc ...`.
        #[arg(long)]
        partition: Option<PathBuf>,
        /// Bridge term: 1-based id, or a word when --vocab is given.
        #[arg(long = "bridge-term")]
        bridge_term: Option<String>,
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// 1-based eigenpair indices of the unperturbed matrix.
        #[arg(long, value_delimiter = ',')]
        targets: Option<Vec<usize>>,
        /// `a,b,d,f,z,eps` for the 2x2 problem.
        #[arg(
            long = "two-by-two",
            value_delimiter = ',',
            num_args = 1,
            allow_hyphen_values = true
        )]
        two_by_two: Option<Vec<f64>>,
        #[arg(long, default_value_t = perturb::DEFAULT_THETA)]
        theta: f64,
    },
    /// Per-topic triplet contributions and leading-vector choice.
    Select {
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long)]
        svd: Option<PathBuf>,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long, value_enum, default_value_t = Policy::Dot)]
        policy: Policy,
    },
    /// Retrieval evaluation over one or more representations.
    Eval {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        judgments: PathBuf,
        /// `full`, `1,2,5`, `first:K` or `leading`, optionally prefixed with
        /// `log-entropy:`; repeat for several representations.
        #[arg(long = "select", default_value = "full")]
        select: Vec<String>,
        /// Needed by `leading`.
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Policy::Dot)]
        policy: Policy,
        #[arg(long, value_enum, default_value_t = CompareMode::Scaled)]
        compare: CompareMode,
    },
    /// Total-preserving random reassignment of tokens.
    Shuffle {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Number of shuffles; shuffle k uses seed + k.
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Reports word entropies over this partition when given.
        #[arg(long)]
        partition: Option<PathBuf>,
    },
    /// Writes the bundled example corpus and its perturbed variant.
    Pe1,
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Parses `argv` (program name first) and runs one subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(Failure::Domain(e)) => {
            eprintln!("{}: {e}", e.name());
            1
        }
    }
}

/// Collects inputs and outputs of one run for the manifest.
struct Run<'a> {
    cli: &'a Cli,
    inputs: Vec<(String, String)>,
    outputs: Vec<(String, String)>,
}

impl<'a> Run<'a> {
    fn new(cli: &'a Cli) -> Self {
        Run {
            cli,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    fn exec(&self) -> Execution {
        if self.cli.common.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    fn input(&mut self, path: &Path) -> Outcome<String> {
        let text = std::fs::read_to_string(path).map_err(Error::from)?;
        self.inputs
            .push((path.display().to_string(), digest(text.as_bytes())));
        Ok(text)
    }

    fn write(&mut self, name: &str, text: &str) -> Outcome<()> {
        let path = self.cli.common.out.join(name);
        io::write_text(&path, text)?;
        self.outputs
            .push((name.to_string(), digest(text.as_bytes())));
        Ok(())
    }

    fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Outcome<()> {
        let text = io::to_json_string(value)?;
        self.write(name, &text)
    }

    fn matrix(&mut self, path: &Path) -> Outcome<TermDocumentMatrix> {
        let text = self.input(path)?;
        Ok(io::parse_matrix(&text, &path.display().to_string())?)
    }

    fn vocab(&mut self, path: &Path) -> Outcome<Vocabulary> {
        let text = self.input(path)?;
        Ok(io::parse_vocabulary(&text, &path.display().to_string())?)
    }

    fn partition(&mut self, path: &Path) -> Outcome<corpus::TopicPartition> {
        let text = self.input(path)?;
        Ok(io::parse_partition(&text, &path.display().to_string())?)
    }

    fn weighted(&self, m: TermDocumentMatrix) -> TermDocumentMatrix {
        match self.cli.common.weighting {
            Weighting::None => m,
            Weighting::LogEntropy => corpus::apply_log_entropy_weighting(&m),
        }
    }

    /// SVD from `--svd`, or computed from `--matrix` after weighting.
    fn decomposition(
        &mut self,
        matrix: &Option<PathBuf>,
        svd: &Option<PathBuf>,
    ) -> Outcome<(SvdTriplets, Option<TermDocumentMatrix>)> {
        match (matrix, svd) {
            (Some(_), Some(_)) => Err(usage("give either --matrix or --svd, not both")),
            (None, None) => Err(usage("one of --matrix or --svd is required")),
            (None, Some(p)) => {
                let text = self.input(p)?;
                let dump: io::SvdDump = serde_json::from_str(&text).map_err(Error::from)?;
                Ok((dump.to_svd()?, None))
            }
            (Some(p), None) => {
                let m = self.matrix(p)?;
                let m = self.weighted(m);
                let s = spectral::svd(&m, self.cli.common.tol)?;
                Ok((s, Some(m)))
            }
        }
    }

    fn finish(mut self) -> Outcome<()> {
        let inputs: Vec<_> = self
            .inputs
            .iter()
            .map(|(p, d)| json!({"path": p, "sha256": d}))
            .collect();
        let outputs: Vec<_> = self
            .outputs
            .iter()
            .map(|(p, d)| json!({"path": p, "sha256": d}))
            .collect();
        let manifest = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.cli,
            "inputs": inputs,
            "outputs": outputs,
        });
        self.write_json("manifest.json", &manifest)
    }
}

fn digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

fn check_common(c: &Common) -> Outcome<()> {
    let named = [
        ("--tol", c.tol),
        ("--zero-tol", c.zero_tol),
        ("--pseudo-tol", c.pseudo_tol),
        ("--gap-tol", c.gap_tol),
    ];
    for (flag, v) in named {
        if !(v > 0.0 && v.is_finite()) {
            return Err(usage(format!("{flag} must be a positive number, got {v}")));
        }
    }
    if c.zero_tol >= 1.0 || c.pseudo_tol >= 1.0 {
        return Err(usage("--zero-tol and --pseudo-tol must be below 1"));
    }
    if c.pseudo_tol < c.zero_tol {
        return Err(usage("--pseudo-tol must not be below --zero-tol"));
    }
    Ok(())
}

fn execute(cli: &Cli) -> Outcome<()> {
    check_common(&cli.common)?;
    let mut run = Run::new(cli);
    match &cli.command {
        Command::Build {
            docs,
            stoplist,
            min_frequency,
        } => cmd_build(&mut run, docs, stoplist.as_deref(), *min_frequency)?,
        Command::Svd { matrix } => cmd_svd(&mut run, matrix)?,
        Command::Blocks { matrix, svd } => cmd_blocks(&mut run, matrix, svd)?,
        Command::Perturb {
            matrix,
            partition,
            bridge_term,
            vocab,
            targets,
            two_by_two,
            theta,
        } => {
            if let Some(params) = two_by_two {
                cmd_two_by_two(&mut run, params, *theta)?
            } else {
                let (Some(matrix), Some(partition), Some(term)) = (matrix, partition, bridge_term)
                else {
                    return Err(usage(
                        "perturb needs --matrix, --partition and --bridge-term (or --two-by-two)",
                    ));
                };
                cmd_bridge(
                    &mut run,
                    matrix,
                    partition,
                    term,
                    vocab.as_deref(),
                    targets.as_deref(),
                )?
            }
        }
        Command::Select {
            matrix,
            svd,
            partition,
            policy,
        } => cmd_select(&mut run, matrix, svd, partition, *policy)?,
        Command::Eval {
            matrix,
            vocab,
            queries,
            judgments,
            select,
            partition,
            policy,
            compare,
        } => {
            let paths = EvalPaths {
                matrix,
                vocab,
                queries,
                judgments,
                partition: partition.as_deref(),
            };
            cmd_eval(&mut run, &paths, select, *policy, *compare)?
        }
        Command::Shuffle {
            matrix,
            seed,
            count,
            partition,
        } => cmd_shuffle(&mut run, matrix, *seed, *count, partition.as_deref())?,
        Command::Pe1 => cmd_pe1(&mut run)?,
    }
    run.finish()
}

fn cmd_build(
    run: &mut Run,
    docs: &Path,
    stoplist: Option<&Path>,
    min_frequency: usize,
) -> Outcome<()> {
    if min_frequency == 0 {
        return Err(usage("--min-frequency must be at least 1"));
    }
    let text = run.input(docs)?;
    let mut config = CorpusConfig {
        min_total_frequency: min_frequency,
        ..CorpusConfig::default()
    };
    if let Some(p) = stoplist {
        let words = run.input(p)?;
        config.stoplist = words
            .lines()
            .map(|w| w.trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
    }
    let lines: Vec<&str> = text.lines().collect();
    let (m, vocab) = corpus::build_matrix(&lines, &config)?;
    let m = run.weighted(m);
    run.write("matrix.txt", &io::format_matrix(&m))?;
    run.write("vocab.txt", &io::format_vocabulary(&vocab))?;
    Ok(())
}

fn cmd_svd(run: &mut Run, matrix: &Path) -> Outcome<()> {
    let (s, _) = run.decomposition(&Some(matrix.to_path_buf()), &None)?;
    run.write_json("svd.json", &io::SvdDump::from_svd(&s))?;
    run.write("svd.txt", &report::singular_vector_table(&s, s.rank()))?;
    Ok(())
}

fn cmd_blocks(run: &mut Run, matrix: &Option<PathBuf>, svd: &Option<PathBuf>) -> Outcome<()> {
    let (s, m) = run.decomposition(matrix, svd)?;
    let c = &run.cli.common;
    let r = detect_blocks(&s, c.zero_tol, c.pseudo_tol)?;
    let mut value = r.to_json();
    if let Some(m) = &m {
        let d = verify_perron_with(m, &s, c.zero_tol);
        value["perron"] = json!({
            "v1_strictly_positive": d.v1_strictly_positive,
            "sigma1_simple": d.sigma1_simple,
            "v1_zero_docs": d.v1_zero_docs.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "n_components": d.n_components,
            "consistent": d.consistent(),
        });
    }
    run.write_json("blocks.json", &value)?;
    run.write("blocks.txt", &report::block_table(&r))?;
    Ok(())
}

fn cmd_two_by_two(run: &mut Run, params: &[f64], theta: f64) -> Outcome<()> {
    let [a, b, d, f, z, eps] = params else {
        return Err(usage("--two-by-two takes six values a,b,d,f,z,eps"));
    };
    if !(theta > 0.0 && theta < 1.0) {
        return Err(usage("--theta must be in (0, 1)"));
    }
    let p = TwoByTwoProblem::new(*a, *b, *d, *f, *z, *eps)?;
    let sol = perturb::two_by_two_eigen(&p)?;
    let regime = perturb::classify_regime(&p, theta);
    run.write_json(
        "two_by_two.json",
        &json!({"problem": p, "solution": sol, "regime": regime, "theta": theta}),
    )
}

fn cmd_bridge(
    run: &mut Run,
    matrix: &Path,
    partition: &Path,
    term: &str,
    vocab: Option<&Path>,
    targets: Option<&[usize]>,
) -> Outcome<()> {
    let m = run.matrix(matrix)?;
    let p = run.partition(partition)?;
    let term_id = match term.parse::<usize>() {
        Ok(0) => return Err(usage("--bridge-term ids are 1-based")),
        Ok(id) => id - 1,
        Err(_) => {
            let Some(vp) = vocab else {
                return Err(usage("--bridge-term given as a word needs --vocab"));
            };
            let v = run.vocab(vp)?;
            v.id(term)
                .ok_or_else(|| usage(format!("--bridge-term {term:?} is not in the vocabulary")))?
        }
    };
    let targets: Option<Vec<usize>> = match targets {
        Some(t) if t.contains(&0) => return Err(usage("--targets are 1-based")),
        Some(t) => Some(t.iter().map(|i| i - 1).collect()),
        None => None,
    };
    let setup = BridgeWordSetup::from_matrix(&m, p.topics(), term_id)?;
    let pred = perturb::bridge_word_prediction(&setup, targets.as_deref(), run.cli.common.gap_tol)?;
    run.write_json("perturbation.json", &pred.to_json())?;
    run.write("perturbation.txt", &report::perturbation_table(&pred))?;
    Ok(())
}

fn policy(p: Policy) -> SelectionPolicy {
    match p {
        Policy::Dot => SelectionPolicy::DotProduct,
        Policy::CrossCheck => SelectionPolicy::CrossCheck,
    }
}

fn cmd_select(
    run: &mut Run,
    matrix: &Option<PathBuf>,
    svd: &Option<PathBuf>,
    partition: &Path,
    pol: Policy,
) -> Outcome<()> {
    let (s, _) = run.decomposition(matrix, svd)?;
    let p = run.partition(partition)?;
    let norms = select::topic_norm_contributions(&s, &p)?;
    let dots = select::indicator_dot_products(&s, &p, select::SHORTLIST)?;
    let leading = select::select_leading_vectors(&s, &p, policy(pol))?;
    run.write_json(
        "select.json",
        &json!({"topic_norms": norms, "dot_products": dots, "leading": leading}),
    )?;
    let mut text = report::topic_norm_table(&norms);
    text.push('\n');
    text.push_str(&report::leading_selection_table(&leading));
    run.write("select.txt", &text)?;
    Ok(())
}

struct EvalPaths<'a> {
    matrix: &'a Path,
    vocab: &'a Path,
    queries: &'a Path,
    judgments: &'a Path,
    partition: Option<&'a Path>,
}

enum Representation {
    Full,
    Explicit(Vec<usize>),
    First(usize),
    Leading,
}

fn parse_select(spec: &str, default_weighting: Weighting) -> Outcome<(Weighting, Representation)> {
    let (weighting, rest) = match spec.strip_prefix("log-entropy:") {
        Some(r) => (Weighting::LogEntropy, r),
        None => match spec.strip_prefix("none:") {
            Some(r) => (Weighting::None, r),
            None => (default_weighting, spec),
        },
    };
    let rep = match rest {
        "full" => Representation::Full,
        "leading" => Representation::Leading,
        r if r.starts_with("first:") => {
            let k = r["first:".len()..]
                .parse::<usize>()
                .ok()
                .filter(|&k| k > 0)
                .ok_or_else(|| usage(format!("--select {spec:?}: first:K needs K >= 1")))?;
            Representation::First(k)
        }
        r => {
            let ids = r
                .split(',')
                .map(|t| t.trim().parse::<usize>().ok().filter(|&i| i > 0))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| {
                    usage(format!(
                        "--select {spec:?}: expected full, leading, first:K or 1-based ids"
                    ))
                })?;
            Representation::Explicit(ids)
        }
    };
    Ok((weighting, rep))
}

fn file_stem(i: usize, spec: &str) -> String {
    let clean: String = spec
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    format!("curve_{}_{clean}.csv", i + 1)
}

fn cmd_eval(
    run: &mut Run,
    paths: &EvalPaths,
    specs: &[String],
    pol: Policy,
    compare: CompareMode,
) -> Outcome<()> {
    let parsed = specs
        .iter()
        .map(|s| parse_select(s, run.cli.common.weighting))
        .collect::<Outcome<Vec<_>>>()?;
    let raw = run.matrix(paths.matrix)?;
    let vocab = run.vocab(paths.vocab)?;
    if vocab.len() != raw.n_terms() {
        return Err(Failure::Domain(Error::DimensionMismatch(format!(
            "vocabulary has {} terms, matrix has {}",
            vocab.len(),
            raw.n_terms()
        ))));
    }
    let qtext = run.input(paths.queries)?;
    let queries = io::parse_queries(&qtext, &paths.queries.display().to_string())?;
    let jtext = run.input(paths.judgments)?;
    let judgments = io::parse_judgments(&jtext, &paths.judgments.display().to_string())?;
    let partition = match paths.partition {
        Some(p) => Some(run.partition(p)?),
        None => None,
    };
    let comparison = match compare {
        CompareMode::Scaled => Comparison::ScaledV,
        CompareMode::Unscaled => Comparison::UnscaledV,
    };
    let base_queries: Vec<(String, QueryVector)> = queries
        .iter()
        .map(|(id, terms)| (id.clone(), QueryVector::from_terms(terms, &vocab)))
        .collect();
    let dropped: BTreeMap<&str, usize> = base_queries
        .iter()
        .filter(|(_, q)| q.dropped() > 0)
        .map(|(id, q)| (id.as_str(), q.dropped()))
        .collect();
    let global = corpus::log_entropy_global_weights(&raw);
    let weighted = corpus::apply_log_entropy_weighting(&raw);
    let mut cache: BTreeMap<bool, SvdTriplets> = BTreeMap::new();
    let grid = RecallGrid::default();
    let mut summaries = Vec::new();
    let mut table_rows = Vec::new();
    for (i, (spec, (w, rep))) in specs.iter().zip(&parsed).enumerate() {
        let log = *w == Weighting::LogEntropy;
        let m = if log { &weighted } else { &raw };
        let qs: Vec<(String, QueryVector)> = if log {
            base_queries
                .iter()
                .map(|(id, q)| (id.clone(), q.log_entropy_weighted(&global)))
                .collect()
        } else {
            base_queries.clone()
        };
        let index = match rep {
            Representation::Full => RetrievalIndex::full(m),
            _ => {
                let s = match cache.entry(log) {
                    Entry::Occupied(e) => e.into_mut(),
                    Entry::Vacant(e) => e.insert(spectral::svd(m, run.cli.common.tol)?),
                };
                let sel = match rep {
                    Representation::Explicit(ids) => TripletSelection::new(ids.clone(), s.rank())?,
                    Representation::First(k) => TripletSelection::first(*k, s.rank())?,
                    Representation::Leading => {
                        let Some(p) = &partition else {
                            return Err(usage("--select leading needs --partition"));
                        };
                        select::select_leading_vectors(s, p, policy(pol))?.selection
                    }
                    Representation::Full => unreachable!(),
                };
                RetrievalIndex::reduced(s, &sel, comparison)?
            }
        };
        let summary = eval::evaluate(&qs, &judgments, &index, &grid, run.exec())?;
        run.write(
            &file_stem(i, spec),
            &io::curve_csv(&summary.recall, &summary.precision),
        )?;
        table_rows.push((spec.clone(), summary.mean_precision));
        summaries.push(json!({
            "select": spec,
            "mean_precision": summary.mean_precision,
            "recall": summary.recall,
            "precision": summary.precision,
            "evaluated": summary.per_query.len(),
            "skipped": summary.skipped,
            "per_query": summary.per_query.iter().map(|r| json!({
                "qid": r.qid,
                "mean_precision": r.curve.mean_precision,
            })).collect::<Vec<_>>(),
        }));
    }
    run.write_json(
        "eval.json",
        &json!({"configs": summaries, "out_of_vocabulary": dropped}),
    )?;
    run.write("eval.txt", &report::mean_precision_table(&table_rows))?;
    Ok(())
}

fn cmd_shuffle(
    run: &mut Run,
    matrix: &Path,
    seed: u64,
    count: usize,
    partition: Option<&Path>,
) -> Outcome<()> {
    if count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    let m = run.matrix(matrix)?;
    let p = match partition {
        Some(path) => Some(run.partition(path)?),
        None => None,
    };
    let seeds: Vec<u64> = (0..count as u64).map(|k| seed.wrapping_add(k)).collect();
    let shuffled = corpus::shuffle_ensemble(&m, &seeds, run.exec())?;
    let mut summary = Vec::new();
    for (k, (s, sm)) in seeds.iter().zip(&shuffled).enumerate() {
        let name = format!("shuffled_{}.matrix", k + 1);
        run.write(&name, &io::format_matrix(sm))?;
        let mut entry = json!({"seed": s, "matrix": name});
        if let Some(p) = &p {
            let ent = corpus::all_word_entropies(sm, p)?;
            let mean = ent.iter().sum::<f64>() / ent.len().max(1) as f64;
            entry["entropies"] = json!(ent);
            entry["mean_entropy"] = json!(mean);
        }
        summary.push(entry);
    }
    let mut value = json!({"shuffles": summary});
    if let Some(p) = &p {
        let ent = corpus::all_word_entropies(&m, p)?;
        value["original_entropies"] = json!(ent);
    }
    run.write_json("shuffle.json", &value)
}

fn cmd_pe1(run: &mut Run) -> Outcome<()> {
    run.write("pe1.matrix", fixtures::PE1_MATRIX)?;
    run.write("pe1.vocab", fixtures::PE1_VOCAB)?;
    run.write("pe1.partition", fixtures::PE1_PARTITION)?;
    run.write("pe1_docs.txt", fixtures::PE1_DOCS)?;
    run.write("pe1_kinetic.matrix", fixtures::PE1_KINETIC_MATRIX)?;
    run.write("pe1_kinetic.vocab", fixtures::PE1_KINETIC_VOCAB)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn select_specs() {
        assert!(matches!(
            parse_select("first:18", Weighting::None),
            Ok((Weighting::None, Representation::First(18)))
        ));
        assert!(matches!(
            parse_select("log-entropy:1,2,5", Weighting::None),
            Ok((Weighting::LogEntropy, Representation::Explicit(_)))
        ));
        assert!(parse_select("first:0", Weighting::None).is_err());
        assert!(parse_select("1,x", Weighting::None).is_err());
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(Cli::try_parse_from(["perron-lsa", "frobnicate"]).is_err());
        assert!(Cli::try_parse_from(["perron-lsa", "svd"]).is_err());
        let cli = Cli::try_parse_from(["perron-lsa", "pe1", "--tol=-1"]).unwrap();
        assert!(matches!(check_common(&cli.common), Err(Failure::Usage(_))));
    }

    #[test]
    fn digest_is_hex_sha256() {
        assert_eq!(
            digest(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn stems_are_file_safe() {
        assert_eq!(
            file_stem(0, "log-entropy:first:18"),
            "curve_1_log_entropy_first_18.csv"
        );
    }
}
