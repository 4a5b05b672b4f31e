//! Command-line front end. [`run`] is side-effect free apart from reading
//! inputs and `lexicon build --out`, and returns everything it would print.
//!
//! Numbers are printed with six decimals, rounded half to even on the exact
//! binary value.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::entailment::{loewner_k, overlap_score, Score, DEFAULT_SIGMA};
use crate::error::Result;
use crate::lexicon::{Lexicon, DEFAULT_DECAY};
use crate::mixture::{
    best_interpretation, cn_string, derive_weights, enumerate_negation_sets, interpretation_scores, size_prior,
    WordString, DEFAULT_LAMBDA,
};
use crate::negation::{alternatives, cn_word, Composition, LogicalNegation, NegationConfig};
use crate::taxonomy::Taxonomy;
use crate::text::{ActorWeights, TextCircuit};

/// What a CLI invocation produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(name = "convneg", version, about = "Conversational negation over positive-operator word meanings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Taxonomy file utilities.
    #[command(subcommand)]
    Taxonomy(TaxonomyCommand),
    /// Lexicon store utilities.
    #[command(subcommand)]
    Lexicon(LexiconCommand),
    /// Rank the alternatives of a negated word.
    NegateWord(NegateWordArgs),
    /// Weight the negation sets of a word string.
    NegateString(NegateStringArgs),
    /// Graded entailment between two words.
    Entail(EntailArgs),
    /// Text circuit commands.
    #[command(subcommand)]
    Text(TextCommand),
}

#[derive(Subcommand, Debug)]
enum TaxonomyCommand {
    /// Check that a taxonomy parses and is acyclic.
    Validate { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum LexiconCommand {
    /// Build a lexicon from a taxonomy and write it as a store file.
    Build {
        #[arg(long)]
        taxonomy: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DECAY, value_parser = parse_decay)]
        decay: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum TextCommand {
    /// Negate an actor of a script; optionally rank the other actors.
    NegateActor(NegateActorArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NegArg {
    Complement,
    Pinv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CompArg {
    Hadamard,
    Conjugate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Tsv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Measure {
    Khyp,
    Overlap,
}

#[derive(Args, Debug)]
struct NegationFlags {
    #[arg(long = "neg", value_enum, default_value = "complement")]
    neg: NegArg,
    #[arg(long = "comp", value_enum, default_value = "hadamard")]
    comp: CompArg,
    /// Hypernym weight decay used when building lexicons from taxonomies; stored lexicons keep their own.
    #[arg(long, default_value_t = DEFAULT_DECAY, value_parser = parse_decay)]
    decay: f64,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

impl NegationFlags {
    fn config(&self, sigma: f64) -> NegationConfig {
        NegationConfig {
            logical: match self.neg {
                NegArg::Complement => LogicalNegation::Complement,
                NegArg::Pinv => LogicalNegation::Pinv,
            },
            composition: match self.comp {
                CompArg::Hadamard => Composition::Hadamard,
                CompArg::Conjugate => Composition::Conjugate,
            },
            sigma,
            ..NegationConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct NegateWordArgs {
    word: String,
    #[arg(long)]
    taxonomy: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SIGMA, value_parser = parse_sigma)]
    sigma: f64,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    top: u32,
    #[command(flatten)]
    flags: NegationFlags,
}

#[derive(Args, Debug)]
struct NegateStringArgs {
    /// Space-separated words.
    words: String,
    #[arg(long)]
    follow_up: Option<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    taxonomies: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_LAMBDA, value_parser = parse_lambda)]
    lambda: f64,
    #[arg(long, default_value_t = DEFAULT_SIGMA, value_parser = parse_sigma)]
    sigma: f64,
    #[command(flatten)]
    flags: NegationFlags,
}

#[derive(Args, Debug)]
struct EntailArgs {
    a: String,
    b: String,
    #[arg(long)]
    taxonomy: PathBuf,
    #[arg(long, value_enum, default_value = "overlap")]
    measure: Measure,
    #[arg(long, default_value_t = DEFAULT_SIGMA, value_parser = parse_sigma)]
    sigma: f64,
    /// Use the conversational negation of A instead of A.
    #[arg(long)]
    negate: bool,
    #[command(flatten)]
    flags: NegationFlags,
}

#[derive(Args, Debug)]
struct NegateActorArgs {
    script: PathBuf,
    actor: String,
    #[arg(long, value_delimiter = ',', required = true)]
    taxonomies: Vec<PathBuf>,
    /// Rank the other actors instead of printing the mixture.
    #[arg(long)]
    rank: bool,
    /// Follow-up words aligned with the actor's contributing words.
    #[arg(long)]
    context: Option<String>,
    #[arg(long, default_value_t = DEFAULT_LAMBDA, value_parser = parse_lambda)]
    lambda: f64,
    #[arg(long, default_value_t = DEFAULT_SIGMA, value_parser = parse_sigma)]
    sigma: f64,
    #[command(flatten)]
    flags: NegationFlags,
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

fn parse_sigma(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err("sigma must be nonnegative".into())
    }
}

fn parse_lambda(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err("lambda must lie in (0, 1]".into())
    }
}

fn parse_decay(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err("decay must lie in (0, 1)".into())
    }
}

/// Six decimals, never a negative zero.
pub fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn render(format: Format, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    match format {
        Format::Tsv => {
            out.push_str(&header.join("\t"));
            out.push('\n');
            for row in rows {
                out.push_str(&row.join("\t"));
                out.push('\n');
            }
        }
        Format::Table => {
            let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
            for row in rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.chars().count());
                }
            }
            let line = |cells: Vec<&str>| -> String {
                let last = cells.len() - 1;
                let mut s = String::new();
                for (i, cell) in cells.into_iter().enumerate() {
                    s.push_str(cell);
                    if i < last {
                        let pad = widths[i] - cell.chars().count() + 2;
                        s.extend(std::iter::repeat_n(' ', pad));
                    }
                }
                s.push('\n');
                s
            };
            out.push_str(&line(header.to_vec()));
            for row in rows {
                out.push_str(&line(row.iter().map(String::as_str).collect()));
            }
        }
    }
    out
}

fn braces<S: AsRef<str>>(items: &[S]) -> String {
    let inner: Vec<&str> = items.iter().map(AsRef::as_ref).collect();
    format!("{{{}}}", inner.join(","))
}

fn load_lexicons(paths: &[PathBuf], decay: f64) -> Result<Vec<Arc<Lexicon>>> {
    paths
        .iter()
        .map(|p| Lexicon::load_any(p, decay).map(Arc::new))
        .collect()
}

fn split_words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

/// Parse `argv` (program name first) and execute.
pub fn run<I, T>(argv: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let (stdout, stderr) = if code == 0 { (rendered, String::new()) } else { (String::new(), rendered) };
            return CliOutput { code, stdout, stderr };
        }
    };
    let mut stderr = String::new();
    match execute(cli.command, &mut stderr) {
        Ok(stdout) => CliOutput { code: 0, stdout, stderr },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            CliOutput {
                code: 1,
                stdout: String::new(),
                stderr,
            }
        }
    }
}

fn execute(command: Command, stderr: &mut String) -> Result<String> {
    match command {
        Command::Taxonomy(TaxonomyCommand::Validate { file }) => {
            let tax = Taxonomy::load(&file)?;
            for w in tax.warnings() {
                let _ = writeln!(stderr, "warning: {w}");
            }
            let mut out = String::new();
            let _ = writeln!(out, "ok: {} concepts, {} leaves", tax.concepts().len(), tax.leaves().len());
            let _ = writeln!(out, "leaves: {}", tax.leaves().join(","));
            let _ = writeln!(out, "roots: {}", tax.roots().join(","));
            Ok(out)
        }
        Command::Lexicon(LexiconCommand::Build { taxonomy, decay, out }) => {
            let lex = Lexicon::from_taxonomy_file(&taxonomy, decay)?;
            for w in lex.taxonomy().warnings() {
                let _ = writeln!(stderr, "warning: {w}");
            }
            lex.save(&out)?;
            Ok(format!(
                "wrote {} ({} concepts, dimension {})\n",
                out.display(),
                lex.taxonomy().concepts().len(),
                lex.space_dim()
            ))
        }
        Command::NegateWord(args) => {
            let lex = Lexicon::load_any(&args.taxonomy, args.flags.decay)?;
            let cfg = args.flags.config(args.sigma);
            let ranked = alternatives(&args.word, &lex, &cfg, args.top as usize)?;
            let rows: Vec<Vec<String>> = ranked
                .iter()
                .enumerate()
                .map(|(i, (c, s))| vec![(i + 1).to_string(), c.clone(), fmt6(s.value())])
                .collect();
            Ok(render(args.flags.format, &["rank", "concept", "score"], &rows))
        }
        Command::NegateString(args) => negate_string(args),
        Command::Entail(args) => {
            let lex = Lexicon::load_any(&args.taxonomy, args.flags.decay)?;
            let cfg = args.flags.config(args.sigma);
            let a = if args.negate {
                cn_word(&args.a, &lex, &cfg)?
            } else {
                lex.word_operator(&args.a)?.clone()
            };
            let score: Score = match args.measure {
                Measure::Khyp => loewner_k(&a, lex.word_operator(&args.b)?)?,
                Measure::Overlap => overlap_score(&a, &args.b, &lex, args.sigma)?,
            };
            Ok(format!("{}\n", fmt6(score.value())))
        }
        Command::Text(TextCommand::NegateActor(args)) => negate_actor(args),
    }
}

fn negate_string(args: NegateStringArgs) -> Result<String> {
    let lexicons = load_lexicons(&args.taxonomies, args.flags.decay)?;
    let cfg = args.flags.config(args.sigma);
    let s = WordString::resolve(&split_words(&args.words), &lexicons)?;
    let sets = enumerate_negation_sets(s.len())?;
    let follow_up = args
        .follow_up
        .as_deref()
        .map(|f| WordString::resolve(&split_words(f), &lexicons))
        .transpose()?;
    let (weights, scores) = match &follow_up {
        Some(ctx) => (
            derive_weights(&s, ctx, args.lambda, args.sigma, &cfg)?,
            Some(interpretation_scores(&s, ctx, args.sigma, &cfg)?),
        ),
        None => (size_prior(&sets, args.lambda)?, None),
    };
    // surfaces vanishing negations carrying weight
    cn_string(&s, &weights, &cfg)?;
    let words = s.words();
    let rows: Vec<Vec<String>> = sets
        .iter()
        .enumerate()
        .map(|(i, set)| {
            let labels: Vec<&str> = set.iter().map(|&k| words[k]).collect();
            vec![
                braces(&labels),
                fmt6(weights[i]),
                scores.as_ref().map_or_else(|| "-".to_string(), |sc| fmt6(sc[i].1.value())),
            ]
        })
        .collect();
    let mut out = render(args.flags.format, &["subset", "weight", "score"], &rows);
    if let Some(ctx) = &follow_up {
        let (best, score) = best_interpretation(&s, ctx, args.lambda, args.sigma, &cfg)?;
        let labels: Vec<&str> = best.iter().map(|&k| words[k]).collect();
        let sep = if args.flags.format == Format::Tsv { "\t" } else { " " };
        let _ = writeln!(out, "best{sep}{}{sep}{}", braces(&labels), fmt6(score.value()));
    }
    Ok(out)
}

fn negate_actor(args: NegateActorArgs) -> Result<String> {
    let lexicons = load_lexicons(&args.taxonomies, args.flags.decay)?;
    let circuit = TextCircuit::from_file(&args.script, lexicons)?;
    let cfg = args.flags.config(args.sigma);
    if args.rank {
        let ranked = circuit.rank_alternatives(&args.actor, &cfg, args.lambda, args.sigma)?;
        let rows: Vec<Vec<String>> = ranked
            .iter()
            .enumerate()
            .map(|(i, r)| {
                vec![
                    (i + 1).to_string(),
                    r.actor.clone(),
                    braces(&r.subset_labels),
                    fmt6(r.score.value()),
                ]
            })
            .collect();
        return Ok(render(args.flags.format, &["rank", "actor", "best_subset", "score"], &rows));
    }
    let weights = match &args.context {
        Some(words) => ActorWeights::Context {
            words: split_words(words),
            lambda: args.lambda,
            sigma: args.sigma,
        },
        None => ActorWeights::SizePrior { lambda: args.lambda },
    };
    let negation = circuit.cn_actor(&args.actor, &weights, &cfg)?;
    let labels: Vec<&str> = negation.contributions.iter().map(|s| s.label.as_str()).collect();
    let rows: Vec<Vec<String>> = negation
        .mixture
        .terms()
        .iter()
        .map(|t| {
            let subset: Vec<&str> = t.subset.iter().map(|&k| labels[k]).collect();
            vec![braces(&subset), fmt6(t.weight)]
        })
        .collect();
    Ok(render(args.flags.format, &["subset", "weight"], &rows))
}
