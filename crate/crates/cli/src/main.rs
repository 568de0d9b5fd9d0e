use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use subgrammar::io::{
    corpus_to_string, load_goal_types, load_training_log, save_goal_types, training_log_to_string,
};
use subgrammar::notation::format_system;
use subgrammar::telemetry::DEFAULT_PLATEAU_WINDOW;
use subgrammar::*;

#[derive(Parser)]
#[command(name = "subgrammar", version, about = "Train, extract and exercise application subgrammars")]
struct Cli {
    /// Run corpus loops on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// Print errors to stderr as JSON objects.
    #[arg(long, global = true)]
    json_errors: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a corpus with the full grammar and record the types it uses.
    Train {
        #[arg(short, long)]
        grammar: PathBuf,
        #[arg(short, long)]
        corpus: PathBuf,
        /// Goal type list to write.
        #[arg(short, long)]
        output: PathBuf,
        /// Growth curve CSV.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Training log with inquiry responses and lexical usage.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_PLATEAU_WINDOW)]
        plateau_window: usize,
    },
    /// Extract a subgrammar and sublexicon for a goal type list.
    Extract {
        #[arg(short, long)]
        grammar: PathBuf,
        #[arg(short = 't', long)]
        goal: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Training log; supplies lexical usage and observed responses.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Drop chooser branches whose answers were never observed.
        #[arg(long, requires = "log")]
        prune_choosers: bool,
        /// Write the extraction report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Realize semantic specs.
    Generate {
        #[arg(short, long)]
        grammar: PathBuf,
        #[arg(short, long)]
        specs: PathBuf,
        /// Regenerate with this grammar when the first runs out of bounds.
        #[arg(long)]
        fallback: Option<PathBuf>,
        /// Also print step counts.
        #[arg(long)]
        steps: bool,
    },
    /// Check that a subgrammar reproduces the full grammar on a corpus.
    Verify {
        #[arg(short, long)]
        full: PathBuf,
        #[arg(short, long)]
        grammar: PathBuf,
        #[arg(short, long)]
        corpus: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Compare generation steps of two grammars.
    Bench {
        #[arg(short, long)]
        full: PathBuf,
        #[arg(short, long)]
        grammar: PathBuf,
        #[arg(short, long)]
        corpus: PathBuf,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        wall_clock: bool,
    },
    /// List a grammar's systems in compact notation.
    Systems {
        #[arg(short, long)]
        grammar: PathBuf,
    },
    /// Write the bundled biography grammar and corpora into a directory.
    Fixture {
        #[arg(short, long)]
        output: PathBuf,
    },
}

enum CliError {
    Load(LoadError),
    Write(PathBuf, std::io::Error),
    Extract(ExtractError),
    Generation(String, GenerationError),
    Mismatch(String),
    OutOfBounds(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Write(..) => 1,
            CliError::Load(LoadError::Io { .. }) => 1,
            CliError::Load(_) | CliError::Extract(_) => 2,
            CliError::Generation(_, e) if e.is_out_of_bounds() => 5,
            CliError::Generation(..) => 3,
            CliError::Mismatch(_) => 4,
            CliError::OutOfBounds(_) => 5,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Load(LoadError::Io { .. }) | CliError::Write(..) => "io",
            CliError::Load(LoadError::Parse { .. }) => "parse",
            CliError::Load(LoadError::Validation { .. }) => "validation",
            CliError::Extract(_) => "extraction",
            CliError::Generation(_, e) if e.is_out_of_bounds() => "out_of_bounds",
            CliError::OutOfBounds(_) => "out_of_bounds",
            CliError::Generation(..) => "generation",
            CliError::Mismatch(_) => "mismatch",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Load(e) => write!(f, "{e}"),
            CliError::Write(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Extract(e) => write!(f, "{e}"),
            CliError::Generation(label, e) => write!(f, "{label}: {e}"),
            CliError::Mismatch(m) | CliError::OutOfBounds(m) => write!(f, "{m}"),
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        CliError::Load(e)
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Write(path.to_path_buf(), e))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn train(
    exec: Execution,
    grammar: &Path,
    corpus: &Path,
    output: &Path,
    curve: Option<&Path>,
    log: Option<&Path>,
    window: usize,
) -> Result<(), CliError> {
    let (lattice, lexicon) = load_grammar(grammar)?;
    let specs = load_corpus(corpus)?;
    let mut t = collect_goal_types(&lattice, &lexicon, &specs, exec);
    t.goal.source = Some(corpus.display().to_string());
    for f in &t.failures {
        eprintln!("warning: {}: {}", f.label, f.message);
    }
    save_goal_types(&t.goal, output)?;
    if let Some(path) = curve {
        let file = fs::File::create(path).map_err(|e| CliError::Write(path.to_path_buf(), e))?;
        emit_growth_curve(&t.series, file)
            .map_err(|e| CliError::Write(path.to_path_buf(), std::io::Error::other(e)))?;
    }
    if let Some(path) = log {
        write_file(path, &training_log_to_string(&t.log))?;
    }
    println!(
        "{} sentences, {} failed, {} of {} types used",
        specs.len(),
        t.failures.len(),
        t.goal.len(),
        lattice.types().len()
    );
    match t.series.plateau(window) {
        Some(n) => println!("type count flat from sentence {n}"),
        None => println!("type count still growing within the last {window} sentences"),
    }
    Ok(())
}

fn extract(
    grammar: &Path,
    goal: &Path,
    output: &Path,
    log: Option<&Path>,
    prune: bool,
    report_path: Option<&Path>,
) -> Result<(), CliError> {
    let (full, lexicon) = load_grammar(grammar)?;
    let goal = load_goal_types(goal)?;
    let log = log.map(load_training_log).transpose()?;
    let options = ExtractOptions {
        responses: log.as_ref().filter(|_| prune).map(|l| l.responses.clone()),
    };
    let (sub, report) = extract_subgrammar(&full, &goal, &options).map_err(CliError::Extract)?;
    let types: BTreeSet<TypeId> = sub.types().into_iter().collect();
    let sublex = match &log {
        Some(l) => extract_sublexicon(&lexicon, &types, &|id: &LexId| l.usage.contains(id)),
        // without usage, closed-class items are judged by word class too
        None => extract_sublexicon(&lexicon, &types, &|id: &LexId| {
            lexicon.get(id.as_str()).is_some_and(|i| i.word_classes.iter().any(|c| types.contains(c)))
        }),
    };
    save_grammar(&sub, &sublex, output)?;
    if let Some(path) = report_path {
        write_file(path, &to_json(&report))?;
    }
    print!("{}", report.to_table());
    println!("lexicon          {:>4} of {}", sublex.len(), lexicon.len());
    Ok(())
}

fn generate(grammar: &Path, specs: &Path, fallback: Option<&Path>, steps: bool) -> Result<(), CliError> {
    let (lattice, lexicon) = load_grammar(grammar)?;
    let backup = fallback.map(load_grammar).transpose()?;
    let specs = load_corpus(specs)?;
    for (i, spec) in specs.iter().enumerate() {
        let result = match &backup {
            Some((fl, fx)) => generate_with_fallback((&lattice, &lexicon), (fl, fx), spec),
            None => generate_sentence(&lattice, &lexicon, spec).map(|r| (r, false)),
        };
        let (r, used) = result.map_err(|e| CliError::Generation(spec.label(i), e))?;
        let mut line = r.text.clone();
        if steps {
            line = format!("{line}\t{}", r.steps);
        }
        if used {
            line.push_str("\t(fallback)");
        }
        println!("{line}");
    }
    Ok(())
}

fn verify(exec: Execution, full: &Path, grammar: &Path, corpus: &Path, json: bool) -> Result<(), CliError> {
    let (fl, fx) = load_grammar(full)?;
    let (sl, sx) = load_grammar(grammar)?;
    let specs = load_corpus(corpus)?;
    let v = verify_consistency((&fl, &fx), (&sl, &sx), &specs, exec);
    if json {
        print!("{}", to_json(&v));
    } else {
        for s in v.sentences.iter().filter(|s| !s.equal) {
            let why = match (&s.error, s.out_of_bounds) {
                (_, true) => "out of bounds".to_string(),
                (Some(e), _) => e.clone(),
                (None, _) => format!("{:?} vs {:?}", s.full_text, s.sub_text),
            };
            println!("{}: {why}", s.label);
        }
        println!("{} of {} sentences equal", v.equal_count(), specs.len());
        if let Some(r) = v.aggregate_step_ratio() {
            println!("step ratio {r:.4}");
        }
    }
    let bad = specs.len() - v.equal_count();
    if bad == 0 {
        Ok(())
    } else if v.out_of_bounds_count() == bad {
        Err(CliError::OutOfBounds(format!("{bad} of {} sentences are outside the subgrammar", specs.len())))
    } else {
        Err(CliError::Mismatch(format!("{bad} of {} sentences differ", specs.len())))
    }
}

fn bench(
    exec: Execution,
    full: &Path,
    grammar: &Path,
    corpus: &Path,
    json: bool,
    wall_clock: bool,
) -> Result<(), CliError> {
    let (fl, fx) = load_grammar(full)?;
    let (sl, sx) = load_grammar(grammar)?;
    let specs = load_corpus(corpus)?;
    let b = benchmark((&fl, &fx), (&sl, &sx), &specs, exec, wall_clock);
    if json {
        print!("{}", to_json(&b));
    } else {
        print!("{}", b.to_table());
    }
    Ok(())
}

fn fixture_files(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Write(dir.to_path_buf(), e))?;
    write_file(&dir.join("biography.grammar.json"), fixture::GRAMMAR)?;
    write_file(&dir.join("biography.corpus.jsonl"), &corpus_to_string(&fixture::corpus()))?;
    write_file(&dir.join("out_of_domain.jsonl"), &corpus_to_string(&fixture::out_of_domain()))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match cli.command {
        Command::Train { grammar, corpus, output, curve, log, plateau_window } => train(
            exec,
            &grammar,
            &corpus,
            &output,
            curve.as_deref(),
            log.as_deref(),
            plateau_window,
        ),
        Command::Extract { grammar, goal, output, log, prune_choosers, report } => {
            extract(&grammar, &goal, &output, log.as_deref(), prune_choosers, report.as_deref())
        }
        Command::Generate { grammar, specs, fallback, steps } => {
            generate(&grammar, &specs, fallback.as_deref(), steps)
        }
        Command::Verify { full, grammar, corpus, json } => verify(exec, &full, &grammar, &corpus, json),
        Command::Bench { full, grammar, corpus, json, wall_clock } => {
            bench(exec, &full, &grammar, &corpus, json, wall_clock)
        }
        Command::Systems { grammar } => {
            let (lattice, _) = load_grammar(&grammar)?;
            for s in lattice.systems() {
                println!("{}", format_system(s));
            }
            Ok(())
        }
        Command::Fixture { output } => fixture_files(&output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json_errors = cli.json_errors;
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if json_errors {
                eprintln!("{}", json!({"error": e.kind(), "message": e.to_string(), "exit_code": e.code()}));
            } else {
                eprintln!("error: {e}");
                if let CliError::Load(LoadError::Validation { report, .. }) = &e {
                    eprint!("{report}");
                }
            }
            ExitCode::from(e.code())
        }
    }
}
