use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gradarg_core::analysis::{
    attribution_rows, base_score_sweep, distribution_rows, enumerate_decisions, relation_attribution, sweep_rows,
    unit_grid, write_csv, AttributionMethod, EnumerationFilter, RemovalFilter, Scenario,
};
use gradarg_core::corpus::{load_corpus, CorpusEntry};
use gradarg_core::dynamics::{apply_edit, Edit};
use gradarg_core::format::{parse_framework, SourceDocument};
use gradarg_core::preferences::classify;
use gradarg_core::resolver::{branch_and_pool, mupcr, ResolveConfig, TieBreakStrategy};
use gradarg_core::semantics::{evaluate, EvalConfig, EvalMode};
use gradarg_core::session::SessionStore;
use gradarg_core::{validate_structure, ArgumentId, Error, Framework, Result, SemanticsKind};

#[derive(Parser, Debug)]
#[command(name = "gradarg", version, about = "Multi-user gradual argumentation toolkit")]
struct Cli {
    /// Seed for every sampling step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for enumeration and sampling (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Decimals in printed numbers.
    #[arg(long, global = true, default_value_t = 6)]
    precision: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and structurally validate a framework.
    Validate(FrameworkArgs),
    /// Print the strength of every active argument.
    Eval {
        #[command(flatten)]
        fw: FrameworkArgs,
        #[command(flatten)]
        sem: SemanticsArgs,
        /// Use damped iteration even on acyclic graphs.
        #[arg(long)]
        iterative: bool,
    },
    /// Classify the framework's preference profile.
    Classify(FrameworkArgs),
    /// Run the conflict resolver and print the selected option.
    Resolve {
        #[command(flatten)]
        fw: FrameworkArgs,
        #[command(flatten)]
        sem: SemanticsArgs,
        /// Tie-break strategy: `lexicographic` or `rank:ID,ID,...`.
        #[arg(long, default_value = "lexicographic")]
        tie_break: String,
    },
    /// Tally the selected option over every activation combination.
    Enumerate {
        #[command(flatten)]
        scn: ScenarioArgs,
        #[command(flatten)]
        sem: SemanticsArgs,
        /// Which rows to produce.
        #[arg(long, value_enum, default_value_t = RowSelection::Table)]
        rows: RowSelection,
        /// How the risk-free row counts arguments left without a path to an option.
        #[arg(long, value_enum, default_value_t = NoRiskMode::Pruned)]
        no_risk_mode: NoRiskMode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shapley attribution of option strengths to relations.
    Attribute {
        #[command(flatten)]
        fw: FrameworkArgs,
        #[command(flatten)]
        sem: SemanticsArgs,
        /// Permutations to sample; exact enumeration when omitted.
        #[arg(long)]
        samples: Option<usize>,
        /// Options reported as the r / not-r columns (default: the first two options).
        #[arg(long, num_args = 2, value_names = ["R", "NOT_R"])]
        pair: Option<Vec<String>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vary one base score and re-run the enumeration.
    Sweep {
        #[command(flatten)]
        scn: ScenarioArgs,
        #[command(flatten)]
        sem: SemanticsArgs,
        /// Argument whose base score varies (default: the scenario's risk argument).
        #[arg(long)]
        target: Option<String>,
        /// Evenly spaced grid points over [0, 1].
        #[arg(long, default_value_t = 11)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Start the HTTP session service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory for session logs; sessions are kept in memory when omitted.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct FrameworkArgs {
    /// Path to an `.af` file or the name of a bundled corpus.
    #[arg(long)]
    framework: String,
    /// Activate every non-option argument.
    #[arg(long)]
    activate_all: bool,
    /// Activate the listed arguments.
    #[arg(long, value_delimiter = ',')]
    activate: Vec<String>,
}

#[derive(Args, Debug)]
struct SemanticsArgs {
    #[arg(long, default_value = "qe")]
    semantics: SemanticsKind,
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// Bundled corpus name.
    #[arg(long)]
    scenario: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RowSelection {
    /// All combinations, risk-active combinations and the risk-free scenario.
    Table,
    All,
    RiskActive,
    WithoutRisk,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NoRiskMode {
    /// Remove the risk argument and drop arguments that no longer reach an option.
    Pruned,
    /// Remove the risk argument and its derivation sources; keep inert arguments.
    Literal,
}

fn load_framework(args: &FrameworkArgs) -> Result<Framework> {
    let path = Path::new(&args.framework);
    let fw = if path.exists() {
        let fw = parse_framework(&SourceDocument::from_path(path)?).map_err(Error::InvalidAf)?;
        let report = validate_structure(&fw);
        if !report.is_valid() {
            return Err(Error::InvalidStructure(report));
        }
        fw
    } else {
        let name = args.framework.strip_suffix(".af").unwrap_or(&args.framework);
        load_corpus(name)?.framework
    };
    let mut targets: Vec<ArgumentId> = args
        .activate
        .iter()
        .map(|s| ArgumentId::new(s))
        .collect::<Result<_>>()?;
    if args.activate_all {
        targets.extend(fw.arguments().filter(|a| !a.is_option()).map(|a| a.id.clone()));
    }
    targets
        .into_iter()
        .try_fold(fw, |fw, id| apply_edit(&fw, &Edit::SetActive { id, active: true }))
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn no_risk_filter(corpus: &CorpusEntry, mode: NoRiskMode) -> Result<RemovalFilter> {
    match mode {
        NoRiskMode::Pruned => Ok(corpus.scenario.without_risk.clone()),
        NoRiskMode::Literal => corpus.literal_without_risk(),
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::BadRequest(e.to_string()))?;
    }
    let p = cli.precision;
    let config = ResolveConfig::default();
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Validate(args) => {
            let fw = load_framework(&args)?;
            if fw.options().is_empty() {
                return Err(Error::EmptyFramework);
            }
            let report = validate_structure(&fw);
            for w in &report.warnings {
                eprintln!("warning[{}]: {}", w.code.as_str(), w.message);
            }
            writeln!(out, "ok arguments={} relations={}", fw.len(), fw.relation_count())?;
        }
        Command::Eval { fw, sem, iterative } => {
            let fw = load_framework(&fw)?;
            let mut eval = EvalConfig::default();
            if iterative {
                eval.mode = EvalMode::Iterative;
            }
            let strengths = evaluate(&fw, sem.semantics, &eval)?;
            for (id, v) in &strengths.values {
                writeln!(out, "{id} {v:.p$}")?;
            }
        }
        Command::Classify(args) => {
            let fw = load_framework(&args)?;
            let profile = fw.total_preferences();
            let class = classify(&profile);
            let labels: Vec<String> = class.labels.iter().map(|l| format!("{l:?}")).collect();
            let (branch, pool) = branch_and_pool(&fw.options(), &profile, &class);
            let pool: Vec<&str> = pool.iter().map(|o| o.as_str()).collect();
            writeln!(
                out,
                "labels={} overall={:?} branch={branch} eligible={}",
                if labels.is_empty() {
                    "-".to_string()
                } else {
                    labels.join(",")
                },
                class.overall,
                pool.join(",")
            )?;
        }
        Command::Resolve { fw, sem, tie_break } => {
            let fw = load_framework(&fw)?;
            let strategy = parse_strategy(&tie_break)?;
            let decision = mupcr(&fw, sem.semantics, &strategy, &config)?
                .decision()
                .expect("non-interactive strategies always decide");
            write!(out, "decision={}", decision.selected)?;
            for o in fw.options() {
                write!(out, " σ({o})={:.p$}", decision.strengths.get(&o).unwrap_or(f64::NAN))?;
            }
            writeln!(
                out,
                " branch={}{}",
                decision.branch,
                if decision.tie { " tie" } else { "" }
            )?;
        }
        Command::Enumerate {
            scn,
            sem,
            rows,
            no_risk_mode,
            out: path,
        } => {
            let corpus = load_corpus(&scn.scenario)?;
            let scenario: &Scenario = &corpus.scenario;
            let risk = || corpus.risk();
            let filters = match rows {
                RowSelection::All => vec![EnumerationFilter::All],
                RowSelection::RiskActive => vec![EnumerationFilter::Active { id: risk()? }],
                RowSelection::WithoutRisk => vec![EnumerationFilter::Without(no_risk_filter(&corpus, no_risk_mode)?)],
                RowSelection::Table => vec![
                    EnumerationFilter::All,
                    EnumerationFilter::Active { id: risk()? },
                    EnumerationFilter::Without(no_risk_filter(&corpus, no_risk_mode)?),
                ],
            };
            let tables = filters
                .iter()
                .map(|f| enumerate_decisions(scenario, f, sem.semantics, &config.eval, config.tie_epsilon))
                .collect::<Result<Vec<_>>>()?;
            write_csv(
                output(&path)?,
                &distribution_rows(&tables, &scenario.pair.0, &scenario.pair.1),
            )?;
        }
        Command::Attribute {
            fw,
            sem,
            samples,
            pair,
            out: path,
        } => {
            let fw = load_framework(&fw)?;
            let method = match samples {
                Some(samples) => AttributionMethod::PermutationSampling {
                    samples,
                    seed: cli.seed,
                },
                None => AttributionMethod::ExactShapley,
            };
            let (r, nr) = match pair {
                Some(v) => (ArgumentId::new(&v[0])?, ArgumentId::new(&v[1])?),
                None => {
                    let opts = fw.options();
                    if opts.len() < 2 {
                        return Err(Error::BadRequest("attribution needs two options".into()));
                    }
                    (opts[0].clone(), opts[1].clone())
                }
            };
            let table = relation_attribution(&fw, method, sem.semantics, &config.eval)?;
            write_csv(output(&path)?, &attribution_rows(&table, &r, &nr))?;
        }
        Command::Sweep {
            scn,
            sem,
            target,
            steps,
            out: path,
        } => {
            let corpus = load_corpus(&scn.scenario)?;
            let target = match target {
                Some(t) => ArgumentId::new(&t)?,
                None => corpus
                    .scenario
                    .risk
                    .clone()
                    .ok_or_else(|| Error::BadRequest("no --target and no risk argument".into()))?,
            };
            let result = base_score_sweep(
                &corpus.scenario,
                &target,
                &unit_grid(steps),
                sem.semantics,
                &config.eval,
                config.tie_epsilon,
            )?;
            write_csv(output(&path)?, &sweep_rows(&result))?;
        }
        Command::Serve { port, host, data_dir } => {
            let addr: SocketAddr = format!("{host}:{port}")
                .parse()
                .map_err(|e| Error::BadRequest(format!("bad address: {e}")))?;
            let store = match data_dir {
                Some(dir) => SessionStore::open(dir, config)?,
                None => SessionStore::in_memory(config),
            };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(gradarg_service::serve(addr, Arc::new(store)))?;
        }
    }
    out.flush()?;
    Ok(())
}

fn parse_strategy(raw: &str) -> Result<TieBreakStrategy> {
    match raw.split_once(':') {
        None if raw == "lexicographic" => Ok(TieBreakStrategy::Lexicographic),
        Some(("rank", ids)) => Ok(TieBreakStrategy::ExternalRank {
            order: ids.split(',').map(ArgumentId::new).collect::<Result<_>>()?,
        }),
        _ => Err(Error::BadRequest(format!("unknown tie-break strategy `{raw}`"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(io::stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            match &e {
                Error::InvalidAf(errors) => {
                    for pe in errors {
                        eprintln!("  {pe}");
                    }
                }
                Error::InvalidStructure(report) => {
                    for issue in &report.errors {
                        eprintln!("  {}: {}", issue.code.as_str(), issue.message);
                    }
                }
                _ => {}
            }
            ExitCode::from(1)
        }
    }
}
