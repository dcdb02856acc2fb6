//! Command line front end and HTTP service.

pub mod config;
pub mod service;
pub mod store;

use std::ffi::OsString;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use explain_core::experiment::{self, ExperimentPlan, RunOptions};
use explain_core::gateway::{prompt_hash, CompletionGateway, HttpGateway, MockGateway, ReplayGateway};
use explain_core::model::{Iri, Method, TripleSet};
use explain_core::rdf::{group_triples, parse_ntriples};
use explain_core::triplestore::TriplestoreClient;

use config::Config;
use service::{AppState, InputRequest, OutputRequest};

#[derive(Debug, Parser)]
#[command(name = "explain", version, about = "Explanations for question answering pipeline components")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory of `*.tpl` files added to the bundled templates.
    #[arg(long, global = true)]
    pub templates: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Start the HTTP service.
    Serve {
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        mock: bool,
    },
    /// Run an experiment plan and write its reports.
    Run(RunArgs),
    /// Explain an input query or a component output.
    Explain {
        #[command(subcommand)]
        subject: ExplainSubject,
    },
    /// Score an explanation text against the component output it describes.
    Score {
        /// Explanation text file, `-` for stdin.
        #[arg(long)]
        text: PathBuf,
        /// Output triples the text should describe.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        component: Option<String>,
    },
    /// Write the rating export as CSV.
    ExportRatings {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ExportFormat::Summary)]
        format: ExportFormat,
    },
    /// Generate a synthetic component output corpus for a question dataset.
    Corpus {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the prompt an LLM explanation would be generated from.
    Prompt {
        #[command(subcommand)]
        subject: ExplainSubject,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Summary,
    Records,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Chat completions endpoint, overriding the configuration.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long, conflicts_with = "replay")]
    pub mock: bool,
    #[arg(long)]
    pub mock_table: Option<PathBuf>,
    /// Answer from a recorded audit log instead of calling a model.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub concurrency: Option<usize>,
    /// Refetch sampled outputs from this SPARQL endpoint.
    #[arg(long)]
    pub triplestore: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum ExplainSubject {
    Input(InputArgs),
    Output(OutputArgs),
}

#[derive(Debug, Args)]
pub struct LlmArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Template)]
    pub method: MethodArg,
    #[arg(long)]
    pub shots: Option<u8>,
    /// Example kinds, comma separated (O1..O4 or I1..I6).
    #[arg(long, value_delimiter = ',')]
    pub examples: Option<Vec<String>>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub mock: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// File holding the query, `-` for stdin.
    #[arg(long)]
    pub query: PathBuf,
    #[arg(long)]
    pub component: Option<String>,
    #[command(flatten)]
    pub llm: LlmArgs,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// File holding the triples, `-` for stdin.
    #[arg(long, conflicts_with = "endpoint")]
    pub data: Option<PathBuf>,
    #[arg(long, requires_all = ["graph", "component"])]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub graph: Option<String>,
    #[arg(long)]
    pub component: Option<String>,
    #[command(flatten)]
    pub llm: LlmArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Template,
    Llm,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Template => Method::Template,
            MethodArg::Llm => Method::Llm,
        }
    }
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .try_init()
        .ok();
    match execute(cli, &mut std::io::stdout()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn read_input(path: &Path) -> anyhow::Result<String> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text)?;
        Ok(text)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<Config> {
    let mut config = Config::load(cli.config.as_deref())?;
    config.apply_env(|k| std::env::var(k).ok())?;
    if let Some(dir) = &cli.templates {
        config.template_dir = Some(dir.clone());
    }
    Ok(config)
}

/// Runs one parsed command, writing its result to `out`.
pub fn execute(cli: Cli, out: &mut dyn std::io::Write) -> anyhow::Result<()> {
    let mut config = load_config(&cli)?;
    match cli.command {
        Command::Serve { bind, mock } => {
            if let Some(bind) = bind {
                config.bind = bind;
            }
            config.mock |= mock;
            config.llm.validate().map_err(anyhow::Error::msg)?;
            tokio::runtime::Runtime::new()?.block_on(service::serve(config))
        }
        Command::Run(args) => run_command(config, args, out),
        Command::Explain { subject } => {
            let mock = match &subject {
                ExplainSubject::Input(a) => a.llm.mock,
                ExplainSubject::Output(a) => a.llm.mock,
            };
            config.mock |= mock;
            let state = AppState::with_store(&config, store::Store::in_memory())?;
            let (stored, json) = match subject {
                ExplainSubject::Input(a) => (service::explain_input_sync(&state, input_request(&a)?), a.llm.json),
                ExplainSubject::Output(a) => (service::explain_output_sync(&state, output_request(&a)?), a.llm.json),
            };
            let stored = stored.map_err(|e| anyhow::anyhow!("{}", e.message()))?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&stored)?)?;
            } else {
                writeln!(out, "{}", stored.explanation.text())?;
            }
            Ok(())
        }
        Command::Score { text, data, component } => {
            let text = read_input(&text)?;
            let set = read_triple_set(&read_input(&data)?, None, component.as_deref())?;
            let grouping = explain_core::rdf::group_annotations(&set)?;
            let evaluation = explain_core::eval::score_explanation(&text, set.component(), &grouping.annotations)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&evaluation)?)?;
            Ok(())
        }
        Command::ExportRatings { out: path, format } => {
            let store = store::Store::open(&config.store_path)?;
            let csv = match format {
                ExportFormat::Summary => service::ratings_summary_csv(&store)?,
                ExportFormat::Records => service::ratings_records_csv(&store)?,
            };
            match path {
                Some(p) => std::fs::write(&p, csv).with_context(|| format!("writing {}", p.display()))?,
                None => out.write_all(csv.as_bytes())?,
            }
            Ok(())
        }
        Command::Corpus { dataset, out: dir, seed } => {
            let dataset = experiment::load_dataset(&dataset)?;
            for warning in &dataset.warnings {
                tracing::warn!("{warning}");
            }
            let entries = experiment::synthesize_corpus(&dataset, seed);
            experiment::write_corpus(&dir, &entries)?;
            writeln!(out, "wrote {} component outputs to {}", entries.len(), dir.display())?;
            Ok(())
        }
        Command::Prompt { subject } => {
            let state = AppState::with_store(&Config { mock: true, ..config }, store::Store::in_memory())?;
            let prompt = match subject {
                ExplainSubject::Input(a) => service::input_prompt(&state, &input_request(&a)?),
                ExplainSubject::Output(a) => service::output_prompt(&state, &output_request(&a)?),
            }
            .map_err(|e| anyhow::anyhow!("{}", e.message()))?;
            writeln!(out, "# sha256 {}\n{}", prompt_hash(&prompt.text), prompt.text)?;
            Ok(())
        }
    }
}

fn read_triple_set(text: &str, graph: Option<&str>, component: Option<&str>) -> anyhow::Result<TripleSet> {
    let triples = parse_ntriples(text)?;
    let component = match component {
        Some(c) => Iri::new(c)?,
        None => group_triples(&triples, None)?.annotations[0].annotated_by.clone(),
    };
    Ok(TripleSet::new(Iri::new(graph.unwrap_or("urn:graph:inline"))?, component, triples)?)
}

fn example_kinds(raw: &Option<Vec<String>>) -> anyhow::Result<Option<Vec<explain_core::prompt::ExampleKind>>> {
    raw.as_ref()
        .map(|kinds| kinds.iter().map(|k| k.trim().parse().map_err(anyhow::Error::from)).collect())
        .transpose()
}

fn input_request(a: &InputArgs) -> anyhow::Result<InputRequest> {
    Ok(InputRequest {
        query: read_input(&a.query)?,
        component: a.component.clone(),
        method: a.llm.method.into(),
        shots: a.llm.shots,
        example_kinds: example_kinds(&a.llm.examples)?,
        model_id: a.llm.model.clone(),
    })
}

fn output_request(a: &OutputArgs) -> anyhow::Result<OutputRequest> {
    if a.data.is_none() && a.endpoint.is_none() {
        bail!("give --data or --endpoint");
    }
    Ok(OutputRequest {
        triples: a.data.as_deref().map(read_input).transpose()?,
        endpoint: a.endpoint.clone(),
        graph: a.graph.clone(),
        component: a.component.clone(),
        method: a.llm.method.into(),
        shots: a.llm.shots,
        example_kinds: example_kinds(&a.llm.examples)?,
        model_id: a.llm.model.clone(),
    })
}

fn run_command(mut config: Config, args: RunArgs, out: &mut dyn std::io::Write) -> anyhow::Result<()> {
    let mut plan = ExperimentPlan::load(&args.plan)?;
    if let Some(seed) = args.seed {
        plan.seed = seed;
    }
    if let Some(endpoint) = args.endpoint {
        config.llm.endpoint_url = endpoint;
    }
    let options = RunOptions {
        concurrency: args.concurrency.unwrap_or(config.llm.concurrency),
        triplestore: args.triplestore.map(TriplestoreClient::new),
    };
    let gateway: Arc<dyn CompletionGateway> = if let Some(path) = &args.replay {
        Arc::new(ReplayGateway::from_file(path)?)
    } else if args.mock || config.mock {
        let table = args.mock_table.or(config.mock_table).map(|p| MockGateway::load_table(&p)).transpose()?;
        Arc::new(MockGateway::synthesizing().with_table(table.unwrap_or_default()))
    } else {
        config.llm.validate().map_err(anyhow::Error::msg)?;
        Arc::new(HttpGateway::new(config.llm.clone()))
    };
    let report = experiment::run_to_directory(&plan, gateway, &options, &args.out)?;
    let failed = report.trials.iter().filter(|t| t.error.is_some()).count();
    writeln!(out, "{} trials, {} failed; reports in {}", report.trials.len(), failed, args.out.display())?;
    write!(out, "{}", experiment::matrix_csv(&plan, &report.matrix)?)?;
    Ok(())
}
