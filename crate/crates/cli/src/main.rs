use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abduce_core::extract::{extract_concepts, ExtractionConfig};
use abduce_core::harness::{
    emit_labels, evaluate, export_dot, load_dataset, AnswerParams, DatasetFormat, Engine,
    EvalParams, HarnessError, LoadOptions, QuestionInstance,
};
use abduce_core::ibe::DEFAULT_TEMPERATURE;
use abduce_core::kb::{
    build_network, load_index, open_dump, persist_index, Aggregation, IngestConfig, LineFilter,
    SemanticNetwork,
};
use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Abductive multiple-choice question answering over ConceptNet.
#[derive(Parser)]
#[command(name = "abduce", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a binary index from a ConceptNet assertion dump (.csv or .csv.gz).
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = "en")]
        lang: String,
        #[arg(long, value_enum, default_value_t = AggregationArg::Max)]
        aggregation: AggregationArg,
        /// Stop after this many retained assertions.
        #[arg(long)]
        max_edges: Option<usize>,
    },
    /// Print the concepts grounded in a piece of text.
    Extract {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        text: String,
        #[arg(long)]
        no_verbs: bool,
    },
    /// Answer one question given as generic-schema JSON.
    Answer {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        question: String,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Score a dataset against its gold labels.
    Eval {
        #[arg(long)]
        index: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        /// Write the full report, including per-question predictions, here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Write soft labels, one JSON object per question.
    EmitLabels {
        #[arg(long)]
        index: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Render the interpretation of one choice as a Graphviz digraph.
    Explain {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        question: String,
        #[arg(long)]
        choice: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregationArg {
    Max,
    Sum,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Swag,
    Hellaswag,
    Generic,
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    format: FormatArg,
    /// SWAG only: use the second-sentence prefix alone as context.
    #[arg(long)]
    sent2_only: bool,
}

#[derive(Args)]
struct ParamArgs {
    /// Cues kept per evidence-hypothesis pair.
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_TEMPERATURE)]
    temp: f64,
    /// Skip cue search; only direct evidence-hypothesis bonds count.
    #[arg(long)]
    no_context: bool,
    /// Also bond evidence concepts with each other.
    #[arg(long)]
    include_direct: bool,
    #[arg(long)]
    no_verbs: bool,
}

impl ParamArgs {
    fn answer(&self) -> AnswerParams {
        AnswerParams {
            k: self.k,
            temperature: self.temp,
            include_direct: self.include_direct,
            contextualize: !self.no_context,
            extract_verbs: !self.no_verbs,
            ..Default::default()
        }
    }
}

/// An error tagged with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

const USAGE: u8 = 1;
const DATA: u8 = 2;
const INDEX: u8 = 3;

fn fail<E: Into<anyhow::Error>>(code: u8) -> impl FnOnce(E) -> Failure {
    move |e| Failure {
        code,
        error: e.into(),
    }
}

fn harness_failure(e: HarnessError) -> Failure {
    Failure {
        code: e.exit_code() as u8,
        error: e.into(),
    }
}

fn open_index(path: &Path) -> Result<SemanticNetwork, Failure> {
    load_index(path)
        .with_context(|| format!("loading index {}", path.display()))
        .map_err(fail(INDEX))
}

fn parse_question(json: &str) -> Result<QuestionInstance, Failure> {
    let q: QuestionInstance = serde_json::from_str(json)
        .context("parsing --question")
        .map_err(fail(DATA))?;
    q.validate().map_err(|r| anyhow!(r)).map_err(fail(DATA))?;
    Ok(q)
}

fn read_data(args: &DataArgs) -> Result<Vec<QuestionInstance>, Failure> {
    let format = match args.format {
        FormatArg::Swag => DatasetFormat::Swag,
        FormatArg::Hellaswag => DatasetFormat::HellaSwag,
        FormatArg::Generic => DatasetFormat::Generic,
    };
    let opts = LoadOptions {
        swag_sent2_only: args.sent2_only,
    };
    load_dataset(&args.data, format, &opts)
        .with_context(|| format!("reading {}", args.data.display()))
        .map_err(fail(DATA))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(io::Error::from)
        .and_then(|_| writeln!(out))
        .map_err(fail(DATA))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(fail(DATA))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Ingest {
            input,
            output,
            lang,
            aggregation,
            max_edges,
        } => {
            let reader = open_dump(&input)
                .with_context(|| format!("opening {}", input.display()))
                .map_err(fail(DATA))?;
            let config = IngestConfig {
                filter: LineFilter::new(&lang),
                aggregation: match aggregation {
                    AggregationArg::Max => Aggregation::Max,
                    AggregationArg::Sum => Aggregation::Sum,
                },
                max_edges,
            };
            let (net, report) = build_network(reader, &config).map_err(fail(DATA))?;
            for e in &report.first_errors {
                log::warn!("{e}");
            }
            persist_index(&net, &output)
                .with_context(|| format!("writing {}", output.display()))
                .map_err(fail(INDEX))?;
            print_json(&serde_json::json!({
                "report": report,
                "concepts": net.concept_count(),
                "checksum": format!("{:016x}", net.checksum()),
            }))
        }
        Command::Extract {
            index,
            text,
            no_verbs,
        } => {
            let net = open_index(&index)?;
            let mut config = ExtractionConfig::default();
            config.extract_verbs = !no_verbs;
            let terms: Vec<&str> = extract_concepts(&text, &net, &config)
                .into_iter()
                .map(|c| net.concept_term(c).unwrap_or("?"))
                .collect();
            print_json(&terms)
        }
        Command::Answer {
            index,
            question,
            params,
        } => {
            let params = params.answer();
            params.validate().map_err(harness_failure)?;
            let q = parse_question(&question)?;
            let net = open_index(&index)?;
            let p = Engine::new(&net, params)
                .and_then(|e| e.answer(&q))
                .map_err(harness_failure)?;
            print_json(&p)
        }
        Command::Eval {
            index,
            data,
            limit,
            seed,
            repeats,
            report,
            params,
        } => {
            let params = EvalParams {
                answer: params.answer(),
                limit,
                seed,
                repeats,
            };
            params.answer.validate().map_err(harness_failure)?;
            if repeats == 0 {
                return Err(fail(USAGE)(anyhow!("--repeats must be at least 1")));
            }
            let questions = read_data(&data)?;
            let net = open_index(&index)?;
            let full = evaluate(&net, &questions, &params).map_err(harness_failure)?;
            if let Some(path) = report {
                let mut out = create(&path)?;
                serde_json::to_writer_pretty(&mut out, &full)
                    .map_err(io::Error::from)
                    .and_then(|_| out.flush())
                    .map_err(fail(DATA))?;
            }
            let summary = abduce_core::harness::EvalReport {
                predictions: Vec::new(),
                ..full
            };
            print_json(&summary)
        }
        Command::EmitLabels {
            index,
            data,
            out,
            params,
        } => {
            let params = params.answer();
            params.validate().map_err(harness_failure)?;
            let questions = read_data(&data)?;
            let net = open_index(&index)?;
            let mut file = create(&out)?;
            let n = emit_labels(&net, &questions, &params, &mut file).map_err(harness_failure)?;
            log::info!("wrote {n} records to {}", out.display());
            Ok(())
        }
        Command::Explain {
            index,
            question,
            choice,
            out,
            params,
        } => {
            let params = params.answer();
            params.validate().map_err(harness_failure)?;
            let q = parse_question(&question)?;
            if choice >= q.choices.len() {
                return Err(fail(USAGE)(anyhow!(
                    "--choice {choice} out of range for {} choices",
                    q.choices.len()
                )));
            }
            let net = open_index(&index)?;
            let p = Engine::new(&net, params)
                .and_then(|e| e.answer(&q))
                .map_err(harness_failure)?;
            let dot = export_dot(&p.configurations[choice], &net);
            match out {
                Some(path) => {
                    let mut f = create(&path)?;
                    f.write_all(dot.as_bytes())
                        .and_then(|_| f.flush())
                        .map_err(fail(DATA))
                }
                None => io::stdout().write_all(dot.as_bytes()).map_err(fail(DATA)),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
