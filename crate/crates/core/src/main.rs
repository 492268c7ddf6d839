use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use medleak::classify::DecisionMethod;
use medleak::corpus::{
    build_fixture_capture, fixture_registry, generate_corpus, read_corpus, write_corpus, CorpusSpec, Scenario,
};
use medleak::report::{
    analyze_files, compare_corpus, load_registry, render, render_text, Format, ReportDocument, RunConfig, EXIT_ERROR,
};

#[derive(Parser)]
#[command(
    name = "medleak",
    version,
    about = "Find cleartext health data leaks in home IoT captures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze captures and report per-device findings.
    Analyze(AnalyzeArgs),
    /// Write a labeled synthetic corpus to <dir>/corpus.jsonl.
    GenCorpus(GenCorpusArgs),
    /// Write one of the golden fixture captures.
    GenFixture(GenFixtureArgs),
    /// Score the three cleartext tests on a labeled corpus.
    Compare(CompareArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Classic pcap file; repeat for several.
    #[arg(long = "capture", required = true)]
    captures: Vec<PathBuf>,
    /// Device registry: TOML `[devices]` table or `MAC label` lines.
    #[arg(long)]
    registry: Option<PathBuf>,
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: Format,
    /// Directory holding medical-terms.txt, first-names.txt, pii-fields.txt.
    #[arg(long)]
    dict_dir: Option<PathBuf>,
    #[arg(long)]
    entropy_threshold: Option<f64>,
    #[arg(long)]
    chi_threshold: Option<f64>,
    #[arg(long)]
    min_stat_len: Option<usize>,
    /// ascii, entropy, chi-squared or majority.
    #[arg(long)]
    decision_method: Option<DecisionMethod>,
    /// Longest silence inside one activity period, seconds.
    #[arg(long)]
    gap_threshold: Option<f64>,
    /// Labeled corpus (file or directory) to add a method comparison.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenCorpusArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 5000)]
    n_cleartext: usize,
    #[arg(long, default_value_t = 5000)]
    n_encrypted: usize,
    #[arg(long, default_value_t = 64)]
    min_len: usize,
    #[arg(long, default_value_t = 2048)]
    max_len: usize,
}

#[derive(Args)]
struct GenFixtureArgs {
    /// bp-monitor-leaky, scale-encrypted or mixed-home.
    scenario: Scenario,
    #[arg(long)]
    out: PathBuf,
    /// Also write the matching device registry.
    #[arg(long)]
    registry_out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value = "text")]
    format: Format,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("medleak: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::GenCorpus(args) => {
            let spec = CorpusSpec {
                n_cleartext: args.n_cleartext,
                n_encrypted: args.n_encrypted,
                min_len: args.min_len,
                max_len: args.max_len,
                seed: args.seed,
            };
            let items = generate_corpus(&spec)?;
            let path = write_corpus(&args.out, &items)?;
            eprintln!("wrote {} payloads to {}", items.len(), path.display());
            Ok(0)
        }
        Command::GenFixture(args) => {
            write_file(&args.out, &build_fixture_capture(args.scenario))?;
            if let Some(path) = args.registry_out {
                let mut text = format!("# devices in the {} fixture\n[devices]\n", args.scenario);
                for (mac, label) in fixture_registry(args.scenario).iter() {
                    text.push_str(&format!("\"{mac}\" = \"{label}\"\n"));
                }
                write_file(&path, text.as_bytes())?;
            }
            Ok(0)
        }
        Command::Compare(args) => {
            let items = read_corpus(&args.corpus)?;
            let report = compare_corpus(&items, &RunConfig::default().classifier)?;
            let doc = ReportDocument::new(Vec::new(), Some(report));
            let out = match args.format {
                Format::Json => serde_json::to_string(&report)?,
                Format::Text => render_text(&doc),
            };
            println!("{}", out.trim_end());
            Ok(0)
        }
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<i32> {
    let mut config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(path) = &args.registry {
        let reg = load_registry(path)?;
        config
            .registry
            .extend(&reg)
            .context("merging registry into config devices")?;
    }
    if config.registry.is_empty() {
        bail!("no devices registered; pass --registry or a [devices] section in --config");
    }
    if let Some(dir) = args.dict_dir {
        config.dict_dir = Some(dir);
    }
    if let Some(v) = args.entropy_threshold {
        config.classifier.entropy_threshold = v;
    }
    if let Some(v) = args.chi_threshold {
        config.classifier.chi_threshold = v;
    }
    if let Some(v) = args.min_stat_len {
        config.classifier.min_stat_len = v;
    }
    if let Some(v) = args.decision_method {
        config.classifier.decision = v;
    }
    if let Some(v) = args.gap_threshold {
        config.gap_secs = v;
    }

    let corpus = args.corpus.as_deref().map(read_corpus).transpose()?;
    let analysis = analyze_files(&args.captures, &config, corpus.as_deref())?;
    let mut out = render(&analysis.document(), args.format);
    if !out.ends_with('\n') {
        out.push('\n');
    }
    match &args.out {
        Some(path) => write_file(path, out.as_bytes())?,
        None => std::io::stdout().lock().write_all(out.as_bytes())?,
    }
    Ok(analysis.exit_code())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
