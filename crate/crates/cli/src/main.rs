//! `prosync`: prosody transfer and expressivity evaluation from the shell.
//!
//! Exit status is 0 on success, 1 for usage or validation errors and 2 for
//! I/O failures. Diagnostics go to stderr; data goes to `-o` or stdout.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::OnceLock;

use clap::{Args, Parser, Subcommand, ValueEnum};
use prosync_core::ingest::{CONTOUR_FORMAT_VERSION, CONTROL_SPEC_VERSION};

use crate::commands::CliError;

fn long_version() -> &'static str {
    static TEXT: OnceLock<String> = OnceLock::new();
    TEXT.get_or_init(|| {
        format!(
            "{}\ncontrol-spec format {}\nf0-contour format {}",
            env!("CARGO_PKG_VERSION"),
            CONTROL_SPEC_VERSION,
            CONTOUR_FORMAT_VERSION
        )
    })
}

#[derive(Debug, Parser)]
#[command(name = "prosync", version, long_version = long_version(), about = "Prosody transfer and expressivity evaluation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate an F0 contour from a mono WAV file.
    ExtractF0(ExtractF0Args),
    /// Speaker log-F0 statistics over one or more contours.
    Stats(StatsArgs),
    /// Compile a control spec from source prosody and a target plan.
    Transfer(TransferArgs),
    /// Score a ratings export: filters, system means, Wilcoxon tests.
    Score(ScoreArgs),
    /// Filter and rank a pair manifest.
    Curate(CurateArgs),
    /// Top-label statistics and cross-language overlap of emotion labels.
    EmotionReport(EmotionArgs),
    /// Run the annotation campaign HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct PitchFlags {
    #[arg(long, default_value_t = 70.0)]
    pub f_min: f64,
    #[arg(long, default_value_t = 400.0)]
    pub f_max: f64,
    #[arg(long, default_value_t = 0.005)]
    pub frame_shift: f64,
    #[arg(long, default_value_t = 0.040)]
    pub frame_length: f64,
    #[arg(long, default_value_t = 0.15)]
    pub yin_threshold: f64,
}

#[derive(Debug, Args)]
pub struct ExtractF0Args {
    pub wav: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub pitch: PitchFlags,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(required = true)]
    pub contours: Vec<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    #[arg(long)]
    pub src_textgrid: PathBuf,
    /// Source audio; F0 is extracted with the pitch flags.
    #[arg(long, conflicts_with = "src_contour")]
    pub src_wav: Option<PathBuf>,
    /// Precomputed source contour, instead of `--src-wav`.
    #[arg(long)]
    pub src_contour: Option<PathBuf>,
    #[arg(long)]
    pub tgt_plan: PathBuf,
    #[arg(long)]
    pub align: PathBuf,
    #[arg(long)]
    pub transcript: PathBuf,
    #[arg(long)]
    pub src_stats: Option<PathBuf>,
    #[arg(long)]
    pub tgt_stats: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub no_pitch: bool,
    #[arg(long)]
    pub no_duration: bool,
    #[arg(long)]
    pub no_pauses: bool,
    #[arg(long, default_value = "words")]
    pub word_tier: String,
    #[arg(long, default_value = "phones")]
    pub phone_tier: String,
    #[arg(long, default_value_t = 0.6)]
    pub pause_s: f64,
    #[arg(long, default_value_t = 0.25)]
    pub clamp_min: f64,
    #[arg(long, default_value_t = 4.0)]
    pub clamp_max: f64,
    /// Comma-separated vowel symbols replacing the ARPAbet stress-digit rule.
    #[arg(long, value_delimiter = ',')]
    pub vowels: Option<Vec<String>>,
    #[command(flatten)]
    pub pitch: PitchFlags,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    pub ratings: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Campaign definition supplying pair durations for the agreement analysis.
    #[arg(long)]
    pub campaign: Option<PathBuf>,
    /// Also write a tab-separated summary.
    #[arg(long)]
    pub tsv: Option<PathBuf>,
    /// Restrict tests to these system pairs, written `a:b`.
    #[arg(long = "compare")]
    pub compare: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RankBy {
    Sim,
    Pitchvar,
}

#[derive(Debug, Args)]
pub struct CurateArgs {
    pub manifest: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Keep pairs whose source and target MOS are both at least this value.
    #[arg(long)]
    pub min_mos: Option<f64>,
    #[arg(long)]
    pub match_gender: bool,
    #[arg(long, value_enum)]
    pub rank: Option<RankBy>,
    /// Directory of `<pair_id>.jsonl` source contours for `--rank pitchvar`;
    /// without it contours are extracted from the source audio.
    #[arg(long)]
    pub contour_dir: Option<PathBuf>,
    #[command(flatten)]
    pub pitch: PitchFlags,
}

#[derive(Debug, Args)]
pub struct EmotionArgs {
    pub emotions: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value = "en")]
    pub lang_a: String,
    #[arg(long, default_value = "es")]
    pub lang_b: String,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Root for `/audio/...`; defaults to `<store>/audio`.
    #[arg(long)]
    pub audio_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();

    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("prosync: {e}");
            ExitCode::from(match e {
                CliError::Validation(_) => 1,
                CliError::Io { .. } => 2,
            })
        }
    }
}
