use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use prosync_annot::CampaignDefinition;
use prosync_core::curation::{
    filter_pairs_by_mos, match_gender, parse_pairs, rank_by_pitch_variability, rank_by_similarity,
    write_pairs,
};
use prosync_core::ingest::{
    parse_contour, parse_emotions, parse_pharaoh, parse_ratings, parse_textgrid, parse_transcript,
    write_contour, write_control_spec, MalformedLine,
};
use prosync_core::model::{F0Contour, SpeakerF0Stats, TransferConfig, VowelSet};
use prosync_core::pitch::{extract_f0, read_wav, speaker_stats, PitchConfig};
use prosync_core::stats::{emotion_report, score_campaign, write_tsv, ScoreOptions};
use prosync_core::transfer::{compile, parse_target_plan, CompileOptions, PitchInputs, TransferInputs};
use serde::Serialize;
use thiserror::Error;

use crate::{
    Command, CurateArgs, EmotionArgs, ExtractF0Args, PitchFlags, RankBy, ScoreArgs, ServeArgs,
    StatsArgs, TransferArgs,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn invalid(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{}: {msg}", path.display()))
}

fn bad_lines(path: &Path, errors: &[MalformedLine]) -> CliError {
    let mut msg = format!("{}: {} malformed line(s)", path.display(), errors.len());
    for e in errors {
        let _ = write!(msg, "\n  {}:{}: {}", path.display(), e.line_no, e.reason);
    }
    CliError::Validation(msg)
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read(path: &Path) -> Result<String, CliError> {
    String::from_utf8(read_bytes(path)?).map_err(|_| invalid(path, "not valid UTF-8"))
}

/// Writes to the file, or to stdout when no path was given.
fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable output") + "\n"
}

fn pitch_config(flags: &PitchFlags) -> PitchConfig {
    PitchConfig {
        f_min: flags.f_min,
        f_max: flags.f_max,
        frame_shift_s: flags.frame_shift,
        frame_length_s: flags.frame_length,
        yin_threshold: flags.yin_threshold,
    }
}

fn contour_from_wav(path: &Path, flags: &PitchFlags) -> Result<F0Contour, CliError> {
    let audio = read_wav(io::Cursor::new(read_bytes(path)?)).map_err(|e| invalid(path, e))?;
    extract_f0(&audio.samples, audio.sample_rate, &pitch_config(flags)).map_err(|e| invalid(path, e))
}

fn load_contour(path: &Path) -> Result<F0Contour, CliError> {
    parse_contour(&read(path)?).map_err(|e| invalid(path, e))
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| invalid(path, e))
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::ExtractF0(a) => extract(a),
        Command::Stats(a) => stats(a),
        Command::Transfer(a) => transfer(a),
        Command::Score(a) => score(a),
        Command::Curate(a) => curate(a),
        Command::EmotionReport(a) => emotions(a),
        Command::Serve(a) => serve(a),
    }
}

fn extract(a: ExtractF0Args) -> Result<(), CliError> {
    let contour = contour_from_wav(&a.wav, &a.pitch)?;
    eprintln!("{}: {} frames, {} voiced", a.wav.display(), contour.frames.len(), contour.n_voiced());
    emit(a.output.as_deref(), &write_contour(&contour))
}

fn stats(a: StatsArgs) -> Result<(), CliError> {
    let contours = a
        .contours
        .iter()
        .map(|p| load_contour(p))
        .collect::<Result<Vec<_>, _>>()?;
    let stats = speaker_stats(&contours).map_err(|e| CliError::Validation(e.to_string()))?;
    emit(a.output.as_deref(), &pretty(&stats))
}

fn transfer(a: TransferArgs) -> Result<(), CliError> {
    let cfg = TransferConfig {
        pause_s: a.pause_s,
        clamp_min: a.clamp_min,
        clamp_max: a.clamp_max,
        ..TransferConfig::default()
    };
    cfg.validate().map_err(|e| CliError::Validation(e.to_string()))?;
    let vowels = match &a.vowels {
        Some(v) => VowelSet::explicit(v.iter().map(|s| s.trim().to_string())),
        None => VowelSet::default(),
    };

    let src = parse_textgrid(&read(&a.src_textgrid)?, &a.word_tier, &a.phone_tier, &vowels)
        .map_err(|e| invalid(&a.src_textgrid, e))?;
    let plans = parse_target_plan(&read(&a.tgt_plan)?).map_err(|e| invalid(&a.tgt_plan, e))?;
    let transcript = parse_transcript(&read(&a.transcript)?, &cfg.pause_punctuation);

    let align_text = read(&a.align)?;
    let lines: Vec<&str> = align_text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.len() > 1 {
        return Err(invalid(&a.align, format!("expected one utterance, found {} lines", lines.len())));
    }
    let alignment = parse_pharaoh(lines.first().copied().unwrap_or(""), src.words.len(), plans.len())
        .map_err(|e| invalid(&a.align, e))?;

    let pitch_data = if a.no_pitch {
        None
    } else {
        let contour = match (&a.src_contour, &a.src_wav) {
            (Some(c), _) => load_contour(c)?,
            (None, Some(w)) => contour_from_wav(w, &a.pitch)?,
            (None, None) => {
                return Err(CliError::Validation(
                    "pitch transfer needs --src-contour or --src-wav (or pass --no-pitch)".into(),
                ))
            }
        };
        let stats = |p: &Option<PathBuf>, flag: &str| -> Result<SpeakerF0Stats, CliError> {
            match p {
                Some(p) => load_json(p),
                None => Err(CliError::Validation(format!(
                    "pitch transfer needs {flag} (or pass --no-pitch)"
                ))),
            }
        };
        Some((contour, stats(&a.src_stats, "--src-stats")?, stats(&a.tgt_stats, "--tgt-stats")?))
    };

    let inputs = TransferInputs {
        transcript: &transcript,
        src: &src,
        plans: &plans,
        alignment: &alignment,
        pitch: pitch_data.as_ref().map(|(contour, s, t)| PitchInputs {
            contour,
            src_stats: s,
            tgt_stats: t,
        }),
        global_style: None,
    };
    let opts = CompileOptions {
        duration: !a.no_duration,
        pitch: !a.no_pitch,
        pauses: !a.no_pauses,
        vowels,
    };
    let spec = compile(&inputs, &cfg, &opts).map_err(|e| CliError::Validation(e.to_string()))?;
    emit(a.output.as_deref(), &write_control_spec(&spec))
}

fn parse_comparison(s: &str) -> Result<(String, String), CliError> {
    match s.split_once(':') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() => Ok((a.to_string(), b.to_string())),
        _ => Err(CliError::Validation(format!("--compare expects SYSTEM_A:SYSTEM_B, got {s:?}"))),
    }
}

fn score(a: ScoreArgs) -> Result<(), CliError> {
    let records = parse_ratings(&read(&a.ratings)?)
        .strict()
        .map_err(|e| bad_lines(&a.ratings, &e))?;
    let durations = match &a.campaign {
        Some(path) => {
            let def: CampaignDefinition = load_json(path)?;
            let mut d = BTreeMap::new();
            for p in def.pairs {
                d.entry(p.pair_id).or_insert(p.duration_s);
            }
            Some(d)
        }
        None => None,
    };
    let comparisons = if a.compare.is_empty() {
        None
    } else {
        Some(a.compare.iter().map(|c| parse_comparison(c)).collect::<Result<_, _>>()?)
    };
    let report = score_campaign(&records, &ScoreOptions { durations, comparisons });
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!(
        "{} records, {} items removed, {} annotators flagged, {} tests",
        records.len(),
        report.removals.len(),
        report.flagged_annotators.len(),
        report.tests.len()
    );
    if let Some(tsv) = &a.tsv {
        emit(Some(tsv), &write_tsv(&report))?;
    }
    emit(a.output.as_deref(), &pretty(&report))
}

fn curate(a: CurateArgs) -> Result<(), CliError> {
    let mut pairs = parse_pairs(&read(&a.manifest)?)
        .strict()
        .map_err(|e| bad_lines(&a.manifest, &e))?;
    let n_in = pairs.len();
    if let Some(t) = a.min_mos {
        let out = filter_pairs_by_mos(&pairs, t);
        eprintln!(
            "min-mos {t}: kept {}, dropped {} below threshold, {} without MOS",
            out.kept.len(),
            pairs.len() - out.kept.len() - out.missing_mos.len(),
            out.missing_mos.len()
        );
        for p in &out.missing_mos {
            eprintln!("  no MOS: {}", p.pair_id);
        }
        pairs = out.kept;
    }
    if a.match_gender {
        let kept = match_gender(&pairs);
        eprintln!("match-gender: kept {} of {}", kept.len(), pairs.len());
        pairs = kept;
    }
    pairs = match a.rank {
        None => pairs,
        Some(RankBy::Sim) => rank_by_similarity(&pairs).map_err(|e| invalid(&a.manifest, e))?,
        Some(RankBy::Pitchvar) => {
            let base = a.manifest.parent().unwrap_or(Path::new("."));
            let mut contours = BTreeMap::new();
            for p in &pairs {
                let c = match &a.contour_dir {
                    Some(dir) => load_contour(&dir.join(format!("{}.jsonl", p.pair_id)))?,
                    None => contour_from_wav(&base.join(&p.src.audio_path), &a.pitch)?,
                };
                contours.insert(p.pair_id.clone(), c);
            }
            rank_by_pitch_variability(&pairs, &contours).map_err(|e| invalid(&a.manifest, e))?
        }
    };
    eprintln!("{n_in} pairs in, {} out", pairs.len());
    emit(a.output.as_deref(), &write_pairs(&pairs))
}

fn emotions(a: EmotionArgs) -> Result<(), CliError> {
    let anns = parse_emotions(&read(&a.emotions)?)
        .strict()
        .map_err(|e| bad_lines(&a.emotions, &e))?;
    let report = emotion_report(&anns, &a.lang_a, &a.lang_b).map_err(|e| invalid(&a.emotions, e))?;
    emit(a.output.as_deref(), &pretty(&report))
}

fn serve(a: ServeArgs) -> Result<(), CliError> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|source| CliError::Io {
            path: PathBuf::from("<runtime>"),
            source,
        })?;
    rt.block_on(async move {
        let io_err = |path: &Path, source: io::Error| CliError::Io {
            path: path.to_path_buf(),
            source,
        };
        let svc = prosync_annot::Service::open(&a.store).await.map_err(|e| match e {
            prosync_annot::ServiceError::Io(source) => io_err(&a.store, source),
            other => invalid(&a.store, other),
        })?;
        let audio = a.audio_dir.clone().unwrap_or_else(|| a.store.join("audio"));
        let app = prosync_annot::router(Arc::new(svc), audio);
        let addr = format!("{}:{}", a.host, a.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| io_err(Path::new(&addr), e))?;
        let bound = listener.local_addr().map_err(|e| io_err(Path::new(&addr), e))?;
        eprintln!("listening on http://{bound}");
        prosync_annot::serve(listener, app)
            .await
            .map_err(|e| io_err(Path::new(&addr), e))
    })
}
