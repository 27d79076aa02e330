// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ambiguity_core::ambiguity::{display_histogram, Region, ScoreConfig};
use ambiguity_core::analysis::{analyze, cell_histograms, read_scores_file, write_scores_file};
use ambiguity_core::corpus::{
    filter_by_vigilance, group_by_cell, load_responses, load_stimuli, write_responses, write_stimuli, CellKey,
};
use ambiguity_core::report::{
    correlate, load_ratings, rank, rank_by_delta_partition, render_histogram, render_scatter, scatter_points,
    Direction, Metric, RatingDimension, RatingScale, Side,
};
use ambiguity_core::study::{replay_log, StudyConfig, StudyService, SystemClock};
use ambiguity_core::synth::{demo_targets, generate, SynthOptions};
use ambiguity_core::textpipe::{LexiconBundle, LexiconOptions, PipelineConfig, TextPipeline};
use ambiguity_core::{AmbiguityScore, AnalysisOptions, RankedList, Thresholds};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ambiguity", version, about = "Perceptual ambiguity from description entropy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a corpus and report record and cell counts.
    Ingest {
        #[arg(long)]
        stimuli: PathBuf,
        #[arg(long)]
        responses: PathBuf,
        #[arg(long)]
        no_vigilance_filter: bool,
    },
    /// Run one description through the text pipeline.
    Tokens {
        #[arg(long)]
        text: String,
        #[command(flatten)]
        lexicon: LexiconArgs,
    },
    /// Score every image and write the scores table.
    Analyze {
        #[arg(long)]
        stimuli: PathBuf,
        #[arg(long)]
        responses: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        no_vigilance_filter: bool,
        #[arg(long, default_value_t = 5)]
        min_responses: usize,
        /// Region split points, e.g. `h05=4,h3=4`.
        #[arg(long, default_value = "h05=4,h3=4")]
        thresholds: String,
        #[command(flatten)]
        lexicon: LexiconArgs,
    },
    /// Lowest and highest images by one metric.
    Rank {
        #[arg(long)]
        scores: PathBuf,
        /// h3, h05 or delta.
        #[arg(long, default_value = "h3")]
        metric: Metric,
        /// Keep only images with long-duration entropy above this value.
        #[arg(long, conflicts_with = "h3_below")]
        h3_above: Option<f64>,
        /// Keep only images with long-duration entropy at or below this value.
        #[arg(long)]
        h3_below: Option<f64>,
        #[arg(long, default_value_t = 5)]
        top: usize,
        #[arg(long, default_value_t = 5)]
        bottom: usize,
    },
    /// Render an SVG chart.
    Plot(PlotArgs),
    /// Pearson correlation of long-duration entropy with mean ratings.
    Correlate {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        ratings: PathBuf,
        /// interestingness, powerfulness or engagement.
        #[arg(long)]
        dimension: RatingDimension,
        #[arg(long, default_value_t = 1)]
        scale_min: i32,
        #[arg(long, default_value_t = 7)]
        scale_max: i32,
    },
    /// Run the collection service over HTTP.
    Serve {
        /// Study configuration (JSON). Defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        stimuli: PathBuf,
        /// Directory the stimulus paths are relative to.
        #[arg(long)]
        assets: PathBuf,
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// fsync after every event.
        #[arg(long)]
        sync: bool,
    },
    /// Rebuild the responses file from a service event log.
    Export {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic demo corpus.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 2021)]
        seed: u64,
    },
    /// Write the bundled lexicon files for editing.
    Lexicons {
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotType {
    /// Short- against long-duration entropy, colored by category.
    Scatter,
    /// Token histogram of one (image, duration) cell.
    Histogram,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long = "type", value_enum)]
    kind: PlotType,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    stimuli: PathBuf,
    /// Scores table (scatter).
    #[arg(long, required_if_eq("kind", "scatter"))]
    scores: Option<PathBuf>,
    /// Responses file (histogram).
    #[arg(long, required_if_eq("kind", "histogram"))]
    responses: Option<PathBuf>,
    #[arg(long, required_if_eq("kind", "histogram"))]
    image: Option<String>,
    #[arg(long, required_if_eq("kind", "histogram"))]
    duration: Option<u32>,
    #[arg(long)]
    no_vigilance_filter: bool,
    #[command(flatten)]
    lexicon: LexiconArgs,
}

#[derive(Args)]
struct LexiconArgs {
    /// Directory with replacement lexicon files.
    #[arg(long)]
    lexicons: Option<PathBuf>,
    /// Keep repeated tokens within one description.
    #[arg(long)]
    no_dedupe: bool,
    /// Tag for words missing from the lexicon.
    #[arg(long, value_enum, default_value_t = UnknownTag::Noun)]
    unknown_tag: UnknownTag,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnknownTag {
    Noun,
    Other,
}

impl LexiconArgs {
    fn pipeline(&self) -> Result<TextPipeline> {
        let lexicon = match &self.lexicons {
            Some(dir) => LexiconBundle::from_dir(dir, LexiconOptions::default())
                .with_context(|| format!("loading lexicons from {}", dir.display()))?,
            None => LexiconBundle::bundled(),
        };
        let config = PipelineConfig {
            dedupe_within_description: !self.no_dedupe,
            unknown_word_tag: match self.unknown_tag {
                UnknownTag::Noun => ambiguity_core::textpipe::PosTag::Noun,
                UnknownTag::Other => ambiguity_core::textpipe::PosTag::Other,
            },
            ..PipelineConfig::default()
        };
        Ok(TextPipeline::new(lexicon, config))
    }
}

fn read_scores(path: &Path) -> Result<Vec<AmbiguityScore>> {
    let rows = read_scores_file::<f64>(path, ScoreConfig::default().min_responses)
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(rows.into_iter().map(|r| r.score).collect())
}

fn print_ranked(title: &str, list: &RankedList) {
    println!("{title}");
    for (i, (id, value)) in list.entries.iter().enumerate() {
        println!("{:>3}  {id}  {value:.2}", i + 1);
    }
    if !list.skipped.is_empty() {
        println!("     ({} images without this metric)", list.skipped.len());
    }
}

fn ingest(stimuli: &Path, responses: &Path, filter: bool) -> Result<()> {
    let stimuli = load_stimuli(stimuli)?;
    let all = load_responses(responses)?;
    let kept = if filter { filter_by_vigilance(&all) } else { all.clone() };
    let cells = group_by_cell(&kept, &stimuli)?;
    let mean = if cells.is_empty() {
        0.0
    } else {
        kept.len() as f64 / cells.len() as f64
    };
    println!("stimuli            {}", stimuli.len());
    println!("records            {}", all.len());
    println!("after vigilance    {}", kept.len());
    println!("cells              {}", cells.len());
    println!("mean per cell      {mean:.1}");
    println!();
    println!("cell\tdescriptions");
    for (cell, texts) in &cells {
        println!("{cell}\t{}", texts.len());
    }
    Ok(())
}

fn analyze_cmd(
    stimuli: &Path,
    responses: &Path,
    out: &Path,
    filter: bool,
    min_responses: usize,
    thresholds: &str,
    lexicon: &LexiconArgs,
) -> Result<()> {
    let thresholds: Thresholds = thresholds.parse().map_err(anyhow::Error::msg)?;
    let options = AnalysisOptions {
        vigilance_filter: filter,
        score: ScoreConfig {
            min_responses,
            ..ScoreConfig::default()
        },
        thresholds,
    };
    let pipeline = lexicon.pipeline()?;
    let analysis = analyze::<f64>(
        &load_responses(responses)?,
        &load_stimuli(stimuli)?,
        &pipeline,
        &options,
    )?;
    write_scores_file(out, &analysis.rows, &options.score)?;

    let mut regions: BTreeMap<Region, usize> = BTreeMap::new();
    for row in &analysis.rows {
        if let Some(region) = row.region {
            *regions.entry(region).or_default() += 1;
        }
    }
    let low = analysis.rows.iter().filter(|r| r.score.low_confidence).count();
    println!("scored {} images into {}", analysis.rows.len(), out.display());
    for (region, n) in regions {
        println!("  {:<20} {n}", region.to_string());
    }
    println!("  low confidence       {low}");
    println!("  hedged descriptions  {}", analysis.hedge_count);
    Ok(())
}

fn rank_cmd(
    scores: &Path,
    metric: Metric,
    above: Option<f64>,
    below: Option<f64>,
    top: usize,
    bottom: usize,
) -> Result<()> {
    let scores = read_scores(scores)?;
    let partition = match (above, below) {
        (Some(t), None) => Some((t, Side::Above)),
        (None, Some(t)) => Some((t, Side::Below)),
        _ => None,
    };
    let filtered: Vec<AmbiguityScore> = match partition {
        Some((t, side)) => {
            if metric == Metric::Delta {
                let r = rank_by_delta_partition(&scores, t, side, bottom.max(top).max(1))?;
                let lowest = RankedList {
                    entries: r.lowest.entries.into_iter().take(bottom).collect(),
                    ..r.lowest
                };
                let highest = RankedList {
                    entries: r.highest.entries.into_iter().take(top).collect(),
                    ..r.highest
                };
                if let Some(note) = &lowest.partition_note {
                    println!("{note}");
                }
                print_ranked("lowest", &lowest);
                print_ranked("highest", &highest);
                return Ok(());
            }
            scores
                .into_iter()
                .filter(|s| s.h_long().is_some_and(|h| side.admits(h, t)))
                .collect()
        }
        None => scores,
    };
    if filtered.is_empty() {
        bail!("no images left after filtering");
    }
    if bottom > 0 {
        print_ranked("lowest", &rank(&filtered, metric, Direction::Lowest, bottom)?);
    }
    if top > 0 {
        print_ranked("highest", &rank(&filtered, metric, Direction::Highest, top)?);
    }
    Ok(())
}

fn histogram_cmd(
    stimuli: &Path,
    responses: &Path,
    image: &str,
    duration: u32,
    out: &Path,
    filter: bool,
    lexicon: &LexiconArgs,
) -> Result<()> {
    let pipeline = lexicon.pipeline()?;
    let (histograms, _) = cell_histograms(&load_responses(responses)?, &load_stimuli(stimuli)?, &pipeline, filter)?;
    let cell = CellKey::new(image, duration);
    let hist = histograms
        .get(&cell)
        .with_context(|| format!("no descriptions for {cell}"))?;
    render_histogram(&display_histogram(hist), out)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn scatter_cmd(scores: &Path, stimuli: &Path, out: &Path) -> Result<()> {
    let scatter = scatter_points(&read_scores(scores)?, &load_stimuli(stimuli)?);
    for (id, reason) in &scatter.skipped {
        log::warn!("skipping {id}: {reason}");
    }
    render_scatter(&scatter.points, out)?;
    println!("wrote {} ({} points)", out.display(), scatter.points.len());
    Ok(())
}

fn correlate_cmd(scores: &Path, ratings: &Path, dimension: RatingDimension, scale: RatingScale) -> Result<()> {
    let ratings = load_ratings(ratings, scale)?;
    let r: f64 = correlate(&read_scores(scores)?, &ratings, dimension)?;
    println!("r({dimension}, H_long) = {r:.4}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn serve_cmd(
    config: Option<&Path>,
    stimuli: &Path,
    assets: PathBuf,
    log_path: &Path,
    host: &str,
    port: u16,
    sync: bool,
) -> Result<()> {
    let config = match config {
        Some(p) => StudyConfig::load(p)?,
        None => StudyConfig::default(),
    };
    let stimuli = Arc::new(load_stimuli(stimuli)?);
    let service = StudyService::with_log(config, stimuli, Box::new(SystemClock), log_path, sync)?;
    log::info!(
        "recovered {} sessions from {}",
        service.state().sessions().len(),
        log_path.display()
    );
    let addr: SocketAddr = format!("{host}:{port}").parse().context("bad listen address")?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(ambiguity_server::serve(ambiguity_server::router(service, assets), addr))?;
    Ok(())
}

fn export_cmd(log_path: &Path, out: &Path) -> Result<()> {
    let replay = replay_log(log_path)?;
    if replay.truncated {
        log::warn!("ignored an incomplete final event in {}", log_path.display());
    }
    let n = write_responses(out, &replay.state.export_records())?;
    println!("exported {n} records from {} events", replay.events);
    Ok(())
}

fn synth_cmd(out_dir: &Path, seed: u64) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let lexicon = LexiconBundle::bundled();
    let corpus = generate(
        &demo_targets(&lexicon, seed),
        &lexicon,
        SynthOptions {
            seed,
            ..SynthOptions::default()
        },
    );
    write_stimuli(out_dir.join("stimuli.jsonl"), &corpus.stimuli)?;
    let n = write_responses(out_dir.join("responses.jsonl"), &corpus.responses.records)?;
    println!(
        "wrote {} stimuli and {n} responses to {}",
        corpus.stimuli.len(),
        out_dir.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest {
            stimuli,
            responses,
            no_vigilance_filter,
        } => ingest(&stimuli, &responses, !no_vigilance_filter),
        Command::Tokens { text, lexicon } => {
            let processed = lexicon.pipeline()?.process(&text);
            println!(
                "{}",
                serde_json::json!({"tokens": processed.tokens, "hedge_count": processed.hedge_count})
            );
            Ok(())
        }
        Command::Analyze {
            stimuli,
            responses,
            out,
            no_vigilance_filter,
            min_responses,
            thresholds,
            lexicon,
        } => analyze_cmd(
            &stimuli,
            &responses,
            &out,
            !no_vigilance_filter,
            min_responses,
            &thresholds,
            &lexicon,
        ),
        Command::Rank {
            scores,
            metric,
            h3_above,
            h3_below,
            top,
            bottom,
        } => rank_cmd(&scores, metric, h3_above, h3_below, top, bottom),
        Command::Plot(plot) => match (plot.kind, plot.scores, plot.responses, plot.image, plot.duration) {
            (PlotType::Scatter, Some(scores), ..) => scatter_cmd(&scores, &plot.stimuli, &plot.out),
            (PlotType::Histogram, _, Some(responses), Some(image), Some(duration)) => histogram_cmd(
                &plot.stimuli,
                &responses,
                &image,
                duration,
                &plot.out,
                !plot.no_vigilance_filter,
                &plot.lexicon,
            ),
            _ => bail!("missing arguments for this plot type"),
        },
        Command::Correlate {
            scores,
            ratings,
            dimension,
            scale_min,
            scale_max,
        } => correlate_cmd(
            &scores,
            &ratings,
            dimension,
            RatingScale {
                min: scale_min,
                max: scale_max,
            },
        ),
        Command::Serve {
            config,
            stimuli,
            assets,
            log,
            host,
            port,
            sync,
        } => serve_cmd(config.as_deref(), &stimuli, assets, &log, &host, port, sync),
        Command::Export { log, out } => export_cmd(&log, &out),
        Command::Synth { out_dir, seed } => synth_cmd(&out_dir, seed),
        Command::Lexicons { out_dir } => {
            LexiconBundle::write_bundled(&out_dir)?;
            println!("wrote lexicons to {}", out_dir.display());
            Ok(())
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
