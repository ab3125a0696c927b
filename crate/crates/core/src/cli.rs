//! The `grant-novelty` command line.
//!
//! Every subcommand writes its outputs and a `manifest.json` into `--out`.
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or
//! validation error, 3 numerical non-convergence.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ConfigLayer, Settings};
use crate::corpus::{
    dedupe_earliest, link, load_citation_events, load_grants, load_publications, write_citation_events_csv, write_grants_csv,
    write_publications_csv, write_rejects_csv, CitationEvent, Format, GrantRecord, LinkedDataset,
};
use crate::engine::{clone_probe, score_all, sensitivity_grid, write_probe_csv, write_sensitivity_csv, NoveltyTable, SENSITIVITY_GRID};
use crate::error::{Error, Result};
use crate::filter::{active_learning_loop, apply_filter, cv_auc, read_labels_csv, FileOracle, LabelPool, PromptOracle, Provenance};
use crate::studies::{
    citation_dynamics, covariate_means, flag_deciles, marginal_effect_curve, novelty_trend, prestige_comparison, productivity_comparison,
    program_comparison, table1_design, table1_regression, write_dynamics_csv, write_marginal_csv, write_paired_csv, write_programs_csv,
    write_trend_csv, NOVELTY,
};
use crate::synthkit::generate;
use crate::textpipe::{fit_corpus, summary_terms};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "GRANT_NOVELTY_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "grant-novelty", version, about = "Novelty scores for grant summaries and their relation to publication impact")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Flat TOML config file; defaults to $GRANT_NOVELTY_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for per-(agency, year) scoring.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// NSF, NIH, all, or a comma-separated list.
    #[arg(long, global = true)]
    agency: Option<String>,
    /// Scoring years, `A..B`.
    #[arg(long, global = true)]
    years: Option<String>,
    #[arg(long, global = true)]
    nu: Option<f64>,
    #[arg(long, global = true)]
    topics: Option<usize>,
    /// Past-window length in years.
    #[arg(long, global = true)]
    window: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct Linked {
    #[arg(long)]
    grants: PathBuf,
    #[arg(long)]
    pubs: PathBuf,
}

#[derive(Debug, Args)]
struct Scored {
    #[command(flatten)]
    linked: Linked,
    #[arg(long)]
    novelty: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load, validate, deduplicate and link grant and publication tables.
    Ingest {
        #[arg(long)]
        grants: PathBuf,
        #[arg(long)]
        pubs: Option<PathBuf>,
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Train the non-research classifier by active learning and label every grant.
    Filter {
        #[arg(long)]
        grants: PathBuf,
        /// CSV `grant_id,label,provenance`; label 1 marks a non-research grant.
        #[arg(long)]
        labels: PathBuf,
        /// Ask on the terminal instead of looking answers up in the labels file.
        #[arg(long)]
        interactive: bool,
    },
    /// Score every (agency, year) window and write the novelty table.
    Score {
        #[arg(long)]
        grants: PathBuf,
    },
    /// Clone-probe robustness curve for one grant.
    Probe {
        #[arg(long)]
        grants: PathBuf,
        #[arg(long)]
        novelty: PathBuf,
        #[arg(long)]
        probe: String,
        #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.02,0.04")]
        fractions: Vec<f64>,
        #[arg(long)]
        noise_sigma: Option<f64>,
    },
    /// Rescore and refit the citation regression over the (nu, topics, window) grid.
    Sensitivity {
        #[command(flatten)]
        linked: Linked,
    },
    /// Citation regression on novelty and covariates, with the marginal-effect curve.
    Regress {
        #[command(flatten)]
        scored: Scored,
    },
    /// Top-decile citation shares over years since publication.
    Dynamics {
        #[command(flatten)]
        scored: Scored,
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Novelty and citation shares per funding program.
    Programs {
        #[command(flatten)]
        scored: Scored,
        /// Program pairs to compare, `A:B,C:D`.
        #[arg(long, value_delimiter = ',')]
        pairs: Vec<String>,
    },
    /// Top-SJR journal shares of top-novel grants vs the rest.
    Prestige {
        #[command(flatten)]
        scored: Scored,
    },
    /// Publications per grant of top-novel grants vs the rest.
    Productivity {
        #[command(flatten)]
        scored: Scored,
    },
    /// Correlation of novelty with award year.
    Trend {
        #[arg(long)]
        novelty: PathBuf,
    },
    /// Generate a synthetic corpus with planted novel grants.
    Synth,
    /// Synthesize, score and run every study end to end.
    Demo,
}

/// Collects outputs and inputs for the run manifest.
struct Run {
    settings: Settings,
    out: PathBuf,
    jobs: usize,
    command: String,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    started: u64,
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: String,
    jobs: usize,
    config: ConfigLayer,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    started_unix: u64,
    finished_unix: u64,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
}

impl Run {
    fn input(&mut self, p: &Path) -> Result<()> {
        if !p.exists() {
            return Err(Error::MissingFile(p.to_path_buf()));
        }
        self.inputs.push(p.to_path_buf());
        Ok(())
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let path = self.out.join(name);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut w = BufWriter::new(File::create(&path)?);
        f(&mut w)?;
        w.flush()?;
        self.outputs.push(PathBuf::from(name));
        Ok(())
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }

    fn finish(self) -> Result<()> {
        let digest = |p: &Path, shown: &Path| -> Result<FileDigest> {
            Ok(FileDigest { path: shown.display().to_string(), sha256: sha256_file(p)? })
        };
        let inputs = self.inputs.iter().map(|p| digest(p, p)).collect::<Result<Vec<_>>>()?;
        let outputs = self.outputs.iter().map(|p| digest(&self.out.join(p), p)).collect::<Result<Vec<_>>>()?;
        let m = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            jobs: self.jobs,
            config: self.settings.snapshot(),
            inputs,
            outputs,
            started_unix: self.started,
            finished_unix: now(),
        };
        let mut w = BufWriter::new(File::create(self.out.join("manifest.json"))?);
        serde_json::to_writer_pretty(&mut w, &m)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    fn grants(&mut self, p: &Path) -> Result<Vec<GrantRecord>> {
        self.input(p)?;
        let l = load_grants(p, Format::from_path(p))?;
        if !l.rejects.is_empty() {
            log::warn!("{}: {} rejected grant row(s); run `ingest` to see them", p.display(), l.rejects.len());
        }
        Ok(l.records)
    }

    fn linked(&mut self, a: &Linked) -> Result<LinkedDataset> {
        let grants = self.grants(&a.grants)?;
        self.input(&a.pubs)?;
        let pubs = load_publications(&a.pubs, Format::from_path(&a.pubs))?;
        if !pubs.rejects.is_empty() {
            log::warn!("{}: {} rejected publication row(s)", a.pubs.display(), pubs.rejects.len());
        }
        Ok(link(grants, pubs.records))
    }

    fn novelty(&mut self, p: &Path) -> Result<NoveltyTable> {
        self.input(p)?;
        NoveltyTable::read_csv(File::open(p)?)
    }

    fn events(&mut self, p: Option<&Path>) -> Result<Vec<CitationEvent>> {
        match p {
            None => Ok(Vec::new()),
            Some(p) => {
                self.input(p)?;
                Ok(load_citation_events(p)?.records)
            }
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 1,
        Error::NonConvergence { .. } => 3,
        _ => 2,
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Config(_)) {
                eprintln!("run `grant-novelty --help` for usage");
            }
            exit_code(&e)
        }
    }
}

fn settings_for(g: &Global) -> Result<(Settings, Option<PathBuf>)> {
    let mut s = Settings::default();
    let path = g.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    if let Some(p) = &path {
        let layer = ConfigLayer::from_file(p).map_err(|e| match e {
            Error::MissingFile(p) => Error::Config(format!("config file {} not found", p.display())),
            e => e,
        })?;
        s.apply(&layer)?;
    }
    let flags = ConfigLayer {
        seed: g.seed,
        agency: g.agency.clone(),
        years: g.years.clone(),
        nu: g.nu,
        topics: g.topics,
        window_years: g.window,
        ..Default::default()
    };
    s.apply(&flags)?;
    s.validate()?;
    Ok((s, path))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Ingest { .. } => "ingest",
        Command::Filter { .. } => "filter",
        Command::Score { .. } => "score",
        Command::Probe { .. } => "probe",
        Command::Sensitivity { .. } => "sensitivity",
        Command::Regress { .. } => "regress",
        Command::Dynamics { .. } => "dynamics",
        Command::Programs { .. } => "programs",
        Command::Prestige { .. } => "prestige",
        Command::Productivity { .. } => "productivity",
        Command::Trend { .. } => "trend",
        Command::Synth => "synth",
        Command::Demo => "demo",
    }
}

fn execute(cli: Cli) -> Result<()> {
    let (settings, config_path) = settings_for(&cli.global)?;
    if matches!(cli.command, Command::Score { .. }) && config_path.is_none() {
        return Err(Error::Config(format!("`score` needs a config file: pass --config PATH or set {CONFIG_ENV}")));
    }
    let jobs = cli.global.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1);
    std::fs::create_dir_all(&cli.global.out)?;
    let mut run = Run {
        settings,
        out: cli.global.out.clone(),
        jobs,
        command: command_name(&cli.command).to_string(),
        inputs: Vec::new(),
        outputs: Vec::new(),
        started: now(),
    };
    if let Some(p) = config_path {
        run.input(&p)?;
    }
    match &cli.command {
        Command::Ingest { grants, pubs, events } => ingest(&mut run, grants, pubs.as_deref(), events.as_deref())?,
        Command::Filter { grants, labels, interactive } => filter(&mut run, grants, labels, *interactive)?,
        Command::Score { grants } => {
            let g = run.grants(grants)?;
            let table = score_all(&g, &run.settings.engine, run.jobs)?;
            write_novelty(&mut run, &table)?;
        }
        Command::Probe { grants, novelty, probe, fractions, noise_sigma } => {
            let g = run.grants(grants)?;
            let table = run.novelty(novelty)?;
            let sigma = noise_sigma.or(run.settings.clone_noise_sigma);
            let points = clone_probe(&g, &table, probe, fractions, sigma, &run.settings.engine)?;
            run.write("probe.csv", |w| write_probe_csv(w, &points))?;
        }
        Command::Sensitivity { linked } => {
            let l = run.linked(linked)?;
            let rows = sensitivity_grid(&l, &SENSITIVITY_GRID, &run.settings.engine, &run.settings.study, run.jobs)?;
            run.write("sensitivity.csv", |w| write_sensitivity_csv(w, &rows))?;
        }
        Command::Regress { scored } => {
            let (l, t) = load_scored(&mut run, scored)?;
            regress(&mut run, &l, &t)?;
        }
        Command::Dynamics { scored, events } => {
            let (l, t) = load_scored(&mut run, scored)?;
            let ev = run.events(events.as_deref())?;
            dynamics(&mut run, &l, &t, &ev)?;
        }
        Command::Programs { scored, pairs } => {
            let (l, t) = load_scored(&mut run, scored)?;
            let pairs = pairs
                .iter()
                .map(|p| {
                    p.split_once(':')
                        .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
                        .ok_or_else(|| Error::Config(format!("program pair `{p}` is not A:B")))
                })
                .collect::<Result<Vec<_>>>()?;
            programs(&mut run, &l, &t, &pairs)?;
        }
        Command::Prestige { scored } => {
            let (l, t) = load_scored(&mut run, scored)?;
            let flags = flag_deciles(&l, &t, &run.settings.study);
            let r = prestige_comparison(&l, &flags);
            run.write("prestige.csv", |w| write_paired_csv(w, &r))?;
            run.json("prestige.json", &r)?;
        }
        Command::Productivity { scored } => {
            let (l, t) = load_scored(&mut run, scored)?;
            let flags = flag_deciles(&l, &t, &run.settings.study);
            let r = productivity_comparison(&l, &flags);
            run.write("productivity.csv", |w| write_paired_csv(w, &r))?;
            run.json("productivity.json", &r)?;
        }
        Command::Trend { novelty } => {
            let t = run.novelty(novelty)?;
            trend(&mut run, &t)?;
        }
        Command::Synth => {
            synth(&mut run, "")?;
        }
        Command::Demo => demo(&mut run)?,
    }
    run.finish()
}

fn load_scored(run: &mut Run, s: &Scored) -> Result<(LinkedDataset, NoveltyTable)> {
    let l = run.linked(&s.linked)?;
    let t = run.novelty(&s.novelty)?;
    Ok((l, t))
}

fn write_novelty(run: &mut Run, table: &NoveltyTable) -> Result<()> {
    run.write("novelty.csv", |w| table.write_csv(w))?;
    if !table.skipped.is_empty() {
        run.json("skipped_windows.json", &table.skipped)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct IngestReport {
    grants_loaded: usize,
    grants_rejected: usize,
    grants_after_dedupe: usize,
    publications_loaded: usize,
    publications_rejected: usize,
    duplicate_publications: usize,
    orphan_references: usize,
    orphan_publications: usize,
    coverage: crate::corpus::Coverage,
    events_loaded: usize,
    events_rejected: usize,
}

fn ingest(run: &mut Run, grants: &Path, pubs: Option<&Path>, events: Option<&Path>) -> Result<()> {
    run.input(grants)?;
    let g = load_grants(grants, Format::from_path(grants))?;
    run.write("grant_rejects.csv", |w| write_rejects_csv(w, &g.rejects))?;
    let kept = dedupe_earliest(&g.records, &run.settings.dedupe);
    let mut report = IngestReport {
        grants_loaded: g.records.len(),
        grants_rejected: g.rejects.len(),
        grants_after_dedupe: kept.len(),
        publications_loaded: 0,
        publications_rejected: 0,
        duplicate_publications: 0,
        orphan_references: 0,
        orphan_publications: 0,
        coverage: Default::default(),
        events_loaded: 0,
        events_rejected: 0,
    };
    let linked = match pubs {
        Some(p) => {
            run.input(p)?;
            let pl = load_publications(p, Format::from_path(p))?;
            run.write("publication_rejects.csv", |w| write_rejects_csv(w, &pl.rejects))?;
            report.publications_loaded = pl.records.len();
            report.publications_rejected = pl.rejects.len();
            Some(link(kept.clone(), pl.records))
        }
        None => None,
    };
    run.write("grants.csv", |w| write_grants_csv(w, &kept))?;
    if let Some(l) = &linked {
        report.duplicate_publications = l.duplicate_publications;
        report.orphan_references = l.orphans.len();
        report.orphan_publications = l.orphan_publications;
        report.coverage = l.coverage.clone();
        run.write("publications.csv", |w| write_publications_csv(w, &l.publications))?;
        run.write("orphans.csv", |w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["pub_id", "grant_id"])?;
            for o in &l.orphans {
                c.write_record([&o.pub_id, &o.grant_id])?;
            }
            c.flush()?;
            Ok(())
        })?;
    }
    if let Some(p) = events {
        run.input(p)?;
        let ev = load_citation_events(p)?;
        report.events_loaded = ev.records.len();
        report.events_rejected = ev.rejects.len();
        run.write("citation_events.csv", |w| write_citation_events_csv(w, &ev.records))?;
        run.write("event_rejects.csv", |w| write_rejects_csv(w, &ev.rejects))?;
    }
    run.json("ingest_report.json", &report)
}

#[derive(Serialize)]
struct FilterReport {
    pool: usize,
    seed_labels: usize,
    labels: usize,
    rounds_run: usize,
    exhausted: bool,
    cv_folds: usize,
    cv_auc_mean: Option<f64>,
    cv_auc_sd: Option<f64>,
    cv_note: Option<String>,
    non_research: usize,
    threshold: f64,
    model_converged: bool,
}

fn filter(run: &mut Run, grants: &Path, labels: &Path, interactive: bool) -> Result<()> {
    let mut g = run.grants(grants)?;
    run.input(labels)?;
    let rows = read_labels_csv(File::open(labels)?)?;
    let docs: Vec<_> = g.iter().map(|x| summary_terms(&x.summary, &run.settings.engine.text)).collect();
    let (_, x) = fit_corpus(&docs, &run.settings.engine.text)?;
    let ids: Vec<String> = g.iter().map(|x| x.grant_id.clone()).collect();
    let seed: HashMap<String, bool> = rows.iter().filter(|r| r.2 == Provenance::SeedList).map(|r| (r.0.clone(), r.1)).collect();
    let n_seed = seed.len();
    let pool = LabelPool::new(ids, x.clone())?.with_seed_labels(&seed)?;
    let cfg = run.settings.active;
    let (model, pool, rep) = if interactive {
        let summaries: HashMap<String, String> = g.iter().map(|x| (x.grant_id.clone(), x.summary.clone())).collect();
        let stdin = std::io::stdin();
        let mut o = PromptOracle { input: stdin.lock(), output: std::io::stderr(), summaries: &summaries };
        active_learning_loop(pool, &mut o, &cfg)?
    } else {
        let mut o = FileOracle { labels: rows.iter().map(|r| (r.0.clone(), r.1)).collect() };
        active_learning_loop(pool, &mut o, &cfg)?
    };
    let (lx, ly) = pool.training_set();
    let (cv_auc_mean, cv_auc_sd, cv_note) = match cv_auc(&lx, &ly, run.settings.cv_folds, cfg.l2, run.settings.engine.seed) {
        Ok(c) => (Some(c.mean), Some(c.sd), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    let p = model.predict_rows(&x)?;
    apply_filter(&mut g, &p, run.settings.filter_threshold)?;
    let report = FilterReport {
        pool: g.len(),
        seed_labels: n_seed,
        labels: pool.n_labeled(),
        rounds_run: rep.rounds_run,
        exhausted: rep.exhausted,
        cv_folds: run.settings.cv_folds,
        cv_auc_mean,
        cv_auc_sd,
        cv_note,
        non_research: g.iter().filter(|x| x.is_research == Some(false)).count(),
        threshold: run.settings.filter_threshold,
        model_converged: model.converged,
    };
    run.write("grants_filtered.csv", |w| write_grants_csv(w, &g))?;
    run.write("labels.csv", |w| pool.write_labels_csv(w))?;
    run.json("filter_report.json", &report)
}

fn regress(run: &mut Run, l: &LinkedDataset, t: &NoveltyTable) -> Result<()> {
    let fits = table1_regression(l, t, &run.settings.study)?;
    let designs = table1_design(l, t, &run.settings.study);
    let report: Vec<serde_json::Value> = fits
        .iter()
        .map(|(a, f)| serde_json::json!({ "agency": a, "table": f.to_table_json("Citations") }))
        .collect();
    run.json("regression.json", &report)?;
    let grid: Vec<f64> = (0..=20).map(|i| f64::from(i) / 20.0).collect();
    for ((agency, fit), (_, _, x)) in fits.iter().zip(&designs) {
        let points = marginal_effect_curve(fit, &grid, &covariate_means(x))?;
        run.write(&format!("marginal_{agency}.csv"), |w| write_marginal_csv(w, agency, &points))?;
    }
    Ok(())
}

fn dynamics(run: &mut Run, l: &LinkedDataset, t: &NoveltyTable, ev: &[CitationEvent]) -> Result<()> {
    let flags = flag_deciles(l, t, &run.settings.study);
    let r = citation_dynamics(l, &flags, ev, &run.settings.study);
    run.write("dynamics.csv", |w| write_dynamics_csv(w, &r))?;
    run.json("dynamics.json", &r)
}

fn programs(run: &mut Run, l: &LinkedDataset, t: &NoveltyTable, pairs: &[(String, String)]) -> Result<()> {
    let flags = flag_deciles(l, t, &run.settings.study);
    let r = program_comparison(l, &flags, pairs);
    run.write("programs.csv", |w| write_programs_csv(w, &r))?;
    run.json("programs.json", &r)
}

fn trend(run: &mut Run, t: &NoveltyTable) -> Result<()> {
    let r = novelty_trend(t);
    run.write("trend.csv", |w| write_trend_csv(w, t))?;
    run.json("trend.json", &r)
}

fn synth(run: &mut Run, prefix: &str) -> Result<crate::synthkit::SynthCorpus> {
    let corpus = generate(&run.settings.synth)?;
    let dir = run.out.join(prefix);
    for p in corpus.write_dir(&dir)? {
        let rel = p.strip_prefix(&run.out).map(Path::to_path_buf).unwrap_or(p);
        run.outputs.push(rel);
    }
    Ok(corpus)
}

fn demo(run: &mut Run) -> Result<()> {
    let corpus = synth(run, "data")?;
    let table = score_all(&corpus.grants, &run.settings.engine, run.jobs)?;
    write_novelty(run, &table)?;
    let l = link(corpus.grants.clone(), corpus.publications.clone());
    regress(run, &l, &table)?;
    dynamics(run, &l, &table, &corpus.events)?;
    let names: Vec<String> = run.settings.synth.programs.iter().map(|p| p.0.clone()).collect();
    let pairs: Vec<(String, String)> = names.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
    programs(run, &l, &table, &pairs)?;
    let flags = flag_deciles(&l, &table, &run.settings.study);
    let r = prestige_comparison(&l, &flags);
    run.write("prestige.csv", |w| write_paired_csv(w, &r))?;
    run.json("prestige.json", &r)?;
    let r = productivity_comparison(&l, &flags);
    run.write("productivity.csv", |w| write_paired_csv(w, &r))?;
    run.json("productivity.json", &r)?;
    trend(run, &table)?;
    if let Some((a, fit)) = table1_regression(&l, &table, &run.settings.study)?.first() {
        let i = fit.index_of(NOVELTY).expect("novelty regressor");
        log::info!("{a}: novelty coefficient {:.3} (p = {:.2e})", fit.estimates[i], fit.p_values[i]);
    }
    Ok(())
}
