//! Windowed novelty scoring.
//!
//! For each (agency, year) a tf-idf vocabulary, an NMF topic model and a
//! one-class SVM are fit on the agency's grants from `[year − WS, year − 1]`.
//! Current-year grants are projected through the frozen pipeline and their
//! raw distance `ρ − Σ αᵢ K(xᵢ, x)` recorded. Raw distances from every
//! window are pooled and min-max scaled once, so 1 marks the most novel
//! grant across all agencies and years.

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use log::{info, warn};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::corpus::{Agency, GrantRecord, LinkedDataset};
use crate::detector::{default_gamma, ocsvm_fit_with, KernelSpec, OcSvmConfig, OcSvmModel};
use crate::error::{Error, Result};
use crate::factorize::{nmf_fit, nmf_transform, TopicModel};
use crate::rng::{derive_seed, stream};
use crate::textpipe::{summary_terms, tfidf_fit_transform, TermCounts, TextConfig, TfIdfModel, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Rbf,
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub window_years: usize,
    pub topics: usize,
    pub nu: f64,
    pub kernel: KernelKind,
    /// RBF width; `None` uses `1 / (k · mean per-dimension variance)` of the window's loads.
    pub gamma: Option<f64>,
    pub text: TextConfig,
    pub seed: u64,
    /// Inclusive scoring range; `None` scores every year present.
    pub years: Option<(i32, i32)>,
    /// `None` scores every agency present.
    pub agencies: Option<Vec<Agency>>,
    pub min_history: usize,
    pub nmf_max_iter: usize,
    pub nmf_tol: f64,
    pub transform_max_iter: usize,
    pub transform_tol: f64,
    pub svm_tol: f64,
    pub svm_max_iter: usize,
    pub kernel_cache_rows: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            window_years: 2,
            topics: 50,
            nu: 0.05,
            kernel: KernelKind::Rbf,
            gamma: None,
            text: TextConfig::default(),
            seed: 0,
            years: None,
            agencies: None,
            min_history: 100,
            nmf_max_iter: 200,
            nmf_tol: 1e-4,
            transform_max_iter: 300,
            transform_tol: 1e-6,
            svm_tol: 1e-4,
            svm_max_iter: 10_000_000,
            kernel_cache_rows: 20_000,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.window_years < 1 {
            return bad("window_years must be >= 1".into());
        }
        if self.topics < 1 {
            return bad("topics must be >= 1".into());
        }
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return bad(format!("nu {} outside (0, 1]", self.nu));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return bad(format!("gamma must be positive, got {g}"));
            }
        }
        if let Some((a, b)) = self.years {
            if a > b {
                return bad(format!("empty year range {a}..{b}"));
            }
        }
        if self.nmf_max_iter == 0 || self.transform_max_iter == 0 || self.svm_max_iter == 0 {
            return bad("iteration limits must be >= 1".into());
        }
        self.text.validate().map_err(|e| Error::Config(e.to_string()))
    }

    fn kernel_spec(&self, loads: &Array2<f64>) -> KernelSpec {
        match self.kernel {
            KernelKind::Linear => KernelSpec::Linear,
            KernelKind::Rbf => KernelSpec::Rbf { gamma: self.gamma.unwrap_or_else(|| default_gamma(loads)) },
        }
    }

    fn svm_config(&self, kernel: KernelSpec) -> OcSvmConfig {
        OcSvmConfig {
            tol: self.svm_tol,
            max_iter: self.svm_max_iter,
            full_cache_rows: self.kernel_cache_rows,
            ..OcSvmConfig::new(self.nu, kernel)
        }
    }
}

/// Frozen tf-idf, topic and detector models for one window.
#[derive(Debug, Clone)]
pub struct WindowModel {
    pub tfidf: TfIdfModel,
    pub topics: TopicModel,
    pub svm: OcSvmModel,
}

impl WindowModel {
    pub fn fit(past: &[TermCounts], cfg: &EngineConfig, seed: u64) -> Result<WindowModel> {
        let vocab = Vocabulary::from_counts(past, cfg.text.min_df, cfg.text.max_df_ratio)?;
        let (tfidf, v) = tfidf_fit_transform(past, vocab, cfg.text.normalize);
        let (_, topics) = nmf_fit(&v, cfg.topics, seed, cfg.nmf_max_iter, cfg.nmf_tol)?;
        // Past grants are re-projected exactly as current grants will be.
        let mut loads = Array2::<f64>::zeros((past.len(), topics.topics()));
        for (i, mut row) in loads.rows_mut().into_iter().enumerate() {
            let w = nmf_transform(&topics, &v.row_vec(i), cfg.transform_max_iter, cfg.transform_tol)?;
            row.iter_mut().zip(w).for_each(|(d, x)| *d = x);
        }
        let kernel = cfg.kernel_spec(&loads);
        let svm = ocsvm_fit_with(&loads, &cfg.svm_config(kernel))?;
        Ok(WindowModel { tfidf, topics, svm })
    }

    pub fn loads(&self, doc: &TermCounts, cfg: &EngineConfig) -> Result<Vec<f64>> {
        nmf_transform(&self.topics, &self.tfidf.transform(doc), cfg.transform_max_iter, cfg.transform_tol)
    }

    pub fn raw_distance(&self, doc: &TermCounts, cfg: &EngineConfig) -> Result<f64> {
        self.svm.raw_novelty(&self.loads(doc, cfg)?)
    }
}

pub fn window_seed(cfg: &EngineConfig, agency: &Agency, year: i32) -> u64 {
    derive_seed(cfg.seed, &format!("window/{agency}"), &[i64::from(year)])
}

/// Indices of non-excluded grants of `agency` with fiscal year in `[year − ws, year − 1]`.
pub fn past_window(grants: &[GrantRecord], agency: &Agency, year: i32, ws: usize) -> Vec<usize> {
    let first = year - ws as i32;
    (0..grants.len())
        .filter(|&i| {
            let g = &grants[i];
            &g.agency == agency && !g.excluded() && g.fiscal_year >= first && g.fiscal_year < year
        })
        .collect()
}

fn current_year(grants: &[GrantRecord], agency: &Agency, year: i32) -> Vec<usize> {
    (0..grants.len())
        .filter(|&i| &grants[i].agency == agency && !grants[i].excluded() && grants[i].fiscal_year == year)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct YearScores {
    pub agency: Agency,
    pub year: i32,
    /// Indices into the input grant slice.
    pub grants: Vec<usize>,
    pub raw: Vec<f64>,
    pub past_size: usize,
}

/// Raw distances for one agency's grants in `year`.
pub fn score_year(grants: &[GrantRecord], agency: &Agency, year: i32, cfg: &EngineConfig) -> Result<YearScores> {
    let current = current_year(grants, agency, year);
    let past = past_window(grants, agency, year, cfg.window_years);
    if current.is_empty() {
        return Ok(YearScores { agency: agency.clone(), year, grants: current, raw: Vec::new(), past_size: past.len() });
    }
    if past.len() < cfg.min_history {
        return Err(Error::InsufficientHistory { found: past.len(), required: cfg.min_history });
    }
    let past_docs: Vec<TermCounts> = past.iter().map(|&i| summary_terms(&grants[i].summary, &cfg.text)).collect();
    let model = WindowModel::fit(&past_docs, cfg, window_seed(cfg, agency, year))?;
    let raw = current
        .iter()
        .map(|&i| model.raw_distance(&summary_terms(&grants[i].summary, &cfg.text), cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(YearScores { agency: agency.clone(), year, grants: current, raw, past_size: past.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoveltyRow {
    pub grant_id: String,
    pub agency: Agency,
    pub program: String,
    pub division: String,
    pub year: i32,
    pub raw_distance: f64,
    pub novelty_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedWindow {
    pub agency: Agency,
    pub year: i32,
    pub found: usize,
    pub required: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoveltyTable {
    pub rows: Vec<NoveltyRow>,
    pub min: f64,
    pub max: f64,
    pub skipped: Vec<SkippedWindow>,
}

pub const NOVELTY_COLUMNS: [&str; 7] =
    ["grant_id", "agency", "program", "division", "year", "raw_distance", "novelty_score"];

impl NoveltyTable {
    /// Scales pooled rows; `raw_distance` must be set, `novelty_score` is overwritten.
    pub fn from_raw(mut rows: Vec<NoveltyRow>, skipped: Vec<SkippedWindow>) -> NoveltyTable {
        let raw: Vec<f64> = rows.iter().map(|r| r.raw_distance).collect();
        let (scores, min, max) = min_max_scale(&raw);
        rows.iter_mut().zip(scores).for_each(|(r, s)| r.novelty_score = s);
        NoveltyTable { rows, min, max, skipped }
    }

    /// Score of a raw distance against this table's scaling, clamped to [0, 1].
    pub fn scale(&self, raw: f64) -> f64 {
        if self.max > self.min {
            ((raw - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    pub fn scores(&self) -> HashMap<String, f64> {
        self.rows.iter().map(|r| (r.grant_id.clone(), r.novelty_score)).collect()
    }

    pub fn get(&self, grant_id: &str) -> Option<&NoveltyRow> {
        self.rows.iter().find(|r| r.grant_id == grant_id)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(NOVELTY_COLUMNS)?;
        for r in &self.rows {
            w.write_record([
                r.grant_id.clone(),
                r.agency.to_string(),
                r.program.clone(),
                r.division.clone(),
                r.year.to_string(),
                r.raw_distance.to_string(),
                r.novelty_score.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a table written by [`NoveltyTable::write_csv`]; scores are taken as stored.
    pub fn read_csv<R: Read>(input: R) -> Result<NoveltyTable> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        let col = |name: &str| {
            headers.iter().position(|h| h.eq_ignore_ascii_case(name)).ok_or_else(|| Error::MissingColumn(name.into()))
        };
        let idx: Vec<usize> = NOVELTY_COLUMNS.iter().map(|c| col(c)).collect::<Result<_>>()?;
        let mut rows = Vec::new();
        let mut errors = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let num = |i: usize| rec.get(idx[i]).unwrap_or("").trim().parse::<f64>();
            let year = rec.get(idx[4]).unwrap_or("").trim().parse::<i32>();
            match (year, num(5), num(6)) {
                (Ok(year), Ok(raw), Ok(score)) => rows.push(NoveltyRow {
                    grant_id: rec[idx[0]].to_string(),
                    agency: Agency::parse(&rec[idx[1]]),
                    program: rec[idx[2]].to_string(),
                    division: rec[idx[3]].to_string(),
                    year,
                    raw_distance: raw,
                    novelty_score: score,
                }),
                _ => errors.push(crate::error::RowError { line: line + 2, reason: "unparsable number".into() }),
            }
        }
        if !errors.is_empty() {
            return Err(Error::Rows(errors));
        }
        let min = rows.iter().map(|r| r.raw_distance).fold(f64::INFINITY, f64::min);
        let max = rows.iter().map(|r| r.raw_distance).fold(f64::NEG_INFINITY, f64::max);
        Ok(NoveltyTable { rows, min, max, skipped: Vec::new() })
    }
}

/// Global min-max scaling; a pool without two distinct values maps to zeros.
pub fn min_max_scale(raw: &[f64]) -> (Vec<f64>, f64, f64) {
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if raw.is_empty() {
        return (Vec::new(), 0.0, 0.0);
    }
    if max <= min {
        warn!("all {} raw distances equal {min}; novelty scores set to 0", raw.len());
        return (vec![0.0; raw.len()], min, max);
    }
    let span = max - min;
    (raw.iter().map(|&r| ((r - min) / span).clamp(0.0, 1.0)).collect(), min, max)
}

/// (agency, year) pairs scored by `score_all`, in output order.
pub fn scoring_cells(grants: &[GrantRecord], cfg: &EngineConfig) -> Vec<(Agency, i32)> {
    let present: BTreeSet<&Agency> = grants.iter().map(|g| &g.agency).collect();
    let agencies: Vec<Agency> = match &cfg.agencies {
        Some(list) => list.iter().filter(|a| present.contains(a)).cloned().collect::<BTreeSet<_>>().into_iter().collect(),
        None => present.into_iter().cloned().collect(),
    };
    let mut cells = Vec::new();
    for a in agencies {
        let years: BTreeSet<i32> = grants.iter().filter(|g| g.agency == a && !g.excluded()).map(|g| g.fiscal_year).collect();
        for y in years {
            if cfg.years.is_none_or(|(lo, hi)| (lo..=hi).contains(&y)) {
                cells.push((a.clone(), y));
            }
        }
    }
    cells
}

/// Scores every (agency, year) cell, using up to `jobs` worker threads.
/// Output rows follow (agency, year, input order) regardless of `jobs`.
pub fn score_all(grants: &[GrantRecord], cfg: &EngineConfig, jobs: usize) -> Result<NoveltyTable> {
    cfg.validate()?;
    let cells = scoring_cells(grants, cfg);
    let run = |(a, y): &(Agency, i32)| score_year(grants, a, *y, cfg);
    let results: Vec<Result<YearScores>> = if jobs <= 1 {
        cells.iter().map(run).collect()
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
        pool.install(|| cells.par_iter().map(run).collect())
    };
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for ((agency, year), res) in cells.iter().zip(results) {
        match res {
            Ok(ys) => {
                info!("{agency} {year}: scored {} grants against {} past grants", ys.grants.len(), ys.past_size);
                for (&gi, &raw) in ys.grants.iter().zip(&ys.raw) {
                    let g = &grants[gi];
                    rows.push(NoveltyRow {
                        grant_id: g.grant_id.clone(),
                        agency: g.agency.clone(),
                        program: g.program.clone(),
                        division: g.division.clone(),
                        year: g.fiscal_year,
                        raw_distance: raw,
                        novelty_score: 0.0,
                    });
                }
            }
            Err(Error::InsufficientHistory { found, required }) => {
                info!("{agency} {year}: skipped, {found} past grants (< {required})");
                skipped.push(SkippedWindow { agency: agency.clone(), year: *year, found, required });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(NoveltyTable::from_raw(rows, skipped))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbePoint {
    pub fraction: f64,
    pub clones: usize,
    pub raw_distance: f64,
    pub novelty_score: f64,
}

/// Replaces a seeded `f`-share of the probe's past window with noisy copies
/// of the probe and rescores it against `table`'s scaling. Clone sets are
/// nested: the clones used at a smaller fraction are a prefix of those at a
/// larger one. `noise_sigma = None` uses 0.1 × the probe's mean nonzero count.
pub fn clone_probe(
    grants: &[GrantRecord],
    table: &NoveltyTable,
    probe_id: &str,
    fractions: &[f64],
    noise_sigma: Option<f64>,
    cfg: &EngineConfig,
) -> Result<Vec<ProbePoint>> {
    cfg.validate()?;
    let probe = grants
        .iter()
        .find(|g| g.grant_id == probe_id)
        .ok_or_else(|| Error::UnknownProbe(probe_id.to_string()))?;
    if let Some(f) = fractions.iter().find(|f| !(0.0..1.0).contains(*f)) {
        return Err(Error::InvalidInput(format!("clone fraction {f} outside [0, 1)")));
    }
    let (agency, year) = (&probe.agency, probe.fiscal_year);
    let past = past_window(grants, agency, year, cfg.window_years);
    if past.len() < cfg.min_history {
        return Err(Error::InsufficientHistory { found: past.len(), required: cfg.min_history });
    }
    let probe_doc = summary_terms(&probe.summary, &cfg.text);
    let sigma = noise_sigma.unwrap_or_else(|| {
        let nz: Vec<f64> = probe_doc.values().copied().filter(|&c| c > 0.0).collect();
        0.1 * nz.iter().sum::<f64>() / nz.len().max(1) as f64
    });
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("noise sigma must be >= 0, got {sigma}")));
    }
    let past_docs: Vec<TermCounts> = past.iter().map(|&i| summary_terms(&grants[i].summary, &cfg.text)).collect();
    let mut order: Vec<usize> = (0..past.len()).collect();
    order.shuffle(&mut stream(cfg.seed, "clone-order", &[]));
    let clone_doc = |c: usize| -> TermCounts {
        let mut rng = stream(cfg.seed, "clone-noise", &[c as i64]);
        let normal = Normal::new(0.0, sigma).unwrap_or_else(|_| Normal::new(0.0, 0.0).unwrap());
        probe_doc.iter().map(|(t, &x)| (t.clone(), (x + normal.sample(&mut rng)).max(0.0))).collect()
    };
    let seed = window_seed(cfg, agency, year);
    fractions
        .iter()
        .map(|&f| {
            let n = (f * past.len() as f64).round() as usize;
            let mut docs = past_docs.clone();
            for (c, &slot) in order.iter().take(n).enumerate() {
                docs[slot] = clone_doc(c);
            }
            let model = WindowModel::fit(&docs, cfg, seed)?;
            let raw = model.raw_distance(&probe_doc, cfg)?;
            Ok(ProbePoint { fraction: f, clones: n, raw_distance: raw, novelty_score: table.scale(raw) })
        })
        .collect()
}

/// (ν, topics, window years) rows of the sensitivity grid.
pub const SENSITIVITY_GRID: [(f64, usize, usize); 5] =
    [(0.01, 50, 2), (0.1, 50, 2), (0.05, 100, 2), (0.05, 50, 3), (0.05, 50, 1)];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub agency: Agency,
    pub nu: f64,
    pub topics: usize,
    pub window_years: usize,
    pub coefficient: f64,
    pub std_error: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Rescores with each (ν, topics, window) triple and refits the citation
/// regression, reporting the novelty coefficient per agency.
pub fn sensitivity_grid(
    linked: &LinkedDataset,
    grid: &[(f64, usize, usize)],
    cfg: &EngineConfig,
    studies: &crate::studies::StudyConfig,
    jobs: usize,
) -> Result<Vec<SensitivityRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("sensitivity grid is empty".into()));
    }
    let mut out = Vec::new();
    for &(nu, topics, window_years) in grid {
        let c = EngineConfig { nu, topics, window_years, ..cfg.clone() };
        let table = score_all(&linked.grants, &c, jobs)?;
        for (agency, fit) in crate::studies::table1_regression(linked, &table, studies)? {
            let i = fit.index_of(crate::studies::NOVELTY).expect("novelty regressor");
            out.push(SensitivityRow {
                agency,
                nu,
                topics,
                window_years,
                coefficient: fit.estimates[i],
                std_error: fit.std_errors[i],
                p_value: fit.p_values[i],
                n: fit.n,
            });
        }
    }
    Ok(out)
}

pub fn write_probe_csv<W: Write>(out: W, points: &[ProbePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["fraction", "clones", "raw_distance", "novelty_score"])?;
    for p in points {
        w.write_record([p.fraction.to_string(), p.clones.to_string(), p.raw_distance.to_string(), p.novelty_score.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sensitivity_csv<W: Write>(out: W, rows: &[SensitivityRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["agency", "nu", "topics", "window_years", "novelty_coefficient", "std_error", "p_value", "n"])?;
    for r in rows {
        w.write_record([
            r.agency.to_string(),
            r.nu.to_string(),
            r.topics.to_string(),
            r.window_years.to_string(),
            r.coefficient.to_string(),
            r.std_error.to_string(),
            r.p_value.to_string(),
            r.n.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthkit::{generate, SynthSpec};

    fn small_cfg() -> EngineConfig {
        EngineConfig { topics: 8, min_history: 50, nmf_max_iter: 100, ..Default::default() }
    }

    fn corpus() -> Vec<GrantRecord> {
        generate(&SynthSpec { grants_per_year: 120, n_years: 3, pubs_per_grant: 0.0, ..Default::default() })
            .unwrap()
            .grants
    }

    #[test]
    fn min_max_examples() {
        let (s, lo, hi) = min_max_scale(&[-2.0, 0.0, 2.0]);
        assert_eq!(s, vec![0.0, 0.5, 1.0]);
        assert_eq!((lo, hi), (-2.0, 2.0));
        assert_eq!(min_max_scale(&[0.3; 4]).0, vec![0.0; 4]);
        assert!(min_max_scale(&[]).0.is_empty());
    }

    #[test]
    fn window_bounds() {
        let g = corpus();
        let w = past_window(&g, &Agency::Nsf, 2012, 1);
        assert!(w.iter().all(|&i| g[i].fiscal_year == 2011));
        assert_eq!(w.len(), 120);
        assert_eq!(past_window(&g, &Agency::Nsf, 2012, 2).len(), 240);
        assert!(past_window(&g, &Agency::Nih, 2012, 2).is_empty());
    }

    #[test]
    fn first_year_is_skipped_and_scores_span_unit_interval() {
        let g = corpus();
        let t = score_all(&g, &small_cfg(), 1).unwrap();
        assert_eq!(t.skipped.len(), 1);
        assert_eq!(t.skipped[0].year, 2010);
        assert_eq!(t.rows.len(), 240);
        let lo = t.rows.iter().map(|r| r.novelty_score).fold(f64::INFINITY, f64::min);
        let hi = t.rows.iter().map(|r| r.novelty_score).fold(0.0, f64::max);
        assert_eq!((lo, hi), (0.0, 1.0));
    }

    #[test]
    fn empty_year_is_empty() {
        let g = corpus();
        let ys = score_year(&g, &Agency::Nsf, 2030, &small_cfg()).unwrap();
        assert!(ys.raw.is_empty());
    }

    #[test]
    fn identical_current_grants_get_identical_distances() {
        let mut g = corpus();
        let copy = GrantRecord { grant_id: "dup".into(), ..g.iter().rev().find(|x| x.fiscal_year == 2012).unwrap().clone() };
        g.push(copy);
        let ys = score_year(&g, &Agency::Nsf, 2012, &small_cfg()).unwrap();
        let n = ys.raw.len();
        let orig = ys.grants.iter().position(|&i| g[i].summary == g[g.len() - 1].summary).unwrap();
        assert_eq!(ys.raw[orig], ys.raw[n - 1]);
    }

    #[test]
    fn window_causality() {
        let g = corpus();
        let cfg = small_cfg();
        let base = score_year(&g, &Agency::Nsf, 2011, &cfg).unwrap();
        let mut later = g.clone();
        for x in later.iter_mut().filter(|x| x.fiscal_year >= 2012) {
            x.summary = "entirely different words here".into();
        }
        assert_eq!(score_year(&later, &Agency::Nsf, 2011, &cfg).unwrap(), base);
    }

    #[test]
    fn jobs_do_not_change_output() {
        let g = corpus();
        let cfg = small_cfg();
        assert_eq!(score_all(&g, &cfg, 1).unwrap(), score_all(&g, &cfg, 3).unwrap());
    }

    #[test]
    fn probe_at_zero_matches_table() {
        let g = corpus();
        let cfg = small_cfg();
        let t = score_all(&g, &cfg, 1).unwrap();
        let id = t.rows[t.rows.len() / 2].grant_id.clone();
        let pts = clone_probe(&g, &t, &id, &[0.0], None, &cfg).unwrap();
        assert_eq!(pts[0].novelty_score, t.get(&id).unwrap().novelty_score);
        assert_eq!(pts[0].raw_distance, t.get(&id).unwrap().raw_distance);
        assert!(matches!(clone_probe(&g, &t, "nope", &[0.0], None, &cfg), Err(Error::UnknownProbe(_))));
    }

    #[test]
    fn csv_round_trip() {
        let g = corpus();
        let t = score_all(&g, &small_cfg(), 1).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = NoveltyTable::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.rows, t.rows);
        assert_eq!((back.min, back.max), (t.min, t.max));
    }

    #[test]
    fn config_validation() {
        assert!(EngineConfig { window_years: 0, ..Default::default() }.validate().is_err());
        assert!(EngineConfig { nu: 0.0, ..Default::default() }.validate().is_err());
        assert!(EngineConfig { years: Some((2012, 2010)), ..Default::default() }.validate().is_err());
        assert!(EngineConfig::default().validate().is_ok());
    }
}
