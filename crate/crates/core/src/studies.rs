//! Citation, prestige, productivity and trend analyses over a linked
//! dataset and a novelty table.
//!
//! Top-decile flags are computed within grouping cells: novelty within
//! (agency, division, year), citations and SJR within (field, publication
//! year). A publication funded by several scored grants is top-novel when
//! any of them is, and carries the maximum (or mean) of their scores.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use log::warn;
use ndarray::Array2;
use serde::Serialize;

use crate::corpus::{Agency, CitationEvent, GrantRecord, LinkedDataset};
use crate::engine::NoveltyTable;
use crate::error::{Error, Result};
use crate::stats::{mean, ols_fit, paired_ttest, pearson, sem, two_sample_ttest, RegressionResult, TestResult};

pub const INTERCEPT: &str = "Intercept";
pub const NOVELTY: &str = "Novelty";
pub const YEARS_AFTER_2010: &str = "Years of Publication After 2010";
pub const PI_EXPERIENCE: &str = "PI Experience";
pub const SJR: &str = "SJR";
pub const AWARD: &str = "Award Amount (in millions of dollars)";
pub const N_PIS: &str = "Number of PIs";

pub const TABLE1_REGRESSORS: [&str; 7] = [INTERCEPT, NOVELTY, YEARS_AFTER_2010, PI_EXPERIENCE, SJR, AWARD, N_PIS];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    Max,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoveltyGrouping {
    /// (agency, division, year)
    DivisionYear,
    /// (agency, division), pooling years.
    Division,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub q: f64,
    pub aggregate: Aggregate,
    pub grouping: NoveltyGrouping,
    /// Years since publication at which cumulative citations are compared.
    pub horizons: Vec<u32>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig { q: 0.1, aggregate: Aggregate::Max, grouping: NoveltyGrouping::DivisionYear, horizons: (1..=9).collect() }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::Config(format!("decile q {} outside (0, 1)", self.q)));
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return Err(Error::Config("horizons must be non-empty and >= 1".into()));
        }
        Ok(())
    }
}

/// Flags items at or above the `(1 − q)` empirical quantile of their group.
///
/// A group of `n ≥ ⌈1/q⌉` items flags everything `≥` its `⌈q·n⌉`-th largest
/// value, so ties at the threshold are all flagged. Smaller groups flag only
/// values equal to their maximum. NaN values are never flagged.
pub fn top_flags<K: Ord>(keys: &[K], values: &[f64], q: f64) -> Vec<bool> {
    assert_eq!(keys.len(), values.len());
    let mut groups: BTreeMap<&K, Vec<usize>> = BTreeMap::new();
    for (i, k) in keys.iter().enumerate() {
        if !values[i].is_nan() {
            groups.entry(k).or_default().push(i);
        }
    }
    let min_size = (1.0 / q - 1e-9).ceil() as usize;
    let mut out = vec![false; values.len()];
    for members in groups.values() {
        let mut sorted: Vec<f64> = members.iter().map(|&i| values[i]).collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let n = sorted.len();
        let threshold = if n < min_size {
            sorted[0]
        } else {
            let m = ((q * n as f64) - 1e-9).ceil().max(1.0) as usize;
            sorted[m - 1]
        };
        let mut flagged = 0;
        for &i in members {
            if values[i] >= threshold {
                out[i] = true;
                flagged += 1;
            }
        }
        if n > 1 && flagged == n {
            warn!("all {n} values in a group tie at {threshold}; every item flagged");
        }
    }
    out
}

/// Whether any PI of each grant appears on a grant from an earlier fiscal year.
pub fn pi_experience(grants: &[GrantRecord]) -> Vec<bool> {
    let mut first: HashMap<&str, i32> = HashMap::new();
    for g in grants {
        for p in &g.pi_ids {
            first.entry(p.as_str()).and_modify(|y| *y = (*y).min(g.fiscal_year)).or_insert(g.fiscal_year);
        }
    }
    grants.iter().map(|g| g.pi_ids.iter().any(|p| first[p.as_str()] < g.fiscal_year)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecileFlags {
    pub q: f64,
    /// Novelty score per linked grant, if scored.
    pub grant_novelty: Vec<Option<f64>>,
    pub grant_top_novel: Vec<bool>,
    pub pub_top_cited: Vec<bool>,
    /// `None` when the publication has no SJR.
    pub pub_top_sjr: Vec<Option<bool>>,
}

fn citation_group(linked: &LinkedDataset, pi: usize) -> (String, i32) {
    let p = &linked.publications[pi];
    (p.field.clone().unwrap_or_default(), p.pub_year)
}

pub fn flag_deciles(linked: &LinkedDataset, novelty: &NoveltyTable, cfg: &StudyConfig) -> DecileFlags {
    let scores = novelty.scores();
    let grant_novelty: Vec<Option<f64>> = linked.grants.iter().map(|g| scores.get(&g.grant_id).copied()).collect();
    let keys: Vec<(Agency, String, i32)> = linked
        .grants
        .iter()
        .map(|g| {
            let year = match cfg.grouping {
                NoveltyGrouping::DivisionYear => g.fiscal_year,
                NoveltyGrouping::Division => 0,
            };
            (g.agency.clone(), g.division.clone(), year)
        })
        .collect();
    let vals: Vec<f64> = grant_novelty.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    let grant_top_novel = top_flags(&keys, &vals, cfg.q);

    let pkeys: Vec<(String, i32)> = (0..linked.publications.len()).map(|i| citation_group(linked, i)).collect();
    let cites: Vec<f64> = linked.publications.iter().map(|p| p.citations as f64).collect();
    let pub_top_cited = top_flags(&pkeys, &cites, cfg.q);
    let sjr: Vec<f64> = linked.publications.iter().map(|p| p.sjr.unwrap_or(f64::NAN)).collect();
    let top_sjr = top_flags(&pkeys, &sjr, cfg.q);
    let pub_top_sjr = linked.publications.iter().zip(top_sjr).map(|(p, f)| p.sjr.map(|_| f)).collect();
    DecileFlags { q: cfg.q, grant_novelty, grant_top_novel, pub_top_cited, pub_top_sjr }
}

/// One publication counted for one agency.
#[derive(Debug, Clone, PartialEq)]
pub struct PubUnit {
    pub publication: usize,
    pub agency: Agency,
    /// Scored grants of that agency funding the publication.
    pub grants: Vec<usize>,
    pub novelty: f64,
    pub top_novel: bool,
}

/// Publication-agency units over scored grants, ordered by (agency, publication).
pub fn publication_units(linked: &LinkedDataset, flags: &DecileFlags, aggregate: Aggregate) -> Vec<PubUnit> {
    let mut units = Vec::new();
    for (pi, gs) in linked.grants_by_pub.iter().enumerate() {
        let mut by_agency: BTreeMap<&Agency, Vec<usize>> = BTreeMap::new();
        for &gi in gs {
            if flags.grant_novelty[gi].is_some() {
                by_agency.entry(&linked.grants[gi].agency).or_default().push(gi);
            }
        }
        for (agency, grants) in by_agency {
            let scores: Vec<f64> = grants.iter().map(|&g| flags.grant_novelty[g].unwrap()).collect();
            let novelty = match aggregate {
                Aggregate::Max => scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                Aggregate::Mean => mean(&scores),
            };
            let top_novel = grants.iter().any(|&g| flags.grant_top_novel[g]);
            units.push(PubUnit { publication: pi, agency: agency.clone(), grants, novelty, top_novel });
        }
    }
    units.sort_by(|a, b| a.agency.cmp(&b.agency).then(a.publication.cmp(&b.publication)));
    units
}

fn agencies_of(units: &[PubUnit]) -> Vec<Agency> {
    units.iter().map(|u| u.agency.clone()).collect::<BTreeSet<_>>().into_iter().collect()
}

fn share(flags: &[f64]) -> (f64, f64) {
    if flags.is_empty() {
        (f64::NAN, f64::NAN)
    } else if flags.len() == 1 {
        (flags[0], 0.0)
    } else {
        (mean(flags), sem(flags))
    }
}

fn indicator(b: bool) -> f64 {
    f64::from(u8::from(b))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonPoint {
    pub horizon: u32,
    pub top_novel_share: f64,
    pub top_novel_sem: f64,
    pub top_novel_n: usize,
    pub other_share: f64,
    pub other_sem: f64,
    pub other_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsReport {
    pub agency: Agency,
    /// `"yearly"` or `"cumulative-only"`.
    pub mode: String,
    pub points: Vec<HorizonPoint>,
    /// Paired t-test of top-novel vs other shares across horizons.
    pub test: Option<TestResult>,
    pub note: Option<String>,
}

/// Share of publications in the top decile of cumulative citations at each
/// horizon, for top-novel grants vs the rest. A publication is censored at
/// horizons extending past the last event year. Without events the
/// comparison falls back to the total citation counts.
pub fn citation_dynamics(
    linked: &LinkedDataset,
    flags: &DecileFlags,
    events: &[CitationEvent],
    cfg: &StudyConfig,
) -> Vec<DynamicsReport> {
    let units = publication_units(linked, flags, cfg.aggregate);
    let pkeys: Vec<(String, i32)> = (0..linked.publications.len()).map(|i| citation_group(linked, i)).collect();
    let cumulative_only = events.is_empty();
    if cumulative_only {
        warn!("no yearly citation events; comparing total citations at a single horizon");
    }
    let mut per_pub: HashMap<&str, Vec<(i32, u64)>> = HashMap::new();
    for e in events {
        per_pub.entry(e.pub_id.as_str()).or_default().push((e.year, e.citations));
    }
    let last_year = events.iter().map(|e| e.year).max().unwrap_or(i32::MAX);
    let horizons: Vec<u32> = if cumulative_only { vec![0] } else { cfg.horizons.clone() };
    let top_at: Vec<Vec<Option<bool>>> = horizons
        .iter()
        .map(|&h| {
            if cumulative_only {
                return flags.pub_top_cited.iter().map(|&f| Some(f)).collect();
            }
            let vals: Vec<f64> = linked
                .publications
                .iter()
                .map(|p| {
                    let end = p.pub_year + h as i32 - 1;
                    if end > last_year {
                        return f64::NAN;
                    }
                    per_pub
                        .get(p.pub_id.as_str())
                        .map(|v| v.iter().filter(|(y, _)| *y <= end).map(|(_, c)| *c as f64).sum())
                        .unwrap_or(0.0)
                })
                .collect();
            let f = top_flags(&pkeys, &vals, cfg.q);
            vals.iter().zip(f).map(|(v, f)| (!v.is_nan()).then_some(f)).collect()
        })
        .collect();

    agencies_of(&units)
        .into_iter()
        .map(|agency| {
            let mine: Vec<&PubUnit> = units.iter().filter(|u| u.agency == agency).collect();
            let points: Vec<HorizonPoint> = horizons
                .iter()
                .zip(&top_at)
                .map(|(&h, top)| {
                    let (mut a, mut b) = (Vec::new(), Vec::new());
                    for u in &mine {
                        if let Some(t) = top[u.publication] {
                            if u.top_novel { a.push(indicator(t)) } else { b.push(indicator(t)) }
                        }
                    }
                    let ((sa, ea), (sb, eb)) = (share(&a), share(&b));
                    HorizonPoint {
                        horizon: h,
                        top_novel_share: sa,
                        top_novel_sem: ea,
                        top_novel_n: a.len(),
                        other_share: sb,
                        other_sem: eb,
                        other_n: b.len(),
                    }
                })
                .collect();
            let usable: Vec<&HorizonPoint> = points.iter().filter(|p| p.top_novel_n > 0 && p.other_n > 0).collect();
            let (test, note) = if cumulative_only {
                (None, Some("cumulative-only: no yearly citation events".to_string()))
            } else {
                let a: Vec<f64> = usable.iter().map(|p| p.top_novel_share).collect();
                let b: Vec<f64> = usable.iter().map(|p| p.other_share).collect();
                match paired_ttest(&a, &b) {
                    Ok(t) => (Some(t), None),
                    Err(e) => (None, Some(format!("paired t-test unavailable: {e}"))),
                }
            };
            let mode = if cumulative_only { "cumulative-only" } else { "yearly" };
            DynamicsReport { agency, mode: mode.into(), points, test, note }
        })
        .collect()
}

/// Response and design matrix (columns in [`TABLE1_REGRESSORS`] order) per agency.
/// Publications without SJR are dropped.
pub fn table1_design(
    linked: &LinkedDataset,
    novelty: &NoveltyTable,
    cfg: &StudyConfig,
) -> Vec<(Agency, Vec<f64>, Array2<f64>)> {
    let flags = flag_deciles(linked, novelty, cfg);
    let units = publication_units(linked, &flags, cfg.aggregate);
    let experienced = pi_experience(&linked.grants);
    agencies_of(&units)
        .into_iter()
        .map(|agency| {
            let mut y = Vec::new();
            let mut rows = Vec::new();
            for u in units.iter().filter(|u| u.agency == agency) {
                let p = &linked.publications[u.publication];
                let Some(sjr) = p.sjr else { continue };
                let gs: Vec<&GrantRecord> = u.grants.iter().map(|&g| &linked.grants[g]).collect();
                let award = mean(&gs.iter().map(|g| g.award_amount).collect::<Vec<_>>());
                let pis = mean(&gs.iter().map(|g| g.pi_ids.len() as f64).collect::<Vec<_>>());
                let exp = u.grants.iter().any(|&g| experienced[g]);
                y.push(p.citations as f64);
                rows.extend([1.0, u.novelty, f64::from(p.pub_year - 2010), indicator(exp), sjr, award, pis]);
            }
            let n = y.len();
            (agency, y, Array2::from_shape_vec((n, TABLE1_REGRESSORS.len()), rows).expect("row width"))
        })
        .collect()
}

/// Citations regressed on novelty and covariates, one fit per agency.
pub fn table1_regression(
    linked: &LinkedDataset,
    novelty: &NoveltyTable,
    cfg: &StudyConfig,
) -> Result<Vec<(Agency, RegressionResult)>> {
    let names: Vec<String> = TABLE1_REGRESSORS.iter().map(|s| s.to_string()).collect();
    table1_design(linked, novelty, cfg)
        .into_iter()
        .map(|(agency, y, x)| Ok((agency, ols_fit(&y, &x, &names)?)))
        .collect()
}

/// Column means of a design matrix.
pub fn covariate_means(x: &Array2<f64>) -> Vec<f64> {
    x.mean_axis(ndarray::Axis(0)).map(|m| m.to_vec()).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalPoint {
    pub novelty: f64,
    pub prediction: f64,
    pub std_error: f64,
}

/// Predictions as novelty sweeps `grid` with other covariates held at `means`.
pub fn marginal_effect_curve(fit: &RegressionResult, grid: &[f64], means: &[f64]) -> Result<Vec<MarginalPoint>> {
    if means.len() != fit.names.len() {
        return Err(Error::DimensionMismatch { expected: fit.names.len(), got: means.len() });
    }
    let j = fit.index_of(NOVELTY).ok_or_else(|| Error::MissingColumn(NOVELTY.into()))?;
    Ok(grid
        .iter()
        .map(|&v| {
            let mut x = means.to_vec();
            x[j] = v;
            MarginalPoint { novelty: v, prediction: fit.predict(&x), std_error: fit.prediction_se(&x) }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProgramStat {
    pub program: String,
    pub grants: usize,
    pub top_novel_share: f64,
    pub top_novel_sem: f64,
    pub publications: usize,
    pub top_cited_share: f64,
    pub top_cited_sem: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairComparison {
    pub a: String,
    pub b: String,
    pub difference: f64,
    pub test: Option<TestResult>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProgramReport {
    pub programs: Vec<ProgramStat>,
    pub excluded: Vec<String>,
    /// Pearson of top-novel vs top-cited shares across programs.
    pub correlation: Option<TestResult>,
    pub note: Option<String>,
    pub pairs: Vec<PairComparison>,
}

/// Top-novel and top-cited shares per program. Top-cited here groups by
/// field only, pooling publication years.
pub fn program_comparison(linked: &LinkedDataset, flags: &DecileFlags, pairs: &[(String, String)]) -> ProgramReport {
    let fields: Vec<String> = linked.publications.iter().map(|p| p.field.clone().unwrap_or_default()).collect();
    let cites: Vec<f64> = linked.publications.iter().map(|p| p.citations as f64).collect();
    let top_cited = top_flags(&fields, &cites, flags.q);

    let mut novel: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut cited: BTreeMap<&str, BTreeMap<usize, f64>> = BTreeMap::new();
    for (gi, g) in linked.grants.iter().enumerate() {
        if flags.grant_novelty[gi].is_none() {
            continue;
        }
        novel.entry(g.program.as_str()).or_default().push(indicator(flags.grant_top_novel[gi]));
        let c = cited.entry(g.program.as_str()).or_default();
        for &pi in &linked.pubs_by_grant[gi] {
            c.insert(pi, indicator(top_cited[pi]));
        }
    }
    let mut programs = Vec::new();
    let mut excluded = Vec::new();
    for (prog, nv) in &novel {
        if nv.len() < 2 {
            excluded.push(prog.to_string());
            continue;
        }
        let cv: Vec<f64> = cited[prog].values().copied().collect();
        let (sn, en) = share(nv);
        let (sc, ec) = share(&cv);
        programs.push(ProgramStat {
            program: prog.to_string(),
            grants: nv.len(),
            top_novel_share: sn,
            top_novel_sem: en,
            publications: cv.len(),
            top_cited_share: sc,
            top_cited_sem: ec,
        });
    }
    let with_pubs: Vec<&ProgramStat> = programs.iter().filter(|p| p.publications > 0).collect();
    let xs: Vec<f64> = with_pubs.iter().map(|p| p.top_novel_share).collect();
    let ys: Vec<f64> = with_pubs.iter().map(|p| p.top_cited_share).collect();
    let (correlation, note) = match pearson(&xs, &ys) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(format!("cross-program correlation unavailable ({} programs): {e}", xs.len()))),
    };
    let pairs = pairs
        .iter()
        .map(|(a, b)| {
            let (va, vb) = (novel.get(a.as_str()), novel.get(b.as_str()));
            match (va, vb) {
                (Some(va), Some(vb)) => {
                    let difference = mean(va) - mean(vb);
                    match two_sample_ttest(va, vb) {
                        Ok(t) => PairComparison { a: a.clone(), b: b.clone(), difference, test: Some(t), note: None },
                        Err(e) => PairComparison { a: a.clone(), b: b.clone(), difference, test: None, note: Some(e.to_string()) },
                    }
                }
                _ => PairComparison { a: a.clone(), b: b.clone(), difference: f64::NAN, test: None, note: Some("program not found".into()) },
            }
        })
        .collect();
    ProgramReport { programs, excluded, correlation, note, pairs }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellComparison {
    pub cell: String,
    pub top_novel: f64,
    pub top_novel_n: usize,
    pub other: f64,
    pub other_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedReport {
    pub agency: Agency,
    pub cells: Vec<CellComparison>,
    pub excluded: Vec<String>,
    pub mean_difference: f64,
    pub test: Option<TestResult>,
    pub note: Option<String>,
}

fn paired_report(agency: Agency, groups: BTreeMap<String, (Vec<f64>, Vec<f64>)>) -> PairedReport {
    let mut cells = Vec::new();
    let mut excluded = Vec::new();
    for (cell, (a, b)) in groups {
        if a.is_empty() || b.is_empty() {
            excluded.push(cell);
            continue;
        }
        cells.push(CellComparison { cell, top_novel: mean(&a), top_novel_n: a.len(), other: mean(&b), other_n: b.len() });
    }
    let a: Vec<f64> = cells.iter().map(|c| c.top_novel).collect();
    let b: Vec<f64> = cells.iter().map(|c| c.other).collect();
    let mean_difference = if cells.is_empty() { f64::NAN } else { mean(&a) - mean(&b) };
    let (test, note) = match paired_ttest(&a, &b) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(format!("paired t-test unavailable ({} cells): {e}", cells.len()))),
    };
    PairedReport { agency, cells, excluded, mean_difference, test, note }
}

/// Share of publications in top-SJR journals, top-novel grants vs others,
/// paired across divisions. Each (grant, publication) pair counts once.
pub fn prestige_comparison(linked: &LinkedDataset, flags: &DecileFlags) -> Vec<PairedReport> {
    let mut by_agency: BTreeMap<Agency, BTreeMap<String, (Vec<f64>, Vec<f64>)>> = BTreeMap::new();
    for (gi, g) in linked.grants.iter().enumerate() {
        if flags.grant_novelty[gi].is_none() {
            continue;
        }
        let cell = by_agency.entry(g.agency.clone()).or_default().entry(g.division.clone()).or_default();
        for &pi in &linked.pubs_by_grant[gi] {
            if let Some(top) = flags.pub_top_sjr[pi] {
                if flags.grant_top_novel[gi] { cell.0.push(indicator(top)) } else { cell.1.push(indicator(top)) }
            }
        }
    }
    by_agency.into_iter().map(|(a, groups)| paired_report(a, groups)).collect()
}

/// Publications per grant, top-novel vs others, paired across
/// (grant length, division) cells.
pub fn productivity_comparison(linked: &LinkedDataset, flags: &DecileFlags) -> Vec<PairedReport> {
    let mut by_agency: BTreeMap<Agency, BTreeMap<String, (Vec<f64>, Vec<f64>)>> = BTreeMap::new();
    for (gi, g) in linked.grants.iter().enumerate() {
        if flags.grant_novelty[gi].is_none() {
            continue;
        }
        let key = format!("{:03}y/{}", g.length_years(), g.division);
        let cell = by_agency.entry(g.agency.clone()).or_default().entry(key).or_default();
        let n = linked.pubs_by_grant[gi].len() as f64;
        if flags.grant_top_novel[gi] { cell.0.push(n) } else { cell.1.push(n) }
    }
    by_agency.into_iter().map(|(a, groups)| paired_report(a, groups)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendRow {
    pub agency: Agency,
    pub n: usize,
    pub test: Option<TestResult>,
    pub error: Option<String>,
}

/// Pearson correlation of novelty score with award year, per agency.
pub fn novelty_trend(novelty: &NoveltyTable) -> Vec<TrendRow> {
    let mut by_agency: BTreeMap<&Agency, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in &novelty.rows {
        let e = by_agency.entry(&r.agency).or_default();
        e.0.push(r.novelty_score);
        e.1.push(f64::from(r.year));
    }
    by_agency
        .into_iter()
        .map(|(agency, (s, y))| {
            let n = s.len();
            match pearson(&s, &y) {
                Ok(t) => TrendRow { agency: agency.clone(), n, test: Some(t), error: None },
                Err(e) => TrendRow { agency: agency.clone(), n, test: None, error: Some(e.to_string()) },
            }
        })
        .collect()
}

pub fn write_dynamics_csv<W: Write>(out: W, reports: &[DynamicsReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["agency", "horizon", "group", "share", "sem", "n"])?;
    for r in reports {
        for p in &r.points {
            for (group, s, e, n) in [
                ("top_novel", p.top_novel_share, p.top_novel_sem, p.top_novel_n),
                ("other", p.other_share, p.other_sem, p.other_n),
            ] {
                w.write_record([r.agency.to_string(), p.horizon.to_string(), group.into(), s.to_string(), e.to_string(), n.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_marginal_csv<W: Write>(out: W, agency: &Agency, points: &[MarginalPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["agency", "novelty", "prediction", "std_error"])?;
    for p in points {
        w.write_record([agency.to_string(), p.novelty.to_string(), p.prediction.to_string(), p.std_error.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_programs_csv<W: Write>(out: W, report: &ProgramReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["program", "grants", "top_novel_share", "top_novel_sem", "publications", "top_cited_share", "top_cited_sem"])?;
    for p in &report.programs {
        w.write_record([
            p.program.clone(),
            p.grants.to_string(),
            p.top_novel_share.to_string(),
            p.top_novel_sem.to_string(),
            p.publications.to_string(),
            p.top_cited_share.to_string(),
            p.top_cited_sem.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_paired_csv<W: Write>(out: W, reports: &[PairedReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["agency", "cell", "top_novel", "top_novel_n", "other", "other_n"])?;
    for r in reports {
        for c in &r.cells {
            w.write_record([
                r.agency.to_string(),
                c.cell.clone(),
                c.top_novel.to_string(),
                c.top_novel_n.to_string(),
                c.other.to_string(),
                c.other_n.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_trend_csv<W: Write>(out: W, novelty: &NoveltyTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["agency", "year", "mean_novelty", "sem", "n"])?;
    let mut cells: BTreeMap<(&Agency, i32), Vec<f64>> = BTreeMap::new();
    for r in &novelty.rows {
        cells.entry((&r.agency, r.year)).or_default().push(r.novelty_score);
    }
    for ((a, y), v) in cells {
        let (m, e) = share(&v);
        w.write_record([a.to_string(), y.to_string(), m.to_string(), e.to_string(), v.len().to_string()])?;
    }
    w.flush()?;
    Ok(())
}
