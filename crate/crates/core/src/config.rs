//! Flat key-value run configuration.
//!
//! A config file is TOML with top-level keys only, for example
//!
//! ```toml
//! window_years = 2
//! topics = 50
//! nu = 0.05
//! years = "2011..2015"
//! agency = "NSF"
//! ```
//!
//! Unknown keys are rejected. Settings are layered: defaults, then the file,
//! then command-line flags.

use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{Agency, DedupeKey, KeyColumn};
use crate::engine::{EngineConfig, KernelKind};
use crate::error::{Error, Result};
use crate::filter::ActiveConfig;
use crate::studies::{Aggregate, NoveltyGrouping, StudyConfig};
use crate::synthkit::SynthSpec;

/// Every configurable value. Each field is optional so that a file or a set
/// of flags can override a subset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub seed: Option<u64>,
    pub window_years: Option<usize>,
    pub topics: Option<usize>,
    pub nu: Option<f64>,
    pub kernel: Option<String>,
    /// Absent means the data-driven default width.
    pub gamma: Option<f64>,
    pub min_df: Option<usize>,
    pub max_df_ratio: Option<f64>,
    pub normalize: Option<bool>,
    pub min_token_len: Option<usize>,
    /// `"A..B"` or a single year; absent scores every year.
    pub years: Option<String>,
    /// `NSF`, `NIH`, `all`, or a comma-separated list.
    pub agency: Option<String>,
    pub min_history: Option<usize>,
    pub nmf_max_iter: Option<usize>,
    pub nmf_tol: Option<f64>,
    pub transform_max_iter: Option<usize>,
    pub transform_tol: Option<f64>,
    pub svm_tol: Option<f64>,
    pub svm_max_iter: Option<usize>,
    pub kernel_cache_rows: Option<usize>,
    pub decile_q: Option<f64>,
    pub novelty_aggregate: Option<String>,
    pub novelty_grouping: Option<String>,
    pub horizons: Option<Vec<u32>>,
    pub l2: Option<f64>,
    pub rounds: Option<usize>,
    pub batch: Option<usize>,
    pub cv_folds: Option<usize>,
    pub filter_threshold: Option<f64>,
    pub dedupe_key: Option<String>,
    pub dedupe_strip_suffix: Option<String>,
    pub clone_noise_sigma: Option<f64>,
    pub synth_start_year: Option<i32>,
    pub synth_years: Option<usize>,
    pub synth_grants_per_year: Option<usize>,
    pub synth_agencies: Option<String>,
    pub synth_novel_fraction: Option<f64>,
    pub synth_pubs_per_grant: Option<f64>,
    pub synth_novelty_effect: Option<f64>,
}

impl ConfigLayer {
    pub fn parse(text: &str) -> Result<ConfigLayer> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn from_file(path: &Path) -> Result<ConfigLayer> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        ConfigLayer::parse(&std::fs::read_to_string(path)?).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub engine: EngineConfig,
    pub study: StudyConfig,
    pub active: ActiveConfig,
    pub cv_folds: usize,
    pub filter_threshold: f64,
    pub dedupe: DedupeKey,
    pub clone_noise_sigma: Option<f64>,
    pub synth: SynthSpec,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            engine: EngineConfig::default(),
            study: StudyConfig::default(),
            active: ActiveConfig::default(),
            cv_folds: 3,
            filter_threshold: 0.5,
            dedupe: DedupeKey::default(),
            clone_noise_sigma: None,
            synth: SynthSpec::default(),
        }
    }
}

/// `"2011..2015"`, `"2011..=2015"` or `"2011"`.
pub fn parse_years(s: &str) -> Result<(i32, i32)> {
    let bad = || Error::Config(format!("year range `{s}` is not A..B"));
    let s = s.trim();
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (s, s),
    };
    let a: i32 = a.trim().parse().map_err(|_| bad())?;
    let b: i32 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

/// `None` for `all`.
pub fn parse_agencies(s: &str) -> Option<Vec<Agency>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return None;
    }
    Some(s.split(',').map(str::trim).filter(|a| !a.is_empty()).map(Agency::parse).collect())
}

fn agencies_str(a: &Option<Vec<Agency>>) -> String {
    match a {
        None => "all".into(),
        Some(v) => v.iter().map(Agency::as_str).collect::<Vec<_>>().join(","),
    }
}

impl Settings {
    /// Overrides every field the layer sets.
    pub fn apply(&mut self, l: &ConfigLayer) -> Result<()> {
        let e = &mut self.engine;
        if let Some(v) = l.seed {
            e.seed = v;
            self.synth.seed = v;
        }
        macro_rules! set {
            ($($src:ident => $dst:expr),* $(,)?) => { $(if let Some(v) = l.$src.clone() { $dst = v; })* };
        }
        set!(
            window_years => e.window_years,
            topics => e.topics,
            nu => e.nu,
            min_df => e.text.min_df,
            max_df_ratio => e.text.max_df_ratio,
            normalize => e.text.normalize,
            min_token_len => e.text.min_token_len,
            min_history => e.min_history,
            nmf_max_iter => e.nmf_max_iter,
            nmf_tol => e.nmf_tol,
            transform_max_iter => e.transform_max_iter,
            transform_tol => e.transform_tol,
            svm_tol => e.svm_tol,
            svm_max_iter => e.svm_max_iter,
            kernel_cache_rows => e.kernel_cache_rows,
            decile_q => self.study.q,
            horizons => self.study.horizons,
            l2 => self.active.l2,
            rounds => self.active.rounds,
            batch => self.active.batch,
            cv_folds => self.cv_folds,
            filter_threshold => self.filter_threshold,
            synth_start_year => self.synth.start_year,
            synth_years => self.synth.n_years,
            synth_grants_per_year => self.synth.grants_per_year,
            synth_novel_fraction => self.synth.novel_fraction,
            synth_pubs_per_grant => self.synth.pubs_per_grant,
            synth_novelty_effect => self.synth.citations.novelty_effect,
        );
        if l.gamma.is_some() {
            e.gamma = l.gamma;
        }
        if let Some(k) = &l.kernel {
            e.kernel = match k.to_ascii_lowercase().as_str() {
                "rbf" => KernelKind::Rbf,
                "linear" => KernelKind::Linear,
                _ => return Err(Error::Config(format!("kernel must be rbf or linear, got `{k}`"))),
            };
        }
        if let Some(y) = &l.years {
            e.years = if y.trim().eq_ignore_ascii_case("all") { None } else { Some(parse_years(y)?) };
        }
        if let Some(a) = &l.agency {
            e.agencies = parse_agencies(a);
        }
        if let Some(a) = &l.novelty_aggregate {
            self.study.aggregate = match a.as_str() {
                "max" => Aggregate::Max,
                "mean" => Aggregate::Mean,
                _ => return Err(Error::Config(format!("novelty_aggregate must be max or mean, got `{a}`"))),
            };
        }
        if let Some(g) = &l.novelty_grouping {
            self.study.grouping = match g.as_str() {
                "division-year" => NoveltyGrouping::DivisionYear,
                "division" => NoveltyGrouping::Division,
                _ => return Err(Error::Config(format!("novelty_grouping must be division-year or division, got `{g}`"))),
            };
        }
        if let Some(k) = &l.dedupe_key {
            self.dedupe.column = match k.as_str() {
                "grant_id" => KeyColumn::GrantId,
                "summary" => KeyColumn::Summary,
                _ => return Err(Error::Config(format!("dedupe_key must be grant_id or summary, got `{k}`"))),
            };
        }
        if let Some(r) = &l.dedupe_strip_suffix {
            self.dedupe.strip_suffix = if r.is_empty() {
                None
            } else {
                Some(Regex::new(r).map_err(|e| Error::Config(format!("dedupe_strip_suffix: {e}")))?)
            };
        }
        if l.clone_noise_sigma.is_some() {
            self.clone_noise_sigma = l.clone_noise_sigma;
        }
        if let Some(a) = &l.synth_agencies {
            self.synth.agencies = parse_agencies(a).unwrap_or_else(|| vec![Agency::Nsf, Agency::Nih]);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.engine.validate()?;
        self.study.validate()?;
        if self.active.rounds == 0 || self.active.batch == 0 || !(self.active.l2 >= 0.0) {
            return Err(Error::Config("rounds and batch must be >= 1 and l2 >= 0".into()));
        }
        if self.cv_folds < 2 {
            return Err(Error::Config("cv_folds must be >= 2".into()));
        }
        if !(self.filter_threshold > 0.0 && self.filter_threshold < 1.0) {
            return Err(Error::Config("filter_threshold must lie in (0, 1)".into()));
        }
        if let Some(s) = self.clone_noise_sigma {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::Config("clone_noise_sigma must be >= 0".into()));
            }
        }
        self.synth.validate().map_err(|e| Error::Config(e.to_string()))
    }

    /// Fully populated layer describing these settings; written to manifests.
    pub fn snapshot(&self) -> ConfigLayer {
        let e = &self.engine;
        ConfigLayer {
            seed: Some(e.seed),
            window_years: Some(e.window_years),
            topics: Some(e.topics),
            nu: Some(e.nu),
            kernel: Some(match e.kernel {
                KernelKind::Rbf => "rbf".into(),
                KernelKind::Linear => "linear".into(),
            }),
            gamma: e.gamma,
            min_df: Some(e.text.min_df),
            max_df_ratio: Some(e.text.max_df_ratio),
            normalize: Some(e.text.normalize),
            min_token_len: Some(e.text.min_token_len),
            years: Some(e.years.map_or("all".into(), |(a, b)| format!("{a}..{b}"))),
            agency: Some(agencies_str(&e.agencies)),
            min_history: Some(e.min_history),
            nmf_max_iter: Some(e.nmf_max_iter),
            nmf_tol: Some(e.nmf_tol),
            transform_max_iter: Some(e.transform_max_iter),
            transform_tol: Some(e.transform_tol),
            svm_tol: Some(e.svm_tol),
            svm_max_iter: Some(e.svm_max_iter),
            kernel_cache_rows: Some(e.kernel_cache_rows),
            decile_q: Some(self.study.q),
            novelty_aggregate: Some(match self.study.aggregate {
                Aggregate::Max => "max".into(),
                Aggregate::Mean => "mean".into(),
            }),
            novelty_grouping: Some(match self.study.grouping {
                NoveltyGrouping::DivisionYear => "division-year".into(),
                NoveltyGrouping::Division => "division".into(),
            }),
            horizons: Some(self.study.horizons.clone()),
            l2: Some(self.active.l2),
            rounds: Some(self.active.rounds),
            batch: Some(self.active.batch),
            cv_folds: Some(self.cv_folds),
            filter_threshold: Some(self.filter_threshold),
            dedupe_key: Some(match self.dedupe.column {
                KeyColumn::GrantId => "grant_id".into(),
                KeyColumn::Summary => "summary".into(),
            }),
            dedupe_strip_suffix: Some(self.dedupe.strip_suffix.as_ref().map_or(String::new(), |r| r.as_str().to_string())),
            clone_noise_sigma: self.clone_noise_sigma,
            synth_start_year: Some(self.synth.start_year),
            synth_years: Some(self.synth.n_years),
            synth_grants_per_year: Some(self.synth.grants_per_year),
            synth_agencies: Some(agencies_str(&Some(self.synth.agencies.clone()))),
            synth_novel_fraction: Some(self.synth.novel_fraction),
            synth_pubs_per_grant: Some(self.synth.pubs_per_grant),
            synth_novelty_effect: Some(self.synth.citations.novelty_effect),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let l = ConfigLayer::parse("topics = 20\nnu = 0.1\nyears = \"2011..2013\"\nagency = \"NIH\"\nkernel = \"linear\"\n").unwrap();
        let mut s = Settings::default();
        s.apply(&l).unwrap();
        assert_eq!(s.engine.topics, 20);
        assert_eq!(s.engine.nu, 0.1);
        assert_eq!(s.engine.years, Some((2011, 2013)));
        assert_eq!(s.engine.agencies, Some(vec![Agency::Nih]));
        assert_eq!(s.engine.kernel, KernelKind::Linear);
        assert_eq!(s.engine.window_years, 2);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(ConfigLayer::parse("topicz = 3"), Err(Error::Config(_))));
        assert!(matches!(ConfigLayer::parse("[engine]\ntopics = 3"), Err(Error::Config(_))));
    }

    #[test]
    fn later_layer_wins() {
        let mut s = Settings::default();
        s.apply(&ConfigLayer::parse("topics = 20\nwindow_years = 3").unwrap()).unwrap();
        s.apply(&ConfigLayer { topics: Some(7), ..Default::default() }).unwrap();
        assert_eq!((s.engine.topics, s.engine.window_years), (7, 3));
    }

    #[test]
    fn snapshot_round_trips() {
        let mut s = Settings::default();
        s.apply(&ConfigLayer::parse("gamma = 2.5\ndedupe_strip_suffix = '-\\d{2}$'\nagency = 'NSF,NIH'").unwrap()).unwrap();
        let snap = s.snapshot();
        let text = toml::to_string(&snap).unwrap();
        let mut t = Settings::default();
        t.apply(&ConfigLayer::parse(&text).unwrap()).unwrap();
        assert_eq!(t.snapshot(), snap);
        assert_eq!(t.engine.gamma, Some(2.5));
    }

    #[test]
    fn year_ranges() {
        assert_eq!(parse_years("2011..2015").unwrap(), (2011, 2015));
        assert_eq!(parse_years("2011..=2015").unwrap(), (2011, 2015));
        assert_eq!(parse_years("2012").unwrap(), (2012, 2012));
        assert!(parse_years("2015..2011").is_err());
        assert!(parse_years("x").is_err());
        assert_eq!(parse_agencies("all"), None);
    }

    #[test]
    fn invalid_values() {
        let mut s = Settings::default();
        assert!(s.apply(&ConfigLayer { kernel: Some("poly".into()), ..Default::default() }).is_err());
        s.apply(&ConfigLayer { nu: Some(0.0), ..Default::default() }).unwrap();
        assert!(s.validate().is_err());
    }
}
