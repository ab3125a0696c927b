//! Seeded synthetic corpora with planted ground truth.
//!
//! Incumbent grants draw tokens from a topic mixture: a main topic tied to
//! the grant's division, a secondary topic, and a few common words. Each
//! (agency, year) cell plants exactly `round(novel_fraction · n)` novel
//! grants; a novel grant draws at least `novel_token_share` of its tokens
//! from a vocabulary block reserved for that year, and the rest from that
//! year's frontier topic. Frontier topics rotate with the year and show up
//! in incumbent grants only as an occasional secondary topic, so a planted
//! grant lands in a sparse region of the past topic space.
//!
//! Publication citations follow
//! `baseline + novelty_effect · is_novel + Σ covariate effects + |N(0, σ)|`,
//! rounded and floored at zero.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Normal, Poisson};

use crate::corpus::{
    write_citation_events_csv, write_grants_csv, write_publications_csv, Agency, CitationEvent, GrantRecord,
    PublicationRecord,
};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::studies::pi_experience;

/// Coefficients of the planted citation model.
#[derive(Debug, Clone, PartialEq)]
pub struct CitationModel {
    pub baseline: f64,
    /// Citations per unit novelty (per planted-novel flag in [`generate`]).
    pub novelty_effect: f64,
    /// Per year of publication after 2010.
    pub year_effect: f64,
    pub sjr_effect: f64,
    /// Per million dollars.
    pub award_effect: f64,
    pub pis_effect: f64,
    pub experience_effect: f64,
    /// Scale of the half-normal noise.
    pub noise_sd: f64,
}

impl Default for CitationModel {
    fn default() -> Self {
        CitationModel {
            baseline: 30.0,
            novelty_effect: 20.0,
            year_effect: -2.0,
            sjr_effect: 4.0,
            award_effect: 3.0,
            pis_effect: 1.5,
            experience_effect: 1.0,
            noise_sd: 8.0,
        }
    }
}

impl CitationModel {
    pub fn mean(&self, novelty: f64, pub_year: i32, sjr: f64, award: f64, n_pis: usize, experienced: bool) -> f64 {
        self.baseline
            + self.novelty_effect * novelty
            + self.year_effect * f64::from(pub_year - 2010)
            + self.sjr_effect * sjr
            + self.award_effect * award
            + self.pis_effect * n_pis as f64
            + self.experience_effect * f64::from(u8::from(experienced))
    }

    fn draw<R: Rng>(&self, mean: f64, rng: &mut R) -> u64 {
        let noise = if self.noise_sd > 0.0 {
            Normal::new(0.0, self.noise_sd).expect("positive sd").sample(rng).abs()
        } else {
            0.0
        };
        (mean + noise).max(0.0).round() as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub seed: u64,
    pub start_year: i32,
    pub n_years: usize,
    /// Grants per agency per year.
    pub grants_per_year: usize,
    pub agencies: Vec<Agency>,
    pub topics: usize,
    pub words_per_topic: usize,
    pub common_words: usize,
    /// Share of incumbent tokens drawn from the common vocabulary.
    pub common_share: f64,
    /// Topics beyond `topics` that few incumbents use; planted grants draw
    /// their non-block tokens from one of them.
    pub frontier_topics: usize,
    /// Probability an incumbent's secondary topic is a frontier topic.
    pub frontier_rate: f64,
    pub novel_fraction: f64,
    pub novel_block_size: usize,
    pub novel_token_share: f64,
    pub doc_len: (usize, usize),
    pub divisions: usize,
    /// Program labels with their novelty offsets; higher offsets make a
    /// grant of that program more likely to be picked as planted novel.
    pub programs: Vec<(String, f64)>,
    pub pi_pool: usize,
    pub pubs_per_grant: f64,
    pub fields: usize,
    pub citations: CitationModel,
    /// Years of citation events recorded after publication.
    pub event_years: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 0,
            start_year: 2010,
            n_years: 3,
            grants_per_year: 500,
            agencies: vec![Agency::Nsf],
            topics: 10,
            words_per_topic: 40,
            common_words: 20,
            common_share: 0.1,
            frontier_topics: 4,
            frontier_rate: 0.2,
            novel_fraction: 0.1,
            novel_block_size: 40,
            novel_token_share: 0.6,
            doc_len: (50, 90),
            divisions: 5,
            programs: vec![("Standard".into(), 0.0), ("Continuing".into(), 0.0)],
            pi_pool: 1500,
            pubs_per_grant: 3.0,
            fields: 5,
            citations: CitationModel::default(),
            event_years: 9,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(format!("synth spec: {m}")));
        if !(0.0..1.0).contains(&self.novel_fraction) {
            return bad(format!("novel_fraction {} outside [0, 1)", self.novel_fraction));
        }
        if !(0.0..1.0).contains(&self.frontier_rate) {
            return bad(format!("frontier_rate {} outside [0, 1)", self.frontier_rate));
        }
        if !(0.0..1.0).contains(&self.common_share) {
            return bad(format!("common_share {} outside [0, 1)", self.common_share));
        }
        if !(0.6..=1.0).contains(&self.novel_token_share) {
            return bad(format!("novel_token_share {} outside [0.6, 1]", self.novel_token_share));
        }
        if self.words_per_topic < 10 || self.novel_block_size < 10 {
            return bad("vocabulary blocks need at least 10 words".into());
        }
        if self.topics < 2 || self.divisions == 0 || self.divisions > self.topics || self.fields == 0 {
            return bad("need >= 2 topics and 1..=topics divisions and >= 1 field".into());
        }
        if self.doc_len.0 < 2 || self.doc_len.0 > self.doc_len.1 {
            return bad(format!("invalid doc_len {:?}", self.doc_len));
        }
        if self.programs.is_empty() || self.agencies.is_empty() || self.n_years == 0 || self.pi_pool == 0 {
            return bad("programs, agencies, years and PI pool must be non-empty".into());
        }
        if !self.citations.novelty_effect.is_finite() || self.citations.noise_sd < 0.0 || self.pubs_per_grant < 0.0 {
            return bad("citation model must be finite with nonnegative noise".into());
        }
        if self.programs.iter().any(|(_, o)| !o.is_finite()) {
            return bad("program offsets must be finite".into());
        }
        Ok(())
    }

    pub fn years(&self) -> std::ops::RangeInclusive<i32> {
        self.start_year..=self.start_year + self.n_years as i32 - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub grant_id: String,
    pub is_planted_novel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub grants: Vec<GrantRecord>,
    pub publications: Vec<PublicationRecord>,
    pub truth: Vec<GroundTruth>,
    pub events: Vec<CitationEvent>,
}

impl SynthCorpus {
    pub fn truth_map(&self) -> HashMap<&str, bool> {
        self.truth.iter().map(|t| (t.grant_id.as_str(), t.is_planted_novel)).collect()
    }

    /// Writes `grants.csv`, `publications.csv`, `ground_truth.csv` and
    /// `citation_events.csv` into `dir`; returns the written paths.
    pub fn write_dir(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let paths = ["grants.csv", "publications.csv", "ground_truth.csv", "citation_events.csv"].map(|f| dir.join(f));
        write_grants_csv(std::fs::File::create(&paths[0])?, &self.grants)?;
        write_publications_csv(std::fs::File::create(&paths[1])?, &self.publications)?;
        write_ground_truth_csv(std::fs::File::create(&paths[2])?, &self.truth)?;
        write_citation_events_csv(std::fs::File::create(&paths[3])?, &self.events)?;
        Ok(paths.to_vec())
    }
}

pub fn write_ground_truth_csv<W: Write>(out: W, truth: &[GroundTruth]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["grant_id", "is_planted_novel"])?;
    for t in truth {
        w.write_record([t.grant_id.clone(), u8::from(t.is_planted_novel).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn topic_word(topic: usize, i: usize) -> String {
    format!("t{topic}w{i}")
}

pub fn novel_word(year: i32, i: usize) -> String {
    format!("n{year}w{i}")
}

fn common_word(i: usize) -> String {
    format!("cw{i}")
}

fn zipf(n: usize) -> WeightedIndex<f64> {
    WeightedIndex::new((0..n).map(|r| 1.0 / (r as f64 + 1.0).powf(0.7))).expect("positive weights")
}

struct Draft {
    grant: GrantRecord,
    main_topic: usize,
    novel: bool,
}

/// Generates grants, publications, ground truth and citation events.
pub fn generate(spec: &SynthSpec) -> Result<SynthCorpus> {
    spec.validate()?;
    let word_dist = zipf(spec.words_per_topic);
    let novel_dist = zipf(spec.novel_block_size);
    let mut drafts: Vec<Draft> = Vec::new();
    for (ai, agency) in spec.agencies.iter().enumerate() {
        for year in spec.years() {
            let mut rng = stream(spec.seed, "synth-year", &[ai as i64, i64::from(year)]);
            let n = spec.grants_per_year;
            let n_novel = (spec.novel_fraction * n as f64).round() as usize;
            let programs: Vec<usize> = (0..n).map(|_| rng.random_range(0..spec.programs.len())).collect();
            let mut priority: Vec<(f64, usize)> =
                (0..n).map(|i| (rng.random::<f64>() + spec.programs[programs[i]].1, i)).collect();
            priority.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let mut is_novel = vec![false; n];
            for &(_, i) in priority.iter().take(n_novel) {
                is_novel[i] = true;
            }
            for i in 0..n {
                let division = rng.random_range(0..spec.divisions);
                let per_div: Vec<usize> = (0..spec.topics).filter(|t| t % spec.divisions == division).collect();
                let main = per_div[rng.random_range(0..per_div.len())];
                let planted_frontier = spec.topics + year.rem_euclid(spec.frontier_topics.max(1) as i32) as usize;
                let frontier = spec.topics + rng.random_range(0..spec.frontier_topics.max(1));
                let len = rng.random_range(spec.doc_len.0..=spec.doc_len.1);
                let mut tokens: Vec<String> = Vec::with_capacity(len);
                if is_novel[i] {
                    let n_block = (spec.novel_token_share * len as f64).ceil() as usize;
                    for _ in 0..n_block {
                        tokens.push(novel_word(year, novel_dist.sample(&mut rng)));
                    }
                    while tokens.len() < len {
                        if spec.frontier_topics > 0 {
                            tokens.push(topic_word(planted_frontier, word_dist.sample(&mut rng)));
                        } else {
                            let t = rng.random_range(0..spec.topics);
                            tokens.push(topic_word(t, rng.random_range(0..spec.words_per_topic)));
                        }
                    }
                    tokens.shuffle(&mut rng);
                } else {
                    let mut secondary = rng.random_range(0..spec.topics - 1);
                    if secondary >= main {
                        secondary += 1;
                    }
                    if spec.frontier_topics > 0 && rng.random::<f64>() < spec.frontier_rate {
                        secondary = frontier;
                    }
                    for _ in 0..len {
                        let u: f64 = rng.random();
                        if u < spec.common_share && spec.common_words > 0 {
                            tokens.push(common_word(rng.random_range(0..spec.common_words)));
                        } else {
                            let r = (u - spec.common_share) / (1.0 - spec.common_share);
                            let t = if r < 0.75 { main } else { secondary };
                            tokens.push(topic_word(t, word_dist.sample(&mut rng)));
                        }
                    }
                }
                let n_pis = [1usize, 1, 2, 3][rng.random_range(0..4)];
                let mut pi_ids: Vec<String> = Vec::with_capacity(n_pis);
                while pi_ids.len() < n_pis {
                    let p = format!("pi{}", rng.random_range(0..spec.pi_pool));
                    if !pi_ids.contains(&p) {
                        pi_ids.push(p);
                    }
                }
                let award = ((0.1 + 0.9 * rng.random::<f64>()) * 1e4).round() / 1e4;
                let length = rng.random_range(1..=5);
                drafts.push(Draft {
                    grant: GrantRecord {
                        grant_id: format!("{}-{}-{:05}", agency, year, i),
                        agency: agency.clone(),
                        program: spec.programs[programs[i]].0.clone(),
                        division: format!("D{division}"),
                        fiscal_year: year,
                        start_year: year,
                        end_year: year + length,
                        award_amount: award,
                        pi_ids,
                        summary: tokens.join(" "),
                        is_research: None,
                        research_prob: None,
                    },
                    main_topic: main,
                    novel: is_novel[i],
                });
            }
        }
    }

    let experienced = pi_experience(&drafts.iter().map(|d| d.grant.clone()).collect::<Vec<_>>());
    let event_weights: Vec<f64> =
        (0..=spec.event_years).map(|age| (age as f64 + 1.0) * (-(age as f64) / 3.0).exp()).collect();
    let event_dist = WeightedIndex::new(&event_weights).expect("positive weights");
    let mut publications = Vec::new();
    let mut events = Vec::new();
    for (gi, d) in drafts.iter().enumerate() {
        let g = &d.grant;
        let mut rng = stream(spec.seed, "synth-pubs", &[gi as i64]);
        let count = if spec.pubs_per_grant > 0.0 {
            Poisson::new(spec.pubs_per_grant).expect("positive rate").sample(&mut rng) as usize
        } else {
            0
        };
        for j in 0..count {
            let field = if d.novel { rng.random_range(0..spec.fields) } else { d.main_topic % spec.fields };
            let pub_year = g.fiscal_year + rng.random_range(1..=3);
            let sjr = ((0.5 + 0.3 * field as f64 + 2.0 * rng.random::<f64>()) * 1e3).round() / 1e3;
            let mean = spec.citations.mean(
                f64::from(u8::from(d.novel)),
                pub_year,
                sjr,
                g.award_amount,
                g.pi_ids.len(),
                experienced[gi],
            );
            let citations = spec.citations.draw(mean, &mut rng);
            let pub_id = format!("{}-P{j}", g.grant_id);
            let mut per_year = vec![0u64; event_weights.len()];
            for _ in 0..citations {
                per_year[event_dist.sample(&mut rng)] += 1;
            }
            for (age, &c) in per_year.iter().enumerate() {
                if c > 0 {
                    events.push(CitationEvent { pub_id: pub_id.clone(), year: pub_year + age as i32, citations: c });
                }
            }
            publications.push(PublicationRecord {
                pub_id,
                grant_ids: vec![g.grant_id.clone()],
                pub_year,
                citations,
                sjr: Some(sjr),
                field: Some(format!("F{field}")),
                journal: format!("J{field}-{}", rng.random_range(0..5)),
            });
        }
    }
    let truth = drafts.iter().map(|d| GroundTruth { grant_id: d.grant.grant_id.clone(), is_planted_novel: d.novel }).collect();
    Ok(SynthCorpus { grants: drafts.into_iter().map(|d| d.grant).collect(), publications, truth, events })
}

/// Redraws every publication's citations from `model`, using `novelty[grant_id]`
/// (maximum over the publication's grants) as the novelty regressor.
/// Publications whose grants have no score keep their citations.
pub fn replant_citations(
    grants: &[GrantRecord],
    pubs: &[PublicationRecord],
    novelty: &HashMap<String, f64>,
    model: &CitationModel,
    seed: u64,
) -> Vec<PublicationRecord> {
    let experienced = pi_experience(grants);
    let index: HashMap<&str, usize> = grants.iter().enumerate().map(|(i, g)| (g.grant_id.as_str(), i)).collect();
    pubs.iter()
        .enumerate()
        .map(|(pi, p)| {
            let best = p
                .grant_ids
                .iter()
                .filter_map(|id| Some((index.get(id.as_str())?, novelty.get(id)?)))
                .max_by(|a, b| a.1.total_cmp(b.1));
            let mut out = p.clone();
            if let Some((&gi, &score)) = best {
                let g = &grants[gi];
                let mut rng = stream(seed, "replant", &[pi as i64]);
                let mean = model.mean(score, p.pub_year, p.sjr.unwrap_or(0.0), g.award_amount, g.pi_ids.len(), experienced[gi]);
                out.citations = model.draw(mean, &mut rng);
            }
            out
        })
        .collect()
}

/// Linearly separable labeled pool: `x ~ N(0, I)`, label `wᵀx > b` with
/// `b` at the `1 − positive_rate` quantile, points within `margin` of the
/// boundary redrawn.
pub fn separable_pool(seed: u64, n: usize, dim: usize, positive_rate: f64, margin: f64) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = stream(seed, "separable-pool", &[]);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut w: Vec<f64> = (0..dim).map(|_| normal.sample(&mut rng)).collect();
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.iter_mut().for_each(|v| *v /= norm);
    // wᵀx ~ N(0, 1); threshold at its empirical quantile.
    let mut draws: Vec<f64> = (0..100_000).map(|_| normal.sample(&mut rng)).collect();
    draws.sort_by(f64::total_cmp);
    let b = draws[(((1.0 - positive_rate) * draws.len() as f64) as usize).min(draws.len() - 1)];
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    while xs.len() < n {
        let x: Vec<f64> = (0..dim).map(|_| normal.sample(&mut rng)).collect();
        let s: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
        if (s - b).abs() < margin {
            continue;
        }
        ys.push(s > b);
        xs.push(x);
    }
    (xs, ys)
}
