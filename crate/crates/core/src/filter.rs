//! Non-research grant classifier.
//!
//! An L2-penalized logistic regression over sparse features, trained inside an
//! uncertainty-sampling active-learning loop. The positive class (label 1) is
//! *non-research*; applying a model sets `is_research = p < threshold`.
//!
//! Labels files are CSV with columns `grant_id,label,provenance`, provenance
//! being `seed-list` or `round-<r>`.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Read, Write};

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::corpus::GrantRecord;
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::sparse::{CsrMatrix, SparseVec};
use crate::stats::{mean, roc_auc, sample_sd};

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub l2: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grad_norm: f64,
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^s)` without overflow.
fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

fn row_score(x: &CsrMatrix, i: usize, w: &[f64], b: f64) -> f64 {
    let (idx, val) = x.row(i);
    b + idx.iter().zip(val).map(|(&j, &v)| w[j] * v).sum::<f64>()
}

/// Penalized log-likelihood `Σ [y s − ln(1 + e^s)] − (l2 / 2) ‖w‖²`; the
/// intercept is not penalized.
pub fn logreg_objective(x: &CsrMatrix, y: &[bool], w: &[f64], b: f64, l2: f64) -> f64 {
    let ll: f64 = (0..x.n_rows())
        .map(|i| {
            let s = row_score(x, i, w, b);
            (if y[i] { s } else { 0.0 }) - softplus(s)
        })
        .sum();
    ll - 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Gradient of [`logreg_objective`] with respect to `(w, b)`.
pub fn logreg_gradient(x: &CsrMatrix, y: &[bool], w: &[f64], b: f64, l2: f64) -> (Vec<f64>, f64) {
    let mut gw: Vec<f64> = w.iter().map(|v| -l2 * v).collect();
    let mut gb = 0.0;
    for i in 0..x.n_rows() {
        let r = f64::from(u8::from(y[i])) - sigmoid(row_score(x, i, w, b));
        let (idx, val) = x.row(i);
        for (&j, &v) in idx.iter().zip(val) {
            gw[j] += r * v;
        }
        gb += r;
    }
    (gw, gb)
}

fn check_xy(x: &CsrMatrix, y: &[bool]) -> Result<()> {
    if x.n_rows() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.n_rows(), got: y.len() });
    }
    if !(y.iter().any(|&v| v) && y.iter().any(|&v| !v)) {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Full-batch gradient ascent with Armijo backtracking. Trial steps start from
/// the Barzilai–Borwein estimate; every accepted step increases the objective.
pub fn logreg_fit(x: &CsrMatrix, y: &[bool], l2: f64, max_iter: usize, tol: f64) -> Result<LogRegModel> {
    check_xy(x, y)?;
    if !(l2 >= 0.0 && l2.is_finite()) {
        return Err(Error::InvalidInput(format!("l2 must be >= 0, got {l2}")));
    }
    let d = x.n_cols;
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut f = logreg_objective(x, y, &w, b, l2);
    let (mut gw, mut gb) = logreg_gradient(x, y, &w, b, l2);
    let norm = |gw: &[f64], gb: f64| (gw.iter().map(|v| v * v).sum::<f64>() + gb * gb).sqrt();
    let mut gnorm = norm(&gw, gb);
    let mut step = 1.0 / x.n_rows().max(1) as f64;
    let mut iterations = 0;
    while gnorm >= tol && iterations < max_iter {
        iterations += 1;
        let g2 = gnorm * gnorm;
        let mut t = step;
        let (nw, nb, nf) = loop {
            let nw: Vec<f64> = w.iter().zip(&gw).map(|(a, g)| a + t * g).collect();
            let nb = b + t * gb;
            let nf = logreg_objective(x, y, &nw, nb, l2);
            if nf >= f + ARMIJO_C * t * g2 {
                break (nw, nb, nf);
            }
            t *= 0.5;
            if t < MIN_STEP {
                return Ok(LogRegModel { weights: w, intercept: b, l2, iterations, converged: false, grad_norm: gnorm });
            }
        };
        let (ngw, ngb) = logreg_gradient(x, y, &nw, nb, l2);
        // Barzilai–Borwein: s = Δθ, z = −Δg (ascent on a concave objective).
        let mut ss = (nb - b) * (nb - b);
        let mut sz = -(nb - b) * (ngb - gb);
        for j in 0..d {
            let s = nw[j] - w[j];
            ss += s * s;
            sz -= s * (ngw[j] - gw[j]);
        }
        step = if sz > 0.0 { ss / sz } else { t * 2.0 };
        (w, b, f, gw, gb) = (nw, nb, nf, ngw, ngb);
        gnorm = norm(&gw, gb);
    }
    let converged = gnorm < tol;
    if !converged {
        log::warn!("logistic regression stopped after {iterations} iterations, gradient norm {gnorm:e}");
    }
    Ok(LogRegModel { weights: w, intercept: b, l2, iterations, converged, grad_norm: gnorm })
}

impl LogRegModel {
    pub fn predict_proba(&self, x: &SparseVec) -> Result<f64> {
        Ok(sigmoid(x.dot_dense(&self.weights)? + self.intercept))
    }

    pub fn predict_rows(&self, x: &CsrMatrix) -> Result<Vec<f64>> {
        if x.n_cols != self.weights.len() {
            return Err(Error::DimensionMismatch { expected: self.weights.len(), got: x.n_cols });
        }
        Ok((0..x.n_rows()).map(|i| sigmoid(row_score(x, i, &self.weights, self.intercept))).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    SeedList,
    Round(usize),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::SeedList => f.write_str("seed-list"),
            Provenance::Round(r) => write!(f, "round-{r}"),
        }
    }
}

impl Provenance {
    pub fn parse(s: &str) -> Result<Provenance> {
        let s = s.trim();
        if s.is_empty() || s == "seed-list" || s == "seed" {
            return Ok(Provenance::SeedList);
        }
        s.strip_prefix("round-")
            .and_then(|r| r.parse().ok())
            .map(Provenance::Round)
            .ok_or_else(|| Error::InvalidInput(format!("unknown label provenance `{s}`")))
    }
}

/// Feature rows with an optional label each; an item is either labeled or in
/// the unlabeled pool, never both.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelPool {
    pub ids: Vec<String>,
    pub x: CsrMatrix,
    pub labels: Vec<Option<(bool, Provenance)>>,
}

impl LabelPool {
    pub fn new(ids: Vec<String>, x: CsrMatrix) -> Result<LabelPool> {
        if ids.len() != x.n_rows() {
            return Err(Error::DimensionMismatch { expected: x.n_rows(), got: ids.len() });
        }
        let labels = vec![None; ids.len()];
        Ok(LabelPool { ids, x, labels })
    }

    /// Marks the items of `seed` (`id → label`) as seed-list labels. Unknown ids are an error.
    pub fn with_seed_labels(mut self, seed: &HashMap<String, bool>) -> Result<LabelPool> {
        let index: HashMap<&str, usize> = self.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut hits: Vec<(usize, bool)> = Vec::with_capacity(seed.len());
        for (id, &y) in seed {
            let &i = index.get(id.as_str()).ok_or_else(|| Error::InvalidInput(format!("seed label for unknown id `{id}`")))?;
            hits.push((i, y));
        }
        for (i, y) in hits {
            self.labels[i] = Some((y, Provenance::SeedList));
        }
        Ok(self)
    }

    pub fn labeled(&self) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i].is_some()).collect()
    }

    pub fn unlabeled(&self) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i].is_none()).collect()
    }

    pub fn n_labeled(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    /// Labeled rows and their labels, in pool order.
    pub fn training_set(&self) -> (CsrMatrix, Vec<bool>) {
        let idx = self.labeled();
        let y = idx.iter().map(|&i| self.labels[i].unwrap().0).collect();
        (select_rows(&self.x, &idx), y)
    }

    pub fn write_labels_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["grant_id", "label", "provenance"])?;
        for (id, l) in self.ids.iter().zip(&self.labels) {
            if let Some((y, p)) = l {
                w.write_record([id.as_str(), if *y { "1" } else { "0" }, &p.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn select_rows(x: &CsrMatrix, rows: &[usize]) -> CsrMatrix {
    let mut m = CsrMatrix::empty(x.n_cols);
    for &i in rows {
        m.push_row(&x.row_vec(i)).expect("same width");
    }
    m
}

/// Labels read from a labels file: `id → (label, provenance)`.
pub fn read_labels_csv<R: Read>(input: R) -> Result<Vec<(String, bool, Provenance)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.to_ascii_lowercase()).collect();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn(name.into()));
    let (ci, cl) = (col("grant_id")?, col("label")?);
    let cp = headers.iter().position(|h| h == "provenance");
    let mut out = Vec::new();
    let mut bad = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = n + 2;
        let y = match rec.get(cl).unwrap_or("") {
            "1" => true,
            "0" => false,
            v => {
                bad.push(crate::error::RowError { line, reason: format!("label must be 0 or 1, got `{v}`") });
                continue;
            }
        };
        let p = match Provenance::parse(cp.and_then(|c| rec.get(c)).unwrap_or("")) {
            Ok(p) => p,
            Err(e) => {
                bad.push(crate::error::RowError { line, reason: e.to_string() });
                continue;
            }
        };
        out.push((rec.get(ci).unwrap_or("").to_string(), y, p));
    }
    if !bad.is_empty() {
        return Err(Error::Rows(bad));
    }
    Ok(out)
}

/// Answers label queries for pool items.
pub trait LabelOracle {
    /// Returns one label per `(pool index, id)` in `items`.
    fn label(&mut self, items: &[(usize, &str)]) -> Result<Vec<bool>>;
}

/// Labels indexed by pool position, for synthetic pools with known truth.
pub struct TruthOracle<'a>(pub &'a [bool]);

impl LabelOracle for TruthOracle<'_> {
    fn label(&mut self, items: &[(usize, &str)]) -> Result<Vec<bool>> {
        items
            .iter()
            .map(|&(i, _)| self.0.get(i).copied().ok_or_else(|| Error::Oracle(format!("no label for pool item {i}"))))
            .collect()
    }
}

/// Looks answers up in a labels file; a missing id is an oracle failure.
pub struct FileOracle {
    pub labels: HashMap<String, bool>,
}

impl LabelOracle for FileOracle {
    fn label(&mut self, items: &[(usize, &str)]) -> Result<Vec<bool>> {
        items
            .iter()
            .map(|&(_, id)| self.labels.get(id).copied().ok_or_else(|| Error::Oracle(format!("no label for `{id}` in labels file"))))
            .collect()
    }
}

/// Asks a person: prints each grant summary and reads `y` (non-research) or `n`.
pub struct PromptOracle<'a, R: BufRead, W: Write> {
    pub input: R,
    pub output: W,
    pub summaries: &'a HashMap<String, String>,
}

impl<R: BufRead, W: Write> LabelOracle for PromptOracle<'_, R, W> {
    fn label(&mut self, items: &[(usize, &str)]) -> Result<Vec<bool>> {
        let mut out = Vec::with_capacity(items.len());
        for &(_, id) in items {
            let text = self.summaries.get(id).map_or("", String::as_str);
            writeln!(self.output, "\n[{id}] {text}\nnon-research? [y/n] ")?;
            self.output.flush()?;
            loop {
                let mut line = String::new();
                if self.input.read_line(&mut line)? == 0 {
                    return Err(Error::Oracle("input closed".into()));
                }
                match line.trim().to_ascii_lowercase().as_str() {
                    "y" | "yes" | "1" => break out.push(true),
                    "n" | "no" | "0" => break out.push(false),
                    _ => writeln!(self.output, "answer y or n")?,
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveConfig {
    pub rounds: usize,
    pub batch: usize,
    pub l2: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for ActiveConfig {
    fn default() -> Self {
        ActiveConfig { rounds: 10, batch: 20, l2: 1.0, max_iter: 1000, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundLog {
    pub round: usize,
    pub labeled_before: usize,
    pub queried: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActiveReport {
    pub rounds_run: usize,
    pub exhausted: bool,
    pub log: Vec<RoundLog>,
}

/// Query order for one round: all unlabeled items by `|p − 0.5|`, lowest index first on ties.
pub fn uncertainty_order(model: &LogRegModel, pool: &LabelPool) -> Result<Vec<usize>> {
    let un = pool.unlabeled();
    let p = model.predict_rows(&select_rows(&pool.x, &un))?;
    let mut order: Vec<(f64, usize)> = p.iter().zip(&un).map(|(&p, &i)| ((p - 0.5).abs(), i)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(order.into_iter().map(|(_, i)| i).collect())
}

fn run_loop<O: LabelOracle>(
    mut pool: LabelPool,
    oracle: &mut O,
    cfg: &ActiveConfig,
    mut pick: impl FnMut(&LogRegModel, &LabelPool) -> Result<Vec<usize>>,
) -> Result<(LogRegModel, LabelPool, ActiveReport)> {
    if cfg.rounds == 0 || cfg.batch == 0 {
        return Err(Error::InvalidInput("rounds and batch must be >= 1".into()));
    }
    let mut log = Vec::with_capacity(cfg.rounds);
    let mut exhausted = false;
    for round in 1..=cfg.rounds {
        let (x, y) = pool.training_set();
        let model = logreg_fit(&x, &y, cfg.l2, cfg.max_iter, cfg.tol)?;
        let chosen: Vec<usize> = pick(&model, &pool)?.into_iter().take(cfg.batch).collect();
        if chosen.is_empty() {
            exhausted = true;
            log::warn!("label pool exhausted before round {round}");
            break;
        }
        let items: Vec<(usize, &str)> = chosen.iter().map(|&i| (i, pool.ids[i].as_str())).collect();
        let answers = oracle.label(&items)?;
        if answers.len() != chosen.len() {
            return Err(Error::Oracle(format!("{} answers for {} queries", answers.len(), chosen.len())));
        }
        log.push(RoundLog { round, labeled_before: pool.n_labeled(), queried: chosen.len() });
        for (&i, y) in chosen.iter().zip(answers) {
            pool.labels[i] = Some((y, Provenance::Round(round)));
        }
    }
    let (x, y) = pool.training_set();
    let model = logreg_fit(&x, &y, cfg.l2, cfg.max_iter, cfg.tol)?;
    Ok((model, pool, ActiveReport { rounds_run: log.len(), exhausted, log }))
}

/// Uncertainty sampling: each round refits on the current labels and queries
/// the `batch` unlabeled items closest to p = 0.5. The returned model is fitted
/// on every label gathered.
pub fn active_learning_loop<O: LabelOracle>(
    pool: LabelPool,
    oracle: &mut O,
    cfg: &ActiveConfig,
) -> Result<(LogRegModel, LabelPool, ActiveReport)> {
    check_xy(&pool.training_set().0, &pool.training_set().1)?;
    run_loop(pool, oracle, cfg, uncertainty_order)
}

/// Baseline: same loop, querying unlabeled items in a seeded random order.
pub fn random_sampling_loop<O: LabelOracle>(
    pool: LabelPool,
    oracle: &mut O,
    cfg: &ActiveConfig,
    seed: u64,
) -> Result<(LogRegModel, LabelPool, ActiveReport)> {
    check_xy(&pool.training_set().0, &pool.training_set().1)?;
    let mut order: Vec<usize> = (0..pool.ids.len()).collect();
    order.shuffle(&mut stream(seed, "random-labels", &[]));
    run_loop(pool, oracle, cfg, move |_, p| Ok(order.iter().copied().filter(|&i| p.labels[i].is_none()).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    Uncertainty,
    Random { seed: u64 },
}

/// Runs one round at a time and records `(labels held, eval(model))` after
/// the seed labels and after every round, stopping early when the pool is
/// exhausted.
pub fn learning_curve<O: LabelOracle>(
    mut pool: LabelPool,
    oracle: &mut O,
    cfg: &ActiveConfig,
    strategy: Strategy,
    mut eval: impl FnMut(&LogRegModel) -> Result<f64>,
) -> Result<Vec<(usize, f64)>> {
    let (x, y) = pool.training_set();
    check_xy(&x, &y)?;
    let mut curve = vec![(pool.n_labeled(), eval(&logreg_fit(&x, &y, cfg.l2, cfg.max_iter, cfg.tol)?)?)];
    let one = ActiveConfig { rounds: 1, ..*cfg };
    for _ in 0..cfg.rounds {
        let (model, next, rep) = match strategy {
            Strategy::Uncertainty => active_learning_loop(pool, oracle, &one)?,
            Strategy::Random { seed } => random_sampling_loop(pool, oracle, &one, seed)?,
        };
        if rep.exhausted {
            break;
        }
        pool = next;
        curve.push((pool.n_labeled(), eval(&model)?));
    }
    Ok(curve)
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin.
pub fn stratified_folds(y: &[bool], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 folds, got {folds}")));
    }
    let mut fold = vec![0; y.len()];
    for class in [false, true] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if idx.len() < folds {
            return Err(Error::InvalidInput(format!(
                "class {} has {} items, fewer than {folds} folds",
                u8::from(class),
                idx.len()
            )));
        }
        idx.shuffle(&mut stream(seed, "cv-folds", &[i64::from(class)]));
        for (k, &i) in idx.iter().enumerate() {
            fold[i] = k % folds;
        }
    }
    Ok(fold)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvAuc {
    pub mean: f64,
    pub sd: f64,
    pub per_fold: Vec<f64>,
}

pub fn cv_auc(x: &CsrMatrix, y: &[bool], folds: usize, l2: f64, seed: u64) -> Result<CvAuc> {
    check_xy(x, y)?;
    let fold = stratified_folds(y, folds, seed)?;
    let per_fold = (0..folds)
        .map(|k| {
            let train: Vec<usize> = (0..y.len()).filter(|&i| fold[i] != k).collect();
            let test: Vec<usize> = (0..y.len()).filter(|&i| fold[i] == k).collect();
            let ytr: Vec<bool> = train.iter().map(|&i| y[i]).collect();
            let yte: Vec<bool> = test.iter().map(|&i| y[i]).collect();
            let m = logreg_fit(&select_rows(x, &train), &ytr, l2, 1000, 1e-6)?;
            roc_auc(&m.predict_rows(&select_rows(x, &test))?, &yte)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CvAuc { mean: mean(&per_fold), sd: sample_sd(&per_fold), per_fold })
}

/// Sets `is_research` and `research_prob` on every grant; `p` holds the
/// non-research probabilities in grant order.
pub fn apply_filter(grants: &mut [GrantRecord], p: &[f64], threshold: f64) -> Result<()> {
    if grants.len() != p.len() {
        return Err(Error::DimensionMismatch { expected: grants.len(), got: p.len() });
    }
    for (g, &p) in grants.iter_mut().zip(p) {
        g.research_prob = Some(1.0 - p);
        g.is_research = Some(p < threshold);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthkit::separable_pool;

    fn dense_x(rows: &[Vec<f64>]) -> CsrMatrix {
        CsrMatrix::from_dense(rows)
    }

    #[test]
    fn symmetric_data_gives_zero_weight() {
        // x ∈ {−1, 1} crossed with y ∈ {0, 1}, 3:1 positive rate in each cell.
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for x in [-1.0, 1.0] {
            for k in 0..4 {
                rows.push(vec![x]);
                y.push(k < 3);
            }
        }
        let m = logreg_fit(&dense_x(&rows), &y, 0.0, 10_000, 1e-10).unwrap();
        assert!(m.weights[0].abs() < 1e-3);
        assert!((m.intercept - 3.0f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn separable_data_fits_perfectly() {
        let (x, y) = separable_pool(3, 200, 5, 0.3, 0.2);
        let x = dense_x(&x);
        let m = logreg_fit(&x, &y, 0.1, 5000, 1e-8).unwrap();
        let p = m.predict_rows(&x).unwrap();
        assert!(p.iter().zip(&y).all(|(&p, &y)| (p > 0.5) == y));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (x, y) = separable_pool(5, 60, 4, 0.4, 0.0);
        let x = dense_x(&x);
        let mut rng = stream(9, "fd", &[]);
        let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
        for _ in 0..10 {
            use rand_distr::Distribution;
            let w: Vec<f64> = (0..4).map(|_| normal.sample(&mut rng)).collect();
            let b = normal.sample(&mut rng);
            let (gw, gb) = logreg_gradient(&x, &y, &w, b, 0.7);
            let h = 1e-5;
            for j in 0..=4 {
                let at = |d: f64| {
                    let mut w2 = w.clone();
                    let mut b2 = b;
                    if j < 4 {
                        w2[j] += d;
                    } else {
                        b2 += d;
                    }
                    logreg_objective(&x, &y, &w2, b2, 0.7)
                };
                let fd = (at(h) - at(-h)) / (2.0 * h);
                let g = if j < 4 { gw[j] } else { gb };
                assert!((fd - g).abs() <= 1e-6 * g.abs().max(1.0), "{fd} vs {g}");
            }
        }
    }

    #[test]
    fn single_class_rejected() {
        let x = dense_x(&[vec![1.0], vec![2.0]]);
        assert!(matches!(logreg_fit(&x, &[true, true], 1.0, 10, 1e-6), Err(Error::SingleClass)));
    }

    #[test]
    fn predict_proba_cases() {
        let zero = LogRegModel { weights: vec![0.0; 2], intercept: 0.0, l2: 0.0, iterations: 0, converged: true, grad_norm: 0.0 };
        assert_eq!(zero.predict_proba(&SparseVec::from_dense(&[3.0, -1.0])).unwrap(), 0.5);
        let m = LogRegModel { weights: vec![1.0, 0.0], ..zero.clone() };
        assert!(m.predict_proba(&SparseVec::from_dense(&[50.0, 0.0])).unwrap() > 1.0 - 1e-9);
        assert!(m.predict_proba(&SparseVec::from_dense(&[1.0, 0.0])).unwrap() > m.predict_proba(&SparseVec::from_dense(&[0.5, 0.0])).unwrap());
        assert!(matches!(m.predict_proba(&SparseVec::from_dense(&[1.0])), Err(Error::DimensionMismatch { .. })));
        let flipped = LogRegModel { weights: vec![-1.0, 0.0], intercept: -0.3, ..zero.clone() };
        let m = LogRegModel { intercept: 0.3, ..m };
        let x = SparseVec::from_dense(&[0.7, 2.0]);
        assert!((m.predict_proba(&x).unwrap() + flipped.predict_proba(&x).unwrap() - 1.0).abs() < 1e-12);
    }

    fn pool_with_seed(n: usize, seed: u64) -> (LabelPool, Vec<bool>) {
        let (x, y) = separable_pool(seed, n, 6, 0.3, 0.1);
        let ids = (0..n).map(|i| format!("g{i}")).collect();
        let mut pool = LabelPool::new(ids, dense_x(&x)).unwrap();
        let first_pos = y.iter().position(|&v| v).unwrap();
        let first_neg = y.iter().position(|&v| !v).unwrap();
        pool.labels[first_pos] = Some((true, Provenance::SeedList));
        pool.labels[first_neg] = Some((false, Provenance::SeedList));
        (pool, y)
    }

    #[test]
    fn one_big_round_labels_everything() {
        let (pool, y) = pool_with_seed(30, 1);
        let cfg = ActiveConfig { rounds: 1, batch: 100, ..Default::default() };
        let (_, pool, rep) = active_learning_loop(pool, &mut TruthOracle(&y), &cfg).unwrap();
        assert_eq!(pool.n_labeled(), 30);
        assert_eq!(rep.rounds_run, 1);
        assert!(pool.labels.iter().zip(&y).all(|(l, &t)| l.unwrap().0 == t));
    }

    #[test]
    fn exhausted_pool_stops_early() {
        let (pool, y) = pool_with_seed(30, 1);
        let cfg = ActiveConfig { rounds: 5, batch: 20, ..Default::default() };
        let (_, pool, rep) = active_learning_loop(pool, &mut TruthOracle(&y), &cfg).unwrap();
        assert_eq!(pool.n_labeled(), 30);
        assert!(rep.exhausted);
        assert_eq!(rep.rounds_run, 2);
    }

    #[test]
    fn loop_is_deterministic_and_records_provenance() {
        let (pool, y) = pool_with_seed(120, 4);
        let cfg = ActiveConfig { rounds: 3, batch: 5, ..Default::default() };
        let a = active_learning_loop(pool.clone(), &mut TruthOracle(&y), &cfg).unwrap();
        let b = active_learning_loop(pool, &mut TruthOracle(&y), &cfg).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        assert_eq!(a.1.labels.iter().filter(|l| matches!(l, Some((_, Provenance::Round(3))))).count(), 5);
        let mut buf = Vec::new();
        a.1.write_labels_csv(&mut buf).unwrap();
        let back = read_labels_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 17);
        assert_eq!(back.iter().filter(|r| r.2 == Provenance::SeedList).count(), 2);
    }

    #[test]
    fn uncertainty_ties_break_by_index() {
        let x = dense_x(&[vec![0.0], vec![1.0], vec![0.0], vec![-1.0]]);
        let pool = LabelPool::new((0..4).map(|i| i.to_string()).collect(), x).unwrap();
        let m = LogRegModel { weights: vec![2.0], intercept: 0.0, l2: 0.0, iterations: 0, converged: true, grad_norm: 0.0 };
        assert_eq!(uncertainty_order(&m, &pool).unwrap(), vec![0, 2, 1, 3]);
    }

    #[test]
    fn file_oracle_missing_id_fails() {
        let mut o = FileOracle { labels: HashMap::from([("a".to_string(), true)]) };
        assert_eq!(o.label(&[(0, "a")]).unwrap(), vec![true]);
        assert!(matches!(o.label(&[(1, "b")]), Err(Error::Oracle(_))));
    }

    #[test]
    fn prompt_oracle_reads_answers() {
        let summaries = HashMap::from([("a".to_string(), "workshop travel".to_string())]);
        let mut out = Vec::new();
        let mut o = PromptOracle { input: "maybe\ny\n".as_bytes(), output: &mut out, summaries: &summaries };
        assert_eq!(o.label(&[(0, "a")]).unwrap(), vec![true]);
        assert!(String::from_utf8(out).unwrap().contains("answer y or n"));
    }

    #[test]
    fn cv_auc_separable_is_one() {
        let (x, y) = separable_pool(2, 150, 4, 0.3, 0.3);
        let r = cv_auc(&dense_x(&x), &y, 3, 0.1, 0).unwrap();
        assert_eq!(r.mean, 1.0);
        assert_eq!(r.per_fold.len(), 3);
    }

    #[test]
    fn cv_auc_shuffled_labels_near_half() {
        let mut inside = 0;
        for seed in 0..20 {
            let (x, mut y) = separable_pool(seed, 400, 4, 0.4, 0.0);
            y.shuffle(&mut stream(seed, "shuffle", &[]));
            let r = cv_auc(&dense_x(&x), &y, 3, 1.0, seed).unwrap();
            if (0.4..=0.6).contains(&r.mean) {
                inside += 1;
            }
        }
        assert!(inside >= 18, "{inside}");
    }

    #[test]
    fn folds_are_stratified() {
        let y: Vec<bool> = (0..31).map(|i| i % 3 == 0).collect();
        let f = stratified_folds(&y, 3, 1).unwrap();
        for k in 0..3 {
            let pos = (0..31).filter(|&i| f[i] == k && y[i]).count();
            assert!((3..=4).contains(&pos));
        }
        assert!(stratified_folds(&[true, false, false], 3, 0).is_err());
    }

    #[test]
    fn apply_filter_sets_columns() {
        let mut g = vec![GrantRecord {
            grant_id: "a".into(),
            agency: crate::corpus::Agency::Nsf,
            program: String::new(),
            division: String::new(),
            fiscal_year: 2010,
            start_year: 2010,
            end_year: 2011,
            award_amount: 0.1,
            pi_ids: vec![],
            summary: String::new(),
            is_research: None,
            research_prob: None,
        }];
        apply_filter(&mut g, &[0.8], 0.5).unwrap();
        assert_eq!(g[0].is_research, Some(false));
        assert!((g[0].research_prob.unwrap() - 0.2).abs() < 1e-12);
    }
}
