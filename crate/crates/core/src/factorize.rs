//! Non-negative matrix factorization `V ≈ W H` of the tf-idf matrix.
//!
//! Frobenius loss, Lee–Seung multiplicative updates:
//!
//! ```text
//! H <- H * (Wᵀ V) / (Wᵀ W H + eps)
//! W <- W * (V Hᵀ) / (W H Hᵀ + eps)
//! ```
//!
//! `V` stays sparse; `W` and `H` are dense. Factors start from seeded
//! uniform `(0, 1]` draws scaled by `sqrt(mean(V) / k)`, so fitting `c V`
//! starts from `sqrt(c)`-scaled factors.
//!
//! # Persistence format
//!
//! [`TopicModel::write_text`] emits UTF-8 text:
//!
//! ```text
//! topic-model v1
//! k <topics> seed <seed> cols <terms>
//! <k lines, each with <terms> space-separated entries of H, row-major>
//! ```
//!
//! Entries use Rust's shortest round-trip `f64` formatting, so a read-back
//! model is bit-identical.

use std::io::{BufRead, Write};

use ndarray::{Array1, Array2, Axis};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rng::{stream, uniform_open0};
use crate::sparse::{CsrMatrix, SparseVec};

pub const EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FitInfo {
    pub iterations: usize,
    pub final_loss: f64,
    pub converged: bool,
    /// Loss before the first update and after every iteration.
    pub loss_history: Vec<f64>,
    /// Iterations after which a collapsed topic was reinitialized.
    pub repairs: Vec<usize>,
}

/// Fitted topic-to-term matrix `H` with the products needed for projection.
#[derive(Debug, Clone)]
pub struct TopicModel {
    h: Array2<f64>,
    ht: Array2<f64>,
    gram: Array2<f64>,
    pub seed: u64,
    pub info: FitInfo,
}

/// Document-by-topic loads `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicLoads {
    pub w: Array2<f64>,
}

impl TopicModel {
    pub fn new(h: Array2<f64>, seed: u64, info: FitInfo) -> TopicModel {
        let ht = h.t().as_standard_layout().into_owned();
        let gram = h.dot(&h.t());
        TopicModel { h, ht, gram, seed, info }
    }

    pub fn h(&self) -> &Array2<f64> {
        &self.h
    }

    pub fn topics(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_terms(&self) -> usize {
        self.h.ncols()
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "topic-model v1")?;
        writeln!(out, "k {} seed {} cols {}", self.topics(), self.seed, self.n_terms())?;
        for row in self.h.rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<TopicModel> {
        let bad = |m: &str| Error::InvalidInput(format!("topic model: {m}"));
        let mut lines = input.lines();
        if lines.next().transpose()?.as_deref() != Some("topic-model v1") {
            return Err(bad("missing header"));
        }
        let dims = lines.next().transpose()?.ok_or_else(|| bad("missing dimensions"))?;
        let parts: Vec<&str> = dims.split_whitespace().collect();
        if parts.len() != 6 || parts[0] != "k" || parts[2] != "seed" || parts[4] != "cols" {
            return Err(bad("malformed dimension line"));
        }
        let k: usize = parts[1].parse().map_err(|_| bad("k"))?;
        let seed: u64 = parts[3].parse().map_err(|_| bad("seed"))?;
        let cols: usize = parts[5].parse().map_err(|_| bad("cols"))?;
        let mut data = Vec::with_capacity(k * cols);
        for _ in 0..k {
            let line = lines.next().transpose()?.ok_or_else(|| bad("truncated"))?;
            let row: Vec<f64> =
                line.split_whitespace().map(|s| s.parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad("entry"))?;
            if row.len() != cols {
                return Err(bad("row width"));
            }
            data.extend(row);
        }
        let h = Array2::from_shape_vec((k, cols), data).map_err(|e| bad(&e.to_string()))?;
        let info = FitInfo { iterations: 0, final_loss: f64::NAN, converged: true, loss_history: Vec::new(), repairs: Vec::new() };
        Ok(TopicModel::new(h, seed, info))
    }
}

fn check_nonnegative(v: &CsrMatrix) -> Result<()> {
    for i in 0..v.n_rows() {
        let (idx, val) = v.row(i);
        if let Some(p) = val.iter().position(|&x| x < 0.0 || x.is_nan()) {
            return Err(Error::NegativeEntry { row: i, col: idx[p] });
        }
    }
    Ok(())
}

fn init_scale(sum: f64, entries: usize, k: usize) -> f64 {
    (sum / (entries as f64 * k as f64)).sqrt()
}

fn fill_uniform(a: &mut Array2<f64>, rng: &mut ChaCha8Rng, scale: f64) {
    a.iter_mut().for_each(|x| *x = uniform_open0(rng) * scale);
}

/// `Vᵀ W` as a terms-by-topics matrix.
fn vt_w(v: &CsrMatrix, w: &Array2<f64>) -> Array2<f64> {
    let k = w.ncols();
    let mut out = Array2::<f64>::zeros((v.n_cols, k));
    let o = out.as_slice_mut().unwrap();
    let ws = w.as_slice().unwrap();
    for i in 0..v.n_rows() {
        let wi = &ws[i * k..(i + 1) * k];
        let (idx, val) = v.row(i);
        for (&j, &x) in idx.iter().zip(val) {
            let dst = &mut o[j * k..(j + 1) * k];
            for (d, &wr) in dst.iter_mut().zip(wi) {
                *d += x * wr;
            }
        }
    }
    out
}

/// `V Hᵀ` given `Hᵀ` in standard layout.
fn v_ht(v: &CsrMatrix, ht: &Array2<f64>) -> Array2<f64> {
    let k = ht.ncols();
    let mut out = Array2::<f64>::zeros((v.n_rows(), k));
    let o = out.as_slice_mut().unwrap();
    let hs = ht.as_slice().unwrap();
    for i in 0..v.n_rows() {
        let dst = &mut o[i * k..(i + 1) * k];
        let (idx, val) = v.row(i);
        for (&j, &x) in idx.iter().zip(val) {
            for (d, &h) in dst.iter_mut().zip(&hs[j * k..(j + 1) * k]) {
                *d += x * h;
            }
        }
    }
    out
}

/// `‖V − W H‖²_F`: exact residual on the stored entries plus the mass of `W H` elsewhere.
fn frobenius_loss(v: &CsrMatrix, w: &Array2<f64>, h: &Array2<f64>) -> f64 {
    let k = w.ncols();
    let ht = h.t().as_standard_layout().into_owned();
    let hs = ht.as_slice().unwrap();
    let ws = w.as_slice().unwrap();
    let mut on_support = 0.0;
    let mut approx_on_support = 0.0;
    for i in 0..v.n_rows() {
        let wi = &ws[i * k..(i + 1) * k];
        let (idx, val) = v.row(i);
        for (&j, &x) in idx.iter().zip(val) {
            let wh: f64 = wi.iter().zip(&hs[j * k..(j + 1) * k]).map(|(a, b)| a * b).sum();
            on_support += (x - wh) * (x - wh);
            approx_on_support += wh * wh;
        }
    }
    let total_approx = (&w.t().dot(w) * &h.dot(&h.t())).sum();
    on_support + (total_approx - approx_on_support).max(0.0)
}

/// Factorizes `v` into `k` topics. Stops when the relative loss decrease
/// falls below `tol` or after `max_iter` iterations.
pub fn nmf_fit(v: &CsrMatrix, k: usize, seed: u64, max_iter: usize, tol: f64) -> Result<(TopicLoads, TopicModel)> {
    if k == 0 {
        return Err(Error::InvalidInput("topic count must be >= 1".into()));
    }
    let (n, t) = (v.n_rows(), v.n_cols);
    if n == 0 || t == 0 {
        return Err(Error::InvalidInput(format!("cannot factorize a {n}x{t} matrix")));
    }
    check_nonnegative(v)?;
    if k > n.min(t) {
        log::warn!("nmf: {k} topics exceed min(rows, cols) = {}", n.min(t));
    }
    let mut rng = stream(seed, "nmf-init", &[]);
    let total: f64 = v.data.iter().sum();
    let mut h = Array2::<f64>::zeros((k, t));
    if total == 0.0 {
        fill_uniform(&mut h, &mut rng, 1.0);
        let info = FitInfo { iterations: 0, final_loss: 0.0, converged: true, loss_history: vec![0.0], repairs: Vec::new() };
        return Ok((TopicLoads { w: Array2::zeros((n, k)) }, TopicModel::new(h, seed, info)));
    }
    let scale = init_scale(total, n * t, k);
    let mut w = Array2::<f64>::zeros((n, k));
    fill_uniform(&mut w, &mut rng, scale);
    fill_uniform(&mut h, &mut rng, scale);
    let mut repair_rng = stream(seed, "nmf-repair", &[]);

    let mut history = vec![frobenius_loss(v, &w, &h)];
    let mut repairs = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iter {
        iterations = it;
        let numer_h = vt_w(v, &w);
        let denom_h = w.t().dot(&w).dot(&h);
        ndarray::Zip::from(&mut h).and(&numer_h.t()).and(&denom_h).for_each(|x, &a, &b| *x *= a / (b + EPS));

        let ht = h.t().as_standard_layout().into_owned();
        let numer_w = v_ht(v, &ht);
        let denom_w = w.dot(&h.dot(&ht));
        ndarray::Zip::from(&mut w).and(&numer_w).and(&denom_w).for_each(|x, &a, &b| *x *= a / (b + EPS));

        let mut repaired = false;
        for r in 0..k {
            if h.row(r).iter().all(|&x| x <= f64::MIN_POSITIVE) {
                h.row_mut(r).iter_mut().for_each(|x| *x = uniform_open0(&mut repair_rng) * scale);
                w.column_mut(r).iter_mut().for_each(|x| *x = uniform_open0(&mut repair_rng) * scale);
                repaired = true;
            }
        }
        let loss = frobenius_loss(v, &w, &h);
        let prev = *history.last().unwrap();
        history.push(loss);
        if repaired {
            repairs.push(it);
            continue;
        }
        if loss == 0.0 || (prev - loss) / prev < tol {
            converged = true;
            break;
        }
    }
    let info = FitInfo { iterations, final_loss: *history.last().unwrap(), converged, loss_history: history, repairs };
    Ok((TopicLoads { w }, TopicModel::new(h, seed, info)))
}

/// Projects one tf-idf row onto frozen topics: `min_{w >= 0} ‖v − w H‖²` by
/// multiplicative updates on `w`. The start point depends only on the model
/// seed and `v`, so projection is independent of call order.
pub fn nmf_transform(model: &TopicModel, v: &SparseVec, max_iter: usize, tol: f64) -> Result<Vec<f64>> {
    nmf_transform_traced(model, v, max_iter, tol).map(|(w, _)| w)
}

/// As [`nmf_transform`], also returning the loss after every iteration.
pub fn nmf_transform_traced(model: &TopicModel, v: &SparseVec, max_iter: usize, tol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (k, t) = (model.topics(), model.n_terms());
    if v.dim != t {
        return Err(Error::DimensionMismatch { expected: t, got: v.dim });
    }
    if let Some((j, _)) = v.iter().find(|&(_, x)| x < 0.0 || x.is_nan()) {
        return Err(Error::NegativeEntry { row: 0, col: j });
    }
    let total: f64 = v.values.iter().sum();
    if total == 0.0 {
        return Ok((vec![0.0; k], vec![0.0]));
    }
    let hs = model.ht.as_slice().unwrap();
    let mut numer = Array1::<f64>::zeros(k);
    for (j, x) in v.iter() {
        numer.iter_mut().zip(&hs[j * k..(j + 1) * k]).for_each(|(d, &h)| *d += x * h);
    }
    let vv = v.norm_sq();
    let loss = |w: &Array1<f64>| (vv - 2.0 * w.dot(&numer) + w.dot(&model.gram.dot(w))).max(0.0);

    let mut rng = stream(model.seed, "nmf-transform", &[]);
    let scale = init_scale(total, t, k);
    let mut w: Array1<f64> = (0..k).map(|_| uniform_open0(&mut rng) * scale).collect();
    let mut history = vec![loss(&w)];
    for _ in 0..max_iter {
        let denom = model.gram.dot(&w);
        ndarray::Zip::from(&mut w).and(&numer).and(&denom).for_each(|x, &a, &b| *x *= a / (b + EPS));
        let cur = loss(&w);
        let prev = *history.last().unwrap();
        history.push(cur);
        if cur == 0.0 || (prev - cur) / prev.max(f64::MIN_POSITIVE) < tol {
            break;
        }
    }
    Ok((w.to_vec(), history))
}

/// Projects every row of `v`.
pub fn nmf_transform_rows(model: &TopicModel, v: &CsrMatrix, max_iter: usize, tol: f64) -> Result<Array2<f64>> {
    let mut out = Array2::<f64>::zeros((v.n_rows(), model.topics()));
    for (i, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
        let w = nmf_transform(model, &v.row_vec(i), max_iter, tol)?;
        row.iter_mut().zip(w).for_each(|(d, x)| *d = x);
    }
    Ok(out)
}

/// `‖V − W H‖_F / ‖V‖_F`.
pub fn relative_error(v: &CsrMatrix, w: &Array2<f64>, h: &Array2<f64>) -> f64 {
    let norm = v.frobenius_sq();
    if norm == 0.0 {
        return 0.0;
    }
    (frobenius_loss(v, w, h) / norm).sqrt()
}
