//! One-class SVM on topic loads.
//!
//! The dual problem
//!
//! ```text
//! min_α  ½ Σᵢ Σⱼ αᵢ αⱼ K(xᵢ, xⱼ)
//! s.t.   0 <= αᵢ <= 1 / (ν l),   Σᵢ αᵢ = 1
//! ```
//!
//! is solved by pairwise (SMO) updates on the maximal KKT-violating pair.
//! The decision value of a point is `Σᵢ αᵢ K(xᵢ, x) − ρ`; raw novelty is its
//! negation, so points outside the learned support have positive novelty.
//!
//! # Persistence format
//!
//! ```text
//! ocsvm v1
//! kernel rbf <gamma>        (or: kernel linear)
//! nu <nu> rho <rho> l <l> dims <d> support <n>
//! <alpha> <x_1> ... <x_d>   (n lines)
//! ```

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::rc::Rc;

use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Rbf { gamma: f64 },
    Linear,
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(Error::InvalidInput(format!("rbf gamma must be positive, got {gamma}")))
            }
            _ => Ok(()),
        }
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Rbf { gamma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
            KernelSpec::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
        }
    }
}

/// `exp(−gamma ‖x − y‖²)`.
pub fn rbf_kernel(x: &[f64], y: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let k = KernelSpec::Rbf { gamma };
    k.validate()?;
    Ok(k.eval(x, y))
}

/// `1 / (d · mean per-dimension variance)`; falls back to `1 / d` for constant data.
pub fn default_gamma(x: &Array2<f64>) -> f64 {
    let d = x.ncols().max(1) as f64;
    if x.nrows() < 2 {
        return 1.0 / d;
    }
    let mean_var = x.var_axis(Axis(0), 0.0).mean().unwrap_or(0.0);
    if mean_var > 0.0 && mean_var.is_finite() {
        1.0 / (d * mean_var)
    } else {
        1.0 / d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OcSvmConfig {
    pub nu: f64,
    pub kernel: KernelSpec,
    pub tol: f64,
    pub max_iter: usize,
    /// The full kernel matrix is cached up to this many training rows.
    pub full_cache_rows: usize,
    /// Rows kept by the on-demand cache above `full_cache_rows`.
    pub row_cache: usize,
}

impl OcSvmConfig {
    pub fn new(nu: f64, kernel: KernelSpec) -> OcSvmConfig {
        OcSvmConfig { nu, kernel, tol: 1e-4, max_iter: 10_000_000, full_cache_rows: 20_000, row_cache: 1024 }
    }
}

/// Dual solution over all training points.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub alpha: Vec<f64>,
    /// `Σⱼ αⱼ K(xⱼ, xᵢ)` for every training point.
    pub gradient: Vec<f64>,
    pub upper: f64,
    pub rho: f64,
    pub kkt_violation: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SolverState {
    /// `½ αᵀ K α`.
    pub fn objective(&self) -> f64 {
        0.5 * self.alpha.iter().zip(&self.gradient).map(|(a, g)| a * g).sum::<f64>()
    }

    pub fn decision_values(&self) -> Vec<f64> {
        self.gradient.iter().map(|g| g - self.rho).collect()
    }

    /// `ξᵢ = max(0, ρ − Σⱼ αⱼ K(xⱼ, xᵢ))`.
    pub fn slacks(&self) -> Vec<f64> {
        self.gradient.iter().map(|g| (self.rho - g).max(0.0)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OcSvmModel {
    pub support_vectors: Array2<f64>,
    pub alphas: Vec<f64>,
    pub rho: f64,
    pub nu: f64,
    pub l: usize,
    pub kernel: KernelSpec,
    pub converged: bool,
    pub kkt_violation: f64,
    pub iterations: usize,
}

enum KernelRows<'a> {
    Full(Vec<Rc<Vec<f64>>>),
    OnDemand { x: &'a Array2<f64>, kernel: KernelSpec, cache: HashMap<usize, (Rc<Vec<f64>>, u64)>, cap: usize, clock: u64 },
}

fn kernel_row(x: &Array2<f64>, kernel: KernelSpec, i: usize) -> Vec<f64> {
    let xi = x.row(i);
    let xi = xi.as_slice().unwrap();
    x.rows().into_iter().map(|xj| kernel.eval(xi, xj.as_slice().unwrap())).collect()
}

impl<'a> KernelRows<'a> {
    fn new(x: &'a Array2<f64>, kernel: KernelSpec, cfg: &OcSvmConfig) -> Self {
        let l = x.nrows();
        if l <= cfg.full_cache_rows {
            KernelRows::Full((0..l).map(|i| Rc::new(kernel_row(x, kernel, i))).collect())
        } else {
            KernelRows::OnDemand { x, kernel, cache: HashMap::new(), cap: cfg.row_cache.max(2), clock: 0 }
        }
    }

    fn row(&mut self, i: usize) -> Rc<Vec<f64>> {
        match self {
            KernelRows::Full(rows) => Rc::clone(&rows[i]),
            KernelRows::OnDemand { x, kernel, cache, cap, clock } => {
                *clock += 1;
                if let Some(entry) = cache.get_mut(&i) {
                    entry.1 = *clock;
                    return Rc::clone(&entry.0);
                }
                if cache.len() >= *cap {
                    let oldest = *cache.iter().min_by_key(|(_, (_, t))| *t).unwrap().0;
                    cache.remove(&oldest);
                }
                let row = Rc::new(kernel_row(x, *kernel, i));
                cache.insert(i, (Rc::clone(&row), *clock));
                row
            }
        }
    }
}

fn check_matrix(x: &Array2<f64>) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("training matrix has a non-finite entry".into()));
    }
    Ok(())
}

/// Runs SMO and returns the full dual state.
pub fn ocsvm_solve(x: &Array2<f64>, cfg: &OcSvmConfig) -> Result<SolverState> {
    let l = x.nrows();
    if l < 2 {
        return Err(Error::InvalidInput(format!("one-class SVM needs at least 2 rows, got {l}")));
    }
    if !(cfg.nu > 0.0 && cfg.nu <= 1.0) {
        return Err(Error::InvalidInput(format!("nu {} outside (0, 1]", cfg.nu)));
    }
    if cfg.nu * (l as f64) < 1.0 - 1e-12 {
        return Err(Error::InfeasibleNu { nu: cfg.nu, l });
    }
    cfg.kernel.validate()?;
    check_matrix(x)?;
    let x = if x.is_standard_layout() { std::borrow::Cow::Borrowed(x) } else { std::borrow::Cow::Owned(x.as_standard_layout().into_owned()) };
    let x = x.as_ref();

    let upper = 1.0 / (cfg.nu * l as f64);
    let mut rows = KernelRows::new(x, cfg.kernel, cfg);
    let diag: Vec<f64> = x.rows().into_iter().map(|r| {
        let s = r.as_slice().unwrap();
        cfg.kernel.eval(s, s)
    }).collect();

    // Feasible start: as many points at the upper bound as fit, remainder on the next one.
    let mut alpha = vec![0.0; l];
    let mut remaining = 1.0;
    for a in alpha.iter_mut() {
        if remaining <= 0.0 {
            break;
        }
        let take = if remaining >= upper { upper } else { remaining };
        *a = take;
        remaining -= take;
        if remaining < 1e-15 {
            remaining = 0.0;
        }
    }
    let mut gradient = vec![0.0; l];
    for (i, &a) in alpha.iter().enumerate() {
        if a > 0.0 {
            let qi = rows.row(i);
            gradient.iter_mut().zip(qi.iter()).for_each(|(g, q)| *g += a * q);
        }
    }

    let mut iterations = 0;
    let mut converged = false;
    let mut violation;
    loop {
        // i maximizes −G over {α < C}; j minimizes −G over {α > 0}.
        let mut i_sel = usize::MAX;
        let mut up = f64::NEG_INFINITY;
        let mut j_sel = usize::MAX;
        let mut low = f64::INFINITY;
        for t in 0..l {
            let ng = -gradient[t];
            if alpha[t] < upper && ng > up {
                up = ng;
                i_sel = t;
            }
            if alpha[t] > 0.0 && ng < low {
                low = ng;
                j_sel = t;
            }
        }
        violation = up - low;
        if violation < cfg.tol {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iter {
            break;
        }
        iterations += 1;
        let (i, j) = (i_sel, j_sel);
        let qi = rows.row(i);
        let qj = rows.row(j);
        let mut curvature = diag[i] + diag[j] - 2.0 * qi[j];
        if curvature <= 0.0 {
            curvature = 1e-12;
        }
        let mut delta = (gradient[j] - gradient[i]) / curvature;
        let room_i = upper - alpha[i];
        let room_j = alpha[j];
        let (mut clip_i, mut clip_j) = (false, false);
        if delta >= room_i {
            delta = room_i;
            clip_i = true;
        }
        if delta >= room_j {
            delta = room_j;
            clip_j = true;
            clip_i = delta == room_i;
        }
        alpha[i] = if clip_i { upper } else { alpha[i] + delta };
        alpha[j] = if clip_j { 0.0 } else { alpha[j] - delta };
        for ((g, a), b) in gradient.iter_mut().zip(qi.iter()).zip(qj.iter()) {
            *g += delta * (a - b);
        }
    }

    let rho = offset(&alpha, &gradient, upper);
    Ok(SolverState { alpha, gradient, upper, rho, kkt_violation: violation, iterations, converged })
}

/// Mean gradient over free coefficients, else the midpoint of the bound-implied interval.
fn offset(alpha: &[f64], gradient: &[f64], upper: f64) -> f64 {
    let mut sum = 0.0;
    let mut free = 0usize;
    let mut lb = f64::NEG_INFINITY;
    let mut ub = f64::INFINITY;
    for (&a, &g) in alpha.iter().zip(gradient) {
        if a > 0.0 && a < upper {
            sum += g;
            free += 1;
        } else if a >= upper {
            lb = lb.max(g);
        } else {
            ub = ub.min(g);
        }
    }
    if free > 0 {
        sum / free as f64
    } else if lb.is_finite() && ub.is_finite() {
        0.5 * (lb + ub)
    } else if lb.is_finite() {
        lb
    } else {
        ub
    }
}

/// Fits a one-class SVM with default cache settings.
pub fn ocsvm_fit(x: &Array2<f64>, nu: f64, kernel: KernelSpec, tol: f64, max_iter: usize) -> Result<OcSvmModel> {
    let cfg = OcSvmConfig { tol, max_iter, ..OcSvmConfig::new(nu, kernel) };
    ocsvm_fit_with(x, &cfg)
}

pub fn ocsvm_fit_with(x: &Array2<f64>, cfg: &OcSvmConfig) -> Result<OcSvmModel> {
    let state = ocsvm_solve(x, cfg)?;
    if !state.converged {
        log::warn!(
            "one-class SVM stopped after {} iterations with KKT violation {:e}",
            state.iterations,
            state.kkt_violation
        );
    }
    Ok(OcSvmModel::from_state(x, cfg, &state))
}

impl OcSvmModel {
    pub fn from_state(x: &Array2<f64>, cfg: &OcSvmConfig, state: &SolverState) -> OcSvmModel {
        let keep: Vec<usize> = (0..x.nrows()).filter(|&i| state.alpha[i] > 0.0).collect();
        OcSvmModel {
            support_vectors: x.select(Axis(0), &keep),
            alphas: keep.iter().map(|&i| state.alpha[i]).collect(),
            rho: state.rho,
            nu: cfg.nu,
            l: x.nrows(),
            kernel: cfg.kernel,
            converged: state.converged,
            kkt_violation: state.kkt_violation,
            iterations: state.iterations,
        }
    }

    pub fn dims(&self) -> usize {
        self.support_vectors.ncols()
    }

    /// `Σᵢ αᵢ K(xᵢ, x)`.
    pub fn kernel_sum(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dims() {
            return Err(Error::DimensionMismatch { expected: self.dims(), got: x.len() });
        }
        Ok(self
            .support_vectors
            .rows()
            .into_iter()
            .zip(&self.alphas)
            .map(|(sv, a)| a * self.kernel.eval(sv.as_slice().unwrap(), x))
            .sum())
    }

    /// `Σᵢ αᵢ K(xᵢ, x) − ρ`; its sign is the inlier/outlier decision.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.kernel_sum(x)? - self.rho)
    }

    /// `ρ − Σᵢ αᵢ K(xᵢ, x)`; larger is more novel.
    pub fn raw_novelty(&self, x: &[f64]) -> Result<f64> {
        Ok(-self.decision_value(x)?)
    }

    pub fn raw_novelty_row(&self, x: ArrayView1<f64>) -> Result<f64> {
        match x.as_slice() {
            Some(s) => self.raw_novelty(s),
            None => self.raw_novelty(&x.to_vec()),
        }
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "ocsvm v1")?;
        match self.kernel {
            KernelSpec::Rbf { gamma } => writeln!(out, "kernel rbf {gamma}")?,
            KernelSpec::Linear => writeln!(out, "kernel linear")?,
        }
        writeln!(out, "nu {} rho {} l {} dims {} support {}", self.nu, self.rho, self.l, self.dims(), self.alphas.len())?;
        for (sv, a) in self.support_vectors.rows().into_iter().zip(&self.alphas) {
            let mut line = a.to_string();
            for v in sv {
                line.push(' ');
                line.push_str(&v.to_string());
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<OcSvmModel> {
        let bad = |m: &str| Error::InvalidInput(format!("ocsvm model: {m}"));
        let mut lines = input.lines();
        if lines.next().transpose()?.as_deref() != Some("ocsvm v1") {
            return Err(bad("missing header"));
        }
        let kline = lines.next().transpose()?.ok_or_else(|| bad("missing kernel"))?;
        let kparts: Vec<&str> = kline.split_whitespace().collect();
        let kernel = match kparts.as_slice() {
            ["kernel", "rbf", g] => KernelSpec::Rbf { gamma: g.parse().map_err(|_| bad("gamma"))? },
            ["kernel", "linear"] => KernelSpec::Linear,
            _ => return Err(bad("kernel line")),
        };
        let hline = lines.next().transpose()?.ok_or_else(|| bad("missing parameters"))?;
        let p: Vec<&str> = hline.split_whitespace().collect();
        if p.len() != 10 || p[0] != "nu" || p[2] != "rho" || p[4] != "l" || p[6] != "dims" || p[8] != "support" {
            return Err(bad("parameter line"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(s));
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad(s));
        let (nu, rho, l, dims, n) = (num(p[1])?, num(p[3])?, int(p[5])?, int(p[7])?, int(p[9])?);
        let mut alphas = Vec::with_capacity(n);
        let mut data = Vec::with_capacity(n * dims);
        for _ in 0..n {
            let line = lines.next().transpose()?.ok_or_else(|| bad("truncated"))?;
            let vals: Vec<f64> = line.split_whitespace().map(num).collect::<Result<_>>()?;
            if vals.len() != dims + 1 {
                return Err(bad("row width"));
            }
            alphas.push(vals[0]);
            data.extend_from_slice(&vals[1..]);
        }
        let support_vectors = Array2::from_shape_vec((n, dims), data).map_err(|e| bad(&e.to_string()))?;
        Ok(OcSvmModel { support_vectors, alphas, rho, nu, l, kernel, converged: true, kkt_violation: 0.0, iterations: 0 })
    }
}
