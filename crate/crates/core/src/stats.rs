//! Statistics kernel: OLS with classical inference, t/F tail probabilities,
//! paired and two-sample t-tests, Pearson correlation and ROC AUC.
//!
//! All p-values are two-sided. Tail probabilities go through the regularized
//! incomplete beta function, evaluated by Lentz's continued fraction.

use ndarray::{Array1, Array2};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};

const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + 7.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_inc(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Upper tail `P(T > t)` of Student's t with `df` degrees of freedom.
pub fn student_t_sf(t: f64, df: f64) -> Result<f64> {
    if !(df > 0.0) {
        return Err(Error::InvalidDf(df));
    }
    if t.is_nan() {
        return Err(Error::InvalidInput("t is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 0.0 } else { 1.0 });
    }
    let upper = 0.5 * beta_inc(0.5 * df, 0.5, df / (df + t * t));
    Ok(if t >= 0.0 { upper } else { 1.0 - upper })
}

/// Two-sided p-value for a t statistic.
pub fn two_sided_p(t: f64, df: f64) -> Result<f64> {
    Ok((2.0 * student_t_sf(t.abs(), df)?).min(1.0))
}

/// Upper tail `P(F' > f)` of the F distribution.
pub fn f_sf(f: f64, df1: f64, df2: f64) -> Result<f64> {
    if !(df1 > 0.0) {
        return Err(Error::InvalidDf(df1));
    }
    if !(df2 > 0.0) {
        return Err(Error::InvalidDf(df2));
    }
    if f.is_nan() || f < 0.0 {
        return Err(Error::InvalidInput(format!("F statistic must be >= 0, got {f}")));
    }
    if f.is_infinite() {
        return Ok(0.0);
    }
    Ok(beta_inc(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * f)))
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub fn sample_sd(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

/// Standard error of the mean.
pub fn sem(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    sample_sd(x) / (x.len() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
}

/// Paired t-test on `a − b`. Identical samples give `t = 0, p = 1`.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("paired t-test needs n >= 2, got {n}")));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let m = mean(&d);
    let sd = sample_sd(&d);
    let df = (n - 1) as f64;
    if sd == 0.0 {
        if d.iter().all(|&v| v == 0.0) {
            return Ok(TestResult { statistic: 0.0, df, p_value: 1.0 });
        }
        return Err(Error::DegenerateVariance);
    }
    let t = m / (sd / (n as f64).sqrt());
    Ok(TestResult { statistic: t, df, p_value: two_sided_p(t, df)? })
}

/// Pooled-variance two-sample t-test, `df = n₁ + n₂ − 2`.
pub fn two_sample_ttest(a: &[f64], b: &[f64]) -> Result<TestResult> {
    let (n1, n2) = (a.len(), b.len());
    if n1 < 1 || n2 < 1 || n1 + n2 < 3 {
        return Err(Error::InvalidInput(format!("two-sample t-test needs n1 + n2 >= 3, got {n1} + {n2}")));
    }
    let (m1, m2) = (mean(a), mean(b));
    let ss = |x: &[f64], m: f64| x.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    let df = (n1 + n2 - 2) as f64;
    let pooled = (ss(a, m1) + ss(b, m2)) / df;
    if pooled == 0.0 {
        if m1 == m2 {
            return Ok(TestResult { statistic: 0.0, df, p_value: 1.0 });
        }
        return Err(Error::DegenerateVariance);
    }
    let t = (m1 - m2) / (pooled * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    Ok(TestResult { statistic: t, df, p_value: two_sided_p(t, df)? })
}

/// Pearson correlation; `statistic` holds `r`, `df = n − 2`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!("Pearson correlation needs n >= 3, got {n}")));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    let mut r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    if 1.0 - r.abs() < 4.0 * f64::EPSILON {
        r = r.signum();
    }
    let df = (n - 2) as f64;
    if r.abs() == 1.0 {
        return Ok(TestResult { statistic: r, df, p_value: 0.0 });
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    Ok(TestResult { statistic: r, df, p_value: two_sided_p(t, df)? })
}

/// Mann–Whitney AUC: probability a positive outscores a negative, ties counting ½.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: scores.len(), got: labels.len() });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidInput("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1 ..= j+1 share their average.
        let avg = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            if labels[k] {
                rank_sum_pos += avg;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Significance stars: `***` p < 0.01, `**` p < 0.05, `*` p < 0.1.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionResult {
    pub names: Vec<String>,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub residual_se: f64,
    pub df_resid: usize,
    pub f_statistic: f64,
    pub f_df1: usize,
    pub f_df2: usize,
    pub f_p_value: f64,
    pub n: usize,
    /// `σ̂² (XᵀX)⁻¹`, row-major.
    pub covariance: Vec<Vec<f64>>,
}

impl RegressionResult {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.estimates.iter().zip(x).map(|(b, v)| b * v).sum()
    }

    /// Standard error of `xᵀβ̂`.
    pub fn prediction_se(&self, x: &[f64]) -> f64 {
        let mut var = 0.0;
        for (i, xi) in x.iter().enumerate() {
            for (j, xj) in x.iter().enumerate() {
                var += xi * self.covariance[i][j] * xj;
            }
        }
        var.max(0.0).sqrt()
    }

    /// Regression-table JSON: one entry per coefficient plus the summary rows.
    pub fn to_table_json(&self, dependent: &str) -> serde_json::Value {
        let coefs: Vec<serde_json::Value> = (0..self.names.len())
            .map(|i| {
                json!({
                    "name": self.names[i],
                    "estimate": self.estimates[i],
                    "std_error": self.std_errors[i],
                    "t": self.t_values[i],
                    "p_value": self.p_values[i],
                    "stars": stars(self.p_values[i]),
                })
            })
            .collect();
        json!({
            "Dependent variable": dependent,
            "coefficients": coefs,
            "Observations": self.n,
            "R2": self.r_squared,
            "Adjusted R2": self.adj_r_squared,
            "Residual Standard Error": { "value": self.residual_se, "df": self.df_resid },
            "F Statistic": {
                "value": self.f_statistic,
                "df1": self.f_df1,
                "df2": self.f_df2,
                "p_value": self.f_p_value,
                "stars": stars(self.f_p_value),
            },
            "star legend": "* p < 0.1; ** p < 0.05; *** p < 0.01",
        })
    }
}

/// Householder QR of `x` (n × p, n > p). Returns the compact factorization
/// with the reflectors applied to `y`, or the indices of columns whose
/// diagonal collapses relative to their own norm.
fn householder_qr(x: &Array2<f64>, y: &[f64]) -> Result<(Array2<f64>, Vec<f64>)> {
    let (n, p) = x.dim();
    let mut a = x.to_owned();
    let mut qty = y.to_vec();
    let col_norms: Vec<f64> = (0..p).map(|j| a.column(j).dot(&a.column(j)).sqrt()).collect();
    let mut deficient = Vec::new();
    for j in 0..p {
        let norm: f64 = (j..n).map(|i| a[[i, j]] * a[[i, j]]).sum::<f64>().sqrt();
        if col_norms[j] == 0.0 || norm <= 1e-10 * col_norms[j] {
            deficient.push(j);
            continue;
        }
        let alpha = if a[[j, j]] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (j..n).map(|i| a[[i, j]]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for c in j..p {
            let s: f64 = v.iter().enumerate().map(|(k, vk)| vk * a[[j + k, c]]).sum();
            let f = 2.0 * s / vnorm2;
            for (k, vk) in v.iter().enumerate() {
                a[[j + k, c]] -= f * vk;
            }
        }
        let s: f64 = v.iter().enumerate().map(|(k, vk)| vk * qty[j + k]).sum();
        let f = 2.0 * s / vnorm2;
        for (k, vk) in v.iter().enumerate() {
            qty[j + k] -= f * vk;
        }
    }
    if !deficient.is_empty() {
        return Err(Error::RankDeficient(deficient));
    }
    Ok((a, qty))
}

/// Ordinary least squares. `x` must include the intercept column.
pub fn ols_fit(y: &[f64], x: &Array2<f64>, names: &[String]) -> Result<RegressionResult> {
    let (n, p) = x.dim();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if names.len() != p {
        return Err(Error::DimensionMismatch { expected: p, got: names.len() });
    }
    if n <= p {
        return Err(Error::InvalidInput(format!("OLS needs more rows than columns ({n} <= {p})")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in regression data".into()));
    }
    let (r, qty) = householder_qr(x, y)?;

    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = ((i + 1)..p).map(|k| r[[i, k]] * beta[k]).sum();
        beta[i] = (qty[i] - s) / r[[i, i]];
    }
    // R⁻¹ by back-substitution, column by column.
    let mut rinv = Array2::<f64>::zeros((p, p));
    for c in 0..p {
        for i in (0..=c).rev() {
            let e = if i == c { 1.0 } else { 0.0 };
            let s: f64 = ((i + 1)..=c).map(|k| r[[i, k]] * rinv[[k, c]]).sum();
            rinv[[i, c]] = (e - s) / r[[i, i]];
        }
    }
    let xtx_inv = rinv.dot(&rinv.t());

    let fitted = x.dot(&Array1::from(beta.clone()));
    let ssr: f64 = y.iter().zip(fitted.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    let ybar = mean(y);
    let sst: f64 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum();
    let df_resid = n - p;
    let sigma2 = ssr / df_resid as f64;
    let covariance: Vec<Vec<f64>> = xtx_inv.rows().into_iter().map(|row| row.iter().map(|v| v * sigma2).collect()).collect();
    let std_errors: Vec<f64> = (0..p).map(|i| covariance[i][i].max(0.0).sqrt()).collect();
    let t_values: Vec<f64> = beta.iter().zip(&std_errors).map(|(b, se)| if *se > 0.0 { b / se } else if *b == 0.0 { 0.0 } else { b.signum() * f64::INFINITY }).collect();
    let p_values = t_values.iter().map(|&t| two_sided_p(t, df_resid as f64)).collect::<Result<Vec<_>>>()?;

    let r_squared = if sst > 0.0 { (1.0 - ssr / sst).clamp(0.0, 1.0) } else { 0.0 };
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (n - 1) as f64 / df_resid as f64;
    let f_df1 = p - 1;
    let (f_statistic, f_p_value) = if f_df1 == 0 {
        (f64::NAN, f64::NAN)
    } else if ssr == 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = ((sst - ssr).max(0.0) / f_df1 as f64) / sigma2;
        (f, f_sf(f, f_df1 as f64, df_resid as f64)?)
    };
    Ok(RegressionResult {
        names: names.to_vec(),
        estimates: beta,
        std_errors,
        t_values,
        p_values,
        r_squared,
        adj_r_squared,
        residual_se: sigma2.sqrt(),
        df_resid,
        f_statistic,
        f_df1,
        f_df2: df_resid,
        f_p_value,
        n,
        covariance,
    })
}
