#![allow(dead_code)]

use grant_novelty::corpus::{Agency, GrantRecord};
use ndarray::Array2;
use serde_json::Value;

pub fn grant(id: &str, agency: Agency, fy: i32, summary: &str) -> GrantRecord {
    GrantRecord {
        grant_id: id.to_string(),
        agency,
        program: "Standard".into(),
        division: "D0".into(),
        fiscal_year: fy,
        start_year: fy,
        end_year: fy + 3,
        award_amount: 0.5,
        pi_ids: vec![format!("pi-{id}")],
        summary: summary.to_string(),
        is_research: None,
        research_prob: None,
    }
}

pub fn rbf_gram(x: &Array2<f64>, gamma: f64) -> Vec<Vec<f64>> {
    let l = x.nrows();
    let mut k = vec![vec![0.0; l]; l];
    for i in 0..l {
        for j in 0..l {
            let d2: f64 = x.row(i).iter().zip(x.row(j).iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            k[i][j] = (-gamma * d2).exp();
        }
    }
    k
}

/// Euclidean projection onto `{α : 0 ≤ α ≤ c, Σα = 1}` by bisection on the shift.
fn project_capped_simplex(v: &[f64], c: f64) -> Vec<f64> {
    let sum_at = |tau: f64| v.iter().map(|x| (x - tau).clamp(0.0, c)).sum::<f64>();
    let mut lo = v.iter().cloned().fold(f64::INFINITY, f64::min) - c - 1.0;
    let mut hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if sum_at(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    v.iter().map(|x| (x - tau).clamp(0.0, c)).collect()
}

pub struct QpSolution {
    pub alpha: Vec<f64>,
    pub objective: f64,
    pub rho: f64,
    /// `Σⱼ αⱼ K(xⱼ, xᵢ) − ρ` per training point.
    pub decision: Vec<f64>,
}

fn matvec(k: &[Vec<f64>], a: &[f64]) -> Vec<f64> {
    k.iter().map(|row| row.iter().zip(a).map(|(x, y)| x * y).sum()).collect()
}

/// Gaussian elimination with partial pivoting; `None` for a singular system.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-14 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Accelerated projected gradient on `min ½ αᵀKα` over the capped simplex
/// with `c = 1/(νl)`, restarted whenever the objective rises. The active set
/// it finds is then polished by solving the KKT system on the free variables.
pub fn ocsvm_qp(k: &[Vec<f64>], nu: f64) -> QpSolution {
    let l = k.len();
    let c = 1.0 / (nu * l as f64);
    let lip = k.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max).max(1e-12);
    let obj = |a: &[f64]| 0.5 * a.iter().zip(matvec(k, a)).map(|(x, g)| x * g).sum::<f64>();
    let mut alpha = project_capped_simplex(&vec![1.0 / l as f64; l], c);
    let mut y = alpha.clone();
    let mut t = 1.0_f64;
    let mut f_prev = obj(&alpha);
    for _ in 0..5_000 {
        let g = matvec(k, &y);
        let step: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - b / lip).collect();
        let next = project_capped_simplex(&step, c);
        let f_next = obj(&next);
        let moved = next.iter().zip(&alpha).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if f_next > f_prev {
            y = alpha.clone();
            t = 1.0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = next.iter().zip(&alpha).map(|(n, a)| n + (t - 1.0) / t_next * (n - a)).collect();
        alpha = next;
        t = t_next;
        f_prev = f_next;
        if moved < 1e-10 {
            break;
        }
    }
    let bound = 1e-9 * c;
    let free: Vec<usize> = (0..l).filter(|&i| alpha[i] > bound && alpha[i] < c - bound).collect();
    if let Some(polished) = polish(k, &alpha, &free, c) {
        if obj(&polished) <= f_prev {
            alpha = polished;
        }
    }
    let g = matvec(k, &alpha);
    let free: Vec<f64> = (0..l).filter(|&i| alpha[i] > bound && alpha[i] < c - bound).map(|i| g[i]).collect();
    let rho = if free.is_empty() {
        // Midpoint of the feasible interval for ρ.
        let lo = (0..l).filter(|&i| alpha[i] >= c - bound).map(|i| g[i]).fold(f64::NEG_INFINITY, f64::max);
        let hi = (0..l).filter(|&i| alpha[i] <= bound).map(|i| g[i]).fold(f64::INFINITY, f64::min);
        0.5 * (lo + hi)
    } else {
        free.iter().sum::<f64>() / free.len() as f64
    };
    QpSolution { objective: obj(&alpha), decision: g.iter().map(|v| v - rho).collect(), alpha, rho }
}

/// Solves `K_FF α_F − ρ 1 = −K_FB α_B`, `Σ α_F = 1 − Σ α_B` with bounded
/// variables fixed at 0 or `c`; `None` if the result leaves the box.
fn polish(k: &[Vec<f64>], alpha: &[f64], free: &[usize], c: f64) -> Option<Vec<f64>> {
    if free.is_empty() {
        return None;
    }
    let bound = 1e-9 * c;
    let fixed: Vec<f64> = alpha.iter().map(|&a| if a >= c - bound { c } else { 0.0 }).collect();
    let m = free.len();
    let mut a = vec![vec![0.0; m + 1]; m + 1];
    let mut b = vec![0.0; m + 1];
    for (r, &i) in free.iter().enumerate() {
        for (s, &j) in free.iter().enumerate() {
            a[r][s] = k[i][j];
        }
        a[r][m] = -1.0;
        b[r] = -(0..alpha.len()).filter(|j| !free.contains(j)).map(|j| k[i][j] * fixed[j]).sum::<f64>();
        a[m][r] = 1.0;
    }
    b[m] = 1.0 - (0..alpha.len()).filter(|j| !free.contains(j)).map(|j| fixed[j]).sum::<f64>();
    let x = solve_dense(a, b)?;
    let mut out: Vec<f64> = (0..alpha.len()).map(|j| if free.contains(&j) { 0.0 } else { fixed[j] }).collect();
    for (r, &i) in free.iter().enumerate() {
        if x[r] < -1e-12 || x[r] > c + 1e-12 {
            return None;
        }
        out[i] = x[r].clamp(0.0, c);
    }
    Some(out)
}

/// Structural equality with floats compared to 1e-12 relative.
pub fn close(a: &serde_json::Value, b: &serde_json::Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0)
        }
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| close(p, q)),
        (Value::Object(x), Value::Object(y)) => x.len() == y.len() && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| close(v, w))),
        _ => a == b,
    }
}
