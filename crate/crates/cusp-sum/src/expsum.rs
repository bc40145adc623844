//! Direct evaluation of S(X, α, β) = Σ λ(n) e(αn² + βn) and A(X) = Σ λ(n),
//! dyadic exponent fits, and ceiling monitors for the two main bounds.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bounds::{dirichlet_approx, threshold_split, Branch};
use crate::coefficients::CuspForm;
use crate::error::{Error, Result};
use crate::numeric::{e, frac_product, CompensatedSum, ExactSum};

/// Slack exponent applied to X and λ in the monitors.
pub const MONITOR_EPS: f64 = 0.05;
/// Allowance on top of 1/2 + ε for fitted exponents of the linear sums.
pub const LINEAR_FIT_SLACK: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// 1 ≤ n ≤ X.
    Full,
    /// X < n ≤ 2X.
    Dyadic,
}

impl Window {
    fn range(self, x: f64) -> (u64, u64) {
        match self {
            Window::Full => (1, x.floor() as u64),
            Window::Dyadic => (x.floor() as u64 + 1, (2.0 * x).floor() as u64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpSumResult {
    pub x: f64,
    pub alpha: f64,
    pub beta: f64,
    pub value: Complex64,
    pub abs: f64,
    /// X^{7/8} λ^{1/2}.
    pub bound_78: f64,
    pub ratio: f64,
    pub terms: u64,
}

/// Phase αn² + βn mod 1, each product reduced exactly.
#[inline]
pub fn quadratic_phase(alpha: f64, beta: f64, n: u64) -> f64 {
    frac_product(alpha, n * n) + frac_product(beta, n)
}

fn ulp(x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        f64::MIN_POSITIVE
    } else {
        f64::from_bits(a.to_bits() + 1) - a
    }
}

fn check_phase_budget(alpha: f64, beta: f64, n_max: u64) -> Result<()> {
    let nf = n_max as f64;
    let drift = nf * nf * ulp(alpha) + nf * ulp(beta);
    if drift > 1e-3 || alpha.abs() >= 2f64.powi(52) || beta.abs() >= 2f64.powi(52) {
        return Err(Error::Budget(format!(
            "phase resolution n²·ulp(α) = {drift:.2e} above 10⁻³ at n = {n_max}"
        )));
    }
    Ok(())
}

pub fn quad_exp_sum(form: &CuspForm, x: f64, alpha: f64, beta: f64, window: Window) -> Result<ExpSumResult> {
    if !(x >= 1.0) {
        return Err(Error::InvalidInput(format!("X = {x} must be ≥ 1")));
    }
    let (lo, hi) = window.range(x);
    form.require(hi as usize)?;
    check_phase_budget(alpha, beta, hi)?;
    let mut acc = CompensatedSum::new();
    for n in lo..=hi {
        acc.add(e(quadratic_phase(alpha, beta, n)) * form.lambda(n as usize));
    }
    Ok(result(form, x, alpha, beta, acc.value(), hi + 1 - lo))
}

fn result(form: &CuspForm, x: f64, alpha: f64, beta: f64, value: Complex64, terms: u64) -> ExpSumResult {
    let bound_78 = x.powf(0.875) * form.laplace_eigenvalue().sqrt();
    ExpSumResult {
        x,
        alpha,
        beta,
        value,
        abs: value.norm(),
        bound_78,
        ratio: value.norm() / bound_78,
        terms,
    }
}

/// S(X, α, β) over the full window at every X in `xs` (ascending) in one pass.
/// Each value is bit-identical to a separate [`quad_exp_sum`] call.
pub fn quad_exp_scan(form: &CuspForm, xs: &[f64], alpha: f64, beta: f64) -> Result<Vec<ExpSumResult>> {
    if xs.windows(2).any(|w| w[1] < w[0]) || xs.first().map_or(false, |&x| !(x >= 1.0)) {
        return Err(Error::InvalidInput("X list must be ascending and ≥ 1".into()));
    }
    let top = xs.last().map_or(0, |&x| x.floor() as u64);
    form.require(top as usize)?;
    check_phase_budget(alpha, beta, top)?;
    let mut acc = CompensatedSum::new();
    let mut out = Vec::with_capacity(xs.len());
    let mut n = 1;
    for &x in xs {
        let hi = x.floor() as u64;
        while n <= hi {
            acc.add(e(quadratic_phase(alpha, beta, n)) * form.lambda(n as usize));
            n += 1;
        }
        out.push(result(form, x, alpha, beta, acc.value(), hi));
    }
    Ok(out)
}

/// Exact running sums of λ(n), for repeated A(X) queries.
#[derive(Debug, Clone)]
pub struct SummationCache {
    prefix: Vec<f64>,
}

impl SummationCache {
    pub fn new(form: &CuspForm) -> Self {
        let mut acc = ExactSum::new();
        let mut prefix = vec![0.0; form.capacity() + 1];
        for (n, slot) in prefix.iter_mut().enumerate().skip(1) {
            acc.add(form.lambda(n));
            *slot = acc.value();
        }
        SummationCache { prefix }
    }

    pub fn a(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::InvalidInput(format!("X = {x} must be ≥ 0")));
        }
        let n = x.floor() as usize;
        self.prefix.get(n).copied().ok_or(Error::Capacity {
            what: "coefficient index",
            value: n as f64,
            capacity: (self.prefix.len() - 1) as f64,
        })
    }
}

/// A(X) = Σ_{n≤X} λ(n), summed exactly.
pub fn summation_function(form: &CuspForm, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidInput(format!("X = {x} must be ≥ 0")));
    }
    let n = x.floor() as usize;
    form.require(n)?;
    let mut acc = ExactSum::new();
    acc.extend((1..=n).map(|k| form.lambda(k)));
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    pub used: usize,
    pub dropped: usize,
}

/// Least squares on (log X, log |S|). Points with |S| = 0 are dropped.
pub fn exponent_fit(points: &[(f64, f64)]) -> Result<ExponentFit> {
    let kept: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, s)| *s > 0.0)
        .map(|&(x, s)| (x.ln(), s.ln()))
        .collect();
    let dropped = points.len() - kept.len();
    if kept.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "exponent fit needs ≥ 4 nonzero points, got {} ({dropped} dropped)",
            kept.len()
        )));
    }
    let n = kept.len() as f64;
    let mx = kept.iter().map(|p| p.0).sum::<f64>() / n;
    let my = kept.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = kept.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = kept.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("exponent fit needs distinct X values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = kept.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(ExponentFit {
        slope,
        intercept,
        residual: (rss / n).sqrt(),
        used: kept.len(),
        dropped,
    })
}

/// Running maximum of |S| along ascending X, the envelope the fits use.
fn running_max(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut m = 0.0f64;
    points
        .iter()
        .map(|&(x, s)| {
            m = m.max(s);
            (x, m)
        })
        .collect()
}

/// Dyadic X values 2^lo, …, 2^hi.
pub fn dyadic(lo: u32, hi: u32) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(k as i32)).collect()
}

/// A deterministic (α, β) grid of the requested size cycling through
/// rationals ℓ/q with q ≤ 20, quadratic irrationals and ℓ/q + 10⁻⁶.
pub fn standard_grid(points: usize) -> Vec<(f64, f64)> {
    let rationals: Vec<f64> = (1..=20u64)
        .flat_map(|q| {
            (0..q)
                .filter(move |&l| crate::arith::gcd(l as i64, q as i64) == 1)
                .map(move |l| l as f64 / q as f64)
        })
        .collect();
    let irrationals: Vec<f64> = (2..200u64)
        .filter(|d| {
            let r = (*d as f64).sqrt().round() as u64;
            r * r != *d
        })
        .map(|d| {
            let s = (d as f64).sqrt();
            s - s.floor()
        })
        .collect();
    let betas = [0.0, 0.5, 1.0 / 3.0, (5f64.sqrt() - 1.0) / 2.0, 2f64.sqrt() - 1.0];
    (0..points)
        .map(|i| {
            let k = i / 3;
            let alpha = match i % 3 {
                0 => rationals[k % rationals.len()],
                1 => irrationals[k % irrationals.len()],
                _ => rationals[(7 * k + 3) % rationals.len()] + 1e-6,
            };
            (alpha, betas[(i / 2) % betas.len()])
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticRow {
    pub alpha: f64,
    pub beta: f64,
    pub x: f64,
    pub abs: f64,
    pub ell: i64,
    pub q: u64,
    pub branch: Branch,
    pub small_q_bound: f64,
    pub large_q_bound: f64,
    /// |S| over the bound of the chosen branch.
    pub branch_ratio: f64,
    /// |S| / (X^{7/8+ε} λ^{1/2+ε}).
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridFit {
    pub alpha: f64,
    pub beta: f64,
    pub fit: ExponentFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport<R> {
    pub rows: Vec<R>,
    pub fits: Vec<GridFit>,
    pub max_ratio: f64,
    pub max_slope: f64,
    /// Exponent the fits are compared against.
    pub exponent_ceiling: f64,
    /// Rows with ratio > 1.
    pub over: usize,
    /// Grid points with a ratio above 1 and a fitted exponent above the ceiling.
    pub flagged: usize,
}

fn summarize<R>(
    rows: Vec<R>,
    fits: Vec<GridFit>,
    ratio: impl Fn(&R) -> f64,
    key: impl Fn(&R) -> (f64, f64),
    ceiling: f64,
) -> MonitorReport<R> {
    let max_ratio = rows.iter().map(&ratio).fold(0.0, f64::max);
    let over = rows.iter().filter(|r| ratio(r) > 1.0).count();
    let flagged = fits
        .iter()
        .filter(|f| f.fit.slope > ceiling && rows.iter().any(|r| key(r) == (f.alpha, f.beta) && ratio(r) > 1.0))
        .count();
    MonitorReport {
        max_slope: fits.iter().map(|f| f.fit.slope).fold(f64::NEG_INFINITY, f64::max),
        rows,
        fits,
        max_ratio,
        exponent_ceiling: ceiling,
        over,
        flagged,
    }
}

/// S(X, α, β) at each grid point and X against the bound X^{7/8+ε}λ^{1/2+ε},
/// with the Dirichlet approximant at Q = X^{5/4} and the branch it selects.
pub fn quadratic_monitor(form: &CuspForm, grid: &[(f64, f64)], xs: &[f64]) -> Result<MonitorReport<QuadraticRow>> {
    let lam = form.laplace_eigenvalue();
    let per_point: Vec<(Vec<QuadraticRow>, GridFit)> = grid
        .par_iter()
        .map(|&(alpha, beta)| {
            let sums = quad_exp_scan(form, xs, alpha, beta)?;
            let mut rows = Vec::with_capacity(sums.len());
            for s in &sums {
                let approx = dirichlet_approx(alpha, s.x.powf(1.25))?;
                let split = threshold_split(s.x.max(2.0), lam, approx.q)?;
                rows.push(QuadraticRow {
                    alpha,
                    beta,
                    x: s.x,
                    abs: s.abs,
                    ell: approx.ell,
                    q: approx.q,
                    branch: split.branch,
                    small_q_bound: split.small_q_bound,
                    large_q_bound: split.large_q_bound,
                    branch_ratio: s.abs / split.chosen_bound(),
                    ratio: s.abs / (s.x.powf(0.875 + MONITOR_EPS) * lam.powf(0.5 + MONITOR_EPS)),
                });
            }
            let pts: Vec<(f64, f64)> = sums.iter().map(|s| (s.x, s.abs)).collect();
            let fit = exponent_fit(&running_max(&pts))?;
            Ok((rows, GridFit { alpha, beta, fit }))
        })
        .collect::<Result<_>>()?;
    let (rows, fits): (Vec<Vec<QuadraticRow>>, Vec<GridFit>) = per_point.into_iter().unzip();
    Ok(summarize(
        rows.into_iter().flatten().collect(),
        fits,
        |r| r.ratio,
        |r| (r.alpha, r.beta),
        0.875 + MONITOR_EPS,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearRow {
    pub alpha: f64,
    pub x: f64,
    pub abs: f64,
    /// |Σ λ(n)e(nα)| / (X^{1/2+ε} λ^{1/4+ε}).
    pub ratio: f64,
}

/// Linear sums Σ_{n≤X} λ(n) e(nα) against X^{1/2+ε}λ^{1/4+ε}.
pub fn linear_monitor(form: &CuspForm, alphas: &[f64], xs: &[f64]) -> Result<MonitorReport<LinearRow>> {
    let lam = form.laplace_eigenvalue();
    let per_point: Vec<(Vec<LinearRow>, GridFit)> = alphas
        .par_iter()
        .map(|&alpha| {
            let sums = quad_exp_scan(form, xs, 0.0, alpha)?;
            let rows: Vec<LinearRow> = sums
                .iter()
                .map(|s| LinearRow {
                    alpha,
                    x: s.x,
                    abs: s.abs,
                    ratio: s.abs / (s.x.powf(0.5 + MONITOR_EPS) * lam.powf(0.25 + MONITOR_EPS)),
                })
                .collect();
            let pts: Vec<(f64, f64)> = sums.iter().map(|s| (s.x, s.abs)).collect();
            let fit = exponent_fit(&running_max(&pts))?;
            Ok((
                rows,
                GridFit {
                    alpha: 0.0,
                    beta: alpha,
                    fit,
                },
            ))
        })
        .collect::<Result<_>>()?;
    let (rows, fits): (Vec<Vec<LinearRow>>, Vec<GridFit>) = per_point.into_iter().unzip();
    Ok(summarize(
        rows.into_iter().flatten().collect(),
        fits,
        |r| r.ratio,
        |r| (0.0, r.alpha),
        0.5 + MONITOR_EPS + LINEAR_FIT_SLACK,
    ))
}
