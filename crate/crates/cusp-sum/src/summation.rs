//! Smooth cutoffs, their Mellin transforms, the gamma factor γ(s) of an
//! even or odd Maass form, Mellin inversion at Re s = 2, and the oscillatory
//! integral 𝔍(P, T).

use num_complex::Complex64;
use rayon::prelude::*;

use crate::arith::Sieve;
use crate::bump::{plateau, plateau_jet, smooth_step_jet, Bump};
use crate::coefficients::{CuspForm, FormKind};
use crate::error::{Error, Result};
use crate::expsum::SummationCache;
use crate::numeric::{fourier_grid, integrate, integrate_real, ExactSum, TWO_PI};
use crate::oscillatory::{ln_gamma, ln_stirling_gamma, osc_integral, stationary_phase, PhaseSpec};

use std::f64::consts::PI;

/// Exponent slack used by the monitors of this module.
pub const EPS: f64 = 0.05;
/// Default exponent of λ_Δ in T₁ = X^{1/3}λ_Δ^{−θ}.
pub const THETA: f64 = 1.0 / 18.0;

const JET: usize = 10;
/// Highest derivative order available from the cutoff.
pub const MAX_ORDER: usize = JET - 1;

/// h supported on [1, 2], identically 1 on [1+η, 2−η].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothCutoff {
    eta: f64,
}

impl SmoothCutoff {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 0.25) {
            return Err(Error::InvalidInput(format!("cutoff width η = {eta} outside (0, 1/4)")));
        }
        Ok(SmoothCutoff { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn value(&self, x: f64) -> f64 {
        let e = self.eta;
        plateau(x, 1.0, 1.0 + e, 2.0 - e, 2.0)
    }

    /// h^{(j)}(x) for j ≤ MAX_ORDER.
    pub fn derivative(&self, x: f64, j: usize) -> f64 {
        assert!(j <= MAX_ORDER, "derivative order {j} above {MAX_ORDER}");
        let e = self.eta;
        plateau_jet::<JET>(x, 1.0, 1.0 + e, 2.0 - e, 2.0).derivative(j)
    }

    /// ∫ |h^{(j)}(x)| x^{σ+j−1} dx over the two collars.
    pub fn weighted_variation(&self, j: usize, sigma: f64) -> Result<f64> {
        let e = self.eta;
        let f = |x: f64| self.derivative(x, j).abs() * x.powf(sigma + j as f64 - 1.0);
        if j == 0 {
            return integrate_real(|x| self.value(x) * x.powf(sigma - 1.0), 1.0, 2.0, 64, 1e-14);
        }
        let tol = 1e-12 * derivative_constant(j) * e.powi(1 - j as i32);
        Ok(integrate_real(f, 1.0, 1.0 + e, 64, tol)? + integrate_real(f, 2.0 - e, 2.0, 64, tol)?)
    }
}

/// K_j = max_t |step^{(j)}(t)| for the unit smooth step, so |h^{(j)}| ≤ K_j η^{−j}.
pub fn derivative_constant(j: usize) -> f64 {
    assert!(j <= MAX_ORDER, "derivative order {j} above {MAX_ORDER}");
    const GRID: usize = 8192;
    (1..GRID)
        .map(|i| smooth_step_jet::<JET>(i as f64 / GRID as f64).derivative(j).abs())
        .fold(0.0, f64::max)
}

/// The two evaluations of h̃(s) = ∫ h(x) x^{s−1} dx.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MellinH {
    pub by_parts: Complex64,
    pub direct: Complex64,
}

fn rising(s: Complex64, j: usize) -> Complex64 {
    (0..j).fold(Complex64::new(1.0, 0.0), |p, k| p * (s + k as f64))
}

/// h̃(s) directly and through j integrations by parts.
pub fn mellin_h(cutoff: &SmoothCutoff, s: Complex64, j: usize) -> Result<MellinH> {
    if j == 0 || j > MAX_ORDER {
        return Err(Error::InvalidInput(format!("order j = {j} outside [1, {MAX_ORDER}]")));
    }
    if s.im == 0.0 && s.re <= 0.0 && s.re.fract() == 0.0 && s.re > -(j as f64) {
        return Err(Error::Pole(format!(
            "s = {} is a pole of the order-{j} representation",
            s.re
        )));
    }
    let e = cutoff.eta;
    let periods = s.im.abs() * std::f64::consts::LN_2 / TWO_PI;
    let panels = 16 + periods.ceil() as usize;
    let scale = 2f64.powf(s.re.abs() + j as f64);
    let direct = integrate(
        |x| cutoff.value(x) * ((s - 1.0) * x.ln()).exp(),
        1.0,
        2.0,
        panels,
        1e-15 * scale,
        1 << 20,
    )?
    .value;
    let collar = |a: f64, b: f64| {
        let tol = 1e-15 * scale * derivative_constant(j) * e.powi(1 - j as i32);
        integrate(
            |x| cutoff.derivative(x, j) * ((s + (j as f64 - 1.0)) * x.ln()).exp(),
            a,
            b,
            panels,
            tol,
            1 << 20,
        )
        .map(|q| q.value)
    };
    let inner = collar(1.0, 1.0 + e)? + collar(2.0 - e, 2.0)?;
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    Ok(MellinH {
        by_parts: sign * inner / rising(s, j),
        direct,
    })
}

/// Γ-factor data: parity η ∈ {0, 1} and spectral parameter μ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFactor {
    parity: u8,
    mu: f64,
}

impl GammaFactor {
    pub fn new(parity: u8, mu: f64) -> Result<Self> {
        if parity > 1 {
            return Err(Error::InvalidInput(format!("parity {parity} must be 0 or 1")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidInput(format!("μ = {mu} must be positive")));
        }
        Ok(GammaFactor { parity, mu })
    }

    pub fn for_form(form: &CuspForm) -> Result<Self> {
        match form.kind() {
            FormKind::Maass { mu, parity } => GammaFactor::new(parity, mu),
            FormKind::Holomorphic { .. } => Err(Error::InvalidInput(
                "the γ-factor here is defined for Maass forms".into(),
            )),
        }
    }

    pub fn parity(&self) -> u8 {
        self.parity
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    fn args(&self, s: Complex64) -> ([Complex64; 2], [Complex64; 2]) {
        let p = self.parity as f64;
        let im = Complex64::new(0.0, self.mu);
        (
            [(s + p + im) * 0.5, (s + p - im) * 0.5],
            [(1.0 - s + p - im) * 0.5, (1.0 - s + p + im) * 0.5],
        )
    }

    /// log γ(s) up to a multiple of 2πi.
    pub fn ln_value(&self, s: Complex64) -> Result<Complex64> {
        let (num, den) = self.args(s);
        let mut acc = (1.0 - 2.0 * s) * PI.ln();
        for z in num {
            acc += ln_gamma(z)?;
        }
        for z in den {
            acc -= ln_gamma(z)?;
        }
        Ok(acc)
    }

    /// (log γ)'(s).
    pub fn ln_derivative(&self, s: Complex64) -> Complex64 {
        let (num, den) = self.args(s);
        let mut acc = Complex64::new(-2.0 * PI.ln(), 0.0);
        for (a, b) in num.into_iter().zip(den) {
            acc += 0.5 * (digamma(a) + digamma(b));
        }
        acc
    }

    /// (log γ)''(s).
    pub fn ln_second_derivative(&self, s: Complex64) -> Complex64 {
        let (num, den) = self.args(s);
        num.into_iter()
            .zip(den)
            .map(|(a, b)| 0.25 * (trigamma(a) - trigamma(b)))
            .sum()
    }
}

fn check_poles(gf: &GammaFactor, s: Complex64) -> Result<()> {
    let (num, den) = gf.args(s);
    for z in num.into_iter().chain(den) {
        if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
            return Err(Error::Pole(format!("Γ argument {z} at s = {s}")));
        }
    }
    Ok(())
}

/// ψ(z) by upward recurrence and the asymptotic series.
pub fn digamma(mut z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    if z.re < 0.5 && z.im.abs() < 12.0 {
        // ψ(1−z) − ψ(z) = π cot(πz)
        let w = PI * z;
        return digamma(1.0 - z) - PI * w.cos() / w.sin();
    }
    while z.norm() < 12.0 {
        acc -= 1.0 / z;
        z += 1.0;
    }
    let r = 1.0 / z;
    let r2 = r * r;
    let series = r2 * (1.0 / 12.0 - r2 * (1.0 / 120.0 - r2 * (1.0 / 252.0 - r2 * (1.0 / 240.0 - r2 / 132.0))));
    acc + z.ln() - 0.5 * r - series
}

/// ψ'(z) by upward recurrence and the asymptotic series.
pub fn trigamma(mut z: Complex64) -> Complex64 {
    if z.re < 0.5 && z.im.abs() < 12.0 {
        // ψ'(1−z) + ψ'(z) = π² / sin²(πz)
        let s = (PI * z).sin();
        return PI * PI / (s * s) - trigamma(1.0 - z);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    while z.norm() < 12.0 {
        acc += 1.0 / (z * z);
        z += 1.0;
    }
    let r = 1.0 / z;
    let r2 = r * r;
    let series = r * r2 * (1.0 / 6.0 - r2 * (1.0 / 30.0 - r2 * (1.0 / 42.0 - r2 / 30.0)));
    acc + r + 0.5 * r2 + series
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaValue {
    pub exact: Complex64,
    /// Product of truncated Stirling expansions; None when some |Im| < 2.
    pub stirling: Option<Complex64>,
    /// (t² + μ²)^{σ−1/2}.
    pub envelope: f64,
}

/// Number of Stirling correction terms.
pub const STIRLING_TERMS: usize = 2;

/// γ(s) = π^{1−2s} ∏_± Γ((s+η±iμ)/2) / Γ((1−s+η∓iμ)/2).
pub fn gamma_factor_eval(gf: &GammaFactor, s: Complex64) -> Result<GammaValue> {
    check_poles(gf, s)?;
    let (num, den) = gf.args(s);
    // The four Γ values can underflow separately for large |t|; combine logs.
    let exact = gf.ln_value(s)?.exp();
    let stirling = if num.iter().chain(&den).all(|z| z.im.abs() >= 2.0) {
        let mut l = (1.0 - 2.0 * s) * PI.ln();
        for z in num {
            l += ln_stirling_gamma(z.re, z.im, STIRLING_TERMS)?.0;
        }
        for z in den {
            l -= ln_stirling_gamma(z.re, z.im, STIRLING_TERMS)?.0;
        }
        Some(l.exp())
    } else {
        None
    };
    let envelope = (s.im * s.im + gf.mu * gf.mu).powf(s.re - 0.5);
    Ok(GammaValue {
        exact,
        stirling,
        envelope,
    })
}

/// ζ(s) for real s > 1 by Euler–Maclaurin.
pub fn zeta_real(s: f64) -> f64 {
    assert!(s > 1.0, "ζ(s) needs s > 1");
    const N: usize = 16;
    let n = N as f64;
    let head: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    let b = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0];
    let mut tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // Σ B_{2k}/(2k)! · s(s+1)…(s+2k−2) · N^{−s−2k+1}
    let mut rise = s;
    let mut fact = 2.0;
    for (k, bk) in b.iter().enumerate() {
        let m = 2 * k + 2;
        tail += bk / fact * rise * n.powf(-s - m as f64 + 1.0);
        rise *= (s + m as f64 - 1.0) * (s + m as f64);
        fact *= ((m + 1) * (m + 2)) as f64;
    }
    head + tail
}

/// Upper bound for Σ_n |λ(n)| n^{−σ}: ζ(σ−ϑ)² with ϑ = 0 or 7/64.
pub fn dirichlet_majorant(form: &CuspForm, sigma: f64) -> f64 {
    let theta = match form.kind() {
        FormKind::Holomorphic { .. } => 0.0,
        FormKind::Maass { .. } => 7.0 / 64.0,
    };
    zeta_real(sigma - theta).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MellinInversion {
    pub lhs: f64,
    pub rhs: f64,
    pub error: f64,
    pub rel_error: f64,
    /// Certified bound for the discarded |t| > t_cut range.
    pub tail_t: f64,
    /// Certified bound for the discarded n > n_cut range.
    pub tail_n: f64,
    pub t_cut: f64,
    pub dt: f64,
}

const CONTOUR: f64 = 2.0;

fn tail_terms(form: &CuspForm, cutoff: &SmoothCutoff, x: f64) -> Result<Vec<(i32, f64)>> {
    let dirichlet = dirichlet_majorant(form, CONTOUR);
    (2..=MAX_ORDER)
        .map(|j| {
            let i_j = cutoff.weighted_variation(j, CONTOUR)?;
            Ok((j as i32 - 1, i_j / (PI * (j - 1) as f64) * x * x * dirichlet))
        })
        .collect()
}

/// Tail bound (1/π) I_j /((j−1) t^{j−1}) · X² · Σ|λ|/n², minimised over j.
pub fn mellin_tail_bound(form: &CuspForm, cutoff: &SmoothCutoff, x: f64, t_cut: f64) -> Result<f64> {
    Ok(tail_terms(form, cutoff, x)?
        .into_iter()
        .map(|(p, k)| k / t_cut.powi(p))
        .fold(f64::INFINITY, f64::min))
}

/// Smallest t_cut whose certified tail is ≤ target.
pub fn certified_t_cut(form: &CuspForm, cutoff: &SmoothCutoff, x: f64, target: f64) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::InvalidInput(format!("tail target {target} must be positive")));
    }
    let t = tail_terms(form, cutoff, x)?
        .into_iter()
        .map(|(p, k)| (k / target).powf(1.0 / p as f64))
        .fold(f64::INFINITY, f64::min);
    if t > 1e7 {
        return Err(Error::Budget(format!(
            "no t_cut below 10⁷ certifies a tail of {target:.1e}"
        )));
    }
    Ok(t.max(1.0) * (1.0 + 1e-12))
}

/// Σ λ(n) h(n/X) against (1/2π) ∫ h̃(2+it) L(2+it) X^{2+it} dt.
///
/// The t-integral is a trapezoid sum whose step is small enough that its
/// aliases in n/X fall outside [1, 2] for every n ≤ n_cut, so the only
/// errors are the two truncations, both certified.
pub fn mellin_inversion_check(
    form: &CuspForm,
    cutoff: &SmoothCutoff,
    x: f64,
    t_cut: f64,
    n_cut: usize,
) -> Result<MellinInversion> {
    if !(x >= 1.0 && t_cut > 0.0) || n_cut == 0 {
        return Err(Error::InvalidInput(format!(
            "X = {x}, t_cut = {t_cut}, n_cut = {n_cut}"
        )));
    }
    let top = (2.0 * x).ceil() as usize;
    form.require(n_cut.max(top))?;
    let mut lhs = ExactSum::new();
    for n in (x.floor() as usize).max(1)..=top {
        lhs.add(form.lambda(n) * cutoff.value(n as f64 / x));
    }
    let lhs = lhs.value();

    let alias = (2.0 * x).max(n_cut as f64 / x).max(4.0) * 1.01;
    let dt = (TWO_PI / alias.ln()).min(0.5);
    let k_max = (t_cut / dt).ceil() as usize;
    let t_cut = k_max as f64 * dt;
    // h̃(2+it) = ∫ h(e^v) e^{2v} e^{itv} dv, the transform at τ = −t.
    let ht = fourier_grid(
        |v| Complex64::new(cutoff.value(v.exp()) * (CONTOUR * v).exp(), 0.0),
        0.0,
        std::f64::consts::LN_2,
        dt,
        k_max,
        0.0,
    )?;
    let terms: Vec<(f64, f64)> = (1..=n_cut)
        .filter(|&n| form.lambda(n) != 0.0)
        .map(|n| {
            let r = x / n as f64;
            (form.lambda(n) * r.powf(CONTOUR), r.ln())
        })
        .collect();
    let partial: Vec<f64> = (0..=k_max)
        .into_par_iter()
        .map(|k| {
            let t = k as f64 * dt;
            let mut l = Complex64::new(0.0, 0.0);
            for &(a, lr) in &terms {
                l += Complex64::from_polar(a, t * lr);
            }
            let h = ht[k_max - k];
            let v = (h * l).re;
            if k == 0 {
                v
            } else {
                2.0 * v
            }
        })
        .collect();
    let mut acc = ExactSum::new();
    acc.extend(partial);
    let rhs = acc.value() * dt / TWO_PI;

    let tail_t = mellin_tail_bound(form, cutoff, x, t_cut)?;
    let sieve = Sieve::new(top.max(n_cut));
    let d = sieve.divisor_counts();
    let tail_n = (n_cut + 1..=top).fold(0.0, |acc, n| acc + form.pointwise_bound(n, d[n]));
    let error = (lhs - rhs).abs();
    Ok(MellinInversion {
        lhs,
        rhs,
        error,
        rel_error: error / lhs.abs(),
        tail_t,
        tail_n,
        t_cut,
        dt,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JptValue {
    /// 𝔍(P, T) by quadrature.
    pub quadrature: Complex64,
    /// 𝔍(P, T) from the leading stationary-phase term; zero without a stationary point.
    pub stationary: Complex64,
    /// The t > 0 half ∫₁² P^{iTt} γ(1+ε−iTt) ω(t) dt/t by quadrature.
    pub half_quadrature: Complex64,
    /// Its stationary-phase approximation.
    pub half_stationary: Option<Complex64>,
    /// T⁻¹(μ² + 4π²P)^{1/2}.
    pub t0: f64,
    /// Stationary point located on the exact phase.
    pub y0: Option<f64>,
}

/// 𝔍(P, T) = ∫ P^{iTt} γ(1+ε−iTt) ω(|t|) dt/t.
///
/// The t < 0 half is the negated conjugate of the t > 0 half, so
/// 𝔍 = 2i·Im J₊ and only J₊ is integrated.
pub fn jpt_eval(p: f64, t: f64, gf: &GammaFactor) -> Result<JptValue> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!("P = {p} must be positive")));
    }
    if !(t > gf.mu.powf(1.0 + EPS)) {
        return Err(Error::Regime(format!(
            "T = {t} not above μ^{{1+ε}} = {}",
            gf.mu.powf(1.0 + EPS)
        )));
    }
    let omega = Bump::new(1.0, 2.0);
    let lp = p.ln();
    let g = *gf;
    let s_of = move |u: f64| Complex64::new(1.0 + EPS, -t * u);
    let ln_g = move |u: f64| g.ln_value(s_of(u)).unwrap_or(Complex64::new(f64::NEG_INFINITY, 0.0));
    let phase = move |u: f64| t * u * lp + ln_g(u).im;
    let d1 = move |u: f64| t * lp - t * g.ln_derivative(s_of(u)).re;
    let d2 = move |u: f64| -t * t * g.ln_second_derivative(s_of(u)).im;
    let amp = move |u: f64| {
        let w = omega.value(u);
        if w == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(ln_g(u).re.exp() * w / u, 0.0)
        }
    };
    let spec = PhaseSpec::new((1.0, 2.0), phase, d1, d2, amp)?;
    let half = osc_integral(&spec)?;
    let sp = match stationary_phase(&spec) {
        Ok(sp) => Some(sp),
        Err(Error::NoStationaryPoint(_)) => None,
        Err(e) => return Err(e),
    };
    let twice_im = |z: Complex64| Complex64::new(0.0, 2.0 * z.im);
    Ok(JptValue {
        quadrature: twice_im(half),
        stationary: sp.map_or(Complex64::new(0.0, 0.0), |s| twice_im(s.approx)),
        half_quadrature: half,
        half_stationary: sp.map(|s| s.approx),
        t0: (gf.mu * gf.mu + 4.0 * PI * PI * p).sqrt() / t,
        y0: sp.map(|s| s.y0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummationRow {
    pub x: f64,
    pub a: f64,
    pub bound: f64,
    pub ratio: f64,
    /// η = X^{−2/3}.
    pub eta: f64,
    /// T₁ = X^{1/3} λ_Δ^{−θ}.
    pub t1: f64,
    /// Upper end (λ_Δ X)^ε η^{−1} of the T-range.
    pub t_top: f64,
    /// Dyadic T-windows [T₁·2^k, T₁·2^{k+1}] needed to reach t_top.
    pub windows: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummationReport {
    pub lambda_delta: f64,
    pub theta: f64,
    pub rows: Vec<SummationRow>,
    pub max_ratio: f64,
}

/// A(X) = Σ_{n≤X} λ(n) against X^{1/3+ε} λ_Δ^{4/9+ε}.
pub fn summation_monitor(form: &CuspForm, xs: &[f64], theta: f64) -> Result<SummationReport> {
    let lam = form.laplace_eigenvalue();
    let cache = SummationCache::new(form);
    let rows: Vec<SummationRow> = xs
        .par_iter()
        .map(|&x| {
            let a = cache.a(x)?;
            let bound = x.powf(1.0 / 3.0 + EPS) * lam.powf(4.0 / 9.0 + EPS);
            let eta = x.powf(-2.0 / 3.0);
            let t1 = x.powf(1.0 / 3.0) * lam.powf(-theta);
            let t_top = (lam * x).powf(EPS) / eta;
            let windows = if t_top > t1 {
                (t_top / t1).log2().ceil() as u32
            } else {
                0
            };
            Ok(SummationRow {
                x,
                a,
                bound,
                ratio: a.abs() / bound,
                eta,
                t1,
                t_top,
                windows,
            })
        })
        .collect::<Result<_>>()?;
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(SummationReport {
        lambda_delta: lam,
        theta,
        rows,
        max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::generate_tau;

    const MU: f64 = 9.5336952613535573;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cutoff_shape_and_derivatives() {
        for eta in [0.2, 0.1, 0.02] {
            let h = SmoothCutoff::new(eta).unwrap();
            assert_eq!(h.value(1.0), 0.0);
            assert_eq!(h.value(2.0), 0.0);
            assert_eq!(h.value(1.0 + eta), 1.0);
            assert_eq!(h.value(1.5), 1.0);
            for j in 1..=4 {
                let k = derivative_constant(j);
                let worst = (0..=4000)
                    .map(|i| h.derivative(1.0 + i as f64 / 4000.0, j).abs())
                    .fold(0.0, f64::max);
                assert!(worst <= 1.001 * k * eta.powi(-(j as i32)), "j = {j}, η = {eta}");
                assert!(worst >= 0.9 * k * eta.powi(-(j as i32)));
            }
            // First derivative against a central difference.
            let x = 1.0 + 0.37 * eta;
            let fd = (h.value(x + 1e-7) - h.value(x - 1e-7)) / 2e-7;
            assert!((fd - h.derivative(x, 1)).abs() < 1e-5 / eta);
        }
        assert!(SmoothCutoff::new(0.25).is_err());
        assert!(SmoothCutoff::new(0.0).is_err());
    }

    #[test]
    fn mellin_transform_representations() {
        let eta = 0.1;
        let h = SmoothCutoff::new(eta).unwrap();
        let one = mellin_h(&h, c(1.0, 0.0), 1).unwrap();
        assert!(one.direct.re >= 1.0 - 2.0 * eta && one.direct.re <= 1.0);
        assert!((one.direct.re - (1.0 - eta)).abs() < 1e-12);
        for s in [c(2.0, 0.0), c(2.0, 7.5), c(0.5, -30.0), c(-0.05, 100.0), c(-2.5, 3.0)] {
            let a = mellin_h(&h, s, 1).unwrap();
            let b = mellin_h(&h, s, 3).unwrap();
            let scale = a.direct.norm().max(1e-3);
            assert!((a.by_parts - b.by_parts).norm() <= 1e-9 * scale, "s = {s}");
            assert!((a.direct - b.by_parts).norm() <= 1e-9 * scale, "s = {s}");
        }
        // |h̃(s)| ≤ I₂/|s(s+1)| with I₂ = ∫|h''| x^{σ+1} ≤ ((1+η)^{σ+1} + 2^{σ+1})·∫|step''|·η⁻¹,
        // so the η(η|t|)⁻² envelope holds with that constant.
        let s = c(-0.05, 100.0);
        let far = mellin_h(&h, s, 2).unwrap();
        let i2 = h.weighted_variation(2, s.re).unwrap();
        assert!(far.by_parts.norm() <= i2 / (s * (s + 1.0)).norm());
        let step_var = integrate_real(|t| smooth_step_jet::<JET>(t).derivative(2).abs(), 0.0, 1.0, 64, 1e-12).unwrap();
        let k2 = ((1.0 + eta).powf(s.re + 1.0) + 2f64.powf(s.re + 1.0)) * step_var;
        assert!(i2 <= k2 / eta * (1.0 + 1e-9));
        assert!(far.by_parts.norm() <= k2 * eta * (eta * 100.0f64).powi(-2), "{far:?}");
        assert!(matches!(mellin_h(&h, c(-1.0, 0.0), 2), Err(Error::Pole(_))));
        assert!(mellin_h(&h, c(-1.0, 0.0), 1).is_ok());
    }

    #[test]
    fn gamma_factor_identities() {
        for parity in [0, 1] {
            let gf = GammaFactor::new(parity, MU).unwrap();
            let s = c(0.5, 5.0);
            let g = gamma_factor_eval(&gf, s).unwrap().exact;
            let gr = gamma_factor_eval(&gf, 1.0 - s).unwrap().exact;
            assert!((g.norm() * gr.norm() - 1.0).abs() < 1e-11);
            // γ(s)γ(1−s) = 1 as complex numbers, not only in modulus.
            assert!((g * gr - 1.0).norm() < 1e-11);
            let z = c(2.0, 13.0);
            let a = gamma_factor_eval(&gf, z).unwrap().exact;
            let b = gamma_factor_eval(&gf, z.conj()).unwrap().exact;
            assert!((a.conj() - b).norm() <= 1e-12 * a.norm());
            let l = gf.ln_value(z).unwrap().exp();
            assert!((l - a).norm() <= 1e-11 * a.norm());
            // Envelope: |γ(2+it)| (t²+μ²)^{−3/2} → π^{−3}/8 as t grows.
            for k in 0..=36 {
                let t = MU * (2.0 + 0.5 * k as f64);
                let v = gamma_factor_eval(&gf, c(2.0, t)).unwrap();
                let r = v.exact.norm() / v.envelope;
                let lead = PI.powi(-3) / 8.0 * ((t * t - MU * MU) / (t * t + MU * MU)).powf(1.5);
                assert!((r / lead - 1.0).abs() < 0.05, "t = {t}: {r} vs {lead}");
                assert!((0.0018..=0.0041).contains(&r), "t = {t}: {r}");
            }
        }
    }

    #[test]
    fn gamma_stirling_and_derivatives() {
        let gf = GammaFactor::new(1, MU).unwrap();
        for t in [4.0 * MU, 5.0 * MU, 10.0 * MU, -6.0 * MU] {
            for sigma in [-0.05, 0.5, 1.05, 2.0] {
                let v = gamma_factor_eval(&gf, c(sigma, t)).unwrap();
                let st = v.stirling.unwrap();
                assert!((st - v.exact).norm() <= 1e-2 * v.exact.norm(), "σ = {sigma}, t = {t}");
            }
        }
        let s = c(1.05, -60.0);
        let h = 1e-5;
        let fd = (gf.ln_value(s + h).unwrap() - gf.ln_value(s - h).unwrap()) / (2.0 * h);
        assert!((fd - gf.ln_derivative(s)).norm() < 1e-7);
        let fd2 = (gf.ln_derivative(s + h) - gf.ln_derivative(s - h)) / (2.0 * h);
        assert!((fd2 - gf.ln_second_derivative(s)).norm() < 1e-7);
        // ψ(1) = −γ_E, ψ'(1) = π²/6.
        assert!((digamma(c(1.0, 0.0)).re + 0.5772156649015329).abs() < 1e-13);
        assert!((trigamma(c(1.0, 0.0)).re - PI * PI / 6.0).abs() < 1e-13);
        let gf0 = GammaFactor::new(0, MU).unwrap();
        assert!(matches!(gamma_factor_eval(&gf0, c(0.0, MU)), Err(Error::Pole(_))));
        assert!(GammaFactor::new(2, MU).is_err());
    }

    #[test]
    fn zeta_values() {
        assert!((zeta_real(2.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((zeta_real(4.0) - PI.powi(4) / 90.0).abs() < 1e-14);
        assert!((zeta_real(1.5) - 2.612375348685488).abs() < 1e-12);
    }

    #[test]
    fn mellin_inversion_tau() {
        let tau = generate_tau(256).unwrap();
        let h = SmoothCutoff::new(0.1).unwrap();
        let x = 20.0;
        let lhs: f64 = (21..40).map(|n| tau.lambda(n) * h.value(n as f64 / x)).sum();
        let t_cut = certified_t_cut(&tau, &h, x, 1e-7 * lhs.abs()).unwrap();
        let m = mellin_inversion_check(&tau, &h, x, t_cut, 40).unwrap();
        assert!(m.tail_t <= 1e-7 * m.lhs.abs() && m.tail_n == 0.0);
        assert!(m.rel_error <= 1e-6, "{m:?}");
        // Independent lhs.
        let direct: f64 = (21..40).map(|n| tau.lambda(n) * h.value(n as f64 / x)).sum();
        assert!((direct - m.lhs).abs() < 1e-13);
        // Halving η moves the lhs by at most the collar mass.
        let h2 = SmoothCutoff::new(0.05).unwrap();
        let lhs2: f64 = (21..40).map(|n| tau.lambda(n) * h2.value(n as f64 / x)).sum();
        let collar: f64 = (21..40)
            .filter(|&n| {
                let u = n as f64 / x;
                u < 1.1 || u > 1.9
            })
            .map(|n| tau.lambda(n).abs())
            .sum();
        assert!((lhs2 - m.lhs).abs() <= collar);
        let short = mellin_inversion_check(&tau, &h, x, t_cut, 30).unwrap();
        assert!(short.tail_n > 0.0);
        assert!((short.lhs - short.rhs).abs() <= short.tail_n + short.tail_t + 1e-9);
    }

    #[test]
    fn jpt_stationary_and_support() {
        let gf = GammaFactor::new(1, MU).unwrap();
        let p: f64 = 1e4;
        let t = TWO_PI * p.sqrt() / 1.5;
        let v = jpt_eval(p, t, &gf).unwrap();
        let hs = v.half_stationary.unwrap();
        assert!((v.half_quadrature - hs).norm() <= 0.1 * hs.norm(), "{v:?}");
        assert!((v.y0.unwrap() - v.t0).abs() < 0.05 * v.t0);
        assert_eq!(v.quadrature.re, 0.0);
        let far = jpt_eval(p, 10.0 * p.sqrt(), &gf).unwrap();
        assert!(far.quadrature.norm() <= 1e-3 * (10.0 * p.sqrt()).sqrt());
        assert!(far.half_stationary.is_none());
        assert!(matches!(jpt_eval(p, 10.0, &gf), Err(Error::Regime(_))));
    }
}
