//! Poisson summation and GL(2) Voronoi summation, evaluated on both sides.
//!
//! The dual transform Ψ±(x) = (1/4π²)∫ (π²x)^{−σ−iτ} ρ±(σ+iτ) φ̃(−σ−iτ) dτ is
//! computed by the trapezoid rule on a uniform τ grid. The integrand is
//! analytic in τ, so the rule is exponentially accurate: its aliasing error is
//! Ψ evaluated at x·e^{±2π/Δτ}, which is O(e^{−2π(σ+1)/Δτ}) on the small-x
//! side and negligible on the large-x side. φ̃ on the whole grid comes from one
//! FFT in the variable v = log u, and Ψ at many points comes from a second
//! FFT followed by local interpolation in log x.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::arith::{gcd, mod_inverse};
use crate::bump::plateau;
use crate::coefficients::{CuspForm, FormKind};
use crate::error::{Error, Result};
use crate::numeric::{e, fourier_grid, integrate, CompensatedSum, PanelRule, TWO_PI};
use crate::oscillatory::{ln_gamma, rho_components, stationary_phase, PhaseSpec, Sign};

/// A test function φ on (0, ∞) for the summation formulas.
pub trait TestFunction: Sync {
    fn eval(&self, u: f64) -> Complex64;
    /// [log a, log b] outside which φ vanishes (or is below 10⁻³⁰).
    fn log_support(&self) -> (f64, f64);
    /// Angular frequency of v ↦ φ(eᵛ) coming from an oscillating factor.
    fn log_bandwidth(&self) -> f64 {
        0.0
    }
    /// The oscillation parameter r of a linear twist e(−ru/X).
    fn twist_r(&self) -> f64 {
        0.0
    }
}

/// V(x/X)·e(−θx) with V smooth, supported in (3/4, 9/4), ≡ 1 on [1, 2].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestBump {
    pub x: f64,
    /// Linear twist rate θ = ζ/(cC).
    pub twist: f64,
}

impl TestBump {
    pub fn new(x: f64) -> Self {
        TestBump { x, twist: 0.0 }
    }

    pub fn with_twist(self, twist: f64) -> Self {
        TestBump { twist, ..self }
    }

    pub fn profile(t: f64) -> f64 {
        plateau(t, 0.75, 1.0, 2.0, 2.25)
    }
}

impl TestFunction for TestBump {
    fn eval(&self, u: f64) -> Complex64 {
        let v = Self::profile(u / self.x);
        if v == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            e(-self.twist * u) * v
        }
    }

    fn log_support(&self) -> (f64, f64) {
        ((0.75 * self.x).ln(), (2.25 * self.x).ln())
    }

    fn log_bandwidth(&self) -> f64 {
        TWO_PI * self.twist.abs() * 2.25 * self.x
    }

    fn twist_r(&self) -> f64 {
        (self.twist * self.x).abs()
    }
}

/// φ(u) = exp(−log²(u/X)/(2w²)), whose Mellin transform is known in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGaussian {
    pub x: f64,
    pub w: f64,
}

impl LogGaussian {
    /// φ̃(s) = X^s·w·√(2π)·e^{w²s²/2}.
    pub fn mellin_exact(&self, s: Complex64) -> Complex64 {
        (s * self.x.ln() + 0.5 * self.w * self.w * s * s).exp() * (self.w * TWO_PI.sqrt())
    }
}

impl TestFunction for LogGaussian {
    fn eval(&self, u: f64) -> Complex64 {
        let l = (u / self.x).ln() / self.w;
        Complex64::new((-0.5 * l * l).exp(), 0.0)
    }

    fn log_support(&self) -> (f64, f64) {
        (self.x.ln() - 12.0 * self.w, self.x.ln() + 12.0 * self.w)
    }
}

/// Mellin transform φ̃(s) = ∫ φ(u) u^{s−1} du by adaptive quadrature.
pub fn mellin_bump(f: &dyn TestFunction, s: Complex64) -> Result<Complex64> {
    let (va, vb) = f.log_support();
    // In v = log u the integrand is φ(eᵛ)e^{sv}; its oscillation rate is |Im s| + bandwidth.
    let rate = s.im.abs() + f.log_bandwidth();
    let panels = ((rate * (vb - va) / TWO_PI).ceil() as usize).clamp(16, 1 << 20);
    let scale = (s.re * va).exp().max((s.re * vb).exp());
    let q = integrate(
        |v| f.eval(v.exp()) * (s * v).exp(),
        va,
        vb,
        panels,
        1e-14 * scale,
        (8 * panels).max(1 << 16),
    )?;
    Ok(q.value)
}

/// Poisson check for a Gaussian f(x) = exp(−π((x−a)/w)²), f̂(ξ) = w e^{−π(wξ)²} e(−aξ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub center: f64,
    pub width: f64,
}

impl Gaussian {
    pub fn value(&self, x: f64) -> f64 {
        let t = (x - self.center) / self.width;
        (-PI * t * t).exp()
    }

    pub fn fourier(&self, xi: f64) -> Complex64 {
        e(-self.center * xi) * (self.width * (-PI * (self.width * xi).powi(2)).exp())
    }
}

/// Σ_{n ≡ β (c)} f(n) against (1/c) Σ_n f̂(n/c) e(nβ/c); both truncated where
/// the Gaussian factor drops below 10⁻³⁰.
pub fn poisson_check(f: &Gaussian, beta: i64, c: u64) -> Result<(Complex64, Complex64)> {
    if c == 0 {
        return Err(Error::InvalidInput("modulus must be ≥ 1".into()));
    }
    let reach = f.width * (30.0 * 10f64.ln() / PI).sqrt();
    let terms_lhs = 2.0 * reach / c as f64;
    let terms_rhs = 2.0 * reach / f.width / f.width * c as f64;
    if terms_lhs > 1e8 || terms_rhs > 1e8 {
        return Err(Error::Tail {
            estimate: terms_lhs.max(terms_rhs),
            target: 1e8,
        });
    }
    let c_i = c as i64;
    let r = beta.rem_euclid(c_i);
    let lo = ((f.center - reach - r as f64) / c as f64).floor() as i64;
    let hi = ((f.center + reach - r as f64) / c as f64).ceil() as i64;
    let mut lhs = CompensatedSum::new();
    for k in lo..=hi {
        lhs.add(f.value((r + k * c_i) as f64).into());
    }
    let nmax = (reach / (f.width * f.width) * c as f64).ceil() as i64;
    let mut rhs = CompensatedSum::new();
    for n in -nmax..=nmax {
        let phase = e(((n * r).rem_euclid(c_i)) as f64 / c as f64);
        rhs.add(f.fourier(n as f64 / c as f64) * phase);
    }
    Ok((lhs.value(), rhs.value() / c as f64))
}

/// Which gamma factor the dual transform uses.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Dual {
    Maass { mu: f64 },
    Holomorphic { weight: u32 },
}

impl Dual {
    fn from_kind(kind: FormKind) -> Self {
        match kind {
            FormKind::Maass { mu, .. } => Dual::Maass { mu },
            FormKind::Holomorphic { weight } => Dual::Holomorphic { weight },
        }
    }

    /// π² for Maass forms, 4π² for the holomorphic kernel.
    fn x_scale(&self) -> f64 {
        match self {
            Dual::Maass { .. } => PI * PI,
            Dual::Holomorphic { .. } => 4.0 * PI * PI,
        }
    }

    /// Distance from σ to the first numerator pole on the left.
    fn pole_gap(&self, sigma: f64) -> f64 {
        match self {
            Dual::Maass { .. } => sigma + 1.0,
            Dual::Holomorphic { weight } => sigma + (*weight as f64 + 1.0) / 2.0,
        }
    }

    fn spectral(&self) -> f64 {
        match self {
            Dual::Maass { mu } => *mu,
            Dual::Holomorphic { weight } => (*weight as f64 - 1.0) / 2.0,
        }
    }

    fn gamma_factors(&self, s: Complex64) -> Result<[Complex64; 2]> {
        match *self {
            Dual::Maass { mu } => {
                let (g0, g1) = rho_components(mu, s)?;
                Ok([g0 + g1, g0 - g1])
            }
            Dual::Holomorphic { weight } => {
                let k = weight as f64;
                let l = ln_gamma((k + 1.0) / 2.0 + s)? - ln_gamma((k - 1.0) / 2.0 - s)?;
                let v = l.exp();
                Ok([v, v])
            }
        }
    }
}

/// Controls for the dual transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiOptions {
    pub sigma: f64,
    /// Relative integrand mass allowed beyond the τ cutoff.
    pub target: f64,
    /// Starting cutoff; `None` uses 10·max(r, μ) + 50.
    pub t_max: Option<f64>,
}

impl Default for PsiOptions {
    fn default() -> Self {
        PsiOptions {
            sigma: 0.0,
            target: 1e-12,
            t_max: None,
        }
    }
}

const INTERP_POINTS: usize = 12;
const T_CEILING: f64 = 131_072.0;
const DUAL_BLOCK: usize = 1024;

/// Precomputed dual transform for one form and one test function.
#[derive(Debug, Clone)]
pub struct PsiKernel {
    dual: Dual,
    sigma: f64,
    dtau: f64,
    n: usize,
    /// γ(σ+iτ_k)·φ̃(−σ−iτ_k) for k = −n..=n, per sign.
    amps: [Vec<Complex64>; 2],
    /// FFT of `amps` on the log-x grid, per sign.
    grid: [Vec<Complex64>; 2],
    t_max: f64,
    t_eff: f64,
    tail: f64,
    log_support: (f64, f64),
}

impl PsiKernel {
    pub fn new(kind: FormKind, f: &dyn TestFunction, opts: PsiOptions) -> Result<Self> {
        let dual = Dual::from_kind(kind);
        let sigma = opts.sigma;
        if !(dual.pole_gap(sigma) > 0.0) || sigma <= -1.0 {
            return Err(Error::InvalidInput(format!("σ = {sigma} must exceed −1")));
        }
        let dtau = (TWO_PI * dual.pole_gap(sigma) / 40.0).min(0.1);
        let (va, vb) = f.log_support();
        let g_l1 = {
            let steps = 4096;
            let h = (vb - va) / steps as f64;
            (0..steps)
                .map(|i| {
                    let v = va + (i as f64 + 0.5) * h;
                    f.eval(v.exp()).norm() * (-sigma * v).exp()
                })
                .sum::<f64>()
                * h
        };
        let mut t = opts.t_max.unwrap_or(10.0 * f.twist_r().max(dual.spectral()) + 50.0);
        loop {
            // Sample out to 2T so that the mass in (T, 2T] measures the tail.
            let n = (2.0 * t / dtau).ceil() as usize;
            let g = |v: f64| f.eval(v.exp()) * (-sigma * v).exp();
            let phi = fourier_grid(g, va, vb, dtau, n, f.log_bandwidth())?;
            let mut amps = [
                vec![Complex64::new(0.0, 0.0); 2 * n + 1],
                vec![Complex64::new(0.0, 0.0); 2 * n + 1],
            ];
            let factors: Vec<Result<[Complex64; 2]>> = (0..=2 * n)
                .into_par_iter()
                .map(|j| {
                    let tau = (j as f64 - n as f64) * dtau;
                    dual.gamma_factors(Complex64::new(sigma, tau))
                })
                .collect();
            // FFT round-off in φ̃ is about 10⁻¹⁵·‖g‖₁; the gamma factor amplifies it,
            // so amplitudes below ten times that floor carry no signal.
            let mut floor = vec![0.0; 2 * n + 1];
            for (j, fac) in factors.into_iter().enumerate() {
                let fac = fac?;
                amps[0][j] = fac[0] * phi[j];
                amps[1][j] = fac[1] * phi[j];
                floor[j] = 1e-14 * g_l1 * fac[0].norm().max(fac[1].norm());
            }
            let signal = |j: usize| {
                let m = amps[0][j].norm().max(amps[1][j].norm());
                if m > floor[j] {
                    m
                } else {
                    0.0
                }
            };
            let (mut inner, mut outer) = (0.0, 0.0);
            for j in 0..=2 * n {
                let tau = (j as f64 - n as f64) * dtau;
                if tau.abs() > t {
                    outer += signal(j);
                } else {
                    inner += signal(j);
                }
            }
            let tail = if inner > 0.0 { outer / inner } else { 0.0 };
            if tail <= opts.target || inner == 0.0 {
                let peak = (0..=2 * n).map(signal).fold(0.0, f64::max);
                let t_eff = (0..=2 * n)
                    .filter(|&j| signal(j) >= opts.target * peak)
                    .map(|j| ((j as f64 - n as f64) * dtau).abs())
                    .fold(0.0, f64::max);
                let drop: Vec<bool> = (0..=2 * n)
                    .map(|j| ((j as f64 - n as f64) * dtau).abs() > t || signal(j) == 0.0)
                    .collect();
                for (j, d) in drop.into_iter().enumerate() {
                    if d {
                        amps[0][j] = Complex64::new(0.0, 0.0);
                        amps[1][j] = Complex64::new(0.0, 0.0);
                    }
                }
                let grid = [log_grid(&amps[0], n), log_grid(&amps[1], n)];
                return Ok(PsiKernel {
                    dual,
                    sigma,
                    dtau,
                    n,
                    amps,
                    grid,
                    t_max: t,
                    t_eff,
                    tail,
                    log_support: (va, vb),
                });
            }
            t *= 2.0;
            if t > T_CEILING {
                return Err(Error::Tail {
                    estimate: tail,
                    target: opts.target,
                });
            }
        }
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Largest |τ| where the integrand is within `target` of its peak.
    pub fn effective_cutoff(&self) -> f64 {
        self.t_eff
    }

    pub fn tail_estimate(&self) -> f64 {
        self.tail
    }

    pub fn step(&self) -> f64 {
        self.dtau
    }

    fn index(sign: Sign) -> usize {
        match sign {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    /// Ψ±(x) by direct trapezoid summation.
    pub fn eval_direct(&self, x: f64, sign: Sign) -> Complex64 {
        let y = (self.dual.x_scale() * x).ln();
        let amps = &self.amps[Self::index(sign)];
        let step = Complex64::from_polar(1.0, -self.dtau * y);
        let mut acc = CompensatedSum::new();
        let mut z = Complex64::new(0.0, 0.0);
        for (j, a) in amps.iter().enumerate() {
            if j % 512 == 0 {
                let tau = (j as f64 - self.n as f64) * self.dtau;
                z = Complex64::from_polar(1.0, -tau * y);
            }
            acc.add(a * z);
            z *= step;
        }
        acc.value() * ((-self.sigma * y).exp() * self.dtau / (4.0 * PI * PI))
    }

    /// Ψ±(x) from the FFT grid with local interpolation in log x.
    pub fn eval(&self, x: f64, sign: Sign) -> Complex64 {
        let y = (self.dual.x_scale() * x).ln();
        let grid = &self.grid[Self::index(sign)];
        let len = grid.len();
        let period = TWO_PI / self.dtau;
        let h = period / len as f64;
        let t = y.rem_euclid(period) / h;
        let v = interpolate_periodic(grid, t);
        v * ((-self.sigma * y).exp() * self.dtau / (4.0 * PI * PI))
    }

    /// Dual length beyond which Ψ(m/c²) has no stationary point inside the
    /// sampled τ range: 2π√(x·u) > T_eff for every u in the support.
    pub fn dual_length(&self, c: u64) -> usize {
        let u_min = self.log_support.0.exp();
        let m = 1.5 * (c as f64).powi(2) * self.t_eff.powi(2) / (4.0 * PI * PI * u_min);
        m.ceil() as usize + 16
    }
}

/// B_j = Σ_k A_k e^{−2πijk/L}: the trapezoid sum at log x = j·(2π/Δτ)/L.
fn log_grid(amps: &[Complex64], n: usize) -> Vec<Complex64> {
    let len = (24 * n).max(4096).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for (j, a) in amps.iter().enumerate() {
        let k = j as i64 - n as i64;
        buf[k.rem_euclid(len as i64) as usize] = *a;
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    buf
}

/// Barycentric Lagrange interpolation on a periodic equispaced grid, at the
/// fractional index t.
fn interpolate_periodic(grid: &[Complex64], t: f64) -> Complex64 {
    let len = grid.len() as i64;
    let base = t.floor() as i64 - (INTERP_POINTS as i64 / 2 - 1);
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    let mut binom = 1.0;
    for i in 0..INTERP_POINTS {
        let node = base + i as i64;
        let d = t - node as f64;
        let val = grid[node.rem_euclid(len) as usize];
        if d == 0.0 {
            return val;
        }
        let w = if i % 2 == 0 { binom } else { -binom } / d;
        num += val * w;
        den += w;
        binom = binom * (INTERP_POINTS - 1 - i) as f64 / (i + 1) as f64;
    }
    num / den
}

/// A single dual-transform query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiQuery {
    pub x: f64,
    pub opts: PsiOptions,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiValue {
    pub value: Complex64,
    pub tail: f64,
    pub t_max: f64,
}

/// Ψ±(x) for one point, built from scratch.
pub fn psi_eval(form: &CuspForm, f: &dyn TestFunction, q: PsiQuery, sign: Sign) -> Result<PsiValue> {
    if !(q.x > 0.0) {
        return Err(Error::InvalidInput(format!("x = {} must be positive", q.x)));
    }
    let k = PsiKernel::new(form.kind(), f, q.opts)?;
    Ok(PsiValue {
        value: k.eval_direct(q.x, sign),
        tail: k.tail,
        t_max: k.t_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoronoiSides {
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// Σ |λ(n)φ(n)| over the lhs support.
    pub scale: f64,
    pub abs_err: f64,
    /// |lhs − rhs| / max(|lhs|, 10⁻³·scale).
    pub rel_err: f64,
    pub dual_terms: usize,
}

fn lhs_sum(form: &CuspForm, a: i64, c: u64, f: &dyn TestFunction) -> Result<(Complex64, f64)> {
    let (va, vb) = f.log_support();
    let lo = va.exp().ceil().max(1.0) as usize;
    let hi = vb.exp().floor() as usize;
    form.require(hi)?;
    let mut acc = CompensatedSum::new();
    let mut scale = 0.0;
    for n in lo..=hi {
        let t = form.lambda(n) * f.eval(n as f64);
        scale += t.norm();
        acc.add(t * e(((a as i128 * n as i128).rem_euclid(c as i128)) as f64 / c as f64));
    }
    Ok((acc.value(), scale))
}

fn check_pair(a: i64, c: u64) -> Result<i64> {
    if c == 0 || gcd(a, c as i64) != 1 {
        return Err(Error::InvalidInput(format!(
            "need c ≥ 1 and gcd(a, c) = 1 (a = {a}, c = {c})"
        )));
    }
    Ok(mod_inverse(a, c as i64).expect("coprime"))
}

fn finish(lhs: Complex64, rhs: Complex64, scale: f64, dual_terms: usize) -> VoronoiSides {
    let abs_err = (lhs - rhs).norm();
    VoronoiSides {
        lhs,
        rhs,
        scale,
        abs_err,
        rel_err: abs_err / lhs.norm().max(1e-3 * scale).max(f64::MIN_POSITIVE),
        dual_terms,
    }
}

/// Both sides of the Voronoi formula for `form` with additive twist a/c.
///
/// Maass forms of parity η: the e(+ām/c)Ψ₊ term carries (−1)^η.
/// Holomorphic weight k: rhs = c·i^k Σ λ(m)/m e(−ām/c) Ψ(m/c²) with the
/// gamma ratio Γ((k+1)/2+s)/Γ((k−1)/2−s) and x-scale 4π².
pub fn voronoi_sides(form: &CuspForm, a: i64, c: u64, f: &dyn TestFunction, opts: PsiOptions) -> Result<VoronoiSides> {
    let abar = check_pair(a, c)?;
    let (lhs, scale) = lhs_sum(form, a, c, f)?;
    if scale == 0.0 {
        return Ok(finish(lhs, Complex64::new(0.0, 0.0), 0.0, 0));
    }
    let kernel = PsiKernel::new(form.kind(), f, opts)?;
    let hard = kernel.dual_length(c);
    let reference = lhs.norm().max(1e-3 * scale);
    let cf = c as f64;
    let kind = form.kind();
    let term = |m: usize| {
        let x = m as f64 / (cf * cf);
        let ch = e(((abar as i128 * m as i128).rem_euclid(c as i128)) as f64 / cf);
        let lam = form.lambda(m) / m as f64;
        match kind {
            FormKind::Maass { parity, .. } => {
                let eps = if parity == 0 { 1.0 } else { -1.0 };
                (ch * kernel.eval(x, Sign::Plus) * eps + ch.conj() * kernel.eval(x, Sign::Minus)) * lam
            }
            FormKind::Holomorphic { .. } => ch.conj() * kernel.eval(x, Sign::Plus) * lam,
        }
    };
    // Blocks of dual terms until two consecutive blocks contribute less than
    // 10⁻⁸ of the reference size, or the stationary range is exhausted.
    let mut acc = CompensatedSum::new();
    let mut m_max = 0;
    let mut quiet = 0;
    while m_max < hard && quiet < 2 {
        let hi = (m_max + DUAL_BLOCK).min(hard);
        if hi > form.capacity() {
            return Err(Error::Capacity {
                what: "dual length",
                value: hi as f64,
                capacity: form.capacity() as f64,
            });
        }
        let block: Vec<Complex64> = (m_max + 1..=hi).into_par_iter().map(term).collect();
        let mass: f64 = block.iter().map(|z| z.norm()).sum();
        for t in block {
            acc.add(t);
        }
        quiet = if mass * cf < 1e-8 * reference && hi >= hard / 16 {
            quiet + 1
        } else {
            0
        };
        m_max = hi;
    }
    let mut rhs = acc.value() * cf;
    if let FormKind::Holomorphic { weight } = kind {
        rhs *= Complex64::new(0.0, 1.0).powu(weight);
    }
    Ok(finish(lhs, rhs, scale, m_max))
}

/// J_n(z) for integer order: periodic trapezoid on Bessel's integral for
/// z < 50, Hankel's asymptotic series beyond.
pub fn bessel_j(n: u32, z: f64) -> f64 {
    if z < 0.0 {
        let v = bessel_j(n, -z);
        return if n % 2 == 0 { v } else { -v };
    }
    if z < 50.0 {
        return bessel_j_integral(n, z);
    }
    let mu = 4.0 * (n as f64).powi(2);
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * z);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = z - (n as f64) * PI / 2.0 - FRAC_PI_4;
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// J_n(z) = (1/π)∫_0^π cos(nθ − z sin θ) dθ. The integrand extends to a smooth
/// 2π-periodic function, so the trapezoid rule converges geometrically.
fn bessel_j_integral(n: u32, z: f64) -> f64 {
    let m = (z + n as f64 + 40.0).ceil() as usize;
    let h = PI / m as f64;
    let mut acc = 0.5 * (1.0 + (n as f64 * PI).cos());
    for j in 1..m {
        let th = j as f64 * h;
        acc += (n as f64 * th - z * th.sin()).cos();
    }
    acc / m as f64
}

/// Holomorphic rhs through the Bessel kernel:
/// (2π i^k / c) Σ_{m ≤ m_max} λ(m) e(−ām/c) ∫ φ(x) J_{k−1}(4π√(mx)/c) dx.
pub fn voronoi_rhs_bessel(form: &CuspForm, a: i64, c: u64, f: &dyn TestFunction, m_max: usize) -> Result<Complex64> {
    let weight = match form.kind() {
        FormKind::Holomorphic { weight } => weight,
        FormKind::Maass { .. } => return Err(Error::InvalidInput("Bessel kernel is for holomorphic forms".into())),
    };
    let abar = check_pair(a, c)?;
    form.require(m_max)?;
    let (va, vb) = f.log_support();
    let (ta, tb) = ((0.5 * va).exp(), (0.5 * vb).exp());
    let cf = c as f64;
    let rule = PanelRule::new(16);
    let terms: Vec<Complex64> = (1..=m_max)
        .into_par_iter()
        .map(|m| {
            // x = t²: the Bessel argument 4π√m·t/c is linear in t.
            let omega = 4.0 * PI * (m as f64).sqrt() / cf;
            let rate = omega + f.log_bandwidth() / ta;
            let panels = (rate * (tb - ta) / TWO_PI).ceil() as usize + 48;
            let integral = rule.integrate(
                |t| f.eval(t * t) * (2.0 * t * bessel_j(weight - 1, omega * t)),
                ta,
                tb,
                panels,
            );
            let ch = e(-(((abar as i128 * m as i128).rem_euclid(c as i128)) as f64) / cf);
            integral * ch * form.lambda(m)
        })
        .collect();
    let mut acc = CompensatedSum::new();
    for t in terms {
        acc.add(t);
    }
    Ok(acc.value() * Complex64::new(0.0, 1.0).powu(weight) * (TWO_PI / cf))
}

/// V†(r, s) = ∫ V(x) e(−rx) x^{s−1} dx by adaptive quadrature.
pub fn vdagger(r: f64, s: Complex64) -> Result<Complex64> {
    let rate = TWO_PI * r.abs() + s.im.abs() / 0.75;
    let panels = ((rate * 1.5 / TWO_PI).ceil() as usize).clamp(16, 1 << 20);
    integrate(
        |x| e(-r * x) * TestBump::profile(x) * ((s - 1.0) * x.ln()).exp(),
        0.75,
        2.25,
        panels,
        1e-13,
        (8 * panels).max(1 << 16),
    )
    .map(|q| q.value)
}

/// Leading stationary-phase form of V†(r, −σ−iτ) for τ < 0, r ≫ 1, with
/// stationary point u₀ = −τ/(2πr) inside (3/4, 9/4).
pub fn vdagger_asymptotic(r: f64, sigma: f64, tau: f64) -> Result<Complex64> {
    let u0 = -tau / (TWO_PI * r);
    if !(r >= 10.0 && tau < 0.0 && u0 > 0.75 && u0 < 2.25) {
        return Err(Error::Regime(format!(
            "asymptotic V† needs r ≥ 10, τ < 0 and u₀ = −τ/(2πr) in (3/4, 9/4); got r = {r}, τ = {tau}"
        )));
    }
    let spec = PhaseSpec::new(
        (0.75, 2.25),
        move |u| -TWO_PI * r * u - tau * u.ln(),
        move |u| -TWO_PI * r - tau / u,
        move |u| tau / (u * u),
        move |u| Complex64::new(TestBump::profile(u) * u.powf(-sigma - 1.0), 0.0),
    )?;
    Ok(stationary_phase(&spec)?.approx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// r near μ, xX ≪ μ^{1+ε}: bound (rXx)^{1/2}.
    OneA,
    /// r near μ, xX ≪ rμ^{1+ε}: bound (xX)^{1/2}.
    OneB,
    /// r away from μ, x ≍ max(r², μ²)/X: bound (xX)^{1/2}.
    Two,
    /// r ≪ X^ε, xX ≪ μ^{2+ε}: bound (xX)^{1/2+ε}.
    Three,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub r: f64,
    pub bound: f64,
    /// Whether x lies in the window where Ψ is allowed to be large.
    pub in_support: bool,
    /// Neighboring regimes when r or xX is within 2× of a boundary.
    pub neighbors: Vec<Regime>,
}

pub const REGIME_EPS: f64 = 0.05;
/// Constant standing in for "≪" in the support windows of regimes 1b and 3.
pub const IMPLIED_CONSTANT: f64 = 32.0;

/// Classifies (x, c, ζ) into the dual-transform regimes with ε = 0.05.
pub fn regime_classify(x: f64, c: f64, zeta: f64, big_x: f64, big_c: f64, mu: f64) -> RegimeReport {
    let eps = REGIME_EPS;
    let r = zeta * big_x / (c * big_c);
    let xx = x * big_x;
    let lo = mu.powf(1.0 - eps);
    let hi = mu.powf(1.0 + eps);
    let small_r = big_x.powf(eps);
    let near = |a: f64, b: f64| a > 0.0 && b > 0.0 && (a / b).max(b / a) <= 2.0;
    let mut neighbors = Vec::new();
    let (regime, bound, in_support) = if r <= small_r {
        if near(r, small_r) {
            neighbors.push(if (lo..=hi).contains(&r) {
                Regime::OneA
            } else {
                Regime::Two
            });
        }
        (
            Regime::Three,
            xx.powf(0.5 + eps),
            xx <= IMPLIED_CONSTANT * mu.powf(2.0 + eps),
        )
    } else if (lo..=hi).contains(&r) {
        if near(r, lo) || near(r, hi) {
            neighbors.push(Regime::Two);
        }
        if xx <= hi {
            if near(xx, hi) {
                neighbors.push(Regime::OneB);
            }
            (Regime::OneA, (r * xx).sqrt(), true)
        } else {
            (Regime::OneB, xx.sqrt(), xx <= IMPLIED_CONSTANT * r * hi)
        }
    } else {
        if near(r, lo) || near(r, hi) {
            neighbors.push(Regime::OneA);
        }
        let centre = r.max(mu).powi(2);
        (Regime::Two, xx.sqrt(), xx >= centre / 4.0 && xx <= 4.0 * centre)
    };
    RegimeReport {
        regime,
        r,
        bound,
        in_support,
        neighbors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_small_moduli() {
        let f = Gaussian {
            center: 0.3,
            width: 2.5,
        };
        for (beta, c) in [(0, 1), (1, 2), (2, 5)] {
            let (l, r) = poisson_check(&f, beta, c).unwrap();
            assert!((l - r).norm() < 1e-10, "β = {beta}, c = {c}");
        }
        let (a, _) = poisson_check(&f, 1, 3).unwrap();
        let (b, _) = poisson_check(&f, 4, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bessel_against_series() {
        // Power series J_n(z) = Σ (−1)^k (z/2)^{2k+n} / (k!(k+n)!) for moderate z.
        for &(n, z) in &[(0u32, 1.0), (11, 7.5), (11, 12.0), (3, 6.0)] {
            let mut term = (z / 2.0f64).powi(n as i32) / (1..=n).map(|j| j as f64).product::<f64>();
            let mut sum = term;
            for k in 1..200 {
                term *= -(z * z / 4.0) / (k as f64 * (k + n) as f64);
                sum += term;
            }
            assert!(
                (bessel_j(n, z) - sum).abs() < 1e-12 * (1.0 + sum.abs().max(1.0)),
                "J_{n}({z})"
            );
        }
        for z in [50.0, 73.3, 140.0] {
            assert!((bessel_j(11, z) - bessel_j_integral(11, z)).abs() < 1e-13, "z = {z}");
        }
        // three-term recurrence J₁₀ + J₁₂ = (22/z) J₁₁
        for z in [30.0, 49.0, 80.0] {
            let lhs = bessel_j(10, z) + bessel_j(12, z);
            assert!((lhs - 22.0 / z * bessel_j(11, z)).abs() < 1e-13, "z = {z}");
        }
    }

    #[test]
    fn mellin_of_log_gaussian() {
        let g = LogGaussian { x: 40.0, w: 0.3 };
        for s in [
            Complex64::new(1.0, 0.0),
            Complex64::new(-0.5, 7.0),
            Complex64::new(0.5, -30.0),
        ] {
            let exact = g.mellin_exact(s);
            let q = mellin_bump(&g, s).unwrap();
            assert!((q - exact).norm() < 1e-10 * exact.norm().max(1e-300) + 1e-14, "s = {s}");
        }
    }

    #[test]
    fn regime_examples() {
        let mu = 9.53369526135355755434;
        let (x_big, c_big, c) = (1e4, 100.0, 1.0);
        let zeta = mu * c * c_big / x_big;
        let rep = regime_classify(mu / 2.0 / x_big, c, zeta, x_big, c_big, mu);
        assert_eq!(rep.regime, Regime::OneA);
        assert!((rep.bound - (rep.r * mu / 2.0).sqrt()).abs() < 1e-9);
        let rep = regime_classify(1.0, c, mu.powi(3) * c * c_big / x_big, x_big, c_big, mu);
        assert_eq!(rep.regime, Regime::Two);
        let rep = regime_classify(1.0, c, 0.5 * c * c_big / x_big, x_big, c_big, mu);
        assert_eq!(rep.regime, Regime::Three);
    }

    fn tau_form() -> CuspForm {
        crate::coefficients::generate_tau(1 << 15).unwrap()
    }

    #[test]
    fn interpolated_kernel_matches_direct_sum() {
        let f = TestBump::new(30.0);
        let k = PsiKernel::new(tau_form().kind(), &f, PsiOptions::default()).unwrap();
        for x in [0.01, 0.3, 2.0, 17.0, 140.0] {
            let a = k.eval(x, Sign::Plus);
            let b = k.eval_direct(x, Sign::Plus);
            assert!((a - b).norm() < 1e-11 * (1.0 + b.norm()), "x = {x}: {a} vs {b}");
        }
    }

    #[test]
    fn holomorphic_mellin_and_bessel_kernels_agree() {
        let tau = tau_form();
        let f = TestBump::new(30.0);
        for (a, c) in [(0, 1), (1, 2)] {
            let v = voronoi_sides(&tau, a, c, &f, PsiOptions::default()).unwrap();
            let b = voronoi_rhs_bessel(&tau, a, c, &f, v.dual_terms).unwrap();
            assert!((v.rhs - b).norm() < 1e-9, "{a}/{c}: {} vs {b}", v.rhs);
            assert!(v.rel_err < 1e-8, "{a}/{c}: {v:?}");
        }
    }

    #[test]
    fn zero_test_function() {
        struct Zero;
        impl TestFunction for Zero {
            fn eval(&self, _: f64) -> Complex64 {
                Complex64::new(0.0, 0.0)
            }
            fn log_support(&self) -> (f64, f64) {
                (3.0, 4.0)
            }
        }
        let v = voronoi_sides(&tau_form(), 1, 3, &Zero, PsiOptions::default()).unwrap();
        assert_eq!((v.lhs, v.rhs), (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn capacity_and_coprimality() {
        let short = tau_form().truncated(500).unwrap();
        let f = TestBump::new(30.0);
        let r = voronoi_sides(&short, 2, 5, &f, PsiOptions::default());
        assert!(matches!(r, Err(Error::Capacity { .. })), "{r:?}");
        let r = voronoi_sides(&short, 2, 4, &f, PsiOptions::default());
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn vdagger_stationary_point() {
        let r = 1e3;
        let tau = -TWO_PI * r * 1.5;
        let sigma = 0.25;
        let exact = vdagger(r, Complex64::new(-sigma, -tau)).unwrap();
        let approx = vdagger_asymptotic(r, sigma, tau).unwrap();
        assert!((exact - approx).norm() <= 1e-2 * exact.norm(), "{exact} vs {approx}");
        assert!(vdagger(10.0, Complex64::new(0.0, 1e4)).unwrap().norm() < 1e-6);
        assert!(matches!(vdagger_asymptotic(r, sigma, 10.0), Err(Error::Regime(_))));
    }
}
