//! Complex gamma (Lanczos with log-space reflection), the Stirling expansion
//! with explicit correction coefficients, the Voronoi gamma ratios ρ±, and
//! oscillatory integrals: an adaptive quadrature oracle, the leading
//! stationary-phase term and the second-derivative test ratio.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::Arc;

use num_complex::Complex64;

use crate::bump::plateau;
use crate::error::{Error, Result};
use crate::numeric::{integrate, TWO_PI};

const I: Complex64 = Complex64::new(0.0, 1.0);
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

const LANCZOS_G: f64 = 7.0;
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

/// B₂, B₄, …, B₂₀.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// log sin(πz), stable for large |Im z| where sin itself overflows.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    if z.im.abs() < 20.0 {
        (z * PI).sin().ln()
    } else if z.im > 0.0 {
        // sin(πz) = (i/2)·e^{−iπz}·(1 − e^{2πiz})
        let small = (I * TWO_PI * z).exp();
        -I * PI * z + Complex64::new(-std::f64::consts::LN_2, PI / 2.0) + (1.0 - small).ln()
    } else {
        ln_sin_pi(z.conj()).conj()
    }
}

/// log Γ(z) up to a multiple of 2πi.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if is_pole(z) {
        return Err(Error::Pole(format!("Γ at {z}")));
    }
    if z.re < 0.5 {
        return Ok(Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma(1.0 - z)?);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(LN_SQRT_2PI + (z + 0.5) * t.ln() - t + x.ln())
}

pub fn gamma_complex(s: Complex64) -> Result<Complex64> {
    Ok(ln_gamma(s)?.exp())
}

fn series_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..n - i {
            c[i + j] += a[i] * b[j];
        }
    }
    c
}

fn series_exp(a: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    let mut f = vec![Complex64::new(0.0, 0.0); n];
    f[0] = a[0].exp();
    for k in 1..n {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 1..=k {
            s += a[j] * f[k - j] * j as f64;
        }
        f[k] = s / k as f64;
    }
    f
}

/// Coefficients c₁..c_K of Γ(σ+iτ) / [leading Stirling factor] = 1 + Σ c_j τ^{−j}.
///
/// With u = 1/τ and s = (i/u)(1 − iσu), the log of the ratio is
/// (s − ½)·log(1 − iσu) − σ + Σ_k B₂ₖ/(2k(2k−1)s^{2k−1}), a power series in u.
pub fn stirling_coefficients(sigma: f64, k2: usize) -> Result<Vec<Complex64>> {
    if k2 > 2 * BERNOULLI.len() - 1 {
        return Err(Error::InvalidInput(format!(
            "K2 = {k2} above {}",
            2 * BERNOULLI.len() - 1
        )));
    }
    let n = k2 + 1;
    let zero = Complex64::new(0.0, 0.0);
    let is = I * sigma;
    let mut log1 = vec![zero; n + 1];
    let mut pw = Complex64::new(1.0, 0.0);
    for (j, slot) in log1.iter_mut().enumerate().skip(1) {
        pw *= is;
        *slot = -pw / j as f64;
    }
    let mut lin = vec![zero; n + 1];
    lin[0] = Complex64::new(1.0, 0.0);
    lin[1] = -is;
    let p = series_mul(&lin, &log1);
    let mut r = vec![zero; n];
    for k in 0..n {
        r[k] = I * p[k + 1] - 0.5 * log1[k];
    }
    r[0] -= sigma;
    // q = 1/s = −iu / (1 − iσu)
    let mut q = vec![zero; n];
    let mut pw = Complex64::new(1.0, 0.0);
    for slot in q.iter_mut().skip(1) {
        *slot = -I * pw;
        pw *= is;
    }
    let q2 = series_mul(&q, &q);
    let mut qp = q.clone();
    for (k, b) in BERNOULLI.iter().enumerate() {
        let odd = 2 * k + 1;
        if odd > k2 {
            break;
        }
        let beta = b / ((2 * k + 2) * (2 * k + 1)) as f64;
        for j in 0..n {
            r[j] += beta * qp[j];
        }
        qp = series_mul(&qp, &q2);
    }
    let c = series_exp(&r);
    Ok(c[1..].to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StirlingValue {
    pub value: Complex64,
    /// Relative truncation estimate |τ|^{−K2−1}.
    pub error: f64,
}

/// log of the truncated Stirling expansion of Γ(σ+iτ).
pub fn ln_stirling_gamma(sigma: f64, tau: f64, k2: usize) -> Result<(Complex64, f64)> {
    if !(tau.abs() >= 2.0) {
        return Err(Error::InvalidInput(format!("Stirling form needs |τ| ≥ 2, got {tau}")));
    }
    let c = stirling_coefficients(sigma, k2)?;
    let u = 1.0 / tau;
    let mut corr = Complex64::new(1.0, 0.0);
    let mut up = 1.0;
    for cj in &c {
        up *= u;
        corr += cj * up;
    }
    let at = tau.abs();
    let ln_itau = Complex64::new(at.ln(), tau.signum() * PI / 2.0);
    let lead = LN_SQRT_2PI + (sigma - 0.5) * ln_itau - PI * at / 2.0 + I * tau * (at.ln() - 1.0);
    Ok((lead + corr.ln(), at.powi(-(k2 as i32) - 1)))
}

pub fn stirling_gamma(sigma: f64, tau: f64, k2: usize) -> Result<StirlingValue> {
    let (l, error) = ln_stirling_gamma(sigma, tau, k2)?;
    Ok(StirlingValue { value: l.exp(), error })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoFactor {
    pub mu: f64,
    pub sign: Sign,
    pub sigma: f64,
    pub tau: f64,
}

impl RhoFactor {
    pub fn new(mu: f64, sign: Sign, sigma: f64, tau: f64) -> Result<Self> {
        if !(sigma > -1.0) {
            return Err(Error::InvalidInput(format!("σ = {sigma} must exceed −1")));
        }
        if !(mu > 0.0) {
            return Err(Error::InvalidInput(format!("μ = {mu} must be positive")));
        }
        Ok(RhoFactor { mu, sign, sigma, tau })
    }

    pub fn s(&self) -> Complex64 {
        Complex64::new(self.sigma, self.tau)
    }
}

/// Γ(a₁)Γ(a₂)/(Γ(b₁)Γ(b₂)) in log space; a pole in the denominator makes
/// the ratio vanish.
fn gamma_ratio(num: [Complex64; 2], den: [Complex64; 2]) -> Result<Complex64> {
    if den.iter().any(|&z| is_pole(z)) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let l = ln_gamma(num[0])? + ln_gamma(num[1])? - ln_gamma(den[0])? - ln_gamma(den[1])?;
    Ok(l.exp())
}

/// The two gamma quotients G₀, G₁ with ρ±(s) = G₀(s) ± G₁(s).
pub fn rho_components(mu: f64, s: Complex64) -> Result<(Complex64, Complex64)> {
    let im = Complex64::new(0.0, mu);
    let g0 = gamma_ratio(
        [(1.0 + s + im) / 2.0, (1.0 + s - im) / 2.0],
        [(-s + im) / 2.0, (-s - im) / 2.0],
    )?;
    let g1 = gamma_ratio(
        [(2.0 + s + im) / 2.0, (2.0 + s - im) / 2.0],
        [(1.0 - s + im) / 2.0, (1.0 - s - im) / 2.0],
    )?;
    Ok((g0, g1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoValue {
    pub value: Complex64,
    /// |ρ| / (|τ+μ||τ−μ|)^{σ+1/2}, when both |τ±μ| ≥ 2.
    pub bound_ratio: Option<f64>,
}

pub fn rho_eval(f: &RhoFactor) -> Result<RhoValue> {
    let (g0, g1) = rho_components(f.mu, f.s())?;
    let value = g0 + f.sign.factor() * g1;
    let (a, b) = ((f.tau + f.mu).abs(), (f.tau - f.mu).abs());
    let bound_ratio = (a >= 2.0 && b >= 2.0).then(|| value.norm() / (a * b).powf(f.sigma + 0.5));
    Ok(RhoValue { value, bound_ratio })
}

/// ρ± with every gamma replaced by its Stirling expansion of order `k2`.
pub fn rho_stirling(f: &RhoFactor, k2: usize) -> Result<Complex64> {
    let lg = |z: Complex64| ln_stirling_gamma(z.re, z.im, k2).map(|v| v.0);
    let s = f.s();
    let im = Complex64::new(0.0, f.mu);
    let part = |shift_num: f64, shift_den: f64| -> Result<Complex64> {
        Ok((lg((shift_num + s + im) / 2.0)? + lg((shift_num + s - im) / 2.0)?
            - lg((shift_den - s + im) / 2.0)?
            - lg((shift_den - s - im) / 2.0)?)
        .exp())
    };
    Ok(part(1.0, 0.0)? + f.sign.factor() * part(2.0, 1.0)?)
}

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ComplexFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Scale parameters of an inert family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertScales {
    pub y: f64,
    pub z: f64,
    pub h: f64,
    pub r: f64,
}

impl InertScales {
    /// H/Y² ≥ R ≥ 1.
    pub fn contract_holds(&self) -> bool {
        self.h / (self.y * self.y) >= self.r && self.r >= 1.0
    }
}

/// ∫ w(y) e^{iϱ(y)} dy on a compact support, with ϱ', ϱ'' supplied.
#[derive(Clone)]
pub struct PhaseSpec {
    pub support: (f64, f64),
    pub phase: RealFn,
    pub phase_d1: RealFn,
    pub phase_d2: RealFn,
    pub amplitude: ComplexFn,
    pub scales: Option<InertScales>,
}

impl std::fmt::Debug for PhaseSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhaseSpec")
            .field("support", &self.support)
            .field("scales", &self.scales)
            .finish_non_exhaustive()
    }
}

impl PhaseSpec {
    pub fn new(
        support: (f64, f64),
        phase: impl Fn(f64) -> f64 + Send + Sync + 'static,
        phase_d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        phase_d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        amplitude: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let (a, b) = support;
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidInput(format!(
                "support [{a}, {b}] must be finite and non-empty"
            )));
        }
        Ok(PhaseSpec {
            support,
            phase: Arc::new(phase),
            phase_d1: Arc::new(phase_d1),
            phase_d2: Arc::new(phase_d2),
            amplitude: Arc::new(amplitude),
            scales: None,
        })
    }

    /// Attaches inert scales; rejects them if H/Y² ≥ R ≥ 1 fails.
    pub fn with_scales(mut self, scales: InertScales) -> Result<Self> {
        if !scales.contract_holds() {
            return Err(Error::InvalidInput(format!("inert contract fails for {scales:?}")));
        }
        self.scales = Some(scales);
        Ok(self)
    }

    fn samples(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let (a, b) = self.support;
        (0..=n).map(move |k| a + (b - a) * k as f64 / n as f64)
    }
}

/// Smooth bump on [Z, 2Z] whose j-th derivative is of size (Y/Z)^j.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertBump {
    pub z: f64,
    pub y: f64,
}

impl InertBump {
    pub fn new(z: f64, y: f64) -> Self {
        assert!(z > 0.0 && y >= 1.0, "InertBump needs Z > 0, Y ≥ 1");
        InertBump { z, y }
    }

    pub fn value(&self, x: f64) -> f64 {
        let (z, w) = (self.z, self.z / (2.0 * self.y));
        plateau(x, z, z + w, 2.0 * z - w, 2.0 * z)
    }
}

/// Total variation of w on the support plus max |w| (sampled).
pub fn variation_plus_max(spec: &PhaseSpec, samples: usize) -> f64 {
    let vals: Vec<Complex64> = spec.samples(samples).map(|y| (spec.amplitude)(y)).collect();
    let tv: f64 = vals.windows(2).map(|p| (p[1] - p[0]).norm()).sum();
    tv + vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Adaptive Gauss–Kronrod value of ∫ w e^{iϱ}, with initial panels of at
/// most one oscillation each and absolute target 10⁻¹⁰·Z·max|w|.
pub fn osc_integral(spec: &PhaseSpec) -> Result<Complex64> {
    let (a, b) = spec.support;
    let (mut wmax, mut dmax) = (0.0f64, 0.0f64);
    for y in spec.samples(512) {
        wmax = wmax.max((spec.amplitude)(y).norm());
        dmax = dmax.max((spec.phase_d1)(y).abs());
    }
    if wmax == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let periods = dmax * (b - a) / TWO_PI;
    let panels = (periods.ceil() as usize).clamp(8, 1 << 20);
    let tol = 1e-10 * (b - a) * wmax;
    let (w, phase) = (&spec.amplitude, &spec.phase);
    integrate(
        |y| w(y) * Complex64::from_polar(1.0, phase(y)),
        a,
        b,
        panels,
        tol,
        (8 * panels).max(1 << 16),
    )
    .map(|q| q.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPhase {
    pub approx: Complex64,
    pub y0: f64,
}

/// Leading stationary-phase term e^{iϱ(y₀)} w(y₀) √(2π/|ϱ''(y₀)|) e^{±iπ/4}.
pub fn stationary_phase(spec: &PhaseSpec) -> Result<StationaryPhase> {
    let d1 = &spec.phase_d1;
    let d2 = &spec.phase_d2;
    let pts: Vec<f64> = spec.samples(512).collect();
    let curv: Vec<f64> = pts.iter().map(|&y| d2(y)).collect();
    if curv.iter().any(|c| !c.is_finite() || *c == 0.0) || curv.iter().any(|c| c.signum() != curv[0].signum()) {
        return Err(Error::DegeneratePhase(
            "ϱ'' vanishes or changes sign on the support".into(),
        ));
    }
    let bracket = pts.windows(2).find(|p| {
        let (u, v) = (d1(p[0]), d1(p[1]));
        u == 0.0 || u.signum() != v.signum()
    });
    let (mut lo, mut hi) = match bracket {
        Some(p) => (p[0], p[1]),
        None => {
            return Err(Error::NoStationaryPoint(format!(
                "ϱ' keeps one sign on [{}, {}]",
                spec.support.0, spec.support.1
            )))
        }
    };
    let rising = d1(hi) > d1(lo);
    let mut y = 0.5 * (lo + hi);
    for _ in 0..200 {
        let g = d1(y);
        if g == 0.0 {
            break;
        }
        if (g > 0.0) == rising {
            hi = y;
        } else {
            lo = y;
        }
        let newton = y - g / d2(y);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let done = (next - y).abs() <= 1e-14 * y.abs().max(1e-300);
        y = next;
        if done || hi - lo <= 1e-15 * y.abs() {
            break;
        }
    }
    let c = d2(y);
    let approx = Complex64::from_polar(1.0, (spec.phase)(y))
        * (spec.amplitude)(y)
        * (TWO_PI / c.abs()).sqrt()
        * Complex64::from_polar(1.0, FRAC_PI_4 * c.signum());
    Ok(StationaryPhase { approx, y0: y })
}

/// |∫ w e^{iϱ}|·√λ₀ / V₀, bounded by the second-derivative test.
pub fn second_derivative_ratio(spec: &PhaseSpec, lambda0: f64, v0: f64) -> Result<f64> {
    if !(lambda0 > 0.0) {
        return Err(Error::InvalidInput(format!("λ₀ = {lambda0} must be positive")));
    }
    if let Some(y) = spec
        .samples(512)
        .find(|&y| (spec.phase_d2)(y) < lambda0 * (1.0 - 1e-12))
    {
        return Err(Error::InvalidInput(format!("ϱ''({y}) below λ₀ = {lambda0}")));
    }
    if v0 == 0.0 {
        return Ok(0.0);
    }
    Ok(osc_integral(spec)?.norm() * lambda0.sqrt() / v0)
}
