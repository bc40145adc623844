//! Auxiliary bounds: squarefree splittings, Dirichlet approximation, the
//! incomplete Kloosterman-quadratic sum and its majorant T, a majorant for
//! min(M, ‖x‖⁻¹) with controlled Fourier coefficients, squarefree kernel sums,
//! the Karatsuba min-sum inequality, and the final q-threshold split.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arith::{divisors, factorize, gcd, Sieve};
use crate::error::{Error, Result};
use crate::kloosterman::Kloosterman;
use crate::numeric::{e, frac_product, integrate_real, CompensatedSum, ExactSum, TWO_PI};

/// Largest modulus accepted by [`squarefree_split`].
pub const SPLIT_LIMIT: u64 = 1_000_000_000_000;

/// c = c₁c₂ with c₁ the product of the primes dividing c exactly once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquarefreeSplit {
    pub c: u64,
    pub c1: u64,
    pub c2: u64,
    /// d(c₁), from the factorization.
    pub d_c1: u64,
}

pub fn squarefree_split(c: u64) -> Result<SquarefreeSplit> {
    if c == 0 {
        return Err(Error::InvalidInput("c must be ≥ 1".into()));
    }
    if c > SPLIT_LIMIT {
        return Err(Error::Budget(format!(
            "c = {c} above the factorization limit {SPLIT_LIMIT}"
        )));
    }
    let mut c1 = 1;
    let mut d = 1;
    for (p, a) in factorize(c) {
        if a == 1 {
            c1 *= p;
            d *= 2;
        }
    }
    Ok(SquarefreeSplit {
        c,
        c1,
        c2: c / c1,
        d_c1: d,
    })
}

/// α = ℓ/q + θ/q² with gcd(ℓ, q) = 1, q ≤ Q and |α − ℓ/q| ≤ 1/(qQ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalApprox {
    pub alpha: f64,
    pub ell: i64,
    pub q: u64,
    pub theta: f64,
    pub quality: f64,
}

impl RationalApprox {
    /// |α − ℓ/q|, computed exactly and rounded once.
    pub fn error(&self) -> f64 {
        (self.theta / (self.q as f64 * self.q as f64)).abs()
    }
}

/// Exact binary expansion of a finite double as num/den.
fn exact_ratio(x: f64) -> (BigInt, BigInt) {
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let (mant, e2) = if exp == 0 {
        (bits & ((1 << 52) - 1), -1074)
    } else {
        ((bits & ((1 << 52) - 1)) | (1 << 52), exp - 1075)
    };
    let num = BigInt::from(mant) * sign;
    if e2 >= 0 {
        (num << e2 as usize, BigInt::one())
    } else {
        (num, BigInt::one() << (-e2) as usize)
    }
}

fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    let shift = (den.bits() as i64 - 60).max(0).max(num.bits() as i64 - 60);
    let scale = |v: &BigInt| (v >> shift as usize).to_f64().unwrap_or(0.0);
    if shift == 0 {
        return num.to_f64().unwrap() / den.to_f64().unwrap();
    }
    scale(num) / scale(den)
}

/// Last continued-fraction convergent of α with denominator ≤ Q, in exact
/// rational arithmetic.
pub fn dirichlet_approx(alpha: f64, quality: f64) -> Result<RationalApprox> {
    if !(quality >= 1.0) || !alpha.is_finite() || alpha.abs() >= 2f64.powi(52) {
        return Err(Error::InvalidInput(format!(
            "need Q ≥ 1 and finite |α| < 2⁵² (α = {alpha}, Q = {quality})"
        )));
    }
    let (num, den) = exact_ratio(alpha);
    let qmax = BigInt::from(quality.floor() as u64);
    let (mut a, mut b) = (num.clone(), den.clone());
    // convergents p/q with (p_{-1}, q_{-1}) = (1, 0), (p_{-2}, q_{-2}) = (0, 1)
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let mut best = None;
    while !b.is_zero() {
        let (t, r) = a.div_mod_floor(&b);
        let p2 = &t * &p1 + &p0;
        let q2 = &t * &q1 + &q0;
        if q2 > qmax {
            break;
        }
        best = Some((p2.clone(), q2.clone()));
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        a = std::mem::replace(&mut b, r);
    }
    let (ell, q) = best.expect("the first convergent has q = 1");
    // θ = q²(α − ℓ/q) = q(q·num − ℓ·den)/den
    let resid = &q * &num - &ell * &den;
    let theta = ratio_to_f64(&(&resid * &q), &den);
    Ok(RationalApprox {
        alpha,
        ell: ell.to_i64().expect("|ℓ| ≤ Q|α| + 1"),
        q: q.to_u64().expect("q ≤ Q"),
        theta,
        quality,
    })
}

/// ‖frac(2αh) + u/c₃‖ with the first term exact.
fn pitt_distance(alpha: f64, h: u64, u: u64, c3: u64) -> f64 {
    let t = frac_product(alpha, 2 * h) + u as f64 / c3 as f64;
    let t = t - t.floor();
    t.min(1.0 - t)
}

/// min(cap, (2‖x‖)⁻¹) with ‖x‖ = 0 read as +∞ before the cap.
fn capped_inverse(cap: f64, twice_dist: f64) -> f64 {
    if twice_dist == 0.0 {
        cap
    } else {
        cap.min(1.0 / twice_dist)
    }
}

/// The majorant T of the Kloosterman-quadratic sum, by direct enumeration.
/// Inner sums are exact, so any loop order gives the same bits.
pub fn pitt_t(m: i64, c: u64, alpha: f64, x: f64) -> Result<f64> {
    if c == 0 || !(x >= 2.0) {
        return Err(Error::InvalidInput(format!("need c ≥ 1 and X ≥ 2 (c = {c}, X = {x})")));
    }
    if c as f64 * x > 1e9 {
        return Err(Error::Budget(format!("c·X = {:.3e} above 10⁹", c as f64 * x)));
    }
    let split = squarefree_split(c)?;
    let h_max = x.ceil() as u64 - 1;
    let mut outer = ExactSum::new();
    for c3 in divisors(c) {
        let c4 = c / c3;
        let mut inner = ExactSum::new();
        for u in (0..c3).filter(|&u| gcd(u as i64, c3 as i64) == 1) {
            for h in 1..=h_max {
                inner.add(capped_inverse(x, 2.0 * pitt_distance(alpha, h, u, c3)));
            }
        }
        outer.add((c4 as f64).sqrt() * inner.value());
    }
    let g = gcd(m, c as i64) as f64;
    let prefactor = g.sqrt() * (split.d_c1 as f64).powi(2) * (split.c1 as f64).sqrt() * split.c2 as f64;
    Ok(prefactor * outer.value())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSumCheck {
    /// |Σ_{X<n≤2X} S(m,n;c) e(αn² + βn)|.
    pub lhs: f64,
    /// (Xc)^{0.55} + T^{1/2}.
    pub rhs: f64,
    pub ratio: f64,
    pub pitt_t: f64,
    /// T₀ = X (m,c)^{1/2} c^{2.05} c₁^{−1/2}, reported alongside.
    pub t0: f64,
}

pub fn kloosterman_quad_sum_check(m: i64, c: u64, alpha: f64, beta: f64, x: f64) -> Result<QuadSumCheck> {
    let t = pitt_t(m, c, alpha, x)?;
    let k = Kloosterman::new(c)?;
    let residues: Vec<f64> = (0..c as i64).map(|n| k.sum(m, n)).collect::<Result<_>>()?;
    let lo = x.floor() as u64 + 1;
    let hi = (2.0 * x).floor() as u64;
    let mut acc = CompensatedSum::new();
    for n in lo..=hi {
        let phase = frac_product(alpha, n * n) + frac_product(beta, n);
        acc.add(e(phase) * residues[(n % c) as usize]);
    }
    let lhs = acc.value().norm();
    let rhs = (x * c as f64).powf(0.55) + t.sqrt();
    let split = squarefree_split(c)?;
    let g = gcd(m, c as i64) as f64;
    Ok(QuadSumCheck {
        lhs,
        rhs,
        ratio: lhs / rhs,
        pitt_t: t,
        t0: x * g.sqrt() * (c as f64).powf(2.05) / (split.c1 as f64).sqrt(),
    })
}

/// Exponent ε in the coefficient cutoff N = M^{1+ε}.
pub const MAJORANT_EPS: f64 = 0.1;
/// Ceiling for b(n) / log M.
pub const MAJORANT_LOG_CONSTANT: f64 = 8.0;
/// Verification grid size.
pub const MAJORANT_GRID: usize = 10_000;

/// G(M, x) = Σ b(n) e(nx) with G ≥ min(M, ‖x‖⁻¹).
///
/// The target m(x) = min(M, ‖x‖⁻¹) is first widened to m̄(x) = sup_{|y|≤δ} m(x+y)
/// and then smoothed by a periodized Gaussian of width s with δ = 5s. For
/// |y| ≤ δ one has m̄(x−y) ≥ m(x), so (m̄ ∗ K)(x) ≥ (1−η)m(x) with
/// η = P(|Y| > δ), and dividing by 1 − η gives a majorant. The Gaussian makes
/// b(n) = m̂̄(n) e^{−2π²s²n²}/(1−η) decay fast enough for the tail bound.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorantG {
    m: f64,
    n_cut: usize,
    coeffs: Vec<f64>,
    width: f64,
    tail: f64,
    margin: f64,
}

impl MajorantG {
    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    /// b(n); real and even.
    pub fn coefficient(&self, n: i64) -> f64 {
        self.coeffs.get(n.unsigned_abs() as usize).copied().unwrap_or(0.0)
    }

    pub fn smoothing_width(&self) -> f64 {
        self.width
    }

    /// Certified bound for Σ_{|n|>N} |b(n)|.
    pub fn tail_bound(&self) -> f64 {
        self.tail
    }

    /// min over the verification grid of G(x) − tail − min(M, ‖x‖⁻¹).
    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// The truncated series Σ_{|n|≤N} b(n) e(nx).
    pub fn value(&self, x: f64) -> f64 {
        let mut acc = ExactSum::new();
        acc.add(self.coeffs[0]);
        for (n, b) in self.coeffs.iter().enumerate().skip(1) {
            acc.add(2.0 * b * (TWO_PI * frac_product(x, n as u64)).cos());
        }
        acc.value()
    }
}

pub fn majorant_target(m: f64, x: f64) -> f64 {
    let d = (x - x.round()).abs();
    if d == 0.0 {
        m
    } else {
        m.min(1.0 / d)
    }
}

/// Fourier coefficients of the widened target m̄ on [−1/2, 1/2].
fn widened_coefficient(m: f64, delta: f64, n: usize) -> Result<f64> {
    let a = delta + 1.0 / m;
    if a >= 0.5 {
        return Ok(if n == 0 { m } else { 0.0 });
    }
    if n == 0 {
        return Ok(2.0 * (m * a + ((0.5 - delta) * m).ln()));
    }
    let w = TWO_PI * n as f64;
    let plateau = m * (w * a).sin() / w;
    let tail = integrate_real(|x| (w * x).cos() / (x - delta), a, 0.5, n + 8, 1e-14)?;
    Ok(2.0 * (plateau + tail))
}

/// Σ_{n>N} e^{−2π²s²n²}.
fn gaussian_tail(s: f64, n_cut: usize) -> f64 {
    let k = 2.0 * std::f64::consts::PI.powi(2) * s * s;
    let mut acc = 0.0;
    let mut n = n_cut as f64 + 1.0;
    loop {
        let t = (-k * n * n).exp();
        acc += t;
        if t < 1e-30 * acc.max(1e-300) || t == 0.0 {
            break;
        }
        n += 1.0;
    }
    acc
}

/// erfc(5/√2) rounded up: the mass of the smoothing kernel outside |y| ≤ 5s.
/// Periodizing only moves mass, so the wrapped kernel has no more outside δ.
const ETA: f64 = 5.734e-7;

pub fn majorant_build(m: f64) -> Result<MajorantG> {
    if !(m >= 2.0) || !m.is_finite() {
        return Err(Error::InvalidInput(format!("M = {m} must be ≥ 2")));
    }
    let n_cut = m.powf(1.0 + MAJORANT_EPS).ceil() as usize;
    let target_tail = m.powi(-5);
    // Smallest width (in 2% steps) whose certified tail is below a tenth of M⁻⁵.
    let mut s = 1.0 / n_cut as f64;
    let (delta, l1) = loop {
        let delta = (5.0 * s).min(0.5);
        let a = (delta + 1.0 / m).min(0.5);
        let l1 = if a >= 0.5 {
            m
        } else {
            2.0 * (m * a + ((0.5 - delta) * m).ln())
        };
        let tail = 2.0 * l1 / (1.0 - ETA) * gaussian_tail(s, n_cut);
        if tail <= 0.1 * target_tail {
            break (delta, l1);
        }
        s *= 1.02;
        if delta >= 0.5 {
            return Err(Error::Invariant(format!("no admissible smoothing width for M = {m}")));
        }
    };
    let gauss = 2.0 * std::f64::consts::PI.powi(2) * s * s;
    let coeffs: Vec<f64> = (0..=n_cut)
        .into_par_iter()
        .map(|n| Ok(widened_coefficient(m, delta, n)? * (-gauss * (n * n) as f64).exp() / (1.0 - ETA)))
        .collect::<Result<_>>()?;
    let tail = 2.0 * l1 / (1.0 - ETA) * gaussian_tail(s, n_cut);
    let mut g = MajorantG {
        m,
        n_cut,
        coeffs,
        width: s,
        tail,
        margin: 0.0,
    };
    let bmax = g.coeffs.iter().fold(0.0f64, |acc, b| acc.max(b.abs()));
    if bmax > MAJORANT_LOG_CONSTANT * m.ln() {
        return Err(Error::Invariant(format!("max |b(n)| = {bmax} above 8 log M")));
    }
    if tail > target_tail {
        return Err(Error::Invariant(format!("coefficient tail {tail:e} above M⁻⁵")));
    }
    let margin = (0..MAJORANT_GRID)
        .into_par_iter()
        .map(|j| {
            let x = j as f64 / MAJORANT_GRID as f64;
            g.value(x) - g.tail - majorant_target(m, x)
        })
        .reduce(|| f64::INFINITY, f64::min);
    if margin < 0.0 {
        return Err(Error::Invariant(format!("majorant fails on the grid by {}", -margin)));
    }
    g.margin = margin;
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelExponent {
    MinusQuarter,
    MinusHalf,
}

impl KernelExponent {
    pub fn value(self) -> f64 {
        match self {
            KernelExponent::MinusQuarter => -0.25,
            KernelExponent::MinusHalf => -0.5,
        }
    }

    /// X^{3/4} or X^{1/2}·max(log X, 1).
    pub fn envelope(self, x: f64) -> f64 {
        match self {
            KernelExponent::MinusQuarter => x.powf(0.75),
            KernelExponent::MinusHalf => x.sqrt() * x.ln().max(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSum {
    pub x: u64,
    pub sum: f64,
    pub envelope: f64,
    pub ratio: f64,
}

pub const KERNEL_SUM_LIMIT: u64 = 10_000_000;

/// Squarefree parts c₁(n) for n ≤ limit, index 0 unused.
pub fn squarefree_parts(limit: usize) -> Vec<u64> {
    let sieve = Sieve::new(limit.max(2));
    let mut c1 = vec![1u64; limit + 1];
    for n in 2..=limit {
        let (p, a, rest) = sieve.split_prime_power(n);
        c1[n] = c1[rest] * if a == 1 { p as u64 } else { 1 };
    }
    c1
}

/// Σ_{n≤X} c₁(n)^{exponent} and its ratio to the envelope.
pub fn squarefree_kernel_sum(x: u64, exponent: KernelExponent) -> Result<KernelSum> {
    Ok(squarefree_kernel_scan(&[x], exponent)?[0])
}

/// The same sum at several X from one sieve.
pub fn squarefree_kernel_scan(xs: &[u64], exponent: KernelExponent) -> Result<Vec<KernelSum>> {
    let top = xs.iter().copied().max().unwrap_or(0);
    if top > KERNEL_SUM_LIMIT || xs.contains(&0) {
        return Err(Error::Budget(format!("X must lie in [1, {KERNEL_SUM_LIMIT}]")));
    }
    let parts = squarefree_parts(top as usize);
    let mut prefix = vec![0.0; parts.len()];
    let mut acc = ExactSum::new();
    for n in 1..parts.len() {
        acc.add((parts[n] as f64).powf(exponent.value()));
        prefix[n] = acc.value();
    }
    Ok(xs
        .iter()
        .map(|&x| {
            let envelope = exponent.envelope(x as f64);
            KernelSum {
                x,
                sum: prefix[x as usize],
                envelope,
                ratio: prefix[x as usize] / envelope,
            }
        })
        .collect())
}

/// Σ_{x=1}^{P} min(U, ‖αx+β‖⁻¹) against 6(P/q+1)(U + q log q).
pub fn karatsuba_min_sum(approx: &RationalApprox, beta: f64, u: f64, p: u64) -> Result<(f64, f64)> {
    if !(u > 0.0) || p == 0 {
        return Err(Error::InvalidInput(format!("need U > 0 and P ≥ 1 (U = {u}, P = {p})")));
    }
    if !(approx.theta.abs() <= 1.0) {
        return Err(Error::InvalidInput(format!("|θ| = {} exceeds 1", approx.theta.abs())));
    }
    let b = beta - beta.floor();
    let mut acc = ExactSum::new();
    for x in 1..=p {
        let t = frac_product(approx.alpha, x) + b;
        let t = t - t.floor();
        let d = t.min(1.0 - t);
        acc.add(if d == 0.0 { u } else { u.min(1.0 / d) });
    }
    let q = approx.q as f64;
    let rhs = 6.0 * (p as f64 / q + 1.0) * (u + q * q.ln());
    Ok((acc.value(), rhs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KaratsubaReport {
    pub seed: u64,
    pub trials: usize,
    pub violations: usize,
    pub worst_ratio: f64,
}

/// Random instances: α and Q uniform, the approximant from continued
/// fractions, β uniform, U ∈ [1, 1000], P ≤ 1000. Instance i draws from its
/// own stream, so the report does not depend on the thread count.
pub fn karatsuba_harness(seed: u64, trials: usize) -> Result<KaratsubaReport> {
    let ratios: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let alpha: f64 = rng.gen();
            let quality = rng.gen_range(1.0..1000.0);
            let beta: f64 = rng.gen();
            let u = rng.gen_range(1.0..1000.0);
            let p = rng.gen_range(1..=1000u64);
            let approx = dirichlet_approx(alpha, quality)?;
            let (lhs, rhs) = karatsuba_min_sum(&approx, beta, u, p)?;
            Ok(lhs / rhs)
        })
        .collect::<Result<_>>()?;
    Ok(KaratsubaReport {
        seed,
        trials,
        violations: ratios.iter().filter(|&&r| r > 1.0).count(),
        worst_ratio: ratios.iter().copied().fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    SmallQ,
    LargeQ,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSplit {
    /// Q = X^{5/4}.
    pub quality: f64,
    /// q* = X^{3/4} λ^{1/2}.
    pub q_star: f64,
    pub branch: Branch,
    pub small_q_bound: f64,
    pub large_q_bound: f64,
}

impl ThresholdSplit {
    pub fn chosen_bound(&self) -> f64 {
        match self.branch {
            Branch::SmallQ => self.small_q_bound,
            Branch::LargeQ => self.large_q_bound,
        }
    }
}

pub fn threshold_split(x: f64, lambda_delta: f64, q: u64) -> Result<ThresholdSplit> {
    if !(x >= 2.0) || !(lambda_delta > 0.0) || q == 0 {
        return Err(Error::InvalidInput(format!(
            "need X ≥ 2, λ > 0, q ≥ 1 (X = {x}, λ = {lambda_delta}, q = {q})"
        )));
    }
    let quality = x.powf(1.25);
    let q_star = x.powf(0.75) * lambda_delta.sqrt();
    let qf = q as f64;
    let l4 = lambda_delta.powf(0.25);
    let small = x.sqrt() * qf.sqrt() * l4 + x.powf(1.5) / quality.sqrt() * l4;
    let large = x.powf(0.875) * lambda_delta.sqrt() + x.powf(0.75) * lambda_delta.sqrt() * (x / qf + qf / x).sqrt();
    Ok(ThresholdSplit {
        quality,
        q_star,
        branch: if qf <= q_star { Branch::SmallQ } else { Branch::LargeQ },
        small_q_bound: small,
        large_q_bound: large,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_examples() {
        let s = squarefree_split(12).unwrap();
        assert_eq!((s.c1, s.c2), (3, 4));
        assert_eq!(squarefree_split(1).unwrap().c1, 1);
        let s = squarefree_split(30).unwrap();
        assert_eq!((s.c1, s.c2, s.d_c1), (30, 1, 8));
        assert!(matches!(squarefree_split(SPLIT_LIMIT + 1), Err(Error::Budget(_))));
        let parts = squarefree_parts(1000);
        for c in 1..=1000u64 {
            assert_eq!(parts[c as usize], squarefree_split(c).unwrap().c1);
        }
    }

    #[test]
    fn dirichlet_examples() {
        let r = dirichlet_approx(1.0 / 3.0, 10.0).unwrap();
        assert_eq!((r.ell, r.q), (1, 3));
        assert!(r.theta.abs() < 1e-15);
        let r = dirichlet_approx(0.0, 5.0).unwrap();
        assert_eq!((r.ell, r.q, r.theta), (0, 1, 0.0));
        let alpha = 2f64.sqrt() - 1.0;
        let r = dirichlet_approx(alpha, 100.0).unwrap();
        assert!(r.q <= 100 && gcd(r.ell, r.q as i64) == 1);
        assert!(r.error() <= 1.0 / (r.q as f64 * 100.0));
        // exhaustive: no smaller q satisfies the Dirichlet inequality better than required
        let first = (1..=100u64)
            .find(|&q| (alpha * q as f64 - (alpha * q as f64).round()).abs() <= 1.0 / 100.0)
            .unwrap();
        assert!(r.q >= first);
        let r = dirichlet_approx(-2.75, 10.0).unwrap();
        assert_eq!((r.ell, r.q), (-11, 4));
    }

    #[test]
    fn pitt_examples() {
        assert_eq!(pitt_t(1, 1, 0.0, 10.0).unwrap(), 90.0);
        let a = pitt_t(3, 6, 0.25, 64.0).unwrap();
        // re-enumerate with the loops reversed
        let s = squarefree_split(6).unwrap();
        let mut total = ExactSum::new();
        for h in (1..64u64).rev() {
            for c3 in divisors(6).into_iter().rev() {
                for u in (0..c3).rev().filter(|&u| gcd(u as i64, c3 as i64) == 1) {
                    let d = 2.0 * pitt_distance(0.25, h, u, c3);
                    total.add(((6 / c3) as f64).sqrt() * capped_inverse(64.0, d));
                }
            }
        }
        let b = 3f64.sqrt() * (s.d_c1 as f64).powi(2) * (s.c1 as f64).sqrt() * s.c2 as f64 * total.value();
        assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
        assert!(matches!(pitt_t(1, 100_000, 0.1, 20_000.0), Err(Error::Budget(_))));
    }

    #[test]
    fn quad_sum_with_trivial_modulus() {
        let chk = kloosterman_quad_sum_check(5, 1, 0.3, 0.1, 100.0).unwrap();
        assert!(chk.lhs <= 100.0 + 1e-9);
        assert!(chk.rhs > 0.0);
    }

    #[test]
    fn majorant_small() {
        let g = majorant_build(10.0).unwrap();
        assert!(g.value(0.5) >= 2.0);
        assert!(g.coefficient(0) <= 8.0 * 10f64.ln());
        assert_eq!(g.coefficient(3), g.coefficient(-3));
        assert!(g.tail_bound() <= 1e-5);
    }

    #[test]
    fn kernel_sum_examples() {
        let k = squarefree_kernel_sum(1, KernelExponent::MinusQuarter).unwrap();
        assert_eq!(k.sum, 1.0);
        let k = squarefree_kernel_sum(10_000, KernelExponent::MinusQuarter).unwrap();
        assert!(k.ratio <= 3.0, "{k:?}");
    }

    #[test]
    fn karatsuba_examples() {
        let a = dirichlet_approx(0.0, 1.0).unwrap();
        let (l, r) = karatsuba_min_sum(&a, 0.0, 7.0, 20).unwrap();
        assert_eq!(l, 140.0);
        assert_eq!(r, 6.0 * 21.0 * 7.0);
        let a = dirichlet_approx(0.5, 10.0).unwrap();
        let (l, r) = karatsuba_min_sum(&a, 0.0, 10.0, 10).unwrap();
        assert_eq!(l, 5.0 * 10.0 + 5.0 * 2.0);
        assert!(l <= r);
        let rep = karatsuba_harness(42, 500).unwrap();
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn threshold_examples() {
        let (x, lam) = (4096.0f64, 90.0f64);
        let q_star = x.powf(0.75) * lam.sqrt();
        let t = threshold_split(x, lam, q_star.round() as u64).unwrap();
        let ratio = t.small_q_bound / t.large_q_bound;
        assert!((0.25..=4.0).contains(&ratio), "{ratio}");
        assert_eq!(threshold_split(x, lam, 1).unwrap().branch, Branch::SmallQ);
        let big = x.powf(1.25) as u64;
        let t = threshold_split(x, lam, big).unwrap();
        assert_eq!(t.branch, Branch::LargeQ);
    }
}
