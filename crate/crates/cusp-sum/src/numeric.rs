//! Shared numerical kernels: additive characters, compensated and exact
//! summation, adaptive Gauss–Kronrod quadrature, Gauss–Legendre panels and
//! FFT-sampled Fourier integrals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub const TWO_PI: f64 = std::f64::consts::TAU;

/// e(x) = exp(2πix), with x reduced to [−1/2, 1/2] first.
#[inline]
pub fn e(x: f64) -> Complex64 {
    let r = x - x.round();
    let (s, c) = (TWO_PI * r).sin_cos();
    Complex64::new(c, s)
}

/// Distance to the nearest integer.
#[inline]
pub fn dist_to_int(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// frac(α·k) in [0, 1) computed exactly from the binary expansion of α and
/// rounded once. α must satisfy |α| < 2⁵².
pub fn frac_product(alpha: f64, k: u64) -> f64 {
    let a = alpha - alpha.floor();
    if a == 0.0 || k == 0 {
        return 0.0;
    }
    // a = mant·2^(−shift) exactly, mant < 2⁵³.
    let bits = a.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let (mant, shift) = if exp == 0 {
        (bits & ((1 << 52) - 1), 1074)
    } else {
        ((bits & ((1 << 52) - 1)) | (1 << 52), 1075 - exp)
    };
    let prod = mant as u128 * k as u128;
    if shift >= 128 {
        return prod as f64 * 2f64.powi(-shift);
    }
    let r = prod & ((1u128 << shift) - 1);
    r as f64 * 2f64.powi(-shift)
}

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: Complex64) {
        let (re, ere) = two_sum(self.sum.re, x.re);
        let (im, eim) = two_sum(self.sum.im, x.im);
        self.sum = Complex64::new(re, im);
        self.comp += Complex64::new(ere, eim);
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

/// Pairwise (cascade) summation with O(log n) memory.
#[derive(Debug, Clone, Default)]
pub struct PairwiseSum {
    stack: Vec<(Complex64, u32)>,
}

impl PairwiseSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: Complex64) {
        let mut cur = (x, 0u32);
        while let Some(&(top, level)) = self.stack.last() {
            if level != cur.1 {
                break;
            }
            self.stack.pop();
            cur = (top + cur.0, level + 1);
        }
        self.stack.push(cur);
    }

    pub fn value(&self) -> Complex64 {
        self.stack
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &(v, _)| acc + v)
    }
}

/// Exactly rounded sum of f64 terms (Shewchuk partials), so the result does
/// not depend on the order terms are added in.
#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let Some(mut n) = p.len().checked_sub(1) else {
            return 0.0;
        };
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            n -= 1;
            let x = hi;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
        hi
    }
}

impl Extend<f64> for ExactSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
    // Estimate is at the round-off floor; bisecting cannot improve it.
    limited: bool,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut abs = fc.norm() * WGK[7];
    for j in 0..7 {
        let x = h * XGK[j];
        let (f1, f2) = (f(c - x), f(c + x));
        k += (f1 + f2) * WGK[j];
        abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            g += (f1 + f2) * WG[j / 2];
        }
    }
    let value = k * h;
    let roundoff = 50.0 * f64::EPSILON * abs * h.abs();
    let diff = ((k - g) * h).norm();
    Panel {
        a,
        b,
        value,
        err: diff.max(roundoff),
        limited: diff <= roundoff,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

/// Adaptive Gauss–Kronrod (7/15) on [a, b], starting from `panels` equal
/// panels and bisecting the worst panel until the summed error estimate is
/// below `abs_tol` or the worst panel is already at its round-off floor.
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    panels: usize,
    abs_tol: f64,
    max_panels: usize,
) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            panels: 0,
        });
    }
    let n0 = panels.max(1);
    let w = (b - a) / n0 as f64;
    let mut heap: BinaryHeap<Panel> = (0..n0)
        .map(|i| {
            let lo = a + w * i as f64;
            let hi = if i + 1 == n0 { b } else { lo + w };
            gk15(&f, lo, hi)
        })
        .collect();
    loop {
        let total_err: f64 = heap.iter().map(|p| p.err).sum();
        let worst = *heap.peek().expect("non-empty");
        let tiny = (worst.b - worst.a).abs() <= 1e-13 * (b - a).abs();
        if total_err <= abs_tol || worst.limited || tiny {
            if total_err > abs_tol && !worst.limited {
                return Err(Error::Quadrature(format!(
                    "error {total_err:.3e} stalled above {abs_tol:.3e} on [{a}, {b}]"
                )));
            }
            let value = heap.iter().fold(Complex64::new(0.0, 0.0), |s, p| s + p.value);
            return Ok(Quadrature {
                value,
                error: total_err,
                panels: heap.len(),
            });
        }
        if heap.len() >= max_panels {
            return Err(Error::Quadrature(format!(
                "{} panels exhausted with error {total_err:.3e} (target {abs_tol:.3e})",
                heap.len()
            )));
        }
        let p = heap.pop().expect("non-empty");
        let m = 0.5 * (p.a + p.b);
        heap.push(gk15(&f, p.a, m));
        heap.push(gk15(&f, m, p.b));
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, abs_tol: f64) -> Result<f64> {
    integrate(|x| Complex64::new(f(x), 0.0), a, b, panels, abs_tol, 1 << 16).map(|q| q.value.re)
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss–Legendre rule with `panels` equal panels of `order` nodes.
#[derive(Debug, Clone)]
pub struct PanelRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl PanelRule {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        PanelRule { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> Complex64 {
        let h = (b - a) / panels as f64;
        let mut acc = CompensatedSum::new();
        for p in 0..panels {
            let c = a + h * (p as f64 + 0.5);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc.add(f(c + 0.5 * h * x) * (0.5 * h * w));
            }
        }
        acc.value()
    }
}

/// Samples F(τ_k) = ∫_{va}^{vb} g(v)·e^{−iτ_k v} dv on τ_k = k·dtau for
/// k = −n..=n with one FFT. `g` must vanish smoothly at both ends and
/// `bandwidth` bounds its own angular frequency content.
pub fn fourier_grid<G: Fn(f64) -> Complex64>(
    g: G,
    va: f64,
    vb: f64,
    dtau: f64,
    n: usize,
    bandwidth: f64,
) -> Result<Vec<Complex64>> {
    if !(vb > va) || !(dtau > 0.0) {
        return Err(Error::InvalidInput(format!(
            "fourier_grid needs va < vb and dtau > 0 (got [{va}, {vb}], {dtau})"
        )));
    }
    let t_top = n as f64 * dtau + bandwidth;
    // Nyquist with a 1.5× guard: frequencies up to t_top must not alias.
    let dv_max = std::f64::consts::PI / (1.5 * t_top.max(1.0));
    let period = TWO_PI / dtau;
    if period < (vb - va) * 1.05 {
        return Err(Error::InvalidInput(format!(
            "dtau = {dtau} too coarse for a support of length {}",
            vb - va
        )));
    }
    let m = ((period / dv_max).ceil() as usize).max(2 * n + 2).next_power_of_two();
    if m > 1 << 25 {
        return Err(Error::Budget(format!("FFT length {m} above 2^25")));
    }
    let dv = period / m as f64;
    let mut buf: Vec<Complex64> = (0..m)
        .map(|j| {
            let v = va + j as f64 * dv;
            if v <= vb {
                g(v)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let out = (-(n as i64)..=n as i64)
        .map(|k| {
            let idx = k.rem_euclid(m as i64) as usize;
            let tau = k as f64 * dtau;
            buf[idx] * Complex64::from_polar(dv, -tau * va)
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fractional_products() {
        assert_eq!(frac_product(0.5, 3), 0.5);
        assert_eq!(frac_product(-0.25, 1), 0.75);
        assert_eq!(frac_product(0.75 + 8.0, 5), 0.75);
        // α = 2⁻³⁰ + 2⁻⁵⁰ and k = 2⁴⁰: the 2⁻⁵⁰ part survives exactly.
        let a = 2f64.powi(-30) + 2f64.powi(-50);
        assert_eq!(frac_product(a, 1 << 40), 2f64.powi(-10));
        assert_eq!(frac_product(1e-300, 7), 7.0 * 1e-300);
    }

    #[test]
    fn additive_character() {
        assert!((e(0.25) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((e(1e6 + 0.5) - Complex64::new(-1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn exact_sum_is_order_free() {
        let xs = [1e16, 1.0, -1e16, 3.14159, 1e-3, -2.5e15, 2.5e15];
        let mut fwd = ExactSum::new();
        fwd.extend(xs.iter().copied());
        let mut rev = ExactSum::new();
        rev.extend(xs.iter().rev().copied());
        assert_eq!(fwd.value(), rev.value());
        assert_eq!(fwd.value(), 1.0 + 3.14159 + 1e-3);
    }

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let mut p = PairwiseSum::new();
        for k in 1..=1000 {
            p.add(Complex64::new(k as f64, -(k as f64)));
        }
        assert_eq!(p.value(), Complex64::new(500500.0, -500500.0));
    }

    #[test]
    fn gauss_kronrod_polynomial_and_oscillatory() {
        let q = integrate(|x| Complex64::new(x * x, 0.0), 0.0, 3.0, 1, 1e-14, 100).unwrap();
        assert!((q.value.re - 9.0).abs() < 1e-13);
        let q = integrate(|x| e(50.0 * x), 0.0, 1.0, 4, 1e-13, 10_000).unwrap();
        assert!(q.value.norm() < 1e-12);
    }

    #[test]
    fn legendre_weights_sum_to_two() {
        for n in [1, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
            if n >= 3 {
                assert!((m4 - 0.4).abs() < 1e-13, "n = {n}");
            }
        }
    }

    #[test]
    fn fourier_grid_of_gaussian() {
        // ∫ exp(−v²/2) e^{−iτv} dv = √(2π) exp(−τ²/2)
        let g = |v: f64| Complex64::new((-0.5 * v * v).exp(), 0.0);
        let vals = fourier_grid(g, -12.0, 12.0, 0.1, 60, 0.0).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let tau = (k as f64 - 60.0) * 0.1;
            let want = (TWO_PI).sqrt() * (-0.5 * tau * tau).exp();
            assert!((v - want).norm() < 1e-12, "τ = {tau}");
        }
    }
}
