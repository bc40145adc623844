//! Smooth compactly supported building blocks shared by every module, plus
//! truncated Taylor jets used to differentiate them exactly.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// ∫_{−1}^{1} exp(−1/(1−t²)) dt.
pub const UNIT_BUMP_INTEGRAL: f64 = 0.443_993_816_168_079_4;

/// exp(−1/(1−t²)) on (−1, 1), zero outside.
#[inline]
pub fn unit_bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

#[inline]
fn psi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// C^∞ step: 0 for t ≤ 0, 1 for t ≥ 1.
#[inline]
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = psi(t);
        a / (a + psi(1.0 - t))
    }
}

/// Trapezoid-shaped smooth function: 0 outside (a, d), 1 on [b, c].
#[inline]
pub fn plateau(x: f64, a: f64, b: f64, c: f64, d: f64) -> f64 {
    if x <= a || x >= d {
        0.0
    } else if x < b {
        smooth_step((x - a) / (b - a))
    } else if x <= c {
        1.0
    } else {
        smooth_step((d - x) / (d - c))
    }
}

/// Unit-mass bump supported on [lo, hi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub lo: f64,
    pub hi: f64,
}

impl Bump {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(hi > lo, "empty bump support");
        Bump { lo, hi }
    }

    pub fn value(&self, x: f64) -> f64 {
        let half = 0.5 * (self.hi - self.lo);
        let t = (x - self.lo - half) / half;
        unit_bump(t) / (half * UNIT_BUMP_INTEGRAL)
    }
}

/// Truncated Taylor series f(x0 + h) = Σ_{k<N} c_k h^k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<const N: usize>(pub [f64; N]);

impl<const N: usize> Jet<N> {
    pub fn constant(c: f64) -> Self {
        let mut a = [0.0; N];
        a[0] = c;
        Jet(a)
    }

    pub fn variable(x0: f64) -> Self {
        let mut a = [0.0; N];
        a[0] = x0;
        if N > 1 {
            a[1] = 1.0;
        }
        Jet(a)
    }

    /// j-th derivative at the expansion point.
    pub fn derivative(&self, j: usize) -> f64 {
        let fact: f64 = (1..=j).map(|k| k as f64).product();
        self.0[j] * fact
    }

    pub fn scale(self, s: f64) -> Self {
        Jet(self.0.map(|c| c * s))
    }

    pub fn exp(self) -> Self {
        let a = self.0;
        let mut f = [0.0; N];
        f[0] = a[0].exp();
        for k in 1..N {
            let s: f64 = (1..=k).map(|j| j as f64 * a[j] * f[k - j]).sum();
            f[k] = s / k as f64;
        }
        Jet(f)
    }

    pub fn recip(self) -> Self {
        let a = self.0;
        let mut r = [0.0; N];
        r[0] = 1.0 / a[0];
        for k in 1..N {
            let s: f64 = (1..=k).map(|j| a[j] * r[k - j]).sum();
            r[k] = -s * r[0];
        }
        Jet(r)
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut a = self.0;
        for (x, y) in a.iter_mut().zip(o.0) {
            *x += y;
        }
        Jet(a)
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        Jet(self.0.map(|c| -c))
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut c = [0.0; N];
        for i in 0..N {
            for j in 0..N - i {
                c[i + j] += self.0[i] * o.0[j];
            }
        }
        Jet(c)
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

fn psi_jet<const N: usize>(t: Jet<N>) -> Jet<N> {
    if t.0[0] <= 0.0 {
        Jet([0.0; N])
    } else {
        (-t.recip()).exp()
    }
}

/// Jet of [`smooth_step`] at t.
pub fn smooth_step_jet<const N: usize>(t: f64) -> Jet<N> {
    if t <= 0.0 {
        return Jet([0.0; N]);
    }
    if t >= 1.0 {
        return Jet::constant(1.0);
    }
    let x = Jet::<N>::variable(t);
    let a = psi_jet(x);
    let b = psi_jet(Jet::constant(1.0) - x);
    a / (a + b)
}

/// Jet of [`plateau`] at x (in x, not in the rescaled step variable).
pub fn plateau_jet<const N: usize>(x: f64, a: f64, b: f64, c: f64, d: f64) -> Jet<N> {
    if x <= a || x >= d {
        return Jet([0.0; N]);
    }
    if (b..=c).contains(&x) {
        return Jet::constant(1.0);
    }
    let (t, rate) = if x < b {
        ((x - a) / (b - a), 1.0 / (b - a))
    } else {
        ((d - x) / (d - c), -1.0 / (d - c))
    };
    let mut s = smooth_step_jet::<N>(t);
    let mut f = 1.0;
    for k in 0..N {
        s.0[k] *= f;
        f *= rate;
    }
    s
}
