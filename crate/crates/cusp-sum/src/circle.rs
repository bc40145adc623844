//! The δ-method: a concrete kernel h(c, u) built from a bump w on [C/2, C],
//! reconstruction of δ(n) through Ramanujan sums, and the Fourier partner
//! g(c, ζ) of h.
//!
//! With w(x) = w₀(x/C)/C and w₀ of unit mass on [1/2, 1],
//!
//! h(c, u) = Σ_r (cr)⁻¹ (w(cr) − w(|u|/(cr))),
//!
//! and Σ_{c} c_c(n) h(c, n) collapses to Σ_{d|n} w(d) − Σ_{d|n} w(|n|/d) = 0
//! for n ≠ 0, while n = 0 gives Σ_d w(d) ≈ 1. Substituting u = cCv shows that
//! away from ζ = 0 the transform g(c, ζ) does not depend on c or C:
//!
//! g(ζ) = ∫ (I_w − Σ_r w₀(|v|/r)/r) e(−vζ) dv,   I_w = ∫ w₀(y)/y dy,
//!
//! plus a point mass (A_c − I_w)·δ(ζ) with A_c = Σ_r w₀(cr/C)/r, which is
//! negligible for c ≪ C.

use std::sync::OnceLock;

use crate::arith::ramanujan_sum;
use crate::bump::{unit_bump, UNIT_BUMP_INTEGRAL};
use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre, integrate_real, CompensatedSum, TWO_PI};

/// Unit-mass bump on [1/2, 1].
#[inline]
pub fn w0(t: f64) -> f64 {
    unit_bump((t - 0.75) / 0.25) / (0.25 * UNIT_BUMP_INTEGRAL)
}

/// Σ_{r≥1} w₀(v/r)/r for v ≥ 0; only v < r < 2v contribute.
fn dilation_sum(v: f64) -> f64 {
    let lo = v.floor() as u64 + 1;
    let hi = (2.0 * v).ceil() as u64;
    (lo..hi.max(lo)).map(|r| w0(v / r as f64) / r as f64).sum()
}

struct GTable {
    i_w: f64,
    nodes: Vec<f64>,
    // Quadrature weight times (I_w − Σ_r w₀(v/r)/r) at each node.
    weighted: Vec<f64>,
}

const G_CUTOFF: f64 = 400.0;
const G_PANEL: f64 = 0.02;
const G_ORDER: usize = 16;

fn g_table() -> &'static GTable {
    static TABLE: OnceLock<GTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let i_w = integrate_real(|y| w0(y) / y, 0.5, 1.0, 8, 1e-15).expect("smooth integrand");
        let (x, wt) = gauss_legendre(G_ORDER);
        let panels = (G_CUTOFF / G_PANEL).round() as usize;
        let mut nodes = Vec::with_capacity(panels * G_ORDER);
        let mut weighted = Vec::with_capacity(panels * G_ORDER);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * G_PANEL;
            for (xi, wi) in x.iter().zip(&wt) {
                let v = mid + 0.5 * G_PANEL * xi;
                nodes.push(v);
                weighted.push(0.5 * G_PANEL * wi * (i_w - dilation_sum(v)));
            }
        }
        GTable { i_w, nodes, weighted }
    })
}

/// The δ-method configuration for a cutoff C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaKernel {
    c_cut: f64,
    calibration: f64,
}

impl DeltaKernel {
    /// Builds the kernel and its calibration 1/Σ_d w(d), which must lie in [1/2, 2].
    pub fn new(c_cut: f64) -> Result<Self> {
        if !(c_cut > 1.0 && c_cut.is_finite()) {
            return Err(Error::InvalidInput(format!("cutoff C = {c_cut} must exceed 1")));
        }
        let mut k = DeltaKernel {
            c_cut,
            calibration: 1.0,
        };
        let total: f64 = (1..=c_cut.floor() as u64).map(|d| k.w(d as f64)).sum();
        let cal = 1.0 / total;
        if !(0.5..=2.0).contains(&cal) {
            return Err(Error::Invariant(format!(
                "calibration factor {cal} outside [0.5, 2] for C = {c_cut}"
            )));
        }
        k.calibration = cal;
        Ok(k)
    }

    pub fn cutoff(&self) -> f64 {
        self.c_cut
    }

    pub fn calibration(&self) -> f64 {
        self.calibration
    }

    /// The bump w, supported in [C/2, C] with unit integral.
    pub fn w(&self, x: f64) -> f64 {
        w0(x / self.c_cut) / self.c_cut
    }

    /// Weight of the point mass of g(c, ·) at ζ = 0.
    pub fn point_mass(&self, c: u64) -> f64 {
        let a_c: f64 = (1..)
            .map(|r| c as f64 * r as f64)
            .take_while(|&x| x <= self.c_cut)
            .map(|x| self.c_cut * self.w(x) * c as f64 / x)
            .sum();
        a_c - g_table().i_w
    }
}

/// h(c, u) = Σ_r (cr)⁻¹ (w(cr) − w(|u|/(cr))).
pub fn kernel_h(kernel: &DeltaKernel, c: u64, u: f64) -> f64 {
    let cc = kernel.c_cut;
    let c = c as f64;
    let mut acc = 0.0;
    let mut r = 1.0;
    while c * r <= cc {
        acc += kernel.w(c * r) / (c * r);
        r += 1.0;
    }
    let u = u.abs();
    if u > 0.0 {
        // |u|/(cr) ∈ [C/2, C] ⇔ r ∈ [|u|/(cC), 2|u|/(cC)]
        let lo = (u / (c * cc)).floor().max(1.0);
        let hi = (2.0 * u / (c * cc)).ceil();
        let mut r = lo;
        while r <= hi {
            acc -= kernel.w(u / (c * r)) / (c * r);
            r += 1.0;
        }
    }
    acc
}

/// Calibrated Σ_c c_c(n)·h(c, n). The modulus runs over c ≤ max(C, 2|n|/C),
/// which is c ≤ C throughout |n| ≤ C²/2 where the identity is exact.
pub fn delta_reconstruct(n: i64, kernel: &DeltaKernel) -> Result<f64> {
    let cc = kernel.c_cut;
    let window = 0.9 * cc * cc;
    if n.unsigned_abs() as f64 > window {
        return Err(Error::Window(format!("|n| = {} above 0.9·C² = {window}", n.abs())));
    }
    let c_max = cc.max(2.0 * n.unsigned_abs() as f64 / cc).floor() as u64;
    let mut acc = CompensatedSum::new();
    for c in 1..=c_max {
        let rs = ramanujan_sum(c, n);
        if rs != 0 {
            acc.add((rs as f64 * kernel_h(kernel, c, n as f64)).into());
        }
    }
    Ok(kernel.calibration * acc.value().re)
}

fn check_modulus(kernel: &DeltaKernel, c: u64) -> Result<()> {
    if c == 0 || c as f64 > kernel.c_cut {
        return Err(Error::InvalidInput(format!(
            "modulus c = {c} outside [1, C = {}]",
            kernel.c_cut
        )));
    }
    Ok(())
}

/// g(c, ζ) for ζ ≠ 0 by quadrature of the rescaled h against e(−vζ). At
/// ζ = 0 the regular part is returned (it equals 1).
pub fn g_eval(c: u64, zeta: f64, kernel: &DeltaKernel) -> Result<f64> {
    check_modulus(kernel, c)?;
    let t = g_table();
    let z = zeta.abs();
    if z > 0.25 / G_PANEL {
        return Err(Error::Quadrature(format!("|ζ| = {z} beyond the tabulated resolution")));
    }
    let mut acc = CompensatedSum::new();
    for (v, w) in t.nodes.iter().zip(&t.weighted) {
        acc.add((2.0 * w * (TWO_PI * v * z).cos()).into());
    }
    Ok(acc.value().re)
}

/// ∂g/∂ζ from the same quadrature.
pub fn g_derivative(c: u64, zeta: f64, kernel: &DeltaKernel) -> Result<f64> {
    check_modulus(kernel, c)?;
    let t = g_table();
    if zeta.abs() > 0.25 / G_PANEL {
        return Err(Error::Quadrature(format!(
            "|ζ| = {zeta} beyond the tabulated resolution"
        )));
    }
    let mut acc = CompensatedSum::new();
    for (v, w) in t.nodes.iter().zip(&t.weighted) {
        acc.add((-2.0 * w * TWO_PI * v * (TWO_PI * v * zeta).sin()).into());
    }
    Ok(acc.value().re)
}

/// Fitted constants for the decay and derivative envelopes of g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GEnvelope {
    /// max |g(ζ)|·|ζ|³ over the decay grid.
    pub decay: f64,
    /// max |ζ ∂g| / (min(|ζ|⁻¹, C/c)·log C) over the (c, ζ) grid.
    pub derivative: f64,
    /// max |g − 1| over c ≤ C/10 and |ζ| ≤ c/(4C).
    pub near_one: f64,
}

pub fn g_envelopes(kernel: &DeltaKernel, zetas: &[f64], moduli: &[u64]) -> Result<GEnvelope> {
    let cc = kernel.c_cut;
    let mut env = GEnvelope {
        decay: 0.0,
        derivative: 0.0,
        near_one: 0.0,
    };
    for &z in zetas {
        if z.abs() >= 1.0 {
            env.decay = env.decay.max(g_eval(1, z, kernel)?.abs() * z.abs().powi(3));
        }
    }
    for &c in moduli {
        for &z in zetas {
            let d = (z * g_derivative(c, z, kernel)?).abs();
            let env_val = (1.0 / z.abs()).min(cc / c as f64) * cc.ln();
            env.derivative = env.derivative.max(d / env_val);
        }
        if (c as f64) <= cc / 10.0 {
            let top = c as f64 / (4.0 * cc);
            for k in 0..=8 {
                let z = top * k as f64 / 8.0;
                env.near_one = env.near_one.max((g_eval(c, z, kernel)? - 1.0).abs());
            }
        }
    }
    Ok(env)
}
