use std::collections::HashMap;
use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;

use cusp_sum::arith::{gcd, mod_inverse, ramanujan_sum, Sieve};
use cusp_sum::bounds::*;
use cusp_sum::bump::Bump;
use cusp_sum::circle::{g_derivative, g_eval, DeltaKernel};
use cusp_sum::coefficients::*;
use cusp_sum::expsum::{quad_exp_sum, quadratic_phase, Window};
use cusp_sum::kloosterman::*;
use cusp_sum::numeric::e;
use cusp_sum::oscillatory::*;
use cusp_sum::summation::*;
use cusp_sum::voronoi::*;

const MU: f64 = 9.5336952613535573;

fn tau() -> &'static CuspForm {
    static F: OnceLock<CuspForm> = OnceLock::new();
    F.get_or_init(|| generate_tau(1 << 15).unwrap())
}

fn maass() -> &'static CuspForm {
    static F: OnceLock<CuspForm> = OnceLock::new();
    F.get_or_init(|| {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/maass_r9.53369526_odd.txt");
        ingest_form(path).unwrap().0
    })
}

fn tau_raw() -> &'static Vec<i128> {
    static T: OnceLock<Vec<i128>> = OnceLock::new();
    T.get_or_init(|| tau_integers(1 << 15).unwrap())
}

// coefficients

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tau_is_multiplicative(m in 1usize..=180, n in 1usize..=180) {
        prop_assume!(gcd(m as i64, n as i64) == 1);
        let t = tau_raw();
        prop_assert_eq!(t[m * n], t[m] * t[n]);
        let f = tau();
        prop_assert!((f.lambda(m * n) - f.lambda(m) * f.lambda(n)).abs() <= 1e-9);
    }

    #[test]
    fn coefficient_bounds_hold(n in 1usize..=(1 << 15)) {
        let d = cusp_sum::arith::divisor_count(n as u64) as u32;
        for f in [tau(), maass()] {
            prop_assert!(f.lambda(n).abs() <= f.pointwise_bound(n, d) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn hecke_extension_reproduces_tau() {
    let t = tau_raw();
    let n = t.len() - 1;
    let sieve = Sieve::new(n);
    let primes: HashMap<usize, i128> = sieve.primes().map(|p| (p, t[p])).collect();
    assert_eq!(&hecke_extend_integral(&primes, n, 12).unwrap()[1..], &t[1..]);
    let normalized: HashMap<usize, f64> = sieve.primes().map(|p| (p, tau().lambda(p))).collect();
    let ext = hecke_extend(&normalized, n).unwrap();
    for k in 1..=n {
        assert!((ext[k] - tau().lambda(k)).abs() <= 1e-9 * (1.0 + tau().lambda(k).abs()));
    }
}

#[test]
fn rankin_selberg_drift() {
    let f = tau();
    let mut prev = rankin_selberg_ratio(f, 4096.0).unwrap();
    for k in 13..=15 {
        let r = rankin_selberg_ratio(f, 2f64.powi(k)).unwrap();
        assert!((r / prev - 1.0).abs() < 0.25);
        prev = r;
    }
}

// kloosterman

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn fast_matches_brute(c in 1u64..=500, m in -50i64..=50, n in -50i64..=50) {
        let fast = kloosterman_sum(m, n, c).unwrap();
        let brute = kloosterman_brute(m, n, c);
        prop_assert!((fast - brute.re).abs() <= 1e-9 && brute.im.abs() <= 1e-9);
    }

    #[test]
    fn kloosterman_symmetry_and_weil(c in 1u64..=2000, m in -1000i64..=1000, n in -1000i64..=1000) {
        let k = Kloosterman::new(c).unwrap();
        prop_assert!((k.sum(m, n).unwrap() - k.sum(n, m).unwrap()).abs() <= 1e-9);
        prop_assert!(weil_ratio(m, n, c).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn twisted_multiplicativity(c1 in 1u64..60, c2 in 1u64..60, m in -30i64..30, n in -30i64..30) {
        prop_assume!(gcd(c1 as i64, c2 as i64) == 1);
        let i1 = mod_inverse(c1 as i64, c2 as i64).unwrap();
        let i2 = mod_inverse(c2 as i64, c1 as i64).unwrap();
        let lhs = kloosterman_sum(m, n, c1 * c2).unwrap();
        let rhs = kloosterman_sum(m * i2 * i2, n, c1).unwrap() * kloosterman_sum(m * i1 * i1, n, c2).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (c1 * c2) as f64);
    }
}

// oscillatory

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gamma_recurrence(re in -50.0f64..50.0, im in -50.0f64..50.0) {
        let s = Complex64::new(re, im);
        prop_assume!(s.norm() <= 50.0 && (im.abs() > 1e-3 || (re - re.round()).abs() > 1e-3));
        let a = gamma_complex(s + 1.0).unwrap();
        let b = s * gamma_complex(s).unwrap();
        prop_assume!(a.norm() > 1e-280 && a.norm() < 1e280);
        prop_assert!((a - b).norm() <= 1e-10 * a.norm());
    }
}

#[test]
fn stirling_error_decreases_with_height() {
    for sigma in [-0.5, 0.5, 2.0] {
        let mut prev = f64::INFINITY;
        for k in 2..=10 {
            let t = 2f64.powi(k);
            // Compared through logs: |Γ| itself drops below 10⁻¹⁵⁰ here.
            let (s, _) = ln_stirling_gamma(sigma, t, 2).unwrap();
            let g = ln_gamma(Complex64::new(sigma, t)).unwrap();
            let err = ((s - g).exp() - 1.0).norm();
            assert!(err <= 2.0 * prev, "σ = {sigma}, τ = {t}");
            prev = err;
        }
    }
}

fn fresnel(h: f64) -> PhaseSpec {
    let b = InertBump::new(1.0, 1.0);
    PhaseSpec::new(
        (1.0, 2.0),
        move |y| h * (y - 1.5) * (y - 1.5),
        move |y| 2.0 * h * (y - 1.5),
        move |_| 2.0 * h,
        move |y| Complex64::new(b.value(y), 0.0),
    )
    .unwrap()
}

// ϱ = R·y²/2 on [1, 2]: the stationary point sits outside the support.
fn shifted(r: f64) -> PhaseSpec {
    let b = InertBump::new(1.0, 1.0);
    PhaseSpec::new(
        (1.0, 2.0),
        move |y| 0.5 * r * y * y,
        move |y| r * y,
        move |_| r,
        move |y| Complex64::new(b.value(y), 0.0),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn stationary_phase_first_order_error(log_r in 3.0f64..5.0) {
        let r = 10f64.powf(log_r);
        let spec = fresnel(r);
        let q = osc_integral(&spec).unwrap();
        let sp = stationary_phase(&spec).unwrap();
        prop_assert!((sp.approx - q).norm() / q.norm() * r <= 10.0);
    }

    // R⁻³ stays above the quadrature floor (≈ 10⁻¹⁴) on this range.
    #[test]
    fn nonstationary_decay(log_r in 2.5f64..4.3) {
        let r = 10f64.powf(log_r);
        let z = 1.0;
        prop_assert!(osc_integral(&shifted(r)).unwrap().norm() <= z * r.powi(-3));
    }
}

// circle

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ramanujan_shortcut(c in 1u64..=200, n in -1000i64..=1000) {
        let direct: Complex64 = (1..=c)
            .filter(|&a| gcd(a as i64, c as i64) == 1)
            .map(|a| e((a as i64 * n).rem_euclid(c as i64) as f64 / c as f64))
            .sum();
        prop_assert!((direct.re - ramanujan_sum(c, n) as f64).abs() <= 1e-9 && direct.im.abs() <= 1e-9);
    }

    #[test]
    fn g_derivative_envelope(c in 1u64..=40, zeta in 0.05f64..5.0) {
        let k = DeltaKernel::new(40.0).unwrap();
        let d = (zeta * g_derivative(c, zeta, &k).unwrap()).abs();
        let env = (1.0 / zeta).min(40.0 / c as f64) * 40f64.ln();
        prop_assert!(d <= 100.0 * env);
        prop_assert_eq!(g_eval(c, zeta, &k).unwrap(), g_eval(c, -zeta, &k).unwrap());
    }
}

// voronoi

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn psi_contour_shift(log_x in -3.0f64..1.0, plus in any::<bool>()) {
        let sign = if plus { Sign::Plus } else { Sign::Minus };
        let f = TestBump::new(30.0);
        let x = 10f64.powf(log_x);
        let vals: Vec<Complex64> = [-0.5, 0.0, 0.5]
            .iter()
            .map(|&sigma| {
                let opts = PsiOptions { sigma, ..PsiOptions::default() };
                psi_eval(maass(), &f, PsiQuery { x, opts }, sign).unwrap().value
            })
            .collect();
        let scale = vals[1].norm().max(1e-3);
        prop_assert!((vals[0] - vals[1]).norm() <= 1e-6 * scale);
        prop_assert!((vals[2] - vals[1]).norm() <= 1e-6 * scale);
    }

    #[test]
    fn voronoi_identity_holomorphic(big_x in 25.0f64..70.0, pair in 0usize..4) {
        let (a, c) = [(0, 1), (1, 2), (1, 3), (2, 5)][pair];
        let v = voronoi_sides(tau(), a, c, &TestBump::new(big_x), PsiOptions::default()).unwrap();
        prop_assert!(v.rel_err <= 1e-6, "{:?}", v);
    }
}

// Ψ± outside the regime windows, against the joint in-window peak of both signs.
#[test]
fn psi_support_windows() {
    let kind = FormKind::Maass { mu: MU, parity: 1 };
    let big_x = 1000.0;
    for r in [0.0, 0.5, MU, MU.powi(3)] {
        let f = TestBump::new(big_x).with_twist(r / big_x);
        let k = PsiKernel::new(kind, &f, PsiOptions::default()).unwrap();
        let (mut peak, mut outside) = (0.0f64, 0.0f64);
        for i in 0..=300 {
            let xx = 10f64.powf(-2.0 + 9.0 * i as f64 / 300.0);
            let rep = regime_classify(xx / big_x, 1.0, r / big_x, big_x, 1.0, MU);
            for sign in [Sign::Plus, Sign::Minus] {
                let v = k.eval(xx / big_x, sign).norm();
                if rep.in_support {
                    peak = peak.max(v);
                } else {
                    outside = outside.max(v);
                }
            }
        }
        assert!(peak > 0.0 && outside <= 1e-3 * peak, "r = {r}: {outside:e} vs {peak:e}");
    }
}

// bounds

#[test]
fn squarefree_split_exhaustive() {
    for c in 1..=100_000u64 {
        let s = squarefree_split(c).unwrap();
        assert_eq!(s.c1 * s.c2, c);
        assert_eq!(gcd(s.c1 as i64, s.c2 as i64), 1);
        assert!(cusp_sum::arith::factorize(s.c1).iter().all(|&(_, a)| a == 1));
        assert!(cusp_sum::arith::factorize(s.c2).iter().all(|&(_, a)| a >= 2));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn dirichlet_approximation(alpha in -1e3f64..1e3, quality in 1.0f64..1e9) {
        let a = dirichlet_approx(alpha, quality).unwrap();
        prop_assert!(a.q as f64 <= quality && a.q >= 1);
        prop_assert_eq!(gcd(a.ell, a.q as i64), 1);
        prop_assert!(a.error() <= 1.0 / (a.q as f64 * quality));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn karatsuba_inequality(alpha in 0.0f64..1.0, quality in 1.0f64..1e3, beta in 0.0f64..1.0,
                            u in 1.0f64..1e3, p in 1u64..=1000) {
        let a = dirichlet_approx(alpha, quality).unwrap();
        let (lhs, rhs) = karatsuba_min_sum(&a, beta, u, p).unwrap();
        prop_assert!(lhs <= rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pitt_t_is_periodic(c in 1u64..30, alpha in 0.0f64..1.0, m in -20i64..20) {
        // α = k/2²⁰ keeps α + 1 exact.
        let alpha = (alpha * 1048576.0).round() / 1048576.0;
        let a = pitt_t(m, c, alpha, 40.0).unwrap();
        let b = pitt_t(m, c, alpha + 1.0, 40.0).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn majorant_dominates() {
    for m in [10.0, 100.0] {
        let g = majorant_build(m).unwrap();
        for i in 0..MAJORANT_GRID {
            let x = i as f64 / MAJORANT_GRID as f64;
            assert!(g.value(x) >= majorant_target(m, x), "M = {m}, x = {x}");
        }
        assert!(g.tail_bound() <= m.powi(-5));
    }
}

// expsum

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // α, β on a 2⁻²⁴ lattice so that α + 1 and β + 1 are exact.
    #[test]
    fn integer_shift_invariance(a in 0u32..(1 << 24), b in 0u32..(1 << 24), x in 100.0f64..30000.0) {
        let alpha = a as f64 / 16777216.0;
        let beta = b as f64 / 16777216.0;
        let s = quad_exp_sum(tau(), x, alpha, beta, Window::Full).unwrap().value;
        let t = quad_exp_sum(tau(), x, alpha + 1.0, beta + 1.0, Window::Full).unwrap().value;
        prop_assert!((s - t).norm() <= 1e-12 * s.norm().max(1e-300));
        let c = quad_exp_sum(tau(), x, -alpha, -beta, Window::Full).unwrap().value;
        prop_assert!((c - s.conj()).norm() <= 1e-12 * s.norm().max(1e-300));
    }

    #[test]
    fn summation_order_and_cauchy_schwarz(alpha in 0.0f64..1.0, beta in 0.0f64..1.0, x in 100.0f64..30000.0) {
        for f in [tau(), maass()] {
            let s = quad_exp_sum(f, x, alpha, beta, Window::Full).unwrap().value;
            let n = x.floor() as u64;
            let mut terms: Vec<Complex64> = (1..=n)
                .map(|k| e(quadratic_phase(alpha, beta, k)) * f.lambda(k as usize))
                .collect();
            terms.sort_by(|p, q| p.norm().total_cmp(&q.norm()));
            let sorted: Complex64 = terms.iter().sum();
            let mass: f64 = terms.iter().map(|t| t.norm()).sum();
            prop_assert!((sorted - s).norm() <= 1e-8 * s.norm().max(1e-6 * mass));
            let l2: f64 = (1..=n).map(|k| f.lambda(k as usize).powi(2)).sum();
            prop_assert!(s.norm_sqr() <= x * l2 * (1.0 + 1e-9));
        }
    }
}

// summation

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mellin_representations_agree(re in -2.5f64..3.0, im in -60.0f64..60.0, j in 1usize..5, k in 1usize..5,
                                    eta in 0.05f64..0.24) {
        let h = SmoothCutoff::new(eta).unwrap();
        let s = Complex64::new(re, im);
        prop_assume!(s.norm() > 0.1 && (s + 1.0).norm() > 0.1 && (s + 2.0).norm() > 0.1 && (s + 3.0).norm() > 0.1);
        let a = mellin_h(&h, s, j).unwrap();
        let b = mellin_h(&h, s, k).unwrap();
        let scale = a.direct.norm().max(1e-3);
        prop_assert!((a.by_parts - b.by_parts).norm() <= 1e-9 * scale);
        prop_assert!((a.by_parts - a.direct).norm() <= 1e-9 * scale);
    }

    #[test]
    fn gamma_factor_stirling(t in 4.0f64..40.0, sigma in -0.5f64..2.5, parity in 0u8..2, neg in any::<bool>()) {
        let gf = GammaFactor::new(parity, MU).unwrap();
        let t = if neg { -t * MU } else { t * MU };
        let v = gamma_factor_eval(&gf, Complex64::new(sigma, t)).unwrap();
        let st = v.stirling.unwrap();
        prop_assert!((st - v.exact).norm() <= 1e-2 * v.exact.norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn mellin_inversion_certified(x in 10.0f64..60.0, eta in 0.06f64..0.2) {
        let h = SmoothCutoff::new(eta).unwrap();
        let top = (2.0 * x).ceil() as usize;
        let lhs: f64 = (1..=top).map(|n| tau().lambda(n) * h.value(n as f64 / x)).sum();
        prop_assume!(lhs.abs() > 1e-3);
        let t_cut = certified_t_cut(tau(), &h, x, 1e-7 * lhs.abs()).unwrap();
        let m = mellin_inversion_check(tau(), &h, x, t_cut, top).unwrap();
        prop_assert!(m.tail_t <= 1e-7 * m.lhs.abs() && m.tail_n == 0.0);
        prop_assert!(m.rel_error <= 1e-6, "{:?}", m);
    }
}

#[test]
fn jpt_concentration() {
    let gf = GammaFactor::new(1, MU).unwrap();
    let p: f64 = 1e4;
    let at = |ratio: f64| {
        let t = ratio * p.sqrt();
        jpt_eval(p, t, &gf).unwrap().quadrature.norm() / t.sqrt()
    };
    let grid: Vec<f64> = (0..=40).map(|i| 10f64.powf(-0.5 + 1.5 * i as f64 / 40.0)).collect();
    let (peak_at, peak) = grid
        .iter()
        .map(|&r| (r, at(r)))
        .fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    assert!(
        (1.0..=4.0 * std::f64::consts::PI).contains(&peak_at),
        "peak at {peak_at}"
    );
    assert!(at(peak_at / 10.0) <= 1e-3 * peak);
    assert!(at(peak_at * 10.0) <= 1e-3 * peak);
}

#[test]
fn bump_has_unit_mass() {
    let b = Bump::new(1.0, 2.0);
    let n = 20000;
    let m: f64 = (0..n).map(|i| b.value(1.0 + (i as f64 + 0.5) / n as f64)).sum::<f64>() / n as f64;
    assert!((m - 1.0).abs() < 1e-9);
}
