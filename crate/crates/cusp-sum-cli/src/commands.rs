use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use cusp_sum::arith::{gcd, Sieve};
use cusp_sum::bounds::{
    karatsuba_harness, majorant_build, majorant_target, squarefree_kernel_scan, KernelExponent, MAJORANT_GRID,
};
use cusp_sum::circle::{delta_reconstruct, g_envelopes, DeltaKernel};
use cusp_sum::coefficients::{generate_tau, ingest_form, rankin_selberg_ratio, CuspForm, FormKind, INGEST_TOLERANCE};
use cusp_sum::expsum::{dyadic, linear_monitor, quadratic_monitor, standard_grid, MonitorReport};
use cusp_sum::kloosterman::{weil_ratio, Kloosterman, MAX_MODULUS};
use cusp_sum::summation::{certified_t_cut, mellin_inversion_check, summation_monitor, SmoothCutoff, THETA};
use cusp_sum::voronoi::{voronoi_sides, PsiOptions, TestBump};

use crate::config::{Config, ConfigError};
use crate::report::Report;

pub const COMMANDS: &[&str] = &[
    "coeff",
    "kloosterman",
    "delta",
    "voronoi",
    "bounds",
    "scan",
    "pipeline",
    "all",
];

pub fn run(command: &str, cfg: &Config, seed: u64) -> Result<Report> {
    match command {
        "coeff" => coeff(cfg),
        "kloosterman" => kloosterman(cfg, seed),
        "delta" => delta(cfg),
        "voronoi" => voronoi(cfg),
        "bounds" => bounds(cfg, seed),
        "scan" => scan(cfg, seed),
        "pipeline" => pipeline(cfg),
        "all" => all(cfg, seed),
        other => Err(ConfigError(format!("unknown command '{other}'")).into()),
    }
}

fn load_form(cfg: &Config, default_n: usize) -> Result<CuspForm> {
    match cfg.raw("form").unwrap_or("tau") {
        "tau" => Ok(generate_tau(cfg.get("n-max", default_n)?)?),
        path => {
            let form = ingest_form(path).with_context(|| format!("loading {path}"))?.0;
            match cfg.raw("n-max") {
                Some(_) => Ok(form.truncated(cfg.get("n-max", 0usize)?)?),
                None => Ok(form),
            }
        }
    }
}

fn is_holomorphic(form: &CuspForm) -> bool {
    matches!(form.kind(), FormKind::Holomorphic { .. })
}

fn log2_range(cfg: &Config, lo: f64, hi: f64) -> Result<(u32, u32)> {
    let x_min: f64 = cfg.get("x-min", lo)?;
    let x_max: f64 = cfg.get("x-max", hi)?;
    if !(x_min >= 1.0 && x_max >= x_min) {
        return Err(ConfigError(format!("need 1 ≤ x-min ≤ x-max (got {x_min}, {x_max})")).into());
    }
    Ok((x_min.log2().ceil() as u32, x_max.log2().floor() as u32))
}

/// n, λ(n), the pointwise bound d(n)·n^ϑ and their ratio.
fn coeff(cfg: &Config) -> Result<Report> {
    let form = load_form(cfg, 1000)?;
    let n_max = form.capacity();
    let d = Sieve::new(n_max).divisor_counts();
    let mut r = Report::new("coeff", &["n", "lambda", "divisors", "bound", "ratio"]);
    let mut worst = 0.0f64;
    for n in 1..=n_max {
        let bound = form.pointwise_bound(n, d[n]);
        let ratio = form.lambda(n).abs() / bound;
        worst = worst.max(ratio);
        r.row(vec![
            json!(n),
            json!(form.lambda(n)),
            json!(d[n]),
            json!(bound),
            json!(ratio),
        ]);
    }
    let hecke = form.hecke_report();
    let rs = rankin_selberg_ratio(&form, n_max as f64)?;
    r.note("form", form.kind().to_string());
    r.note("n_max", n_max);
    r.note("max_bound_ratio", worst);
    r.note("max_multiplicative_residual", hecke.max_multiplicative);
    r.note("max_prime_power_residual", hecke.max_prime_power);
    r.note("rankin_selberg_ratio", rs);
    r.require(worst <= 1.0 + 1e-9, || {
        format!("pointwise bound exceeded: max ratio {worst}")
    });
    let residual = hecke.max_multiplicative.max(hecke.max_prime_power);
    r.require(residual <= INGEST_TOLERANCE, || format!("Hecke residual {residual:e}"));
    Ok(r)
}

/// S(m, n; c) for seeded random pairs at every c ≤ c-max.
fn kloosterman(cfg: &Config, seed: u64) -> Result<Report> {
    let c_max: u64 = cfg.get("c-max", 100)?;
    let pairs: usize = cfg.get("pairs", 4)?;
    let m_max: i64 = cfg.get("m-max", 1000)?;
    if c_max == 0 || m_max < 0 {
        return Err(ConfigError("need c-max ≥ 1 and m-max ≥ 0".into()).into());
    }
    if c_max > MAX_MODULUS {
        return Err(cusp_sum::Error::Capacity {
            what: "c-max",
            value: c_max as f64,
            capacity: MAX_MODULUS as f64,
        }
        .into());
    }
    let blocks: Vec<Vec<(i64, i64, u64, f64, f64)>> = (1..=c_max)
        .into_par_iter()
        .map(|c| {
            let k = Kloosterman::new(c)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            (0..pairs)
                .map(|_| {
                    let m = rng.gen_range(-m_max..=m_max);
                    let n = rng.gen_range(-m_max..=m_max);
                    Ok((m, n, c, k.sum(m, n)?, weil_ratio(m, n, c)?))
                })
                .collect()
        })
        .collect::<cusp_sum::Result<_>>()?;
    let mut r = Report::new("kloosterman", &["m", "n", "c", "value", "weil_ratio"]);
    let mut worst = 0.0f64;
    for (m, n, c, v, w) in blocks.into_iter().flatten() {
        worst = worst.max(w);
        r.row(vec![json!(m), json!(n), json!(c), json!(v), json!(w)]);
    }
    r.note("c_max", c_max);
    r.note("max_weil_ratio", worst);
    r.require(worst <= 1.0 + 1e-9, || format!("Weil bound exceeded: ratio {worst}"));
    Ok(r)
}

/// δ(n) rebuilt from the kernel expansion, plus the g(c, ζ) envelope constants.
fn delta(cfg: &Config) -> Result<Report> {
    let c_cut: f64 = cfg.get("c-cut", 40.0)?;
    let n_range: i64 = cfg.get("n-range", 20)?;
    let tol: f64 = cfg.get("tol", 5e-2)?;
    let kernel = DeltaKernel::new(c_cut)?;
    let values: Vec<f64> = (-n_range..=n_range)
        .into_par_iter()
        .map(|n| delta_reconstruct(n, &kernel))
        .collect::<cusp_sum::Result<_>>()?;
    let mut r = Report::new("delta", &["n", "C", "value", "target", "abs_err"]);
    let mut worst = 0.0f64;
    for (n, v) in (-n_range..=n_range).zip(values) {
        let target = if n == 0 { 1.0 } else { 0.0 };
        let err = (v - target).abs();
        worst = worst.max(err);
        r.row(vec![json!(n), json!(c_cut), json!(v), json!(target), json!(err)]);
    }
    let zetas: Vec<f64> = (1..=240).map(|i| 0.05 * i as f64).collect();
    let mut moduli: Vec<u64> = (0..).map(|k| 1u64 << k).take_while(|&c| c as f64 <= c_cut).collect();
    moduli.push(c_cut.floor() as u64);
    moduli.dedup();
    let env = g_envelopes(&kernel, &zetas, &moduli)?;
    r.note("max_abs_err", worst);
    r.note("g_decay_constant", env.decay);
    r.note("g_derivative_constant", env.derivative);
    r.note("g_near_one", env.near_one);
    r.require(worst <= tol, || {
        format!("δ reconstruction error {worst:e} above {tol:e}")
    });
    r.monitor(env.decay <= 100.0 && env.derivative <= 100.0, || {
        format!("g envelope constants {:.3}, {:.3} above 100", env.decay, env.derivative)
    });
    Ok(r)
}

/// Both sides of the twisted Voronoi formula for every (a, c, X).
fn voronoi(cfg: &Config) -> Result<Report> {
    let form = load_form(cfg, 1 << 16)?;
    let tol: f64 = cfg.get("tol", if is_holomorphic(&form) { 1e-6 } else { 1e-3 })?;
    let cases: Vec<(i64, u64, f64)> = {
        let (aa, cc, xx) = (
            cfg.list("a", &[1i64])?,
            cfg.list("c", &[3u64])?,
            cfg.list("x", &[30.0])?,
        );
        let mut v = Vec::new();
        for &x in &xx {
            for &c in &cc {
                for &a in &aa {
                    if c >= 1 && gcd(a, c as i64) == 1 {
                        v.push((a, c, x));
                    }
                }
            }
        }
        v
    };
    if cases.is_empty() {
        return Err(ConfigError("no coprime (a, c) pair".into()).into());
    }
    let mut r = Report::new(
        "voronoi",
        &[
            "a",
            "c",
            "X",
            "lhs_re",
            "lhs_im",
            "rhs_re",
            "rhs_im",
            "abs_err",
            "rel_err",
            "dual_terms",
        ],
    );
    let mut worst = 0.0f64;
    for (a, c, x) in cases {
        let s = voronoi_sides(&form, a, c, &TestBump::new(x), PsiOptions::default())?;
        worst = worst.max(s.rel_err);
        r.row(vec![
            json!(a),
            json!(c),
            json!(x),
            json!(s.lhs.re),
            json!(s.lhs.im),
            json!(s.rhs.re),
            json!(s.rhs.im),
            json!(s.abs_err),
            json!(s.rel_err),
            json!(s.dual_terms),
        ]);
    }
    r.note("form", form.kind().to_string());
    r.note("max_rel_err", worst);
    r.require(worst <= tol, || format!("Voronoi mismatch {worst:e} above {tol:e}"));
    Ok(r)
}

/// lemma, the instance parameters, the measured quantity, its bound and their ratio.
fn bounds(cfg: &Config, seed: u64) -> Result<Report> {
    let lemma = cfg.choice("lemma", &["karatsuba", "majorant", "squarefree", "all"], "all")?;
    let mut r = Report::new("bounds", &["lemma", "param", "measured", "bound", "ratio"]);
    let push = |r: &mut Report, lemma: &str, param: String, measured: f64, bound: f64| {
        r.row(vec![
            json!(lemma),
            json!(param),
            json!(measured),
            json!(bound),
            json!(measured / bound),
        ]);
    };
    if matches!(lemma, "karatsuba" | "all") {
        let trials: usize = cfg.get("trials", 10_000)?;
        let k = karatsuba_harness(seed, trials)?;
        push(&mut r, "karatsuba", format!("trials={trials}"), k.worst_ratio, 1.0);
        r.note("karatsuba_violations", k.violations);
        r.require(k.violations == 0, || format!("{} Karatsuba violations", k.violations));
    }
    if matches!(lemma, "majorant" | "all") {
        for m in [10.0f64, 100.0, 1000.0] {
            let g = majorant_build(m)?;
            let cover = (0..MAJORANT_GRID)
                .map(|i| {
                    let x = i as f64 / MAJORANT_GRID as f64;
                    majorant_target(m, x) / g.value(x)
                })
                .fold(0.0, f64::max);
            let n = g.n_cut() as i64;
            let max_b = (-n..=n).map(|k| g.coefficient(k).abs()).fold(0.0, f64::max);
            push(&mut r, "majorant", format!("M={m};check=cover"), cover, 1.0);
            push(
                &mut r,
                "majorant",
                format!("M={m};check=coefficients"),
                max_b,
                8.0 * m.ln(),
            );
            push(
                &mut r,
                "majorant",
                format!("M={m};check=tail"),
                g.tail_bound(),
                m.powi(-5),
            );
            r.require(
                cover <= 1.0 && max_b <= 8.0 * m.ln() && g.tail_bound() <= m.powi(-5),
                || format!("majorant checks fail at M = {m}"),
            );
        }
    }
    if matches!(lemma, "squarefree" | "all") {
        let mut xs: Vec<u64> = (1..20).map(|k| 1u64 << k).collect();
        xs.push(1_000_000);
        for (name, e) in [
            ("-1/4", KernelExponent::MinusQuarter),
            ("-1/2", KernelExponent::MinusHalf),
        ] {
            for s in squarefree_kernel_scan(&xs, e)? {
                push(
                    &mut r,
                    "squarefree",
                    format!("X={};exponent={name}", s.x),
                    s.sum,
                    s.envelope,
                );
                r.monitor(s.ratio <= 3.0, || {
                    format!("squarefree sum ratio {:.3} at X = {}", s.ratio, s.x)
                });
            }
        }
    }
    Ok(r)
}

fn monitor_summary<R>(r: &mut Report, m: &MonitorReport<R>) {
    r.note("max_ratio", m.max_ratio);
    r.note("max_slope", m.max_slope);
    r.note("exponent_ceiling", m.exponent_ceiling);
    r.note("rows_over", m.over);
    r.note("flagged", m.flagged);
    r.monitor(m.over == 0, || format!("{} rows above the ceiling", m.over));
    r.require(m.flagged == 0, || {
        format!("{} grid points trend above the exponent ceiling", m.flagged)
    });
}

/// Exponential sums over a dyadic X range and an (α, β) grid.
fn scan(cfg: &Config, seed: u64) -> Result<Report> {
    let (lo, hi) = log2_range(cfg, 16.0, 65536.0)?;
    let form = load_form(cfg, 1usize << hi)?;
    let xs = dyadic(lo, hi);
    let mut grid = standard_grid(cfg.get("grid", 50)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.get("random", 0usize)? {
        grid.push((rng.gen(), rng.gen()));
    }
    let mut r;
    if cfg.choice("sum", &["quadratic", "linear"], "quadratic")? == "linear" {
        let alphas: Vec<f64> = grid.iter().map(|g| g.0).collect();
        let m = linear_monitor(&form, &alphas, &xs)?;
        r = Report::new("scan", &["alpha", "X", "abs", "ratio"]);
        for row in &m.rows {
            r.row(vec![json!(row.alpha), json!(row.x), json!(row.abs), json!(row.ratio)]);
        }
        monitor_summary(&mut r, &m);
    } else {
        let m = quadratic_monitor(&form, &grid, &xs)?;
        r = Report::new(
            "scan",
            &[
                "alpha",
                "beta",
                "X",
                "abs",
                "ell",
                "q",
                "branch",
                "small_q_bound",
                "large_q_bound",
                "branch_ratio",
                "ratio",
            ],
        );
        for row in &m.rows {
            r.row(vec![
                json!(row.alpha),
                json!(row.beta),
                json!(row.x),
                json!(row.abs),
                json!(row.ell),
                json!(row.q),
                json!(format!("{:?}", row.branch)),
                json!(row.small_q_bound),
                json!(row.large_q_bound),
                json!(row.branch_ratio),
                json!(row.ratio),
            ]);
        }
        monitor_summary(&mut r, &m);
    }
    r.note("form", form.kind().to_string());
    Ok(r)
}

/// Summation-function monitor per dyadic X plus one certified Mellin inversion.
fn pipeline(cfg: &Config) -> Result<Report> {
    let (lo, hi) = log2_range(cfg, 1.0, 65536.0)?;
    let mellin_x: f64 = cfg.get("mellin-x", 20.0)?;
    let theta: f64 = cfg.get("theta", THETA)?;
    let need = (1usize << hi).max((2.0 * mellin_x).ceil() as usize);
    let form = load_form(cfg, need)?;
    let rep = summation_monitor(&form, &dyadic(lo, hi), theta)?;
    let mut r = Report::new(
        "pipeline",
        &["X", "A", "bound", "ratio", "eta", "t1", "t_top", "windows", "theta"],
    );
    for row in &rep.rows {
        r.row(vec![
            json!(row.x),
            json!(row.a),
            json!(row.bound),
            json!(row.ratio),
            json!(row.eta),
            json!(row.t1),
            json!(row.t_top),
            json!(row.windows),
            json!(rep.theta),
        ]);
    }
    let h = SmoothCutoff::new(0.1)?;
    let n_cut = (2.0 * mellin_x).floor() as usize;
    let lhs: f64 = (1..=n_cut).map(|n| form.lambda(n) * h.value(n as f64 / mellin_x)).sum();
    let t_cut = certified_t_cut(&form, &h, mellin_x, 1e-7 * lhs.abs().max(1e-3))?;
    let m = mellin_inversion_check(&form, &h, mellin_x, t_cut, n_cut)?;
    r.note("form", form.kind().to_string());
    r.note("lambda_delta", rep.lambda_delta);
    r.note("max_ratio", rep.max_ratio);
    r.note("mellin_x", mellin_x);
    r.note("mellin_t_cut", m.t_cut);
    r.note("mellin_rel_error", m.rel_error);
    r.monitor(rep.max_ratio <= 1.0, || {
        format!("summation-function ratio {:.4} above 1", rep.max_ratio)
    });
    r.require(m.rel_error <= 1e-6, || {
        format!("Mellin inversion error {:e}", m.rel_error)
    });
    Ok(r)
}

/// Every command at its defaults, reduced to the summary lines.
fn all(cfg: &Config, seed: u64) -> Result<Report> {
    let mut r = Report::new("all", &["command", "key", "value"]);
    for &command in &COMMANDS[..COMMANDS.len() - 1] {
        let sub = run(command, cfg, seed)?;
        for (k, v) in sub.summary {
            r.row(vec![json!(command), json!(k), v]);
        }
        r.row(vec![json!(command), json!("rows"), json!(sub.rows.len())]);
        r.warnings
            .extend(sub.warnings.into_iter().map(|w| format!("{command}: {w}")));
        r.failures
            .extend(sub.failures.into_iter().map(|f| format!("{command}: {f}")));
    }
    Ok(r)
}
