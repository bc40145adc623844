//! Normalized Hecke eigenvalue tables: exact generation for the weight-12
//! discriminant form, Hecke extension from primes, file ingestion with
//! structural validation, and the mean-square (Rankin–Selberg) average.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{factorize, Sieve};
use crate::error::{Error, Result};

/// Hecke residual tolerance for ingested (finite-precision) data.
pub const INGEST_TOLERANCE: f64 = 1e-6;

/// Largest table the exact generator supports: beyond 2^21 the values of
/// τ(n) can leave the i128 range used to hand them back.
pub const TAU_CAPACITY: usize = 1 << 21;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FormKind {
    Holomorphic { weight: u32 },
    Maass { mu: f64, parity: u8 },
}

impl FormKind {
    /// Laplace eigenvalue 1/4 + μ². For holomorphic weight k the analogue
    /// uses the spectral parameter (k−1)/2.
    pub fn laplace_eigenvalue(&self) -> f64 {
        match *self {
            FormKind::Maass { mu, .. } => 0.25 + mu * mu,
            FormKind::Holomorphic { weight } => {
                let r = (weight as f64 - 1.0) / 2.0;
                0.25 + r * r
            }
        }
    }
}

impl fmt::Display for FormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormKind::Holomorphic { weight } => write!(f, "holomorphic(k={weight})"),
            FormKind::Maass { mu, parity } => write!(f, "maass(mu={mu}, parity={parity})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Generated,
    Ingested(PathBuf),
}

/// A Hecke eigenform with its normalized coefficient table.
#[derive(Debug, Clone)]
pub struct CuspForm {
    kind: FormKind,
    // lambda[0] is unused so that lambda[n] = λ(n).
    lambda: Vec<f64>,
    source: Source,
}

impl CuspForm {
    /// Builds a form from λ(1..=N); checks λ(1) = 1 and the pointwise bound.
    pub fn new(kind: FormKind, values: Vec<f64>, source: Source) -> Result<Self> {
        if let FormKind::Holomorphic { weight } = kind {
            if weight < 12 || weight % 2 == 1 {
                return Err(Error::InvalidInput(format!("weight {weight} must be even and ≥ 12")));
            }
        }
        if let FormKind::Maass { mu, parity } = kind {
            if !(mu > 0.0) || parity > 1 {
                return Err(Error::InvalidInput(format!("maass mu = {mu}, parity = {parity}")));
            }
        }
        let first = *values
            .first()
            .ok_or_else(|| Error::InvalidInput("empty coefficient table".into()))?;
        if (first - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(first));
        }
        let mut lambda = Vec::with_capacity(values.len() + 1);
        lambda.push(0.0);
        lambda.extend(values);
        let form = CuspForm { kind, lambda, source };
        form.check_pointwise_bound()?;
        Ok(form)
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    /// Table capacity N.
    pub fn capacity(&self) -> usize {
        self.lambda.len() - 1
    }

    #[inline]
    pub fn lambda(&self, n: usize) -> f64 {
        self.lambda[n]
    }

    /// λ(1..=N) as a slice (index 0 holds λ(1)).
    pub fn coefficients(&self) -> &[f64] {
        &self.lambda[1..]
    }

    pub fn laplace_eigenvalue(&self) -> f64 {
        self.kind.laplace_eigenvalue()
    }

    /// Restriction to n ≤ n_max.
    pub fn truncated(&self, n_max: usize) -> Result<CuspForm> {
        self.require(n_max)?;
        Ok(CuspForm {
            kind: self.kind,
            lambda: self.lambda[..=n_max].to_vec(),
            source: self.source.clone(),
        })
    }

    pub(crate) fn require(&self, n: usize) -> Result<()> {
        if n > self.capacity() {
            return Err(Error::Capacity {
                what: "index",
                value: n as f64,
                capacity: self.capacity() as f64,
            });
        }
        Ok(())
    }

    /// Pointwise bound: d(n) for holomorphic forms, d(n)·n^{7/64} for Maass.
    pub fn pointwise_bound(&self, n: usize, d: u32) -> f64 {
        match self.kind {
            FormKind::Holomorphic { .. } => d as f64,
            FormKind::Maass { .. } => d as f64 * (n as f64).powf(7.0 / 64.0),
        }
    }

    fn check_pointwise_bound(&self) -> Result<()> {
        let d = Sieve::new(self.capacity()).divisor_counts();
        for n in 1..=self.capacity() {
            let bound = self.pointwise_bound(n, d[n]);
            let v = self.lambda[n];
            if !v.is_finite() || v.abs() > bound * (1.0 + 1e-9) {
                return Err(Error::BoundViolation { n, value: v, bound });
            }
        }
        Ok(())
    }

    /// Largest Hecke-relation residuals over the whole table.
    pub fn hecke_report(&self) -> HeckeReport {
        let n = self.capacity();
        let lam = &self.lambda;
        let mut rep = HeckeReport::default();
        for m in 2..=n {
            for k in (m + 1)..=(n / m) {
                if num_integer::gcd(m, k) != 1 {
                    continue;
                }
                rep.coprime_pairs += 1;
                let r = (lam[m * k] - lam[m] * lam[k]).abs();
                if r > rep.max_multiplicative {
                    rep.max_multiplicative = r;
                    rep.worst_multiplicative = (m, k);
                }
            }
        }
        let sieve = Sieve::new(n);
        for p in sieve.primes() {
            let (mut prev, mut cur, mut pj) = (1.0, lam[p], p);
            while pj <= n / p {
                let next = pj * p;
                let r = (lam[p] * cur - lam[next] - prev).abs();
                if r > rep.max_prime_power {
                    rep.max_prime_power = r;
                    rep.worst_prime_power = next;
                }
                prev = cur;
                cur = lam[next];
                pj = next;
            }
        }
        rep
    }

    /// Checks the Hecke report against a tolerance.
    pub fn validate_hecke(&self, tolerance: f64) -> Result<HeckeReport> {
        let rep = self.hecke_report();
        if rep.max_multiplicative > tolerance {
            let (m, k) = rep.worst_multiplicative;
            return Err(Error::HeckeResidual {
                residual: rep.max_multiplicative,
                at: format!("(m, n) = ({m}, {k})"),
                tolerance,
            });
        }
        if rep.max_prime_power > tolerance {
            return Err(Error::HeckeResidual {
                residual: rep.max_prime_power,
                at: format!("n = {}", rep.worst_prime_power),
                tolerance,
            });
        }
        Ok(rep)
    }
}

/// Worst residuals of λ(m)λ(n) = λ(mn) (coprime) and of the prime-power
/// recursion λ(p)λ(pʲ) = λ(pʲ⁺¹) + λ(pʲ⁻¹).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HeckeReport {
    pub max_multiplicative: f64,
    pub worst_multiplicative: (usize, usize),
    pub max_prime_power: f64,
    pub worst_prime_power: usize,
    pub coprime_pairs: usize,
}

// ---------------------------------------------------------------------------
// Exact τ(n) via multi-modular NTT.

const NTT_PRIMES: [u64; 5] = [998_244_353, 167_772_161, 469_762_049, 754_974_721, 2_013_265_921];

#[derive(Clone, Copy)]
struct Zp {
    p: u64,
    pinv: f64,
}

impl Zp {
    fn new(p: u64) -> Self {
        Zp {
            p,
            pinv: 1.0 / p as f64,
        }
    }

    #[inline]
    fn mul(self, a: u64, b: u64) -> u64 {
        let x = a * b;
        let q = (a as f64 * b as f64 * self.pinv) as u64;
        let r = x as i64 - (q * self.p) as i64;
        let p = self.p as i64;
        (if r < 0 {
            r + p
        } else if r >= p {
            r - p
        } else {
            r
        }) as u64
    }

    fn pow(self, mut b: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    fn primitive_root(self) -> u64 {
        let factors = factorize(self.p - 1);
        (2..)
            .find(|&g| factors.iter().all(|&(f, _)| self.pow(g, (self.p - 1) / f) != 1))
            .expect("prime modulus has a primitive root")
    }

    fn ntt(self, a: &mut [u64], invert: bool) {
        let n = a.len();
        let mut j = 0;
        for i in 1..n {
            let mut bit = n >> 1;
            while j & bit != 0 {
                j ^= bit;
                bit >>= 1;
            }
            j |= bit;
            if i < j {
                a.swap(i, j);
            }
        }
        let g = self.primitive_root();
        let mut len = 2;
        while len <= n {
            let mut w = self.pow(g, (self.p - 1) / len as u64);
            if invert {
                w = self.pow(w, self.p - 2);
            }
            let half = len / 2;
            let mut tw = Vec::with_capacity(half);
            let mut x = 1;
            for _ in 0..half {
                tw.push(x);
                x = self.mul(x, w);
            }
            for chunk in a.chunks_mut(len) {
                let (lo, hi) = chunk.split_at_mut(half);
                for k in 0..half {
                    let u = lo[k];
                    let v = self.mul(hi[k], tw[k]);
                    lo[k] = if u + v >= self.p { u + v - self.p } else { u + v };
                    hi[k] = if u >= v { u - v } else { u + self.p - v };
                }
            }
            len <<= 1;
        }
        if invert {
            let ninv = self.pow(n as u64, self.p - 2);
            for x in a.iter_mut() {
                *x = self.mul(*x, ninv);
            }
        }
    }

    fn square_truncated(self, a: &[u64], keep: usize) -> Vec<u64> {
        let size = (2 * a.len()).next_power_of_two();
        let mut f = a.to_vec();
        f.resize(size, 0);
        self.ntt(&mut f, false);
        for x in f.iter_mut() {
            *x = self.mul(*x, *x);
        }
        self.ntt(&mut f, true);
        f.truncate(keep);
        f
    }
}

/// Exact τ(1..=n) from q·∏(1−qᵐ)²⁴. Entry 0 of the result is 0.
///
/// ∏(1−qᵐ)³ is Jacobi's sparse series Σ(−1)ᵏ(2k+1)q^{k(k+1)/2}; its square is
/// formed directly, and two NTT squarings per prime finish the 8th power.
/// Five NTT primes with Garner reconstruction recover the signed integers.
pub fn tau_integers(n: usize) -> Result<Vec<i128>> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be ≥ 1".into()));
    }
    if n > TAU_CAPACITY {
        return Err(Error::Overflow(format!(
            "N = {n} exceeds the exact-τ capacity {TAU_CAPACITY}"
        )));
    }
    let mut jacobi = Vec::new();
    let mut k = 0i64;
    while (k * (k + 1) / 2) < n as i64 {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        jacobi.push(((k * (k + 1) / 2) as usize, sign * (2 * k + 1)));
        k += 1;
    }
    let mut sq = vec![0i64; n];
    for &(i, a) in &jacobi {
        for &(j, b) in &jacobi {
            if i + j < n {
                sq[i + j] += a * b;
            }
        }
    }
    let residues: Vec<Vec<u64>> = NTT_PRIMES
        .iter()
        .map(|&p| {
            let z = Zp::new(p);
            let a: Vec<u64> = sq.iter().map(|&v| v.rem_euclid(p as i64) as u64).collect();
            let b = z.square_truncated(&a, n);
            z.square_truncated(&b, n)
        })
        .collect();

    // Garner: x = d0 + p0(d1 + p1(d2 + …)), then map to the symmetric range.
    let k = NTT_PRIMES.len();
    let mut inv = vec![vec![0u64; k]; k];
    for i in 0..k {
        for j in 0..i {
            let z = Zp::new(NTT_PRIMES[i]);
            inv[j][i] = z.pow(NTT_PRIMES[j] % NTT_PRIMES[i], NTT_PRIMES[i] - 2);
        }
    }
    let modulus: BigInt = NTT_PRIMES.iter().map(|&p| BigInt::from(p)).product();
    let half = &modulus >> 1;
    let mut out = vec![0i128; n + 1];
    let mut digits = vec![0u64; k];
    for idx in 0..n {
        for i in 0..k {
            let z = Zp::new(NTT_PRIMES[i]);
            let mut x = residues[i][idx];
            for j in 0..i {
                let diff = (x + NTT_PRIMES[i] - digits[j] % NTT_PRIMES[i]) % NTT_PRIMES[i];
                x = z.mul(diff, inv[j][i]);
            }
            digits[i] = x;
        }
        let mut acc = BigInt::zero();
        for i in (0..k).rev() {
            acc = acc * NTT_PRIMES[i] + digits[i];
        }
        if acc > half {
            acc -= &modulus;
        }
        out[idx + 1] = acc
            .to_i128()
            .ok_or_else(|| Error::Overflow(format!("τ({}) does not fit in i128", idx + 1)))?;
    }
    Ok(out)
}

/// Normalized coefficients of the weight-12 discriminant form, λ(n) = τ(n)/n^{11/2}.
pub fn generate_tau(n: usize) -> Result<CuspForm> {
    let tau = tau_integers(n)?;
    let values = (1..=n).map(|m| tau[m] as f64 / (m as f64).powf(5.5)).collect();
    CuspForm::new(FormKind::Holomorphic { weight: 12 }, values, Source::Generated)
}

fn extend_with<T: Copy>(
    primes: &HashMap<usize, T>,
    n: usize,
    one: T,
    step: impl Fn(usize, T, T, T) -> Option<T>,
    mul: impl Fn(T, T) -> Option<T>,
) -> Result<Vec<T>> {
    let sieve = Sieve::new(n.max(1));
    let mut table = vec![one; n + 1];
    for k in 2..=n {
        let (p, a, m) = sieve.split_prime_power(k);
        let pa = k / m;
        let overflow = || Error::Overflow(format!("Hecke extension at n = {k}"));
        table[k] = if m == 1 {
            let lp = *primes.get(&p).ok_or(Error::MissingPrime(p))?;
            if a == 1 {
                lp
            } else {
                let prev2 = if a == 2 { one } else { table[pa / p / p] };
                step(p, lp, table[pa / p], prev2).ok_or_else(overflow)?
            }
        } else {
            mul(table[pa], table[m]).ok_or_else(overflow)?
        };
    }
    Ok(table)
}

/// Fills λ(1..=n) from normalized prime values via multiplicativity and
/// λ(pʲ⁺¹) = λ(p)λ(pʲ) − λ(pʲ⁻¹). Entry 0 of the result is unused.
pub fn hecke_extend(prime_values: &HashMap<usize, f64>, n: usize) -> Result<Vec<f64>> {
    let mut t = extend_with(
        prime_values,
        n,
        1.0,
        |_, lp, cur, prev| Some(lp * cur - prev),
        |a, b| Some(a * b),
    )?;
    t[0] = 0.0;
    Ok(t)
}

/// Integer Hecke extension a(pʲ⁺¹) = a(p)a(pʲ) − p^{k−1}a(pʲ⁻¹) for
/// unnormalized coefficients of weight k.
pub fn hecke_extend_integral(prime_values: &HashMap<usize, i128>, n: usize, weight: u32) -> Result<Vec<i128>> {
    let mut t = extend_with(
        prime_values,
        n,
        1i128,
        |p, lp, cur, prev| {
            let pk = (p as i128).checked_pow(weight - 1)?;
            lp.checked_mul(cur)?.checked_sub(pk.checked_mul(prev)?)
        },
        |a, b| a.checked_mul(b),
    )?;
    t[0] = 0;
    Ok(t)
}

/// Parses the coefficient-file format (see [`ingest_form`]).
pub fn parse_form(text: &str, source: Source) -> Result<CuspForm> {
    let mut kind_tag: Option<String> = None;
    let mut mu = None;
    let mut weight = None;
    let mut parity = None;
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: String| Error::Malformed { line: line_no, reason };
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default();
        let val = parts
            .next()
            .ok_or_else(|| bad(format!("expected two fields in {line:?}")))?;
        if parts.next().is_some() {
            return Err(bad(format!("trailing fields in {line:?}")));
        }
        if key.as_bytes()[0].is_ascii_digit() {
            let n: usize = key.parse().map_err(|_| bad(format!("bad index {key:?}")))?;
            if n != values.len() + 1 {
                return Err(bad(format!(
                    "index {n} out of sequence (expected {})",
                    values.len() + 1
                )));
            }
            let v: f64 = val.parse().map_err(|_| bad(format!("bad value {val:?}")))?;
            values.push(v);
            continue;
        }
        if !values.is_empty() {
            return Err(bad(format!("header key {key:?} after coefficient data")));
        }
        match key {
            "kind" => kind_tag = Some(val.to_string()),
            "mu" => mu = Some(val.parse::<f64>().map_err(|_| bad(format!("bad mu {val:?}")))?),
            "weight" => weight = Some(val.parse::<u32>().map_err(|_| bad(format!("bad weight {val:?}")))?),
            "parity" => match val {
                "0" => parity = Some(0),
                "1" => parity = Some(1),
                _ => return Err(bad(format!("parity must be 0 or 1, got {val:?}"))),
            },
            _ => return Err(bad(format!("unknown header key {key:?}"))),
        }
    }
    let header = |reason: &str| Error::Malformed {
        line: 0,
        reason: reason.to_string(),
    };
    let kind = match kind_tag.as_deref() {
        Some("maass") => FormKind::Maass {
            mu: mu.ok_or_else(|| header("maass header needs mu"))?,
            parity: parity.ok_or_else(|| header("maass header needs parity"))?,
        },
        Some("holomorphic") => FormKind::Holomorphic {
            weight: weight.ok_or_else(|| header("holomorphic header needs weight"))?,
        },
        Some(other) => return Err(header(&format!("unknown kind {other:?}"))),
        None => return Err(header("missing kind line")),
    };
    if values.is_empty() {
        return Err(header("no coefficient lines"));
    }
    CuspForm::new(kind, values, source)
}

/// Loads a coefficient file and checks every table invariant, including
/// Hecke residuals against [`INGEST_TOLERANCE`].
///
/// Format: `kind maass|holomorphic`, `mu <x>` or `weight <k>`, `parity 0|1`
/// (Maass only), then `n λ(n)` lines with n = 1, 2, 3, …; `#` starts a comment.
pub fn ingest_form(path: impl AsRef<Path>) -> Result<(CuspForm, HeckeReport)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let form = parse_form(&text, Source::Ingested(path.to_path_buf()))?;
    let report = form.validate_hecke(INGEST_TOLERANCE)?;
    Ok((form, report))
}

/// (1/X)·Σ_{n≤X} λ(n)².
pub fn rankin_selberg_ratio(form: &CuspForm, x: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(Error::InvalidInput(format!("X = {x} must be ≥ 1")));
    }
    let n = x.floor() as usize;
    form.require(n)?;
    let mut acc = crate::numeric::CompensatedSum::new();
    for k in 1..=n {
        acc.add(num_complex::Complex64::new(form.lambda(k).powi(2), 0.0));
    }
    Ok(acc.value().re / x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_tau_values() {
        let t = tau_integers(12).unwrap();
        assert_eq!(
            &t[1..],
            &[1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920, 534612, -370944]
        );
    }

    #[test]
    fn tau_six_is_product() {
        let t = tau_integers(6).unwrap();
        assert_eq!(t[6], t[2] * t[3]);
    }

    #[test]
    fn hecke_extend_small_cases() {
        let primes: HashMap<usize, f64> = [(2, -0.7), (3, 0.4), (5, 1.1), (7, -0.2), (11, 0.3)]
            .into_iter()
            .collect();
        let t = hecke_extend(&primes, 12).unwrap();
        assert_eq!(t[1], 1.0);
        assert!((t[4] - (0.49 - 1.0)).abs() < 1e-15);
        assert!((t[12] - t[4] * t[3]).abs() < 1e-15);
        assert!(matches!(hecke_extend(&primes, 13), Err(Error::MissingPrime(13))));
    }

    #[test]
    fn parse_minimal_and_rejects() {
        let f = parse_form("kind holomorphic\nweight 12\n1 1.0\n", Source::Generated).unwrap();
        assert_eq!(f.capacity(), 1);
        let err = parse_form("kind maass\nmu 9.5\nparity 1\n1 0.9\n", Source::Generated);
        assert!(matches!(err, Err(Error::NotNormalized(_))));
        let err = parse_form("kind maass\nmu 9.5\n1 1\n", Source::Generated);
        assert!(matches!(err, Err(Error::Malformed { .. })));
        let err = parse_form("kind holomorphic\nweight 12\n1 1\n3 0.1\n", Source::Generated);
        assert!(matches!(err, Err(Error::Malformed { .. })));
    }

    #[test]
    fn rankin_selberg_trivial() {
        let f = generate_tau(16).unwrap();
        assert_eq!(rankin_selberg_ratio(&f, 1.0).unwrap(), 1.0);
        assert!(rankin_selberg_ratio(&f, 17.0).is_err());
    }
}
