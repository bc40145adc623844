//! Kloosterman sums S(m, n; c) = Σ_{x mod c, (x,c)=1} e((mx + n x̄)/c).

use num_complex::Complex64;

use crate::arith::{divisor_count, euler_phi, gcd};
use crate::error::{Error, Result};
use crate::numeric::{e, PairwiseSum, TWO_PI};

/// Largest modulus accepted per call.
pub const MAX_MODULUS: u64 = 10_000_000;

/// Units of Z/cZ with their inverses and a table of c-th roots of unity, so
/// that many sums to the same modulus share the O(c) setup.
#[derive(Debug, Clone)]
pub struct Kloosterman {
    c: u64,
    units: Vec<(u32, u32)>,
    roots: Vec<Complex64>,
}

impl Kloosterman {
    pub fn new(c: u64) -> Result<Self> {
        if c == 0 {
            return Err(Error::InvalidInput("modulus c must be ≥ 1".into()));
        }
        if c > MAX_MODULUS {
            return Err(Error::Budget(format!("modulus {c} above {MAX_MODULUS}")));
        }
        let ci = c as i64;
        let mut units = Vec::with_capacity(euler_phi(c) as usize);
        for x in 0..ci {
            if let Some(inv) = crate::arith::mod_inverse(x, ci) {
                units.push((x as u32, inv as u32));
            }
        }
        let roots = (0..c)
            .map(|k| {
                let (s, co) = (TWO_PI * k as f64 / c as f64).sin_cos();
                Complex64::new(co, s)
            })
            .collect();
        Ok(Kloosterman { c, units, roots })
    }

    pub fn modulus(&self) -> u64 {
        self.c
    }

    /// Number of units φ(c).
    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    /// The complex sum before the realness check.
    pub fn sum_complex(&self, m: i64, n: i64) -> Complex64 {
        let c = self.c as i64;
        let (m, n) = (m.rem_euclid(c), n.rem_euclid(c));
        let mut acc = PairwiseSum::new();
        for &(x, xi) in &self.units {
            let k = (m * x as i64 + n * xi as i64) % c;
            acc.add(self.roots[k as usize]);
        }
        acc.value()
    }

    /// S(m, n; c) as a real number. The imaginary residue must stay below
    /// 10⁻⁹·φ(c).
    pub fn sum(&self, m: i64, n: i64) -> Result<f64> {
        let z = self.sum_complex(m, n);
        let limit = 1e-9 * self.units.len() as f64;
        if z.im.abs() > limit {
            return Err(Error::Invariant(format!(
                "S({m},{n};{}) has imaginary part {:.3e}",
                self.c, z.im
            )));
        }
        Ok(z.re)
    }
}

pub fn kloosterman_sum(m: i64, n: i64, c: u64) -> Result<f64> {
    Kloosterman::new(c)?.sum(m, n)
}

/// Definitional evaluation: units and inverses found by a double loop and
/// every phase computed from scratch. Quadratic in c; meant as an oracle.
pub fn kloosterman_brute(m: i64, n: i64, c: u64) -> Complex64 {
    let inverses = brute_inverses(c);
    kloosterman_with_inverses(m, n, c, &inverses)
}

/// Pairs (x, x̄) for every unit x mod c, found by searching all y.
pub fn brute_inverses(c: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for x in 0..c {
        for y in 0..c {
            if (x * y) % c == 1 % c {
                out.push((x, y));
                break;
            }
        }
    }
    out
}

/// Sum over a precomputed unit/inverse list with directly evaluated phases.
pub fn kloosterman_with_inverses(m: i64, n: i64, c: u64, inverses: &[(u64, u64)]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &(x, y) in inverses {
        acc += e((m as f64 * x as f64 + n as f64 * y as f64) / c as f64);
    }
    acc
}

/// |S(m,n;c)| / (d(c)·gcd(m,n,c)^{1/2}·c^{1/2}); the Weil bound says ≤ 1.
pub fn weil_ratio(m: i64, n: i64, c: u64) -> Result<f64> {
    let s = kloosterman_sum(m, n, c)?;
    Ok(weil_normalize(s, m, n, c))
}

pub(crate) fn weil_normalize(s: f64, m: i64, n: i64, c: u64) -> f64 {
    let g = gcd(gcd(m, n), c as i64) as f64;
    s.abs() / (divisor_count(c) as f64 * g.sqrt() * (c as f64).sqrt())
}
