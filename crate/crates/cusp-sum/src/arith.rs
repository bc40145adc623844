//! Elementary arithmetic: gcds, inverses, factorization and multiplicative
//! functions, plus a smallest-prime-factor sieve for table-scale work.

use num_integer::Integer;

pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// Inverse of `a` modulo `m` (m ≥ 1), if it exists. Result lies in [0, m).
pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    if m == 1 {
        return Some(0);
    }
    let e = a.rem_euclid(m).extended_gcd(&m);
    (e.gcd == 1).then(|| e.x.rem_euclid(m))
}

/// Prime factorization by trial division, as (prime, exponent) pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    for p in [2u64, 3] {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    let mut p = 5u64;
    let mut step = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += step;
        step = 6 - step;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn divisor_count(n: u64) -> u64 {
    factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n).iter().fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// All positive divisors of n, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factorize(n) {
        let len = ds.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                ds.push(ds[i] * pk);
            }
        }
    }
    ds.sort_unstable();
    ds
}

/// Ramanujan sum c_q(n) = Σ_{d | gcd(q,n)} μ(q/d)·d.
pub fn ramanujan_sum(q: u64, n: i64) -> i64 {
    let g = if n == 0 { q } else { (n.unsigned_abs()).gcd(&q) };
    divisors(g).into_iter().map(|d| mobius(q / d) * d as i64).sum()
}

/// Smallest-prime-factor sieve on [0, n].
#[derive(Debug, Clone)]
pub struct Sieve {
    spf: Vec<u32>,
}

impl Sieve {
    pub fn new(n: usize) -> Self {
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Sieve { spf }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    pub fn is_prime(&self, n: usize) -> bool {
        n >= 2 && self.spf[n] as usize == n
    }

    pub fn smallest_factor(&self, n: usize) -> usize {
        self.spf[n] as usize
    }

    pub fn primes(&self) -> impl Iterator<Item = usize> + '_ {
        (2..self.spf.len()).filter(move |&n| self.is_prime(n))
    }

    /// Splits n ≥ 2 as p^a·m with p = spf(n) and gcd(p, m) = 1.
    pub fn split_prime_power(&self, n: usize) -> (usize, u32, usize) {
        let p = self.smallest_factor(n);
        let mut m = n;
        let mut a = 0;
        while m % p == 0 {
            m /= p;
            a += 1;
        }
        (p, a, m)
    }

    /// Divisor-count table d(0..=limit), with d(0) = 0.
    pub fn divisor_counts(&self) -> Vec<u32> {
        let n = self.limit();
        let mut d = vec![0u32; n + 1];
        if n >= 1 {
            d[1] = 1;
        }
        for k in 2..=n {
            let (_, a, m) = self.split_prime_power(k);
            d[k] = (a + 1) * d[m];
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverses() {
        assert_eq!(mod_inverse(3, 7), Some(5));
        assert_eq!(mod_inverse(-3, 7), Some(2));
        assert_eq!(mod_inverse(2, 4), None);
        assert_eq!(mod_inverse(5, 1), Some(0));
    }

    #[test]
    fn multiplicative_functions() {
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(divisor_count(360), 24);
        assert_eq!(euler_phi(36), 12);
        assert_eq!(mobius(30), -1);
        assert_eq!(mobius(12), 0);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
    }

    #[test]
    fn ramanujan_sums_small() {
        assert_eq!(ramanujan_sum(1, 5), 1);
        assert_eq!(ramanujan_sum(6, 0), 2);
        assert_eq!(ramanujan_sum(3, 1), -1);
        assert_eq!(ramanujan_sum(4, 2), -2);
    }

    #[test]
    fn sieve_agrees_with_trial_division() {
        let s = Sieve::new(2000);
        let d = s.divisor_counts();
        for n in 1..=2000u64 {
            assert_eq!(d[n as usize] as u64, divisor_count(n), "n = {n}");
        }
        assert_eq!(s.primes().take(5).collect::<Vec<_>>(), vec![2, 3, 5, 7, 11]);
    }
}
