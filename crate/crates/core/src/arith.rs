//! Totients, gcds of integer vectors and the coprime counting functions.

use crate::error::{Error, Result};
use num_integer::Integer;

/// Largest sieve accepted by default (two u32 arrays of this length).
pub const DEFAULT_SIEVE_BUDGET: u64 = 200_000_000;

#[derive(Clone, Debug)]
pub struct TotientSieve {
    limit: u64,
    phi: Vec<u32>,
    spf: Vec<u32>,
}

impl TotientSieve {
    pub fn new(limit: u64) -> Result<TotientSieve> {
        TotientSieve::with_budget(limit, DEFAULT_SIEVE_BUDGET)
    }

    pub fn with_budget(limit: u64, budget: u64) -> Result<TotientSieve> {
        if limit == 0 {
            return Err(Error::Invalid("sieve limit must be positive".into()));
        }
        if limit > budget || limit >= u32::MAX as u64 {
            return Err(Error::LimitTooLarge { limit, budget });
        }
        let n = limit as usize;
        let mut phi = vec![0u32; n + 1];
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        phi[1] = 1;
        if n >= 1 {
            spf[1] = 1;
        }
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                phi[i] = i as u32 - 1;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let ip = i * p as usize;
                if p > si || ip > n {
                    break;
                }
                spf[ip] = p;
                phi[ip] = if p == si { phi[i] * p } else { phi[i] * (p - 1) };
            }
        }
        Ok(TotientSieve { limit, phi, spf })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn phi(&self, n: u64) -> u64 {
        self.phi[n as usize] as u64
    }

    pub fn smallest_prime_factor(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn factor(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            n /= p;
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// Square-free divisors of n with their Möbius signs.
    pub fn mobius_divisors(&self, n: u64) -> Vec<(u64, i64)> {
        mobius_from_primes(self.factor(n).iter().map(|f| f.0))
    }
}

pub fn totient_sieve(limit: u64) -> Result<TotientSieve> {
    TotientSieve::new(limit)
}

pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n).iter().fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

fn mobius_from_primes(primes: impl Iterator<Item = u64>) -> Vec<(u64, i64)> {
    let mut out = vec![(1u64, 1i64)];
    for p in primes {
        let k = out.len();
        for i in 0..k {
            let (d, mu) = out[i];
            out.push((d * p, -mu));
        }
    }
    out
}

/// Square-free divisors of n with their Möbius signs.
pub fn mobius_divisors(n: u64) -> Vec<(u64, i64)> {
    mobius_from_primes(factorize(n).iter().map(|f| f.0))
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let k = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..k {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Jordan totient J_m(r) = #{(p_1..p_m) ∈ [0,r)^m : gcd(p_1,..,p_m,r) = 1}.
pub fn count_simultaneous(m: u32, r: u64) -> Result<u128> {
    if m == 0 || r == 0 {
        return Err(Error::Invalid("m and r must be positive".into()));
    }
    let mut acc: u128 = 1;
    for (p, e) in factorize(r) {
        let pm = (p as u128).checked_pow(m).ok_or(Error::Overflow("count_simultaneous"))?;
        let lead = pm.checked_pow(e - 1).ok_or(Error::Overflow("count_simultaneous"))?;
        acc = acc
            .checked_mul(lead.checked_mul(pm - 1).ok_or(Error::Overflow("count_simultaneous"))?)
            .ok_or(Error::Overflow("count_simultaneous"))?;
    }
    Ok(acc)
}

pub fn gcd_slice(v: &[i64]) -> u64 {
    v.iter().fold(0u64, |g, &x| g.gcd(&x.unsigned_abs()))
}

/// The coprimality used for linear-form counts: gcd of all m + n integers is 1.
/// p = 0 therefore qualifies exactly when gcd(q) = 1.
pub fn jointly_coprime(p: &[i64], q: &[i64]) -> bool {
    gcd_slice(q).gcd(&gcd_slice(p)) == 1
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntVector {
    coords: Vec<i64>,
    sup: u64,
    gcd: u64,
}

impl IntVector {
    pub fn new(coords: Vec<i64>) -> IntVector {
        let sup = coords.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
        let gcd = gcd_slice(&coords);
        IntVector { coords, sup, gcd }
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn sup_norm(&self) -> u64 {
        self.sup
    }

    pub fn is_zero(&self) -> bool {
        self.sup == 0
    }

    /// gcd of the components; `None` for the zero vector.
    pub fn gcd(&self) -> Option<u64> {
        if self.gcd == 0 {
            None
        } else {
            Some(self.gcd)
        }
    }

    pub fn is_primitive(&self) -> bool {
        self.gcd == 1
    }
}

/// N*_n(q) = #{0 < p ≤ |q| : gcd(p, q_1..q_n) = 1}, using gcd(p, q) = gcd(p, g).
pub fn count_dual(q: &IntVector) -> Result<u64> {
    let g = q.gcd().ok_or(Error::ZeroVector)?;
    Ok(count_dual_parts(q.sup_norm(), g))
}

pub fn count_dual_parts(norm: u64, g: u64) -> u64 {
    let s: i64 = mobius_divisors(g).iter().map(|&(d, mu)| mu * (norm / d) as i64).sum();
    s as u64
}

/// N_{n,m}(q) = #{p ∈ ℤ^m : |p| ≤ |q|, gcd(p, q) = 1}.
pub fn count_systems(q: &IntVector, m: u32) -> Result<u128> {
    let g = q.gcd().ok_or(Error::ZeroVector)?;
    count_systems_parts(q.sup_norm(), g, m)
}

pub fn count_systems_parts(norm: u64, g: u64, m: u32) -> Result<u128> {
    let mut s: i128 = 0;
    for (d, mu) in mobius_divisors(g) {
        let side = 2 * (norm / d) as i128 + 1;
        let t = side.checked_pow(m).ok_or(Error::Overflow("count_systems"))?;
        s = s.checked_add(mu as i128 * t).ok_or(Error::Overflow("count_systems"))?;
    }
    Ok(s as u128)
}

/// Number of q ∈ ℤⁿ with |q| = r.
pub fn shell_count(n: u32, r: u64) -> Result<u128> {
    if r == 0 {
        return Ok(1);
    }
    let a = (2 * r as u128 + 1).checked_pow(n).ok_or(Error::Overflow("shell_count"))?;
    let b = (2 * r as u128 - 1).checked_pow(n).ok_or(Error::Overflow("shell_count"))?;
    Ok(a - b)
}

/// Number of primitive q ∈ ℤⁿ with |q| = r, by Möbius inversion over shells.
pub fn primitive_shell_count(n: u32, r: u64) -> Result<u128> {
    if n == 0 || r == 0 {
        return Err(Error::Invalid("n and r must be positive".into()));
    }
    let mut s: i128 = 0;
    for (d, mu) in mobius_divisors(r) {
        s += mu as i128 * shell_count(n, r / d)? as i128;
    }
    Ok(s as u128)
}

/// Visit every q ∈ ℤⁿ with |q| = r (r ≥ 1).
pub fn for_each_shell_vector(n: usize, r: i64, mut f: impl FnMut(&[i64])) {
    let mut buf = vec![0i64; n];
    for k in 0..n {
        for sign in [-1i64, 1] {
            buf[k] = sign * r;
            fill(&mut buf, 0, k, r, &mut f);
        }
    }

    // positions before k range over (−r, r), after k over [−r, r]
    fn fill(buf: &mut [i64], i: usize, k: usize, r: i64, f: &mut impl FnMut(&[i64])) {
        if i == buf.len() {
            f(buf);
            return;
        }
        if i == k {
            fill(buf, i + 1, k, r, f);
            return;
        }
        let bound = if i < k { r - 1 } else { r };
        for v in -bound..=bound {
            buf[i] = v;
            fill(buf, i + 1, k, r, f);
        }
    }
}
