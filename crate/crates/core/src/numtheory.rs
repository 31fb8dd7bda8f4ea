//! Integer-theoretic substrate: factorization, breakpoints, pair classes and
//! CRT, all phrased against a modulus carried as its prime factorization.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumTheoryError {
    #[error("{0} is below 2 and has no prime factorization")]
    TooSmall(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime factors must be strictly increasing (saw {0} after {1})")]
    Unsorted(u64, u64),
    #[error("exponent of {0} must be at least 1")]
    ZeroExponent(u64),
    #[error("the modulus value is implicit; this operation needs it explicitly")]
    ImplicitValue,
    #[error("({modulus}, {n}) is not a pair: gcd(N, n) = 1")]
    NotAPair { modulus: u64, n: u64 },
    #[error("n = {n} is outside 0..{modulus}")]
    OutOfRange { modulus: u64, n: u64 },
    #[error("duplicate CRT modulus {0}")]
    DuplicateModulus(u64),
    #[error("residue {residue} is not reduced modulo {modulus}")]
    ResidueOutOfRange { residue: u64, modulus: u64 },
}

/// Deterministic trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// The first `count` primes that are `>= start`, ascending.
pub fn primes_from(start: u64, count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut p = start.max(2);
    while out.len() < count {
        if is_prime(p) {
            out.push(p);
        }
        p += 1;
    }
    out
}

/// An integer carried together with its distinct prime factors.
///
/// The value itself may be left implicit, in which case every divisibility
/// question is answered prime by prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredInt {
    factors: Vec<(u64, u32)>,
    value: Option<BigUint>,
}

impl FactoredInt {
    /// Builds from `(prime, exponent)` pairs. With `materialize` the product
    /// is computed and stored.
    pub fn from_factors(factors: Vec<(u64, u32)>, materialize: bool) -> Result<Self, NumTheoryError> {
        if factors.is_empty() {
            return Err(NumTheoryError::TooSmall(1));
        }
        for (i, &(p, e)) in factors.iter().enumerate() {
            if !is_prime(p) {
                return Err(NumTheoryError::NotPrime(p));
            }
            if e == 0 {
                return Err(NumTheoryError::ZeroExponent(p));
            }
            if i > 0 && factors[i - 1].0 >= p {
                return Err(NumTheoryError::Unsorted(p, factors[i - 1].0));
            }
        }
        let value = materialize.then(|| {
            factors
                .iter()
                .fold(BigUint::one(), |acc, &(p, e)| acc * BigUint::from(p).pow(e))
        });
        Ok(FactoredInt { factors, value })
    }

    /// Squarefree product of the given distinct primes, value left implicit.
    pub fn from_primes(primes: &[u64]) -> Result<Self, NumTheoryError> {
        let mut sorted = primes.to_vec();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(NumTheoryError::DuplicateModulus(w[0]));
        }
        Self::from_factors(sorted.into_iter().map(|p| (p, 1)).collect(), false)
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn value(&self) -> Option<&BigUint> {
        self.value.as_ref()
    }

    pub fn value_u64(&self) -> Option<u64> {
        self.value.as_ref().and_then(|v| v.to_u64())
    }

    /// Explicit value as `u64`, or an error when implicit or too large.
    pub fn require_u64(&self) -> Result<u64, NumTheoryError> {
        self.value_u64().ok_or(NumTheoryError::ImplicitValue)
    }

    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    pub fn smallest_prime(&self) -> u64 {
        self.factors[0].0
    }

    /// True iff no prime of this modulus divides `t`.
    pub fn coprime_to(&self, t: u64) -> bool {
        self.primes().all(|p| t % p != 0)
    }

    pub fn coprime_to_big(&self, t: &BigUint) -> bool {
        self.primes().all(|p| !(t % p).is_zero())
    }

    /// Residues of `n` modulo each prime, in factor order.
    pub fn residues_of(&self, n: &BigUint) -> Vec<u64> {
        self.primes()
            .map(|p| (n % p).to_u64().expect("residue below a u64 prime"))
            .collect()
    }

    /// Whether `a*n + b` is coprime to this modulus, given `n`'s residues.
    pub fn coprime_affine(&self, residues: &[u64], a: u64, b: u64) -> bool {
        self.primes().zip(residues).all(|(p, &r)| {
            let v = ((a % p) as u128 * r as u128 + (b % p) as u128) % p as u128;
            v != 0
        })
    }
}

impl std::fmt::Display for FactoredInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|&(p, e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Trial-division factorization.
pub fn factorize(n: u64) -> Result<FactoredInt, NumTheoryError> {
    if n < 2 {
        return Err(NumTheoryError::TooSmall(n));
    }
    let mut factors = Vec::new();
    let mut rest = n;
    let mut d = 2u64;
    while d.saturating_mul(d) <= rest {
        if rest % d == 0 {
            let mut e = 0;
            while rest % d == 0 {
                rest /= d;
                e += 1;
            }
            factors.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Ok(FactoredInt {
        factors,
        value: Some(BigUint::from(n)),
    })
}

/// Euler's totient from the factorization. Requires an explicit value.
pub fn euler_phi(modulus: &FactoredInt) -> Result<u64, NumTheoryError> {
    let n = modulus.require_u64()?;
    Ok(modulus.primes().fold(n, |acc, p| acc / p * (p - 1)))
}

/// Number of distinct primes and the least prime.
pub fn omega_p1(modulus: &FactoredInt) -> (usize, u64) {
    (modulus.omega(), modulus.smallest_prime())
}

/// The integers `0 = n_0 < n_1 < ... < n_psi = N` sharing a factor with `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Breakpoints {
    points: Vec<u64>,
}

impl Breakpoints {
    pub fn points(&self) -> &[u64] {
        &self.points
    }

    /// `psi(N) = N - phi(N)`.
    pub fn psi(&self) -> usize {
        self.points.len() - 1
    }

    /// Consecutive `(n_l, n_{l+1})` pairs.
    pub fn regions(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    /// The breakpoint following `n`, if `n` is one.
    pub fn next_after(&self, n: u64) -> Option<u64> {
        let i = self.points.binary_search(&n).ok()?;
        self.points.get(i + 1).copied()
    }
}

pub fn psi_breakpoints(modulus: &FactoredInt) -> Result<Breakpoints, NumTheoryError> {
    let n = modulus.require_u64()?;
    let points = (0..=n).filter(|&m| !modulus.coprime_to(m)).collect();
    Ok(Breakpoints { points })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairClass {
    Good,
    Bad,
}

impl PairClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PairClass::Good => "good",
            PairClass::Bad => "bad",
        }
    }
}

pub fn classify_pair(modulus: &FactoredInt, n: u64) -> Result<PairClass, NumTheoryError> {
    if let Some(v) = modulus.value_u64() {
        if n >= v {
            return Err(NumTheoryError::OutOfRange { modulus: v, n });
        }
    }
    if modulus.coprime_to(n) {
        return Err(NumTheoryError::NotAPair {
            modulus: modulus.value_u64().unwrap_or(0),
            n,
        });
    }
    Ok(if modulus.coprime_to(n + 1) {
        PairClass::Good
    } else {
        PairClass::Bad
    })
}

/// Modular inverse of `a` modulo prime-or-coprime `m`, if it exists.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128 % m as i128).extended_gcd(&(m as i128));
    (e.gcd == 1).then(|| e.x.rem_euclid(m as i128) as u64)
}

/// The residue `r` modulo `p` with `p | a*r + b`, when `p` does not divide `a`.
pub fn affine_root(a: u64, b: u64, p: u64) -> Option<u64> {
    let inv = mod_inverse(a % p, p)?;
    let neg_b = (p - b % p) % p;
    Some(((neg_b as u128 * inv as u128) % p as u128) as u64)
}

/// Solves `n = r_i (mod p_i)` for pairwise distinct primes `p_i`.
pub fn crt_solve(residues: &[(u64, u64)]) -> Result<BigUint, NumTheoryError> {
    let mut seen: Vec<u64> = residues.iter().map(|&(_, p)| p).collect();
    seen.sort_unstable();
    if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
        return Err(NumTheoryError::DuplicateModulus(w[0]));
    }
    let mut n = BigUint::zero();
    let mut m = BigUint::one();
    for &(r, p) in residues {
        if !is_prime(p) {
            return Err(NumTheoryError::NotPrime(p));
        }
        if r >= p {
            return Err(NumTheoryError::ResidueOutOfRange { residue: r, modulus: p });
        }
        // n + m*t = r (mod p)  =>  t = (r - n) * m^{-1} (mod p)
        let n_mod = (&n % p).to_u64().expect("reduced");
        let m_mod = (&m % p).to_u64().expect("reduced");
        let inv = mod_inverse(m_mod, p).expect("distinct primes are coprime");
        let diff = (r + p - n_mod) % p;
        let t = (diff as u128 * inv as u128 % p as u128) as u64;
        n += &m * t;
        m *= p;
    }
    Ok(n)
}
