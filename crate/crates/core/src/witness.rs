//! Explicit levels `N` with positive or large complexity.
//!
//! Two constructions live here. [`build_c1_witness`] finds, by CRT, a bad pair
//! whose region carries the three-five configuration with one pole covered,
//! giving `c(N) >= 1`. [`build_q_witness`] assembles a level with many large
//! prime factors for which the family `D^(j)` (level `Aq + j`, offset `q`,
//! `1 <= j <= q - 1`) sits on the boundary of a single region, so that the
//! pole of `D^(q-1)` is covered `q - 2` times.

use num_bigint::BigUint;
use num_integer::Integer;
use thiserror::Error;

use crate::complexity::pole_complexity;
use crate::geometry::{compare_quadratic, Disk, QuadraticReal};
use crate::numtheory::{affine_root, crt_solve, is_prime, primes_from, FactoredInt, NumTheoryError};
use crate::rational::Rational;
use crate::region::{compute_boundary_set_in, Frame, Region, RegionError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("q = {0} is not a prime >= 3")]
    BadQ(u64),
    #[error("need {needed} primes >= {min}, got {got}")]
    InsufficientPrimes { needed: usize, min: u64, got: usize },
    #[error(transparent)]
    NumTheory(#[from] NumTheoryError),
    #[error(transparent)]
    Region(#[from] RegionError),
}

/// The constants attached to a prime `q >= 3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessConstants {
    pub q: u64,
    pub a: u64,
    pub a_prime: u64,
    /// `(level, offset)` of the family disks, `j = 1..q-1` in order.
    pub s1: Vec<(u64, u64)>,
    /// Coprime `(a, b)` with `0 <= b <= a <= A'`, minus `S1`.
    pub s2: Vec<(u64, u64)>,
    pub b: usize,
    pub c_prime: u64,
    pub c: u64,
}

impl WitnessConstants {
    /// `q^6/2 + 3q^4 - 3q^3/2 + 9q^2/2 - 11q/2 + 3`.
    pub fn b_bound(&self) -> Rational {
        let q = self.q as i128;
        Rational::new(q.pow(6) + 6 * q.pow(4) - 3 * q.pow(3) + 9 * q * q - 11 * q + 6, 2)
    }

    /// `q^6/2 + 3q^4 - 2q^3 + 9q^2/2 - 7q + 3`.
    pub fn c_bound(&self) -> Rational {
        let q = self.q as i128;
        Rational::new(q.pow(6) + 6 * q.pow(4) - 4 * q.pow(3) + 9 * q * q - 14 * q + 6, 2)
    }

    pub fn bounds_hold(&self) -> bool {
        Rational::from_integer(self.b as i128) <= self.b_bound()
            && Rational::from_integer(self.c as i128) <= self.c_bound()
    }
}

/// `ceil(x / sqrt(d))` for positive integers, decided exactly.
fn ceil_div_sqrt(x: u64, d: u64) -> u64 {
    // x / sqrt(d) = (x / d) * sqrt(d)
    let v = QuadraticReal::new(Rational::zero(), Rational::new(x as i128, d as i128), Rational::from_integer(d as i128));
    let mut t = (x as f64 / (d as f64).sqrt()).floor() as u64;
    t = t.saturating_sub(2);
    while compare_quadratic(&QuadraticReal::rational(Rational::from_integer(t as i128)), &v).is_lt() {
        t += 1;
    }
    t
}

pub fn derive_constants(q: u64) -> Result<WitnessConstants, WitnessError> {
    if q < 3 || !is_prime(q) {
        return Err(WitnessError::BadQ(q));
    }
    let a = (q * q).div_ceil(2);
    let a_prime = ceil_div_sqrt(q * (a * q + q - 1), q * q - 1);
    let s1: Vec<(u64, u64)> = (1..q).map(|j| (a * q + j, q)).collect();
    let mut s2 = Vec::new();
    for x in 1..=a_prime {
        for y in 0..=x {
            if x.gcd(&y) == 1 && !s1.contains(&(x, y)) {
                s2.push((x, y));
            }
        }
    }
    let c_prime = s1
        .iter()
        .flat_map(|&(a1, b1)| s2.iter().map(move |&(a2, b2)| (a2 * b1).abs_diff(a1 * b2)))
        .max()
        .expect("both sets are nonempty");
    Ok(WitnessConstants {
        q,
        a,
        a_prime,
        b: s2.len(),
        c: c_prime.max(a_prime) + 1,
        c_prime,
        s1,
        s2,
    })
}

/// One member of the family in scaled coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyDisk {
    pub j: u64,
    pub level: u64,
    pub disk: Disk,
    /// `Q_j`: a point of the boundary of this disk outside every other member.
    pub witness_x: Rational,
    pub witness_y: QuadraticReal,
}

impl FamilyDisk {
    /// `y_j^2`, which is rational.
    pub fn witness_y_squared(&self) -> Rational {
        let (_, c, d) = self.witness_y.parts();
        &c.square() * d
    }
}

/// The disks `D(q/(Aq+j), 1/(Aq+j))`, `j = 1..q-1`, with `A = ceil(q^2/2)`.
pub fn family(q: u64) -> Vec<FamilyDisk> {
    let a = (q * q).div_ceil(2);
    let qq = q as i128;
    (1..q)
        .map(|j| {
            let level = a * q + j;
            let den = qq * level as i128;
            FamilyDisk {
                j,
                level,
                disk: Disk::ford(q as i64, level as i64),
                witness_x: Rational::new(qq * qq - 1, den),
                witness_y: QuadraticReal::new(
                    Rational::zero(),
                    Rational::new(1, den),
                    Rational::from_integer(qq * qq - 1),
                ),
            }
        })
        .collect()
}

/// `|p - c|^2 - r^2` for a point with rational `x` and rational `y^2`.
fn power(x: &Rational, y2: &Rational, disk: &Disk) -> Rational {
    &(&(x - &disk.center).square() + y2) - &disk.radius.square()
}

/// Which part of the family check failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyFailure {
    /// `Q_j` is not on the boundary of `D^(j)`.
    OffCircle { j: u64 },
    /// `Q_j` lies in `D^(l)`.
    Exposure { j: u64, l: u64 },
    /// The pole of `D^(q-1)` is not interior to `D^(j)`.
    Pole { j: u64 },
}

pub fn family_counterexample(q: u64) -> Option<FamilyFailure> {
    let fam = family(q);
    for f in &fam {
        let y2 = f.witness_y_squared();
        if !power(&f.witness_x, &y2, &f.disk).is_zero() {
            return Some(FamilyFailure::OffCircle { j: f.j });
        }
        for g in fam.iter().filter(|g| g.j != f.j) {
            if !power(&f.witness_x, &y2, &g.disk).is_positive() {
                return Some(FamilyFailure::Exposure { j: f.j, l: g.j });
            }
        }
    }
    if let Some(last) = fam.last() {
        let (px, py) = last.disk.north_pole();
        let py2 = py.square();
        for f in &fam[..fam.len() - 1] {
            if !power(&px, &py2, &f.disk).is_negative() {
                return Some(FamilyFailure::Pole { j: f.j });
            }
        }
    }
    None
}

/// Each `D^(j)` keeps an arc outside the others, and the pole of `D^(q-1)`
/// is interior to every other member.
pub fn verify_family_disks(q: u64) -> bool {
    family_counterexample(q).is_none()
}

/// A bad pair whose region makes `c(N) >= 1`.
///
/// Arranges `n, n+1, 2n+1, 3n+1, 4n+1` to share a factor with `N` while
/// `3n+2` and `5n+2` stay coprime. Needs `omega(N) >= 5`, or `omega(N) >= 4`
/// with `N` even; returns `None` otherwise.
pub fn build_c1_witness(modulus: &FactoredInt) -> Option<BigUint> {
    let primes: Vec<u64> = modulus.primes().collect();
    let omega = primes.len();
    // (a, b) with p | a n + b, one per prime in increasing order.
    let targets: &[(u64, u64)] = if primes[0] == 2 && omega >= 4 {
        &[(1, 1), (1, 0), (2, 1), (4, 1)]
    } else if omega >= 5 {
        &[(1, 0), (1, 1), (2, 1), (3, 1), (4, 1)]
    } else {
        return None;
    };
    let mut residues = Vec::with_capacity(omega);
    for (i, &p) in primes.iter().enumerate() {
        let (a, b) = targets.get(i).copied().unwrap_or((1, 0));
        residues.push((affine_root(a, b, p)?, p));
    }
    let n = crt_solve(&residues).ok()?;
    let res = modulus.residues_of(&n);
    let nc = |a, b| !modulus.coprime_affine(&res, a, b);
    let ok = nc(1, 0) && nc(1, 1) && nc(2, 1) && nc(3, 1) && nc(4, 1) && !nc(3, 2) && !nc(5, 2);
    ok.then_some(n)
}

/// A level `N` (kept as its prime list) and pair `n` realising the family
/// configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessBundle {
    pub q: u64,
    pub constants: WitnessConstants,
    /// The `i`-th prime divides `a n + b` for the `i`-th pair of `S2`.
    pub primes: Vec<u64>,
    pub n: BigUint,
    pub t1: Vec<BigUint>,
    pub t2: Vec<BigUint>,
    pub verified: bool,
}

impl WitnessBundle {
    pub fn modulus(&self) -> Result<FactoredInt, WitnessError> {
        let mut ps = self.primes.clone();
        ps.sort_unstable();
        Ok(FactoredInt::from_primes(&ps)?)
    }

    /// Re-derives the gcd pattern from per-prime residues: every `T1` value
    /// coprime to `N`, every `T2` value sharing a prime with it.
    pub fn check_pattern(&self) -> Result<bool, WitnessError> {
        let modulus = self.modulus()?;
        let res = modulus.residues_of(&self.n);
        let t1_ok = self.constants.s1.iter().all(|&(a, b)| modulus.coprime_affine(&res, a, b));
        let t2_ok = self.constants.s2.iter().all(|&(a, b)| !modulus.coprime_affine(&res, a, b));
        Ok(t1_ok && t2_ok)
    }

    /// Negative control: the same bundle with one prime removed.
    pub fn without_prime(&self, index: usize) -> WitnessBundle {
        let mut b = self.clone();
        b.primes.remove(index);
        b.verified = b.check_pattern().unwrap_or(false);
        b
    }
}

/// Builds a bundle from `B` consecutive primes starting at `C`.
pub fn build_q_witness(q: u64) -> Result<WitnessBundle, WitnessError> {
    let constants = derive_constants(q)?;
    let primes = primes_from(constants.c, constants.b);
    build_q_witness_with(constants, &primes)
}

/// Builds a bundle from the first `B` primes of `supply` (ascending, each
/// at least `C`).
pub fn build_q_witness_with(constants: WitnessConstants, supply: &[u64]) -> Result<WitnessBundle, WitnessError> {
    let usable: Vec<u64> = supply.iter().copied().filter(|&p| p >= constants.c && is_prime(p)).collect();
    if usable.len() < constants.b {
        return Err(WitnessError::InsufficientPrimes { needed: constants.b, min: constants.c, got: usable.len() });
    }
    let primes = usable[..constants.b].to_vec();
    let residues: Vec<(u64, u64)> = primes
        .iter()
        .zip(&constants.s2)
        .map(|(&p, &(a, b))| (affine_root(a, b, p).expect("p > A' >= a"), p))
        .collect();
    let n = crt_solve(&residues)?;
    let value = |&(a, b): &(u64, u64)| &n * a + b;
    let t1 = constants.s1.iter().map(value).collect();
    let t2 = constants.s2.iter().map(value).collect();
    let mut bundle = WitnessBundle { q: constants.q, constants, primes, n, t1, t2, verified: false };
    bundle.verified = bundle.check_pattern()?;
    Ok(bundle)
}

/// Outcome of running the engine on a witness region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerBound {
    pub holds: bool,
    pub hypotheses_hold: bool,
    /// Family members found in the boundary set.
    pub retained: Vec<u64>,
    /// Number of other boundary disks covering the pole of `D^(q-1)`.
    pub pole_count: Option<u32>,
    pub certificate_k: Option<u32>,
}

/// Computes the boundary set of the bundle's region and checks that every
/// family disk is on it and that the pole of `D^(q-1)` is covered by the
/// other `q - 2` members.
pub fn verify_lower_bound(bundle: &WitnessBundle, k_max: u32) -> Result<LowerBound, WitnessError> {
    let hypotheses_hold = bundle.check_pattern()?;
    if !hypotheses_hold {
        return Ok(LowerBound {
            holds: false,
            hypotheses_hold,
            retained: vec![],
            pole_count: None,
            certificate_k: None,
        });
    }
    let region = Region::new(bundle.modulus()?, bundle.n.clone(), 1)?;
    let mut lb = family_on_region(&region, bundle.q, k_max, Frame::Scaled)?;
    lb.hypotheses_hold = true;
    Ok(lb)
}

/// The family checks on an arbitrary width-one region, in either frame.
pub fn family_on_region(region: &Region, q: u64, k_max: u32, frame: Frame) -> Result<LowerBound, WitnessError> {
    let bs = compute_boundary_set_in(region, k_max, frame)?;
    let fam = family(q);
    let retained: Vec<u64> = fam
        .iter()
        .filter(|f| bs.find(f.level as u32, q).is_some())
        .map(|f| f.j)
        .collect();
    let last = fam.last().expect("q >= 2");
    let pole = pole_complexity(&bs, last.level as u32, q).ok();
    let pole_covered_by_family = pole.as_ref().is_some_and(|p| {
        fam[..fam.len() - 1]
            .iter()
            .all(|f| p.coverers.contains(&(f.level as u32, q)))
    });
    Ok(LowerBound {
        holds: retained.len() == fam.len() && pole_covered_by_family,
        hypotheses_hold: true,
        retained,
        pole_count: pole.map(|p| p.count),
        certificate_k: Some(bs.certificate_k),
    })
}
