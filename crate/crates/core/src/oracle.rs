//! A second, deliberately separate computation of boundary sets, used only
//! to cross-check the engine.
//!
//! Each candidate circle is parametrised by angle on its upper half. Every
//! other disk covers an angular interval whose endpoint cosines follow from
//! the law of cosines; the circle is on the boundary when those intervals
//! leave a gap. Angles are evaluated with multiprecision `acos`, escalating
//! 64 -> 256 -> 1024 bits; two angles closer than `2^(-p/2)` even at the top
//! precision are ordered exactly through their (rational) cosines instead.
//! Nothing here reuses the engine's enumeration or chord geometry.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use thiserror::Error;

use crate::rational::Rational;

const PRECISIONS: [usize; 3] = [64, 256, 1024];
/// Extra working bits; astro-float cannot hold an `i128` in fewer than 128.
const GUARD: usize = 64;
const RM: RoundingMode = RoundingMode::ToEven;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("n = {n} is not a breakpoint of N = {modulus}")]
    NotBreakpoint { modulus: u64, n: u64 },
    #[error("multiprecision evaluation failed: {0}")]
    Numeric(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub modulus: u64,
    pub n: u64,
    pub n_next: u64,
    /// Boundary disks as reduced `(a, b)`.
    pub disks: BTreeSet<(u64, u64)>,
    /// Number of other boundary disks whose closed disk holds each pole.
    pub poles: BTreeMap<(u64, u64), u32>,
    /// Highest precision any comparison needed.
    pub precision: usize,
    pub exact_fallbacks: usize,
}

struct OracleDisk {
    a: u64,
    b: u64,
    center: Rational,
    radius: Rational,
}

/// Angle comparisons with a per-precision cache of `acos` values.
struct AngleCmp {
    consts: Consts,
    cache: Vec<HashMap<Rational, BigFloat>>,
    precision: usize,
    fallbacks: usize,
}

impl AngleCmp {
    fn new() -> Result<Self, OracleError> {
        Ok(AngleCmp {
            consts: Consts::new().map_err(|e| OracleError::Numeric(format!("{e:?}")))?,
            cache: vec![HashMap::new(); PRECISIONS.len()],
            precision: PRECISIONS[0],
            fallbacks: 0,
        })
    }

    fn to_float(&mut self, r: &Rational, p: usize) -> BigFloat {
        let conv = |x: num_bigint::BigInt, cc: &mut Consts| match x.to_i128() {
            Some(v) => BigFloat::from_i128(v, p),
            None => BigFloat::parse(&x.to_string(), Radix::Dec, p, RM, cc),
        };
        let num = conv(r.numer(), &mut self.consts);
        let den = conv(r.denom(), &mut self.consts);
        num.div(&den, p, RM)
    }

    fn angle(&mut self, cos: &Rational, level: usize) -> BigFloat {
        if let Some(v) = self.cache[level].get(cos) {
            return v.clone();
        }
        let p = PRECISIONS[level] + GUARD;
        let x = self.to_float(cos, p);
        let v = x.acos(p, RM, &mut self.consts);
        self.cache[level].insert(cos.clone(), v.clone());
        v
    }

    /// Orders `acos(u)` against `acos(v)`.
    fn cmp(&mut self, u: &Rational, v: &Rational) -> Ordering {
        for level in 0..PRECISIONS.len() {
            let p = PRECISIONS[level];
            let diff = self.angle(u, level).sub(&self.angle(v, level), p + GUARD, RM);
            let near = diff.is_nan()
                || diff.is_zero()
                || diff.exponent().is_some_and(|e| (e as i64) <= -((p / 2) as i64));
            if !near {
                self.precision = self.precision.max(p);
                return if diff.is_negative() { Ordering::Less } else { Ordering::Greater };
            }
        }
        self.precision = self.precision.max(PRECISIONS[PRECISIONS.len() - 1]);
        self.fallbacks += 1;
        // acos is decreasing
        v.cmp(u)
    }
}

/// Covered angular range on the upper half of `target`, as cosines
/// `(cos lo, cos hi)` with `lo <= hi` in angle.
fn covered_range(target: &OracleDisk, other: &OracleDisk) -> Option<(Rational, Rational)> {
    let d = &other.center - &target.center;
    let dist = d.abs();
    let (ri, rj) = (&target.radius, &other.radius);
    if dist >= ri + rj {
        return None;
    }
    if &(&dist + ri) <= rj {
        return Some((Rational::one(), -Rational::one()));
    }
    if &(&dist + rj) <= ri {
        return None;
    }
    let two = Rational::from_integer(2);
    let cos_half = &(&(&dist.square() + &ri.square()) - &rj.square()) / &(&(&two * &dist) * ri);
    if d.is_positive() {
        Some((Rational::one(), cos_half))
    } else {
        Some((-cos_half, -Rational::one()))
    }
}

fn has_gap(target: &OracleDisk, others: &[&OracleDisk], cmp: &mut AngleCmp) -> bool {
    let mut ranges: Vec<(Rational, Rational)> = others.iter().filter_map(|o| covered_range(target, o)).collect();
    ranges.sort_by(|x, y| cmp.cmp(&x.0, &y.0));
    let mut reach = Rational::one();
    for (lo, hi) in ranges {
        if cmp.cmp(&lo, &reach) == Ordering::Greater {
            return true;
        }
        if cmp.cmp(&hi, &reach) == Ordering::Greater {
            reach = hi;
        }
    }
    cmp.cmp(&reach, &-Rational::one()) == Ordering::Less
}

/// The boundary disks of the region of `R_N` starting at breakpoint `n`,
/// considering denominators `k N` for `k <= k_cap`.
pub fn oracle_boundary_set(big_n: u64, n: u64, k_cap: u32) -> Result<OracleResult, OracleError> {
    if n >= big_n || n.gcd(&big_n) == 1 {
        return Err(OracleError::NotBreakpoint { modulus: big_n, n });
    }
    let n_next = (n + 1..=big_n).find(|m| m.gcd(&big_n) > 1).expect("N is a breakpoint");
    let mut disks = Vec::new();
    for k in 1..=k_cap as u64 {
        let b = k * big_n;
        for a in k * n + 1..k * n_next {
            if a.gcd(&b) == 1 {
                disks.push(OracleDisk {
                    a,
                    b,
                    center: Rational::new(a as i128, b as i128),
                    radius: Rational::new(1, b as i128),
                });
            }
        }
    }
    disks.sort_by(|x, y| x.center.cmp(&y.center));
    let widest = disks.iter().map(|d| d.radius.clone()).max().unwrap_or_else(Rational::zero);

    let mut cmp = AngleCmp::new()?;
    let mut kept: Vec<&OracleDisk> = Vec::new();
    for (i, t) in disks.iter().enumerate() {
        let reach = &t.radius + &widest;
        let lo = &t.center - &reach;
        let hi = &t.center + &reach;
        let start = disks.partition_point(|d| d.center < lo);
        let end = disks.partition_point(|d| d.center <= hi);
        let others: Vec<&OracleDisk> = (start..end).filter(|&j| j != i).map(|j| &disks[j]).collect();
        if has_gap(t, &others, &mut cmp) {
            kept.push(t);
        }
    }

    let mut poles = BTreeMap::new();
    for alpha in &kept {
        let count = kept
            .iter()
            .filter(|beta| (beta.a, beta.b) != (alpha.a, alpha.b))
            .filter(|beta| &(&alpha.center - &beta.center).square() + &alpha.radius.square() <= beta.radius.square())
            .count();
        poles.insert((alpha.a, alpha.b), count as u32);
    }
    Ok(OracleResult {
        modulus: big_n,
        n,
        n_next,
        disks: kept.iter().map(|d| (d.a, d.b)).collect(),
        poles,
        precision: cmp.precision,
        exact_fallbacks: cmp.fallbacks,
    })
}

/// What disagreed between engine and oracle on one region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MismatchKind {
    DiskSet { engine: BTreeSet<(u64, u64)>, oracle: BTreeSet<(u64, u64)> },
    PoleCounts { engine: BTreeMap<(u64, u64), u32>, oracle: BTreeMap<(u64, u64), u32> },
    EngineFailed(String),
    OracleFailed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub modulus: u64,
    pub n: u64,
    pub kind: MismatchKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CrossReport {
    pub regions_checked: usize,
    pub exact_fallbacks: usize,
    pub mismatches: Vec<Mismatch>,
}

/// Runs engine and oracle on a seeded random sample of the regions of every
/// `N` in `lo..=hi`; `sample_rate = 1.0` checks all of them. The engine runs
/// with depth bound `k_max`, the oracle with the engine's certificate depth.
pub fn cross_validate(lo: u64, hi: u64, sample_rate: f64, seed: u64, k_max: u32) -> CrossReport {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut picks = Vec::new();
    for big_n in lo.max(2)..=hi {
        for n in (0..big_n).filter(|n| n.gcd(&big_n) > 1) {
            if sample_rate >= 1.0 || rng.gen_bool(sample_rate.max(0.0)) {
                picks.push((big_n, n));
            }
        }
    }
    let results: Vec<(Option<Mismatch>, usize)> = picks.par_iter().map(|&(m, n)| check_region(m, n, k_max)).collect();
    let mut report = CrossReport { regions_checked: results.len(), ..CrossReport::default() };
    for (mm, fb) in results {
        report.exact_fallbacks += fb;
        report.mismatches.extend(mm);
    }
    report
}

fn check_region(big_n: u64, n: u64, k_max: u32) -> (Option<Mismatch>, usize) {
    use crate::complexity::pair_complexity;
    use crate::numtheory::factorize;
    use crate::region::Region;

    let mismatch = |kind| Some(Mismatch { modulus: big_n, n, kind });
    let engine = factorize(big_n)
        .map_err(|e| e.to_string())
        .and_then(|m| Region::at_breakpoint(m, n).map_err(|e| e.to_string()))
        .and_then(|r| pair_complexity(&r, k_max).map_err(|e| e.to_string()));
    let pc = match engine {
        Ok(pc) => pc,
        Err(e) => return (mismatch(MismatchKind::EngineFailed(e)), 0),
    };
    let oracle = match oracle_boundary_set(big_n, n, pc.boundary.certificate_k) {
        Ok(o) => o,
        Err(e) => return (mismatch(MismatchKind::OracleFailed(e.to_string())), 0),
    };
    let region = &pc.boundary.region;
    let abs = |k: u32, m: u64| region.absolute(k, m).expect("machine-sized region");
    let engine_disks: BTreeSet<(u64, u64)> = pc.boundary.disks.iter().map(|d| abs(d.level, d.offset)).collect();
    if engine_disks != oracle.disks {
        let kind = MismatchKind::DiskSet { engine: engine_disks, oracle: oracle.disks };
        return (mismatch(kind), oracle.exact_fallbacks);
    }
    let engine_poles: BTreeMap<(u64, u64), u32> =
        pc.poles.iter().map(|p| (abs(p.level, p.offset), p.count)).collect();
    if engine_poles != oracle.poles {
        let kind = MismatchKind::PoleCounts { engine: engine_poles, oracle: oracle.poles };
        return (mismatch(kind), oracle.exact_fallbacks);
    }
    (None, oracle.exact_fallbacks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_regions() {
        let r = oracle_boundary_set(9, 0, 2).unwrap();
        assert_eq!(r.disks, [(1, 9), (2, 9)].into_iter().collect());
        let r = oracle_boundary_set(15, 5, 3).unwrap();
        assert_eq!(r.disks, [(11, 30)].into_iter().collect());
        let r = oracle_boundary_set(105, 24, 8).unwrap();
        assert_eq!(r.disks, [(73, 315), (74, 315)].into_iter().collect());
    }

    #[test]
    fn pole_of_210_witness() {
        let r = oracle_boundary_set(210, 117, 12).unwrap();
        assert_eq!(r.poles[&(587, 1050)], 1);
        assert!(r.exact_fallbacks > 0);
    }

    #[test]
    fn rejects_non_breakpoint() {
        assert!(oracle_boundary_set(15, 4, 3).is_err());
    }

    #[test]
    fn small_cross_validation() {
        let rep = cross_validate(2, 40, 1.0, 0, 64);
        assert!(rep.mismatches.is_empty(), "{:?}", rep.mismatches);
        let neg = cross_validate(14, 16, 1.0, 0, 1);
        assert!(!neg.mismatches.is_empty());
    }

    #[test]
    fn deterministic_sampling() {
        let a = cross_validate(50, 80, 0.2, 7, 64);
        let b = cross_validate(50, 80, 0.2, 7, 64);
        assert_eq!(a, b);
        assert!(a.regions_checked > 0);
    }
}
