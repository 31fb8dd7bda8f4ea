//! North-pole complexities of regions and of whole levels `N`.

use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{locate_point, PointLocation};
use crate::numtheory::{factorize, omega_p1, psi_breakpoints, FactoredInt, NumTheoryError, PairClass};
use crate::region::{
    classify_shape, compute_boundary_set, mirror_keys, BoundarySet, Region, RegionError, RegionShape,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexityError {
    #[error("disk (level {0}, offset {1}) is not in the boundary set")]
    NotInSet(u32, u64),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    NumTheory(#[from] NumTheoryError),
}

/// How many other boundary disks contain the north pole of one disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoleReport {
    pub level: u32,
    pub offset: u64,
    /// Number of covering disks, tangential ones included.
    pub count: u32,
    pub coverers: Vec<(u32, u64)>,
    /// Coverers whose boundary passes exactly through the pole.
    pub tangential: Vec<(u32, u64)>,
}

pub fn pole_complexity(bs: &BoundarySet, level: u32, offset: u64) -> Result<PoleReport, ComplexityError> {
    let alpha = bs.find(level, offset).ok_or(ComplexityError::NotInSet(level, offset))?;
    let (px, py) = alpha.disk.north_pole();
    let mut coverers = Vec::new();
    let mut tangential = Vec::new();
    for beta in bs.disks.iter().filter(|b| b.key() != alpha.key()) {
        match locate_point(&px, &py, &beta.disk) {
            PointLocation::Inside => coverers.push(beta.key()),
            PointLocation::OnBoundary => {
                coverers.push(beta.key());
                tangential.push(beta.key());
            }
            PointLocation::Outside => {}
        }
    }
    Ok(PoleReport { level, offset, count: coverers.len() as u32, coverers, tangential })
}

/// Complexity of one region together with the data it was computed from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairComplexity {
    pub value: u32,
    pub shape: RegionShape,
    pub boundary: BoundarySet,
    pub poles: Vec<PoleReport>,
}

pub fn pair_complexity(region: &Region, k_max: u32) -> Result<PairComplexity, ComplexityError> {
    let boundary = compute_boundary_set(region, k_max)?;
    pair_complexity_of(boundary)
}

pub fn pair_complexity_of(boundary: BoundarySet) -> Result<PairComplexity, ComplexityError> {
    let poles = boundary
        .disks
        .iter()
        .map(|d| pole_complexity(&boundary, d.level, d.offset))
        .collect::<Result<Vec<_>, _>>()?;
    let value = poles.iter().map(|p| p.count).max().unwrap_or(0);
    Ok(PairComplexity { value, shape: classify_shape(&boundary), boundary, poles })
}

/// Where a region's entry in a [`ComplexityReport`] came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    /// Run through the boundary-set engine.
    Computed(PairComplexity),
    /// A good pair: the disks `D_{a/N}` strictly inside, none covering
    /// another's pole.
    GoodRegion,
    /// Reflection of the region starting at `of` under `x -> 1 - x`.
    Mirror { of: u64, certificate_k: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairEntry {
    pub n: u64,
    pub n_next: u64,
    pub class: PairClass,
    pub shape: RegionShape,
    pub complexity: u32,
    /// Boundary disks as `(level, offset)`.
    pub disks: BTreeSet<(u32, u64)>,
    pub source: Source,
}

impl PairEntry {
    pub fn certificate_k(&self) -> Option<u32> {
        match &self.source {
            Source::Computed(pc) => Some(pc.boundary.certificate_k),
            Source::Mirror { certificate_k, .. } => Some(*certificate_k),
            Source::GoodRegion => None,
        }
    }

    /// Boundary disks as absolute `(a, b)`, sorted by `a / b`.
    pub fn absolute_pairs(&self, big_n: u64) -> Vec<(u64, u64)> {
        let mut v: Vec<(u64, u64)> = self
            .disks
            .iter()
            .map(|&(k, m)| (k as u64 * self.n + m, k as u64 * big_n))
            .collect();
        v.sort_by(|x, y| (x.0 as u128 * y.1 as u128).cmp(&(y.0 as u128 * x.1 as u128)));
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityReport {
    pub modulus: FactoredInt,
    pub breakpoints: Vec<u64>,
    pub pairs: Vec<PairEntry>,
    pub value: u32,
    pub predicted_zero: bool,
}

impl ComplexityReport {
    pub fn agrees(&self) -> bool {
        (self.value == 0) == self.predicted_zero
    }

    pub fn entry(&self, n: u64) -> Option<&PairEntry> {
        self.pairs.iter().find(|p| p.n == n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityOptions {
    pub k_max: u32,
    /// Run the engine on every region instead of deriving good pairs and
    /// mirror images.
    pub exhaustive: bool,
}

impl Default for ComplexityOptions {
    fn default() -> Self {
        ComplexityOptions { k_max: 64, exhaustive: false }
    }
}

/// `c(N)`: the maximum pole complexity over all regions of `R_N`.
pub fn total_complexity(big_n: u64, k_max: u32) -> Result<ComplexityReport, ComplexityError> {
    total_complexity_with(big_n, ComplexityOptions { k_max, exhaustive: false })
}

pub fn total_complexity_with(big_n: u64, opts: ComplexityOptions) -> Result<ComplexityReport, ComplexityError> {
    let modulus = factorize(big_n)?;
    let bp = psi_breakpoints(&modulus)?;
    let mut pairs: Vec<PairEntry> = Vec::with_capacity(bp.psi());
    for (n, n_next) in bp.regions() {
        let span = n_next - n;
        let class = if span == 1 { PairClass::Bad } else { PairClass::Good };
        if !opts.exhaustive && class == PairClass::Good {
            pairs.push(PairEntry {
                n,
                n_next,
                class,
                shape: RegionShape::GoodFull,
                complexity: 0,
                disks: (1..span).map(|m| (1, m)).collect(),
                source: Source::GoodRegion,
            });
            continue;
        }
        // n -> N - n_next maps regions onto regions; the lower half of each
        // mirror pair is computed and the upper half reflected.
        let partner = big_n - n_next;
        if !opts.exhaustive && partner < n {
            let twin = pairs
                .iter()
                .find(|p| p.n == partner)
                .expect("mirror partner precedes its image");
            let entry = PairEntry {
                n,
                n_next,
                class,
                shape: mirror_shape(twin.shape),
                complexity: twin.complexity,
                disks: mirror_keys(&twin.disks, span),
                source: Source::Mirror {
                    of: partner,
                    certificate_k: twin.certificate_k().unwrap_or(0),
                },
            };
            pairs.push(entry);
            continue;
        }
        let region = Region::new(modulus.clone(), n.into(), span)?;
        let pc = pair_complexity(&region, opts.k_max)?;
        pairs.push(PairEntry {
            n,
            n_next,
            class,
            shape: pc.shape,
            complexity: pc.value,
            disks: pc.boundary.keys(),
            source: Source::Computed(pc),
        });
    }
    let value = pairs.iter().map(|p| p.complexity).max().unwrap_or(0);
    Ok(ComplexityReport {
        predicted_zero: predicted_zero(&modulus),
        breakpoints: bp.points().to_vec(),
        modulus,
        pairs,
        value,
    })
}

fn mirror_shape(shape: RegionShape) -> RegionShape {
    match shape {
        RegionShape::FourPointLeft => RegionShape::FourPointRight,
        RegionShape::FourPointRight => RegionShape::FourPointLeft,
        RegionShape::ThreeFiveLeft => RegionShape::ThreeFiveRight,
        RegionShape::ThreeFiveRight => RegionShape::ThreeFiveLeft,
        s => s,
    }
}

/// Whether `c(N) = 0` is expected from the prime factorisation alone:
/// at most three distinct primes, or exactly four with none equal to 2.
pub fn predicted_zero(modulus: &FactoredInt) -> bool {
    let (omega, p1) = omega_p1(modulus);
    omega <= 3 || (omega == 4 && p1 >= 3)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeEntry {
    pub n: u64,
    pub omega: usize,
    pub smallest_prime: u64,
    /// `None` when some region was unresolved.
    pub complexity: Option<u32>,
    pub predicted_zero: bool,
    pub unresolved: Option<String>,
}

impl RangeEntry {
    pub fn agrees(&self) -> Option<bool> {
        self.complexity.map(|c| (c == 0) == self.predicted_zero)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeReport {
    pub entries: Vec<RangeEntry>,
}

impl RangeReport {
    pub fn disagreements(&self) -> Vec<u64> {
        self.entries.iter().filter(|e| e.agrees() == Some(false)).map(|e| e.n).collect()
    }

    pub fn unresolved(&self) -> Vec<u64> {
        self.entries.iter().filter(|e| e.complexity.is_none()).map(|e| e.n).collect()
    }

    pub fn all_agree(&self) -> bool {
        self.entries.iter().all(|e| e.agrees() == Some(true))
    }
}

/// Computes `c(N)` for every `N` in `lo..=hi` on `jobs` threads (0 = rayon's
/// default) and compares each against [`predicted_zero`]. Output is sorted
/// by `N` regardless of scheduling.
pub fn verify_range(lo: u64, hi: u64, k_max: u32, jobs: usize) -> Result<RangeReport, ComplexityError> {
    let lo = lo.max(2);
    let one = |n: u64| -> Result<RangeEntry, ComplexityError> {
        let modulus = factorize(n)?;
        let (omega, smallest_prime) = omega_p1(&modulus);
        let predicted = predicted_zero(&modulus);
        match total_complexity(n, k_max) {
            Ok(rep) => Ok(RangeEntry {
                n,
                omega,
                smallest_prime,
                complexity: Some(rep.value),
                predicted_zero: predicted,
                unresolved: None,
            }),
            Err(ComplexityError::Region(e @ RegionError::Unresolved { .. })) => Ok(RangeEntry {
                n,
                omega,
                smallest_prime,
                complexity: None,
                predicted_zero: predicted,
                unresolved: Some(e.to_string()),
            }),
            Err(e) => Err(e),
        }
    };
    let ns: Vec<u64> = (lo..=hi).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    let mut entries = pool.install(|| ns.par_iter().map(|&n| one(n)).collect::<Result<Vec<_>, _>>())?;
    entries.sort_by_key(|e| e.n);
    Ok(RangeReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_levels() {
        let r9 = total_complexity(9, 64).unwrap();
        assert_eq!(r9.value, 0);
        assert!(r9.agrees());
        let r15 = total_complexity(15, 64).unwrap();
        assert_eq!(r15.value, 0);
        assert_eq!(r15.entry(5).unwrap().shape, RegionShape::Midpoint);
    }

    #[test]
    fn witness_210() {
        let rep = total_complexity(210, 64).unwrap();
        assert!(rep.value >= 1);
        assert!(!rep.predicted_zero);
        let e = rep.entry(117).unwrap();
        assert!(e.complexity >= 1);
    }

    #[test]
    fn pole_of_five_two_is_tangent_at_210() {
        let m = factorize(210).unwrap();
        let region = Region::at_breakpoint(m, 117).unwrap();
        let pc = pair_complexity(&region, 64).unwrap();
        let pole = pc.poles.iter().find(|p| (p.level, p.offset) == (5, 2)).unwrap();
        assert_eq!(pole.coverers, vec![(3, 2)]);
        assert_eq!(pole.tangential, vec![(3, 2)]);
    }

    #[test]
    fn not_in_set() {
        let m = factorize(15).unwrap();
        let region = Region::at_breakpoint(m, 5).unwrap();
        let bs = compute_boundary_set(&region, 64).unwrap();
        assert_eq!(pole_complexity(&bs, 3, 1), Err(ComplexityError::NotInSet(3, 1)));
    }

    #[test]
    fn exhaustive_matches_derived() {
        for n in [30, 60, 105, 210, 330] {
            let fast = total_complexity(n, 64).unwrap();
            let full = total_complexity_with(n, ComplexityOptions { k_max: 64, exhaustive: true }).unwrap();
            assert_eq!(fast.value, full.value);
            for (a, b) in fast.pairs.iter().zip(&full.pairs) {
                assert_eq!(a.disks, b.disks, "N={n} n={}", a.n);
                assert_eq!(a.complexity, b.complexity);
                assert_eq!(a.shape, b.shape);
            }
        }
    }

    #[test]
    fn range_is_sorted() {
        let rep = verify_range(2, 60, 64, 2).unwrap();
        assert_eq!(rep.entries.len(), 59);
        assert!(rep.entries.windows(2).all(|w| w[0].n < w[1].n));
        assert!(rep.all_agree());
    }
}
