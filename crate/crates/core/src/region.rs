//! Boundary-disk computation for a single region `R_{N,n}`.
//!
//! Work happens in the coordinates `z -> N z - n`, in which the region spans
//! `[0, L]` with `L = n_next - n` and the disk `D_{a/(kN)}` with `a = k n + m`
//! becomes `D(m/k, 1/k)`. A candidate is therefore named by its *level* `k`
//! and *offset* `m`, independently of how large `N` and `n` are.
//!
//! Levels are added one at a time. After level `k` the union of everything
//! seen so far is tested against the region swept by a disk of radius
//! `1/(k+1)`; every disk of level `> k` lies inside that swept region, so once
//! it is covered no further level can contribute and the boundary set is
//! read off from the accumulated candidates.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::geometry::{disk_covered_by_union, swept_region_certificate, Disk, Interval};
use crate::numtheory::{FactoredInt, PairClass};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("n = {0} shares no factor with N, so it is not a breakpoint")]
    NotBreakpoint(String),
    #[error("right end {0} shares no factor with N")]
    BadRightEnd(String),
    #[error("{0} lies strictly between the breakpoints and shares a factor with N")]
    InteriorBreakpoint(String),
    #[error("region must have positive width")]
    Empty,
    #[error("absolute coordinates need an explicit N of machine size")]
    NeedsExplicitModulus,
    #[error(
        "unresolved region at n = {n}: no swept-region certificate up to depth {k_max} \
         ({} candidate disks accumulated)", partial.len()
    )]
    Unresolved { n: String, span: u64, k_max: u32, partial: Vec<(u32, u64)> },
    #[error("internal: dropped candidate (level {level}, offset {offset}) is not covered by the retained disks")]
    UnionMismatch { level: u32, offset: u64 },
}

/// The piece of `R_N` between two consecutive breakpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    modulus: FactoredInt,
    n: BigUint,
    span: u64,
    residues: Vec<u64>,
}

impl Region {
    /// The region starting at breakpoint `n` and ending at `n + span`.
    ///
    /// Interior points are checked for being coprime to `N` only when `span`
    /// is small enough to scan.
    pub fn new(modulus: FactoredInt, n: BigUint, span: u64) -> Result<Self, RegionError> {
        if span == 0 {
            return Err(RegionError::Empty);
        }
        let residues = modulus.residues_of(&n);
        if modulus.coprime_affine(&residues, 1, 0) {
            return Err(RegionError::NotBreakpoint(n.to_string()));
        }
        if modulus.coprime_affine(&residues, 1, span) {
            return Err(RegionError::BadRightEnd((&n + span).to_string()));
        }
        if let Some(m) = (1..span).find(|&m| !modulus.coprime_affine(&residues, 1, m)) {
            return Err(RegionError::InteriorBreakpoint((&n + m).to_string()));
        }
        Ok(Region { modulus, n, span, residues })
    }

    /// The region that starts at breakpoint `n` of an explicit `N`.
    pub fn at_breakpoint(modulus: FactoredInt, n: u64) -> Result<Self, RegionError> {
        let value = modulus.value_u64().ok_or(RegionError::NeedsExplicitModulus)?;
        if n >= value || modulus.coprime_to(n) {
            return Err(RegionError::NotBreakpoint(n.to_string()));
        }
        let next = (n + 1..=value)
            .find(|&m| !modulus.coprime_to(m))
            .expect("N itself is a breakpoint");
        Region::new(modulus, BigUint::from(n), next - n)
    }

    pub fn modulus(&self) -> &FactoredInt {
        &self.modulus
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn n_u64(&self) -> Option<u64> {
        self.n.to_u64()
    }

    pub fn n_next(&self) -> BigUint {
        &self.n + self.span
    }

    /// `n_next - n`.
    pub fn span(&self) -> u64 {
        self.span
    }

    pub fn class(&self) -> PairClass {
        if self.modulus.coprime_affine(&self.residues, 1, 1) {
            PairClass::Good
        } else {
            PairClass::Bad
        }
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    /// Whether `a n + b` is coprime to `N`.
    pub fn coprime_affine(&self, a: u64, b: u64) -> bool {
        self.modulus.coprime_affine(&self.residues, a, b)
    }

    /// Whether `D_{(k n + m)/(k N)}` is a Ford disk of `R_N`.
    pub fn admits(&self, level: u32, offset: u64) -> bool {
        offset.gcd(&(level as u64)) == 1 && self.coprime_affine(level as u64, offset)
    }

    /// Absolute `(a, b)` of a candidate, when `N` and `n` are machine sized.
    pub fn absolute(&self, level: u32, offset: u64) -> Option<(u64, u64)> {
        let big_n = self.modulus.value_u64()?;
        let n = self.n_u64()?;
        let k = level as u64;
        Some((k.checked_mul(n)?.checked_add(offset)?, k.checked_mul(big_n)?))
    }
}

/// Coordinate system the engine computes in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// `z -> N z - n`; the default.
    Scaled,
    /// The original coordinates; needs an explicit machine-sized `N`.
    Absolute,
}

struct FrameMap {
    frame: Frame,
    big_n: i64,
    n: i64,
}

impl FrameMap {
    fn new(region: &Region, frame: Frame) -> Result<Self, RegionError> {
        match frame {
            Frame::Scaled => Ok(FrameMap { frame, big_n: 1, n: 0 }),
            Frame::Absolute => {
                let big_n = region.modulus.value_u64().ok_or(RegionError::NeedsExplicitModulus)?;
                let n = region.n_u64().ok_or(RegionError::NeedsExplicitModulus)?;
                Ok(FrameMap { frame, big_n: big_n as i64, n: n as i64 })
            }
        }
    }

    fn disk(&self, level: u32, offset: u64) -> Disk {
        let k = level as i64;
        match self.frame {
            Frame::Scaled => Disk::ford(offset as i64, k),
            Frame::Absolute => Disk::ford(k * self.n + offset as i64, k * self.big_n),
        }
    }

    fn bounds(&self, span: u64) -> (Rational, Rational) {
        let den = self.big_n as i128;
        (
            Rational::new(self.n as i128, den),
            Rational::new(self.n as i128 + span as i128, den),
        )
    }

    fn sweep_radius(&self, depth: u32) -> Rational {
        Rational::new(1, depth as i128 * self.big_n as i128)
    }
}

/// A candidate disk `D_{(k n + m)/(k N)}`, drawn in the engine's frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub level: u32,
    pub offset: u64,
    pub disk: Disk,
}

/// All Ford disks of `R_N` at denominator `k N` inside the region, in
/// scaled coordinates.
pub fn enumerate_candidates(region: &Region, level: u32) -> Vec<Candidate> {
    enumerate_in(region, level, &FrameMap { frame: Frame::Scaled, big_n: 1, n: 0 })
}

fn enumerate_in(region: &Region, level: u32, map: &FrameMap) -> Vec<Candidate> {
    let top = level as u64 * region.span;
    (1..top)
        .filter(|&m| region.admits(level, m))
        .map(|m| Candidate { level, offset: m, disk: map.disk(level, m) })
        .collect()
}

/// A disk of the boundary set with the `x`-ranges of its exposed arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryDisk {
    pub level: u32,
    pub offset: u64,
    pub disk: Disk,
    pub exposed: Vec<Interval<Rational>>,
}

impl BoundaryDisk {
    pub fn key(&self) -> (u32, u64) {
        (self.level, self.offset)
    }
}

/// The minimal set of disks whose union is the region, with the depth at
/// which the swept-region certificate closed the search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundarySet {
    pub region: Region,
    pub frame: Frame,
    pub disks: Vec<BoundaryDisk>,
    pub certificate_k: u32,
    pub candidates_examined: usize,
}

impl BoundarySet {
    pub fn keys(&self) -> BTreeSet<(u32, u64)> {
        self.disks.iter().map(BoundaryDisk::key).collect()
    }

    pub fn find(&self, level: u32, offset: u64) -> Option<&BoundaryDisk> {
        self.disks.iter().find(|d| d.level == level && d.offset == offset)
    }

    /// Boundary disks as absolute `(a, b)` pairs, when `N` is explicit.
    pub fn absolute_pairs(&self) -> Option<Vec<(u64, u64)>> {
        self.disks.iter().map(|d| self.region.absolute(d.level, d.offset)).collect()
    }
}

/// Boundary set in scaled coordinates.
///
/// `k_max` bounds the certificate depth: levels `1..k_max` are examined and
/// the search fails loudly if no depth `<= k_max` certifies the region.
pub fn compute_boundary_set(region: &Region, k_max: u32) -> Result<BoundarySet, RegionError> {
    compute_boundary_set_in(region, k_max, Frame::Scaled)
}

pub fn compute_boundary_set_in(region: &Region, k_max: u32, frame: Frame) -> Result<BoundarySet, RegionError> {
    let map = FrameMap::new(region, frame)?;
    let (lo, hi) = map.bounds(region.span);
    let mut pool: Vec<Candidate> = Vec::new();
    for level in 1..k_max {
        pool.extend(enumerate_in(region, level, &map));
        let depth = level + 1;
        let disks: Vec<Disk> = pool.iter().map(|c| c.disk.clone()).collect();
        if !disks.is_empty() && swept_region_certificate(&lo, &hi, &map.sweep_radius(depth), &disks) {
            let retained = select_exposed(&pool)?;
            return Ok(BoundarySet {
                region: region.clone(),
                frame,
                disks: retained,
                certificate_k: depth,
                candidates_examined: pool.len(),
            });
        }
    }
    Err(RegionError::Unresolved {
        n: region.n.to_string(),
        span: region.span,
        k_max,
        partial: pool.iter().map(|c| (c.level, c.offset)).collect(),
    })
}

/// Indices of candidates whose disks might meet `target`, given candidates
/// sorted by center and the largest radius present.
fn neighbours<'a>(sorted: &'a [&'a Candidate], target: &Disk, max_radius: &Rational) -> &'a [&'a Candidate] {
    let reach = &target.radius + max_radius;
    let from = &target.center - &reach;
    let to = &target.center + &reach;
    let start = sorted.partition_point(|c| c.disk.center < from);
    let end = sorted.partition_point(|c| c.disk.center <= to);
    &sorted[start..end]
}

/// Keeps the candidates with an arc of positive length not covered by any
/// other candidate, then checks the kept disks still cover the dropped ones.
fn select_exposed(pool: &[Candidate]) -> Result<Vec<BoundaryDisk>, RegionError> {
    let mut sorted: Vec<&Candidate> = pool.iter().collect();
    sorted.sort_by(|a, b| a.disk.center.cmp(&b.disk.center).then(a.level.cmp(&b.level)));
    let max_radius = sorted
        .iter()
        .map(|c| c.disk.radius.clone())
        .max()
        .unwrap_or_else(Rational::zero);

    let mut retained = Vec::new();
    let mut dropped = Vec::new();
    for cand in &sorted {
        let near = neighbours(&sorted, &cand.disk, &max_radius);
        let others: Vec<&Candidate> = near
            .iter()
            .copied()
            .filter(|o| !(o.level == cand.level && o.offset == cand.offset))
            .collect();
        if others.iter().any(|o| o.disk.contains_disk(&cand.disk)) {
            dropped.push(*cand);
            continue;
        }
        let other_disks: Vec<Disk> = others.iter().map(|o| o.disk.clone()).collect();
        let cover = disk_covered_by_union(&cand.disk, &other_disks);
        let exposed: Vec<Interval<Rational>> = cover
            .uncovered
            .0
            .into_iter()
            .filter(Interval::has_positive_length)
            .collect();
        if exposed.is_empty() {
            dropped.push(*cand);
        } else {
            retained.push(BoundaryDisk {
                level: cand.level,
                offset: cand.offset,
                disk: cand.disk.clone(),
                exposed,
            });
        }
    }

    let kept: Vec<Disk> = retained.iter().map(|b| b.disk.clone()).collect();
    for cand in dropped {
        let near: Vec<Disk> = kept.iter().filter(|d| d.meets(&cand.disk)).cloned().collect();
        if !near.iter().any(|d| d.contains_disk(&cand.disk)) && !disk_covered_by_union(&cand.disk, &near).covered {
            return Err(RegionError::UnionMismatch { level: cand.level, offset: cand.offset });
        }
    }
    Ok(retained)
}

/// The shapes a region can take that have a closed-form description.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionShape {
    /// `D_{a/N}` for every `a` strictly between the breakpoints.
    GoodFull,
    /// `D_{(2n+1)/(2N)}`.
    Midpoint,
    /// `D_{(3n+1)/(3N)}` and `D_{(3n+2)/(3N)}`.
    ThreePoint,
    /// `D_{(3n+1)/(3N)}` and `D_{(4n+3)/(4N)}`.
    FourPointLeft,
    /// `D_{(3n+2)/(3N)}` and `D_{(4n+1)/(4N)}`.
    FourPointRight,
    /// `D_{(3n+1)/(3N)}` and `D_{(5n+4)/(5N)}`.
    ThreeFiveLeft,
    /// `D_{(3n+2)/(3N)}` and `D_{(5n+1)/(5N)}`.
    ThreeFiveRight,
    Other,
}

impl RegionShape {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionShape::GoodFull => "good-full",
            RegionShape::Midpoint => "midpoint",
            RegionShape::ThreePoint => "three-point",
            RegionShape::FourPointLeft => "four-point-left",
            RegionShape::FourPointRight => "four-point-right",
            RegionShape::ThreeFiveLeft => "three-five-left",
            RegionShape::ThreeFiveRight => "three-five-right",
            RegionShape::Other => "other",
        }
    }

    /// `(level, offset)` pairs of the closed-form disk set for a width-one
    /// region. `GoodFull` and `Other` have none.
    pub fn unit_disks(self) -> Option<&'static [(u32, u64)]> {
        match self {
            RegionShape::Midpoint => Some(&[(2, 1)]),
            RegionShape::ThreePoint => Some(&[(3, 1), (3, 2)]),
            RegionShape::FourPointLeft => Some(&[(3, 1), (4, 3)]),
            RegionShape::FourPointRight => Some(&[(3, 2), (4, 1)]),
            RegionShape::ThreeFiveLeft => Some(&[(3, 1), (5, 4)]),
            RegionShape::ThreeFiveRight => Some(&[(3, 2), (5, 1)]),
            RegionShape::GoodFull | RegionShape::Other => None,
        }
    }

    pub const CLOSED_FORM_SHAPES: [RegionShape; 6] = [
        RegionShape::Midpoint,
        RegionShape::ThreePoint,
        RegionShape::FourPointLeft,
        RegionShape::FourPointRight,
        RegionShape::ThreeFiveLeft,
        RegionShape::ThreeFiveRight,
    ];
}

/// Names the shape of a boundary set given as `(level, offset)` keys.
pub fn classify_keys(keys: &BTreeSet<(u32, u64)>, span: u64) -> RegionShape {
    if span >= 2 && keys.len() as u64 == span - 1 && keys.iter().zip(1..).all(|(&(k, m), i)| k == 1 && m == i) {
        return RegionShape::GoodFull;
    }
    if span == 1 {
        for shape in RegionShape::CLOSED_FORM_SHAPES {
            let want = shape.unit_disks().expect("closed-form shape");
            if keys.len() == want.len() && want.iter().all(|key| keys.contains(key)) {
                return shape;
            }
        }
    }
    RegionShape::Other
}

pub fn classify_shape(bs: &BoundarySet) -> RegionShape {
    classify_keys(&bs.keys(), bs.region.span)
}

/// The closed-form shape whose gcd hypotheses the pair satisfies, if any.
///
/// Applies to bad pairs only (width-one regions); returns `None` for good
/// pairs and for bad pairs matching none of the patterns.
pub fn predicted_shape(region: &Region) -> Option<RegionShape> {
    if region.class() != PairClass::Bad {
        return None;
    }
    let cop = |a: u64, b: u64| region.coprime_affine(a, b);
    if cop(2, 1) {
        return Some(RegionShape::Midpoint);
    }
    let (c31, c32) = (cop(3, 1), cop(3, 2));
    if c31 && c32 {
        return Some(RegionShape::ThreePoint);
    }
    if c31 && !c32 && cop(4, 3) {
        return Some(RegionShape::FourPointLeft);
    }
    if !c31 && c32 && cop(4, 1) {
        return Some(RegionShape::FourPointRight);
    }
    if c31 && !c32 && !cop(4, 3) && !cop(5, 3) && cop(5, 4) {
        return Some(RegionShape::ThreeFiveLeft);
    }
    if !c31 && c32 && !cop(4, 1) && !cop(5, 2) && cop(5, 1) {
        return Some(RegionShape::ThreeFiveRight);
    }
    None
}

/// The mirror image of a region's boundary keys under `x -> L - x`.
pub fn mirror_keys(keys: &BTreeSet<(u32, u64)>, span: u64) -> BTreeSet<(u32, u64)> {
    keys.iter().map(|&(k, m)| (k, k as u64 * span - m)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::factorize;

    fn region(n_mod: u64, n: u64) -> Region {
        Region::at_breakpoint(factorize(n_mod).unwrap(), n).unwrap()
    }

    fn keys(bs: &BoundarySet) -> Vec<(u32, u64)> {
        bs.keys().into_iter().collect()
    }

    #[test]
    fn region_construction() {
        let r = region(15, 5);
        assert_eq!(r.span(), 1);
        assert_eq!(r.class(), PairClass::Bad);
        assert_eq!(region(9, 0).span(), 3);
        assert!(matches!(
            Region::at_breakpoint(factorize(15).unwrap(), 4),
            Err(RegionError::NotBreakpoint(_))
        ));
        assert!(matches!(
            Region::new(factorize(15).unwrap(), BigUint::from(3u32), 3),
            Err(RegionError::InteriorBreakpoint(_))
        ));
        assert!(matches!(
            Region::new(factorize(15).unwrap(), BigUint::from(3u32), 1),
            Err(RegionError::BadRightEnd(_))
        ));
    }

    #[test]
    fn enumerate_examples() {
        let c: Vec<_> = enumerate_candidates(&region(9, 0), 1).iter().map(|c| (c.level, c.offset)).collect();
        assert_eq!(c, vec![(1, 1), (1, 2)]);
        let r15 = region(15, 5);
        assert!(enumerate_candidates(&r15, 1).is_empty());
        let l2: Vec<_> = enumerate_candidates(&r15, 2).iter().map(|c| r15.absolute(c.level, c.offset).unwrap()).collect();
        assert_eq!(l2, vec![(11, 30)]);
        let l3: Vec<_> = enumerate_candidates(&r15, 3).iter().map(|c| r15.absolute(c.level, c.offset).unwrap()).collect();
        assert_eq!(l3, vec![(16, 45), (17, 45)]);
    }

    #[test]
    fn boundary_set_examples() {
        let bs9 = compute_boundary_set(&region(9, 0), 64).unwrap();
        assert_eq!(bs9.absolute_pairs().unwrap(), vec![(1, 9), (2, 9)]);
        assert_eq!(bs9.certificate_k, 2);
        assert_eq!(classify_shape(&bs9), RegionShape::GoodFull);

        let bs15 = compute_boundary_set(&region(15, 5), 64).unwrap();
        assert_eq!(bs15.absolute_pairs().unwrap(), vec![(11, 30)]);
        assert_eq!(bs15.certificate_k, 3);
        assert_eq!(classify_shape(&bs15), RegionShape::Midpoint);

        let bs105 = compute_boundary_set(&region(105, 24), 64).unwrap();
        let mut pairs = bs105.absolute_pairs().unwrap();
        pairs.sort();
        assert_eq!(pairs, vec![(73, 315), (74, 315)]);
        assert_eq!(classify_shape(&bs105), RegionShape::ThreePoint);
    }

    #[test]
    fn unresolved_is_loud() {
        let err = compute_boundary_set(&region(15, 5), 1).unwrap_err();
        assert!(matches!(err, RegionError::Unresolved { k_max: 1, .. }));
        let err = compute_boundary_set(&region(15, 5), 2).unwrap_err();
        assert!(matches!(err, RegionError::Unresolved { .. }));
    }

    #[test]
    fn absolute_frame_agrees() {
        for (nm, n) in [(9, 0), (15, 5), (105, 24), (210, 117)] {
            let r = region(nm, n);
            let a = compute_boundary_set_in(&r, 64, Frame::Absolute).unwrap();
            let s = compute_boundary_set(&r, 64).unwrap();
            assert_eq!(keys(&a), keys(&s));
            assert_eq!(a.certificate_k, s.certificate_k);
        }
    }

    #[test]
    fn predicted_shapes() {
        assert_eq!(predicted_shape(&region(15, 5)), Some(RegionShape::Midpoint));
        assert_eq!(predicted_shape(&region(105, 24)), Some(RegionShape::ThreePoint));
        assert_eq!(predicted_shape(&region(9, 0)), None);
    }

    #[test]
    fn mirror_is_involution() {
        let ks: BTreeSet<_> = [(3, 1), (5, 4)].into_iter().collect();
        let m = mirror_keys(&ks, 1);
        assert_eq!(m, [(3, 2), (5, 1)].into_iter().collect());
        assert_eq!(mirror_keys(&m, 1), ks);
    }
}
