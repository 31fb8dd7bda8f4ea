//! Exact predicates over closed disks centered on the real axis.
//!
//! Everything here rests on two facts about such disks:
//!
//! * vertical monotonicity: if `(x, y)` lies in the disk then so does
//!   `(x, y')` for every `|y'| <= |y|`, so a region is covered as soon as its
//!   upper boundary is;
//! * for two axis-centered circles, the part of one upper semicircle lying in
//!   the other disk is cut out by a *linear* inequality in `x` (the quadratic
//!   terms cancel), so it projects to an interval with rational endpoints.
//!
//! Horizontal segments at a fixed rational height meet a disk in an interval
//! whose endpoints are `c ± sqrt(s)` for rational `s`; those are compared with
//! [`QuadraticReal`].

use std::cmp::Ordering;

use crate::rational::Rational;

/// Fraction `a/b` a disk was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Provenance {
    pub a: i64,
    pub b: i64,
}

/// A closed disk centered at a real point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disk {
    pub center: Rational,
    pub radius: Rational,
    pub provenance: Option<Provenance>,
}

impl Disk {
    pub fn new(center: Rational, radius: Rational) -> Self {
        assert!(radius.is_positive(), "disk radius must be positive");
        Disk { center, radius, provenance: None }
    }

    /// The Ford-type disk `D(a/b, 1/b)`.
    pub fn ford(a: i64, b: i64) -> Self {
        assert!(b > 0, "denominator must be positive");
        Disk {
            center: Rational::new(a as i128, b as i128),
            radius: Rational::new(1, b as i128),
            provenance: Some(Provenance { a, b }),
        }
    }

    pub fn left(&self) -> Rational {
        &self.center - &self.radius
    }

    pub fn right(&self) -> Rational {
        &self.center + &self.radius
    }

    /// Topmost point `(center, radius)`.
    pub fn north_pole(&self) -> (Rational, Rational) {
        (self.center.clone(), self.radius.clone())
    }

    /// Whether `other` is a subset of `self`.
    pub fn contains_disk(&self, other: &Disk) -> bool {
        &(&self.center - &other.center).abs() + &other.radius <= self.radius
    }

    /// Whether the two closed disks share at least one point.
    pub fn meets(&self, other: &Disk) -> bool {
        (&self.center - &other.center).abs() <= &self.radius + &other.radius
    }

    /// Whether the interiors overlap (closures touching in one point excluded).
    pub fn overlaps_open(&self, other: &Disk) -> bool {
        (&self.center - &other.center).abs() < &self.radius + &other.radius
    }

    /// Mirror image under `x -> axis2 - x`, where `axis2` is twice the axis.
    pub fn reflect(&self, axis2: &Rational) -> Disk {
        Disk {
            center: axis2 - &self.center,
            radius: self.radius.clone(),
            provenance: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Closed,
    Open,
}

/// Where a point sits relative to a disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointLocation {
    Inside,
    OnBoundary,
    Outside,
}

pub fn locate_point(x: &Rational, y: &Rational, disk: &Disk) -> PointLocation {
    let dx = x - &disk.center;
    let lhs = &dx.square() + &y.square();
    match lhs.cmp(&disk.radius.square()) {
        Ordering::Less => PointLocation::Inside,
        Ordering::Equal => PointLocation::OnBoundary,
        Ordering::Greater => PointLocation::Outside,
    }
}

pub fn point_in_disk(x: &Rational, y: &Rational, disk: &Disk, mode: Containment) -> bool {
    match (locate_point(x, y, disk), mode) {
        (PointLocation::Inside, _) => true,
        (PointLocation::OnBoundary, Containment::Closed) => true,
        _ => false,
    }
}

/// The real number `p + q*sqrt(d)` with rational `p`, `q` and `d >= 0`.
#[derive(Debug, Clone)]
pub struct QuadraticReal {
    p: Rational,
    q: Rational,
    d: Rational,
}

impl QuadraticReal {
    pub fn new(p: Rational, q: Rational, d: Rational) -> Self {
        assert!(!d.is_negative(), "radicand must be nonnegative");
        if d.is_zero() || q.is_zero() {
            QuadraticReal { p, q: Rational::zero(), d: Rational::zero() }
        } else {
            QuadraticReal { p, q, d }
        }
    }

    pub fn rational(p: Rational) -> Self {
        QuadraticReal { p, q: Rational::zero(), d: Rational::zero() }
    }

    pub fn parts(&self) -> (&Rational, &Rational, &Rational) {
        (&self.p, &self.q, &self.d)
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.p.to_f64() + self.q.to_f64() * self.d.to_f64().sqrt()
    }
}

/// Sign of `r + s*sqrt(d)`.
fn sign_single(r: &Rational, s: &Rational, d: &Rational) -> Ordering {
    let sr = r.signum();
    let ss = if d.is_zero() { 0 } else { s.signum() };
    if ss == 0 {
        return sr.cmp(&0);
    }
    if sr == 0 || sr == ss {
        return ss.cmp(&0);
    }
    // opposite signs: compare magnitudes r^2 against s^2 d
    match r.square().cmp(&(&s.square() * d)) {
        Ordering::Greater => sr.cmp(&0),
        Ordering::Less => ss.cmp(&0),
        Ordering::Equal => Ordering::Equal,
    }
}

/// Exact order of two quadratic reals.
pub fn compare_quadratic(u: &QuadraticReal, v: &QuadraticReal) -> Ordering {
    // u - v = t + s1 - s2 with s1 = u.q sqrt(u.d), s2 = v.q sqrt(v.d)
    let t = &u.p - &v.p;
    if v.is_rational() {
        return sign_single(&t, &u.q, &u.d);
    }
    if u.is_rational() {
        return sign_single(&t, &-&v.q, &v.d);
    }
    if u.d == v.d {
        return sign_single(&t, &(&u.q - &v.q), &u.d);
    }
    // X = t + s1 (single radical), Y = -s2
    let sx = sign_single(&t, &u.q, &u.d);
    let sy = (-v.q.signum()).cmp(&0);
    if sx == Ordering::Equal {
        return sy;
    }
    if sx == sy {
        return sx;
    }
    // signs differ: compare X^2 = t^2 + q1^2 d1 + 2 t q1 sqrt(d1) with Y^2 = q2^2 d2
    let x2_rat = &t.square() + &(&u.q.square() * &u.d);
    let x2_rad = &(&t * &u.q) * &Rational::from_integer(2);
    let y2 = &v.q.square() * &v.d;
    match sign_single(&(&x2_rat - &y2), &x2_rad, &u.d) {
        Ordering::Greater => sx,
        Ordering::Less => sy,
        Ordering::Equal => Ordering::Equal,
    }
}

impl PartialEq for QuadraticReal {
    fn eq(&self, other: &Self) -> bool {
        compare_quadratic(self, other) == Ordering::Equal
    }
}

impl Eq for QuadraticReal {}

impl PartialOrd for QuadraticReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadraticReal {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_quadratic(self, other)
    }
}

impl From<Rational> for QuadraticReal {
    fn from(p: Rational) -> Self {
        QuadraticReal::rational(p)
    }
}

/// A closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval<E> {
    pub lo: E,
    pub hi: E,
}

impl<E: Ord> Interval<E> {
    pub fn new(lo: E, hi: E) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi }
    }

    /// Distinct endpoints.
    pub fn has_positive_length(&self) -> bool {
        self.lo < self.hi
    }
}

/// Disjoint closed intervals in increasing order, separated by positive gaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalSet<E>(pub Vec<Interval<E>>);

impl<E: Ord> IntervalSet<E> {
    pub fn empty() -> Self {
        IntervalSet(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn intervals(&self) -> &[Interval<E>] {
        &self.0
    }

    pub fn has_positive_length(&self) -> bool {
        self.0.iter().any(Interval::has_positive_length)
    }
}

/// Outcome of a coverage query: whether the base is covered and, if not, the
/// closure of what is left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coverage<E> {
    pub covered: bool,
    pub uncovered: IntervalSet<E>,
}

/// Is the closed `base` inside the union of the closed `pieces`?
pub fn interval_union_covers<E: Ord + Clone>(base: &Interval<E>, pieces: &[Interval<E>]) -> Coverage<E> {
    let mut relevant: Vec<&Interval<E>> = pieces
        .iter()
        .filter(|p| p.hi >= base.lo && p.lo <= base.hi)
        .collect();
    if base.lo == base.hi {
        let covered = !relevant.is_empty();
        let uncovered = if covered { IntervalSet::empty() } else { IntervalSet(vec![base.clone()]) };
        return Coverage { covered, uncovered };
    }
    relevant.sort_by(|a, b| a.lo.cmp(&b.lo));

    // Everything in [base.lo, reach] left of a recorded gap is covered; the
    // union is closed, so anything missed leaves a gap of positive length.
    let mut gaps = Vec::new();
    let mut reach = base.lo.clone();
    for piece in relevant {
        if piece.lo > reach {
            gaps.push(Interval { lo: reach.clone(), hi: piece.lo.clone() });
        }
        if piece.hi > reach {
            reach = piece.hi.clone();
        }
        if reach >= base.hi {
            break;
        }
    }
    if reach < base.hi {
        gaps.push(Interval { lo: reach, hi: base.hi.clone() });
    }
    Coverage { covered: gaps.is_empty(), uncovered: IntervalSet(gaps) }
}

/// The `x`-range of the upper semicircle of `target` lying in `coverer`.
pub fn upper_chord_interval(target: &Disk, coverer: &Disk) -> Option<Interval<Rational>> {
    let (c, r) = (&target.center, &target.radius);
    let (ci, ri) = (&coverer.center, &coverer.radius);
    let lo = c - r;
    let hi = c + r;
    // 2(c - ci) x <= ri^2 - ci^2 + c^2 - r^2
    let alpha = &(c - ci) * &Rational::from_integer(2);
    if alpha.is_zero() {
        return (r <= ri).then(|| Interval { lo, hi });
    }
    let beta = &(&(&ri.square() - &ci.square()) + &c.square()) - &r.square();
    let cut = &beta / &alpha;
    if alpha.is_positive() {
        // x <= cut
        (cut >= lo).then(|| Interval { lo, hi: cut.min(hi) })
    } else {
        // x >= cut
        (cut <= hi).then(|| Interval { lo: cut.max(lo), hi })
    }
}

/// Is `disk` inside the union of `others`? The uncovered part of its upper
/// semicircle is returned as `x`-intervals (the arcs exposed on the union's
/// boundary).
pub fn disk_covered_by_union(disk: &Disk, others: &[Disk]) -> Coverage<Rational> {
    let pieces: Vec<Interval<Rational>> = others
        .iter()
        .filter_map(|o| upper_chord_interval(disk, o))
        .collect();
    interval_union_covers(&Interval { lo: disk.left(), hi: disk.right() }, &pieces)
}

/// Intersection of a disk with the horizontal line at height `h`.
pub fn horizontal_section(disk: &Disk, h: &Rational) -> Option<Interval<QuadraticReal>> {
    let s = &disk.radius.square() - &h.square();
    match s.signum() {
        -1 => None,
        0 => {
            let c = QuadraticReal::rational(disk.center.clone());
            Some(Interval { lo: c.clone(), hi: c })
        }
        _ => Some(Interval {
            lo: QuadraticReal::new(disk.center.clone(), -Rational::one(), s.clone()),
            hi: QuadraticReal::new(disk.center.clone(), Rational::one(), s),
        }),
    }
}

/// Does the union contain every disk of radius `radius` centered in
/// `[lo + radius, hi - radius]`, i.e. the region swept by such a disk?
///
/// The region is a flat-topped strip of height `radius` capped by two disks;
/// by vertical monotonicity it is enough to cover the top segment and the two
/// cap disks. When the strip is narrower than `2*radius` the single disk
/// inscribed in `[lo, hi]` is checked instead.
pub fn swept_region_certificate(lo: &Rational, hi: &Rational, radius: &Rational, union: &[Disk]) -> bool {
    let width = hi - lo;
    let diameter = radius * &Rational::from_integer(2);
    if width < diameter {
        let half = &width / &Rational::from_integer(2);
        if !half.is_positive() {
            return true;
        }
        let inscribed = Disk::new(lo + &half, half);
        return disk_covered_by_union(&inscribed, union).covered;
    }
    let left_cap = Disk::new(lo + radius, radius.clone());
    let right_cap = Disk::new(hi - radius, radius.clone());
    let segment = Interval {
        lo: QuadraticReal::rational(left_cap.center.clone()),
        hi: QuadraticReal::rational(right_cap.center.clone()),
    };
    let sections: Vec<Interval<QuadraticReal>> =
        union.iter().filter_map(|d| horizontal_section(d, radius)).collect();
    interval_union_covers(&segment, &sections).covered
        && disk_covered_by_union(&left_cap, union).covered
        && disk_covered_by_union(&right_cap, union).covered
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn qr(p: Rational, c: i128, d: i128) -> QuadraticReal {
        QuadraticReal::new(p, Rational::from_integer(c), Rational::from_integer(d))
    }

    fn iv(lo: Rational, hi: Rational) -> Interval<Rational> {
        Interval::new(lo, hi)
    }

    #[test]
    fn point_in_disk_examples() {
        let d29 = Disk::ford(2, 9);
        let d19 = Disk::ford(1, 9);
        assert!(!point_in_disk(&q(1, 9), &q(1, 9), &d29, Containment::Closed));
        assert!(point_in_disk(&q(1, 9), &q(1, 9), &d19, Containment::Closed));
        assert!(!point_in_disk(&q(1, 9), &q(1, 9), &d19, Containment::Open));
        // 265/73984 < 289/73984
        let d316 = Disk::ford(3, 16);
        assert!(point_in_disk(&q(3, 17), &q(1, 17), &d316, Containment::Open));
    }

    #[test]
    fn compare_quadratic_examples() {
        let a = qr(q(3, 1), 1, 2);
        let b = qr(q(2, 1), 1, 5);
        assert_eq!(compare_quadratic(&a, &b), Ordering::Greater);
        assert_eq!(compare_quadratic(&qr(q(1, 1), 2, 4), &qr(q(5, 1), 0, 0)), Ordering::Equal);
        assert_eq!(compare_quadratic(&qr(q(0, 1), 1, 2), &qr(q(0, 1), 1, 3)), Ordering::Less);
        assert_eq!(compare_quadratic(&qr(q(0, 1), 1, 3), &qr(q(0, 1), 1, 2)), Ordering::Greater);
        // sqrt(8) = 2 sqrt(2)
        assert_eq!(compare_quadratic(&qr(q(0, 1), 1, 8), &qr(q(0, 1), 2, 2)), Ordering::Equal);
        // 1 - sqrt(2) vs -sqrt(3) + 1.3: -0.414 vs -0.432
        assert_eq!(compare_quadratic(&qr(q(1, 1), -1, 2), &qr(q(13, 10), -1, 3)), Ordering::Greater);
    }

    #[test]
    fn chord_interval_examples() {
        let unit = Disk::new(q(0, 1), q(1, 1));
        assert_eq!(upper_chord_interval(&unit, &Disk::new(q(1, 1), q(1, 1))), Some(iv(q(1, 2), q(1, 1))));
        assert_eq!(upper_chord_interval(&unit, &Disk::new(q(0, 1), q(2, 1))), Some(iv(q(-1, 1), q(1, 1))));
        assert_eq!(upper_chord_interval(&unit, &Disk::new(q(3, 1), q(1, 1))), None);
        assert_eq!(upper_chord_interval(&unit, &Disk::new(q(0, 1), q(1, 2))), None);
        // externally tangent: a single point
        assert_eq!(upper_chord_interval(&unit, &Disk::new(q(2, 1), q(1, 1))), Some(iv(q(1, 1), q(1, 1))));
    }

    #[test]
    fn union_cover_examples() {
        let base = iv(q(0, 1), q(1, 1));
        let touching = interval_union_covers(&base, &[iv(q(0, 1), q(1, 2)), iv(q(1, 2), q(1, 1))]);
        assert!(touching.covered);
        let gap = interval_union_covers(&base, &[iv(q(0, 1), q(1, 3)), iv(q(2, 3), q(1, 1))]);
        assert!(!gap.covered);
        assert_eq!(gap.uncovered, IntervalSet(vec![iv(q(1, 3), q(2, 3))]));

        let qb = Interval::new(QuadraticReal::rational(q(0, 1)), QuadraticReal::rational(q(1, 1)));
        let pieces = vec![
            Interval::new(QuadraticReal::rational(q(0, 1)), QuadraticReal::new(q(0, 1), q(1, 2), q(2, 1))),
            Interval::new(QuadraticReal::rational(q(1, 2)), QuadraticReal::rational(q(1, 1))),
        ];
        assert!(interval_union_covers(&qb, &pieces).covered);
    }

    #[test]
    fn union_cover_edges() {
        let base = iv(q(0, 1), q(1, 1));
        let none = interval_union_covers(&base, &[]);
        assert_eq!(none.uncovered, IntervalSet(vec![base.clone()]));
        let left_missing = interval_union_covers(&base, &[iv(q(1, 4), q(2, 1))]);
        assert_eq!(left_missing.uncovered, IntervalSet(vec![iv(q(0, 1), q(1, 4))]));
        let right_missing = interval_union_covers(&base, &[iv(q(-1, 1), q(3, 4))]);
        assert_eq!(right_missing.uncovered, IntervalSet(vec![iv(q(3, 4), q(1, 1))]));
        let outside = interval_union_covers(&base, &[iv(q(2, 1), q(3, 1))]);
        assert_eq!(outside.uncovered, IntervalSet(vec![base.clone()]));
        let point = iv(q(1, 2), q(1, 2));
        assert!(interval_union_covers(&point, &[iv(q(0, 1), q(1, 2))]).covered);
        assert!(!interval_union_covers(&point, &[iv(q(0, 1), q(1, 3))]).covered);
        let several = interval_union_covers(
            &base,
            &[iv(q(1, 5), q(2, 5)), iv(q(3, 5), q(4, 5)), iv(q(1, 10), q(1, 4))],
        );
        assert_eq!(
            several.uncovered,
            IntervalSet(vec![iv(q(0, 1), q(1, 10)), iv(q(2, 5), q(3, 5)), iv(q(4, 5), q(1, 1))])
        );
    }

    #[test]
    fn disk_cover_examples() {
        let half = Disk::new(q(1, 2), q(1, 2));
        let res = disk_covered_by_union(&half, &[Disk::new(q(1, 3), q(1, 3)), Disk::new(q(2, 3), q(1, 3))]);
        assert!(!res.covered);
        assert!(res.uncovered.has_positive_length());
        assert!(disk_covered_by_union(&Disk::new(q(1, 2), q(1, 4)), &[half.clone()]).covered);
        let fam = disk_covered_by_union(&Disk::ford(3, 17), &[Disk::ford(3, 16)]);
        assert!(!fam.covered);
        assert!(fam.uncovered.has_positive_length());
    }

    #[test]
    fn certificate_examples() {
        let u9 = [Disk::ford(1, 9), Disk::ford(2, 9)];
        assert!(swept_region_certificate(&q(0, 1), &q(3, 9), &q(1, 18), &u9));
        let u15 = [Disk::ford(11, 30)];
        assert!(swept_region_certificate(&q(5, 15), &q(6, 15), &q(1, 45), &u15));
        assert!(!swept_region_certificate(&q(5, 15), &q(6, 15), &q(1, 15), &[]));
        // too narrow for the radius: the inscribed disk is what must be covered
        assert!(swept_region_certificate(&q(5, 15), &q(6, 15), &q(1, 15), &u15));
    }
}
