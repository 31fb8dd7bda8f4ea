//! Serialized forms of every command's result. Rationals are written as
//! `[numerator, denominator]` and disks as `[a, b]`; no field holds a decimal.

use serde::{Deserialize, Serialize};

use ford_core::complexity::{ComplexityReport, PairComplexity, PoleReport, RangeReport, Source};
use ford_core::oracle::{CrossReport, MismatchKind};
use ford_core::region::{predicted_shape, Region};
use ford_core::witness::{LowerBound, WitnessBundle};
use ford_core::{Rational, ENGINE_VERSION};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timings {
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionEntry {
    pub n: u64,
    pub n_next: u64,
    pub class: String,
    pub shape: String,
    pub certificate_k: Option<u32>,
    /// `computed`, `good-region` or `mirror`.
    pub source: String,
    pub mirror_of: Option<u64>,
    pub disks: Vec<(u64, u64)>,
    pub complexity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub engine_version: String,
    #[serde(rename = "N")]
    pub modulus: u64,
    pub factorization: Vec<(u64, u32)>,
    pub psi: usize,
    pub k_max: u32,
    pub exhaustive: bool,
    pub regions: Vec<RegionEntry>,
    pub complexity: u32,
    pub predicted_zero: bool,
    pub agreement: bool,
    pub timings: Option<Timings>,
}

impl ResultRecord {
    pub fn from_report(rep: &ComplexityReport, k_max: u32, exhaustive: bool) -> Self {
        let big_n = rep.modulus.value_u64().expect("explicit N");
        let regions = rep
            .pairs
            .iter()
            .map(|p| {
                let (source, mirror_of) = match &p.source {
                    Source::Computed(_) => ("computed", None),
                    Source::GoodRegion => ("good-region", None),
                    Source::Mirror { of, .. } => ("mirror", Some(*of)),
                };
                RegionEntry {
                    n: p.n,
                    n_next: p.n_next,
                    class: p.class.as_str().to_string(),
                    shape: p.shape.as_str().to_string(),
                    certificate_k: p.certificate_k(),
                    source: source.to_string(),
                    mirror_of,
                    disks: p.absolute_pairs(big_n),
                    complexity: p.complexity,
                }
            })
            .collect();
        ResultRecord {
            schema_version: SCHEMA_VERSION,
            engine_version: ENGINE_VERSION.to_string(),
            modulus: big_n,
            factorization: rep.modulus.factors().to_vec(),
            psi: rep.breakpoints.len() - 1,
            k_max,
            exhaustive,
            regions,
            complexity: rep.value,
            predicted_zero: rep.predicted_zero,
            agreement: rep.agrees(),
            timings: None,
        }
    }
}

pub fn rational_pair(r: &Rational) -> (i128, i128) {
    r.to_i128_pair().expect("coordinates of a machine-sized region")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoleRecord {
    pub count: u32,
    pub coverers: Vec<(u64, u64)>,
    pub tangential: Vec<(u64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiskRecord {
    pub disk: (u64, u64),
    /// Exposed arcs as `x`-ranges `[[p, q], [r, s]]` in the original coordinates.
    pub exposed: Vec<((i128, i128), (i128, i128))>,
    pub pole: PoleRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionRecord {
    pub schema_version: u32,
    pub engine_version: String,
    #[serde(rename = "N")]
    pub modulus: u64,
    pub n: u64,
    pub n_next: u64,
    pub class: String,
    pub shape: String,
    pub predicted_shape: Option<String>,
    pub k_max: u32,
    pub certificate_k: u32,
    pub candidates_examined: usize,
    pub disks: Vec<DiskRecord>,
    pub complexity: u32,
    pub timings: Option<Timings>,
}

fn pole_record(region: &Region, p: &PoleReport) -> PoleRecord {
    let abs = |&(k, m): &(u32, u64)| region.absolute(k, m).expect("machine-sized region");
    PoleRecord {
        count: p.count,
        coverers: p.coverers.iter().map(abs).collect(),
        tangential: p.tangential.iter().map(abs).collect(),
    }
}

impl RegionRecord {
    pub fn from_pair(pc: &PairComplexity, k_max: u32) -> Self {
        let bs = &pc.boundary;
        let region = &bs.region;
        let big_n = region.modulus().value_u64().expect("explicit N");
        let n = region.n_u64().expect("machine-sized n");
        let shift = Rational::from_integer(n as i128);
        let scale = Rational::new(1, big_n as i128);
        let unscale = |x: &Rational| rational_pair(&(&(x + &shift) * &scale));
        let mut disks: Vec<DiskRecord> = bs
            .disks
            .iter()
            .zip(&pc.poles)
            .map(|(d, p)| DiskRecord {
                disk: region.absolute(d.level, d.offset).expect("machine-sized region"),
                exposed: d.exposed.iter().map(|iv| (unscale(&iv.lo), unscale(&iv.hi))).collect(),
                pole: pole_record(region, p),
            })
            .collect();
        disks.sort_by(|x, y| (x.disk.0 as u128 * y.disk.1 as u128).cmp(&(y.disk.0 as u128 * x.disk.1 as u128)));
        RegionRecord {
            schema_version: SCHEMA_VERSION,
            engine_version: ENGINE_VERSION.to_string(),
            modulus: big_n,
            n,
            n_next: n + region.span(),
            class: region.class().as_str().to_string(),
            shape: pc.shape.as_str().to_string(),
            predicted_shape: predicted_shape(region).map(|s| s.as_str().to_string()),
            k_max,
            certificate_k: bs.certificate_k,
            candidates_examined: bs.candidates_examined,
            disks,
            complexity: pc.value,
            timings: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepEntry {
    #[serde(rename = "N")]
    pub modulus: u64,
    pub omega: usize,
    pub p1: u64,
    pub complexity: Option<u32>,
    pub predicted_zero: bool,
    pub agreement: Option<bool>,
    pub unresolved: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub schema_version: u32,
    pub engine_version: String,
    pub lo: u64,
    pub hi: u64,
    pub k_max: u32,
    pub entries: Vec<SweepEntry>,
    pub disagreements: Vec<u64>,
    pub unresolved: Vec<u64>,
    pub all_agree: bool,
    pub timings: Option<Timings>,
}

impl SweepRecord {
    pub fn from_report(rep: &RangeReport, lo: u64, hi: u64, k_max: u32) -> Self {
        SweepRecord {
            schema_version: SCHEMA_VERSION,
            engine_version: ENGINE_VERSION.to_string(),
            lo,
            hi,
            k_max,
            entries: rep
                .entries
                .iter()
                .map(|e| SweepEntry {
                    modulus: e.n,
                    omega: e.omega,
                    p1: e.smallest_prime,
                    complexity: e.complexity,
                    predicted_zero: e.predicted_zero,
                    agreement: e.agrees(),
                    unresolved: e.unresolved.clone(),
                })
                .collect(),
            disagreements: rep.disagreements(),
            unresolved: rep.unresolved(),
            all_agree: rep.all_agree(),
            timings: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessC1Record {
    pub schema_version: u32,
    pub engine_version: String,
    #[serde(rename = "N")]
    pub modulus: u64,
    pub factorization: Vec<(u64, u32)>,
    /// `None` when the factorisation admits no construction.
    pub n: Option<u64>,
    pub pair_complexity: Option<u32>,
    pub certificate_k: Option<u32>,
    pub disks: Vec<(u64, u64)>,
    /// Pole report of `D_{(5n+2)/(5N)}`.
    pub pole: Option<PoleRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerBoundRecord {
    pub holds: bool,
    pub hypotheses_hold: bool,
    pub retained: Vec<u64>,
    pub pole_count: Option<u32>,
    pub certificate_k: Option<u32>,
}

impl From<&LowerBound> for LowerBoundRecord {
    fn from(lb: &LowerBound) -> Self {
        LowerBoundRecord {
            holds: lb.holds,
            hypotheses_hold: lb.hypotheses_hold,
            retained: lb.retained.clone(),
            pole_count: lb.pole_count,
            certificate_k: lb.certificate_k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessQRecord {
    pub schema_version: u32,
    pub engine_version: String,
    pub q: u64,
    #[serde(rename = "A")]
    pub a: u64,
    #[serde(rename = "A_prime")]
    pub a_prime: u64,
    #[serde(rename = "B")]
    pub b: usize,
    #[serde(rename = "C_prime")]
    pub c_prime: u64,
    #[serde(rename = "C")]
    pub c: u64,
    pub b_bound: (i128, i128),
    pub c_bound: (i128, i128),
    pub bounds_hold: bool,
    /// `(prime, a, b)`: the prime divides `a n + b`.
    pub assignments: Vec<(u64, u64, u64)>,
    /// Decimal digits of `n`, which does not fit any JSON integer type.
    pub n: String,
    pub verified: bool,
    pub k_max: u32,
    pub lower_bound: Option<LowerBoundRecord>,
}

impl WitnessQRecord {
    pub fn new(bundle: &WitnessBundle, k_max: u32, lb: Option<&LowerBound>) -> Self {
        let c = &bundle.constants;
        WitnessQRecord {
            schema_version: SCHEMA_VERSION,
            engine_version: ENGINE_VERSION.to_string(),
            q: bundle.q,
            a: c.a,
            a_prime: c.a_prime,
            b: c.b,
            c_prime: c.c_prime,
            c: c.c,
            b_bound: rational_pair(&c.b_bound()),
            c_bound: rational_pair(&c.c_bound()),
            bounds_hold: c.bounds_hold(),
            assignments: bundle.primes.iter().zip(&c.s2).map(|(&p, &(a, b))| (p, a, b)).collect(),
            n: bundle.n.to_string(),
            verified: bundle.verified,
            k_max,
            lower_bound: lb.map(LowerBoundRecord::from),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MismatchRecord {
    #[serde(rename = "N")]
    pub modulus: u64,
    pub n: u64,
    pub kind: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossRecord {
    pub schema_version: u32,
    pub engine_version: String,
    pub lo: u64,
    pub hi: u64,
    pub sample_rate: f64,
    pub seed: u64,
    pub k_max: u32,
    pub regions_checked: usize,
    pub exact_fallbacks: usize,
    pub mismatches: Vec<MismatchRecord>,
}

impl CrossRecord {
    pub fn new(rep: &CrossReport, lo: u64, hi: u64, sample_rate: f64, seed: u64, k_max: u32) -> Self {
        let mismatches = rep
            .mismatches
            .iter()
            .map(|m| {
                let (kind, detail) = match &m.kind {
                    MismatchKind::DiskSet { engine, oracle } => {
                        ("disk-set", format!("engine {engine:?} oracle {oracle:?}"))
                    }
                    MismatchKind::PoleCounts { engine, oracle } => {
                        ("pole-counts", format!("engine {engine:?} oracle {oracle:?}"))
                    }
                    MismatchKind::EngineFailed(e) => ("engine-failed", e.clone()),
                    MismatchKind::OracleFailed(e) => ("oracle-failed", e.clone()),
                };
                MismatchRecord { modulus: m.modulus, n: m.n, kind: kind.to_string(), detail }
            })
            .collect();
        CrossRecord {
            schema_version: SCHEMA_VERSION,
            engine_version: ENGINE_VERSION.to_string(),
            lo,
            hi,
            sample_rate,
            seed,
            k_max,
            regions_checked: rep.regions_checked,
            exact_fallbacks: rep.exact_fallbacks,
            mismatches,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ford_core::complexity::{pair_complexity, total_complexity, verify_range};
    use ford_core::numtheory::factorize;

    fn round_trip<T: Serialize + serde::de::DeserializeOwned + PartialEq + std::fmt::Debug>(v: &T) {
        let s = serde_json::to_string(v).unwrap();
        assert_eq!(&serde_json::from_str::<T>(&s).unwrap(), v);
    }

    #[test]
    fn records_round_trip() {
        round_trip(&ResultRecord::from_report(&total_complexity(210, 64).unwrap(), 64, false));
        let region = Region::at_breakpoint(factorize(210).unwrap(), 117).unwrap();
        round_trip(&RegionRecord::from_pair(&pair_complexity(&region, 64).unwrap(), 64));
        round_trip(&SweepRecord::from_report(&verify_range(2, 50, 64, 1).unwrap(), 2, 50, 64));
    }
}
