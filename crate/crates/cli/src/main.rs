mod cache;
mod record;
mod svg;

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use ford_core::complexity::{
    pair_complexity, pole_complexity, total_complexity_with, verify_range, ComplexityError, ComplexityOptions,
};
use ford_core::numtheory::{factorize, psi_breakpoints};
use ford_core::oracle::cross_validate;
use ford_core::region::{Region, RegionError};
use ford_core::witness::{build_c1_witness, build_q_witness, verify_lower_bound, WitnessError};

use cache::Cache;
use record::*;

#[derive(Parser)]
#[command(name = "ford", version, about = "Boundary disks and north-pole complexity of Ford-disk regions")]
struct Cli {
    /// Maximum certificate depth; a region that needs more is reported as unresolved.
    #[arg(long, global = true, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..))]
    kmax: u32,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, env = "FORD_CACHE")]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    no_cache: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Include wall-clock timings (makes output run-dependent).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Total complexity of level N, region by region.
    Complexity {
        #[arg(value_parser = clap::value_parser!(u64).range(2..))]
        modulus: u64,
        /// Compute every bad region instead of deriving mirrored ones.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Boundary set, exposed arcs and pole reports of the region starting at n.
    Region {
        #[arg(value_parser = clap::value_parser!(u64).range(2..))]
        modulus: u64,
        n: u64,
    },
    /// Compare computed complexity against the prediction for LO..=HI.
    Sweep {
        #[arg(value_parser = clap::value_parser!(u64).range(2..))]
        lo: u64,
        hi: u64,
    },
    /// A breakpoint n whose pair has complexity at least one.
    WitnessC1 {
        #[arg(value_parser = clap::value_parser!(u64).range(2..))]
        modulus: u64,
    },
    /// Constants, level and breakpoint of the lower-bound construction for prime q.
    WitnessQ {
        q: u64,
        /// Skip the geometric check of the constructed region.
        #[arg(long)]
        skip_geometry: bool,
    },
    /// Draw boundary disks and breakpoints as SVG.
    Render {
        #[arg(value_parser = clap::value_parser!(u64).range(2..))]
        modulus: u64,
        /// Draw only the region starting at this breakpoint.
        #[arg(long)]
        region: Option<u64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check the exact engine against the high-precision oracle.
    CrossValidate {
        #[arg(value_parser = clap::value_parser!(u64).range(2..))]
        lo: u64,
        hi: u64,
        #[arg(long, default_value_t = 1.0)]
        sample_rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// A failure reported as JSON on stderr.
struct Failure {
    kind: &'static str,
    message: String,
    extra: serde_json::Value,
    code: u8,
}

impl Failure {
    fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Failure { kind, message: message.into(), extra: serde_json::Value::Null, code: 1 }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, ..Failure::new("usage", message) }
    }

    fn with(mut self, extra: serde_json::Value) -> Self {
        self.extra = extra;
        self
    }

    fn emit(&self) -> ExitCode {
        let mut obj = json!({ "error": self.kind, "message": self.message });
        if let serde_json::Value::Object(m) = &self.extra {
            for (k, v) in m {
                obj[k] = v.clone();
            }
        }
        eprintln!("{obj}");
        ExitCode::from(self.code)
    }
}

impl From<RegionError> for Failure {
    fn from(e: RegionError) -> Self {
        match &e {
            RegionError::Unresolved { n, span, k_max, .. } => Failure::new(
                "unresolved",
                format!("no swept-region certificate up to depth {k_max}; raise --kmax"),
            )
                .with(json!({ "n": n, "span": span, "k_max": k_max })),
            RegionError::NotBreakpoint(_) | RegionError::BadRightEnd(_) | RegionError::InteriorBreakpoint(_) => {
                Failure::usage(e.to_string())
            }
            _ => Failure::new("engine", e.to_string()),
        }
    }
}

impl From<ComplexityError> for Failure {
    fn from(e: ComplexityError) -> Self {
        match e {
            ComplexityError::Region(r) => r.into(),
            ComplexityError::NumTheory(n) => Failure::usage(n.to_string()),
            other => Failure::new("engine", other.to_string()),
        }
    }
}

impl From<WitnessError> for Failure {
    fn from(e: WitnessError) -> Self {
        match e {
            WitnessError::BadQ(_) => Failure::usage(e.to_string()),
            WitnessError::Region(r) => r.into(),
            other => Failure::new("engine", other.to_string()),
        }
    }
}

struct Ctx {
    k_max: u32,
    format: Format,
    timings: bool,
    cache: Option<Cache>,
    started: Instant,
}

impl Ctx {
    fn elapsed(&self) -> Option<Timings> {
        self.timings.then(|| Timings { elapsed_ms: self.started.elapsed().as_millis() as u64 })
    }

    fn cached<T, F>(&self, key: &str, compute: F) -> Result<T, Failure>
    where
        T: Serialize + serde::de::DeserializeOwned,
        F: FnOnce() -> Result<T, Failure>,
    {
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.load(key)) {
            return Ok(hit);
        }
        let value = compute()?;
        if let Some(c) = &self.cache {
            if let Err(e) = c.store(key, &value) {
                let msg = json!({ "warning": "cache-write-failed", "path": c.dir().display().to_string(), "reason": e.to_string() });
                eprintln!("{msg}");
            }
        }
        Ok(value)
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(value).map_err(|e| Failure::new("io", e.to_string()))?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{s}").map_err(|e| Failure::new("io", e.to_string()))
}

fn print_csv<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<(), Failure> {
    let io_err = |e: csv::Error| Failure::new("io", e.to_string());
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(std::io::stdout().lock());
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.serialize(r).map_err(io_err)?;
    }
    w.flush().map_err(|e| Failure::new("io", e.to_string()))
}

fn disks_text(disks: &[(u64, u64)]) -> String {
    disks.iter().map(|(a, b)| format!("{a}/{b}")).collect::<Vec<_>>().join(" ")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn complexity_record(ctx: &Ctx, big_n: u64, exhaustive: bool) -> Result<ResultRecord, Failure> {
    let key = format!("complexity:N={big_n}:kmax={}:exhaustive={exhaustive}", ctx.k_max);
    ctx.cached(&key, || {
        let rep = total_complexity_with(big_n, ComplexityOptions { k_max: ctx.k_max, exhaustive })?;
        Ok(ResultRecord::from_report(&rep, ctx.k_max, exhaustive))
    })
}

fn cmd_complexity(ctx: &Ctx, big_n: u64, exhaustive: bool) -> Result<(), Failure> {
    let mut rec = complexity_record(ctx, big_n, exhaustive)?;
    rec.timings = ctx.elapsed();
    match ctx.format {
        Format::Json => print_json(&rec)?,
        Format::Csv => print_csv(
            &["n", "n_next", "class", "shape", "certificate_k", "source", "mirror_of", "complexity", "disks"],
            rec.regions.iter().map(|r| {
                (
                    r.n,
                    r.n_next,
                    &r.class,
                    &r.shape,
                    opt(r.certificate_k),
                    &r.source,
                    opt(r.mirror_of),
                    r.complexity,
                    disks_text(&r.disks),
                )
            }),
        )?,
    }
    if !rec.agreement {
        return Err(Failure::new("disagreement", format!("complexity {} contradicts the prediction", rec.complexity))
            .with(json!({ "N": big_n, "complexity": rec.complexity, "predicted_zero": rec.predicted_zero })));
    }
    Ok(())
}

fn cmd_region(ctx: &Ctx, big_n: u64, n: u64) -> Result<(), Failure> {
    let key = format!("region:N={big_n}:n={n}:kmax={}", ctx.k_max);
    let mut rec = ctx.cached(&key, || {
        let modulus = factorize(big_n).map_err(|e| Failure::usage(e.to_string()))?;
        let region = Region::at_breakpoint(modulus, n)?;
        let pc = pair_complexity(&region, ctx.k_max)?;
        Ok(RegionRecord::from_pair(&pc, ctx.k_max))
    })?;
    rec.timings = ctx.elapsed();
    match ctx.format {
        Format::Json => print_json(&rec),
        Format::Csv => print_csv(
            &["a", "b", "pole_count", "coverers", "tangential", "exposed"],
            rec.disks.iter().map(|d| {
                let arcs: Vec<String> = d
                    .exposed
                    .iter()
                    .map(|((p, q), (r, s))| format!("[{p}/{q},{r}/{s}]"))
                    .collect();
                (
                    d.disk.0,
                    d.disk.1,
                    d.pole.count,
                    disks_text(&d.pole.coverers),
                    disks_text(&d.pole.tangential),
                    arcs.join(" "),
                )
            }),
        ),
    }
}

fn cmd_sweep(ctx: &Ctx, lo: u64, hi: u64, jobs: usize) -> Result<(), Failure> {
    if hi < lo {
        return Err(Failure::usage(format!("empty range {lo}..={hi}")));
    }
    let rep = verify_range(lo, hi, ctx.k_max, jobs)?;
    let mut rec = SweepRecord::from_report(&rep, lo, hi, ctx.k_max);
    rec.timings = ctx.elapsed();
    match ctx.format {
        Format::Json => print_json(&rec)?,
        Format::Csv => print_csv(
            &["N", "omega", "p1", "complexity", "predicted_zero", "agreement", "unresolved"],
            rec.entries.iter().map(|e| {
                (
                    e.modulus,
                    e.omega,
                    e.p1,
                    opt(e.complexity),
                    e.predicted_zero,
                    opt(e.agreement),
                    e.unresolved.clone().unwrap_or_default(),
                )
            }),
        )?,
    }
    if !rec.unresolved.is_empty() {
        return Err(Failure::new("unresolved", format!("{} levels unresolved at k_max {}", rec.unresolved.len(), ctx.k_max))
            .with(json!({ "levels": rec.unresolved, "k_max": ctx.k_max })));
    }
    if !rec.disagreements.is_empty() {
        return Err(Failure::new("disagreement", format!("{} levels contradict the prediction", rec.disagreements.len()))
            .with(json!({ "levels": rec.disagreements })));
    }
    Ok(())
}

fn cmd_witness_c1(ctx: &Ctx, big_n: u64) -> Result<(), Failure> {
    let modulus = factorize(big_n).map_err(|e| Failure::usage(e.to_string()))?;
    let mut rec = WitnessC1Record {
        schema_version: SCHEMA_VERSION,
        engine_version: ford_core::ENGINE_VERSION.to_string(),
        modulus: big_n,
        factorization: modulus.factors().to_vec(),
        n: None,
        pair_complexity: None,
        certificate_k: None,
        disks: Vec::new(),
        pole: None,
    };
    if let Some(n) = build_c1_witness(&modulus) {
        let n: u64 = n.try_into().map_err(|_| Failure::new("engine", "witness exceeds 64 bits"))?;
        let region = Region::at_breakpoint(modulus, n)?;
        let pc = pair_complexity(&region, ctx.k_max)?;
        let bs = &pc.boundary;
        rec.n = Some(n);
        rec.pair_complexity = Some(pc.value);
        rec.certificate_k = Some(bs.certificate_k);
        let mut disks = bs.absolute_pairs().unwrap_or_default();
        disks.sort_by(|x, y| (x.0 as u128 * y.1 as u128).cmp(&(y.0 as u128 * x.1 as u128)));
        rec.disks = disks;
        if let Ok(p) = pole_complexity(bs, 5, 2) {
            let abs = |&(k, m): &(u32, u64)| region.absolute(k, m).expect("machine-sized region");
            rec.pole = Some(PoleRecord {
                count: p.count,
                coverers: p.coverers.iter().map(abs).collect(),
                tangential: p.tangential.iter().map(abs).collect(),
            });
        }
    }
    match ctx.format {
        Format::Json => print_json(&rec)?,
        Format::Csv => print_csv(
            &["N", "n", "pair_complexity", "certificate_k", "disks"],
            [(big_n, opt(rec.n), opt(rec.pair_complexity), opt(rec.certificate_k), disks_text(&rec.disks))],
        )?,
    }
    if let Some(c) = rec.pair_complexity {
        if c < 1 {
            return Err(Failure::new("witness-failed", format!("pair at n = {} has complexity 0", opt(rec.n))));
        }
    }
    Ok(())
}

fn cmd_witness_q(ctx: &Ctx, q: u64, skip_geometry: bool) -> Result<(), Failure> {
    let bundle = build_q_witness(q)?;
    let lb = if skip_geometry { None } else { Some(verify_lower_bound(&bundle, ctx.k_max)?) };
    let rec = WitnessQRecord::new(&bundle, ctx.k_max, lb.as_ref());
    match ctx.format {
        Format::Json => print_json(&rec)?,
        Format::Csv => print_csv(
            &["q", "A", "A_prime", "B", "C_prime", "C", "bounds_hold", "verified", "lower_bound_holds", "n"],
            [(
                rec.q,
                rec.a,
                rec.a_prime,
                rec.b,
                rec.c_prime,
                rec.c,
                rec.bounds_hold,
                rec.verified,
                opt(rec.lower_bound.as_ref().map(|l| l.holds)),
                &rec.n,
            )],
        )?,
    }
    let holds = rec.lower_bound.as_ref().is_none_or(|l| l.holds);
    if !(rec.verified && rec.bounds_hold && holds) {
        return Err(Failure::new("witness-failed", format!("construction for q = {q} did not verify")));
    }
    Ok(())
}

fn cmd_render(ctx: &Ctx, big_n: u64, only: Option<u64>, output: &PathBuf) -> Result<(), Failure> {
    let modulus = factorize(big_n).map_err(|e| Failure::usage(e.to_string()))?;
    let bps = psi_breakpoints(&modulus).map_err(|e| Failure::usage(e.to_string()))?;
    let (disks, marks, x0, x1): (Vec<(u64, u64)>, Vec<u64>, f64, f64) = match only {
        Some(n) => {
            let region = Region::at_breakpoint(modulus, n)?;
            let bs = pair_complexity(&region, ctx.k_max)?.boundary;
            let n_next = n + region.span();
            let mut disks = bs.absolute_pairs().unwrap_or_default();
            disks.sort_by(|x, y| (x.0 as u128 * y.1 as u128).cmp(&(y.0 as u128 * x.1 as u128)));
            (disks, vec![n, n_next], n as f64 / big_n as f64, n_next as f64 / big_n as f64)
        }
        None => {
            let rec = complexity_record(ctx, big_n, false)?;
            let mut seen = BTreeSet::new();
            let mut disks = Vec::new();
            for r in &rec.regions {
                for &d in &r.disks {
                    if seen.insert(d) {
                        disks.push(d);
                    }
                }
            }
            (disks, bps.points().to_vec(), 0.0, 1.0)
        }
    };
    let pad = 1.0 / big_n as f64;
    let shapes: Vec<svg::Shape> = disks.iter().map(|&(a, b)| svg::Shape { a, b }).collect();
    let doc = svg::render(big_n, x0 - pad, x1 + pad, &shapes, &marks);
    std::fs::write(output, doc).map_err(|e| Failure::new("io", format!("{}: {e}", output.display())))?;
    let summary = json!({ "N": big_n, "region": only, "output": output.display().to_string(), "disks": disks.len(), "breakpoints": marks.len() });
    match ctx.format {
        Format::Json => print_json(&summary),
        Format::Csv => print_csv(&["output", "disks", "breakpoints"], [(output.display().to_string(), disks.len(), marks.len())]),
    }
}

fn cmd_cross(ctx: &Ctx, lo: u64, hi: u64, rate: f64, seed: u64) -> Result<(), Failure> {
    if hi < lo || !(rate > 0.0 && rate <= 1.0) {
        return Err(Failure::usage("need LO <= HI and 0 < sample-rate <= 1"));
    }
    let rep = cross_validate(lo, hi, rate, seed, ctx.k_max);
    let rec = CrossRecord::new(&rep, lo, hi, rate, seed, ctx.k_max);
    match ctx.format {
        Format::Json => print_json(&rec)?,
        Format::Csv => print_csv(
            &["N", "n", "kind", "detail"],
            rec.mismatches.iter().map(|m| (m.modulus, m.n, &m.kind, &m.detail)),
        )?,
    }
    if !rec.mismatches.is_empty() {
        return Err(Failure::new("mismatch", format!("{} regions disagree with the oracle", rec.mismatches.len())));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let jobs = cli.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(Failure::usage("--jobs must be positive"));
    }
    // Commands that parallelise internally use the global pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    let cache = (!cli.no_cache).then(|| Cache::new(cli.cache_dir.clone().unwrap_or_else(|| PathBuf::from(".ford-cache"))));
    let ctx = Ctx { k_max: cli.kmax, format: cli.format, timings: cli.timings, cache, started: Instant::now() };
    match cli.command {
        Command::Complexity { modulus, exhaustive } => cmd_complexity(&ctx, modulus, exhaustive),
        Command::Region { modulus, n } => cmd_region(&ctx, modulus, n),
        Command::Sweep { lo, hi } => cmd_sweep(&ctx, lo, hi, jobs),
        Command::WitnessC1 { modulus } => cmd_witness_c1(&ctx, modulus),
        Command::WitnessQ { q, skip_geometry } => cmd_witness_q(&ctx, q, skip_geometry),
        Command::Render { modulus, region, output } => cmd_render(&ctx, modulus, region, &output),
        Command::CrossValidate { lo, hi, sample_rate, seed } => cmd_cross(&ctx, lo, hi, sample_rate, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let message = e.render().to_string();
            let first = message.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return Failure::usage(first).emit();
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.emit(),
    }
}
