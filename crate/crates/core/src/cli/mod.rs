//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 when a search ends inconclusive, 1 on any
//! error (including usage errors).

pub mod cache;
pub mod config;
pub mod report;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_traits::Signed;
use serde::Serialize;

use crate::criteria::{self, Place, SelmerLedger, StarStar, StarStarOutcome, VerdictKind};
use crate::diagnostics::{self, DensityReport, RankJumpRow, RootNumberRow};
use crate::elliptic::{
    certify_positive_rank, CurvePoint, Family, Provenance, RankOutcome, RankPositivityCertificate, TwistedCurve,
    WitnessRoute,
};
use crate::error::{Error, Result};
use crate::quartic::QuarticTorsor;
use crate::rational::{self, ExactRational};
use crate::surface::{self, Atlas, Leg, SprReport, SurfaceFamily};

use cache::PointCache;
use config::{Format, RunConfig};
use report::{Report, Status, Table};

pub const CACHE_ENV: &str = "K3TWIST_CACHE";

#[derive(Debug, Parser)]
#[command(name = "k3twist", version, about = "Rational points on d(1 + a²T⁴)Y² = X³ - X via quadratic twists")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Naive height bound for point searches.
    #[arg(long, global = true, default_value_t = config::DEFAULT_HEIGHT)]
    height: u64,
    /// Largest |n| the trial-division factorizer accepts as input.
    #[arg(long, global = true, default_value_t = config::DEFAULT_FACTOR_BOUND)]
    factor_bound: u64,
    /// Decimal digits in reported gaps.
    #[arg(long, global = true, default_value_t = diagnostics::DEFAULT_PRECISION)]
    precision: usize,
    /// p-adic depth for brute local solubility.
    #[arg(long, global = true, default_value_t = config::DEFAULT_PADIC_PRECISION)]
    padic_precision: u32,
    /// Let curated rank facts stand in for missing witnesses (flagged).
    #[arg(long, global = true)]
    allow_external_facts: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Point cache file.
    #[arg(long, global = true, env = CACHE_ENV)]
    cache: Option<PathBuf>,
    /// Ignore the point cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Seed for random sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

impl GlobalArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            height: self.height,
            factor_bound: self.factor_bound,
            precision: self.precision,
            padic_precision: self.padic_precision,
            allow_external_facts: self.allow_external_facts,
            format: self.format,
            cache: if self.no_cache { None } else { self.cache.clone() },
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args, Clone, Copy)]
struct SurfaceArgs {
    #[arg(short = 'd', long = "d", allow_hyphen_values = true)]
    d: i64,
    #[arg(short = 'a', long = "a", allow_hyphen_values = true)]
    a: i64,
    #[arg(short = 'C', long = "C", allow_hyphen_values = true)]
    c: i64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Positive-rank certificate for the twist D·y² = x³ ∓ x.
    TwistRank {
        #[arg(allow_hyphen_values = true)]
        d: i64,
        #[arg(long, value_enum, default_value_t = FamilyArg::Congruent)]
        family: FamilyArg,
    },
    /// Check SPR(C): torsor point plus positive rank on both twists.
    Spr {
        #[command(flatten)]
        s: SurfaceArgs,
    },
    /// Exact surface points generated from an SPR certificate.
    Atlas {
        #[command(flatten)]
        s: SurfaceArgs,
        #[arg(long, value_parser = config::parse_grid)]
        grid: (u32, u32),
        /// Write a (T, Y) scatter to this file.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Also emit the rank-jump table.
        #[arg(long)]
        rank_jumps: bool,
    },
    /// Largest gap between T-projections for one or more atlas grids.
    Density {
        #[command(flatten)]
        s: SurfaceArgs,
        #[arg(long, value_parser = config::parse_grid, required = true)]
        grid: Vec<(u32, u32)>,
        #[arg(long, value_parser = config::parse_interval, allow_hyphen_values = true)]
        interval: (ExactRational, ExactRational),
        /// Write a (T, Y) scatter of the largest atlas to this file.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Local solubility of C·s² = 1 + a²t⁴.
    Solubility {
        #[arg(short = 'a', long = "a")]
        a: i64,
        #[arg(short = 'C', long = "C")]
        c: i64,
        /// Also decide every relevant place directly.
        #[arg(long)]
        brute: bool,
    },
    /// Root numbers of the fibers E^{[d(1 + a²T⁴)]}.
    RootNumber {
        #[arg(short = 'd', long = "d", allow_hyphen_values = true)]
        d: i64,
        #[arg(short = 'a', long = "a", allow_hyphen_values = true)]
        a: i64,
        /// Number of random T = l/m.
        #[arg(long, conflicts_with = "t", required_unless_present = "t")]
        sample: Option<usize>,
        /// Bound on |l|, |m| for sampled T.
        #[arg(long, default_value_t = 20)]
        sample_bound: i64,
        /// Explicit comma-separated T values.
        #[arg(long, value_delimiter = ',', value_parser = config::parse_rational, allow_hyphen_values = true)]
        t: Vec<ExactRational>,
    },
    /// Selmer ledger, Kummer lower bound and condition (**) for E^{2C}.
    Descent {
        #[arg(short = 'C', long = "C")]
        c: i64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum FamilyArg {
    #[value(name = "x3-x")]
    Congruent,
    #[value(name = "x3+x")]
    Plus,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Congruent => Family::Congruent,
            FamilyArg::Plus => Family::Plus,
        }
    }
}

/// Parse `args` (program name first), run, print, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let cfg = cli.global.config();
    match execute(&cli.command, &cfg) {
        Ok(report) => match emit(&report, &cfg) {
            Ok(()) => report.status.exit_code(),
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn emit(report: &Report, cfg: &RunConfig) -> Result<()> {
    let text = report.render(cfg.format)?;
    if let Some((path, svg)) = &report.svg {
        std::fs::write(path, svg)?;
    }
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn execute(cmd: &Command, cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    match cmd {
        Command::TwistRank { d, family } => cmd_twist_rank(*d, (*family).into(), cfg),
        Command::Spr { s } => cmd_spr(s, cfg),
        Command::Atlas { s, grid, svg, rank_jumps } => cmd_atlas(s, *grid, svg.as_ref(), *rank_jumps, cfg),
        Command::Density { s, grid, interval, svg } => cmd_density(s, grid, interval, svg.as_ref(), cfg),
        Command::Solubility { a, c, brute } => cmd_solubility(*a, *c, *brute, cfg),
        Command::RootNumber { d, a, sample, sample_bound, t } => cmd_root_number(*d, *a, *sample, *sample_bound, t, cfg),
        Command::Descent { c } => cmd_descent(*c, cfg),
    }
}

fn open_cache(cfg: &RunConfig) -> Option<PointCache> {
    let path = cfg.cache.as_ref()?;
    let cache = PointCache::load(path);
    for msg in &cache.dropped {
        eprintln!("warning: dropped cache entry {msg}");
    }
    Some(cache)
}

fn save_cache(cache: Option<PointCache>) {
    if let Some(mut c) = cache {
        if let Err(e) = c.save() {
            eprintln!("warning: could not write cache: {e}");
        }
    }
}

fn remember(cache: &mut Option<PointCache>, cert: &RankPositivityCertificate) {
    if let (Some(c), Some(w), Provenance::SearchFound { height_bound, route: WitnessRoute::NaiveSearch }) =
        (cache.as_mut(), &cert.witness, &cert.provenance)
    {
        let _ = c.insert(&cert.curve, w.clone(), *height_bound);
    }
}

fn point_strings(p: Option<&CurvePoint>) -> (String, String) {
    match p {
        Some(CurvePoint::Affine { x, y }) => (rational::to_string(x), rational::to_string(y)),
        Some(CurvePoint::Infinity) => ("infinity".into(), String::new()),
        None => (String::new(), String::new()),
    }
}

fn provenance_label(p: &Provenance) -> String {
    match p {
        Provenance::SearchFound { route, .. } => match route {
            WitnessRoute::NaiveSearch => "search_found".into(),
            WitnessRoute::TorsorTransport => "search_found:torsor_transport".into(),
        },
        Provenance::ExternalFact { citation, .. } => format!("external_fact:{citation}"),
    }
}

/// Serde name of a unit enum value.
fn label<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

fn require_positive(name: &str, n: i64, cfg: &RunConfig) -> Result<()> {
    if n <= 0 {
        return Err(Error::InvalidParameter(format!("{name} must be positive, got {n}")));
    }
    cfg.check_factorable(name, n)
}

#[derive(Serialize)]
struct TwistRankBody {
    #[serde(rename = "D")]
    d: i64,
    family: Family,
    verdict: &'static str,
    witness: Option<CurvePoint>,
    twisted_witness: Option<CurvePoint>,
    provenance: Option<Provenance>,
    height_bound: u64,
    root_number: Option<i8>,
    expected_family: Option<criteria::ExpectedRank>,
}

fn cmd_twist_rank(d: i64, family: Family, cfg: &RunConfig) -> Result<Report> {
    require_positive("D", d, cfg)?;
    let curve = TwistedCurve::new(d, family)?;
    let mut cache = open_cache(cfg);
    let cached = cache.as_ref().and_then(|c| c.lookup(&curve, cfg.height)).map(|e| e.point.clone());
    let outcome = match cached {
        Some(w) => RankOutcome::Certified(RankPositivityCertificate {
            curve,
            witness: Some(w),
            provenance: Provenance::SearchFound { height_bound: cfg.height, route: WitnessRoute::NaiveSearch },
        }),
        None => {
            let facts = cfg.facts();
            certify_positive_rank(d, family, cfg.height, facts.as_ref())?
        }
    };
    if let Some(cert) = outcome.certificate() {
        cert.verify()?;
        remember(&mut cache, cert);
    }
    save_cache(cache);

    let (root_number, expected) = match family {
        Family::Congruent => (Some(criteria::root_number(d)?), Some(criteria::expected_rank_family(d)?)),
        Family::Plus => (None, None),
    };
    let cert = outcome.certificate();
    let body = TwistRankBody {
        d,
        family,
        verdict: if cert.is_some() { "certified" } else { "inconclusive" },
        witness: cert.and_then(|c| c.witness.clone()),
        twisted_witness: cert.and_then(|c| c.twisted_witness()),
        provenance: cert.map(|c| c.provenance.clone()),
        height_bound: cfg.height,
        root_number,
        expected_family: expected,
    };
    let (wx, wy) = point_strings(body.witness.as_ref());
    let table = Table {
        headers: vec!["D", "family", "verdict", "witness_x", "witness_y", "provenance", "root_number"],
        rows: vec![vec![
            d.to_string(),
            family.tag().into(),
            body.verdict.into(),
            wx,
            wy,
            cert.map(|c| provenance_label(&c.provenance)).unwrap_or_default(),
            root_number.map(|w| w.to_string()).unwrap_or_default(),
        ]],
    };
    let status = if cert.is_some() { Status::Ok } else { Status::Inconclusive };
    Report::new("twist-rank", &body, table, status)
}

fn check_surface_args(s: &SurfaceArgs, cfg: &RunConfig) -> Result<SurfaceFamily> {
    for (name, v) in [("d", s.d), ("a", s.a), ("C", s.c)] {
        cfg.check_factorable(name, v)?;
    }
    if s.c == 0 {
        return Err(Error::ZeroInput);
    }
    crate::numtheory::require_squarefree(s.c)?;
    SurfaceFamily::new(s.d, s.a)
}

fn run_spr(s: &SurfaceArgs, cfg: &RunConfig) -> Result<SprReport> {
    let family = check_surface_args(s, cfg)?;
    let facts = cfg.facts();
    let report = surface::spr_check(&family, s.c, cfg.height, facts.as_ref())?;
    let mut cache = open_cache(cfg);
    for leg in [&report.jacobian_leg, &report.curve_leg] {
        if let Leg::Certified { witness } = leg {
            remember(&mut cache, witness);
        }
    }
    save_cache(cache);
    Ok(report)
}

#[derive(Serialize)]
struct SprBody<'a> {
    verdict: &'static str,
    uses_external_facts: bool,
    #[serde(flatten)]
    report: &'a SprReport,
}

fn leg_row<T>(name: &str, leg: &Leg<T>, describe: impl Fn(&T) -> (String, String, String)) -> Vec<String> {
    match leg {
        Leg::Certified { witness } => {
            let (curve, point, prov) = describe(witness);
            vec![name.into(), "certified".into(), curve, point, prov]
        }
        Leg::Inconclusive { height_bound } => {
            vec![name.into(), "inconclusive".into(), String::new(), String::new(), format!("height<={height_bound}")]
        }
    }
}

fn cert_row(c: &RankPositivityCertificate) -> (String, String, String) {
    let point = c.witness.as_ref().map(|w| w.to_string()).unwrap_or_default();
    (format!("E^{}", c.curve.d), point, provenance_label(&c.provenance))
}

fn cmd_spr(s: &SurfaceArgs, cfg: &RunConfig) -> Result<Report> {
    let report = run_spr(s, cfg)?;
    let certified = report.is_certified();
    let body = SprBody {
        verdict: if certified { "certified" } else { "inconclusive" },
        uses_external_facts: report.certificate.as_ref().is_some_and(|c| c.uses_external_facts()),
        report: &report,
    };
    let table = Table {
        headers: vec!["leg", "status", "curve", "witness", "provenance"],
        rows: vec![
            leg_row("torsor", &report.torsor_leg, |p| {
                (format!("H^{}", s.c), format!("({}, {})", rational::to_string(&p.t), rational::to_string(&p.s)), "search_found".into())
            }),
            leg_row("jacobian", &report.jacobian_leg, cert_row),
            leg_row("fiber", &report.curve_leg, cert_row),
        ],
    };
    let status = if certified { Status::Ok } else { Status::Inconclusive };
    Report::new("spr", &body, table, status)
}

/// SPR certificate and atlas, or the inconclusive SPR report.
fn build_atlas(s: &SurfaceArgs, grid: (u32, u32), cfg: &RunConfig) -> Result<std::result::Result<Atlas, SprReport>> {
    let report = run_spr(s, cfg)?;
    match &report.certificate {
        Some(cert) if !cert.uses_external_facts() => Ok(Ok(surface::atlas_generate(cert, grid)?)),
        Some(_) => Err(Error::InvalidParameter("atlas needs search-found witnesses; drop --allow-external-facts".into())),
        None => Ok(Err(report)),
    }
}

fn inconclusive_spr(command: &'static str, report: &SprReport) -> Result<Report> {
    let body = SprBody { verdict: "inconclusive", uses_external_facts: false, report };
    let table = Table { headers: vec!["verdict"], rows: vec![vec!["inconclusive".into()]] };
    Report::new(command, &body, table, Status::Inconclusive)
}

fn scatter_ty(points: &[surface::SurfacePoint], title: &str) -> String {
    let pts: Vec<(f64, f64)> = points.iter().map(|p| (rational::to_f64(&p.t), rational::to_f64(&p.y))).collect();
    svg::scatter(&pts, title, "T", "Y", true)
}

#[derive(Serialize)]
struct AtlasBody<'a> {
    source: String,
    count: usize,
    all_on_surface: bool,
    #[serde(flatten)]
    atlas: &'a Atlas,
    #[serde(skip_serializing_if = "Option::is_none")]
    rank_jumps: Option<Vec<RankJumpRow>>,
}

fn cmd_atlas(s: &SurfaceArgs, grid: (u32, u32), svg_path: Option<&PathBuf>, rank_jumps: bool, cfg: &RunConfig) -> Result<Report> {
    let atlas = match build_atlas(s, grid, cfg)? {
        Ok(a) => a,
        Err(spr) => return inconclusive_spr("atlas", &spr),
    };
    let body = AtlasBody {
        source: atlas.source_id(),
        count: atlas.points.len(),
        all_on_surface: atlas.points.iter().all(|p| atlas.family.contains(p)),
        atlas: &atlas,
        rank_jumps: rank_jumps.then(|| diagnostics::rank_jump_table(&atlas.family, &atlas.points)),
    };
    let table = Table {
        headers: vec!["X", "Y", "T"],
        rows: atlas
            .points
            .iter()
            .map(|p| vec![rational::to_string(&p.x), rational::to_string(&p.y), rational::to_string(&p.t)])
            .collect(),
    };
    let mut report = Report::new("atlas", &body, table, Status::Ok)?;
    if let Some(path) = svg_path {
        report.svg = Some((path.clone(), scatter_ty(&atlas.points, &atlas.source_id())));
    }
    Ok(report)
}

#[derive(Serialize)]
struct DensityBody {
    reports: Vec<DensityReport>,
    /// Grids nested in the given order and gaps non-increasing along them.
    non_increasing: bool,
}

fn cmd_density(
    s: &SurfaceArgs,
    grids: &[(u32, u32)],
    interval: &(ExactRational, ExactRational),
    svg_path: Option<&PathBuf>,
    cfg: &RunConfig,
) -> Result<Report> {
    let mut reports = Vec::new();
    let mut largest: Option<Atlas> = None;
    for &grid in grids {
        let atlas = match build_atlas(s, grid, cfg)? {
            Ok(a) => a,
            Err(spr) => return inconclusive_spr("density", &spr),
        };
        reports.push(diagnostics::density_report(&atlas, &interval.0, &interval.1, cfg.precision)?);
        if largest.as_ref().is_none_or(|l| l.points.len() < atlas.points.len()) {
            largest = Some(atlas);
        }
    }
    let non_increasing = reports.windows(2).all(|w| w[1].max_gap <= w[0].max_gap);
    let table = Table {
        headers: vec!["source", "lo", "hi", "samples", "distinct_t", "max_gap", "max_gap_decimal", "both_y_signs"],
        rows: reports
            .iter()
            .map(|r| {
                vec![
                    r.sample_source.clone(),
                    rational::to_string(&r.lo),
                    rational::to_string(&r.hi),
                    r.samples.to_string(),
                    r.distinct_t.to_string(),
                    rational::to_string(&r.max_gap),
                    r.max_gap_decimal.clone(),
                    r.branch_coverage.both_y_signs_present.to_string(),
                ]
            })
            .collect(),
    };
    let mut report = Report::new("density", &DensityBody { reports, non_increasing }, table, Status::Ok)?;
    if let (Some(path), Some(atlas)) = (svg_path, &largest) {
        let inside: Vec<_> =
            atlas.points.iter().filter(|p| p.t >= interval.0 && p.t <= interval.1).cloned().collect();
        report.svg = Some((path.clone(), scatter_ty(&inside, &atlas.source_id())));
    }
    Ok(report)
}

#[derive(Serialize)]
struct PlaceResult {
    place: String,
    soluble: bool,
}

#[derive(Serialize)]
struct SolubilityBody {
    a: i64,
    #[serde(rename = "C")]
    c: i64,
    verdict: Option<criteria::SolubilityVerdict>,
    brute: Option<Vec<PlaceResult>>,
    /// Every checked place is soluble, when brute force ran.
    brute_all_soluble: Option<bool>,
}

fn place_name(p: Place) -> String {
    match p {
        Place::Real => "real".into(),
        Place::Prime(p) => p.to_string(),
    }
}

fn cmd_solubility(a: i64, c: i64, brute: bool, cfg: &RunConfig) -> Result<Report> {
    require_positive("a", a, cfg)?;
    require_positive("C", c, cfg)?;
    let verdict = match a {
        1 => Some(criteria::solubility_a1(c)?),
        2 => Some(criteria::solubility_a2(c)?),
        _ => None,
    };
    let brute = if brute || verdict.is_none() {
        let torsor = QuarticTorsor::cassels_schinzel(a, c)?;
        let mut places = criteria::brute_all_bad_places(&torsor, cfg.padic_precision)?;
        // Odd primes of a are also bad for the quartic.
        for p in crate::numtheory::factorize_i64(a)?.primes() {
            if !places.iter().any(|(pl, _)| *pl == Place::Prime(p)) {
                places.push((Place::Prime(p), criteria::brute_local_solubility(&torsor, Place::Prime(p), cfg.padic_precision)?));
            }
        }
        places.sort_by_key(|(p, _)| match p {
            Place::Real => 0,
            Place::Prime(p) => *p,
        });
        Some(places)
    } else {
        None
    };
    let brute_all = brute.as_ref().map(|v| v.iter().all(|(_, ok)| *ok));
    let mut rows = Vec::new();
    if let Some(v) = &verdict {
        rows.push(vec!["criterion".into(), label(&v.kind), v.criterion.clone()]);
    }
    for (p, ok) in brute.iter().flatten() {
        rows.push(vec![place_name(*p), if *ok { "soluble" } else { "insoluble" }.into(), "brute".into()]);
    }
    let decided = match (&verdict, brute_all) {
        (Some(v), _) if v.kind != VerdictKind::Unknown => true,
        (_, Some(_)) => true,
        _ => false,
    };
    let body = SolubilityBody {
        a,
        c,
        verdict,
        brute: brute.map(|v| v.into_iter().map(|(p, ok)| PlaceResult { place: place_name(p), soluble: ok }).collect()),
        brute_all_soluble: brute_all,
    };
    let table = Table { headers: vec!["place", "result", "method"], rows };
    Report::new("solubility", &body, table, if decided { Status::Ok } else { Status::Inconclusive })
}

#[derive(Serialize)]
struct RootNumberBody {
    d: i64,
    a: i64,
    seed: Option<u64>,
    rows: Vec<RootNumberRow>,
    /// The common value when every supported row agrees.
    constant: Option<i8>,
}

fn cmd_root_number(
    d: i64,
    a: i64,
    sample: Option<usize>,
    sample_bound: i64,
    ts: &[ExactRational],
    cfg: &RunConfig,
) -> Result<Report> {
    cfg.check_factorable("d", d)?;
    cfg.check_factorable("a", a)?;
    SurfaceFamily::new(d, a)?;
    let (ts, seed) = match sample {
        Some(n) => {
            if sample_bound < 1 {
                return Err(Error::InvalidParameter("--sample-bound must be positive".into()));
            }
            (diagnostics::random_ts(n, sample_bound, cfg.seed), Some(cfg.seed))
        }
        None => (ts.to_vec(), None),
    };
    let rows = diagnostics::root_number_survey(d, a, &ts);
    let values: Vec<i8> = rows.iter().filter_map(|r| r.root_number).collect();
    let constant = values.first().copied().filter(|w| values.iter().all(|v| v == w));
    let table = Table {
        headers: vec!["T", "fiber_class", "root_number", "unsupported"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    rational::to_string(&r.t),
                    r.fiber_class.as_ref().map(|c| c.representative().to_string()).unwrap_or_default(),
                    r.root_number.map(|w| w.to_string()).unwrap_or_default(),
                    r.unsupported.clone().unwrap_or_default(),
                ]
            })
            .collect(),
    };
    Report::new("root-number", &RootNumberBody { d, a, seed, rows, constant }, table, Status::Ok)
}

#[derive(Serialize)]
struct IsogenyInfo {
    target_twist: TwistedCurve,
    source_point: CurvePoint,
    image: CurvePoint,
}

#[derive(Serialize)]
struct DescentBody {
    #[serde(rename = "C")]
    c: i64,
    curve: TwistedCurve,
    ledger: SelmerLedger,
    /// Non-torsion points used for the lower bound, normalized model.
    points: Vec<CurvePoint>,
    star_star: StarStarOutcome,
    isogeny: Option<IsogenyInfo>,
}

fn cmd_descent(c: i64, cfg: &RunConfig) -> Result<Report> {
    require_positive("C", c, cfg)?;
    let d = 2 * c;
    crate::numtheory::require_squarefree(c)?;
    let curve = TwistedCurve::congruent(d).map_err(|_| Error::InvalidParameter(format!("2C = {d} is not squarefree")))?;
    let model = curve.normalized();
    let points: Vec<CurvePoint> = model
        .search_points(cfg.height)
        .into_iter()
        .filter(|p| p.y().is_some_and(|y| y.is_positive()) && model.is_non_torsion(p).unwrap_or(false))
        .collect();
    let lower = criteria::rank_lower_bound(d, &points)?;
    let facts = cfg.facts();
    let fact = facts.as_ref().and_then(|t| t.lookup(d)).cloned();
    let mut ledger = SelmerLedger::new(c)?;
    ledger.record_lower_bound(lower)?;
    if let Some(f) = &fact {
        ledger.record_external(f.clone())?;
    }
    if lower >= 1 && criteria::root_number(d)? == 1 {
        ledger.notes.push("root number +1 with a non-torsion point: parity suggests even rank >= 2 (conjectural)".into());
    }
    let star = criteria::star_star_verdict(c, Some(lower), fact.as_ref())?;
    let isogeny = match points.first() {
        Some(p) => Some(IsogenyInfo {
            target_twist: criteria::two_isogeny_target_twist(d)?,
            source_point: p.clone(),
            image: criteria::two_isogeny_image(d, p)?,
        }),
        None => None,
    };
    let table = Table {
        headers: vec!["C", "omega", "selmer_bound", "rank_lower_bound", "star_star", "route"],
        rows: vec![vec![
            c.to_string(),
            ledger.omega.to_string(),
            ledger.upper_bound.to_string(),
            lower.to_string(),
            label(&star.verdict),
            serde_json::to_value(&star.route).ok().and_then(|v| v["route"].as_str().map(String::from)).unwrap_or_default(),
        ]],
    };
    let status = if star.verdict == StarStar::Inconclusive { Status::Inconclusive } else { Status::Ok };
    let body = DescentBody { c, curve, ledger, points, star_star: star, isogeny };
    Report::new("descent", &body, table, status)
}
