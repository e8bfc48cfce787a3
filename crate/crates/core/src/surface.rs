//! The surfaces `d(1 + a²T⁴)Y² = X³ - X`, the double covers
//! `φ_C : E^{dC} × H_a^C → S`, the SPR certificate and atlas generation.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::{
    self, certify_positive_rank, denormalize_twist, normalize_twist, twisted_contains, CurvePoint, Family,
    Provenance, RankOutcome, RankPositivityCertificate, TwistedCurve, WeierstrassCurve, WitnessRoute,
};
use crate::error::{Error, Result};
use crate::facts::ExternalFactTable;
use crate::numtheory::{self, SquarefreeClass};
use crate::quartic::{self, hyperelliptic_involution, to_weierstrass_with_point, QuarticCoeffs, QuarticTorsor, TorsorPoint};
use crate::rational::{self, int, ExactRational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfaceFamily {
    pub d: i64,
    pub a: i64,
}

impl SurfaceFamily {
    pub fn new(d: i64, a: i64) -> Result<Self> {
        numtheory::require_squarefree(d)?;
        numtheory::require_squarefree(a)?;
        Ok(SurfaceFamily { d, a })
    }

    /// `d(1 + a²T⁴)`.
    pub fn fiber_coefficient(&self, t: &ExactRational) -> ExactRational {
        int(self.d) * self.torsor_value(t)
    }

    /// `1 + a²T⁴`.
    pub fn torsor_value(&self, t: &ExactRational) -> ExactRational {
        let t2 = t * t;
        int(1) + int(self.a * self.a) * &t2 * &t2
    }

    pub fn contains(&self, p: &SurfacePoint) -> bool {
        surface_contains(self, p)
    }

    pub fn torsor(&self, c: i64) -> Result<QuarticTorsor> {
        QuarticTorsor::cassels_schinzel(self.a, c)
    }

    pub fn as_general(&self) -> GeneralSurface {
        GeneralSurface {
            f: [int(self.d), int(0), int(0), int(0), int(self.d * self.a * self.a)],
            g: [int(0), int(-1), int(0), int(1)],
        }
    }
}

impl fmt::Display for SurfaceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(1 + {}T^4)Y^2 = X^3 - X", self.d, self.a * self.a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfacePoint {
    #[serde(with = "rational")]
    pub x: ExactRational,
    #[serde(with = "rational")]
    pub y: ExactRational,
    #[serde(with = "rational")]
    pub t: ExactRational,
    /// `Y = 0` or `X ∈ {0, ±1}`.
    pub exceptional: bool,
}

impl SurfacePoint {
    pub fn new(x: ExactRational, y: ExactRational, t: ExactRational) -> Self {
        let exceptional = y.is_zero() || x.is_zero() || x.abs() == int(1);
        SurfacePoint { x, y, t, exceptional }
    }

    /// `(height(T), T, X, Y)`.
    pub fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        rational::height(&self.t)
            .cmp(&rational::height(&other.t))
            .then_with(|| self.t.cmp(&other.t))
            .then_with(|| rational::height(&self.x).cmp(&rational::height(&other.x)))
            .then_with(|| self.x.cmp(&other.x))
            .then_with(|| self.y.cmp(&other.y))
    }
}

impl fmt::Display for SurfacePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(X={}, Y={}, T={})",
            rational::to_string(&self.x),
            rational::to_string(&self.y),
            rational::to_string(&self.t)
        )
    }
}

/// Exact check of `d(1 + a²T⁴)Y² = X³ - X`.
pub fn surface_contains(family: &SurfaceFamily, p: &SurfacePoint) -> bool {
    family.fiber_coefficient(&p.t) * &p.y * &p.y == &p.x * &p.x * &p.x - &p.x
}

/// `[1 + a²T⁴]`, the class `C` of the torsor through a point with this `T`.
pub fn evaluation_class(a: i64, t: &ExactRational) -> Result<SquarefreeClass> {
    let t2 = t * t;
    numtheory::squarefree_class(&(int(1) + int(a * a) * &t2 * &t2))
}

/// `[d(1 + a²T⁴)]`: the fiber over `T` is `E^D` for this class.
pub fn fiber_twist_class(d: i64, a: i64, t: &ExactRational) -> Result<SquarefreeClass> {
    let t2 = t * t;
    numtheory::squarefree_class(&(int(d) * (int(1) + int(a * a) * &t2 * &t2)))
}

/// `((x, y), (t, s)) ↦ (x, y/s, t)` from `dC·y² = x³ - x` and
/// `C·s² = 1 + a²t⁴`.
pub fn phi_map(family: &SurfaceFamily, torsor: &QuarticTorsor, curve_point: &CurvePoint, tp: &TorsorPoint) -> Result<SurfacePoint> {
    if torsor.g != QuarticCoeffs::from_ints(family.a * family.a, 0, 0, 1) {
        return Err(Error::InvalidParameter(format!("torsor {torsor} does not belong to a = {}", family.a)));
    }
    let coeff = int(family.d) * int(torsor.twist);
    let (x, y) = match curve_point {
        CurvePoint::Affine { x, y } if twisted_contains(&coeff, Family::Congruent, curve_point) => (x, y),
        _ => return Err(Error::OffCurve),
    };
    if tp.s.is_zero() {
        return Err(Error::BranchLocus);
    }
    if !torsor.contains(tp) {
        return Err(Error::OffCurve);
    }
    Ok(SurfacePoint::new(x.clone(), y / &tp.s, tp.t.clone()))
}

/// Write a nonzero rational `q = D·r²` with `D` a squarefree integer.
fn split_class(q: &ExactRational) -> Result<(i64, ExactRational)> {
    let class = numtheory::squarefree_class(q)?;
    let d = class.to_i64().ok_or_else(|| Error::InvalidParameter(format!("class {class} out of range")))?;
    let r = rational::sqrt_rational(&(q / int(d))).expect("q / D is a square by construction");
    Ok((d, r))
}

/// The fiber through a surface point as a normalized curve `E^D`, and the
/// point on it.
pub fn fiber_point(family: &SurfaceFamily, p: &SurfacePoint) -> Result<(TwistedCurve, CurvePoint)> {
    if !family.contains(p) {
        return Err(Error::OffCurve);
    }
    let (d, r) = split_class(&family.fiber_coefficient(&p.t))?;
    let curve = TwistedCurve::congruent(d)?;
    // K·Y² = D·(rY)².
    let twisted = CurvePoint::new(p.x.clone(), &p.y * r);
    Ok((curve, normalize_twist(&curve, &twisted)?))
}

/// Point on `y² = x³ - D²x` mapped to the twisted model `(D·k²)·y² = x³ - x`.
fn to_scaled_twisted(curve: &TwistedCurve, k: &ExactRational, p: &CurvePoint) -> Result<CurvePoint> {
    Ok(match denormalize_twist(curve, p)? {
        CurvePoint::Infinity => CurvePoint::Infinity,
        CurvePoint::Affine { x, y } => CurvePoint::new(x, y / k),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Leg<T> {
    Certified { witness: T },
    Inconclusive { height_bound: u64 },
}

impl<T> Leg<T> {
    pub fn witness(&self) -> Option<&T> {
        match self {
            Leg::Certified { witness } => Some(witness),
            Leg::Inconclusive { .. } => None,
        }
    }
}

/// Condition SPR(C) certified by three witnesses: a point on `H_a^C`, a
/// positive-rank certificate for the Jacobian `E^{2aC}` and one for the
/// fiber factor `E^{dC}`. Curves are stored by squarefree class; the
/// `*_scale` fields give `2aC = D·k²` and `dC = D'·k'²`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SprCertificate {
    pub family: SurfaceFamily,
    pub c: i64,
    pub torsor_witness: TorsorPoint,
    pub jacobian_witness: RankPositivityCertificate,
    pub jacobian_scale: i64,
    pub curve_witness: RankPositivityCertificate,
    pub curve_scale: i64,
}

impl SprCertificate {
    pub fn verify(&self) -> Result<()> {
        let torsor = self.family.torsor(self.c)?;
        if !torsor.contains(&self.torsor_witness) {
            return Err(Error::OffCurve);
        }
        self.jacobian_witness.verify()?;
        self.curve_witness.verify()?;
        let (dj, kj) = elliptic::split_square(2 * self.family.a * self.c)?;
        let (dc, kc) = elliptic::split_square(self.family.d * self.c)?;
        if (dj, kj) != (self.jacobian_witness.curve.d, self.jacobian_scale)
            || (dc, kc) != (self.curve_witness.curve.d, self.curve_scale)
        {
            return Err(Error::InvalidParameter("certificate curves do not match (d, a, C)".into()));
        }
        Ok(())
    }

    pub fn uses_external_facts(&self) -> bool {
        self.jacobian_witness.provenance.is_external() || self.curve_witness.provenance.is_external()
    }

    pub fn torsor(&self) -> QuarticTorsor {
        self.family.torsor(self.c).expect("verified certificate")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SprReport {
    pub family: SurfaceFamily,
    pub c: i64,
    pub height_bound: u64,
    pub torsor_leg: Leg<TorsorPoint>,
    pub jacobian_leg: Leg<RankPositivityCertificate>,
    pub curve_leg: Leg<RankPositivityCertificate>,
    pub certificate: Option<SprCertificate>,
}

impl SprReport {
    pub fn is_certified(&self) -> bool {
        self.certificate.is_some()
    }
}

fn leg_from(outcome: RankOutcome) -> Leg<RankPositivityCertificate> {
    match outcome {
        RankOutcome::Certified(c) => Leg::Certified { witness: c },
        RankOutcome::Inconclusive { height_bound, .. } => Leg::Inconclusive { height_bound },
    }
}

/// Non-torsion point on `E^{2aC}` obtained from torsor points, moved to
/// the normalized model of its squarefree class.
fn transported_jacobian_witness(torsor: &QuarticTorsor, points: &[TorsorPoint], d: i64, k: i64) -> Option<CurvePoint> {
    let p0 = points.iter().find(|p| !p.s.is_zero())?;
    let map = to_weierstrass_with_point(torsor, p0).ok()?;
    let target = TwistedCurve::congruent(d).ok()?.normalized();
    let kinv = int(k).recip();
    let mut candidates = vec![map.involution_image()];
    candidates.extend(points.iter().filter_map(|p| map.forward(p).ok()));
    candidates
        .into_iter()
        .map(|p| WeierstrassCurve::scale_point(&p, &kinv))
        .filter(|p| target.contains(p) && target.is_non_torsion(p).unwrap_or(false))
        .min_by(|p, q| p.canonical_cmp(q))
        .map(|p| match p.y() {
            Some(y) if y.is_negative() => target.neg(&p),
            _ => p,
        })
}

/// Search for the three SPR witnesses.
///
/// Jacobian leg order: naive search, then transport of torsor points,
/// then (if allowed) the curated table. The fiber leg is searched
/// concurrently.
pub fn spr_check(
    family: &SurfaceFamily,
    c: i64,
    height_bound: u64,
    facts: Option<&ExternalFactTable>,
) -> Result<SprReport> {
    let torsor = family.torsor(c)?;
    let (dj, kj) = elliptic::split_square(2 * family.a * c)?;
    let (dc, kc) = elliptic::split_square(family.d * c)?;

    let torsor_and_jacobian = || -> Result<(Leg<TorsorPoint>, Leg<RankPositivityCertificate>)> {
        let found = quartic::search_until_found(&torsor, height_bound);
        let torsor_leg = match quartic::preferred_point(&found) {
            Some(p) => Leg::Certified { witness: p },
            None => Leg::Inconclusive { height_bound },
        };
        let mut jac = certify_positive_rank(dj, Family::Congruent, height_bound, None)?;
        if jac.certificate().is_none() {
            if let Some(w) = transported_jacobian_witness(&torsor, &found, dj, kj) {
                jac = RankOutcome::Certified(RankPositivityCertificate {
                    curve: TwistedCurve::congruent(dj)?,
                    witness: Some(w),
                    provenance: Provenance::SearchFound { height_bound, route: WitnessRoute::TorsorTransport },
                });
            } else if facts.is_some() {
                jac = certify_positive_rank(dj, Family::Congruent, 0, facts)?;
            }
        }
        Ok((torsor_leg, leg_from(jac)))
    };
    let curve_leg = || -> Result<Leg<RankPositivityCertificate>> {
        Ok(leg_from(certify_positive_rank(dc, Family::Congruent, height_bound, facts)?))
    };
    let (tj, cl) = rayon::join(torsor_and_jacobian, curve_leg);
    let (torsor_leg, jacobian_leg) = tj?;
    let curve_leg = cl?;

    let certificate = match (&torsor_leg, &jacobian_leg, &curve_leg) {
        (Leg::Certified { witness: t }, Leg::Certified { witness: j }, Leg::Certified { witness: e }) => {
            let cert = SprCertificate {
                family: *family,
                c,
                torsor_witness: t.clone(),
                jacobian_witness: j.clone(),
                jacobian_scale: kj,
                curve_witness: e.clone(),
                curve_scale: kc,
            };
            cert.verify()?;
            Some(cert)
        }
        _ => None,
    };
    Ok(SprReport { family: *family, c, height_bound, torsor_leg, jacobian_leg, curve_leg, certificate })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atlas {
    pub family: SurfaceFamily,
    pub c: i64,
    pub grid: (u32, u32),
    pub points: Vec<SurfacePoint>,
    /// Candidates dropped for landing on an excluded locus.
    pub skipped: usize,
}

impl Atlas {
    pub fn source_id(&self) -> String {
        format!("atlas d={} a={} C={} grid={}x{}", self.family.d, self.family.a, self.c, self.grid.0, self.grid.1)
    }
}

/// Points `φ_C(i·P + τ, Q)` for `1 <= i <= max_i`, `τ ∈ E^{dC}[2]`, and
/// torsor points `Q = backward(j·W + τ')`, `0 <= j < max_j`, together with
/// their involution images. `P`, `W` are the certificate's fiber and
/// Jacobian witnesses. Candidates on the excluded loci are counted and
/// dropped.
pub fn atlas_generate(cert: &SprCertificate, grid: (u32, u32)) -> Result<Atlas> {
    cert.verify()?;
    if cert.uses_external_facts() {
        return Err(Error::InvalidParameter("atlas needs search-found witnesses".into()));
    }
    let family = cert.family;
    let torsor = cert.torsor();
    let (max_i, max_j) = grid;

    // Fiber side on y² = x³ - D'²x, then moved to dC·y² = x³ - x.
    let ecurve = cert.curve_witness.curve;
    let enorm = ecurve.normalized();
    let p = cert.curve_witness.witness.clone().expect("search-found");
    let dprime = int(ecurve.d);
    let torsion: Vec<CurvePoint> =
        vec![CurvePoint::Infinity, CurvePoint::from_ints(0, 0), CurvePoint::new(dprime.clone(), int(0)), CurvePoint::new(-dprime, int(0))];
    let mut multiples = Vec::with_capacity(max_i as usize);
    let mut acc = CurvePoint::Infinity;
    for _ in 0..max_i {
        acc = enorm.add(&acc, &p)?;
        multiples.push(acc.clone());
    }
    let kc = int(cert.curve_scale);
    let curve_points: Vec<CurvePoint> = multiples
        .par_iter()
        .flat_map_iter(|m| torsion.iter().map(|tau| enorm.add_unchecked(m, tau)).collect::<Vec<_>>())
        .map(|q| to_scaled_twisted(&ecurve, &kc, &q))
        .collect::<Result<_>>()?;

    // Torsor side through the identification with E^{2aC}.
    let map = to_weierstrass_with_point(&torsor, &cert.torsor_witness)?;
    let jcurve = map.curve().clone();
    let w = elliptic::lift_normalized(cert.jacobian_witness.witness.as_ref().expect("search-found"), cert.jacobian_scale);
    let n = int(2 * family.a * cert.c);
    let jtorsion =
        [CurvePoint::Infinity, CurvePoint::from_ints(0, 0), CurvePoint::new(n.clone(), int(0)), CurvePoint::new(-n, int(0))];
    let mut skipped = 0usize;
    let mut torsor_points = Vec::new();
    let mut jw = CurvePoint::Infinity;
    for _ in 0..max_j {
        for tau in &jtorsion {
            match map.backward(&jcurve.add(&jw, tau)?) {
                Ok(q) if !q.s.is_zero() => {
                    torsor_points.push(hyperelliptic_involution(&q));
                    torsor_points.push(q);
                }
                _ => skipped += 1,
            }
        }
        jw = jcurve.add(&jw, &w)?;
    }
    let mut seen = HashSet::new();
    torsor_points.retain(|q| seen.insert(q.clone()));

    let candidates: Vec<Option<SurfacePoint>> = curve_points
        .par_iter()
        .flat_map_iter(|cp| torsor_points.iter().map(move |q| (cp, q)))
        .map(|(cp, q)| match cp {
            CurvePoint::Affine { .. } => phi_map(&family, &torsor, cp, q).ok().filter(|s| !s.exceptional),
            CurvePoint::Infinity => None,
        })
        .collect();
    skipped += candidates.iter().filter(|c| c.is_none()).count();
    let mut points: Vec<SurfacePoint> = candidates.into_iter().flatten().collect();
    points.sort_by(|a, b| a.canonical_cmp(b));
    points.dedup();
    debug_assert!(points.iter().all(|p| family.contains(p)));
    Ok(Atlas { family, c: cert.c, grid, points, skipped })
}

/// `f(T)·Y² = g(X)` with `f` of degree 3 or 4 and `g` cubic, both
/// separable; coefficients low to high.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralSurface {
    pub f: [ExactRational; 5],
    pub g: [ExactRational; 4],
}

fn horner(coeffs: &[ExactRational], x: &ExactRational) -> ExactRational {
    coeffs.iter().rev().fold(ExactRational::zero(), |acc, c| acc * x + c)
}

impl GeneralSurface {
    pub fn new(f: [ExactRational; 5], g: [ExactRational; 4]) -> Result<Self> {
        if f[4].is_zero() && f[3].is_zero() {
            return Err(Error::DegenerateQuartic("f must have degree 3 or 4"));
        }
        if g[3].is_zero() {
            return Err(Error::DegenerateQuartic("g must be cubic"));
        }
        let separable = |p: &[ExactRational]| {
            let deriv: Vec<ExactRational> = p.iter().enumerate().skip(1).map(|(i, c)| c * int(i as i64)).collect();
            poly_gcd_degree(p, &deriv) == 0
        };
        if !separable(&f) || !separable(&g) {
            return Err(Error::DegenerateQuartic("repeated root"));
        }
        Ok(GeneralSurface { f, g })
    }

    pub fn contains(&self, x: &ExactRational, y: &ExactRational, t: &ExactRational) -> bool {
        horner(&self.f, t) * y * y == horner(&self.g, x)
    }
}

fn poly_gcd_degree(a: &[ExactRational], b: &[ExactRational]) -> usize {
    let trim = |mut p: Vec<ExactRational>| {
        while p.last().is_some_and(|c| c.is_zero()) {
            p.pop();
        }
        p
    };
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let mut r = a.clone();
        while r.len() >= b.len() {
            let k = r.len() - b.len();
            let q = r.last().unwrap() / b.last().unwrap();
            for (i, bi) in b.iter().enumerate() {
                r[k + i] -= &q * bi;
            }
            r.pop();
            r = trim(r);
        }
        a = b;
        b = r;
    }
    a.len().saturating_sub(1)
}

/// Class of `[C]` as an integer.
pub fn class_rep(class: &SquarefreeClass) -> BigInt {
    class.representative().clone()
}
