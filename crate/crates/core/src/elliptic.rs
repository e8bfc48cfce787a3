//! Short Weierstrass curves over Q with exact chord-tangent arithmetic,
//! the twist families `D·y² = x³ ∓ x`, bounded point search and
//! rank-positivity certificates.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::facts::ExternalFactTable;
use crate::numtheory;
use crate::rational::{self, from_big, int, ExactRational};

/// Largest torsion order over Q (Mazur).
pub const MAZUR_BOUND: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CurvePoint {
    Infinity,
    Affine { x: ExactRational, y: ExactRational },
}

impl CurvePoint {
    pub fn new(x: ExactRational, y: ExactRational) -> Self {
        CurvePoint::Affine { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        CurvePoint::new(int(x), int(y))
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, CurvePoint::Infinity)
    }

    pub fn x(&self) -> Option<&ExactRational> {
        match self {
            CurvePoint::Infinity => None,
            CurvePoint::Affine { x, .. } => Some(x),
        }
    }

    pub fn y(&self) -> Option<&ExactRational> {
        match self {
            CurvePoint::Infinity => None,
            CurvePoint::Affine { y, .. } => Some(y),
        }
    }

    /// Naive height of the x-coordinate; 1 at infinity.
    pub fn height(&self) -> BigInt {
        self.x().map(rational::height).unwrap_or_else(BigInt::one)
    }

    pub fn height_bits(&self) -> u64 {
        self.x().map(rational::height_bits).unwrap_or(0)
    }

    /// Canonical order: infinity first, then `(height, x, y)`.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (CurvePoint::Infinity, CurvePoint::Infinity) => Ordering::Equal,
            (CurvePoint::Infinity, _) => Ordering::Less,
            (_, CurvePoint::Infinity) => Ordering::Greater,
            (CurvePoint::Affine { x: x1, y: y1 }, CurvePoint::Affine { x: x2, y: y2 }) => self
                .height()
                .cmp(&other.height())
                .then_with(|| x1.cmp(x2))
                .then_with(|| y1.cmp(y2)),
        }
    }
}

impl fmt::Display for CurvePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvePoint::Infinity => write!(f, "O"),
            CurvePoint::Affine { x, y } => {
                write!(f, "({}, {})", rational::to_string(x), rational::to_string(y))
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Infinity(String),
    Affine { x: String, y: String },
}

impl Serialize for CurvePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CurvePoint::Infinity => PointRepr::Infinity("infinity".into()),
            CurvePoint::Affine { x, y } => PointRepr::Affine {
                x: rational::to_string(x),
                y: rational::to_string(y),
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CurvePoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match PointRepr::deserialize(d)? {
            PointRepr::Infinity(s) if s == "infinity" => Ok(CurvePoint::Infinity),
            PointRepr::Infinity(s) => Err(serde::de::Error::custom(format!("unknown point {s:?}"))),
            PointRepr::Affine { x, y } => Ok(CurvePoint::new(
                rational::parse(&x).map_err(serde::de::Error::custom)?,
                rational::parse(&y).map_err(serde::de::Error::custom)?,
            )),
        }
    }
}

/// `y² = x³ + a·x + b` with nonzero discriminant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeierstrassCurve {
    #[serde(with = "rational")]
    a: ExactRational,
    #[serde(with = "rational")]
    b: ExactRational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "order")]
pub enum TorsionStatus {
    Torsion(u32),
    NonTorsion,
}

impl WeierstrassCurve {
    pub fn new(a: ExactRational, b: ExactRational) -> Result<Self> {
        let disc: ExactRational = int(4) * &a * &a * &a + int(27) * &b * &b;
        if disc.is_zero() {
            return Err(Error::SingularCurve);
        }
        Ok(WeierstrassCurve { a, b })
    }

    /// `y² = x³ - n²·x`, the normalized congruent-number twist.
    pub fn congruent(n: i64) -> Result<Self> {
        Self::new(-int(n) * int(n), int(0))
    }

    pub fn a(&self) -> &ExactRational {
        &self.a
    }

    pub fn b(&self) -> &ExactRational {
        &self.b
    }

    pub fn is_integral(&self) -> bool {
        self.a.is_integer() && self.b.is_integer()
    }

    fn rhs(&self, x: &ExactRational) -> ExactRational {
        x * x * x + &self.a * x + &self.b
    }

    pub fn contains(&self, p: &CurvePoint) -> bool {
        match p {
            CurvePoint::Infinity => true,
            CurvePoint::Affine { x, y } => y * y == self.rhs(x),
        }
    }

    fn check(&self, p: &CurvePoint) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OffCurve)
        }
    }

    pub fn neg(&self, p: &CurvePoint) -> CurvePoint {
        match p {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => CurvePoint::new(x.clone(), -y),
        }
    }

    pub fn add(&self, p: &CurvePoint, q: &CurvePoint) -> Result<CurvePoint> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.add_unchecked(p, q))
    }

    pub(crate) fn add_unchecked(&self, p: &CurvePoint, q: &CurvePoint) -> CurvePoint {
        let (x1, y1, x2, y2) = match (p, q) {
            (CurvePoint::Infinity, _) => return q.clone(),
            (_, CurvePoint::Infinity) => return p.clone(),
            (CurvePoint::Affine { x: x1, y: y1 }, CurvePoint::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
        };
        let slope = if x1 == x2 {
            if y1 != y2 || y1.is_zero() {
                return CurvePoint::Infinity;
            }
            (int(3) * x1 * x1 + &self.a) / (int(2) * y1)
        } else {
            (y2 - y1) / (x2 - x1)
        };
        let x3 = &slope * &slope - x1 - x2;
        let y3 = slope * (x1 - &x3) - y1;
        CurvePoint::new(x3, y3)
    }

    pub fn sub(&self, p: &CurvePoint, q: &CurvePoint) -> Result<CurvePoint> {
        self.add(p, &self.neg(q))
    }

    /// `n·P` by double-and-add.
    pub fn scalar_mul(&self, n: i64, p: &CurvePoint) -> Result<CurvePoint> {
        self.check(p)?;
        Ok(self.scalar_mul_unchecked(n, p))
    }

    pub(crate) fn scalar_mul_unchecked(&self, n: i64, p: &CurvePoint) -> CurvePoint {
        let mut base = if n < 0 { self.neg(p) } else { p.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = CurvePoint::Infinity;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add_unchecked(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.add_unchecked(&base, &base);
            }
        }
        acc
    }

    /// Smallest `n <= 12` with `n·P = O`, or `NonTorsion`.
    ///
    /// On integral models a point with a non-integral coordinate is
    /// non-torsion (Nagell-Lutz), which settles most large points at once.
    pub fn torsion_test(&self, p: &CurvePoint) -> Result<TorsionStatus> {
        self.check(p)?;
        if let CurvePoint::Affine { x, y } = p {
            if self.is_integral() && !(x.is_integer() && y.is_integer()) {
                return Ok(TorsionStatus::NonTorsion);
            }
        }
        let mut q = p.clone();
        for n in 1..=MAZUR_BOUND {
            if q.is_infinity() {
                return Ok(TorsionStatus::Torsion(n));
            }
            q = self.add_unchecked(&q, p);
        }
        Ok(TorsionStatus::NonTorsion)
    }

    pub fn is_non_torsion(&self, p: &CurvePoint) -> Result<bool> {
        Ok(self.torsion_test(p)? == TorsionStatus::NonTorsion)
    }

    /// Image of the curve under `(x, y) ↦ (k²x, k³y)`.
    pub fn scaled(&self, k: &ExactRational) -> WeierstrassCurve {
        let k2 = k * k;
        let k4 = &k2 * &k2;
        let k6 = &k4 * &k2;
        WeierstrassCurve { a: &self.a * k4, b: &self.b * k6 }
    }

    /// Point map matching [`WeierstrassCurve::scaled`].
    pub fn scale_point(p: &CurvePoint, k: &ExactRational) -> CurvePoint {
        match p {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => {
                let k2 = k * k;
                let k3 = &k2 * k;
                CurvePoint::new(x * k2, y * k3)
            }
        }
    }

    /// All affine points `x = m/e²` with `|m| <= bound` and `e² <= bound`,
    /// in canonical order.
    ///
    /// Non-integral models are first scaled to an integral one; the bound
    /// then refers to that model.
    pub fn search_points(&self, bound: u64) -> Vec<CurvePoint> {
        if bound == 0 {
            return Vec::new();
        }
        if !self.is_integral() {
            let k = from_big(self.minimal_integral_scale());
            let integral = self.scaled(&k);
            let kinv = k.recip();
            let mut pts: Vec<_> = integral
                .search_points(bound)
                .iter()
                .map(|p| Self::scale_point(p, &kinv))
                .collect();
            pts.sort_by(|p, q| p.canonical_cmp(q));
            return pts;
        }
        let a = self.a.to_integer();
        let b = self.b.to_integer();
        let fast = a.to_i128().zip(b.to_i128());
        let emax = num_integer::Roots::sqrt(&bound);
        let mut pts: Vec<CurvePoint> = (1..=emax)
            .into_par_iter()
            .flat_map_iter(|e| {
                let mut found = Vec::new();
                let e2 = e * e;
                let span = bound as i64;
                for m in -span..=span {
                    if (m as i128).gcd(&(e as i128)) != 1 {
                        continue;
                    }
                    let root = match fast.and_then(|(a, b)| rhs_i128(a, b, m as i128, e2 as i128)) {
                        Some(v) => is_square_i128(v).map(BigInt::from),
                        None => {
                            let m = BigInt::from(m);
                            let e2 = BigInt::from(e2);
                            let e4 = &e2 * &e2;
                            let v = &m * &m * &m + &a * &m * &e4 + &b * &e4 * &e2;
                            rational::sqrt_exact(&v)
                        }
                    };
                    if let Some(r) = root {
                        let x = ExactRational::new(BigInt::from(m), BigInt::from(e2));
                        let y = ExactRational::new(r, BigInt::from(e2 * e));
                        if !y.is_zero() {
                            found.push(CurvePoint::new(x.clone(), -&y));
                        }
                        found.push(CurvePoint::new(x, y));
                    }
                }
                found
            })
            .collect();
        pts.sort_by(|p, q| p.canonical_cmp(q));
        pts
    }

    /// Smallest `k > 0` with `k⁴·a` and `k⁶·b` integral.
    fn minimal_integral_scale(&self) -> BigInt {
        let den = self.a.denom().lcm(self.b.denom());
        let f = numtheory::factorize(&den, &numtheory::FactorBudget::default())
            .expect("denominators of small models factor");
        let mut k = BigInt::one();
        for (p, _) in f.prime_powers {
            let va = valuation(self.a.denom(), p);
            let vb = valuation(self.b.denom(), p);
            let e = va.div_ceil(4).max(vb.div_ceil(6));
            k *= num_traits::pow(BigInt::from(p), e as usize);
        }
        k
    }

    /// Canonically first non-torsion point of height at most `bound`, with
    /// the sign of `y` chosen non-negative.
    ///
    /// Searches in growing shells so small witnesses are found cheaply; the
    /// answer does not depend on the shell schedule.
    pub fn first_non_torsion(&self, bound: u64) -> Option<CurvePoint> {
        for shell in shells(bound) {
            let found = self
                .search_points(shell)
                .into_iter()
                .find(|p| self.is_non_torsion(p).unwrap_or(false));
            if let Some(p) = found {
                return Some(match p.y() {
                    Some(y) if y.is_negative() => self.neg(&p),
                    _ => p,
                });
            }
        }
        None
    }
}

impl fmt::Display for WeierstrassCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = x^3 + ({})x + ({})", rational::to_string(&self.a), rational::to_string(&self.b))
    }
}

fn valuation(n: &BigInt, p: u64) -> u32 {
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    while !n.is_zero() && (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    v
}

/// Search bounds 16, 64, 256, ... capped at `bound`.
pub(crate) fn shells(bound: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut h = 16u64;
    while h < bound {
        out.push(h);
        h = h.saturating_mul(4);
    }
    if bound > 0 {
        out.push(bound);
    }
    out
}

fn rhs_i128(a: i128, b: i128, m: i128, e2: i128) -> Option<i128> {
    let e4 = e2.checked_mul(e2)?;
    let m3 = m.checked_mul(m)?.checked_mul(m)?;
    let am = a.checked_mul(m)?.checked_mul(e4)?;
    let be = b.checked_mul(e4)?.checked_mul(e2)?;
    m3.checked_add(am)?.checked_add(be)
}

const fn square_residues<const N: usize>() -> [bool; N] {
    let mut t = [false; N];
    let mut i = 0;
    while i < N {
        t[(i * i) % N] = true;
        i += 1;
    }
    t
}

const SQ64: [bool; 64] = square_residues::<64>();
const SQ63: [bool; 63] = square_residues::<63>();
const SQ65: [bool; 65] = square_residues::<65>();
const SQ11: [bool; 11] = square_residues::<11>();

/// Square root of `n` when it is a perfect square.
pub(crate) fn is_square_i128(n: i128) -> Option<u128> {
    if n < 0 {
        return None;
    }
    let n = n as u128;
    if !SQ64[(n % 64) as usize] || !SQ63[(n % 63) as usize] || !SQ65[(n % 65) as usize] || !SQ11[(n % 11) as usize] {
        return None;
    }
    let mut r = (n as f64).sqrt() as u128;
    while r.checked_mul(r).is_none_or(|rr| rr > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|rr| rr <= n) {
        r += 1;
    }
    (r * r == n).then_some(r)
}

/// Which base curve a twist belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `y² = x³ - x`
    #[serde(rename = "x3-x")]
    Congruent,
    /// `y² = x³ + x`
    #[serde(rename = "x3+x")]
    Plus,
}

impl Family {
    fn sign(self) -> i64 {
        match self {
            Family::Congruent => -1,
            Family::Plus => 1,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Family::Congruent => "x3-x",
            Family::Plus => "x3+x",
        }
    }
}

/// The twist `D·y² = x³ ∓ x` with `D` squarefree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwistedCurve {
    pub d: i64,
    pub family: Family,
}

impl TwistedCurve {
    pub fn new(d: i64, family: Family) -> Result<Self> {
        numtheory::require_squarefree(d)?;
        Ok(TwistedCurve { d, family })
    }

    pub fn congruent(d: i64) -> Result<Self> {
        Self::new(d, Family::Congruent)
    }

    /// `y² = x³ ∓ D²·x`.
    pub fn normalized(&self) -> WeierstrassCurve {
        let d = int(self.d);
        WeierstrassCurve::new(int(self.family.sign()) * &d * &d, int(0)).expect("D != 0")
    }

    /// Exact check of `D·y² = x³ ∓ x`.
    pub fn contains_twisted(&self, p: &CurvePoint) -> bool {
        twisted_contains(&int(self.d), self.family, p)
    }

    /// `{O, (0,0), (±1,0)}` for the congruent family, `{O, (0,0)}` for the
    /// plus family, in twisted coordinates.
    pub fn two_torsion_twisted(&self) -> Vec<CurvePoint> {
        let mut pts = vec![CurvePoint::Infinity, CurvePoint::from_ints(0, 0)];
        if self.family == Family::Congruent {
            pts.push(CurvePoint::from_ints(-1, 0));
            pts.push(CurvePoint::from_ints(1, 0));
        }
        pts
    }
}

impl fmt::Display for TwistedCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.family == Family::Congruent { '-' } else { '+' };
        write!(f, "{}y^2 = x^3 {} x", self.d, sign)
    }
}

/// `coeff·y² = x³ ∓ x` for any nonzero rational coefficient.
pub fn twisted_contains(coeff: &ExactRational, family: Family, p: &CurvePoint) -> bool {
    match p {
        CurvePoint::Infinity => true,
        CurvePoint::Affine { x, y } => coeff * y * y == x * x * x + int(family.sign()) * x,
    }
}

/// `(x, y) ↦ (D·x, D²·y)` from `D·y² = x³ ∓ x` onto `y² = x³ ∓ D²·x`.
pub fn normalize_twist(curve: &TwistedCurve, p: &CurvePoint) -> Result<CurvePoint> {
    if !curve.contains_twisted(p) {
        return Err(Error::OffCurve);
    }
    Ok(twist_scale(p, &int(curve.d)))
}

/// Inverse of [`normalize_twist`].
pub fn denormalize_twist(curve: &TwistedCurve, p: &CurvePoint) -> Result<CurvePoint> {
    if !curve.normalized().contains(p) {
        return Err(Error::OffCurve);
    }
    Ok(twist_scale(p, &int(curve.d).recip()))
}

fn twist_scale(p: &CurvePoint, d: &ExactRational) -> CurvePoint {
    match p {
        CurvePoint::Infinity => CurvePoint::Infinity,
        CurvePoint::Affine { x, y } => CurvePoint::new(x * d, y * d * d),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessRoute {
    /// Naive search on the normalized model.
    NaiveSearch,
    /// Image of a point found on a torsor of this curve under the
    /// birational identification.
    TorsorTransport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    SearchFound { height_bound: u64, route: WitnessRoute },
    ExternalFact { claimed_rank: u32, citation: String },
}

impl Provenance {
    pub fn is_external(&self) -> bool {
        matches!(self, Provenance::ExternalFact { .. })
    }
}

/// Evidence that a twist has positive rank.
///
/// `witness` is a point on the normalized model `y² = x³ ∓ D²x`; it is
/// absent exactly when the provenance is an external fact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankPositivityCertificate {
    pub curve: TwistedCurve,
    pub witness: Option<CurvePoint>,
    pub provenance: Provenance,
}

impl RankPositivityCertificate {
    pub fn verify(&self) -> Result<()> {
        match (&self.provenance, &self.witness) {
            (Provenance::SearchFound { .. }, Some(w)) => {
                if !self.curve.normalized().is_non_torsion(w)? {
                    return Err(Error::InvalidParameter(format!("witness {w} is torsion")));
                }
                Ok(())
            }
            (Provenance::SearchFound { .. }, None) => {
                Err(Error::InvalidParameter("search certificate without witness".into()))
            }
            (Provenance::ExternalFact { claimed_rank, .. }, _) if *claimed_rank == 0 => {
                Err(Error::InvalidParameter("external fact claims rank 0".into()))
            }
            (Provenance::ExternalFact { .. }, _) => Ok(()),
        }
    }

    /// Witness in twisted coordinates `D·y² = x³ ∓ x`.
    pub fn twisted_witness(&self) -> Option<CurvePoint> {
        self.witness.as_ref().map(|w| denormalize_twist(&self.curve, w).expect("verified witness"))
    }

    pub fn is_search_found(&self) -> bool {
        matches!(self.provenance, Provenance::SearchFound { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum RankOutcome {
    Certified(RankPositivityCertificate),
    Inconclusive { curve: TwistedCurve, height_bound: u64 },
}

impl RankOutcome {
    pub fn certificate(&self) -> Option<&RankPositivityCertificate> {
        match self {
            RankOutcome::Certified(c) => Some(c),
            RankOutcome::Inconclusive { .. } => None,
        }
    }
}

/// Search for a non-torsion point on `E^D`; optionally fall back to the
/// curated table (congruent family only).
pub fn certify_positive_rank(
    d: i64,
    family: Family,
    height_bound: u64,
    facts: Option<&ExternalFactTable>,
) -> Result<RankOutcome> {
    let curve = TwistedCurve::new(d, family)?;
    if let Some(w) = curve.normalized().first_non_torsion(height_bound) {
        return Ok(RankOutcome::Certified(RankPositivityCertificate {
            curve,
            witness: Some(w),
            provenance: Provenance::SearchFound { height_bound, route: WitnessRoute::NaiveSearch },
        }));
    }
    if family == Family::Congruent {
        if let Some(fact) = facts.and_then(|t| t.lookup(d)) {
            if fact.rank > 0 {
                return Ok(RankOutcome::Certified(RankPositivityCertificate {
                    curve,
                    witness: None,
                    provenance: Provenance::ExternalFact {
                        claimed_rank: fact.rank,
                        citation: fact.citation.clone(),
                    },
                }));
            }
        }
    }
    Ok(RankOutcome::Inconclusive { curve, height_bound })
}

/// Move a point between normalized congruent models: from
/// `y² = x³ - D²x` to `y² = x³ - (D·k)²x` via `(x, y) ↦ (k²x, k³y)`.
pub fn lift_normalized(p: &CurvePoint, k: i64) -> CurvePoint {
    WeierstrassCurve::scale_point(p, &int(k))
}

/// Twist class `D` of a curve `y² = x³ - N·x` (N > 0) viewed as a twist of
/// `y² = x³ - x`; `None` for curves outside the family or quartic twists.
pub fn congruent_twist_class(curve: &WeierstrassCurve) -> Result<Option<numtheory::SquarefreeClass>> {
    if !curve.b().is_zero() || !curve.a().is_negative() {
        return Ok(None);
    }
    let n = -curve.a();
    let budget = numtheory::FactorBudget::default();
    let mut d = BigInt::one();
    for part in [n.numer(), n.denom()] {
        for (p, e) in numtheory::factorize(part, &budget)?.prime_powers {
            match e % 4 {
                0 => {}
                2 => d *= p,
                _ => return Ok(None),
            }
        }
    }
    Ok(Some(numtheory::SquarefreeClass::from_squarefree(d)))
}

/// Write `n = D·k²` with `D` squarefree; returns `(D, k)`.
pub fn split_square(n: i64) -> Result<(i64, i64)> {
    let f = numtheory::factorize_i64(n)?;
    let mut d = f.sign as i64;
    let mut k = 1i64;
    for (p, e) in f.prime_powers {
        let p = p as i64;
        if e % 2 == 1 {
            d *= p;
        }
        k *= p.pow(e / 2);
    }
    Ok((d, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn e25() -> WeierstrassCurve {
        WeierstrassCurve::congruent(5).unwrap()
    }

    #[test]
    fn on_curve_examples() {
        let c15 = TwistedCurve::congruent(15).unwrap();
        assert!(c15.contains_twisted(&CurvePoint::new(frac(-3, 5), frac(4, 25))));
        assert!(TwistedCurve::congruent(7).unwrap().contains_twisted(&CurvePoint::from_ints(0, 0)));
        let e1 = WeierstrassCurve::congruent(1).unwrap();
        assert!(!e1.contains(&CurvePoint::from_ints(1, 1)));
        assert!(e1.contains(&CurvePoint::Infinity));
    }

    #[test]
    fn singular_rejected() {
        assert_eq!(WeierstrassCurve::new(int(0), int(0)), Err(Error::SingularCurve));
    }

    #[test]
    fn add_examples() {
        let e = e25();
        let p = CurvePoint::from_ints(-4, 6);
        assert_eq!(e.add(&p, &CurvePoint::Infinity).unwrap(), p);
        assert_eq!(e.add(&p, &e.neg(&p)).unwrap(), CurvePoint::Infinity);
        let two_p = CurvePoint::new(frac(1681, 144), frac(-62279, 1728));
        assert_eq!(e.add(&p, &p).unwrap(), two_p);
        assert!(e.contains(&two_p));
        assert_eq!(e.add(&p, &CurvePoint::from_ints(1, 1)), Err(Error::OffCurve));
    }

    #[test]
    fn scalar_mul_examples() {
        let e = e25();
        let p = CurvePoint::from_ints(-4, 6);
        assert_eq!(e.scalar_mul(0, &p).unwrap(), CurvePoint::Infinity);
        assert_eq!(e.scalar_mul(2, &CurvePoint::from_ints(0, 0)).unwrap(), CurvePoint::Infinity);
        assert_eq!(e.scalar_mul(2, &p).unwrap(), e.add(&p, &p).unwrap());
        assert_eq!(e.scalar_mul(1, &p).unwrap(), p);
        assert_eq!(e.scalar_mul(-3, &p).unwrap(), e.neg(&e.scalar_mul(3, &p).unwrap()));
        let five = e.add(&e.scalar_mul(2, &p).unwrap(), &e.scalar_mul(3, &p).unwrap()).unwrap();
        assert_eq!(e.scalar_mul(5, &p).unwrap(), five);
    }

    #[test]
    fn torsion_examples() {
        let e = e25();
        assert_eq!(e.torsion_test(&CurvePoint::Infinity).unwrap(), TorsionStatus::Torsion(1));
        assert_eq!(e.torsion_test(&CurvePoint::from_ints(0, 0)).unwrap(), TorsionStatus::Torsion(2));
        assert_eq!(e.torsion_test(&CurvePoint::from_ints(-4, 6)).unwrap(), TorsionStatus::NonTorsion);
    }

    #[test]
    fn torsion_on_non_integral_model_uses_full_loop() {
        // y² = x³ - x/16 is E^{1/2} scaled; (1/4, 0) is 2-torsion.
        let e = WeierstrassCurve::new(frac(-1, 16), int(0)).unwrap();
        assert_eq!(e.torsion_test(&CurvePoint::new(frac(1, 4), int(0))).unwrap(), TorsionStatus::Torsion(2));
    }

    #[test]
    fn torsion_of_order_three() {
        // y² = x³ + 1 has (0, ±1) of order 3 and (2, ±3) of order 6.
        let e = WeierstrassCurve::new(int(0), int(1)).unwrap();
        assert_eq!(e.torsion_test(&CurvePoint::from_ints(0, 1)).unwrap(), TorsionStatus::Torsion(3));
        assert_eq!(e.torsion_test(&CurvePoint::from_ints(2, 3)).unwrap(), TorsionStatus::Torsion(6));
    }

    #[test]
    fn search_examples() {
        let pts = e25().search_points(10);
        for p in [(-5, 0), (0, 0), (5, 0), (-4, 6), (-4, -6)] {
            assert!(pts.contains(&CurvePoint::from_ints(p.0, p.1)), "{p:?}");
        }
        let e1 = WeierstrassCurve::congruent(1).unwrap().search_points(5);
        assert_eq!(
            e1,
            vec![CurvePoint::from_ints(-1, 0), CurvePoint::from_ints(0, 0), CurvePoint::from_ints(1, 0)]
        );
        let e34 = WeierstrassCurve::congruent(34).unwrap().search_points(20);
        assert!(e34.contains(&CurvePoint::from_ints(-16, 120)));
        assert!(e34.iter().all(|p| WeierstrassCurve::congruent(34).unwrap().contains(p)));
    }

    #[test]
    fn search_finds_square_denominators() {
        let e13 = WeierstrassCurve::congruent(13).unwrap();
        let pts = e13.search_points(40);
        assert!(pts.contains(&CurvePoint::new(frac(-36, 25), frac(-1938, 125))));
    }

    #[test]
    fn search_on_non_integral_model() {
        let e = WeierstrassCurve::new(frac(-25, 16), int(0)).unwrap();
        let pts = e.search_points(10);
        assert!(pts.contains(&CurvePoint::new(frac(-1, 1), frac(3, 4))));
        assert!(pts.iter().all(|p| e.contains(p)));
    }

    #[test]
    fn certify_examples() {
        let c = certify_positive_rank(5, Family::Congruent, 10, None).unwrap();
        assert_eq!(c.certificate().unwrap().witness, Some(CurvePoint::from_ints(-4, 6)));
        assert!(matches!(
            certify_positive_rank(1, Family::Congruent, 10, None).unwrap(),
            RankOutcome::Inconclusive { .. }
        ));
        let c = certify_positive_rank(15, Family::Congruent, 10, None).unwrap();
        assert_eq!(c.certificate().unwrap().witness, Some(CurvePoint::from_ints(-9, 36)));
        c.certificate().unwrap().verify().unwrap();
        assert!(matches!(certify_positive_rank(12, Family::Congruent, 10, None), Err(Error::NotSquarefree(_))));
    }

    #[test]
    fn certify_external_fallback_is_opt_in() {
        let table = ExternalFactTable::builtin();
        let no = certify_positive_rank(119, Family::Congruent, 50, None).unwrap();
        assert!(matches!(no, RankOutcome::Inconclusive { .. }));
        let yes = certify_positive_rank(119, Family::Congruent, 50, Some(&table)).unwrap();
        let cert = yes.certificate().unwrap();
        assert!(cert.provenance.is_external());
        assert!(cert.witness.is_none());
        // A search hit is never replaced by a table entry.
        let found = certify_positive_rank(119, Family::Congruent, 200, Some(&table)).unwrap();
        assert!(found.certificate().unwrap().is_search_found());
    }

    #[test]
    fn normalize_examples() {
        let c1 = TwistedCurve::congruent(1).unwrap();
        let p = CurvePoint::from_ints(0, 0);
        assert_eq!(normalize_twist(&c1, &p).unwrap(), p);
        let c15 = TwistedCurve::congruent(15).unwrap();
        let tw = CurvePoint::new(frac(-3, 5), frac(4, 25));
        let n = normalize_twist(&c15, &tw).unwrap();
        assert_eq!(n, CurvePoint::from_ints(-9, 36));
        assert_eq!(denormalize_twist(&c15, &n).unwrap(), tw);
        assert_eq!(normalize_twist(&c15, &CurvePoint::from_ints(1, 1)), Err(Error::OffCurve));
    }

    #[test]
    fn plus_family_normalizes() {
        let c = TwistedCurve::new(2, Family::Plus).unwrap();
        // 2y² = x³ + x at x = 1: y = 1.
        let p = CurvePoint::from_ints(1, 1);
        assert!(c.contains_twisted(&p));
        let n = normalize_twist(&c, &p).unwrap();
        assert!(c.normalized().contains(&n));
    }

    #[test]
    fn two_torsion_is_full() {
        for d in [1, 2, 3, 5, 6, 7, 15, 34, 119, -5] {
            let c = TwistedCurve::congruent(d).unwrap();
            let t = c.two_torsion_twisted();
            assert_eq!(t.len(), 4);
            for p in &t {
                assert!(c.contains_twisted(p));
                let n = normalize_twist(&c, p).unwrap();
                assert!(c.normalized().scalar_mul(2, &n).unwrap().is_infinity());
            }
        }
    }

    #[test]
    fn twist_class_of_scaled_models() {
        let class = |a: i64| congruent_twist_class(&WeierstrassCurve::new(int(a), int(0)).unwrap()).unwrap();
        assert_eq!(class(-16).unwrap().representative(), &BigInt::from(1));
        assert_eq!(class(-1296).unwrap().representative(), &BigInt::from(1));
        assert_eq!(class(-324).unwrap().representative(), &BigInt::from(2));
        assert_eq!(class(-25 * 81).unwrap().representative(), &BigInt::from(5));
        assert!(class(-2).is_none());
        assert!(class(4).is_none());
    }

    #[test]
    fn split_square_examples() {
        assert_eq!(split_square(20).unwrap(), (5, 2));
        assert_eq!(split_square(-72).unwrap(), (-2, 6));
        assert_eq!(split_square(15).unwrap(), (15, 1));
    }

    #[test]
    fn shells_cover_bound() {
        assert_eq!(shells(10), vec![10]);
        assert_eq!(shells(100), vec![16, 64, 100]);
        assert_eq!(shells(0), Vec::<u64>::new());
    }

    #[test]
    fn point_json_roundtrip() {
        let p = CurvePoint::new(frac(-3, 5), frac(4, 25));
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"x":"-3/5","y":"4/25"}"#);
        assert_eq!(serde_json::from_str::<CurvePoint>(&s).unwrap(), p);
        let o = serde_json::to_string(&CurvePoint::Infinity).unwrap();
        assert_eq!(serde_json::from_str::<CurvePoint>(&o).unwrap(), CurvePoint::Infinity);
    }
}
