//! Arithmetic criteria for the torsors `C·s² = 1 + a²t⁴` and the twists
//! `E^D`: local solubility, root numbers, Selmer bounds, condition (**),
//! the expected-rank families, the 2-isogeny and the fiber-prime congruence.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::{CurvePoint, Family, TwistedCurve, WeierstrassCurve};
use crate::error::{Error, Result};
use crate::facts::RankFact;
use crate::numtheory::{self, FactorBudget};
use crate::quartic::QuarticTorsor;
use crate::rational::{from_big, int, ExactRational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Soluble,
    Insoluble,
    GuaranteedSoluble,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolubilityVerdict {
    pub kind: VerdictKind,
    /// Which criterion produced the verdict.
    pub criterion: String,
    /// Prime factors responsible for a negative or unknown verdict.
    pub obstructions: Vec<u64>,
}

fn positive_squarefree(c: i64, what: &str) -> Result<numtheory::Factorization> {
    if c <= 0 {
        return Err(Error::InvalidParameter(format!("{what} must be positive, got {c}")));
    }
    numtheory::require_squarefree(c)?;
    numtheory::factorize_i64(c)
}

/// `C·s² = 1 + t⁴` is everywhere locally soluble iff every odd prime
/// factor of `C` is `≡ 1 mod 8`.
pub fn solubility_a1(c: i64) -> Result<SolubilityVerdict> {
    let f = positive_squarefree(c, "C")?;
    let bad: Vec<u64> = f.primes().filter(|&p| p != 2 && p % 8 != 1).collect();
    Ok(SolubilityVerdict {
        kind: if bad.is_empty() { VerdictKind::Soluble } else { VerdictKind::Insoluble },
        criterion: "a=1: odd primes of C are 1 mod 8".into(),
        obstructions: bad,
    })
}

/// Sufficient condition for `C·s² = 1 + 4t⁴`: `C ≡ 5 mod 8` and `-4` a
/// fourth power modulo every prime factor. Never reports insolubility.
pub fn solubility_a2(c: i64) -> Result<SolubilityVerdict> {
    let f = positive_squarefree(c, "C")?;
    let criterion = "a=2: C = 5 mod 8 and -4 a fourth power mod p | C".to_string();
    if c % 8 != 5 {
        return Ok(SolubilityVerdict { kind: VerdictKind::Unknown, criterion, obstructions: vec![] });
    }
    let mut bad = Vec::new();
    for p in f.primes() {
        if !numtheory::is_fourth_power_mod_p(-4, p)? {
            bad.push(p);
        }
    }
    Ok(SolubilityVerdict {
        kind: if bad.is_empty() { VerdictKind::GuaranteedSoluble } else { VerdictKind::Unknown },
        criterion,
        obstructions: bad,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Place {
    Real,
    Prime(u64),
}

/// Decide whether the torsor has a point over `R` or `Q_p`.
///
/// For `Q_p` the affine chart `t ∈ Z_p` and the chart at infinity
/// `t = 1/u, u ∈ pZ_p` are explored by residue classes. A class is
/// settled once the Taylor expansion shows every value in it has the same
/// square class (Hensel), or once a root is hit. Classes still open at
/// depth `precision` raise `PrecisionBudget` unless another class already
/// produced a point.
pub fn brute_local_solubility(torsor: &QuarticTorsor, place: Place, precision: u32) -> Result<bool> {
    if precision == 0 {
        return Err(Error::InvalidParameter("precision must be at least 1".into()));
    }
    let g = &torsor.g;
    let coeffs = [&g.e, &g.d, &g.c, &ExactRational::zero(), &g.a];
    let lcm = coeffs.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scale = from_big(&lcm * &lcm * BigInt::from(torsor.twist));
    // H(t) = C·L²·G(t): a square exactly when C·G(t) is.
    let h: Vec<BigInt> = coeffs.iter().map(|x| (*x * &scale).to_integer()).collect();
    match place {
        Place::Real => Ok(real_soluble(&h)),
        Place::Prime(p) => {
            if !numtheory::is_prime(p) {
                return Err(Error::InvalidModulus(format!("{p} is not prime")));
            }
            let mut rev = h.clone();
            rev.reverse();
            let affine = padic_search(&h, p, 0, precision)?;
            if affine == Search::Found {
                return Ok(true);
            }
            let infinity = padic_search(&rev, p, 1, precision)?;
            match (affine, infinity) {
                (_, Search::Found) => Ok(true),
                (Search::Exhausted, Search::Exhausted) => Ok(false),
                _ => Err(Error::PrecisionBudget(p)),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Search {
    Found,
    Exhausted,
    Open,
}

fn valuation(n: &BigInt, p: &BigInt) -> u32 {
    let mut n = n.clone();
    let mut v = 0;
    while !n.is_zero() && (&n % p).is_zero() {
        n /= p;
        v += 1;
    }
    v
}

/// Taylor coefficients of `h(r + y)` (low to high).
fn taylor_shift(h: &[BigInt], r: &BigInt) -> Vec<BigInt> {
    let mut c = h.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = &c[j + 1] * r;
            c[j] += t;
        }
    }
    c
}

fn is_padic_square_nonzero(n: &BigInt, p: u64) -> bool {
    let pb = BigInt::from(p);
    let v = valuation(n, &pb);
    if v % 2 == 1 {
        return false;
    }
    let unit = n / num_traits::pow(pb.clone(), v as usize);
    if p == 2 {
        unit.mod_floor(&BigInt::from(8)) == BigInt::one()
    } else {
        numtheory::jacobi_symbol(&unit, &pb).map(|j| j == 1).unwrap_or(false)
    }
}

/// Search `x ≡ 0 mod p^start` downwards for an `x` with `h(x)` a square.
fn padic_search(h: &[BigInt], p: u64, start: u32, precision: u32) -> Result<Search> {
    let pb = BigInt::from(p);
    let slack = if p == 2 { 2 } else { 0 };
    let mut stack: Vec<(BigInt, u32)> = vec![(BigInt::zero(), start)];
    let mut open = false;
    while let Some((r, k)) = stack.pop() {
        let t = taylor_shift(h, &r);
        if t[0].is_zero() {
            return Ok(Search::Found);
        }
        let v = valuation(&t[0], &pb);
        let settled = t.iter().enumerate().skip(1).all(|(i, ti)| {
            ti.is_zero() || valuation(ti, &pb) + k * i as u32 > v + slack
        });
        if settled {
            if is_padic_square_nonzero(&t[0], p) {
                return Ok(Search::Found);
            }
            continue;
        }
        if k >= precision {
            open = true;
            continue;
        }
        let step = num_traits::pow(pb.clone(), k as usize);
        for j in 0..p {
            stack.push((&r + &step * BigInt::from(j), k + 1));
        }
    }
    Ok(if open { Search::Open } else { Search::Exhausted })
}

/// `H(t) ≥ 0` somewhere on `R` with `H` of degree 4: true when the leading
/// coefficient is positive or `H` has a real root.
fn real_soluble(h: &[BigInt]) -> bool {
    if h.last().is_some_and(|a| a.is_positive()) {
        return true;
    }
    let poly: Vec<ExactRational> = h.iter().cloned().map(from_big).collect();
    real_root_count(&poly) > 0
}

fn trim(mut p: Vec<ExactRational>) -> Vec<ExactRational> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn poly_rem(a: &[ExactRational], b: &[ExactRational]) -> Vec<ExactRational> {
    let mut r = a.to_vec();
    let lead = b.last().expect("nonzero divisor");
    while r.len() >= b.len() {
        let k = r.len() - b.len();
        let q = r.last().unwrap() / lead;
        for (i, bi) in b.iter().enumerate() {
            r[k + i] -= &q * bi;
        }
        r.pop();
        r = trim(r);
    }
    r
}

/// Number of distinct real roots via a Sturm sequence.
pub(crate) fn real_root_count(poly: &[ExactRational]) -> usize {
    let p0 = trim(poly.to_vec());
    if p0.len() <= 1 {
        return 0;
    }
    let p1: Vec<ExactRational> = trim(p0.iter().enumerate().skip(1).map(|(i, c)| c * int(i as i64)).collect());
    let mut seq = vec![p0, p1];
    while seq.last().is_some_and(|p| p.len() > 1) {
        let n = seq.len();
        let r: Vec<ExactRational> = poly_rem(&seq[n - 2], &seq[n - 1]).into_iter().map(|c| -c).collect();
        if r.is_empty() {
            break;
        }
        seq.push(r);
    }
    let changes = |at_pos_inf: bool| {
        let signs: Vec<bool> = seq
            .iter()
            .filter(|p| !p.is_empty())
            .map(|p| {
                let lead_pos = p.last().unwrap().is_positive();
                let odd = (p.len() - 1) % 2 == 1;
                if at_pos_inf || !odd {
                    lead_pos
                } else {
                    !lead_pos
                }
            })
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    };
    changes(false) - changes(true)
}

/// Root number of `y² = x³ - D²x`: `+1` for `D ≡ 1, 2, 3 mod 8`, `-1` for
/// `D ≡ 5, 6, 7 mod 8`.
pub fn root_number(d: i64) -> Result<i8> {
    positive_squarefree(d, "D")?;
    Ok(match d % 8 {
        1..=3 => 1,
        5..=7 => -1,
        _ => unreachable!("squarefree D is not divisible by 4"),
    })
}

/// `2·Ω(n) + 2`, `Ω` counting odd prime divisors.
pub fn selmer_upper_bound(n: i64) -> Result<u32> {
    let f = positive_squarefree(n, "n")?;
    Ok(2 * f.omega_odd() + 2)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelmerLedger {
    pub c: i64,
    pub omega: u32,
    pub upper_bound: u32,
    pub rank_lower_bound: u32,
    pub external_rank: Option<RankFact>,
    /// Conjectural remarks; never asserted.
    pub notes: Vec<String>,
}

impl SelmerLedger {
    /// Ledger for `E^{2C}`.
    pub fn new(c: i64) -> Result<Self> {
        let f = positive_squarefree(c, "C")?;
        let omega = f.omega_odd();
        Ok(SelmerLedger {
            c,
            omega,
            upper_bound: 2 * omega + 2,
            rank_lower_bound: 0,
            external_rank: None,
            notes: vec![],
        })
    }

    /// Record a lower bound; rejects bounds the Selmer group cannot hold.
    pub fn record_lower_bound(&mut self, r: u32) -> Result<()> {
        self.rank_lower_bound = self.rank_lower_bound.max(r);
        self.check()
    }

    pub fn record_external(&mut self, fact: RankFact) -> Result<()> {
        self.external_rank = Some(fact);
        self.check()
    }

    pub fn check(&self) -> Result<()> {
        if self.rank_lower_bound + 2 > self.upper_bound {
            return Err(Error::LedgerViolation(format!(
                "rank >= {} but dim Sel2 <= {} for C = {}",
                self.rank_lower_bound, self.upper_bound, self.c
            )));
        }
        if let Some(f) = &self.external_rank {
            if f.rank + 2 > self.upper_bound {
                return Err(Error::LedgerViolation(format!(
                    "external rank {} exceeds Selmer bound {} for C = {}",
                    f.rank, self.upper_bound, self.c
                )));
            }
            if f.rank < self.rank_lower_bound {
                return Err(Error::LedgerViolation(format!(
                    "external rank {} below certified lower bound {}",
                    f.rank, self.rank_lower_bound
                )));
            }
        }
        Ok(())
    }
}

/// Class of `q` in `Q*/Q*²` as its signed squarefree kernel.
fn square_class(q: &ExactRational) -> Result<BigInt> {
    numtheory::squarefree_kernel(&(q.numer() * q.denom()))
}

/// Full 2-descent image of `P` on `y² = x³ - D²x = x(x - D)(x + D)`:
/// `(x, x - D)` modulo squares, with the usual values at 2-torsion.
pub fn kummer_image(d: i64, p: &CurvePoint) -> Result<(BigInt, BigInt)> {
    let curve = WeierstrassCurve::congruent(d)?;
    if !curve.contains(p) {
        return Err(Error::OffCurve);
    }
    let dd = int(d);
    let (x, y) = match p {
        CurvePoint::Infinity => return Ok((BigInt::one(), BigInt::one())),
        CurvePoint::Affine { x, y } => (x, y),
    };
    let (first, second) = if !y.is_zero() {
        (x.clone(), x - &dd)
    } else if x.is_zero() {
        (-&dd * &dd, -dd)
    } else if *x == dd {
        (dd.clone(), int(2) * &dd * &dd)
    } else {
        (-dd.clone(), int(-2) * &dd)
    };
    Ok((square_class(&first)?, square_class(&second)?))
}

/// Lower bound for the rank of `y² = x³ - D²x` from the given points:
/// the dimension of their span together with `E[2]` inside
/// `E(Q)/2E(Q)`, minus 2.
pub fn rank_lower_bound(d: i64, points: &[CurvePoint]) -> Result<u32> {
    let two_torsion = [CurvePoint::from_ints(0, 0), CurvePoint::new(int(d), int(0)), CurvePoint::new(int(-d), int(0))];
    let mut vectors = Vec::new();
    let mut index: BTreeMap<BigInt, usize> = BTreeMap::new();
    for p in two_torsion.iter().chain(points) {
        let (a, b) = kummer_image(d, p)?;
        let mut bits = Vec::new();
        for (slot, class) in [(0usize, a), (1usize, b)] {
            for prime in class_primes(&class)? {
                let len = index.len();
                let i = *index.entry(prime).or_insert(len);
                bits.push(2 * i + slot);
            }
        }
        vectors.push(bits);
    }
    let width = 2 * index.len();
    let mut rows: Vec<Vec<bool>> = vectors
        .into_iter()
        .map(|bits| {
            let mut row = vec![false; width];
            for b in bits {
                row[b] ^= true;
            }
            row
        })
        .collect();
    let rank = f2_rank(&mut rows);
    Ok(rank.saturating_sub(2) as u32)
}

/// Primes (and `-1`) dividing a squarefree class representative.
fn class_primes(class: &BigInt) -> Result<Vec<BigInt>> {
    let mut out = Vec::new();
    if class.is_negative() {
        out.push(BigInt::from(-1));
    }
    let abs = class.abs();
    if abs.is_one() {
        return Ok(out);
    }
    let f = numtheory::factorize(&abs, &FactorBudget::default())?;
    out.extend(f.primes().map(BigInt::from));
    Ok(out)
}

fn f2_rank(rows: &mut [Vec<bool>]) -> usize {
    let width = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col]) else {
            continue;
        };
        rows.swap(rank, pivot);
        for r in 0..rows.len() {
            if r != rank && rows[r][col] {
                let (src, dst) = if r < rank {
                    let (lo, hi) = rows.split_at_mut(rank);
                    (&hi[0], &mut lo[r])
                } else {
                    let (lo, hi) = rows.split_at_mut(r);
                    (&lo[rank], &mut hi[0])
                };
                for (d, s) in dst.iter_mut().zip(src) {
                    *d ^= *s;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StarStar {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum StarStarRoute {
    /// A certified lower bound reached `2Ω(C)`, and the Selmer bound
    /// caps the rank at the same value.
    Squeeze { lower_bound: u32 },
    /// Curated rank claim (flagged, not computed).
    ExternalFact { citation: String },
    /// `C` fails the `a = 1` local criterion.
    LocalObstruction,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarStarOutcome {
    pub c: i64,
    pub verdict: StarStar,
    pub target_rank: u32,
    pub route: StarStarRoute,
    /// When the verdict holds: `Sha(E^{2C})[2] = 0` and `C·s² = 1 + t⁴` has
    /// infinitely many rational points.
    pub conclusions: Vec<String>,
}

/// Condition (**): `2Ω(C) = rank(E^{2C})`, from a certified lower bound on
/// the rank of `E^{2C}` and/or a curated rank fact.
pub fn star_star_verdict(c: i64, lower_bound: Option<u32>, external: Option<&RankFact>) -> Result<StarStarOutcome> {
    let sol = solubility_a1(c)?;
    let mut ledger = SelmerLedger::new(c)?;
    let target = 2 * ledger.omega;
    let mut out = StarStarOutcome {
        c,
        verdict: StarStar::Inconclusive,
        target_rank: target,
        route: StarStarRoute::None,
        conclusions: vec![],
    };
    if sol.kind == VerdictKind::Insoluble {
        out.verdict = StarStar::Fails;
        out.route = StarStarRoute::LocalObstruction;
        return Ok(out);
    }
    if let Some(lb) = lower_bound {
        ledger.record_lower_bound(lb)?;
    }
    if let Some(f) = external {
        if f.d != 2 * c {
            return Err(Error::InvalidParameter(format!("fact for D = {} supplied for C = {c}", f.d)));
        }
        ledger.record_external(f.clone())?;
    }
    if ledger.rank_lower_bound >= target {
        out.verdict = StarStar::Holds;
        out.route = StarStarRoute::Squeeze { lower_bound: ledger.rank_lower_bound };
    } else if let Some(f) = external {
        out.verdict = if f.rank == target { StarStar::Holds } else { StarStar::Fails };
        out.route = StarStarRoute::ExternalFact { citation: f.citation.clone() };
    }
    if out.verdict == StarStar::Holds {
        out.conclusions = vec![
            format!("Sha(E^{})[2] = 0", 2 * c),
            format!("{c}s^2 = 1 + t^4 has a rational point, hence infinitely many"),
        ];
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "expectation", content = "citation", rename_all = "snake_case")]
pub enum ExpectedRank {
    PositiveRankExpected(String),
    Unknown,
}

/// Twists known to be congruent numbers: primes `≡ 5, 7 mod 8`, and `pq`,
/// `2pq` with `p ≡ 5 mod 8`, `q ≡ 3 or 7 mod 8`.
pub fn expected_rank_family(d: i64) -> Result<ExpectedRank> {
    let f = positive_squarefree(d, "D")?;
    let mut odd: Vec<u64> = f.primes().collect();
    let two = odd.first() == Some(&2);
    if two {
        odd.remove(0);
    }
    if !two && odd.len() == 1 && matches!(odd[0] % 8, 5 | 7) {
        return Ok(ExpectedRank::PositiveRankExpected("prime p = 5, 7 mod 8".into()));
    }
    if odd.len() == 2 {
        let fits = |p: u64, q: u64| p % 8 == 5 && matches!(q % 8, 3 | 7);
        if fits(odd[0], odd[1]) || fits(odd[1], odd[0]) {
            let tag = if two { "2pq" } else { "pq" };
            return Ok(ExpectedRank::PositiveRankExpected(format!(
                "{tag} with p = 5 mod 8, q = 3, 7 mod 8"
            )));
        }
    }
    Ok(ExpectedRank::Unknown)
}

/// `y² = x³ + 4D²x`, target of [`two_isogeny_image`].
pub fn two_isogeny_target(d: i64) -> Result<WeierstrassCurve> {
    WeierstrassCurve::new(int(4) * int(d) * int(d), int(0))
}

/// The degree-2 isogeny with kernel `{O, (0,0)}` from `y² = x³ - D²x` to
/// `y² = x³ + 4D²x`: `(x, y) ↦ (y²/x², y(-D² - x²)/x²)`.
pub fn two_isogeny_image(d: i64, p: &CurvePoint) -> Result<CurvePoint> {
    let source = WeierstrassCurve::congruent(d)?;
    if !source.contains(p) {
        return Err(Error::OffCurve);
    }
    match p {
        CurvePoint::Infinity => Ok(CurvePoint::Infinity),
        CurvePoint::Affine { x, .. } if x.is_zero() => Ok(CurvePoint::Infinity),
        CurvePoint::Affine { x, y } => {
            let x2 = x * x;
            let d2 = int(d) * int(d);
            Ok(CurvePoint::new(y * y / &x2, y * (-d2 - &x2) / x2))
        }
    }
}

/// The isogeny target as a member of the `x³ + x` family: `y² = x³ + (2D)²x`
/// is the normalized model of that twist.
pub fn two_isogeny_target_twist(d: i64) -> Result<TwistedCurve> {
    let class = numtheory::squarefree_class_int(2 * d)?;
    let rep = class.to_i64().ok_or_else(|| Error::InvalidParameter("class out of range".into()))?;
    TwistedCurve::new(rep, Family::Plus)
}

/// Every odd prime factor of `l⁴ + m⁴` is `≡ 1 mod 8`.
pub fn fiber_prime_check(l: i64, m: i64) -> Result<bool> {
    if l == 0 && m == 0 {
        return Err(Error::ZeroInput);
    }
    if l.gcd(&m) != 1 {
        return Err(Error::InvalidParameter(format!("gcd({l}, {m}) != 1")));
    }
    let (l, m) = (BigInt::from(l), BigInt::from(m));
    let n = num_traits::pow(l, 4) + num_traits::pow(m, 4);
    let f = numtheory::factorize(&n, &FactorBudget::default())?;
    let ok = f.primes().all(|p| p == 2 || p % 8 == 1);
    Ok(ok)
}

/// Brute checks at every prime dividing `2C` and at the real place, run
/// in parallel.
pub fn brute_all_bad_places(torsor: &QuarticTorsor, precision: u32) -> Result<Vec<(Place, bool)>> {
    let c = torsor.twist.unsigned_abs();
    let mut places = vec![Place::Real, Place::Prime(2)];
    if c > 1 {
        let f = numtheory::factorize_i64(c as i64)?;
        places.extend(f.primes().filter(|&p| p != 2).map(Place::Prime));
    }
    places
        .into_par_iter()
        .map(|pl| brute_local_solubility(torsor, pl, precision).map(|ok| (pl, ok)))
        .collect()
}

/// `C` as an `i64`, for callers holding a class representative.
pub fn class_to_i64(c: &BigInt) -> Result<i64> {
    c.to_i64().ok_or_else(|| Error::InvalidParameter(format!("{c} does not fit in 64 bits")))
}
