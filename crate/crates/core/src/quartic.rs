//! Quartic torsors `C·s² = a·t⁴ + c·t² + d·t + e`, their invariants, and
//! the birational identification with an elliptic curve once a rational
//! point is known.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::{is_square_i128, CurvePoint, WeierstrassCurve};
use crate::error::{Error, Result};
use crate::numtheory;
use crate::rational::{self, from_big, int, ExactRational};

/// Coefficients of the depressed quartic `a·t⁴ + c·t² + d·t + e`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuarticCoeffs {
    #[serde(with = "rational")]
    pub a: ExactRational,
    #[serde(with = "rational")]
    pub c: ExactRational,
    #[serde(with = "rational")]
    pub d: ExactRational,
    #[serde(with = "rational")]
    pub e: ExactRational,
}

impl QuarticCoeffs {
    pub fn new(a: ExactRational, c: ExactRational, d: ExactRational, e: ExactRational) -> Self {
        QuarticCoeffs { a, c, d, e }
    }

    pub fn from_ints(a: i64, c: i64, d: i64, e: i64) -> Self {
        QuarticCoeffs::new(int(a), int(c), int(d), int(e))
    }

    pub fn eval(&self, t: &ExactRational) -> ExactRational {
        let t2 = t * t;
        &self.a * &t2 * &t2 + &self.c * &t2 + &self.d * t + &self.e
    }

    /// Coefficients of `G(λ·t)`.
    pub fn scale_variable(&self, lambda: &ExactRational) -> QuarticCoeffs {
        let l2 = lambda * lambda;
        QuarticCoeffs {
            a: &self.a * &l2 * &l2,
            c: &self.c * &l2,
            d: &self.d * lambda,
            e: self.e.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarticInvariants {
    #[serde(with = "rational")]
    pub i: ExactRational,
    #[serde(with = "rational")]
    pub j: ExactRational,
}

/// `I = 12ae + c²`, `J = 72ace - 27ad² - 2c³`.
pub fn invariants(g: &QuarticCoeffs) -> Result<QuarticInvariants> {
    if g.a.is_zero() {
        return Err(Error::DegenerateQuartic("leading coefficient is zero"));
    }
    let (a, c, d, e) = (&g.a, &g.c, &g.d, &g.e);
    let i = int(12) * a * e + c * c;
    let j = int(72) * a * c * e - int(27) * a * d * d - int(2) * c * c * c;
    Ok(QuarticInvariants { i, j })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorsorPoint {
    #[serde(with = "rational")]
    pub t: ExactRational,
    #[serde(with = "rational")]
    pub s: ExactRational,
}

impl TorsorPoint {
    pub fn new(t: ExactRational, s: ExactRational) -> Self {
        TorsorPoint { t, s }
    }

    pub fn from_ints(t: i64, s: i64) -> Self {
        TorsorPoint::new(int(t), int(s))
    }

    /// `(height(t), t, s)`.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        rational::height(&self.t)
            .cmp(&rational::height(&other.t))
            .then_with(|| self.t.cmp(&other.t))
            .then_with(|| self.s.cmp(&other.s))
    }
}

impl fmt::Display for TorsorPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(t={}, s={})", rational::to_string(&self.t), rational::to_string(&self.s))
    }
}

/// `C·s² = G(t)` with `C` squarefree and `G` separable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuarticTorsor {
    pub twist: i64,
    pub g: QuarticCoeffs,
}

impl QuarticTorsor {
    pub fn new(twist: i64, g: QuarticCoeffs) -> Result<Self> {
        numtheory::require_squarefree(twist)?;
        let inv = invariants(&g)?;
        let disc = int(4) * &inv.i * &inv.i * &inv.i - &inv.j * &inv.j;
        if disc.is_zero() {
            return Err(Error::DegenerateQuartic("repeated root"));
        }
        Ok(QuarticTorsor { twist, g })
    }

    /// `C·s² = 1 + a²t⁴`.
    pub fn cassels_schinzel(a: i64, c: i64) -> Result<Self> {
        if a == 0 {
            return Err(Error::DegenerateQuartic("leading coefficient is zero"));
        }
        Self::new(c, QuarticCoeffs::from_ints(a * a, 0, 0, 1))
    }

    pub fn invariants(&self) -> QuarticInvariants {
        invariants(&self.g).expect("validated at construction")
    }

    pub fn contains(&self, p: &TorsorPoint) -> bool {
        int(self.twist) * &p.s * &p.s == self.g.eval(&p.t)
    }

    fn check(&self, p: &TorsorPoint) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OffCurve)
        }
    }

    /// All affine points with `t = l/m`, `|l| <= bound`, `1 <= m <= bound`,
    /// in canonical order.
    pub fn search_points(&self, bound: u64) -> Vec<TorsorPoint> {
        search_torsor_points(self, bound)
    }
}

impl fmt::Display for QuarticTorsor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.g;
        write!(
            f,
            "{}s^2 = ({})t^4 + ({})t^2 + ({})t + ({})",
            self.twist,
            rational::to_string(&g.a),
            rational::to_string(&g.c),
            rational::to_string(&g.d),
            rational::to_string(&g.e)
        )
    }
}

/// `u² = v³ - 27I·v - 27J`.
pub fn weierstrass_model(torsor: &QuarticTorsor) -> Result<WeierstrassCurve> {
    let inv = torsor.invariants();
    WeierstrassCurve::new(int(-27) * inv.i, int(-27) * inv.j)
}

/// `(t, s) ↦ (t, -s)`.
pub fn hyperelliptic_involution(p: &TorsorPoint) -> TorsorPoint {
    TorsorPoint::new(p.t.clone(), -&p.s)
}

/// The identification of a torsor with a chosen point `P0` and a short
/// Weierstrass curve, `P0` going to the origin.
///
/// Working coordinates: `u = t - t0`, `v = C·s`, so that
/// `v² = C·G(t0 + u) = α u⁴ + β u³ + γ u² + δ u + q²` with `q = C·s0`.
/// The classical substitution sends this to a general Weierstrass curve
/// with `a1 = δ/q`, `a2 = γ - δ²/4q²`, `a3 = 2qβ`, `a4 = -4q²α`,
/// `a6 = a2·a4`, which is then completed to short form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuarticMap {
    torsor: QuarticTorsor,
    origin: TorsorPoint,
    curve: WeierstrassCurve,
    c: ExactRational,
    t0: ExactRational,
    q: ExactRational,
    beta: ExactRational,
    gamma: ExactRational,
    delta: ExactRational,
    a1: ExactRational,
    a2: ExactRational,
    a3: ExactRational,
    shift: ExactRational,
}

/// Build the identification sending `p0` to the origin.
pub fn to_weierstrass_with_point(torsor: &QuarticTorsor, p0: &TorsorPoint) -> Result<QuarticMap> {
    torsor.check(p0)?;
    if p0.s.is_zero() {
        return Err(Error::BranchLocus);
    }
    let c = int(torsor.twist);
    let (a, cc, d) = (&torsor.g.a, &torsor.g.c, &torsor.g.d);
    let t0 = p0.t.clone();
    let t02 = &t0 * &t0;
    // Taylor expansion of C·G around t0.
    let alpha = &c * a;
    let beta = &c * int(4) * a * &t0;
    let gamma = &c * (int(6) * a * &t02 + cc);
    let delta = &c * (int(4) * a * &t02 * &t0 + int(2) * cc * &t0 + d);
    let q = &c * &p0.s;
    let q2 = &q * &q;

    let a1 = &delta / &q;
    let a2 = &gamma - &delta * &delta / (int(4) * &q2);
    let a3 = int(2) * &q * &beta;
    let a4 = int(-4) * &q2 * &alpha;
    let a6 = &a2 * &a4;

    let b2 = &a1 * &a1 + int(4) * &a2;
    let b4 = int(2) * &a4 + &a1 * &a3;
    let b6 = &a3 * &a3 + int(4) * &a6;
    let c4 = &b2 * &b2 - int(24) * &b4;
    let c6 = -&b2 * &b2 * &b2 + int(36) * &b2 * &b4 - int(216) * &b6;
    let curve = WeierstrassCurve::new(-c4 / int(48), -c6 / int(864))?;

    Ok(QuarticMap {
        torsor: torsor.clone(),
        origin: p0.clone(),
        curve,
        c,
        t0,
        q,
        beta,
        gamma,
        delta,
        a1,
        a2,
        a3,
        shift: b2 / int(12),
    })
}

impl QuarticMap {
    pub fn curve(&self) -> &WeierstrassCurve {
        &self.curve
    }

    pub fn torsor(&self) -> &QuarticTorsor {
        &self.torsor
    }

    pub fn origin(&self) -> &TorsorPoint {
        &self.origin
    }

    fn general_to_short(&self, x: ExactRational, y: ExactRational) -> CurvePoint {
        let yy = &y + (&self.a1 * &x + &self.a3) / int(2);
        CurvePoint::new(x + &self.shift, yy)
    }

    /// Torsor point to curve point. Total on the torsor's affine points.
    pub fn forward(&self, p: &TorsorPoint) -> Result<CurvePoint> {
        self.torsor.check(p)?;
        let u = &p.t - &self.t0;
        let v = &self.c * &p.s;
        let q = &self.q;
        if u.is_zero() {
            if &v == q {
                return Ok(CurvePoint::Infinity);
            }
            let x = -&self.a2;
            let y = &self.a1 * &self.a2 - &self.a3;
            return Ok(self.general_to_short(x, y));
        }
        let u2 = &u * &u;
        let d = &self.delta;
        let x = (int(2) * q * (&v + q) + d * &u) / &u2;
        let y = (int(4) * q * q * (&v + q) + int(2) * q * (d * &u + &self.gamma * &u2)
            - d * d * &u2 / (int(2) * q))
            / (&u2 * &u);
        Ok(self.general_to_short(x, y))
    }

    /// Curve point to torsor point; errors on the finite exceptional set
    /// (general-model `y = 0` and images of the torsor's points at infinity).
    pub fn backward(&self, p: &CurvePoint) -> Result<TorsorPoint> {
        if !self.curve.contains(p) {
            return Err(Error::OffCurve);
        }
        let (xs, ys) = match p {
            CurvePoint::Infinity => return Ok(self.origin.clone()),
            CurvePoint::Affine { x, y } => (x, y),
        };
        let x = xs - &self.shift;
        let y = ys - (&self.a1 * &x + &self.a3) / int(2);
        if y.is_zero() {
            return Err(Error::ExceptionalSet);
        }
        let q = &self.q;
        let d = &self.delta;
        let u = (int(2) * q * (&x + &self.gamma) - d * d / (int(2) * q)) / &y;
        let v = -q + &u * (&u * &x - d) / (int(2) * q);
        let out = TorsorPoint::new(&self.t0 + u, v / &self.c);
        if !self.torsor.contains(&out) {
            return Err(Error::ExceptionalSet);
        }
        Ok(out)
    }

    /// `forward(ι(P0))`. The involution acts on the curve as
    /// `forward(ι P) = R - forward(P)` with this `R`.
    pub fn involution_image(&self) -> CurvePoint {
        self.forward(&hyperelliptic_involution(&self.origin)).expect("origin lies on the torsor")
    }

    /// `backward(forward(P) + forward(Q))`.
    pub fn transported_add(&self, p: &TorsorPoint, q: &TorsorPoint) -> Result<TorsorPoint> {
        let sum = self.curve.add(&self.forward(p)?, &self.forward(q)?)?;
        self.backward(&sum)
    }
}

/// Free-function form of [`QuarticMap::transported_add`].
pub fn transported_add(
    torsor: &QuarticTorsor,
    p0: &TorsorPoint,
    p: &TorsorPoint,
    q: &TorsorPoint,
) -> Result<TorsorPoint> {
    to_weierstrass_with_point(torsor, p0)?.transported_add(p, q)
}

/// Exhaustive search over `t = l/m` with `gcd(l, m) = 1`,
/// `|l| <= bound`, `1 <= m <= bound`.
pub fn search_torsor_points(torsor: &QuarticTorsor, bound: u64) -> Vec<TorsorPoint> {
    if bound == 0 {
        return Vec::new();
    }
    // Clear denominators: L·G(l/m)·m⁴ = F(l, m) with integer coefficients.
    let g = &torsor.g;
    let lcm = [&g.a, &g.c, &g.d, &g.e].iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scale = from_big(lcm.clone());
    let coeffs: Vec<BigInt> = [&g.a, &g.c, &g.d, &g.e].iter().map(|x| (*x * &scale).to_integer()).collect();
    // C·s² = F/L  ⇔  (C·L)·F is a square; then s = sqrt(C·L·F) / (C·L·m²).
    let cl = BigInt::from(torsor.twist) * &lcm;
    let fast: Option<[i128; 5]> = (|| {
        Some([
            coeffs[0].to_i128()?,
            coeffs[1].to_i128()?,
            coeffs[2].to_i128()?,
            coeffs[3].to_i128()?,
            cl.to_i128()?,
        ])
    })();
    let span = bound as i64;
    let mut pts: Vec<TorsorPoint> = (1..=bound as i64)
        .into_par_iter()
        .flat_map_iter(|m| {
            let mut found = Vec::new();
            for l in -span..=span {
                if l.gcd(&m) != 1 {
                    continue;
                }
                let root = match fast.and_then(|k| form_i128(&k, l as i128, m as i128)) {
                    Some(n) => is_square_i128(n).map(BigInt::from),
                    None => {
                        let (lb, mb) = (BigInt::from(l), BigInt::from(m));
                        let (l2, m2) = (&lb * &lb, &mb * &mb);
                        let f = &coeffs[0] * &l2 * &l2
                            + &coeffs[1] * &l2 * &m2
                            + &coeffs[2] * &lb * &m2 * &mb
                            + &coeffs[3] * &m2 * &m2;
                        rational::sqrt_exact(&(f * &cl))
                    }
                };
                if let Some(r) = root {
                    let t = ExactRational::new(BigInt::from(l), BigInt::from(m));
                    let s = ExactRational::new(r, &cl * BigInt::from(m * m));
                    if !s.is_zero() {
                        found.push(TorsorPoint::new(t.clone(), -&s));
                    }
                    found.push(TorsorPoint::new(t, s));
                }
            }
            found
        })
        .collect();
    pts.sort_by(|p, q| p.canonical_cmp(q));
    pts
}

/// `C·L·F(l, m)` in i128, or `None` on overflow.
fn form_i128(k: &[i128; 5], l: i128, m: i128) -> Option<i128> {
    let (l2, m2) = (l * l, m * m);
    let f = k[0]
        .checked_mul(l2.checked_mul(l2)?)?
        .checked_add(k[1].checked_mul(l2.checked_mul(m2)?)?)?
        .checked_add(k[2].checked_mul(l.checked_mul(m2)?.checked_mul(m)?)?)?
        .checked_add(k[3].checked_mul(m2.checked_mul(m2)?)?)?;
    f.checked_mul(k[4])
}

/// Preferred representative among `points`: `s >= 0`, then smallest
/// height, then `t >= 0` before `t < 0`, then smaller denominator.
pub fn preferred_point(points: &[TorsorPoint]) -> Option<TorsorPoint> {
    points
        .iter()
        .filter(|p| !p.s.is_negative())
        .min_by(|p, q| {
            rational::height(&p.t)
                .cmp(&rational::height(&q.t))
                .then_with(|| p.t.is_negative().cmp(&q.t.is_negative()))
                .then_with(|| p.t.denom().cmp(q.t.denom()))
                .then_with(|| p.canonical_cmp(q))
        })
        .cloned()
}

/// Points of the first nonempty search shell (16, 64, ... up to `bound`).
pub fn search_until_found(torsor: &QuarticTorsor, bound: u64) -> Vec<TorsorPoint> {
    for shell in crate::elliptic::shells(bound) {
        let pts = search_torsor_points(torsor, shell);
        if !pts.is_empty() {
            return pts;
        }
    }
    Vec::new()
}

/// Preferred point of smallest height, if any within `bound`.
pub fn first_point(torsor: &QuarticTorsor, bound: u64) -> Option<TorsorPoint> {
    preferred_point(&search_until_found(torsor, bound))
}
