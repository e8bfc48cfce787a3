#![allow(dead_code)]

use std::sync::OnceLock;

use k3twist::elliptic::{CurvePoint, WeierstrassCurve};
use k3twist::rational::{int, ExactRational};
use num_traits::Zero;

/// Chord and tangent directly on `D·y² = x³ + s·x`, written out here so
/// the library's group law on the normalized model can be checked
/// against it.
pub fn twisted_add(d: i64, s: i64, p: &CurvePoint, q: &CurvePoint) -> CurvePoint {
    let (x1, y1, x2, y2) = match (p, q) {
        (CurvePoint::Infinity, _) => return q.clone(),
        (_, CurvePoint::Infinity) => return p.clone(),
        (CurvePoint::Affine { x: x1, y: y1 }, CurvePoint::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
    };
    let dd = int(d);
    let lambda: ExactRational = if x1 != x2 {
        (y2 - y1) / (x2 - x1)
    } else if y1 == y2 && !y1.is_zero() {
        (int(3) * x1 * x1 + int(s)) / (int(2) * &dd * y1)
    } else {
        return CurvePoint::Infinity;
    };
    let x3 = &dd * &lambda * &lambda - x1 - x2;
    let y3 = &lambda * (x1 - &x3) - y1;
    CurvePoint::new(x3, y3)
}

/// Normalized test curves with independent non-torsion points:
/// `y² = x³ - 25x`, `y² = x³ - 1156x` and `y² = x³ - 225x`.
pub struct Basis {
    pub curve: WeierstrassCurve,
    pub d: i64,
    pub gens: Vec<CurvePoint>,
    pub torsion: Vec<CurvePoint>,
}

pub fn bases() -> &'static [Basis] {
    static B: OnceLock<Vec<Basis>> = OnceLock::new();
    B.get_or_init(|| {
        [(5, vec![(-4, 6)]), (34, vec![(-2, 48), (-16, 120)]), (15, vec![(-9, 36)])]
            .into_iter()
            .map(|(d, gens)| {
                let curve = WeierstrassCurve::congruent(d).unwrap();
                let gens: Vec<CurvePoint> = gens.into_iter().map(|(x, y)| CurvePoint::from_ints(x, y)).collect();
                for g in &gens {
                    assert!(curve.contains(g), "{g} not on E^{d}");
                }
                let torsion = vec![
                    CurvePoint::Infinity,
                    CurvePoint::from_ints(0, 0),
                    CurvePoint::from_ints(d, 0),
                    CurvePoint::from_ints(-d, 0),
                ];
                Basis { curve, d, gens, torsion }
            })
            .collect()
    })
}

/// `Σ cᵢ·genᵢ + torsion[k]` on basis `b`.
pub fn combo(b: &Basis, coeffs: &[i64], k: usize) -> CurvePoint {
    let mut acc = b.torsion[k % 4].clone();
    for (g, &c) in b.gens.iter().zip(coeffs) {
        acc = b.curve.add(&acc, &b.curve.scalar_mul(c, g).unwrap()).unwrap();
    }
    acc
}
