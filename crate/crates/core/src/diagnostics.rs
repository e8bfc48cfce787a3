//! Reports over atlases: gaps between `T`-projections on a real interval,
//! fibers with a non-torsion point, and root numbers along the base.

use std::collections::{BTreeMap, HashSet};

use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria;
use crate::elliptic::{CurvePoint, TorsionStatus};
use crate::error::{Error, Result};
use crate::numtheory::SquarefreeClass;
use crate::rational::{self, ExactRational};
use crate::surface::{fiber_point, fiber_twist_class, Atlas, SurfaceFamily, SurfacePoint};

/// Default number of decimal digits in reported gaps.
pub const DEFAULT_PRECISION: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchCoverage {
    pub both_y_signs_present: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityReport {
    #[serde(with = "rational")]
    pub lo: ExactRational,
    #[serde(with = "rational")]
    pub hi: ExactRational,
    /// Atlas points with `T` in `[lo, hi]`.
    pub samples: usize,
    pub distinct_t: usize,
    /// Exact largest gap.
    #[serde(with = "rational")]
    pub max_gap: ExactRational,
    /// `max_gap` to `precision` decimal places.
    pub max_gap_decimal: String,
    pub precision: usize,
    pub branch_coverage: BranchCoverage,
    pub sample_source: String,
}

/// Largest gap between consecutive distinct `T` values in `[lo, hi]`,
/// the endpoints counted as samples. With fewer than two samples in the
/// interval the gap is `hi - lo`, so the statistic never increases when
/// points are added.
pub fn density_report(atlas: &Atlas, lo: &ExactRational, hi: &ExactRational, precision: usize) -> Result<DensityReport> {
    density_of_points(&atlas.points, &atlas.source_id(), lo, hi, precision)
}

pub fn density_of_points(
    points: &[SurfacePoint],
    source: &str,
    lo: &ExactRational,
    hi: &ExactRational,
    precision: usize,
) -> Result<DensityReport> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("atlas is empty".into()));
    }
    if lo >= hi {
        return Err(Error::InvalidParameter("interval needs lo < hi".into()));
    }
    let inside: Vec<&SurfacePoint> = points.iter().filter(|p| &p.t >= lo && &p.t <= hi).collect();
    let mut ts: Vec<&ExactRational> = inside.iter().map(|p| &p.t).collect();
    ts.sort();
    ts.dedup();
    let max_gap = if inside.len() < 2 {
        hi - lo
    } else {
        std::iter::once(lo)
            .chain(ts.iter().copied())
            .chain(std::iter::once(hi))
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| w[1] - w[0])
            .max()
            .expect("at least two entries")
    };
    Ok(DensityReport {
        lo: lo.clone(),
        hi: hi.clone(),
        samples: inside.len(),
        distinct_t: ts.len(),
        max_gap_decimal: rational::to_decimal(&max_gap, precision),
        max_gap,
        precision,
        branch_coverage: BranchCoverage { both_y_signs_present: both_y_signs(points) },
        sample_source: source.to_string(),
    })
}

/// Some point `(X, Y, T)` with `Y ≠ 0` appears together with `(X, -Y, T)`.
pub fn both_y_signs(points: &[SurfacePoint]) -> bool {
    let set: HashSet<(&ExactRational, &ExactRational, &ExactRational)> =
        points.iter().map(|p| (&p.x, &p.y, &p.t)).collect();
    points.iter().any(|p| !p.y.is_zero() && set.contains(&(&p.x, &-&p.y, &p.t)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankJumpRow {
    #[serde(with = "rational")]
    pub t: ExactRational,
    pub fiber_class: SquarefreeClass,
    /// On the normalized fiber `y² = x³ - D²x`.
    pub witness: CurvePoint,
    pub torsion_status: TorsionStatus,
}

/// One row per distinct `T` whose atlas points include a non-torsion
/// fiber point; the witness is the one of least height, sign chosen with
/// `y > 0`.
pub fn rank_jump_table(family: &SurfaceFamily, points: &[SurfacePoint]) -> Vec<RankJumpRow> {
    let mut by_t: BTreeMap<&ExactRational, Vec<&SurfacePoint>> = BTreeMap::new();
    for p in points.iter().filter(|p| !p.exceptional) {
        by_t.entry(&p.t).or_default().push(p);
    }
    let groups: Vec<_> = by_t.into_iter().collect();
    let mut rows: Vec<RankJumpRow> = groups
        .par_iter()
        .filter_map(|(t, pts)| {
            let mut best: Option<(SquarefreeClass, CurvePoint)> = None;
            for p in pts {
                let Ok((curve, q)) = fiber_point(family, p) else { continue };
                let e = curve.normalized();
                if !e.is_non_torsion(&q).unwrap_or(false) {
                    continue;
                }
                let q = if q.y().is_some_and(|y| y.is_negative()) { e.neg(&q) } else { q };
                if best.as_ref().is_none_or(|(_, b)| q.canonical_cmp(b).is_lt()) {
                    let class = SquarefreeClass::from_squarefree(curve.d.into());
                    best = Some((class, q));
                }
            }
            best.map(|(fiber_class, witness)| RankJumpRow {
                t: (*t).clone(),
                fiber_class,
                witness,
                torsion_status: TorsionStatus::NonTorsion,
            })
        })
        .collect();
    rows.sort_by(|a, b| rational::height(&a.t).cmp(&rational::height(&b.t)).then_with(|| a.t.cmp(&b.t)));
    rows
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootNumberRow {
    #[serde(with = "rational")]
    pub t: ExactRational,
    pub fiber_class: Option<SquarefreeClass>,
    pub root_number: Option<i8>,
    /// Set when the row could not be evaluated.
    pub unsupported: Option<String>,
}

/// Root number of each fiber `E^{[d(1 + a²T⁴)]}`. Rows whose class is
/// negative are marked unsupported.
pub fn root_number_survey(d: i64, a: i64, ts: &[ExactRational]) -> Vec<RootNumberRow> {
    ts.par_iter()
        .map(|t| {
            let row = |class: Option<SquarefreeClass>, rn: Option<i8>, why: Option<String>| RootNumberRow {
                t: t.clone(),
                fiber_class: class,
                root_number: rn,
                unsupported: why,
            };
            let class = match fiber_twist_class(d, a, t) {
                Ok(c) => c,
                Err(e) => return row(None, None, Some(e.to_string())),
            };
            if class.representative().is_negative() {
                return row(Some(class), None, Some("negative fiber class".into()));
            }
            match class.to_i64().ok_or(Error::InvalidParameter("class out of range".into())).and_then(criteria::root_number) {
                Ok(w) => row(Some(class), Some(w), None),
                Err(e) => row(Some(class), None, Some(e.to_string())),
            }
        })
        .collect()
}

/// `n` coprime pairs `(l, m)` with `|l|, |m| <= bound`, not both zero,
/// drawn from a seeded generator.
pub fn random_coprime_pairs(n: usize, bound: i64, seed: u64) -> Vec<(i64, i64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let l = rng.gen_range(-bound..=bound);
        let m = rng.gen_range(-bound..=bound);
        if (l, m) != (0, 0) && l.gcd(&m) == 1 {
            out.push((l, m));
        }
    }
    out
}

/// `n` random `T = l/m` with coprime `|l|, |m| <= bound`, `m ≠ 0`.
pub fn random_ts(n: usize, bound: i64, seed: u64) -> Vec<ExactRational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let l = rng.gen_range(-bound..=bound);
        let m = rng.gen_range(1..=bound);
        if l.gcd(&m) == 1 {
            out.push(ExactRational::new(l.into(), m.into()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};
    use crate::surface::{atlas_generate, spr_check};

    fn pt(x: ExactRational, y: ExactRational, t: ExactRational) -> SurfacePoint {
        SurfacePoint::new(x, y, t)
    }

    #[test]
    fn single_point_gap_is_interval_length() {
        let p = pt(frac(-3, 5), frac(4, 25), int(1));
        let r = density_of_points(&[p], "one", &int(-2), &int(2), 5).unwrap();
        assert_eq!(r.max_gap, int(4));
        assert_eq!(r.samples, 1);
        assert_eq!(r.max_gap_decimal, "4.00000");
        assert!(!r.branch_coverage.both_y_signs_present);
    }

    #[test]
    fn gaps_include_endpoints_and_shrink() {
        let a = vec![pt(int(2), int(1), int(0)), pt(int(2), int(-1), int(0))];
        let ra = density_of_points(&a, "a", &int(-2), &int(2), 3).unwrap();
        assert_eq!(ra.max_gap, int(2));
        assert!(ra.branch_coverage.both_y_signs_present);
        let mut b = a.clone();
        b.push(pt(int(2), int(1), int(1)));
        let rb = density_of_points(&b, "b", &int(-2), &int(2), 3).unwrap();
        assert!(rb.max_gap <= ra.max_gap);
        assert_eq!(rb.max_gap, int(2));
    }

    #[test]
    fn density_errors() {
        assert!(density_of_points(&[], "e", &int(0), &int(1), 3).is_err());
        let p = pt(int(2), int(1), int(0));
        assert!(density_of_points(&[p], "e", &int(1), &int(1), 3).is_err());
    }

    #[test]
    fn rank_jump_row_at_t1() {
        let fam = SurfaceFamily::new(3, 2).unwrap();
        let cert = spr_check(&fam, 5, 100, None).unwrap().certificate.unwrap();
        let atlas = atlas_generate(&cert, (2, 1)).unwrap();
        let rows = rank_jump_table(&fam, &atlas.points);
        let row = rows.iter().find(|r| r.t == int(1)).expect("row at T = 1");
        assert_eq!(row.fiber_class.to_i64(), Some(15));
        assert_eq!(row.witness, CurvePoint::from_ints(-9, 36));
        let mut ts: Vec<_> = rows.iter().map(|r| r.t.clone()).collect();
        ts.dedup();
        assert_eq!(ts.len(), rows.len());
        assert!(rank_jump_table(&fam, &[pt(int(1), int(0), int(3))]).is_empty());
    }

    #[test]
    fn root_number_examples() {
        let ts = [int(0), int(1), frac(1, 2), int(2), int(3)];
        assert!(root_number_survey(7, 1, &ts).iter().all(|r| r.root_number == Some(-1)));
        let r = root_number_survey(1, 2, &[int(0), int(1)]);
        assert_eq!(r[0].root_number, Some(1));
        assert_eq!(r[1].root_number, Some(-1));
        assert!(root_number_survey(17, 1, &[int(0), int(1), int(2)]).iter().all(|r| r.root_number == Some(1)));
        let neg = root_number_survey(-7, 1, &[int(0)]);
        assert!(neg[0].unsupported.is_some() && neg[0].root_number.is_none());
    }

    #[test]
    fn sampling_is_seeded() {
        assert_eq!(random_ts(10, 20, 7), random_ts(10, 20, 7));
        assert!(random_coprime_pairs(50, 40, 1).iter().all(|&(l, m)| l.gcd(&m) == 1));
    }
}
