//! Finite compacta and exact Hausdorff-metric arithmetic.
//!
//! A [`FiniteCompact`] is a nonempty, deduplicated, canonically ordered finite
//! point set. Finite sets are compact, so closure is the identity on this
//! representation and the identities `cl B = ∩ N_ε B`, `N_ε cl B = N_ε B`,
//! `cl N_η B ⊂ N_ε B` and `h(cl B, cl C) = h(B, C)` hold trivially.
//!
//! Open neighborhoods `N_ε B` are never materialized. Membership `B ⊂ N_ε C`
//! is the strict excess test `excess(B, C) < ε`.

mod cloud;
mod index;
mod lebesgue;
mod prune;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::space::{Point, Space};

pub use cloud::{parse_cloud, read_cloud, write_cloud, write_cloud_file};
pub use index::KdTree;
pub use lebesgue::{lebesgue_number, Ball, LebesgueNumber};
pub use prune::{prune, PruneMode};

/// Below this many pairwise distance evaluations the loops stay sequential.
const PAR_THRESHOLD: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteCompact {
    space: Space,
    points: Vec<Point>,
}

impl FiniteCompact {
    /// Canonicalizes `points`: sorted lexicographically, duplicates removed.
    pub fn new(space: Space, mut points: Vec<Point>) -> Result<FiniteCompact> {
        if points.is_empty() {
            return Err(Error::Empty);
        }
        for p in &points {
            space.check(p.space())?;
        }
        points.sort_unstable_by(|a, b| a.canonical_cmp(b));
        points.dedup();
        Ok(FiniteCompact { space, points })
    }

    pub fn singleton(p: Point) -> FiniteCompact {
        FiniteCompact {
            space: p.space(),
            points: vec![p],
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(space: Space, rows: &[R]) -> Result<FiniteCompact> {
        let pts = rows
            .iter()
            .map(|r| Point::new(space, r.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        FiniteCompact::new(space, pts)
    }

    /// Finite subset of the real line.
    pub fn from_reals(xs: &[f64]) -> Result<FiniteCompact> {
        let pts = xs.iter().map(|x| Point::real(*x)).collect::<Result<Vec<_>>>()?;
        FiniteCompact::new(Space::Euclidean(1), pts)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; kept for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.points
            .binary_search_by(|q| q.canonical_cmp(p))
            .is_ok()
    }

    pub fn is_subset(&self, other: &FiniteCompact) -> bool {
        self.space == other.space && self.points.iter().all(|p| other.contains(p))
    }

    pub fn union(&self, other: &FiniteCompact) -> Result<FiniteCompact> {
        FiniteCompact::union_all([self, other])
    }

    pub fn union_all<'a, I>(sets: I) -> Result<FiniteCompact>
    where
        I: IntoIterator<Item = &'a FiniteCompact>,
    {
        let mut iter = sets.into_iter();
        let first = iter.next().ok_or(Error::Empty)?;
        let mut pts = first.points.clone();
        for s in iter {
            first.space.check(s.space)?;
            pts.extend_from_slice(&s.points);
        }
        FiniteCompact::new(first.space, pts)
    }

    /// Largest pairwise distance. Exact up to 4096 points; beyond that the
    /// diagonal of the bounding box of the stored coordinates, an upper bound.
    pub fn diameter(&self) -> f64 {
        let n = self.points.len();
        if n > 4096 {
            let k = self.space.coord_len();
            let mut s = 0.0;
            for i in 0..k {
                let (lo, hi) = self.points.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
                    (lo.min(p.coords()[i]), hi.max(p.coords()[i]))
                });
                s += (hi - lo) * (hi - lo);
            }
            let d = s.sqrt();
            return if self.space.is_projective() { d.min(1.0) } else { d };
        }
        (0..n)
            .into_par_iter()
            .map(|i| {
                let p = &self.points[i];
                self.points[i + 1..]
                    .iter()
                    .map(|q| p.distance(q))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }
}

impl Serialize for FiniteCompact {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("FiniteCompact", 2)?;
        st.serialize_field("space", &self.space)?;
        st.serialize_field("points", &self.points)?;
        st.end()
    }
}

/// `d(b, C) = min_{c ∈ C} d(b, c)`.
pub fn point_set_distance(b: &Point, set: &FiniteCompact) -> Result<f64> {
    set.space.check(b.space())?;
    Ok(nearest(b, set))
}

fn nearest(b: &Point, set: &FiniteCompact) -> f64 {
    match set.space {
        Space::Euclidean(_) => set
            .points
            .iter()
            .map(|c| b.sq_dist(c))
            .fold(f64::INFINITY, f64::min)
            .sqrt(),
        Space::ProjectivePlane => set
            .points
            .iter()
            .map(|c| b.distance(c))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Directed excess `e(B, C) = max_{b ∈ B} d(b, C)`, using a kd-tree on `C`
/// for Euclidean spaces.
pub fn excess(b: &FiniteCompact, c: &FiniteCompact) -> Result<f64> {
    b.space.check(c.space)?;
    if c.space.is_projective() || c.len() < 32 {
        return Ok(excess_scan(b, c));
    }
    let tree = KdTree::new(c);
    Ok(excess_with_tree(b, &tree))
}

/// Excess by the plain double loop. Bit-identical to [`excess`].
pub fn excess_brute(b: &FiniteCompact, c: &FiniteCompact) -> Result<f64> {
    b.space.check(c.space)?;
    Ok(excess_scan(b, c))
}

fn excess_scan(b: &FiniteCompact, c: &FiniteCompact) -> f64 {
    let work = b.len().saturating_mul(c.len());
    if work < PAR_THRESHOLD {
        b.points.iter().map(|p| nearest(p, c)).fold(0.0, f64::max)
    } else {
        b.points
            .par_iter()
            .map(|p| nearest(p, c))
            .reduce(|| 0.0, f64::max)
    }
}

/// Max over `b` of the squared nearest distance, with the usual early exit:
/// once some point of `C` is closer than the running maximum, `b` cannot
/// raise it. Each chunk keeps its own running maximum, so the final value is
/// the same for any split.
fn excess_with_tree(b: &FiniteCompact, tree: &KdTree) -> f64 {
    let chunk = |pts: &[Point]| {
        let mut worst = 0.0f64;
        for p in pts {
            let d = tree.nearest_sq_above(p, worst);
            if d > worst {
                worst = d;
            }
        }
        worst
    };
    let sq = if b.len() < 256 {
        chunk(&b.points)
    } else {
        b.points
            .par_chunks(128)
            .map(chunk)
            .reduce(|| 0.0, f64::max)
    };
    sq.sqrt()
}

/// Hausdorff distance `h(B, C) = max(e(B, C), e(C, B))`.
pub fn hausdorff(b: &FiniteCompact, c: &FiniteCompact) -> Result<f64> {
    Ok(excess(b, c)?.max(excess(c, b)?))
}

/// Hausdorff distance by the brute-force double loop.
pub fn hausdorff_brute(b: &FiniteCompact, c: &FiniteCompact) -> Result<f64> {
    Ok(excess_brute(b, c)?.max(excess_brute(c, b)?))
}

/// `B ⊂ N_ε C`, i.e. `e(B, C) < ε` (open neighborhood, strict).
pub fn covers_within(b: &FiniteCompact, c: &FiniteCompact, eps: f64) -> Result<bool> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    Ok(excess(b, c)? < eps)
}
