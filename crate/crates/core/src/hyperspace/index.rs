use crate::hyperspace::FiniteCompact;
use crate::space::Point;

const LEAF: usize = 8;

/// Static kd-tree over the points of a Euclidean [`FiniteCompact`].
///
/// The tree is an implicit median split stored in one permuted array. Squared
/// distances are the same floating-point expression as [`Point::sq_dist`], and
/// subtrees are skipped only when the squared axis gap already reaches the best
/// candidate, which bounds every squared distance inside them from below. The
/// minimum found is therefore the exact minimum of the brute-force scan.
pub struct KdTree {
    pts: Vec<[f64; 3]>,
    dim: usize,
}

impl KdTree {
    pub fn new(set: &FiniteCompact) -> KdTree {
        let dim = set.space().coord_len();
        let mut pts: Vec<[f64; 3]> = set.points().iter().map(|p| *p.raw()).collect();
        build(&mut pts, 0, dim);
        KdTree { pts, dim }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    /// Exact minimum squared distance from `q` to the indexed points.
    pub fn nearest_sq(&self, q: &Point) -> f64 {
        self.nearest_sq_above(q, -1.0)
    }

    /// Exact minimum squared distance when it exceeds `floor`; otherwise some
    /// value `<= floor` (the search stops as soon as one is found).
    pub fn nearest_sq_above(&self, q: &Point, floor: f64) -> f64 {
        let mut best = f64::INFINITY;
        self.search(&self.pts, 0, q.raw(), floor, &mut best);
        best
    }

    fn search(&self, pts: &[[f64; 3]], depth: usize, q: &[f64; 3], floor: f64, best: &mut f64) {
        if *best <= floor {
            return;
        }
        if pts.len() <= LEAF {
            for p in pts {
                let d = sq(q, p, self.dim);
                if d < *best {
                    *best = d;
                }
            }
            return;
        }
        let axis = depth % self.dim;
        let mid = pts.len() / 2;
        let d = sq(q, &pts[mid], self.dim);
        if d < *best {
            *best = d;
        }
        let gap = q[axis] - pts[mid][axis];
        let (near, far) = if gap < 0.0 {
            (&pts[..mid], &pts[mid + 1..])
        } else {
            (&pts[mid + 1..], &pts[..mid])
        };
        self.search(near, depth + 1, q, floor, best);
        if gap * gap < *best {
            self.search(far, depth + 1, q, floor, best);
        }
    }
}

#[inline]
fn sq(a: &[f64; 3], b: &[f64; 3], dim: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..dim {
        let d = a[i] - b[i];
        s += d * d;
    }
    s
}

fn build(pts: &mut [[f64; 3]], depth: usize, dim: usize) {
    if pts.len() <= LEAF {
        return;
    }
    let axis = depth % dim;
    let mid = pts.len() / 2;
    pts.select_nth_unstable_by(mid, |a, b| a[axis].total_cmp(&b[axis]));
    let (lo, rest) = pts.split_at_mut(mid);
    build(lo, depth + 1, dim);
    build(&mut rest[1..], depth + 1, dim);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::stream;
    use crate::space::Space;
    use rand::Rng;

    #[test]
    fn nearest_matches_scan_in_every_dimension() {
        for dim in 1..=3 {
            let sp = Space::Euclidean(dim as u8);
            let mut rng = stream(11, &[dim as u64]);
            let rows: Vec<Vec<f64>> = (0..300)
                .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let set = FiniteCompact::from_rows(sp, &rows).unwrap();
            let tree = KdTree::new(&set);
            for _ in 0..200 {
                let q: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect();
                let q = Point::new(sp, &q).unwrap();
                let scan = set
                    .points()
                    .iter()
                    .map(|p| q.sq_dist(p))
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(tree.nearest_sq(&q).to_bits(), scan.to_bits());
            }
        }
    }

    #[test]
    fn duplicate_axis_values_are_handled() {
        let sp = Space::Euclidean(2);
        let rows: Vec<[f64; 2]> = (0..100).map(|i| [0.5, i as f64 * 0.01]).collect();
        let set = FiniteCompact::from_rows(sp, &rows).unwrap();
        let tree = KdTree::new(&set);
        let q = Point::new(sp, &[0.5, 0.333]).unwrap();
        let scan = set
            .points()
            .iter()
            .map(|p| q.sq_dist(p))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(tree.nearest_sq(&q), scan);
    }
}
