use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperspace::FiniteCompact;
use crate::space::{Point, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneMode {
    /// Snap coordinates to a lattice of spacing `eps / sqrt(k)` (`k` stored
    /// coordinates), then deduplicate. Each point moves at most `eps / 2`.
    Grid,
    /// Scan in canonical order, keep a point unless a kept point lies within
    /// `eps`. Kept points are original points.
    #[default]
    Greedy,
}

/// An ε-net of `set` with `h(prune(set), set) <= eps`. `eps = 0` is the identity.
pub fn prune(set: &FiniteCompact, eps: f64, mode: PruneMode) -> Result<FiniteCompact> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::invalid(format!(
            "prune eps must be finite and >= 0, got {eps}"
        )));
    }
    if eps == 0.0 || set.len() == 1 {
        return Ok(set.clone());
    }
    match mode {
        PruneMode::Grid => prune_grid(set, eps),
        PruneMode::Greedy => Ok(prune_greedy(set, eps)),
    }
}

fn prune_grid(set: &FiniteCompact, eps: f64) -> Result<FiniteCompact> {
    let space = set.space();
    let k = space.coord_len();
    let step = eps / (k as f64).sqrt();
    let pts = set
        .points()
        .iter()
        .map(|p| {
            let c: Vec<f64> = p.coords().iter().map(|x| (x / step).round() * step).collect();
            Point::new(space, &c)
        })
        .collect::<Result<Vec<_>>>()?;
    FiniteCompact::new(space, pts)
}

type Cell = [i64; 3];

fn cell_of(c: &[f64], size: f64) -> Cell {
    let mut out = [0i64; 3];
    for (o, x) in out.iter_mut().zip(c) {
        *o = (x / size).floor() as i64;
    }
    out
}

fn neighbours(cell: Cell, k: usize) -> impl Iterator<Item = Cell> {
    let span = |i: usize| if i < k { -1..=1 } else { 0..=0 };
    let (a, b, c) = (span(0), span(1), span(2));
    a.flat_map(move |i| {
        let c = c.clone();
        b.clone()
            .flat_map(move |j| c.clone().map(move |l| [cell[0] + i, cell[1] + j, cell[2] + l]))
    })
}

fn prune_greedy(set: &FiniteCompact, eps: f64) -> FiniteCompact {
    let space = set.space();
    let k = space.coord_len();
    // Lines within sine-distance eps have representatives (up to sign) within
    // chord sqrt(2) * eps, so the bucket size is widened and both signs probed.
    let size = match space {
        Space::Euclidean(_) => eps,
        Space::ProjectivePlane => eps * std::f64::consts::SQRT_2,
    };
    let mut grid: HashMap<Cell, Vec<usize>> = HashMap::new();
    let mut kept: Vec<Point> = Vec::new();
    for p in set.points() {
        let mut probes = vec![cell_of(p.coords(), size)];
        if space.is_projective() {
            let neg: Vec<f64> = p.coords().iter().map(|x| -x).collect();
            probes.push(cell_of(&neg, size));
        }
        let near = probes.iter().any(|c| {
            neighbours(*c, k).any(|n| {
                grid.get(&n)
                    .is_some_and(|ids| ids.iter().any(|&i| kept[i].distance(p) <= eps))
            })
        });
        if !near {
            grid.entry(probes[0]).or_default().push(kept.len());
            kept.push(*p);
        }
    }
    FiniteCompact::new(space, kept).expect("kept points are nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperspace::hausdorff;

    #[test]
    fn zero_eps_is_identity() {
        let b = FiniteCompact::from_reals(&[0.0, 0.3, 0.31]).unwrap();
        assert_eq!(prune(&b, 0.0, PruneMode::Grid).unwrap(), b);
        assert_eq!(prune(&b, 0.0, PruneMode::Greedy).unwrap(), b);
        assert!(prune(&b, -1e-3, PruneMode::Greedy).is_err());
    }

    #[test]
    fn greedy_example() {
        let b = FiniteCompact::from_reals(&[0.0, 0.001, 1.0]).unwrap();
        let p = prune(&b, 0.01, PruneMode::Greedy).unwrap();
        assert_eq!(p, FiniteCompact::from_reals(&[0.0, 1.0]).unwrap());
    }

    #[test]
    fn greedy_keeps_net_property() {
        let sp = Space::Euclidean(2);
        let rows: Vec<[f64; 2]> = (0..2000)
            .map(|i| {
                let t = i as f64 * 0.013;
                [t.cos() * (1.0 + 0.1 * (7.0 * t).sin()), t.sin()]
            })
            .collect();
        let b = FiniteCompact::from_rows(sp, &rows).unwrap();
        for eps in [1e-3, 0.02, 0.3] {
            for mode in [PruneMode::Grid, PruneMode::Greedy] {
                let p = prune(&b, eps, mode).unwrap();
                assert!(hausdorff(&p, &b).unwrap() <= eps, "{mode:?} {eps}");
                assert!(p.len() <= b.len());
            }
        }
        let g = prune(&b, 0.02, PruneMode::Greedy).unwrap();
        for (i, a) in g.points().iter().enumerate() {
            for c in &g.points()[i + 1..] {
                assert!(a.distance(c) > 0.02);
            }
        }
    }

    #[test]
    fn projective_prune_keeps_net_property() {
        let sp = Space::ProjectivePlane;
        let rows: Vec<[f64; 3]> = (0..500)
            .map(|i| {
                let t = i as f64 * 0.05;
                [t.cos(), t.sin(), 0.2 + 0.01 * i as f64]
            })
            .collect();
        let b = FiniteCompact::from_rows(sp, &rows).unwrap();
        for mode in [PruneMode::Grid, PruneMode::Greedy] {
            let p = prune(&b, 0.05, mode).unwrap();
            assert!(hausdorff(&p, &b).unwrap() <= 0.05);
            assert!(p.len() < b.len());
        }
    }
}
