//! Sampling estimators for the regularity hierarchy.
//!
//! Every estimate here is one-sided: suprema over the whole space are
//! replaced by maxima over samples, so Lipschitz constants and moduli are
//! lower bounds and the usc probe is a necessary check.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperspace::{covers_within, hausdorff, FiniteCompact};
use crate::multifunction::classify::{RegularityClass, RegularityVerdict, Witness};
use crate::multifunction::comparison::{validate_comparison_function, ComparisonFunction};
use crate::multifunction::Multifunction;
use crate::sampling::{sample_near, stream};
use crate::space::Point;

/// Seed and sample count for the δ-grid samplers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Sampling {
    pub seed: u64,
    pub samples_per_delta: usize,
}

impl Sampling {
    pub fn new(seed: u64) -> Sampling {
        Sampling {
            seed,
            samples_per_delta: 64,
        }
    }

    pub fn with_samples(mut self, n: usize) -> Sampling {
        self.samples_per_delta = n;
        self
    }
}

pub(crate) fn check_delta_grid(deltas: &[f64]) -> Result<()> {
    if deltas.is_empty() {
        return Err(Error::invalid("delta grid is empty"));
    }
    if deltas.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
        return Err(Error::invalid("delta grid must be positive and finite"));
    }
    if deltas.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::invalid("delta grid must be strictly decreasing"));
    }
    Ok(())
}

/// Fresh samples for each δ index: points `x` with `d(x, x0) < δ_k` inside
/// the domain, plus breakpoints of `phi` in that ball. The sample set for
/// `δ_k` is the union of the fresh batches at indices `>= k`, which nests the
/// sets along the (decreasing) grid.
pub fn nested_point_samples(
    phi: &Multifunction,
    x0: &Point,
    deltas: &[f64],
    sampling: Sampling,
    tag: u64,
) -> Vec<Vec<Point>> {
    let bps = phi.breakpoints();
    deltas
        .iter()
        .enumerate()
        .map(|(k, &delta)| {
            let mut rng = stream(sampling.seed, &[tag, x0_key(x0), k as u64]);
            let mut fresh: Vec<Point> = (0..sampling.samples_per_delta)
                .filter_map(|_| sample_near(x0, delta, Some(phi.domain()), &mut rng))
                .collect();
            fresh.extend(bps.iter().filter(|b| b.distance(x0) < delta).copied());
            fresh
        })
        .collect()
}

fn x0_key(x: &Point) -> u64 {
    x.coords()
        .iter()
        .fold(0u64, |h, c| h.rotate_left(17) ^ c.to_bits())
}

/// `max_{x ∈ probe} h(φ1(x), φ2(x))`, a lower bound of the Chebyshev distance.
pub fn chebyshev_estimate(
    phi1: &Multifunction,
    phi2: &Multifunction,
    probe: &FiniteCompact,
) -> Result<f64> {
    phi1.space().check(phi2.space())?;
    phi1.space().check(probe.space())?;
    probe
        .points()
        .par_iter()
        .map(|x| hausdorff(&phi1.eval(x)?, &phi2.eval(x)?))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

fn pair_ratio(phi: &Multifunction, x: &Point, y: &Point) -> Result<(f64, f64)> {
    let d = x.checked_distance(y)?;
    if d == 0.0 {
        return Err(Error::invalid(format!("pair ({x}, {y}) has zero distance")));
    }
    Ok((hausdorff(&phi.eval(x)?, &phi.eval(y)?)?, d))
}

/// `max h(φ(x), φ(y)) / d(x, y)` over the pairs.
pub fn lipschitz_estimate(phi: &Multifunction, pairs: &[(Point, Point)]) -> Result<f64> {
    pairs
        .par_iter()
        .map(|(x, y)| pair_ratio(phi, x, y).map(|(h, d)| h / d))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Lipschitz estimate of a set map over pairs of compacta.
pub fn lipschitz_estimate_sets<F>(map: F, pairs: &[(FiniteCompact, FiniteCompact)]) -> Result<f64>
where
    F: Fn(&FiniteCompact) -> Result<FiniteCompact> + Sync,
{
    pairs
        .par_iter()
        .map(|(b, c)| {
            let d = hausdorff(b, c)?;
            if d == 0.0 {
                return Err(Error::invalid("pair of equal compacta"));
            }
            Ok(hausdorff(&map(b)?, &map(c)?)? / d)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Passes iff `h(φ(x), φ(y)) <= η(d(x, y))` on every pair. A failing verdict
/// carries the first violating pair in input order.
pub fn check_weak_contraction(
    phi: &Multifunction,
    eta: &ComparisonFunction,
    pairs: &[(Point, Point)],
) -> Result<RegularityVerdict> {
    let grid = ComparisonFunction::default_grid();
    let v = validate_comparison_function(eta, &grid);
    if !v.valid {
        return Err(Error::invalid(format!(
            "comparison function {eta:?} failed validation (first failure at t = {:?})",
            v.first_failure
        )));
    }
    let results = pairs
        .par_iter()
        .map(|(x, y)| pair_ratio(phi, x, y).map(|(h, d)| (h, eta.eval(d))))
        .collect::<Result<Vec<_>>>()?;
    let worst_slack = results
        .iter()
        .map(|(h, e)| e - h)
        .fold(f64::INFINITY, f64::min);
    let bad = results.iter().position(|(h, e)| !(h <= e));
    let mut verdict = RegularityVerdict::new(
        if bad.is_some() {
            RegularityClass::Violated
        } else {
            RegularityClass::WeakContraction
        },
        0,
    );
    verdict.comparison = Some(eta.clone());
    verdict.estimates.insert("pairs".into(), pairs.len() as f64);
    verdict.estimates.insert("min_slack".into(), worst_slack);
    if let Some(i) = bad {
        let (x, y) = pairs[i];
        verdict.witness = Some(Witness {
            x,
            y,
            observed: results[i].0,
            bound: results[i].1,
        });
    }
    Ok(verdict)
}

/// Sampled pointwise modulus `ω(δ) = max h(φ(x), φ(x0))` over samples with
/// `d(x, x0) < δ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusTable {
    pub center: Point,
    pub deltas: Vec<f64>,
    pub omega: Vec<f64>,
    pub seed: u64,
    pub samples_per_delta: usize,
}

pub fn modulus_of_continuity(
    phi: &Multifunction,
    x0: &Point,
    deltas: &[f64],
    sampling: Sampling,
) -> Result<ModulusTable> {
    check_delta_grid(deltas)?;
    let v0 = phi.eval(x0)?;
    let batches = nested_point_samples(phi, x0, deltas, sampling, 0x4d4f44);
    let fresh_max = batches
        .par_iter()
        .map(|batch| {
            batch.iter().try_fold(0.0f64, |m, x| {
                Ok::<_, Error>(m.max(hausdorff(&phi.eval(x)?, &v0)?))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut omega = vec![0.0; deltas.len()];
    let mut run = 0.0f64;
    for k in (0..deltas.len()).rev() {
        run = run.max(fresh_max[k]);
        omega[k] = run;
    }
    Ok(ModulusTable {
        center: *x0,
        deltas: deltas.to_vec(),
        omega,
        seed: sampling.seed,
        samples_per_delta: sampling.samples_per_delta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UscProbe {
    pub center: Point,
    pub eps: f64,
    /// Largest grid δ whose samples all satisfy `φ(x) ⊂ N_ε φ(x0)`.
    pub delta: Option<f64>,
    /// A sample that broke the inclusion at the first failing δ.
    pub witness: Option<Point>,
    pub seed: u64,
}

pub fn usc_probe(
    phi: &Multifunction,
    x0: &Point,
    eps: f64,
    deltas: &[f64],
    sampling: Sampling,
) -> Result<UscProbe> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    check_delta_grid(deltas)?;
    let v0 = phi.eval(x0)?;
    let batches = nested_point_samples(phi, x0, deltas, sampling, 0x555343);
    let mut delta = None;
    let mut witness = None;
    for k in (0..deltas.len()).rev() {
        let mut bad = None;
        for x in &batches[k] {
            if !covers_within(&phi.eval(x)?, &v0, eps)? {
                bad = Some(*x);
                break;
            }
        }
        match bad {
            None => delta = Some(deltas[k]),
            Some(x) => {
                witness = Some(x);
                break;
            }
        }
    }
    Ok(UscProbe {
        center: *x0,
        eps,
        delta,
        witness,
        seed: sampling.seed,
    })
}
