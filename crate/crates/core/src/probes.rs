//! Sampled δ–ε experiments on multifunctions and their Hutchinson operators.
//!
//! All probes are falsification tools: a passing probe means no sample broke
//! the property, a failing one carries the offending data.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hutchinson::HutchinsonOperator;
use crate::hyperspace::{excess, hausdorff, FiniteCompact};
use crate::multifunction::{
    check_delta_grid, classify, lipschitz_estimate, lipschitz_estimate_sets, nested_point_samples,
    union, chebyshev_estimate, ClassifyOptions, ComparisonFunction, Multifunction,
    RegularityClass, Sampling,
};
use crate::sampling::{sample_domain, sample_near, stream, SampleRng};
use crate::space::{Domain, Point};

/// Images larger than this are pruned before probing, and the report carries
/// the correction term.
pub const POINT_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuityVerdict {
    Decaying,
    Flat,
    Diverging,
}

/// Cut-offs used by [`judge_moduli`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerdictThresholds {
    /// `ω(δ_min)` must not exceed `max(decay_fraction · diam, decay_floor)`.
    pub decay_fraction: f64,
    pub decay_floor: f64,
    /// Flat when `ω(δ_min) >= flat_ratio · ω(δ_max) > 0`.
    pub flat_ratio: f64,
}

pub const THRESHOLDS: VerdictThresholds = VerdictThresholds {
    decay_fraction: 0.05,
    decay_floor: 0.05,
    flat_ratio: 0.5,
};

impl VerdictThresholds {
    pub fn decay_limit(&self, diam: f64) -> f64 {
        (self.decay_fraction * diam).max(self.decay_floor)
    }
}

/// Verdict for a modulus table listed along a decreasing δ grid.
pub fn judge_moduli(omega: &[f64], diam: f64) -> ContinuityVerdict {
    let (Some(&first), Some(&last)) = (omega.first(), omega.last()) else {
        return ContinuityVerdict::Decaying;
    };
    let monotone = omega.windows(2).all(|w| w[1] <= w[0]);
    if monotone && last <= THRESHOLDS.decay_limit(diam) {
        ContinuityVerdict::Decaying
    } else if first > 0.0 && last >= THRESHOLDS.flat_ratio * first {
        ContinuityVerdict::Flat
    } else {
        ContinuityVerdict::Diverging
    }
}

/// Moves used by [`sample_compacta_near`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Perturbation {
    /// Jitter radius as a fraction of `δ/2`.
    pub amplitude: f64,
    /// Allow dropping up to 20% of the points.
    pub drop: bool,
    /// Allow adding points within `δ` of the set.
    pub add: bool,
}

impl Default for Perturbation {
    fn default() -> Self {
        Perturbation {
            amplitude: 1.0,
            drop: true,
            add: true,
        }
    }
}

impl Perturbation {
    pub fn jitter(amplitude: f64) -> Perturbation {
        Perturbation {
            amplitude,
            drop: false,
            add: false,
        }
    }
}

fn jitter(c: &FiniteCompact, r: f64, domain: Option<&Domain>, rng: &mut SampleRng) -> Vec<Point> {
    c.points()
        .iter()
        .map(|p| {
            if r > 0.0 {
                sample_near(p, r, domain, rng).unwrap_or(*p)
            } else {
                *p
            }
        })
        .collect()
}

fn perturb_once(
    c: &FiniteCompact,
    delta: f64,
    domain: Option<&Domain>,
    moves: Perturbation,
    rng: &mut SampleRng,
) -> Result<FiniteCompact> {
    let scale = if rng.gen_bool(0.5) { 1.0 } else { rng.gen::<f64>() };
    let mut pts = jitter(c, moves.amplitude * scale * delta / 2.0, domain, rng);
    if moves.drop && pts.len() > 1 && rng.gen_bool(0.5) {
        let k = rng.gen_range(0..=pts.len() / 5);
        for _ in 0..k {
            let i = rng.gen_range(0..pts.len());
            pts.swap_remove(i);
        }
    }
    if moves.add && rng.gen_bool(0.5) {
        let m = rng.gen_range(1..=(c.len() / 5).max(1));
        for _ in 0..m {
            let q = c.points()[rng.gen_range(0..c.len())];
            if let Some(p) = sample_near(&q, delta, domain, rng) {
                pts.push(p);
            }
        }
    }
    if pts.is_empty() {
        return Ok(c.clone());
    }
    FiniteCompact::new(c.space(), pts)
}

/// `count` compacta `B` with `h(B, C) < δ`, each drawn from its own stream.
/// Candidates failing the check are redrawn a bounded number of times, then
/// replaced by a pure jitter of radius `δ/2` (or `C` itself).
pub fn sample_compacta_near(
    c: &FiniteCompact,
    delta: f64,
    count: usize,
    seed: u64,
    domain: Option<&Domain>,
    moves: Perturbation,
) -> Result<Vec<FiniteCompact>> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, &[0x4e454152, delta.to_bits(), i as u64]);
            for _ in 0..8 {
                let b = perturb_once(c, delta, domain, moves, &mut rng)?;
                if hausdorff(&b, c)? < delta {
                    return Ok(b);
                }
            }
            let r = moves.amplitude.min(1.0) * delta / 2.0;
            let b = FiniteCompact::new(c.space(), jitter(c, r, domain, &mut rng))?;
            if hausdorff(&b, c)? < delta {
                Ok(b)
            } else {
                Ok(c.clone())
            }
        })
        .collect()
}

fn batch_seed(seed: u64, tag: u64, k: usize) -> u64 {
    stream(seed, &[tag, k as u64]).gen()
}

/// Compacta samples per grid index. The set for `δ_k` is the union of the
/// batches at indices `>= k`, so every member satisfies `h(B, C) < δ_k`.
fn nested_compacta(
    c: &FiniteCompact,
    deltas: &[f64],
    samples: usize,
    seed: u64,
    domain: &Domain,
) -> Result<Vec<Vec<FiniteCompact>>> {
    deltas
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            sample_compacta_near(c, d, samples, batch_seed(seed, 0x434f4d50, k), Some(domain), Perturbation::default())
        })
        .collect()
}

/// Running max from the small-δ end, turning per-batch maxima into the
/// nested-set modulus.
fn suffix_max(fresh: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; fresh.len()];
    let mut run = 0.0f64;
    for k in (0..fresh.len()).rev() {
        run = run.max(fresh[k]);
        out[k] = run;
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityWitness {
    pub x: Point,
    pub y: Point,
    pub pointwise: f64,
    pub hutchinson: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingletonIdentityReport {
    pub pairs_checked: usize,
    pub passed: bool,
    pub witness: Option<IdentityWitness>,
}

/// Checks `h(φ(x), φ(y)) == h(F{x}, F{y})` bit for bit over all pairs drawn
/// from `points`.
pub fn singleton_identity_check(
    phi: &Multifunction,
    f: &HutchinsonOperator,
    points: &[Point],
) -> Result<SingletonIdentityReport> {
    if f.prune_eps() != 0.0 {
        return Err(Error::invalid("singleton identity needs prune_eps = 0"));
    }
    let pairs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|i| (i..points.len()).map(move |j| (i, j)))
        .collect();
    let results = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (x, y) = (points[i], points[j]);
            let lhs = hausdorff(&phi.eval(&x)?, &phi.eval(&y)?)?;
            let rhs = hausdorff(
                &f.apply(&FiniteCompact::singleton(x))?,
                &f.apply(&FiniteCompact::singleton(y))?,
            )?;
            Ok((x, y, lhs, rhs))
        })
        .collect::<Result<Vec<_>>>()?;
    let witness = results
        .into_iter()
        .find(|(_, _, l, r)| l.to_bits() != r.to_bits())
        .map(|(x, y, pointwise, hutchinson)| IdentityWitness {
            x,
            y,
            pointwise,
            hutchinson,
        });
    Ok(SingletonIdentityReport {
        pairs_checked: pairs.len(),
        passed: witness.is_none(),
        witness,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GridProbe {
    pub target: f64,
    pub delta_grid: Vec<f64>,
    /// Worst sampled quantity for each δ (nested, so nonincreasing).
    pub worst: Vec<f64>,
    /// Largest grid δ whose samples all stay below `target`.
    pub delta: Option<f64>,
    pub seed: u64,
    pub samples_per_delta: usize,
}

fn largest_passing(deltas: &[f64], worst: &[f64], target: f64) -> Option<f64> {
    deltas
        .iter()
        .zip(worst)
        .find(|(_, w)| **w < target)
        .map(|(d, _)| *d)
}

/// Sampled Lebesgue-type radius: the largest grid δ with
/// `h(φ(z), φ(c)) < eta_target` for every sampled `c ∈ C`, `d(z, c) < δ`.
pub fn uniform_continuity_on_compact(
    phi: &Multifunction,
    c: &FiniteCompact,
    eta_target: f64,
    deltas: &[f64],
    sampling: Sampling,
) -> Result<GridProbe> {
    if !(eta_target > 0.0) {
        return Err(Error::invalid(format!("eta_target must be positive, got {eta_target}")));
    }
    check_delta_grid(deltas)?;
    phi.space().check(c.space())?;
    let per_center = c
        .points()
        .par_iter()
        .map(|x0| {
            let v0 = phi.eval(x0)?;
            nested_point_samples(phi, x0, deltas, sampling, 0x554e4946)
                .iter()
                .map(|batch| {
                    batch.iter().try_fold(0.0f64, |m, z| {
                        Ok::<_, Error>(m.max(hausdorff(&phi.eval(z)?, &v0)?))
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let fresh: Vec<f64> = (0..deltas.len())
        .map(|k| per_center.iter().map(|v| v[k]).fold(0.0, f64::max))
        .collect();
    let worst = suffix_max(&fresh);
    Ok(GridProbe {
        target: eta_target,
        delta: largest_passing(deltas, &worst, eta_target),
        delta_grid: deltas.to_vec(),
        worst,
        seed: sampling.seed,
        samples_per_delta: sampling.samples_per_delta,
    })
}

/// Sampled check of `φ(N_δ B) ⊂ N_ε φ(B)` for `B ⊂ N_δ C`: the largest grid
/// δ with `e(φ(z), φ(B)) < eps` for every sampled `B` and `z`.
pub fn image_stability(
    phi: &Multifunction,
    c: &FiniteCompact,
    eps: f64,
    deltas: &[f64],
    sampling: Sampling,
) -> Result<GridProbe> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    check_delta_grid(deltas)?;
    phi.space().check(c.space())?;
    let domain = phi.domain().clone();
    let bps = phi.breakpoints();
    let sets = nested_compacta(c, deltas, sampling.samples_per_delta, sampling.seed, &domain)?;
    let fresh = sets
        .iter()
        .enumerate()
        .map(|(k, batch)| {
            let delta = deltas[k];
            batch
                .par_iter()
                .enumerate()
                .map(|(i, b)| {
                    let img = phi.image(b)?;
                    let mut rng = stream(sampling.seed, &[0x5354_4142, k as u64, i as u64]);
                    let mut zs: Vec<Point> = b.points().to_vec();
                    for _ in 0..4 {
                        let q = b.points()[rng.gen_range(0..b.len())];
                        zs.extend(sample_near(&q, delta, Some(&domain), &mut rng));
                    }
                    zs.extend(
                        bps.iter()
                            .filter(|p| b.points().iter().any(|q| q.distance(p) < delta))
                            .copied(),
                    );
                    zs.iter().try_fold(0.0f64, |m, z| {
                        Ok::<_, Error>(m.max(excess(&phi.eval(z)?, &img)?))
                    })
                })
                .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = suffix_max(&fresh);
    Ok(GridProbe {
        target: eps,
        delta: largest_passing(deltas, &worst, eps),
        delta_grid: deltas.to_vec(),
        worst,
        seed: sampling.seed,
        samples_per_delta: sampling.samples_per_delta,
    })
}

/// Sampled modulus of the Hutchinson operator at a compactum.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuityReport {
    pub center: FiniteCompact,
    pub delta_grid: Vec<f64>,
    /// `ω(δ) = max h(F(B), F(C))` over sampled `B` with `h(B, C) < δ`.
    pub moduli: Vec<f64>,
    /// Largest sampled `h(B, C)` for each δ.
    pub max_input_gap: Vec<f64>,
    pub perturbation_seed: u64,
    pub samples_per_delta: usize,
    pub verdict: ContinuityVerdict,
    pub thresholds: VerdictThresholds,
    pub decay_limit: f64,
    pub prune_eps: f64,
    /// Pruned images are within `prune_eps` of the exact ones, so exact
    /// moduli lie within this of the reported ones.
    pub pruning_correction: f64,
}

impl ContinuityReport {
    /// `delta,omega` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,omega\n");
        for (d, w) in self.delta_grid.iter().zip(&self.moduli) {
            let _ = writeln!(out, "{d},{w}");
        }
        out
    }
}

/// Per-δ maxima of `h(B, C)` and `h(F(B), F(C))` on the nested samples, plus
/// the raw pairs when `keep` is set.
type GapTable = (Vec<f64>, Vec<f64>, Vec<(f64, f64)>);

fn hutchinson_gaps(
    f: &HutchinsonOperator,
    c: &FiniteCompact,
    deltas: &[f64],
    samples: usize,
    seed: u64,
    keep: bool,
) -> Result<GapTable> {
    check_delta_grid(deltas)?;
    f.phi().space().check(c.space())?;
    let fc = f.apply(c)?;
    let sets = nested_compacta(c, deltas, samples, seed, f.phi().domain())?;
    let mut input = Vec::with_capacity(deltas.len());
    let mut output = Vec::with_capacity(deltas.len());
    let mut raw = Vec::new();
    for batch in &sets {
        let gaps = batch
            .par_iter()
            .map(|b| Ok((hausdorff(b, c)?, hausdorff(&f.apply(b)?, &fc)?)))
            .collect::<Result<Vec<(f64, f64)>>>()?;
        input.push(gaps.iter().map(|g| g.0).fold(0.0, f64::max));
        output.push(gaps.iter().map(|g| g.1).fold(0.0, f64::max));
        if keep {
            raw.extend(gaps);
        }
    }
    Ok((suffix_max(&input), suffix_max(&output), raw))
}

pub fn hutchinson_modulus(
    f: &HutchinsonOperator,
    c: &FiniteCompact,
    deltas: &[f64],
    samples_per_delta: usize,
    seed: u64,
) -> Result<ContinuityReport> {
    let (input, moduli, _) = hutchinson_gaps(f, c, deltas, samples_per_delta, seed, false)?;
    let diam = c.diameter();
    Ok(ContinuityReport {
        center: c.clone(),
        delta_grid: deltas.to_vec(),
        verdict: judge_moduli(&moduli, diam),
        moduli,
        max_input_gap: input,
        perturbation_seed: seed,
        samples_per_delta,
        thresholds: THRESHOLDS,
        decay_limit: THRESHOLDS.decay_limit(diam),
        prune_eps: f.prune_eps(),
        pruning_correction: 2.0 * f.prune_eps(),
    })
}

/// Comparison of a Hutchinson modulus with a comparison function on the same
/// samples as [`hutchinson_modulus`] with equal arguments.
#[derive(Debug, Clone, Serialize)]
pub struct EtaBoundCheck {
    pub delta_grid: Vec<f64>,
    pub moduli: Vec<f64>,
    pub eta_at_delta: Vec<f64>,
    /// `ω(δ) <= η(δ)` at every grid point.
    pub grid_ok: bool,
    /// Samples with `h(F(B), F(C)) > η(h(B, C))`.
    pub pair_violations: usize,
    pub pairs: usize,
}

pub fn eta_bound_check(
    f: &HutchinsonOperator,
    c: &FiniteCompact,
    deltas: &[f64],
    samples_per_delta: usize,
    seed: u64,
    eta: &ComparisonFunction,
) -> Result<EtaBoundCheck> {
    let (_, moduli, raw) = hutchinson_gaps(f, c, deltas, samples_per_delta, seed, true)?;
    let eta_at_delta: Vec<f64> = deltas.iter().map(|d| eta.eval(*d)).collect();
    Ok(EtaBoundCheck {
        grid_ok: moduli.iter().zip(&eta_at_delta).all(|(w, e)| w <= e),
        pair_violations: raw.iter().filter(|(d, h)| !(*h <= eta.eval(*d))).count(),
        pairs: raw.len(),
        delta_grid: deltas.to_vec(),
        moduli,
        eta_at_delta,
    })
}

/// Relative slack when comparing the declared net radius with measured gaps,
/// which carry rounding from the maps themselves.
pub const NET_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct FamilyUnionReport {
    pub members: usize,
    pub net_radius: f64,
    /// Largest Chebyshev distance from a member to its nearest other member,
    /// estimated on probe points.
    pub nearest_member_gap: f64,
    pub net_radius_ok: bool,
    pub center: Point,
    pub delta_grid: Vec<f64>,
    pub union_moduli: Vec<f64>,
    pub member_moduli: Vec<Vec<f64>>,
    pub max_member_moduli: Vec<f64>,
    /// Union modulus <= max member modulus at every δ.
    pub dominated: bool,
    pub union_lipschitz: f64,
    pub member_verdicts: Vec<ContinuityVerdict>,
    pub union_verdict: ContinuityVerdict,
    /// Every member looked continuous at the center.
    pub hypothesis_met: bool,
    pub seed: u64,
    pub samples_per_delta: usize,
}

/// Builds the union of a finite family and compares its pointwise modulus at
/// `x0` with the members' on shared samples.
pub fn family_union_harness(
    family: &[Multifunction],
    net_radius: f64,
    x0: &Point,
    deltas: &[f64],
    sampling: Sampling,
    lipschitz_pairs: usize,
) -> Result<FamilyUnionReport> {
    check_delta_grid(deltas)?;
    let u = union(family.to_vec())?;
    let batches = nested_point_samples(&u, x0, deltas, sampling, 0x46414d);
    let all: Vec<&Multifunction> = std::iter::once(&u).chain(family.iter()).collect();
    let tables = all
        .par_iter()
        .map(|phi| {
            let v0 = phi.eval(x0)?;
            let fresh = batches
                .iter()
                .map(|batch| {
                    batch.iter().try_fold(0.0f64, |m, x| {
                        Ok::<_, Error>(m.max(hausdorff(&phi.eval(x)?, &v0)?))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(suffix_max(&fresh))
        })
        .collect::<Result<Vec<_>>>()?;
    let union_moduli = tables[0].clone();
    let member_moduli = tables[1..].to_vec();
    let max_member_moduli: Vec<f64> = (0..deltas.len())
        .map(|k| member_moduli.iter().map(|m| m[k]).fold(0.0, f64::max))
        .collect();
    let dominated = union_moduli
        .iter()
        .zip(&max_member_moduli)
        .all(|(u, m)| u <= m);
    let member_verdicts: Vec<ContinuityVerdict> = family
        .iter()
        .zip(&member_moduli)
        .map(|(phi, m)| Ok(judge_moduli(m, phi.eval(x0)?.diameter())))
        .collect::<Result<_>>()?;
    let union_verdict = judge_moduli(&union_moduli, u.eval(x0)?.diameter());
    let probe = FiniteCompact::new(u.space(), u.sample_points(32, sampling.seed))?;
    let nearest_member_gap = if family.len() < 2 {
        0.0
    } else {
        (0..family.len())
            .into_par_iter()
            .map(|i| {
                (0..family.len())
                    .filter(|j| *j != i)
                    .map(|j| chebyshev_estimate(&family[i], &family[j], &probe))
                    .try_fold(f64::INFINITY, |m, g| g.map(|g| m.min(g)))
            })
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?
    };
    let pairs = u.sample_pairs(lipschitz_pairs, sampling.seed);
    Ok(FamilyUnionReport {
        members: family.len(),
        net_radius,
        nearest_member_gap,
        net_radius_ok: net_radius * (1.0 + NET_SLACK) >= nearest_member_gap,
        center: *x0,
        delta_grid: deltas.to_vec(),
        union_moduli,
        member_moduli,
        max_member_moduli,
        dominated,
        union_lipschitz: lipschitz_estimate(&u, &pairs)?,
        hypothesis_met: member_verdicts.iter().all(|v| *v == ContinuityVerdict::Decaying),
        member_verdicts,
        union_verdict,
        seed: sampling.seed,
        samples_per_delta: sampling.samples_per_delta,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckRow {
    pub property: &'static str,
    pub pointwise: String,
    pub hutchinson: String,
    pub agree: bool,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckTable {
    pub pointwise_class: RegularityClass,
    pub rows: Vec<CrosscheckRow>,
    pub seed: u64,
    pub sample_budget: usize,
    pub passed: bool,
}

/// Lipschitz agreement tolerance between `φ` and `F` estimates.
pub const LIPSCHITZ_AGREEMENT: f64 = 1e-9;

/// Random pairs of small compacta (2 to 5 domain points each).
fn compacta_pairs(phi: &Multifunction, count: usize, seed: u64) -> Result<Vec<(FiniteCompact, FiniteCompact)>> {
    let mut rng = stream(seed, &[0x5345_5453]);
    let draw = |rng: &mut SampleRng| {
        let n = rng.gen_range(2..=5);
        let pts = (0..n)
            .map(|_| sample_domain(phi.space(), phi.domain(), rng))
            .collect();
        FiniteCompact::new(phi.space(), pts)
    };
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let b = draw(&mut rng)?;
        let c = draw(&mut rng)?;
        if hausdorff(&b, &c)? > 0.0 {
            out.push((b, c));
        }
    }
    Ok(out)
}

/// Runs the pointwise classifier on `φ` and the matching checks on `F` over
/// singletons and small random compacta, row by row.
pub fn preservation_crosscheck(
    phi: &Multifunction,
    f: &HutchinsonOperator,
    sample_budget: usize,
    seed: u64,
    eta: Option<&ComparisonFunction>,
) -> Result<CrosscheckTable> {
    if f.prune_eps() != 0.0 {
        return Err(Error::invalid("preservation crosscheck needs prune_eps = 0"));
    }
    let opts = ClassifyOptions {
        seed,
        pairs: sample_budget,
        eta: eta.cloned(),
        ..ClassifyOptions::default()
    };
    let verdict = classify(phi, &opts)?;
    let class = verdict.class;
    let mut rows = Vec::new();

    let pairs = phi.sample_pairs(sample_budget, seed);
    let l_phi = lipschitz_estimate(phi, &pairs)?;
    let singleton_pairs: Vec<_> = pairs
        .iter()
        .map(|(x, y)| (FiniteCompact::singleton(*x), FiniteCompact::singleton(*y)))
        .collect();
    let set_pairs = compacta_pairs(phi, (sample_budget / 10).max(1), seed)?;
    let l_single = lipschitz_estimate_sets(|b| f.apply(b), &singleton_pairs)?;
    let l_sets = lipschitz_estimate_sets(|b| f.apply(b), &set_pairs)?;
    let l_f = l_single.max(l_sets);
    let cut = 1.0 - opts.contraction_margin;
    let label = |l: f64| if l <= cut { "contraction" } else { "not contraction" };
    rows.push(CrosscheckRow {
        property: "contraction",
        pointwise: label(l_phi).into(),
        hutchinson: label(l_f).into(),
        agree: (l_phi <= cut) == (l_f <= cut)
            && (l_phi > cut || (l_f - l_phi).abs() <= LIPSCHITZ_AGREEMENT),
        values: BTreeMap::from([
            ("lipschitz_pointwise".into(), l_phi),
            ("lipschitz_hutchinson".into(), l_f),
            ("lipschitz_singletons".into(), l_single),
            ("lipschitz_compacta".into(), l_sets),
        ]),
    });

    if let Some(eta) = eta {
        let slack_phi = pairs
            .iter()
            .map(|(x, y)| Ok(eta.eval(x.distance(y)) - hausdorff(&phi.eval(x)?, &phi.eval(y)?)?))
            .try_fold(f64::INFINITY, |m, s: Result<f64>| s.map(|s| m.min(s)))?;
        let slack_f = singleton_pairs
            .iter()
            .chain(&set_pairs)
            .map(|(b, c)| Ok(eta.eval(hausdorff(b, c)?) - hausdorff(&f.apply(b)?, &f.apply(c)?)?))
            .try_fold(f64::INFINITY, |m, s: Result<f64>| s.map(|s| m.min(s)))?;
        let pass = |s: f64| if s >= 0.0 { "weak contraction" } else { "violated" };
        rows.push(CrosscheckRow {
            property: "weak_contraction",
            pointwise: pass(slack_phi).into(),
            hutchinson: pass(slack_f).into(),
            agree: (slack_phi >= 0.0) == (slack_f >= 0.0),
            values: BTreeMap::from([
                ("min_slack_pointwise".into(), slack_phi),
                ("min_slack_hutchinson".into(), slack_f),
            ]),
        });
    }

    // Continuity rows: F is probed at singletons of the classifier's centers.
    let deltas = opts.deltas.clone();
    let mut f_flagged = 0usize;
    let mut worst_f = 0.0f64;
    let centers: Vec<Point> = verdict.moduli.iter().map(|m| m.center).collect();
    let mut phi_flagged = Vec::new();
    for m in &verdict.moduli {
        let diam = phi.eval(&m.center)?.diameter();
        if judge_moduli(&m.omega, diam) != ContinuityVerdict::Decaying {
            phi_flagged.push(m.center);
        }
    }
    for x in &centers {
        let r = hutchinson_modulus(f, &FiniteCompact::singleton(*x), &deltas, opts.samples_per_delta, seed)?;
        worst_f = worst_f.max(*r.moduli.last().unwrap());
        if r.verdict != ContinuityVerdict::Decaying {
            f_flagged += 1;
        }
    }
    let worst_phi = verdict
        .moduli
        .iter()
        .map(|m| *m.omega.last().unwrap())
        .fold(0.0, f64::max);
    let cont = |n: usize| if n == 0 { "continuous" } else { "discontinuity witnessed" };
    if !centers.is_empty() {
        rows.push(CrosscheckRow {
            property: "continuity",
            pointwise: cont(phi_flagged.len()).into(),
            hutchinson: cont(f_flagged).into(),
            agree: (phi_flagged.is_empty()) == (f_flagged == 0),
            values: BTreeMap::from([
                ("omega_min_delta_pointwise".into(), worst_phi),
                ("omega_min_delta_hutchinson".into(), worst_f),
                ("centers".into(), centers.len() as f64),
            ]),
        });
    }
    if class == RegularityClass::UscOnly {
        // usc of φ does not carry over to continuity of F: the expected
        // outcome is a witnessed discontinuity of F.
        rows.push(CrosscheckRow {
            property: "usc_only",
            pointwise: "usc, not continuous".into(),
            hutchinson: cont(f_flagged).into(),
            agree: f_flagged > 0,
            values: BTreeMap::from([("hutchinson_discontinuities".into(), f_flagged as f64)]),
        });
    }
    Ok(CrosscheckTable {
        pointwise_class: class,
        passed: rows.iter().all(|r| r.agree),
        rows,
        seed,
        sample_budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multifunction::PointMap;
    use crate::space::Space;
    use crate::systems::{build, presets, usc_counterexample};

    fn lift(scale: f64, shift: f64) -> Multifunction {
        Multifunction::lift(Space::Euclidean(1), PointMap::scale_shift(scale, shift))
            .unwrap()
            .with_domain(Domain::interval(0.0, 1.0))
            .unwrap()
    }

    fn grid() -> Vec<f64> {
        (0..7).map(|k| 0.1 * 0.5f64.powi(k)).collect()
    }

    #[test]
    fn verdicts() {
        assert_eq!(judge_moduli(&[0.0, 0.0], 1.0), ContinuityVerdict::Decaying);
        assert_eq!(judge_moduli(&[0.2, 0.1, 0.01], 1.0), ContinuityVerdict::Decaying);
        assert_eq!(judge_moduli(&[1.0, 1.0, 1.0], 1.0), ContinuityVerdict::Flat);
        assert_eq!(judge_moduli(&[1.0, 0.3, 0.2], 1.0), ContinuityVerdict::Diverging);
        assert_eq!(judge_moduli(&[0.1, 0.2], 1.0), ContinuityVerdict::Flat);
    }

    #[test]
    fn zero_amplitude_jitter_is_identity() {
        let c = FiniteCompact::from_reals(&[0.0, 0.3, 0.9]).unwrap();
        for b in sample_compacta_near(&c, 0.1, 20, 1, None, Perturbation::jitter(0.0)).unwrap() {
            assert_eq!(b, c);
        }
    }

    #[test]
    fn samples_stay_within_delta() {
        let c = FiniteCompact::from_reals(&[0.0]).unwrap();
        for b in sample_compacta_near(&c, 0.1, 200, 2, None, Perturbation::default()).unwrap() {
            assert!(b.points().iter().all(|p| p.coords()[0].abs() < 0.1));
        }
        let c = FiniteCompact::from_rows(
            Space::Euclidean(2),
            &[[0.0, 0.0], [0.5, 0.5], [0.2, 0.9], [0.9, 0.1], [0.4, 0.4]],
        )
        .unwrap();
        let bs = sample_compacta_near(&c, 0.05, 1000, 3, None, Perturbation::default()).unwrap();
        assert_eq!(bs.len(), 1000);
        assert!(bs.iter().all(|b| hausdorff(b, &c).unwrap() < 0.05));
        let again = sample_compacta_near(&c, 0.05, 1000, 3, None, Perturbation::default()).unwrap();
        assert_eq!(bs, again);
    }

    #[test]
    fn singleton_identity_on_cantor() {
        let phi = build(&presets::cantor()).unwrap();
        let f = HutchinsonOperator::new(phi.clone());
        let pts = [Point::real(0.0).unwrap(), Point::real(1.0).unwrap()];
        let r = singleton_identity_check(&phi, &f, &pts).unwrap();
        assert!(r.passed);
        assert_eq!(r.pairs_checked, 3);
        let h = hausdorff(&phi.eval(&pts[0]).unwrap(), &phi.eval(&pts[1]).unwrap()).unwrap();
        assert!((h - 1.0 / 3.0).abs() < 1e-15);
        let pruned = HutchinsonOperator::with_pruning(phi.clone(), 0.1, Default::default()).unwrap();
        assert!(singleton_identity_check(&phi, &pruned, &pts).is_err());
    }

    #[test]
    fn uniform_continuity_examples() {
        let s = Sampling::new(4).with_samples(32);
        let c = FiniteCompact::from_reals(&[0.1, 0.5, 0.9]).unwrap();
        let constant = Multifunction::constant(FiniteCompact::from_reals(&[0.2]).unwrap());
        let r = uniform_continuity_on_compact(&constant, &c, 0.01, &grid(), s).unwrap();
        assert_eq!(r.delta, Some(0.1));
        let r = uniform_continuity_on_compact(&lift(0.5, 0.0), &c, 0.05, &grid(), s).unwrap();
        assert_eq!(r.delta, Some(0.1));
        let usc = usc_counterexample(1e-3).unwrap();
        let c0 = FiniteCompact::from_reals(&[0.0, 0.5]).unwrap();
        let r = uniform_continuity_on_compact(&usc, &c0, 0.5, &grid(), s).unwrap();
        assert_eq!(r.delta, None);
    }

    #[test]
    fn image_stability_examples() {
        let s = Sampling::new(5).with_samples(32);
        let c = FiniteCompact::from_reals(&[0.2, 0.7]).unwrap();
        let constant = Multifunction::constant(FiniteCompact::from_reals(&[0.2]).unwrap());
        assert_eq!(image_stability(&constant, &c, 0.01, &grid(), s).unwrap().delta, Some(0.1));
        let r = image_stability(&lift(0.5, 0.0), &c, 0.1, &grid(), s).unwrap();
        assert_eq!(r.delta, Some(0.1));
        assert!(r.worst.iter().zip(&r.delta_grid).all(|(w, d)| *w < d / 2.0 + 1e-15));
        let usc = usc_counterexample(1e-3).unwrap();
        let c0 = FiniteCompact::from_reals(&[0.0]).unwrap();
        assert_eq!(image_stability(&usc, &c0, 0.5, &grid(), s).unwrap().delta, None);
    }

    #[test]
    fn hutchinson_modulus_examples() {
        let constant = HutchinsonOperator::new(build(&presets::constant()).unwrap());
        let c = FiniteCompact::from_rows(Space::Euclidean(2), &[[0.1, 0.1], [0.6, 0.3]]).unwrap();
        let r = hutchinson_modulus(&constant, &c, &grid(), 16, 1).unwrap();
        assert!(r.moduli.iter().all(|w| *w == 0.0));
        assert_eq!(r.verdict, ContinuityVerdict::Decaying);

        let sier = HutchinsonOperator::new(build(&presets::sierpinski()).unwrap());
        let r = hutchinson_modulus(&sier, &c, &grid(), 32, 2).unwrap();
        for (w, d) in r.moduli.iter().zip(&r.delta_grid) {
            assert!(*w <= d / 2.0, "{w} > {d}/2");
        }
        assert!(r.moduli.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(r.verdict, ContinuityVerdict::Decaying);
        assert!(r.to_csv().starts_with("delta,omega\n0.1,"));

        let usc = HutchinsonOperator::new(usc_counterexample(1e-3).unwrap());
        let c0 = FiniteCompact::from_reals(&[0.0]).unwrap();
        let r = hutchinson_modulus(&usc, &c0, &grid(), 16, 3).unwrap();
        assert!(r.moduli.iter().all(|w| *w >= 0.9));
        assert_eq!(r.verdict, ContinuityVerdict::Flat);
    }

    #[test]
    fn family_union_examples() {
        let s = Sampling::new(6).with_samples(16);
        let x0 = Point::real(0.5).unwrap();
        let one = family_union_harness(&[lift(0.5, 0.1)], 0.0, &x0, &grid(), s, 200).unwrap();
        assert_eq!(one.union_moduli, one.member_moduli[0]);
        assert!(one.hypothesis_met);

        let fam: Vec<Multifunction> = (0..=20).map(|i| lift(0.5, i as f64 * 0.05)).collect();
        let r = family_union_harness(&fam, 0.05, &x0, &grid(), s, 2000).unwrap();
        assert!((r.union_lipschitz - 0.5).abs() <= 1e-9, "{}", r.union_lipschitz);
        assert!(r.dominated);
        assert!(r.net_radius_ok);

        let bad = vec![lift(0.5, 0.0), usc_counterexample(1e-3).unwrap()];
        let x0 = Point::real(0.0).unwrap();
        let r = family_union_harness(&bad, 0.05, &x0, &grid(), s, 200).unwrap();
        assert!(!r.hypothesis_met);
        assert_eq!(r.union_verdict, ContinuityVerdict::Flat);
        assert!(r.dominated);
    }

    #[test]
    fn crosscheck_examples() {
        let phi = build(&presets::cantor()).unwrap();
        let f = HutchinsonOperator::new(phi.clone());
        let t = preservation_crosscheck(&phi, &f, 2000, 1, None).unwrap();
        let row = &t.rows[0];
        assert!((row.values["lipschitz_pointwise"] - 1.0 / 3.0).abs() <= 1e-9);
        assert!((row.values["lipschitz_hutchinson"] - 1.0 / 3.0).abs() <= 1e-9);
        assert!(t.passed, "{t:?}");

        let phi = build(&presets::constant()).unwrap();
        let t = preservation_crosscheck(&phi, &HutchinsonOperator::new(phi.clone()), 500, 1, None).unwrap();
        assert_eq!(t.pointwise_class, RegularityClass::Contraction);
        assert_eq!(t.rows[0].values["lipschitz_hutchinson"], 0.0);

        let phi = build(&presets::usc_counterexample()).unwrap();
        let t = preservation_crosscheck(&phi, &HutchinsonOperator::new(phi.clone()), 500, 1, None).unwrap();
        assert_eq!(t.pointwise_class, RegularityClass::UscOnly);
        assert!(t.rows.iter().any(|r| r.property == "usc_only" && r.agree));
    }
}
