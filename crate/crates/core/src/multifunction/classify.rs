use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::multifunction::comparison::ComparisonFunction;
use crate::multifunction::estimate::{
    check_weak_contraction, lipschitz_estimate, modulus_of_continuity, usc_probe, ModulusTable,
    Sampling,
};
use crate::multifunction::Multifunction;
use crate::probes::{judge_moduli, ContinuityVerdict};
use crate::space::Point;

/// Classes of the regularity hierarchy, strongest first. Each class implies
/// every later one except `Violated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularityClass {
    Contraction,
    WeakContraction,
    UniformlyContinuous,
    Continuous,
    UscOnly,
    Violated,
}

impl RegularityClass {
    /// `self ⇒ other` in the hierarchy.
    pub fn implies(self, other: RegularityClass) -> bool {
        self != RegularityClass::Violated && other != RegularityClass::Violated && self <= other
    }

    /// Continuity (in the Hausdorff sense) is implied.
    pub fn is_continuous(self) -> bool {
        self.implies(RegularityClass::Continuous)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub x: Point,
    pub y: Point,
    /// Measured `h(φ(x), φ(y))`.
    pub observed: f64,
    /// The bound it was checked against.
    pub bound: f64,
}

pub const SAMPLING_CAVEAT: &str =
    "sampled estimates: Lipschitz constants and moduli are lower bounds, usc checks are necessary conditions";

#[derive(Debug, Clone, Serialize)]
pub struct RegularityVerdict {
    pub class: RegularityClass,
    pub witness: Option<Witness>,
    pub seed: u64,
    pub grid: Vec<f64>,
    pub estimates: BTreeMap<String, f64>,
    pub comparison: Option<ComparisonFunction>,
    pub moduli: Vec<ModulusTable>,
    pub caveat: &'static str,
}

impl RegularityVerdict {
    pub fn new(class: RegularityClass, seed: u64) -> RegularityVerdict {
        RegularityVerdict {
            class,
            witness: None,
            seed,
            grid: Vec::new(),
            estimates: BTreeMap::new(),
            comparison: None,
            moduli: Vec::new(),
            caveat: SAMPLING_CAVEAT,
        }
    }

    pub fn passed(&self) -> bool {
        self.class != RegularityClass::Violated
    }
}

#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    pub seed: u64,
    pub pairs: usize,
    /// Lipschitz estimates at or below `1 - contraction_margin` count as
    /// contractions.
    pub contraction_margin: f64,
    pub eta: Option<ComparisonFunction>,
    /// Random probe centers for the pointwise moduli (breakpoints are added).
    pub centers: usize,
    pub deltas: Vec<f64>,
    pub samples_per_delta: usize,
    pub usc_eps: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            seed: 0,
            pairs: 10_000,
            contraction_margin: 0.05,
            eta: None,
            centers: 16,
            deltas: (0..8).map(|k| 0.1 * 0.5f64.powi(k)).collect(),
            samples_per_delta: 32,
            usc_eps: 0.1,
        }
    }
}

/// Strongest class the samples support: contraction, then weak contraction
/// under `opts.eta`, then continuity at every probe center, then usc at every
/// center. Anything else is `Violated` with a witness.
pub fn classify(phi: &Multifunction, opts: &ClassifyOptions) -> Result<RegularityVerdict> {
    let pairs = phi.sample_pairs(opts.pairs, opts.seed);
    let lip = lipschitz_estimate(phi, &pairs)?;
    let mut estimates = BTreeMap::new();
    estimates.insert("lipschitz".to_string(), lip);
    estimates.insert("pairs".to_string(), pairs.len() as f64);

    let finish = |class, mut v: RegularityVerdict, estimates: BTreeMap<String, f64>| {
        v.class = class;
        v.seed = opts.seed;
        v.grid = opts.deltas.clone();
        v.estimates.extend(estimates);
        v
    };

    if lip <= 1.0 - opts.contraction_margin {
        return Ok(finish(
            RegularityClass::Contraction,
            RegularityVerdict::new(RegularityClass::Contraction, opts.seed),
            estimates,
        ));
    }
    if let Some(eta) = &opts.eta {
        let v = check_weak_contraction(phi, eta, &pairs)?;
        if v.passed() {
            return Ok(finish(RegularityClass::WeakContraction, v, estimates));
        }
    }

    let sampling = Sampling::new(opts.seed).with_samples(opts.samples_per_delta);
    let centers = phi.sample_points(opts.centers, opts.seed ^ 0xC3);
    let mut moduli = Vec::with_capacity(centers.len());
    let mut discontinuous = Vec::new();
    for x0 in &centers {
        let m = modulus_of_continuity(phi, x0, &opts.deltas, sampling)?;
        let diam = phi.eval(x0)?.diameter();
        if judge_moduli(&m.omega, diam) != ContinuityVerdict::Decaying {
            discontinuous.push(*x0);
        }
        moduli.push(m);
    }
    let worst = moduli
        .iter()
        .map(|m| *m.omega.last().unwrap())
        .fold(0.0, f64::max);
    estimates.insert("omega_min_delta_max".to_string(), worst);
    let mut v = RegularityVerdict::new(RegularityClass::Continuous, opts.seed);
    v.moduli = moduli;
    if discontinuous.is_empty() {
        return Ok(finish(RegularityClass::Continuous, v, estimates));
    }
    estimates.insert("discontinuities".to_string(), discontinuous.len() as f64);
    for x0 in &centers {
        let p = usc_probe(phi, x0, opts.usc_eps, &opts.deltas, sampling)?;
        if p.delta.is_none() {
            let y = p.witness.unwrap_or(*x0);
            v.witness = Some(Witness {
                x: *x0,
                y,
                observed: crate::hyperspace::excess(&phi.eval(&y)?, &phi.eval(x0)?)?,
                bound: opts.usc_eps,
            });
            return Ok(finish(RegularityClass::Violated, v, estimates));
        }
    }
    let x0 = discontinuous[0];
    let m = v.moduli.iter().find(|m| m.center == x0).unwrap();
    v.witness = Some(Witness {
        x: x0,
        y: x0,
        observed: *m.omega.last().unwrap(),
        bound: *m.deltas.last().unwrap(),
    });
    Ok(finish(RegularityClass::UscOnly, v, estimates))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hierarchy_order() {
        use RegularityClass::*;
        assert!(Contraction.implies(WeakContraction));
        assert!(WeakContraction.implies(UscOnly));
        assert!(!UscOnly.implies(Continuous));
        assert!(!Violated.implies(Violated));
        assert!(Continuous.is_continuous());
        assert!(!UscOnly.is_continuous());
    }
}
