//! The Hutchinson operator `F(B) = cl ∪_{b ∈ B} φ(b)` on finite compacta.
//!
//! Closure is the identity on finite sets. To keep point counts bounded under
//! iteration the operator may prune each image to an ε-net; with
//! `prune_eps = 0` it is exactly the image `φ(B)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperspace::{excess, hausdorff, prune, FiniteCompact, PruneMode};
use crate::multifunction::Multifunction;

#[derive(Debug, Clone)]
pub struct HutchinsonOperator {
    phi: Multifunction,
    prune_eps: f64,
    prune_mode: PruneMode,
}

impl HutchinsonOperator {
    /// Exact operator (no pruning).
    pub fn new(phi: Multifunction) -> HutchinsonOperator {
        HutchinsonOperator {
            phi,
            prune_eps: 0.0,
            prune_mode: PruneMode::default(),
        }
    }

    pub fn with_pruning(phi: Multifunction, eps: f64, mode: PruneMode) -> Result<HutchinsonOperator> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::invalid(format!("prune_eps must be >= 0, got {eps}")));
        }
        Ok(HutchinsonOperator {
            phi,
            prune_eps: eps,
            prune_mode: mode,
        })
    }

    pub fn phi(&self) -> &Multifunction {
        &self.phi
    }

    pub fn prune_eps(&self) -> f64 {
        self.prune_eps
    }

    pub fn prune_mode(&self) -> PruneMode {
        self.prune_mode
    }

    /// `prune(φ(B))`; within `prune_eps` of `φ(B)` in `h`.
    pub fn apply(&self, set: &FiniteCompact) -> Result<FiniteCompact> {
        let img = self.phi.image(set)?;
        prune(&img, self.prune_eps, self.prune_mode)
    }

    /// `[B, F(B), ..., F^n(B)]`.
    pub fn iterate(&self, b0: &FiniteCompact, n: usize) -> Result<Vec<FiniteCompact>> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(b0.clone());
        for _ in 0..n {
            let next = self.apply(out.last().unwrap())?;
            out.push(next);
        }
        Ok(out)
    }

    /// `F^n(B)` without keeping the intermediate sets.
    pub fn power(&self, b0: &FiniteCompact, n: usize) -> Result<FiniteCompact> {
        let mut b = b0.clone();
        for _ in 0..n {
            b = self.apply(&b)?;
        }
        Ok(b)
    }

    /// `h(F(A), A)`.
    pub fn invariance_residual(&self, a: &FiniteCompact) -> Result<f64> {
        hausdorff(&self.apply(a)?, a)
    }

    /// Iterates from `b0` until `h(B_{n+1}, B_n) <= tol` or `max_iter` steps.
    ///
    /// With a Lipschitz hint `L < 1` the report carries the a-posteriori tail
    /// bound `r·L/(1−L)` plus the accumulated pruning error `prune_eps/(1−L)`.
    pub fn solve_attractor(
        &self,
        b0: &FiniteCompact,
        tol: f64,
        max_iter: usize,
        lipschitz_hint: Option<f64>,
    ) -> Result<AttractorReport> {
        if !(tol > 0.0) {
            return Err(Error::invalid(format!("tol must be positive, got {tol}")));
        }
        if let Some(l) = lipschitz_hint {
            if !(0.0..1.0).contains(&l) {
                return Err(Error::invalid(format!("lipschitz hint must be in [0, 1), got {l}")));
            }
        }
        let mut b = b0.clone();
        let mut residuals = Vec::new();
        let mut converged = false;
        while residuals.len() < max_iter {
            let next = self.apply(&b)?;
            let r = hausdorff(&next, &b)?;
            residuals.push(r);
            b = next;
            if r <= tol {
                converged = true;
                break;
            }
        }
        let invariance_residual = self.invariance_residual(&b)?;
        let (tail_bound, pruning_error) = match (lipschitz_hint, residuals.last()) {
            (Some(l), Some(r)) => {
                let pe = self.prune_eps / (1.0 - l);
                (Some(r * l / (1.0 - l) + pe), Some(pe))
            }
            (Some(l), None) => (None, Some(self.prune_eps / (1.0 - l))),
            _ => (None, None),
        };
        Ok(AttractorReport {
            converged,
            iterations: residuals.len(),
            residuals,
            invariance_residual,
            tail_bound,
            pruning_error,
            tol,
            max_iter,
            prune_eps: self.prune_eps,
            prune_mode: self.prune_mode,
            lipschitz_hint,
            point_count: b.len(),
            seeds_tested: if converged { vec![b0.clone()] } else { Vec::new() },
            attractor: b,
        })
    }

    /// For each seed, the smallest `n0 <= max_iter` with `F^n(B) ⊂ N_ε A` for
    /// all `n` in `n0..=max_iter`. A seed fails when the inclusion does not
    /// hold at `max_iter` (or the orbit leaves the representable range).
    pub fn absorption_check(
        &self,
        attractor: &FiniteCompact,
        seeds: &[FiniteCompact],
        eps: f64,
        max_iter: usize,
    ) -> Result<Vec<Absorption>> {
        if !(eps > 0.0) {
            return Err(Error::invalid(format!("eps must be positive, got {eps}")));
        }
        seeds
            .iter()
            .map(|seed| {
                let mut b = seed.clone();
                let mut n0: Option<usize> = None;
                let mut last_bad: Option<usize> = None;
                let mut last_excess = f64::NAN;
                for n in 0..=max_iter {
                    if n > 0 {
                        b = match self.apply(&b) {
                            Ok(next) => next,
                            Err(Error::NonFinite) => {
                                return Ok(Absorption::Failed {
                                    offending_n: n,
                                    excess: f64::INFINITY,
                                })
                            }
                            Err(e) => return Err(e),
                        };
                    }
                    last_excess = excess(&b, attractor)?;
                    if last_excess < eps {
                        n0.get_or_insert(n);
                    } else {
                        n0 = None;
                        last_bad = Some(n);
                    }
                }
                Ok(match n0 {
                    Some(n0) => Absorption::Absorbed { n0 },
                    None => Absorption::Failed {
                        offending_n: last_bad.unwrap_or(max_iter),
                        excess: last_excess,
                    },
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum Absorption {
    Absorbed { n0: usize },
    Failed { offending_n: usize, excess: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct AttractorReport {
    pub converged: bool,
    pub iterations: usize,
    /// `h(B_{n+1}, B_n)` for each step taken.
    pub residuals: Vec<f64>,
    /// `h(F(A), A)` recomputed for the returned attractor.
    pub invariance_residual: f64,
    pub tail_bound: Option<f64>,
    pub pruning_error: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub prune_eps: f64,
    pub prune_mode: PruneMode,
    pub lipschitz_hint: Option<f64>,
    pub point_count: usize,
    /// Seeds whose orbit converged; an operational stand-in for the basin.
    pub seeds_tested: Vec<FiniteCompact>,
    /// Written separately as a point cloud.
    #[serde(skip)]
    pub attractor: FiniteCompact,
}
