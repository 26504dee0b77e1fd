use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize, Serializer};

/// A comparison function `η : (0, ∞) → [0, ∞)` gauging weak contractions.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ComparisonFunction {
    /// `η(t) = L t`.
    Linear(f64),
    /// `η(t) = t / (1 + t)`.
    Hyperbolic,
    /// Pointwise maximum.
    MaxOf(Vec<ComparisonFunction>),
    /// Any closed form supplied in code. Not readable from config files.
    #[serde(skip_deserializing)]
    Custom(CustomEta),
}

#[derive(Clone)]
pub struct CustomEta {
    pub name: String,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for CustomEta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomEta({})", self.name)
    }
}

impl Serialize for CustomEta {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.name)
    }
}

impl ComparisonFunction {
    pub fn custom<F>(name: impl Into<String>, f: F) -> ComparisonFunction
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ComparisonFunction::Custom(CustomEta {
            name: name.into(),
            f: Arc::new(f),
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ComparisonFunction::Linear(l) => l * t,
            ComparisonFunction::Hyperbolic => t / (1.0 + t),
            ComparisonFunction::MaxOf(fs) => fs.iter().map(|f| f.eval(t)).fold(0.0, f64::max),
            ComparisonFunction::Custom(c) => (c.f)(t),
        }
    }

    /// Geometric grid `10^-3 ..= 10^3` with 61 points.
    pub fn default_grid() -> Vec<f64> {
        (0..=60).map(|i| 10f64.powf(-3.0 + i as f64 * 0.1)).collect()
    }
}

/// Outcome of [`validate_comparison_function`]. Grid conditions are checked
/// exactly on the grid; the two limsup conditions are sampled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaValidation {
    pub valid: bool,
    /// `η(t) >= 0` on the grid.
    pub nonnegative: bool,
    /// (η-1): nondecreasing along the grid.
    pub monotone: bool,
    /// `η(t) < t` on the grid.
    pub below_identity: bool,
    /// (η-2) sampled: `limsup_{r→t+} η(r) < t`.
    pub limsup_right_sampled: bool,
    /// Derived two-sided form, sampled: `limsup_{r→t} η(r) < t`. Reported only.
    pub limsup_two_sided_sampled: bool,
    /// (η-3): `r - η(r)` strictly increasing on the grid.
    pub gap_increasing: bool,
    /// `r - η(r)` at the last grid point.
    pub tail_gap: f64,
    pub tail_threshold: f64,
    /// First grid point where some condition failed.
    pub first_failure: Option<f64>,
}

/// Required `r - η(r)` at the tail of the grid for (η-3).
pub const TAIL_GAP_THRESHOLD: f64 = 1.0;

/// Offsets `10^-3 · 2^-k`, `k = 0..=30`. The limsup at `t` is estimated by the
/// maximum over the inner offsets `k >= 20`.
fn limsup_offsets() -> impl Iterator<Item = f64> {
    (20..=30).map(|k| 1e-3 * 2f64.powi(-k))
}

pub fn validate_comparison_function(eta: &ComparisonFunction, grid: &[f64]) -> EtaValidation {
    let mut first_failure: Option<f64> = None;
    let mut fail = |t: f64| {
        if first_failure.map_or(true, |f| t < f) {
            first_failure = Some(t);
        }
    };
    let grid_ok = !grid.is_empty()
        && grid.iter().all(|t| *t > 0.0 && t.is_finite())
        && grid.windows(2).all(|w| w[0] < w[1]);
    let vals: Vec<f64> = grid.iter().map(|t| eta.eval(*t)).collect();

    let mut nonnegative = grid_ok;
    let mut below_identity = grid_ok;
    let mut right = grid_ok;
    let mut two_sided = grid_ok;
    for (t, v) in grid.iter().zip(&vals) {
        if !(*v >= 0.0) {
            nonnegative = false;
            fail(*t);
        }
        if !(*v < *t) {
            below_identity = false;
            fail(*t);
        }
        let r_sup = limsup_offsets().map(|o| eta.eval(t + o)).fold(f64::MIN, f64::max);
        if !(r_sup < *t) {
            right = false;
            fail(*t);
        }
        let l_sup = limsup_offsets()
            .filter(|o| *o < *t)
            .map(|o| eta.eval(t - o))
            .fold(r_sup, f64::max);
        if !(l_sup < *t) {
            two_sided = false;
        }
    }
    let mut monotone = grid_ok;
    let mut gap_increasing = grid_ok;
    for i in 1..grid.len() {
        if !(vals[i] >= vals[i - 1]) {
            monotone = false;
            fail(grid[i]);
        }
        if !(grid[i] - vals[i] > grid[i - 1] - vals[i - 1]) {
            gap_increasing = false;
            fail(grid[i]);
        }
    }
    let tail_gap = grid.last().map_or(f64::NAN, |t| t - eta.eval(*t));
    let tail_ok = tail_gap >= TAIL_GAP_THRESHOLD;
    let valid = grid_ok && nonnegative && monotone && below_identity && right && gap_increasing && tail_ok;
    EtaValidation {
        valid,
        nonnegative,
        monotone,
        below_identity,
        limsup_right_sampled: right,
        limsup_two_sided_sampled: two_sided,
        gap_increasing: gap_increasing && tail_ok,
        tail_gap,
        tail_threshold: TAIL_GAP_THRESHOLD,
        first_failure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_half_is_valid() {
        let v = validate_comparison_function(
            &ComparisonFunction::Linear(0.5),
            &ComparisonFunction::default_grid(),
        );
        assert!(v.valid, "{v:?}");
    }

    #[test]
    fn hyperbolic_is_valid_and_gap_matches_closed_form() {
        let grid = ComparisonFunction::default_grid();
        let eta = ComparisonFunction::Hyperbolic;
        let v = validate_comparison_function(&eta, &grid);
        assert!(v.valid, "{v:?}");
        // r - r/(1+r) = r^2/(1+r)
        for r in &grid {
            let gap = r - eta.eval(*r);
            assert!((gap - r * r / (1.0 + r)).abs() <= 1e-12 * gap.max(1.0));
        }
    }

    #[test]
    fn identity_is_invalid() {
        let id = ComparisonFunction::Linear(1.0);
        let v = validate_comparison_function(&id, &ComparisonFunction::default_grid());
        assert!(!v.valid);
        assert!(!v.below_identity);
        assert_eq!(v.first_failure, Some(1e-3));
    }

    #[test]
    fn decreasing_eta_fails_monotonicity() {
        let eta = ComparisonFunction::custom("bump", |t| if t < 1.0 { 0.5 * t } else { 0.1 * t });
        let v = validate_comparison_function(&eta, &ComparisonFunction::default_grid());
        assert!(!v.monotone);
        assert!(!v.valid);
    }

    #[test]
    fn right_jump_fails_limsup() {
        // η(t) = t/2 for t <= 1, jumps to just below t right after 1.
        let eta = ComparisonFunction::custom("jump", |t| if t <= 1.0 { 0.5 * t } else { t.min(1.0) });
        let grid = vec![0.5, 1.0, 2.0];
        let v = validate_comparison_function(&eta, &grid);
        assert!(!v.limsup_right_sampled);
    }

    #[test]
    fn serde_forms() {
        let eta: ComparisonFunction =
            serde_json::from_str(r#"{"max_of": ["hyperbolic", {"linear": 0.5}]}"#).unwrap();
        assert_eq!(eta.eval(3.0), 1.5);
        assert_eq!(eta.eval(0.5), 0.5 / 1.5);
        assert_eq!(
            serde_json::to_string(&eta).unwrap(),
            r#"{"max_of":["hyperbolic",{"linear":0.5}]}"#
        );
    }
}
