//! Multifunctions `φ : X → K(X)` with finite values.
//!
//! A [`Multifunction`] is a cheap-to-clone handle to an immutable structure
//! tree: lifted single-valued maps, finite unions, constants, two-valued step
//! functions (the usc counterexample shape) and nearest-sample tables.
//! Evaluation is pure and reentrant.

mod classify;
mod comparison;
mod estimate;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hyperspace::FiniteCompact;
use crate::sampling::{sample_domain, stream};
use crate::space::{Domain, Point, Space};

pub use classify::{classify, ClassifyOptions, RegularityClass, RegularityVerdict, Witness};
pub use comparison::{
    validate_comparison_function, ComparisonFunction, CustomEta, EtaValidation,
};
pub use estimate::{
    chebyshev_estimate, check_weak_contraction, lipschitz_estimate, lipschitz_estimate_sets,
    modulus_of_continuity, nested_point_samples, usc_probe, ModulusTable, Sampling, UscProbe,
};
pub(crate) use estimate::check_delta_grid;

type MapFn = dyn Fn(&Point) -> Result<Point> + Send + Sync;

/// A single-valued self-map of a space.
#[derive(Clone)]
pub enum PointMap {
    /// `x ↦ A x + b` on `R^d`.
    Affine { linear: Vec<Vec<f64>>, offset: Vec<f64> },
    /// `x ↦ (a x + b) / (c x + d)` on `R`.
    Fractional { a: f64, b: f64, c: f64, d: f64 },
    /// `[x] ↦ [M x]` on the projective plane.
    Projective([[f64; 3]; 3]),
    Custom { name: String, f: Arc<MapFn> },
}

impl PointMap {
    pub fn custom<F>(name: impl Into<String>, f: F) -> PointMap
    where
        F: Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    {
        PointMap::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// `x ↦ scale * x + shift` on the real line.
    pub fn scale_shift(scale: f64, shift: f64) -> PointMap {
        PointMap::Affine {
            linear: vec![vec![scale]],
            offset: vec![shift],
        }
    }

    /// Checks that the map is well-formed for `space`.
    pub fn validate(&self, space: Space) -> Result<()> {
        match (self, space) {
            (PointMap::Affine { linear, offset }, Space::Euclidean(d)) => {
                let d = d as usize;
                if linear.len() != d || linear.iter().any(|r| r.len() != d) || offset.len() != d {
                    return Err(Error::invalid(format!(
                        "affine map needs a {d}x{d} matrix and a length-{d} offset"
                    )));
                }
                if linear.iter().flatten().chain(offset).any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite);
                }
                Ok(())
            }
            (PointMap::Fractional { a, b, c, d }, Space::Euclidean(1)) => {
                if [a, b, c, d].iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite);
                }
                if a * d - b * c == 0.0 {
                    return Err(Error::invalid("fractional map is degenerate (ad - bc = 0)"));
                }
                Ok(())
            }
            (PointMap::Projective(m), Space::ProjectivePlane) => {
                if m.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite);
                }
                if det3(m) == 0.0 {
                    return Err(Error::invalid("projective matrix is singular"));
                }
                Ok(())
            }
            (PointMap::Custom { .. }, _) => Ok(()),
            (m, s) => Err(Error::invalid(format!("{m:?} does not act on {s}"))),
        }
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        let space = x.space();
        match self {
            PointMap::Affine { linear, offset } => {
                let xs = x.coords();
                let y: Vec<f64> = linear
                    .iter()
                    .zip(offset)
                    .map(|(row, b)| row.iter().zip(xs).map(|(a, xi)| a * xi).sum::<f64>() + b)
                    .collect();
                Point::new(space, &y)
            }
            PointMap::Fractional { a, b, c, d } => {
                let t = x.coords()[0];
                Point::new(space, &[(a * t + b) / (c * t + d)])
            }
            PointMap::Projective(m) => {
                let v = x.coords();
                let y: Vec<f64> = m
                    .iter()
                    .map(|row| row[0] * v[0] + row[1] * v[1] + row[2] * v[2])
                    .collect();
                Point::new(space, &y)
            }
            PointMap::Custom { f, .. } => {
                let y = f(x)?;
                space.check(y.space())?;
                Ok(y)
            }
        }
    }
}

pub(crate) fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

impl fmt::Debug for PointMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointMap::Affine { linear, offset } => f
                .debug_struct("Affine")
                .field("linear", linear)
                .field("offset", offset)
                .finish(),
            PointMap::Fractional { a, b, c, d } => write!(f, "Fractional({a}, {b}, {c}, {d})"),
            PointMap::Projective(m) => f.debug_tuple("Projective").field(m).finish(),
            PointMap::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Structure of a multifunction.
#[derive(Debug, Clone)]
pub enum Structure {
    /// `{f}(x) = {f(x)}`.
    Lift(PointMap),
    /// Pointwise union of the members.
    Union(Vec<Multifunction>),
    Constant(FiniteCompact),
    /// `at_value` at the point `at`, `elsewhere` everywhere else.
    Step {
        at: Point,
        at_value: FiniteCompact,
        elsewhere: FiniteCompact,
    },
    /// Value of the nearest tabulated sample (first in table order on ties).
    Tabulated(Vec<(Point, FiniteCompact)>),
}

#[derive(Debug, Clone)]
pub struct Multifunction {
    space: Space,
    domain: Domain,
    node: Arc<Structure>,
}

impl Multifunction {
    fn from_structure(space: Space, node: Structure) -> Multifunction {
        Multifunction {
            space,
            domain: Domain::default_for(space),
            node: Arc::new(node),
        }
    }

    pub fn lift(space: Space, map: PointMap) -> Result<Multifunction> {
        map.validate(space)?;
        Ok(Multifunction::from_structure(space, Structure::Lift(map)))
    }

    pub fn constant(set: FiniteCompact) -> Multifunction {
        Multifunction::from_structure(set.space(), Structure::Constant(set))
    }

    pub fn step(at: Point, at_value: FiniteCompact, elsewhere: FiniteCompact) -> Result<Multifunction> {
        let space = at.space();
        space.check(at_value.space())?;
        space.check(elsewhere.space())?;
        Ok(Multifunction::from_structure(
            space,
            Structure::Step {
                at,
                at_value,
                elsewhere,
            },
        ))
    }

    pub fn tabulated(table: Vec<(Point, FiniteCompact)>) -> Result<Multifunction> {
        let space = table.first().ok_or(Error::Empty)?.0.space();
        for (x, v) in &table {
            space.check(x.space())?;
            space.check(v.space())?;
        }
        Ok(Multifunction::from_structure(space, Structure::Tabulated(table)))
    }

    /// Replaces the sampling domain.
    pub fn with_domain(mut self, domain: Domain) -> Result<Multifunction> {
        domain.validate(self.space)?;
        self.domain = domain;
        Ok(self)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn structure(&self) -> &Structure {
        &self.node
    }

    /// Members of a union, or the multifunction itself.
    pub fn members(&self) -> Vec<Multifunction> {
        match &*self.node {
            Structure::Union(m) => m.clone(),
            _ => vec![self.clone()],
        }
    }

    /// Points where the structure changes value abruptly. Samplers always
    /// include the ones that fall inside the neighborhood being probed.
    pub fn breakpoints(&self) -> Vec<Point> {
        let mut out = Vec::new();
        self.collect_breakpoints(&mut out);
        out.sort_by(|a, b| a.canonical_cmp(b));
        out.dedup();
        out
    }

    fn collect_breakpoints(&self, out: &mut Vec<Point>) {
        match &*self.node {
            Structure::Step { at, .. } => out.push(*at),
            Structure::Union(m) => m.iter().for_each(|p| p.collect_breakpoints(out)),
            _ => {}
        }
    }

    /// Appends the (possibly repeated) points of `φ(x)` to `out`.
    pub fn eval_into(&self, x: &Point, out: &mut Vec<Point>) -> Result<()> {
        self.space.check(x.space())?;
        match &*self.node {
            Structure::Lift(f) => out.push(f.apply(x)?),
            Structure::Union(m) => {
                for phi in m {
                    phi.eval_into(x, out)?;
                }
            }
            Structure::Constant(c) => out.extend_from_slice(c.points()),
            Structure::Step {
                at,
                at_value,
                elsewhere,
            } => {
                let v = if x == at { at_value } else { elsewhere };
                out.extend_from_slice(v.points());
            }
            Structure::Tabulated(t) => {
                let mut best = &t[0];
                let mut bd = x.distance(&t[0].0);
                for e in &t[1..] {
                    let d = x.distance(&e.0);
                    if d < bd {
                        bd = d;
                        best = e;
                    }
                }
                out.extend_from_slice(best.1.points());
            }
        }
        Ok(())
    }

    /// `φ(x)` as a canonical finite set.
    pub fn eval(&self, x: &Point) -> Result<FiniteCompact> {
        if let Structure::Constant(c) = &*self.node {
            self.space.check(x.space())?;
            return Ok(c.clone());
        }
        let mut out = Vec::new();
        self.eval_into(x, &mut out)?;
        FiniteCompact::new(self.space, out)
    }

    /// `φ(B) = ∪_{b ∈ B} φ(b)`. Values are computed in parallel; the union is
    /// then canonicalized sequentially.
    pub fn image(&self, set: &FiniteCompact) -> Result<FiniteCompact> {
        self.space.check(set.space())?;
        if let Structure::Constant(c) = &*self.node {
            return Ok(c.clone());
        }
        let pts = set.points();
        let out: Vec<Point> = if pts.len() < 512 {
            let mut out = Vec::new();
            for b in pts {
                self.eval_into(b, &mut out)?;
            }
            out
        } else {
            let parts = pts
                .par_chunks(256)
                .map(|chunk| {
                    let mut out = Vec::new();
                    for b in chunk {
                        self.eval_into(b, &mut out)?;
                    }
                    Ok(out)
                })
                .collect::<Result<Vec<_>>>()?;
            parts.concat()
        };
        FiniteCompact::new(self.space, out)
    }

    /// Random pairs of distinct domain points, plus pairs anchored at each
    /// breakpoint.
    pub fn sample_pairs(&self, count: usize, seed: u64) -> Vec<(Point, Point)> {
        let mut rng = stream(seed, &[0x5041_4952]);
        let mut pairs = Vec::with_capacity(count);
        while pairs.len() < count {
            let x = sample_domain(self.space, &self.domain, &mut rng);
            let y = sample_domain(self.space, &self.domain, &mut rng);
            if x.distance(&y) > 0.0 {
                pairs.push((x, y));
            }
        }
        for bp in self.breakpoints() {
            let mut k = 0;
            while k < 16 {
                let y = sample_domain(self.space, &self.domain, &mut rng);
                if bp.distance(&y) > 0.0 {
                    pairs.push((bp, y));
                    k += 1;
                }
            }
        }
        pairs
    }

    /// Random domain points, breakpoints appended.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Point> {
        let mut rng = stream(seed, &[0x504f_494e_54]);
        let mut pts: Vec<Point> = (0..count)
            .map(|_| sample_domain(self.space, &self.domain, &mut rng))
            .collect();
        pts.extend(self.breakpoints());
        pts
    }
}

/// Pointwise union `(∪ φ_i)(x) = ∪ φ_i(x)`. The domain is the first member's.
pub fn union(members: Vec<Multifunction>) -> Result<Multifunction> {
    let first = members.first().ok_or_else(|| Error::invalid("union of no multifunctions"))?;
    let space = first.space;
    let domain = first.domain.clone();
    for m in &members[1..] {
        space.check(m.space)?;
    }
    Ok(Multifunction {
        space,
        domain,
        node: Arc::new(Structure::Union(members)),
    })
}
