//! Catalogue of concrete systems and their JSON description.
//!
//! ```json
//! {
//!   "name": "cantor",
//!   "space": "euclidean:1",
//!   "kind": "affine",
//!   "maps": [
//!     {"matrix": [[0.3333333333333333]], "offset": [0]},
//!     {"matrix": [[0.3333333333333333]], "offset": [0.6666666666666666]}
//!   ],
//!   "declared_class": "contraction"
//! }
//! ```
//!
//! Kinds: `affine` (`x ↦ A x + b`), `weak` (`x ↦ (a x + b)/(c x + d)` on the
//! line, matrix `[[a, b], [c, d]]`), `projective` (`[x] ↦ [M x]`, strictly
//! positive invertible 3×3), `condensation` (affine maps plus the constant
//! `condensation_set`) and `usc_counterexample` (net spacing `net_eps`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperspace::FiniteCompact;
use crate::jsonpos::line_of;
use crate::multifunction::{
    det3, union, ComparisonFunction, Multifunction, PointMap, RegularityClass,
};
use crate::space::{Domain, Point, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Affine,
    Weak,
    Projective,
    Condensation,
    UscCounterexample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub name: String,
    pub space: Space,
    pub kind: SystemKind,
    #[serde(default)]
    pub maps: Vec<MapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condensation_set: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub net_eps: Option<f64>,
    pub declared_class: RegularityClass,
    /// Sampling domain; defaults to the unit box or the positive orthant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    /// Comparison function for weak contractions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonFunction>,
    /// Known Lipschitz bound; affine kinds derive one when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

/// A validation failure located at a JSON path.
#[derive(Debug)]
struct Invalid {
    path: String,
    message: String,
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> Invalid {
    Invalid {
        path: path.into(),
        message: message.into(),
    }
}

impl SystemSpec {
    /// Parses and validates a JSON system description. Errors carry the line
    /// of the offending value.
    pub fn from_json(text: &str) -> Result<SystemSpec> {
        let spec: SystemSpec =
            serde_json::from_str(text).map_err(|e| Error::parse(e.line().max(1), e.to_string()))?;
        spec.check()
            .map_err(|v| Error::parse(line_of(text, &v.path), format!("{}: {}", v.path, v.message)))?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.check()
            .map_err(|v| Error::invalid(format!("{}: {}", v.path, v.message)))
    }

    fn check(&self) -> std::result::Result<(), Invalid> {
        let space = self.space;
        if let Some(d) = &self.domain {
            d.validate(space).map_err(|e| invalid("domain", e.to_string()))?;
        }
        if let Some(l) = self.lipschitz {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(invalid("lipschitz", "must be finite and >= 0"));
            }
        }
        let need_maps = matches!(
            self.kind,
            SystemKind::Affine | SystemKind::Weak | SystemKind::Projective
        );
        if need_maps && self.maps.is_empty() {
            return Err(invalid("maps", "at least one map is required"));
        }
        for (i, m) in self.maps.iter().enumerate() {
            let at = format!("maps[{i}]");
            self.map_for(m).map_err(|e| match e {
                MapError::Matrix(msg) => invalid(format!("{at}.matrix"), msg),
                MapError::Offset(msg) => invalid(format!("{at}.offset"), msg),
            })?;
        }
        match self.kind {
            SystemKind::Affine => {}
            SystemKind::Weak => {
                if space != Space::Euclidean(1) {
                    return Err(invalid("space", "weak systems live on euclidean:1"));
                }
            }
            SystemKind::Projective => {
                if space != Space::ProjectivePlane {
                    return Err(invalid("space", "projective systems need space \"projective\""));
                }
            }
            SystemKind::Condensation => {
                let set = self
                    .condensation_set
                    .as_ref()
                    .ok_or_else(|| invalid("condensation_set", "required for condensation"))?;
                if set.is_empty() {
                    return Err(invalid("condensation_set", "must be nonempty"));
                }
                for (i, row) in set.iter().enumerate() {
                    Point::new(space, row)
                        .map_err(|e| invalid(format!("condensation_set[{i}]"), e.to_string()))?;
                }
            }
            SystemKind::UscCounterexample => {
                if space != Space::Euclidean(1) {
                    return Err(invalid("space", "the usc counterexample lives on euclidean:1"));
                }
                if !self.maps.is_empty() {
                    return Err(invalid("maps", "the usc counterexample takes no maps"));
                }
                match self.net_eps {
                    Some(e) if e > 0.0 && e.is_finite() => {}
                    _ => return Err(invalid("net_eps", "must be a positive number")),
                }
            }
        }
        if self.kind != SystemKind::UscCounterexample && self.net_eps.is_some() {
            return Err(invalid("net_eps", "only used by usc_counterexample"));
        }
        if self.kind != SystemKind::Condensation && self.condensation_set.is_some() {
            return Err(invalid("condensation_set", "only used by condensation"));
        }
        Ok(())
    }

    fn map_for(&self, m: &MapSpec) -> std::result::Result<PointMap, MapError> {
        let rows = m.matrix.len();
        let square = m.matrix.iter().all(|r| r.len() == rows);
        if m.matrix.iter().flatten().any(|x| !x.is_finite()) {
            return Err(MapError::Matrix("entries must be finite".into()));
        }
        match self.kind {
            SystemKind::Affine | SystemKind::Condensation => {
                let d = self.space.coord_len();
                if self.space.is_projective() {
                    return Err(MapError::Matrix("affine maps need a euclidean space".into()));
                }
                if rows != d || !square {
                    return Err(MapError::Matrix(format!("expected a {d}x{d} matrix")));
                }
                let offset = m.offset.clone().unwrap_or_else(|| vec![0.0; d]);
                if offset.len() != d || offset.iter().any(|x| !x.is_finite()) {
                    return Err(MapError::Offset(format!("expected {d} finite numbers")));
                }
                Ok(PointMap::Affine {
                    linear: m.matrix.clone(),
                    offset,
                })
            }
            SystemKind::Weak => {
                if rows != 2 || !square {
                    return Err(MapError::Matrix(
                        "expected [[a, b], [c, d]] for x -> (a x + b)/(c x + d)".into(),
                    ));
                }
                if m.offset.is_some() {
                    return Err(MapError::Offset("fractional maps take no offset".into()));
                }
                let [a, b] = [m.matrix[0][0], m.matrix[0][1]];
                let [c, d] = [m.matrix[1][0], m.matrix[1][1]];
                if a * d - b * c == 0.0 {
                    return Err(MapError::Matrix("ad - bc must be nonzero".into()));
                }
                Ok(PointMap::Fractional { a, b, c, d })
            }
            SystemKind::Projective => {
                if rows != 3 || !square {
                    return Err(MapError::Matrix("expected a 3x3 matrix".into()));
                }
                if m.offset.is_some() {
                    return Err(MapError::Offset("projective maps take no offset".into()));
                }
                let mut mm = [[0.0; 3]; 3];
                for (i, r) in m.matrix.iter().enumerate() {
                    mm[i].copy_from_slice(r);
                }
                check_projective_matrix(&mm).map_err(|e| MapError::Matrix(e.to_string()))?;
                Ok(PointMap::Projective(mm))
            }
            SystemKind::UscCounterexample => Err(MapError::Matrix("no maps allowed".into())),
        }
    }

    /// Domain used by samplers.
    pub fn sampling_domain(&self) -> Domain {
        self.domain
            .clone()
            .unwrap_or_else(|| Domain::default_for(self.space))
    }

    /// Lipschitz bound: the declared one, or the largest spectral norm of the
    /// linear parts for affine and condensation systems.
    pub fn lipschitz_bound(&self) -> Option<f64> {
        if self.lipschitz.is_some() {
            return self.lipschitz;
        }
        match self.kind {
            SystemKind::Affine | SystemKind::Condensation => Some(
                self.maps
                    .iter()
                    .map(|m| spectral_norm(&m.matrix))
                    .fold(0.0, f64::max),
            ),
            _ => None,
        }
    }

    /// Default starting set: the origin, `[1:1:1]` on the projective plane.
    pub fn default_seed(&self) -> FiniteCompact {
        FiniteCompact::singleton(self.space.base_point())
    }
}

enum MapError {
    Matrix(String),
    Offset(String),
}

/// Largest singular value by power iteration on `AᵀA`, rounded up slightly.
fn spectral_norm(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut v = vec![1.0; n];
    let mut sigma2 = 0.0;
    for _ in 0..200 {
        let av: Vec<f64> = a.iter().map(|r| r.iter().zip(&v).map(|(x, y)| x * y).sum()).collect();
        let w: Vec<f64> = (0..n).map(|j| (0..n).map(|i| a[i][j] * av[i]).sum()).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        sigma2 = norm / v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = w.iter().map(|x| x / norm).collect();
    }
    sigma2.sqrt() * (1.0 + 1e-9)
}

fn check_projective_matrix(m: &[[f64; 3]; 3]) -> Result<()> {
    if m.iter().flatten().any(|x| !(*x > 0.0)) {
        return Err(Error::invalid("projective matrix entries must be strictly positive"));
    }
    if det3(m) == 0.0 {
        return Err(Error::invalid("projective matrix is singular"));
    }
    Ok(())
}

/// Builds the multifunction `x ↦ {f_i(x)}` (plus the constant set for
/// condensation systems).
pub fn build(spec: &SystemSpec) -> Result<Multifunction> {
    spec.validate()?;
    let space = spec.space;
    let domain = spec.sampling_domain();
    if spec.kind == SystemKind::UscCounterexample {
        return usc_counterexample(spec.net_eps.unwrap())?.with_domain(domain);
    }
    let mut members = Vec::new();
    for m in &spec.maps {
        let map = spec
            .map_for(m)
            .map_err(|e| match e {
                MapError::Matrix(s) | MapError::Offset(s) => Error::invalid(s),
            })?;
        members.push(Multifunction::lift(space, map)?.with_domain(domain.clone())?);
    }
    if let Some(set) = &spec.condensation_set {
        let c = FiniteCompact::from_rows(space, set)?;
        members.push(Multifunction::constant(c).with_domain(domain.clone())?);
    }
    union(members)?.with_domain(domain)
}

/// `[M x]` on the projective plane for a strictly positive invertible `M`.
/// Such matrices send lines of the positive orthant into its interior.
pub fn projective_map(m: &[[f64; 3]; 3], x: &Point) -> Result<Point> {
    check_projective_matrix(m)?;
    Space::ProjectivePlane.check(x.space())?;
    PointMap::Projective(*m).apply(x)
}

/// On `[0, 1]`: `φ(0)` is the net `{0, ε, 2ε, ..., 1}` and `φ(x) = {0}` for
/// `x ≠ 0`. Upper semicontinuous at 0 but discontinuous there in `h`.
pub fn usc_counterexample(net_eps: f64) -> Result<Multifunction> {
    if !(net_eps > 0.0) || !net_eps.is_finite() {
        return Err(Error::invalid(format!("net_eps must be positive, got {net_eps}")));
    }
    let n = (1.0 / net_eps).ceil() as usize;
    let mut xs: Vec<f64> = (0..n).map(|i| i as f64 * net_eps).filter(|x| *x < 1.0).collect();
    xs.push(1.0);
    let net = FiniteCompact::from_reals(&xs)?;
    let zero = Point::real(0.0)?;
    Multifunction::step(zero, net, FiniteCompact::singleton(zero))?
        .with_domain(Domain::interval(0.0, 1.0))
}

/// Named presets.
pub mod presets {
    use super::*;

    pub const NAMES: &[&str] = &[
        "cantor",
        "sierpinski",
        "constant",
        "weak",
        "projective",
        "condensation",
        "usc_counterexample",
        "fern",
    ];

    fn affine(m: Vec<Vec<f64>>, b: Vec<f64>) -> MapSpec {
        MapSpec {
            matrix: m,
            offset: Some(b),
        }
    }

    fn base(name: &str, space: Space, kind: SystemKind, class: RegularityClass) -> SystemSpec {
        SystemSpec {
            name: name.into(),
            space,
            kind,
            maps: Vec::new(),
            condensation_set: None,
            net_eps: None,
            declared_class: class,
            domain: None,
            comparison: None,
            lipschitz: None,
        }
    }

    pub fn cantor() -> SystemSpec {
        let mut s = base("cantor", Space::Euclidean(1), SystemKind::Affine, RegularityClass::Contraction);
        s.maps = vec![
            affine(vec![vec![1.0 / 3.0]], vec![0.0]),
            affine(vec![vec![1.0 / 3.0]], vec![2.0 / 3.0]),
        ];
        s.lipschitz = Some(1.0 / 3.0);
        s
    }

    pub fn sierpinski() -> SystemSpec {
        let mut s = base(
            "sierpinski",
            Space::Euclidean(2),
            SystemKind::Affine,
            RegularityClass::Contraction,
        );
        let half = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
        s.maps = vec![
            affine(half.clone(), vec![0.0, 0.0]),
            affine(half.clone(), vec![0.5, 0.0]),
            affine(half, vec![0.0, 0.5]),
        ];
        s.lipschitz = Some(0.5);
        s
    }

    pub fn constant() -> SystemSpec {
        let mut s = base(
            "constant",
            Space::Euclidean(2),
            SystemKind::Condensation,
            RegularityClass::Contraction,
        );
        s.condensation_set = Some(vec![vec![0.25, 0.25], vec![0.75, 0.75]]);
        s.lipschitz = Some(0.0);
        s
    }

    /// `x ↦ x/(1+x)` and `x ↦ (x+1)/2` on `[0, 2]`, which both maps send into
    /// `[0, 2/3]` and `[1/2, 3/2]`.
    pub fn weak() -> SystemSpec {
        let mut s = base(
            "weak",
            Space::Euclidean(1),
            SystemKind::Weak,
            RegularityClass::WeakContraction,
        );
        s.maps = vec![
            MapSpec {
                matrix: vec![vec![1.0, 0.0], vec![1.0, 1.0]],
                offset: None,
            },
            MapSpec {
                matrix: vec![vec![1.0, 1.0], vec![0.0, 2.0]],
                offset: None,
            },
        ];
        s.domain = Some(Domain::interval(0.0, 2.0));
        s.comparison = Some(ComparisonFunction::MaxOf(vec![
            ComparisonFunction::Hyperbolic,
            ComparisonFunction::Linear(0.5),
        ]));
        s
    }

    pub fn projective() -> SystemSpec {
        let mut s = base(
            "projective",
            Space::ProjectivePlane,
            SystemKind::Projective,
            RegularityClass::Continuous,
        );
        s.maps = vec![
            MapSpec {
                matrix: vec![vec![1.0, 0.5, 0.5], vec![0.5, 3.0, 0.5], vec![0.5, 0.5, 1.0]],
                offset: None,
            },
            MapSpec {
                matrix: vec![vec![3.0, 0.5, 0.5], vec![0.5, 1.0, 0.5], vec![0.5, 0.5, 1.0]],
                offset: None,
            },
        ];
        s
    }

    pub fn condensation() -> SystemSpec {
        let mut s = cantor();
        s.name = "condensation".into();
        s.kind = SystemKind::Condensation;
        s.condensation_set = Some(vec![vec![0.5]]);
        s
    }

    pub fn usc_counterexample() -> SystemSpec {
        let mut s = base(
            "usc_counterexample",
            Space::Euclidean(1),
            SystemKind::UscCounterexample,
            RegularityClass::UscOnly,
        );
        s.net_eps = Some(1e-3);
        s.domain = Some(Domain::interval(0.0, 1.0));
        s
    }

    pub fn fern() -> SystemSpec {
        let mut s = base("fern", Space::Euclidean(2), SystemKind::Affine, RegularityClass::Contraction);
        s.maps = vec![
            affine(vec![vec![0.0, 0.0], vec![0.0, 0.16]], vec![0.0, 0.0]),
            affine(vec![vec![0.85, 0.04], vec![-0.04, 0.85]], vec![0.0, 1.6]),
            affine(vec![vec![0.2, -0.26], vec![0.23, 0.22]], vec![0.0, 1.6]),
            affine(vec![vec![-0.15, 0.28], vec![0.26, 0.24]], vec![0.0, 0.44]),
        ];
        s.domain = Some(Domain::Box {
            lo: vec![-3.0, 0.0],
            hi: vec![3.0, 10.0],
        });
        s
    }

    pub fn by_name(name: &str) -> Option<SystemSpec> {
        Some(match name {
            "cantor" => cantor(),
            "sierpinski" => sierpinski(),
            "constant" => constant(),
            "weak" => weak(),
            "projective" => projective(),
            "condensation" => condensation(),
            "usc_counterexample" | "usc" => usc_counterexample(),
            "fern" => fern(),
            _ => return None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64) -> Point {
        Point::real(x).unwrap()
    }

    #[test]
    fn presets_build() {
        for name in presets::NAMES {
            let spec = presets::by_name(name).unwrap();
            let phi = build(&spec).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(phi.space(), spec.space);
            let back = SystemSpec::from_json(&spec.to_json()).unwrap();
            assert_eq!(back.to_json(), spec.to_json());
        }
    }

    #[test]
    fn cantor_and_sierpinski_valuedness() {
        let c = build(&presets::cantor()).unwrap();
        assert_eq!(c.eval(&pt(0.3)).unwrap().len(), 2);
        let s = build(&presets::sierpinski()).unwrap();
        let p = Point::new(Space::Euclidean(2), &[0.2, 0.6]).unwrap();
        let v = s.eval(&p).unwrap();
        assert_eq!(v.len(), 3);
        let rows: Vec<&[f64]> = v.points().iter().map(|p| p.coords()).collect();
        assert_eq!(rows, vec![&[0.1, 0.3][..], &[0.1, 0.8][..], &[0.6, 0.3][..]]);
    }

    #[test]
    fn condensation_adds_the_constant() {
        let c = build(&presets::condensation()).unwrap();
        for x in [0.0, 0.2, 0.9] {
            assert_eq!(c.eval(&pt(x)).unwrap().len(), 3);
        }
    }

    #[test]
    fn weak_maps_keep_the_interval() {
        let w = build(&presets::weak()).unwrap();
        for i in 0..=200 {
            let x = i as f64 * 0.01;
            for p in w.eval(&pt(x)).unwrap().points() {
                assert!((0.0..=2.0).contains(&p.coords()[0]));
            }
        }
    }

    #[test]
    fn projective_map_examples() {
        let sp = Space::ProjectivePlane;
        let x = Point::new(sp, &[0.2, 0.5, 0.9]).unwrap();
        let id = [[1.0, 1e-300, 1e-300], [1e-300, 1.0, 1e-300], [1e-300, 1e-300, 1.0]];
        assert_eq!(projective_map(&id, &x).unwrap(), x);
        let two = id.map(|r| r.map(|v| 2.0 * v));
        assert_eq!(projective_map(&two, &x).unwrap(), x);
        let sing = [[1.0, 1.0, 1.0]; 3];
        assert!(projective_map(&sing, &x).is_err());
        let negative = [[1.0, -1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]];
        assert!(projective_map(&negative, &x).is_err());
    }

    #[test]
    fn projective_iteration_finds_dominant_eigenvector() {
        let m = [[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]];
        let sp = Space::ProjectivePlane;
        let mut x = Point::new(sp, &[1.0, 0.0, 0.0]).unwrap();
        for _ in 0..60 {
            x = projective_map(&m, &x).unwrap();
        }
        // Oracle: power iteration on the raw vector.
        let mut v = [1.0f64, 0.0, 0.0];
        for _ in 0..60 {
            let w = [
                2.0 * v[0] + v[1] + v[2],
                v[0] + 2.0 * v[1] + v[2],
                v[0] + v[1] + 2.0 * v[2],
            ];
            let n = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
            v = w.map(|c| c / n);
        }
        let oracle = Point::new(sp, &v).unwrap();
        let diag = Point::new(sp, &[1.0, 1.0, 1.0]).unwrap();
        assert!(x.distance(&oracle) < 1e-10);
        assert!(x.distance(&diag) < 1e-10);
    }

    #[test]
    fn projective_scaling_invariance() {
        let sp = Space::ProjectivePlane;
        let m = [[3.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 3.0]];
        let a = Point::new(sp, &[0.1, 0.7, 0.3]).unwrap();
        let b = Point::new(sp, &[0.9, 0.2, 0.4]).unwrap();
        let d = projective_map(&m, &a).unwrap().distance(&projective_map(&m, &b).unwrap());
        for s in [0.5, 2.0, 4.0, 0.25] {
            let ms = m.map(|r| r.map(|v| v * s));
            let ds = projective_map(&ms, &a).unwrap().distance(&projective_map(&ms, &b).unwrap());
            assert_eq!(d.to_bits(), ds.to_bits());
        }
    }

    #[test]
    fn usc_counterexample_values() {
        let phi = usc_counterexample(1e-3).unwrap();
        assert_eq!(phi.eval(&pt(0.3)).unwrap(), FiniteCompact::from_reals(&[0.0]).unwrap());
        let at0 = phi.eval(&pt(0.0)).unwrap();
        assert_eq!(at0.len(), 1001);
        for n in 1..=50 {
            let v = phi.eval(&pt(1.0 / n as f64)).unwrap();
            assert!(crate::hyperspace::hausdorff(&v, &at0).unwrap() >= 1.0 - 1e-3);
        }
        assert!(usc_counterexample(0.0).is_err());
    }

    #[test]
    fn config_errors_point_at_lines() {
        let text = r#"{
  "name": "bad",
  "space": "euclidean:2",
  "kind": "affine",
  "maps": [
    {"matrix": [[0.5, 0], [0, 0.5]], "offset": [0, 0]},
    {"matrix": [[0.5, 0], [0, 0.5]],
     "offset": [0]}
  ],
  "declared_class": "contraction"
}"#;
        match SystemSpec::from_json(text) {
            Err(Error::Parse(p)) => {
                assert_eq!(p.line, 8, "{p}");
                assert!(p.message.contains("maps[1].offset"));
            }
            other => panic!("{other:?}"),
        }
        let unknown = "{\n\"name\": \"x\",\n\"bogus\": 1\n}";
        match SystemSpec::from_json(unknown) {
            Err(Error::Parse(p)) => assert_eq!(p.line, 3, "{p}"),
            other => panic!("{other:?}"),
        }
        let proj = r#"{"name": "p", "space": "projective", "kind": "projective",
  "maps": [{"matrix": [[1, 1, 1], [1, 0, 1], [1, 1, 1]]}],
  "declared_class": "continuous"}"#;
        match SystemSpec::from_json(proj) {
            Err(Error::Parse(p)) => assert_eq!(p.line, 2, "{p}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spectral_norm_of_presets() {
        assert!((presets::sierpinski().lipschitz_bound().unwrap() - 0.5).abs() < 1e-8);
        let mut f = presets::fern();
        f.lipschitz = None;
        let l = f.lipschitz_bound().unwrap();
        assert!((l - (0.85f64 * 0.85 + 0.04 * 0.04).sqrt()).abs() < 1e-6, "{l}");
    }
}
