//! Base metric spaces and their points.
//!
//! Two spaces are supported: Euclidean `R^d` for `d` in `1..=3` and the real
//! projective plane. A projective point is a line through the origin of
//! `R^3`, stored as a unit representative whose first nonzero coordinate is
//! positive and whose coordinates are snapped to a dyadic lattice so that
//! rescaled inputs collapse onto one stored value.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice spacing used when canonicalizing projective representatives (2^-40).
pub const PROJECTIVE_SNAP: f64 = 1.0 / 1_099_511_627_776.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Space {
    Euclidean(u8),
    ProjectivePlane,
}

impl Space {
    pub fn euclidean(dim: usize) -> Result<Space> {
        if (1..=3).contains(&dim) {
            Ok(Space::Euclidean(dim as u8))
        } else {
            Err(Error::invalid(format!(
                "euclidean dimension must be 1..=3, got {dim}"
            )))
        }
    }

    /// Number of stored coordinates per point.
    pub fn coord_len(self) -> usize {
        match self {
            Space::Euclidean(d) => d as usize,
            Space::ProjectivePlane => 3,
        }
    }

    pub fn is_projective(self) -> bool {
        matches!(self, Space::ProjectivePlane)
    }

    pub fn check(self, other: Space) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                expected: self,
                found: other,
            })
        }
    }

    /// Origin of a Euclidean space, or the line `[1:1:1]` of the plane.
    pub fn base_point(self) -> Point {
        match self {
            Space::Euclidean(d) => Point::new(self, &vec![0.0; d as usize]).unwrap(),
            Space::ProjectivePlane => Point::new(self, &[1.0, 1.0, 1.0]).unwrap(),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Euclidean(d) => write!(f, "euclidean:{d}"),
            Space::ProjectivePlane => write!(f, "projective"),
        }
    }
}

impl FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Space> {
        let s = s.trim();
        if s == "projective" {
            return Ok(Space::ProjectivePlane);
        }
        match s.strip_prefix("euclidean:") {
            Some(d) => {
                let d: usize = d
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad euclidean dimension in {s:?}")))?;
                Space::euclidean(d)
            }
            None => Err(Error::invalid(format!(
                "unknown space {s:?} (expected euclidean:<d> or projective)"
            ))),
        }
    }
}

impl From<Space> for String {
    fn from(s: Space) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for Space {
    type Error = Error;
    fn try_from(s: String) -> Result<Space> {
        s.parse()
    }
}

/// A point of a [`Space`]. Unused trailing coordinates are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    space: Space,
    coords: [f64; 3],
}

impl Point {
    pub fn new(space: Space, coords: &[f64]) -> Result<Point> {
        if coords.len() != space.coord_len() {
            return Err(Error::invalid(format!(
                "{} coordinates supplied for a point of {space}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut c = [0.0; 3];
        c[..coords.len()].copy_from_slice(coords);
        let c = match space {
            Space::Euclidean(_) => c.map(|x| x + 0.0),
            Space::ProjectivePlane => canonical_line(c)?,
        };
        Ok(Point { space, coords: c })
    }

    /// Shorthand for a point of the real line.
    pub fn real(x: f64) -> Result<Point> {
        Point::new(Space::Euclidean(1), &[x])
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.space.coord_len()]
    }

    pub(crate) fn raw(&self) -> &[f64; 3] {
        &self.coords
    }

    /// Distance in the point's space. Both points must share a space.
    pub fn distance(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.space, other.space);
        match self.space {
            Space::Euclidean(_) => self.sq_dist(other).sqrt(),
            Space::ProjectivePlane => line_sine(&self.coords, &other.coords),
        }
    }

    pub fn checked_distance(&self, other: &Point) -> Result<f64> {
        self.space.check(other.space)?;
        Ok(self.distance(other))
    }

    /// Squared Euclidean distance of the stored coordinates.
    #[inline]
    pub(crate) fn sq_dist(&self, other: &Point) -> f64 {
        let a = &self.coords;
        let b = &other.coords;
        let mut s = 0.0;
        for i in 0..self.space.coord_len() {
            let d = a[i] - b[i];
            s += d * d;
        }
        s
    }

    /// Lexicographic order on coordinates.
    pub fn canonical_cmp(&self, other: &Point) -> Ordering {
        for i in 0..3 {
            match self.coords[i].total_cmp(&other.coords[i]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

fn snap(x: f64) -> f64 {
    (x / PROJECTIVE_SNAP).round() * PROJECTIVE_SNAP + 0.0
}

/// Unit representative, snapped, with the first nonzero coordinate positive.
/// Idempotent: an already-canonical vector is returned unchanged.
/// Scaling by a power of two first makes `[2^k v]` and `[v]` agree exactly.
fn canonical_line(v: [f64; 3]) -> Result<[f64; 3]> {
    let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    if !(n2 > 0.0) || !n2.is_finite() {
        return Err(Error::invalid("projective point needs a nonzero finite vector"));
    }
    let k = (n2.log2() / 2.0).round() as i32;
    let (v, n2) = if k != 0 {
        let w = v.map(|x| x * 2f64.powi(-k));
        (w, w[0] * w[0] + w[1] * w[1] + w[2] * w[2])
    } else {
        (v, n2)
    };
    let mut u = if (n2 - 1.0).abs() > 1e-9 {
        let n = n2.sqrt();
        v.map(|x| x / n)
    } else {
        v
    };
    u = u.map(snap);
    if let Some(first) = u.iter().find(|x| **x != 0.0) {
        if *first < 0.0 {
            u = u.map(|x| -x + 0.0);
        }
    } else {
        return Err(Error::invalid("projective point collapsed to zero"));
    }
    Ok(u)
}

/// Sine of the angle between two lines, `|u x v| / (|u| |v|)`.
fn line_sine(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    let cx = u[1] * v[2] - u[2] * v[1];
    let cy = u[2] * v[0] - u[0] * v[2];
    let cz = u[0] * v[1] - u[1] * v[0];
    let cross2 = cx * cx + cy * cy + cz * cz;
    let nu = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    let nv = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    (cross2 / (nu * nv)).sqrt().min(1.0)
}

/// Region of a space that samplers draw from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    /// Axis-aligned box in a Euclidean space.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Lines meeting the closed positive orthant of `R^3`.
    PositiveOrthant,
}

impl Domain {
    pub fn unit_box(dim: usize) -> Domain {
        Domain::Box {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Domain {
        Domain::Box {
            lo: vec![lo],
            hi: vec![hi],
        }
    }

    /// Default sampling region for a space.
    pub fn default_for(space: Space) -> Domain {
        match space {
            Space::Euclidean(d) => Domain::unit_box(d as usize),
            Space::ProjectivePlane => Domain::PositiveOrthant,
        }
    }

    pub fn validate(&self, space: Space) -> Result<()> {
        match (self, space) {
            (Domain::Box { lo, hi }, Space::Euclidean(d)) => {
                if lo.len() != d as usize || hi.len() != d as usize {
                    return Err(Error::invalid(format!(
                        "domain box bounds must have {d} coordinates"
                    )));
                }
                if lo.iter().zip(hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite())
                {
                    return Err(Error::invalid("domain box needs finite lo <= hi"));
                }
                Ok(())
            }
            (Domain::PositiveOrthant, Space::ProjectivePlane) => Ok(()),
            _ => Err(Error::invalid(format!("domain does not fit space {space}"))),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Domain::Box { lo, hi } => p
                .coords()
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(x, (a, b))| *a <= *x && *x <= *b),
            Domain::PositiveOrthant => p.coords().iter().all(|x| *x >= 0.0),
        }
    }

    /// Rough diameter, used for threshold scaling.
    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| (b - a) * (b - a))
                .sum::<f64>()
                .sqrt(),
            Domain::PositiveOrthant => 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_round_trips_through_strings() {
        for s in ["euclidean:1", "euclidean:2", "euclidean:3", "projective"] {
            let sp: Space = s.parse().unwrap();
            assert_eq!(sp.to_string(), s);
        }
        assert!("euclidean:4".parse::<Space>().is_err());
        assert!("sphere".parse::<Space>().is_err());
    }

    #[test]
    fn negative_zero_is_normalized() {
        let a = Point::real(-0.0).unwrap();
        let b = Point::real(0.0).unwrap();
        assert_eq!(a.coords()[0].to_bits(), b.coords()[0].to_bits());
    }

    #[test]
    fn projective_scalings_share_a_representative() {
        let sp = Space::ProjectivePlane;
        let base = [0.3, -1.7, 2.25];
        let p = Point::new(sp, &base).unwrap();
        for s in [2.0, -3.0, 0.125, 7.5, -1e3] {
            let q = Point::new(sp, &base.map(|x| x * s)).unwrap();
            let pb: Vec<u64> = p.coords().iter().map(|x| x.to_bits()).collect();
            let qb: Vec<u64> = q.coords().iter().map(|x| x.to_bits()).collect();
            assert_eq!(pb, qb, "scale {s}");
        }
        assert!(p.coords()[0] > 0.0);
    }

    #[test]
    fn projective_canonicalization_is_idempotent() {
        let sp = Space::ProjectivePlane;
        let p = Point::new(sp, &[0.123, 0.456, 0.789]).unwrap();
        let q = Point::new(sp, p.coords()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn projective_distance_is_sine_of_angle() {
        let sp = Space::ProjectivePlane;
        let e1 = Point::new(sp, &[1.0, 0.0, 0.0]).unwrap();
        let e2 = Point::new(sp, &[0.0, 1.0, 0.0]).unwrap();
        let d = Point::new(sp, &[1.0, 1.0, 0.0]).unwrap();
        assert_eq!(e1.distance(&e2), 1.0);
        assert!((e1.distance(&d) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let minus = Point::new(sp, &[-1.0, -1.0, 0.0]).unwrap();
        assert_eq!(d.distance(&minus), 0.0);
    }

    #[test]
    fn zero_vector_is_not_a_line() {
        assert!(Point::new(Space::ProjectivePlane, &[0.0, 0.0, 0.0]).is_err());
        assert!(Point::real(f64::NAN).is_err());
        assert!(Point::new(Space::Euclidean(2), &[1.0]).is_err());
    }
}
