use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperspace::FiniteCompact;
use crate::space::Point;

/// Open ball `N_r{center}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ball {
    center: Point,
    radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Ball> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Ball { center, radius })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.center.distance(p) < self.radius
    }

    /// `r - d(p, center)`: how far `p` sits inside the ball (negative outside).
    pub fn margin(&self, p: &Point) -> f64 {
        self.radius - self.center.distance(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LebesgueNumber {
    /// `min_a max_j (r_j - d(a, c_j))`.
    pub lambda: f64,
    /// False when some point of the set lies outside every open ball.
    pub is_cover: bool,
    /// The point attaining the minimum.
    pub tightest: Point,
    /// Index of the ball that holds `N_λ{tightest}`.
    pub ball: usize,
}

/// Lebesgue number of a ball cover of a finite set. When `λ > 0`, every
/// `N_λ{a}` lies inside the ball that maximizes the margin at `a`.
pub fn lebesgue_number(set: &FiniteCompact, cover: &[Ball]) -> Result<LebesgueNumber> {
    if cover.is_empty() {
        return Err(Error::invalid("cover has no balls"));
    }
    for b in cover {
        set.space().check(b.center.space())?;
    }
    let mut worst: Option<(f64, Point, usize)> = None;
    for a in set.points() {
        let (j, m) = cover
            .iter()
            .enumerate()
            .map(|(j, b)| (j, b.margin(a)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        if worst.as_ref().map_or(true, |w| m < w.0) {
            worst = Some((m, *a, j));
        }
    }
    let (lambda, tightest, ball) = worst.expect("set is nonempty");
    Ok(LebesgueNumber {
        lambda,
        is_cover: lambda > 0.0,
        tightest,
        ball,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64) -> Point {
        Point::real(x).unwrap()
    }

    #[test]
    fn single_ball_at_the_point() {
        let a = FiniteCompact::singleton(pt(0.4));
        let l = lebesgue_number(&a, &[Ball::new(pt(0.4), 0.7).unwrap()]).unwrap();
        assert_eq!(l.lambda, 0.7);
        assert!(l.is_cover);
    }

    #[test]
    fn two_overlapping_balls() {
        let a = FiniteCompact::from_reals(&[0.0, 1.0]).unwrap();
        let cover = [Ball::new(pt(0.0), 1.2).unwrap(), Ball::new(pt(1.0), 1.2).unwrap()];
        assert_eq!(lebesgue_number(&a, &cover).unwrap().lambda, 1.2);
    }

    #[test]
    fn uncovered_point_is_flagged() {
        let a = FiniteCompact::from_reals(&[0.0, 2.0]).unwrap();
        let l = lebesgue_number(&a, &[Ball::new(pt(0.0), 1.0).unwrap()]).unwrap();
        assert_eq!(l.lambda, -1.0);
        assert!(!l.is_cover);
        assert_eq!(l.tightest, pt(2.0));
    }

    #[test]
    fn boundary_point_is_not_covered() {
        let a = FiniteCompact::from_reals(&[1.0]).unwrap();
        let l = lebesgue_number(&a, &[Ball::new(pt(0.0), 1.0).unwrap()]).unwrap();
        assert_eq!(l.lambda, 0.0);
        assert!(!l.is_cover);
    }

    #[test]
    fn bad_inputs() {
        assert!(Ball::new(pt(0.0), 0.0).is_err());
        let a = FiniteCompact::from_reals(&[0.0]).unwrap();
        assert!(lebesgue_number(&a, &[]).is_err());
    }
}
