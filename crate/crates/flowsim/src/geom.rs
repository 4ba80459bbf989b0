//! Planar geometry primitives shared by every module.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// A point or displacement in the plane, in meters.
///
/// Serialized as a two-element array `[x, y]`, which is the form used by the
/// network and scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector pointing along `angle` (radians, counter-clockwise from +x).
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Vec2 { x: c, y: s }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product; positive when `other` lies to the left.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Returns the unit vector, or `None` for a zero-length input.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 0.0).then(|| self / n)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Rotates by 90 degrees counter-clockwise.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn lerp(self, other: Vec2, t: f64) -> Vec2 {
        self + (other - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Vec2 { x, y }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle in radians to `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

/// Signed angle (radians, counter-clockwise positive) rotating `from` onto `to`.
pub fn signed_angle(from: Vec2, to: Vec2) -> f64 {
    from.cross(to).atan2(from.dot(to))
}

/// A closed line segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub fn new(a: Vec2, b: Vec2) -> Self {
        Segment { a, b }
    }

    /// Closest point on the segment to `p` and its parameter in `[0, 1]`.
    pub fn closest_point(&self, p: Vec2) -> (Vec2, f64) {
        let d = self.b - self.a;
        let len2 = d.norm_squared();
        if len2 == 0.0 {
            return (self.a, 0.0);
        }
        let t = ((p - self.a).dot(d) / len2).clamp(0.0, 1.0);
        (self.a + d * t, t)
    }

    /// Exact intersection test; touching endpoints and collinear overlap count.
    pub fn intersects(&self, other: &Segment) -> bool {
        let o1 = orientation(self.a, self.b, other.a);
        let o2 = orientation(self.a, self.b, other.b);
        let o3 = orientation(other.a, other.b, self.a);
        let o4 = orientation(other.a, other.b, self.b);
        if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
            return true;
        }
        (o1 == 0.0 && on_segment(self.a, self.b, other.a))
            || (o2 == 0.0 && on_segment(self.a, self.b, other.b))
            || (o3 == 0.0 && on_segment(other.a, other.b, self.a))
            || (o4 == 0.0 && on_segment(other.a, other.b, self.b))
    }
}

fn orientation(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let v = (b - a).cross(c - a);
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

// Assumes c is collinear with a-b.
fn on_segment(a: Vec2, b: Vec2, c: Vec2) -> bool {
    c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(0.25)).abs() - 0.25 < 1e-15);
    }

    #[test]
    fn signed_angle_handedness() {
        let x = Vec2::new(1.0, 0.0);
        assert!((signed_angle(x, Vec2::new(0.0, 1.0)) - PI / 2.0).abs() < 1e-12);
        assert!((signed_angle(x, Vec2::new(0.0, -1.0)) + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn segment_intersection_cases() {
        let s = Segment::new(Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0));
        assert!(s.intersects(&Segment::new(Vec2::new(5.0, -1.0), Vec2::new(5.0, 1.0))));
        // touching an endpoint counts
        assert!(s.intersects(&Segment::new(Vec2::new(10.0, 0.0), Vec2::new(12.0, 3.0))));
        assert!(s.intersects(&Segment::new(Vec2::new(5.0, 0.0), Vec2::new(5.0, 3.0))));
        assert!(!s.intersects(&Segment::new(Vec2::new(5.0, 0.5), Vec2::new(5.0, 3.0))));
        // collinear, disjoint
        assert!(!s.intersects(&Segment::new(Vec2::new(11.0, 0.0), Vec2::new(12.0, 0.0))));
        // collinear, overlapping
        assert!(s.intersects(&Segment::new(Vec2::new(9.0, 0.0), Vec2::new(12.0, 0.0))));
    }

    #[test]
    fn closest_point_clamps() {
        let s = Segment::new(Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0));
        assert_eq!(s.closest_point(Vec2::new(-3.0, 4.0)), (Vec2::ZERO, 0.0));
        assert_eq!(s.closest_point(Vec2::new(4.0, 4.0)).0, Vec2::new(4.0, 0.0));
    }
}
