use serde::{Deserialize, Serialize};

use crate::geom::{Segment, Vec2};

use super::NetworkError;

/// Arc-length parameterized polyline used as a lane reference curve.
///
/// Control points are joined by straight segments, so nearest-point and
/// tangent queries are exact. Smooth curves are represented by densifying the
/// control points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec2>", into = "Vec<Vec2>")]
pub struct Spline {
    points: Vec<Vec2>,
    cumulative: Vec<f64>,
}

/// Result of a closest-point query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nearest {
    /// Arc length of the closest point.
    pub s: f64,
    pub point: Vec2,
    pub distance: f64,
}

impl Spline {
    pub fn new(points: Vec<Vec2>) -> Result<Self, NetworkError> {
        if points.len() < 2 {
            return Err(NetworkError::Spline(format!(
                "need at least 2 control points, got {}",
                points.len()
            )));
        }
        let mut cumulative = Vec::with_capacity(points.len());
        cumulative.push(0.0);
        for (i, w) in points.windows(2).enumerate() {
            if !w[0].is_finite() || !w[1].is_finite() {
                return Err(NetworkError::Spline("non-finite control point".into()));
            }
            let d = w[0].distance(w[1]);
            if d == 0.0 {
                return Err(NetworkError::Spline(format!(
                    "control points {} and {} coincide",
                    i,
                    i + 1
                )));
            }
            cumulative.push(cumulative[i] + d);
        }
        Ok(Spline { points, cumulative })
    }

    /// Builds a spline after dropping consecutive duplicate points.
    pub fn from_points_dedup(points: impl IntoIterator<Item = Vec2>) -> Result<Self, NetworkError> {
        let mut pts: Vec<Vec2> = Vec::new();
        for p in points {
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        Spline::new(pts)
    }

    /// Joins splines end to end. A gap between one spline's end and the next
    /// one's start becomes a straight connecting segment.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Spline>) -> Result<Self, NetworkError> {
        Spline::from_points_dedup(parts.into_iter().flat_map(|s| s.points.iter().copied()))
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn cumulative_arc_length(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().expect("spline has points")
    }

    pub fn start(&self) -> Vec2 {
        self.points[0]
    }

    pub fn end(&self) -> Vec2 {
        *self.points.last().expect("spline has points")
    }

    pub fn segment_count(&self) -> usize {
        self.points.len() - 1
    }

    pub fn segment(&self, i: usize) -> Segment {
        Segment::new(self.points[i], self.points[i + 1])
    }

    /// Closest point on the curve to `p`; ties resolve to the smaller arc length.
    pub fn nearest(&self, p: Vec2) -> Nearest {
        self.nearest_in_range(p, 0.0, self.length())
    }

    /// Closest point restricted to arc lengths in `[s_lo, s_hi]`.
    pub fn nearest_in_range(&self, p: Vec2, s_lo: f64, s_hi: f64) -> Nearest {
        let s_lo = s_lo.clamp(0.0, self.length());
        let s_hi = s_hi.clamp(s_lo, self.length());
        let first = self.segment_at(s_lo);
        let mut best: Option<Nearest> = None;
        for i in first..self.segment_count() {
            let seg_start = self.cumulative[i];
            if seg_start > s_hi {
                break;
            }
            let seg_len = self.cumulative[i + 1] - seg_start;
            let t_lo = ((s_lo - seg_start) / seg_len).clamp(0.0, 1.0);
            let t_hi = ((s_hi - seg_start) / seg_len).clamp(0.0, 1.0);
            let (_, t) = self.segment(i).closest_point(p);
            let t = t.clamp(t_lo, t_hi);
            let q = self.points[i].lerp(self.points[i + 1], t);
            let cand = Nearest {
                s: seg_start + t * seg_len,
                point: q,
                distance: p.distance(q),
            };
            if best.is_none_or(|b| cand.distance < b.distance) {
                best = Some(cand);
            }
        }
        best.expect("range covers at least one segment")
    }

    /// Index of the segment containing arc length `s` (clamped to the curve).
    pub fn segment_at(&self, s: f64) -> usize {
        let last = self.segment_count() - 1;
        // first index with cumulative > s, minus one
        let idx = self.cumulative.partition_point(|&c| c <= s);
        idx.saturating_sub(1).min(last)
    }

    /// Point at arc length `s`, clamped to the curve's extent.
    pub fn point_at(&self, s: f64) -> Vec2 {
        let s = s.clamp(0.0, self.length());
        let i = self.segment_at(s);
        let seg_len = self.cumulative[i + 1] - self.cumulative[i];
        let t = ((s - self.cumulative[i]) / seg_len).clamp(0.0, 1.0);
        self.points[i].lerp(self.points[i + 1], t)
    }

    fn direction(&self, i: usize) -> Vec2 {
        (self.points[i + 1] - self.points[i]) / (self.cumulative[i + 1] - self.cumulative[i])
    }

    /// Unit tangent at arc length `s`.
    ///
    /// At an interior vertex this is the normalized mean of the two adjacent
    /// segment directions.
    pub fn tangent(&self, s: f64) -> Result<Vec2, NetworkError> {
        if !(0.0..=self.length()).contains(&s) {
            return Err(NetworkError::ArcLengthOutOfRange { s, length: self.length() });
        }
        Ok(self.tangent_clamped(s))
    }

    /// Like [`Spline::tangent`] but clamps `s` instead of failing.
    pub fn tangent_clamped(&self, s: f64) -> Vec2 {
        let s = s.clamp(0.0, self.length());
        let n = self.points.len();
        if let Ok(v) = self.cumulative[1..n - 1].binary_search_by(|c| c.total_cmp(&s)) {
            let vertex = v + 1;
            let incoming = self.direction(vertex - 1);
            let outgoing = self.direction(vertex);
            // a full reversal has no mean direction; keep the incoming one
            return (incoming + outgoing).normalized().unwrap_or(incoming);
        }
        self.direction(self.segment_at(s))
    }

    /// Heading change (radians, unsigned) at each interior vertex, paired with its arc length.
    pub fn vertex_turns(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (1..self.points.len() - 1).map(move |v| {
            let a = self.direction(v - 1);
            let b = self.direction(v);
            (self.cumulative[v], crate::geom::signed_angle(a, b).abs())
        })
    }
}

impl TryFrom<Vec<Vec2>> for Spline {
    type Error = NetworkError;
    fn try_from(points: Vec<Vec2>) -> Result<Self, Self::Error> {
        Spline::new(points)
    }
}

impl From<Spline> for Vec<Vec2> {
    fn from(s: Spline) -> Self {
        s.points
    }
}
