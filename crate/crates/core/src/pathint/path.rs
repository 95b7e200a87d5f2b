use std::f64::consts::PI;

use super::PathError;
use crate::numcore::Complex;

/// Endpoint matching tolerance between consecutive segments.
pub const JOIN_TOL: f64 = 1e-12;

/// One piece of a path, parameterized by s ∈ [0, 1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PathSegment {
    Line { start: Complex, end: Complex },
    /// center + radius·e^{iθ}, θ running from `angle_from` to `angle_to`;
    /// a positive sweep is counterclockwise.
    Arc { center: Complex, radius: f64, angle_from: f64, angle_to: f64 },
}

impl PathSegment {
    pub fn line(start: Complex, end: Complex) -> Result<Self, PathError> {
        if start == end {
            return Err(PathError::DegenerateLine);
        }
        Ok(PathSegment::Line { start, end })
    }

    pub fn arc(center: Complex, radius: f64, angle_from: f64, angle_to: f64) -> Result<Self, PathError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(PathError::BadRadius(radius));
        }
        let sweep = angle_to - angle_from;
        if sweep.abs() > 2.0 * PI + 1e-12 {
            return Err(PathError::SweepTooLarge(sweep));
        }
        Ok(PathSegment::Arc { center, radius, angle_from, angle_to })
    }

    /// Full counterclockwise circle starting at angle `angle_from`.
    pub fn circle(center: Complex, radius: f64, angle_from: f64) -> Result<Self, PathError> {
        Self::arc(center, radius, angle_from, angle_from + 2.0 * PI)
    }

    pub fn point(&self, s: f64) -> Complex {
        match *self {
            PathSegment::Line { start, end } => start + (end - start) * s,
            PathSegment::Arc { center, radius, angle_from, angle_to } => {
                center + Complex::from_polar(radius, angle_from + s * (angle_to - angle_from))
            }
        }
    }

    /// dγ/ds.
    pub fn tangent(&self, s: f64) -> Complex {
        match *self {
            PathSegment::Line { start, end } => end - start,
            PathSegment::Arc { radius, angle_from, angle_to, .. } => {
                let sweep = angle_to - angle_from;
                Complex::new(0.0, sweep) * Complex::from_polar(radius, angle_from + s * sweep)
            }
        }
    }

    pub fn start(&self) -> Complex {
        self.point(0.0)
    }

    pub fn end(&self) -> Complex {
        self.point(1.0)
    }

    pub fn reversed(&self) -> Self {
        match *self {
            PathSegment::Line { start, end } => PathSegment::Line { start: end, end: start },
            PathSegment::Arc { center, radius, angle_from, angle_to } => {
                PathSegment::Arc { center, radius, angle_from: angle_to, angle_to: angle_from }
            }
        }
    }

    /// Euclidean distance from `z` to the segment.
    pub fn distance_to(&self, z: Complex) -> f64 {
        match *self {
            PathSegment::Line { start, end } => {
                let d = end - start;
                let s = (((z - start) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
                (start + d * s - z).norm()
            }
            PathSegment::Arc { center, radius, angle_from, angle_to } => {
                let rel = z - center;
                let (lo, hi) = if angle_to >= angle_from { (angle_from, angle_to) } else { (angle_to, angle_from) };
                let endpoints = (self.start() - z).norm().min((self.end() - z).norm());
                if rel.norm() == 0.0 {
                    return radius;
                }
                // is the direction of z inside the swept angular range?
                let mut theta = rel.arg();
                while theta < lo {
                    theta += 2.0 * PI;
                }
                if theta <= hi {
                    (rel.norm() - radius).abs()
                } else {
                    endpoints
                }
            }
        }
    }

    /// Angle swept by z − p along this segment (winding contribution × 2π).
    fn swept_angle(&self, p: Complex) -> f64 {
        // fine enough that consecutive points never differ by more than π in arg
        let n = 64;
        let mut total = 0.0;
        let mut prev = self.point(0.0) - p;
        for k in 1..=n {
            let cur = self.point(k as f64 / n as f64) - p;
            total += (cur / prev).arg();
            prev = cur;
        }
        total
    }
}

/// Ordered, connected sequence of segments.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    segments: Vec<PathSegment>,
}

impl Path {
    pub fn new(segments: Vec<PathSegment>) -> Result<Self, PathError> {
        if segments.is_empty() {
            return Err(PathError::Empty);
        }
        for (k, w) in segments.windows(2).enumerate() {
            let gap = (w[0].end() - w[1].start()).norm();
            if gap > JOIN_TOL * (1.0 + w[0].end().norm()) {
                return Err(PathError::Discontinuous { index: k + 1, gap });
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.segments
    }

    pub fn start(&self) -> Complex {
        self.segments[0].start()
    }

    pub fn end(&self) -> Complex {
        self.segments[self.segments.len() - 1].end()
    }

    pub fn is_closed(&self) -> bool {
        (self.start() - self.end()).norm() <= JOIN_TOL * (1.0 + self.start().norm())
    }

    pub fn reversed(&self) -> Self {
        Self { segments: self.segments.iter().rev().map(PathSegment::reversed).collect() }
    }

    /// Minimum distance from `z` to any point on the path.
    pub fn distance_to(&self, z: Complex) -> f64 {
        self.segments.iter().map(|s| s.distance_to(z)).fold(f64::INFINITY, f64::min)
    }

    /// Winding number of a closed path about `p`, rounded to the nearest integer.
    pub fn winding_number(&self, p: Complex) -> i64 {
        let total: f64 = self.segments.iter().map(|s| s.swept_angle(p)).sum();
        (total / (2.0 * PI)).round() as i64
    }

    /// Splits each line segment into two collinear halves.
    pub fn with_split_lines(&self) -> Self {
        let mut out = Vec::new();
        for seg in &self.segments {
            match *seg {
                PathSegment::Line { start, end } => {
                    let mid = (start + end) * 0.5;
                    out.push(PathSegment::Line { start, end: mid });
                    out.push(PathSegment::Line { start: mid, end });
                }
                arc => out.push(arc),
            }
        }
        Self { segments: out }
    }
}
