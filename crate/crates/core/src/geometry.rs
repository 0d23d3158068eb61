//! Planar geometry behind the clinical measurements.
//!
//! Coordinates are pixels with `y` growing downward.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.norm_sq())
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Counter-clockwise rotation by `angle` radians about the origin.
    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = libm::sincos(angle);
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Self) -> Self {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Self) -> Self {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Self {
        Point2::new(self.x * k, self.y * k)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Self {
        Point2::new(-self.x, -self.y)
    }
}

/// Implicitly closed polygon with at least three finite vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Point2>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::param(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::param(format!("non-finite polygon vertex {p:?}")));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    /// Iterator over closed edges `(v[i], v[i+1 mod n])`.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace sum; positive for counter-clockwise order in a y-up frame.
    pub fn signed_area(&self) -> f64 {
        self.edges().map(|(a, b)| a.cross(b)).sum::<f64>() / 2.0
    }

    /// Even-odd point containment.
    pub fn contains(&self, p: Point2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn map(&self, f: impl Fn(Point2) -> Point2) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&p| f(p)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point2, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.is_finite() {
            return Err(Error::param(format!(
                "circle needs a finite centre and positive radius, got {center:?} r={radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    pub fn contains(&self, p: Point2) -> bool {
        (p - self.center).norm_sq() <= self.radius * self.radius
    }
}

/// Absolute shoelace area.
pub fn polygon_area(poly: &Polygon) -> f64 {
    libm::fabs(poly.signed_area())
}

/// Area of the region inside both the disc and the polygon.
///
/// Each polygon edge forms a triangle with the circle centre. The triangle is
/// split where the edge crosses the circle; pieces inside the circle count as
/// triangles and pieces outside count as circular sectors. Summing the signed
/// contributions over all edges gives the intersection area exactly.
pub fn circle_polygon_intersection_area(circle: &Circle, poly: &Polygon) -> Result<f64> {
    let area = polygon_area(poly);
    if !(area > 0.0) {
        return Err(Error::param("degenerate polygon with zero area"));
    }
    let total: f64 = poly
        .edges()
        .map(|(a, b)| edge_disc_area(a - circle.center, b - circle.center, circle.radius))
        .sum();
    Ok(libm::fabs(total).min(area).min(circle.area()))
}

/// Signed area of triangle (origin, a, b) intersected with the disc of
/// radius `r` at the origin.
fn edge_disc_area(a: Point2, b: Point2, r: f64) -> f64 {
    let r2 = r * r;
    let d = b - a;
    let dd = d.norm_sq();
    if dd == 0.0 {
        return 0.0;
    }
    // |a + t d|^2 = r^2  =>  dd t^2 + 2 (a.d) t + (|a|^2 - r^2) = 0
    let half_b = a.dot(d);
    let c = a.norm_sq() - r2;
    let disc = half_b * half_b - dd * c;
    let mut cuts: [f64; 4] = [0.0, 0.0, 0.0, 1.0];
    let mut n = 1;
    if disc > 0.0 {
        let s = libm::sqrt(disc);
        for t in [(-half_b - s) / dd, (-half_b + s) / dd] {
            if t > 0.0 && t < 1.0 {
                cuts[n] = t;
                n += 1;
            }
        }
    }
    cuts[n] = 1.0;
    let mut sum = 0.0;
    for w in cuts[..=n].windows(2) {
        let u = a + d * w[0];
        let v = a + d * w[1];
        let mid = a + d * ((w[0] + w[1]) / 2.0);
        if mid.norm_sq() <= r2 {
            sum += u.cross(v) / 2.0;
        } else {
            sum += r2 * libm::atan2(u.cross(v), u.dot(v)) / 2.0;
        }
    }
    sum
}

/// Closest point on segment `[a, b]` to `p`.
pub fn closest_point_on_segment(p: Point2, a: Point2, b: Point2) -> Point2 {
    let d = b - a;
    let dd = d.norm_sq();
    if dd == 0.0 {
        return a;
    }
    let t = ((p - a).dot(d) / dd).clamp(0.0, 1.0);
    a + d * t
}

/// How distance to a landmark chain is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    /// Nearest point anywhere on the chain's segments.
    #[default]
    Segment,
    /// Nearest chain vertex only.
    Vertex,
}

/// Minimum distance from `p` to the open polyline `chain`, with the point
/// realising it. Ties keep the earliest segment.
pub fn point_to_polyline_distance(p: Point2, chain: &[Point2]) -> Result<(f64, Point2)> {
    point_to_chain_distance(p, chain, DistanceMode::Segment)
}

pub fn point_to_chain_distance(
    p: Point2,
    chain: &[Point2],
    mode: DistanceMode,
) -> Result<(f64, Point2)> {
    if chain.len() < 2 {
        return Err(Error::param(format!(
            "polyline needs at least 2 points, got {}",
            chain.len()
        )));
    }
    let candidates: Vec<Point2> = match mode {
        DistanceMode::Segment => chain
            .windows(2)
            .map(|w| closest_point_on_segment(p, w[0], w[1]))
            .collect(),
        DistanceMode::Vertex => chain.to_vec(),
    };
    let mut best = (f64::INFINITY, candidates[0]);
    for q in candidates {
        let d = p.distance(q);
        if d < best.0 {
            best = (d, q);
        }
    }
    Ok(best)
}

/// Iris circle from the five-point convention (0 centre, 1 temporal rim,
/// 2 superior rim, 3 nasal rim, 4 inferior rim). The radius comes from the
/// horizontal rim pair only.
pub fn circle_from_iris_landmarks(iris: &[Point2; 5]) -> Result<Circle> {
    let diameter = iris[1].distance(iris[3]);
    if !(diameter > 1e-9) {
        return Err(Error::DegenerateIris(format!(
            "temporal and nasal rim points coincide at {:?}",
            iris[1]
        )));
    }
    Circle::new(iris[0], diameter / 2.0).map_err(|e| Error::DegenerateIris(format!("{e}")))
}
