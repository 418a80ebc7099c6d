//! Planar vectors, wall segments and the world rectangle.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Vec2 { x: c, y: s }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn get(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => panic!("axis {axis} out of range for a 2-D vector"),
        }
    }

    pub fn set(&mut self, axis: usize, value: f64) {
        match axis {
            0 => self.x = value,
            1 => self.y = value,
            _ => panic!("axis {axis} out of range for a 2-D vector"),
        }
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

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    Periodic,
    #[default]
    Reflective,
    Clamped,
}

impl BoundaryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryMode::Periodic => "periodic",
            BoundaryMode::Reflective => "reflective",
            BoundaryMode::Clamped => "clamped",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            BoundaryMode::Periodic => 0,
            BoundaryMode::Reflective => 1,
            BoundaryMode::Clamped => 2,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(BoundaryMode::Periodic),
            1 => Some(BoundaryMode::Reflective),
            2 => Some(BoundaryMode::Clamped),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub const fn new(a: Vec2, b: Vec2) -> Self {
        Segment { a, b }
    }
}

/// The world is the rectangle `[0, extent.x] x [0, extent.y]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldGeometry {
    pub extent: Vec2,
    pub boundary_mode: BoundaryMode,
    pub walls: Vec<Segment>,
}

impl WorldGeometry {
    pub fn new(extent: Vec2, boundary_mode: BoundaryMode, walls: Vec<Segment>) -> Self {
        WorldGeometry {
            extent,
            boundary_mode,
            walls,
        }
    }

    pub fn center(&self) -> Vec2 {
        self.extent * 0.5
    }

    /// Displacement `to - from`; minimum-image convention under periodic boundaries.
    #[inline]
    pub fn displacement(&self, from: Vec2, to: Vec2) -> Vec2 {
        let d = to - from;
        match self.boundary_mode {
            BoundaryMode::Periodic => Vec2::new(
                min_image(d.x, self.extent.x),
                min_image(d.y, self.extent.y),
            ),
            _ => d,
        }
    }

    /// Whether `p` satisfies the containment rule of the boundary mode:
    /// `[0, L)` per axis for periodic worlds, `[0, L]` otherwise.
    pub fn contains(&self, p: Vec2) -> bool {
        (0..2).all(|axis| {
            let v = p.get(axis);
            let l = self.extent.get(axis);
            match self.boundary_mode {
                BoundaryMode::Periodic => (0.0..l).contains(&v),
                _ => (0.0..=l).contains(&v),
            }
        })
    }

    /// The four faces of the world rectangle, counter-clockwise from the origin.
    pub fn faces(&self) -> [Segment; 4] {
        let (w, h) = (self.extent.x, self.extent.y);
        [
            Segment::new(Vec2::new(0.0, 0.0), Vec2::new(w, 0.0)),
            Segment::new(Vec2::new(w, 0.0), Vec2::new(w, h)),
            Segment::new(Vec2::new(w, h), Vec2::new(0.0, h)),
            Segment::new(Vec2::new(0.0, h), Vec2::new(0.0, 0.0)),
        ]
    }
}

#[inline]
fn min_image(d: f64, l: f64) -> f64 {
    d - l * (d / l).round()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_displacement_uses_minimum_image() {
        let w = WorldGeometry::new(Vec2::new(10.0, 10.0), BoundaryMode::Periodic, vec![]);
        let d = w.displacement(Vec2::new(9.5, 0.5), Vec2::new(0.5, 9.5));
        assert!((d.x - 1.0).abs() < 1e-12);
        assert!((d.y + 1.0).abs() < 1e-12);

        let r = WorldGeometry::new(Vec2::new(10.0, 10.0), BoundaryMode::Reflective, vec![]);
        let d = r.displacement(Vec2::new(9.5, 0.5), Vec2::new(0.5, 9.5));
        assert_eq!(d, Vec2::new(-9.0, 9.0));
    }

    #[test]
    fn containment_is_half_open_only_when_periodic() {
        let mut w = WorldGeometry::new(Vec2::new(10.0, 5.0), BoundaryMode::Periodic, vec![]);
        assert!(!w.contains(Vec2::new(10.0, 1.0)));
        assert!(w.contains(Vec2::new(0.0, 4.999)));
        w.boundary_mode = BoundaryMode::Clamped;
        assert!(w.contains(Vec2::new(10.0, 5.0)));
        assert!(!w.contains(Vec2::new(-1e-12, 1.0)));
    }
}
