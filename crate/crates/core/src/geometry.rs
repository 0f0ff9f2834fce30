//! Positions in meters and deterministic point sets on spheres and balls.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A position in meters, stored in Cartesian form.
///
/// Serializes as a three-element array `[x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Spherical view of a [`Point3`]: `theta` is the polar angle in `[0, π]`,
/// `phi` the azimuth in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spherical {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_spherical(r: f64, theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self::new(r * st * cp, r * st * sp, r * ct)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        (*self - *other).norm()
    }

    pub fn dot(&self, other: &Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn to_spherical(&self) -> Spherical {
        cart_to_sph(*self)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        p.to_array()
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Converts to `(r, theta, phi)`. The origin maps to `(0, 0, 0)`.
pub fn cart_to_sph(p: Point3) -> Spherical {
    let r = p.norm();
    if r == 0.0 {
        return Spherical { r: 0.0, theta: 0.0, phi: 0.0 };
    }
    let theta = (p.z / r).clamp(-1.0, 1.0).acos();
    let mut phi = p.y.atan2(p.x);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    // atan2 of a tiny negative y can round up to exactly 2π
    if phi >= 2.0 * PI {
        phi = 0.0;
    }
    Spherical { r, theta, phi }
}

/// Fibonacci lattice of `count` points on the sphere of `radius` about `center`.
///
/// A single point is placed at the north pole.
pub fn sphere_points(radius: f64, count: usize, center: Point3) -> Vec<Point3> {
    if count == 1 {
        return vec![center + Point3::new(0.0, 0.0, radius)];
    }
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let theta = z.clamp(-1.0, 1.0).acos();
            let phi = (golden_angle * i as f64).rem_euclid(2.0 * PI);
            center + Point3::from_spherical(radius, theta, phi)
        })
        .collect()
}

/// Seeded uniform points in the closed ball, by rejection from the bounding cube.
pub fn ball_points(radius: f64, count: usize, center: Point3, seed: u64) -> Vec<Point3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = Point3::new(
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        );
        if p.norm() <= 1.0 {
            out.push(center + p * radius);
        }
    }
    out
}
