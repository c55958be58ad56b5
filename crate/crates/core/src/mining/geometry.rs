use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

/// Sphere standing in for the surface seen by one camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec3,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec3, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::DegenerateGeometry(format!("invalid ball radius {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.radius.powi(3)
    }
}

/// Centroid and RMS distance of the points to it.
pub fn ball_approx(points: &[Vec3]) -> Result<Ball> {
    if points.len() < 2 {
        return Err(Error::DegenerateGeometry(format!(
            "a ball needs at least 2 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mut center = [0.0; 3];
    for p in points {
        for k in 0..3 {
            center[k] += p[k];
        }
    }
    center.iter_mut().for_each(|c| *c /= n);
    let msd = points.iter().map(|&p| dot3(sub(p, center), sub(p, center))).sum::<f64>() / n;
    if msd == 0.0 {
        return Err(Error::DegenerateGeometry("all points coincide".into()));
    }
    Ball::new(center, msd.sqrt())
}

/// Volume of the intersection of two balls.
pub fn intersection_volume(a: &Ball, b: &Ball) -> f64 {
    let d = norm3(sub(a.center, b.center));
    let (big, small) = if a.radius >= b.radius { (a.radius, b.radius) } else { (b.radius, a.radius) };
    if d >= big + small {
        return 0.0;
    }
    if d <= big - small {
        return 4.0 / 3.0 * PI * small.powi(3);
    }
    let (r_, r) = (big, small);
    PI * (r_ + r - d).powi(2) * (d * d + 2.0 * d * r - 3.0 * r * r + 2.0 * d * r_ + 6.0 * r * r_ - 3.0 * r_ * r_)
        / (12.0 * d)
}

pub fn sphere_iou(a: &Ball, b: &Ball) -> f64 {
    let inter = intersection_volume(a, b);
    let union = a.volume() + b.volume() - inter;
    (inter / union).clamp(0.0, 1.0)
}

pub const UNIT_TOLERANCE: f64 = 1e-3;

/// Angle between two unit vectors in degrees.
pub fn axis_angle(a: Vec3, b: Vec3) -> Result<f64> {
    for v in [a, b] {
        let n = norm3(v);
        if !((n - 1.0).abs() <= UNIT_TOLERANCE) {
            return Err(Error::invalid(format!("optical axis {v:?} has norm {n}, expected 1")));
        }
    }
    Ok(dot3(a, b).clamp(-1.0, 1.0).acos().to_degrees())
}
