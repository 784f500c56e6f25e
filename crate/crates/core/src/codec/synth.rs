use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::cloud::{RawPoint, RawPointCloud};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticShape {
    CubeShell,
    SphereShell,
    RandomUniform,
}

impl fmt::Display for SyntheticShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyntheticShape::CubeShell => "cube_shell",
            SyntheticShape::SphereShell => "sphere_shell",
            SyntheticShape::RandomUniform => "random_uniform",
        })
    }
}

impl FromStr for SyntheticShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cube_shell" => Ok(SyntheticShape::CubeShell),
            "sphere_shell" => Ok(SyntheticShape::SphereShell),
            "random_uniform" => Ok(SyntheticShape::RandomUniform),
            other => Err(Error::domain(format!("unknown synthetic shape `{other}`"))),
        }
    }
}

fn color_of(x: f64, y: f64, z: f64) -> [u8; 3] {
    let q = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    [q(x), q(y), q(z)]
}

/// Deterministic synthetic cloud inside the unit cube, colored by position.
///
/// `cube_shell` always starts with the eight cube corners; further points are
/// spread uniformly over the six faces.
pub fn gen_synthetic(shape: SyntheticShape, n_points: usize, seed: u64) -> Result<RawPointCloud> {
    if n_points == 0 {
        return Err(Error::domain("n_points must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n_points);
    match shape {
        SyntheticShape::CubeShell => {
            for i in 0..n_points.min(8) {
                let (x, y, z) = ((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64);
                points.push(RawPoint::new(x, y, z).with_color(color_of(x, y, z)));
            }
            while points.len() < n_points {
                let face: u8 = rng.gen_range(0..6);
                let (u, v): (f64, f64) = (rng.gen(), rng.gen());
                let fixed = (face & 1) as f64;
                let (x, y, z) = match face / 2 {
                    0 => (fixed, u, v),
                    1 => (u, fixed, v),
                    _ => (u, v, fixed),
                };
                points.push(RawPoint::new(x, y, z).with_color(color_of(x, y, z)));
            }
        }
        SyntheticShape::SphereShell => {
            for _ in 0..n_points {
                let cos_theta: f64 = rng.gen_range(-1.0..=1.0);
                let phi: f64 = rng.gen_range(0.0..TAU);
                let sin_theta = (1.0 - cos_theta * cos_theta).sqrt();
                let x = 0.5 + 0.5 * sin_theta * phi.cos();
                let y = 0.5 + 0.5 * sin_theta * phi.sin();
                let z = 0.5 + 0.5 * cos_theta;
                points.push(RawPoint::new(x, y, z).with_color(color_of(x, y, z)));
            }
        }
        SyntheticShape::RandomUniform => {
            for _ in 0..n_points {
                let (x, y, z): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
                points.push(RawPoint::new(x, y, z).with_color(color_of(x, y, z)));
            }
        }
    }
    Ok(RawPointCloud::new(points))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_point_cube_is_corners() {
        let c = gen_synthetic(SyntheticShape::CubeShell, 8, 42).unwrap();
        assert_eq!(c.len(), 8);
        for p in &c.points {
            for v in [p.x, p.y, p.z] {
                assert!(v == 0.0 || v == 1.0);
            }
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = gen_synthetic(SyntheticShape::RandomUniform, 1000, 1).unwrap();
        let b = gen_synthetic(SyntheticShape::RandomUniform, 1000, 1).unwrap();
        let c = gen_synthetic(SyntheticShape::RandomUniform, 1000, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn points_stay_in_unit_cube() {
        for shape in [
            SyntheticShape::CubeShell,
            SyntheticShape::SphereShell,
            SyntheticShape::RandomUniform,
        ] {
            let c = gen_synthetic(shape, 500, 9).unwrap();
            assert!(c
                .points
                .iter()
                .all(|p| [p.x, p.y, p.z].iter().all(|v| (0.0..=1.0).contains(v))));
        }
    }

    #[test]
    fn zero_points_is_domain_error() {
        assert!(matches!(
            gen_synthetic(SyntheticShape::SphereShell, 0, 0),
            Err(Error::Domain(_))
        ));
    }
}
