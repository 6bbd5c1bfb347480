use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::geometry::{RoomGeometry, Vec3};
use super::ChannelError;
use crate::Scalar;

/// UE path on a horizontal plane. Gaussian noise is added to the horizontal
/// coordinates of every point and the result is clamped into the room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySpec {
    Circular {
        center: [f64; 2],
        radius: f64,
        points: usize,
        noise_std: f64,
        z: f64,
    },
    /// Serpentine sweep: `y` advances linearly across `y_range` while `x`
    /// bounces `passes` times across `x_range`.
    Zigzag {
        x_range: [f64; 2],
        y_range: [f64; 2],
        passes: usize,
        points: usize,
        noise_std: f64,
        z: f64,
    },
}

impl TrajectorySpec {
    pub fn circular_default() -> Self {
        TrajectorySpec::Circular {
            center: [5.0, 4.5],
            radius: 2.0,
            points: 1000,
            noise_std: 0.05,
            z: 0.0,
        }
    }

    pub fn zigzag_default() -> Self {
        TrajectorySpec::Zigzag {
            x_range: [3.25, 6.75],
            y_range: [1.0, 7.5],
            passes: 8,
            points: 2000,
            noise_std: 0.05,
            z: 0.0,
        }
    }

    pub fn points(&self) -> usize {
        match *self {
            TrajectorySpec::Circular { points, .. } | TrajectorySpec::Zigzag { points, .. } => {
                points
            }
        }
    }

    pub fn with_points(mut self, n: usize) -> Self {
        match &mut self {
            TrajectorySpec::Circular { points, .. } | TrajectorySpec::Zigzag { points, .. } => {
                *points = n
            }
        }
        self
    }

    pub fn noise_std(&self) -> f64 {
        match *self {
            TrajectorySpec::Circular { noise_std, .. }
            | TrajectorySpec::Zigzag { noise_std, .. } => noise_std,
        }
    }

    fn z(&self) -> f64 {
        match *self {
            TrajectorySpec::Circular { z, .. } | TrajectorySpec::Zigzag { z, .. } => z,
        }
    }

    /// Noise-free position at path parameter `u ∈ [0, 1)`.
    pub fn nominal(&self, u: f64) -> [f64; 3] {
        match *self {
            TrajectorySpec::Circular {
                center, radius, z, ..
            } => {
                let theta = std::f64::consts::TAU * u;
                [
                    center[0] + radius * theta.cos(),
                    center[1] + radius * theta.sin(),
                    z,
                ]
            }
            TrajectorySpec::Zigzag {
                x_range,
                y_range,
                passes,
                z,
                ..
            } => {
                let phase = u * passes as f64;
                let leg = phase.floor();
                let frac = phase - leg;
                let s = if (leg as u64).is_multiple_of(2) {
                    frac
                } else {
                    1.0 - frac
                };
                [
                    x_range[0] + (x_range[1] - x_range[0]) * s,
                    y_range[0] + (y_range[1] - y_range[0]) * u,
                    z,
                ]
            }
        }
    }

    pub fn validate<T: Scalar>(&self, room: &RoomGeometry<T>) -> Result<(), ChannelError> {
        if self.points() == 0 {
            return Err(ChannelError::Config(
                "trajectory needs at least one point".into(),
            ));
        }
        let noise = self.noise_std();
        if !(noise.is_finite() && noise >= 0.0) {
            return Err(ChannelError::Config(
                "trajectory noise std must be non-negative".into(),
            ));
        }
        let (lo, hi) = (
            room.min_corner().cast::<f64>(),
            room.max_corner().cast::<f64>(),
        );
        let (x, y) = match *self {
            TrajectorySpec::Circular { center, radius, .. } => {
                if !(radius.is_finite() && radius >= 0.0) {
                    return Err(ChannelError::Config(
                        "circle radius must be non-negative".into(),
                    ));
                }
                (
                    [center[0] - radius, center[0] + radius],
                    [center[1] - radius, center[1] + radius],
                )
            }
            TrajectorySpec::Zigzag {
                x_range,
                y_range,
                passes,
                ..
            } => {
                if passes == 0 {
                    return Err(ChannelError::Config(
                        "zigzag needs at least one pass".into(),
                    ));
                }
                (x_range, y_range)
            }
        };
        let z = self.z();
        let inside =
            |r: [f64; 2], a: f64, b: f64| r.iter().all(|v| v.is_finite() && *v >= a && *v <= b);
        if !(inside(x, lo.x, hi.x) && inside(y, lo.y, hi.y) && inside([z, z], lo.z, hi.z)) {
            return Err(ChannelError::Config(format!(
                "trajectory extent x {x:?}, y {y:?}, z {z} exceeds the room [{:?}, {:?}]",
                [lo.x, lo.y, lo.z],
                [hi.x, hi.y, hi.z]
            )));
        }
        Ok(())
    }

    fn perturb<T: Scalar, R: Rng + ?Sized>(
        &self,
        p: [f64; 3],
        room: &RoomGeometry<T>,
        rng: &mut R,
    ) -> Vec3<T> {
        let normal = Normal::new(0.0, self.noise_std()).expect("validated noise std");
        let dx = normal.sample(rng);
        let dy = normal.sample(rng);
        let q = Vec3::new(T::lit(p[0] + dx), T::lit(p[1] + dy), T::lit(p[2]));
        room.clamp(&q)
    }
}

/// `N` chronologically ordered positions, the `i`-th at path parameter `i/N`.
pub fn generate_trajectory<T: Scalar, R: Rng + ?Sized>(
    spec: &TrajectorySpec,
    room: &RoomGeometry<T>,
    rng: &mut R,
) -> Result<Vec<Vec3<T>>, ChannelError> {
    spec.validate(room)?;
    let n = spec.points();
    Ok((0..n)
        .map(|i| spec.perturb(spec.nominal(i as f64 / n as f64), room, rng))
        .collect())
}

/// A fresh position drawn uniformly along the path with the same noise model.
pub fn sample_on_path<T: Scalar, R: Rng + ?Sized>(
    spec: &TrajectorySpec,
    room: &RoomGeometry<T>,
    rng: &mut R,
) -> Result<Vec3<T>, ChannelError> {
    spec.validate(room)?;
    let u: f64 = rng.gen();
    Ok(spec.perturb(spec.nominal(u), room, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn room() -> RoomGeometry<f64> {
        RoomGeometry::new(5.0, 9.0, 3.5, Vec3::new(2.5, 0.0, 0.0)).unwrap()
    }

    #[test]
    fn noiseless_circle_quarter_points() {
        let spec = TrajectorySpec::Circular {
            center: [5.0, 4.5],
            radius: 2.0,
            points: 4,
            noise_std: 0.0,
            z: 0.0,
        };
        let pts = generate_trajectory(&spec, &room(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let expected = [(7.0, 4.5), (5.0, 6.5), (3.0, 4.5), (5.0, 2.5)];
        for (p, (x, y)) in pts.iter().zip(expected) {
            assert!((p.x - x).abs() < 1e-12 && (p.y - y).abs() < 1e-12 && p.z == 0.0);
        }
    }

    #[test]
    fn seeded_determinism_and_containment() {
        for spec in [
            TrajectorySpec::circular_default(),
            TrajectorySpec::zigzag_default(),
        ] {
            let a =
                generate_trajectory(&spec, &room(), &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
            let b =
                generate_trajectory(&spec, &room(), &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), spec.points());
            assert!(a.iter().all(|p| room().contains(p)));
        }
    }

    #[test]
    fn default_scale_point_counts() {
        assert_eq!(TrajectorySpec::circular_default().points(), 1000);
        assert_eq!(TrajectorySpec::zigzag_default().points(), 2000);
    }

    #[test]
    fn zigzag_bounces_between_x_limits() {
        let spec = TrajectorySpec::Zigzag {
            x_range: [3.0, 7.0],
            y_range: [1.0, 8.0],
            passes: 2,
            points: 4,
            noise_std: 0.0,
            z: 0.0,
        };
        let xs: Vec<f64> = (0..4).map(|i| spec.nominal(i as f64 / 4.0)[0]).collect();
        assert_eq!(xs, vec![3.0, 5.0, 7.0, 5.0]);
    }

    #[test]
    fn oversized_extent_rejected() {
        let spec = TrajectorySpec::Circular {
            center: [5.0, 4.5],
            radius: 3.0,
            points: 10,
            noise_std: 0.0,
            z: 0.0,
        };
        assert!(matches!(
            generate_trajectory(&spec, &room(), &mut ChaCha8Rng::seed_from_u64(0)),
            Err(ChannelError::Config(_))
        ));
        let empty = TrajectorySpec::circular_default().with_points(0);
        assert!(empty.validate(&room()).is_err());
    }
}
