use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::geometry::{ArrayConfig, RoomGeometry, Vec3, WallPlane};
use super::ChannelError;
use crate::numerics::CVector;
use crate::Scalar;

/// The physical array (`index == 0`) or one of its first-order wall mirrors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageSource<T> {
    /// 0 for the physical array, `1..` for mirror images.
    pub index: usize,
    /// Wall the array was mirrored across; `None` for the physical array.
    pub wall: Option<WallPlane<T>>,
    pub antennas: Vec<Vec3<T>>,
    pub gain: Complex<T>,
}

/// `exp(-j 2π d / λ)`, reducing `d/λ` modulo one before scaling by 2π.
#[inline]
pub(crate) fn propagation_phase<T: Scalar>(distance: T, wavelength: T) -> Complex<T> {
    let cycles = distance / wavelength;
    let frac = cycles - cycles.floor();
    let angle = -(T::TAU() * frac);
    Complex::new(angle.cos(), angle.sin())
}

/// Builds the physical source plus one mirror per wall, skipping the wall the
/// array is mounted on (its image would coincide with the array itself).
pub fn build_image_sources<T: Scalar>(
    room: &RoomGeometry<T>,
    array: &ArrayConfig<T>,
    reflection_gain_db: T,
) -> Result<Vec<ImageSource<T>>, ChannelError> {
    room.validate()?;
    array.validate()?;
    let tol = T::lit(1e-9);
    let walls = room.walls();
    let mount = walls
        .iter()
        .position(|w| w.axis == array.normal && (array.center.axis(w.axis) - w.offset).abs() <= tol)
        .ok_or_else(|| {
            ChannelError::Config(format!(
                "array center {:?} does not lie on a wall with normal {:?}",
                [array.center.x, array.center.y, array.center.z],
                array.normal
            ))
        })?;

    let physical = array.antenna_positions();
    if let Some(p) = physical.iter().find(|p| !room.contains(p)) {
        return Err(ChannelError::Config(format!(
            "antenna at {:?} lies outside the room",
            [p.x, p.y, p.z]
        )));
    }

    let magnitude = T::lit(10.0).powf(reflection_gain_db / T::lit(20.0));
    let mut sources = vec![ImageSource {
        index: 0,
        wall: None,
        antennas: physical.clone(),
        gain: Complex::new(T::one(), T::zero()),
    }];
    for (i, wall) in walls.iter().enumerate() {
        if i == mount {
            continue;
        }
        sources.push(ImageSource {
            index: sources.len(),
            wall: Some(*wall),
            antennas: physical.iter().map(|p| wall.reflect(p)).collect(),
            gain: Complex::new(magnitude, T::zero()),
        });
    }
    Ok(sources)
}

/// Specular component of one source: `λ/(4π d_m) · g · exp(-j2π d_m/λ)` per antenna.
pub fn smc_response<T: Scalar>(
    source: &ImageSource<T>,
    ue: &Vec3<T>,
    wavelength: T,
) -> Result<CVector<T>, ChannelError> {
    let four_pi = T::lit(4.0) * T::PI();
    let mut out = Vec::with_capacity(source.antennas.len());
    for (antenna, p) in source.antennas.iter().enumerate() {
        let d = p.distance(ue);
        if !(d > T::zero()) {
            return Err(ChannelError::ZeroDistance {
                what: format!("antenna {antenna} of source {}", source.index),
            });
        }
        let amplitude = wavelength / (four_pi * d);
        out.push(source.gain * propagation_phase(d, wavelength) * amplitude);
    }
    Ok(CVector::new(out)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::geometry::Axis;

    fn unit_source(antennas: Vec<Vec3<f64>>) -> ImageSource<f64> {
        ImageSource {
            index: 0,
            wall: None,
            antennas,
            gain: Complex::new(1.0, 0.0),
        }
    }

    #[test]
    fn six_sources_with_ceiling_mirror() {
        let room = RoomGeometry::new(5.0, 9.0, 3.5, Vec3::new(0.0, 0.0, 0.0)).unwrap();
        let array = ArrayConfig::half_wavelength(Vec3::new(2.5, 0.0, 1.0), Axis::Y, 4, 2, 0.125);
        let sources = build_image_sources(&room, &array, -3.0).unwrap();
        assert_eq!(sources.len(), 6);
        assert_eq!(sources[0].gain, Complex::new(1.0, 0.0));
        let expected = 10f64.powf(-3.0 / 20.0);
        for s in &sources[1..] {
            assert!((s.gain.norm() - expected).abs() < 1e-15);
            assert!((s.gain.norm() - 0.7079).abs() < 1e-4);
        }
        let ceiling = sources
            .iter()
            .find(|s| {
                s.wall
                    == Some(WallPlane {
                        axis: Axis::Z,
                        offset: 3.5,
                    })
            })
            .unwrap();
        for (img, phys) in ceiling.antennas.iter().zip(&sources[0].antennas) {
            assert_eq!(img.z, 7.0 - phys.z);
            assert_eq!((img.x, img.y), (phys.x, phys.y));
        }
        assert!(sources.iter().all(|s| s.wall
            != Some(WallPlane {
                axis: Axis::Y,
                offset: 0.0
            })));
    }

    #[test]
    fn array_off_wall_is_rejected() {
        let room = RoomGeometry::new(5.0, 9.0, 3.5, Vec3::new(0.0, 0.0, 0.0)).unwrap();
        let array = ArrayConfig::half_wavelength(Vec3::new(2.5, 1.0, 1.0), Axis::Y, 4, 2, 0.125);
        assert!(matches!(
            build_image_sources(&room, &array, -3.0),
            Err(ChannelError::Config(_))
        ));
    }

    #[test]
    fn one_wavelength_entry() {
        let lambda = 0.125;
        let s = unit_source(vec![Vec3::new(0.0, 0.0, 0.0)]);
        let h = smc_response(&s, &Vec3::new(lambda, 0.0, 0.0), lambda).unwrap();
        assert!((h[0].norm() - 1.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-15);
        assert!(h[0].im.abs() < 1e-15 && h[0].re > 0.0);
    }

    #[test]
    fn inverse_distance_law_and_numeric_value() {
        let lambda = 0.125;
        let s = unit_source(vec![Vec3::new(0.0, 0.0, 0.0)]);
        let h1 = smc_response(&s, &Vec3::new(1.0, 0.0, 0.0), lambda).unwrap();
        let h2 = smc_response(&s, &Vec3::new(2.0, 0.0, 0.0), lambda).unwrap();
        assert!((h1[0].norm() - 9.947183943243459e-3).abs() < 1e-15);
        assert!((h1[0].norm() / h2[0].norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_distance_errors() {
        let s = unit_source(vec![Vec3::new(1.0, 1.0, 1.0)]);
        assert!(matches!(
            smc_response(&s, &Vec3::new(1.0, 1.0, 1.0), 0.125),
            Err(ChannelError::ZeroDistance { .. })
        ));
    }
}
