use rand::Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{ArrayConfig, Axis, RoomGeometry, Vec3};
use super::scatterers::{
    dmc_from_weights, sample_scatterer_field, weighted_receive_vector, Ellipsoid, RcsDistribution,
    ScattererField,
};
use super::sources::{build_image_sources, smc_response, ImageSource};
use super::ChannelError;
use crate::numerics::CVector;
use crate::Scalar;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Antenna array layout choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArrayLayout {
    /// `columns × rows` elements at half-wavelength spacing.
    Grid { columns: usize, rows: usize },
    /// Physical aperture filled at half-wavelength spacing.
    Aperture { width: f64, height: f64 },
}

/// Serializable description of the propagation environment; every length in
/// meters. Defaults reproduce the large-room scenario with a 32-element array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub room_dims: [f64; 3],
    pub room_origin: [f64; 3],
    pub carrier_hz: f64,
    pub array_center: [f64; 3],
    pub array_normal: Axis,
    pub array: ArrayLayout,
    pub reflection_gain_db: f64,
    pub ellipsoid_center: [f64; 3],
    pub ellipsoid_semi_axes: [f64; 3],
    /// Expected scatterers per m³ of ellipsoid volume.
    pub scatterer_density: f64,
    pub rcs_mean_cm2: f64,
    pub rcs_variance_cm4: f64,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        Self {
            room_dims: [5.0, 9.0, 3.5],
            room_origin: [2.5, 0.0, 0.0],
            carrier_hz: 2.4e9,
            array_center: [5.0, 0.0, 1.0],
            array_normal: Axis::Y,
            array: ArrayLayout::Grid {
                columns: 8,
                rows: 4,
            },
            reflection_gain_db: -3.0,
            ellipsoid_center: [5.0, 8.75, 1.0],
            ellipsoid_semi_axes: [1.5, 0.5, 1.5],
            scatterer_density: 10.0,
            rcs_mean_cm2: 100.0 * std::f64::consts::PI,
            rcs_variance_cm4: 20.0 * std::f64::consts::PI,
        }
    }
}

impl EnvironmentConfig {
    /// The full 2.5 m × 1.5 m aperture.
    pub fn full_aperture() -> Self {
        Self {
            array: ArrayLayout::Aperture {
                width: 2.5,
                height: 1.5,
            },
            ..Self::default()
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn room<T: Scalar>(&self) -> Result<RoomGeometry<T>, ChannelError> {
        let [w, d, h] = self.room_dims.map(T::lit);
        RoomGeometry::new(w, d, h, Vec3::from(self.room_origin.map(T::lit)))
    }

    pub fn array_config<T: Scalar>(&self) -> Result<ArrayConfig<T>, ChannelError> {
        if !(self.carrier_hz.is_finite() && self.carrier_hz > 0.0) {
            return Err(ChannelError::Config(
                "carrier frequency must be positive".into(),
            ));
        }
        let wavelength = T::lit(self.wavelength());
        let center = Vec3::from(self.array_center.map(T::lit));
        let array = match self.array {
            ArrayLayout::Grid { columns, rows } => {
                if columns == 0 || rows == 0 {
                    return Err(ChannelError::Config(
                        "array grid must have at least one element".into(),
                    ));
                }
                ArrayConfig::half_wavelength(center, self.array_normal, columns, rows, wavelength)
            }
            ArrayLayout::Aperture { width, height } => ArrayConfig {
                center,
                normal: self.array_normal,
                width: T::lit(width),
                height: T::lit(height),
                spacing: wavelength / T::lit(2.0),
                wavelength,
            },
        };
        array.validate()?;
        Ok(array)
    }

    pub fn rcs(&self) -> RcsDistribution {
        RcsDistribution {
            mean: self.rcs_mean_cm2 * 1e-4,
            variance: self.rcs_variance_cm4 * 1e-8,
        }
    }

    pub fn ellipsoid<T: Scalar>(&self) -> Ellipsoid<T> {
        Ellipsoid {
            center: Vec3::from(self.ellipsoid_center.map(T::lit)),
            semi_axes: Vec3::from(self.ellipsoid_semi_axes.map(T::lit)),
        }
    }

    /// Builds the deterministic geometry and draws the scatterer field.
    pub fn build<T: Scalar, R: Rng + ?Sized>(
        &self,
        rng: &mut R,
    ) -> Result<Environment<T>, ChannelError> {
        let room = self.room::<T>()?;
        let array = self.array_config::<T>()?;
        let sources = build_image_sources(&room, &array, T::lit(self.reflection_gain_db))?;
        let field = sample_scatterer_field(
            self.ellipsoid::<T>(),
            self.scatterer_density,
            self.rcs(),
            rng,
        )?;
        Ok(Environment {
            room,
            array,
            sources,
            field,
            wavelength: array.wavelength,
        })
    }
}

/// Fully determined propagation environment: position → channel vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment<T> {
    pub room: RoomGeometry<T>,
    pub array: ArrayConfig<T>,
    pub sources: Vec<ImageSource<T>>,
    pub field: ScattererField<T>,
    pub wavelength: T,
}

impl<T: Scalar> Environment<T> {
    pub fn antenna_count(&self) -> usize {
        self.sources.first().map_or(0, |s| s.antennas.len())
    }

    /// Channel at `ue`: all specular components plus all diffuse components,
    /// the latter sharing one scatterer field.
    pub fn channel_at(&self, ue: &Vec3<T>) -> Result<CVector<T>, ChannelError> {
        channel_at(ue, self)
    }
}

pub fn channel_at<T: Scalar>(
    ue: &Vec3<T>,
    env: &Environment<T>,
) -> Result<CVector<T>, ChannelError> {
    if !env.room.contains(ue) {
        return Err(ChannelError::OutsideRoom {
            position: [ue.x.as_f64(), ue.y.as_f64(), ue.z.as_f64()],
        });
    }
    let mut h = CVector::zeros(env.antenna_count());
    let one = num_complex::Complex::new(T::one(), T::zero());
    for source in &env.sources {
        h.axpy(one, &smc_response(source, ue, env.wavelength)?)?;
    }
    if !env.field.is_empty() {
        let weights = weighted_receive_vector(&env.field, ue, env.wavelength)?;
        for source in &env.sources {
            h.axpy(
                one,
                &dmc_from_weights(source, &env.field, &weights, env.wavelength)?,
            )?;
        }
    }
    Ok(h)
}
