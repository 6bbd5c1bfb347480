//! Indoor multipath channel simulator.
//!
//! Specular paths come from first-order image sources of the wall-mounted
//! array; diffuse paths from single-bounce point scatterers on an ellipsoid.
//! All randomness is confined to scatterer-field and trajectory generation,
//! so an [`Environment`] maps positions to channels deterministically.

mod database;
mod environment;
mod geometry;
mod scatterers;
mod sources;
mod trajectory;

pub use database::{generate_database, CsiDatabase, CsiRecord};
pub use environment::{channel_at, ArrayLayout, Environment, EnvironmentConfig, SPEED_OF_LIGHT};
pub use geometry::{ArrayConfig, Axis, RoomGeometry, Vec3, WallPlane};
pub use scatterers::{
    dmc_response, sample_scatterer_field, Ellipsoid, RcsDistribution, ScattererField,
};
pub use sources::{build_image_sources, smc_response, ImageSource};
pub use trajectory::{generate_trajectory, sample_on_path, TrajectorySpec};

use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("zero propagation distance between {what}")]
    ZeroDistance { what: String },
    #[error("UE position {position:?} lies outside the room")]
    OutsideRoom { position: [f64; 3] },
    #[error("database must contain at least one record")]
    EmptyDatabase,
    #[error("malformed database: {0}")]
    Database(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
