use serde::{Deserialize, Serialize};

use super::ChannelError;
use crate::Scalar;

/// Point or displacement in meters.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(from = "[T; 3]")]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Self) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn axis(&self, axis: Axis) -> T {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    pub fn with_axis(mut self, axis: Axis, value: T) -> Self {
        match axis {
            Axis::X => self.x = value,
            Axis::Y => self.y = value,
            Axis::Z => self.z = value,
        }
        self
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn cast<U: Scalar>(&self) -> Vec3<U> {
        Vec3::new(
            U::lit(self.x.as_f64()),
            U::lit(self.y.as_f64()),
            U::lit(self.z.as_f64()),
        )
    }
}

impl<T: Serialize> Serialize for Vec3<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [&self.x, &self.y, &self.z].serialize(serializer)
    }
}

impl<T> From<[T; 3]> for Vec3<T> {
    fn from([x, y, z]: [T; 3]) -> Self {
        Self { x, y, z }
    }
}

impl<T> From<Vec3<T>> for [T; 3] {
    fn from(v: Vec3<T>) -> Self {
        [v.x, v.y, v.z]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// The two in-plane axes `(width, height)` of a wall with this normal.
    pub fn in_plane(self) -> (Axis, Axis) {
        match self {
            Axis::X => (Axis::Y, Axis::Z),
            Axis::Y => (Axis::X, Axis::Z),
            Axis::Z => (Axis::X, Axis::Y),
        }
    }
}

/// A planar wall surface `axis = offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallPlane<T> {
    pub axis: Axis,
    pub offset: T,
}

impl<T: Scalar> WallPlane<T> {
    /// Mirror image of `p` across this plane.
    pub fn reflect(&self, p: &Vec3<T>) -> Vec3<T> {
        let c = p.axis(self.axis);
        p.with_axis(self.axis, self.offset + self.offset - c)
    }
}

/// Axis-aligned box room `[origin, origin + dims]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoomGeometry<T> {
    pub width_x: T,
    pub depth_y: T,
    pub height_z: T,
    /// Minimum corner of the room.
    pub origin: Vec3<T>,
}

impl<T: Scalar> RoomGeometry<T> {
    pub fn new(width_x: T, depth_y: T, height_z: T, origin: Vec3<T>) -> Result<Self, ChannelError> {
        let room = Self {
            width_x,
            depth_y,
            height_z,
            origin,
        };
        room.validate()?;
        Ok(room)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let dims = [self.width_x, self.depth_y, self.height_z];
        if dims.iter().any(|d| !(d.is_finite() && *d > T::zero())) || !self.origin.is_finite() {
            return Err(ChannelError::Config(format!(
                "room dimensions must be finite and positive, got {:?}",
                dims
            )));
        }
        Ok(())
    }

    pub fn min_corner(&self) -> Vec3<T> {
        self.origin
    }

    pub fn max_corner(&self) -> Vec3<T> {
        Vec3::new(
            self.origin.x + self.width_x,
            self.origin.y + self.depth_y,
            self.origin.z + self.height_z,
        )
    }

    /// Inclusive containment with a tolerance of `1e-9` m.
    pub fn contains(&self, p: &Vec3<T>) -> bool {
        let tol = T::lit(1e-9);
        let (lo, hi) = (self.min_corner(), self.max_corner());
        Axis::ALL
            .iter()
            .all(|&a| p.axis(a) >= lo.axis(a) - tol && p.axis(a) <= hi.axis(a) + tol)
    }

    pub fn clamp(&self, p: &Vec3<T>) -> Vec3<T> {
        let (lo, hi) = (self.min_corner(), self.max_corner());
        let mut out = *p;
        for a in Axis::ALL {
            out = out.with_axis(a, p.axis(a).max(lo.axis(a)).min(hi.axis(a)));
        }
        out
    }

    /// The six wall planes: `x-min, x-max, y-min, y-max, z-min (floor), z-max (ceiling)`.
    pub fn walls(&self) -> [WallPlane<T>; 6] {
        let (lo, hi) = (self.min_corner(), self.max_corner());
        [
            WallPlane {
                axis: Axis::X,
                offset: lo.x,
            },
            WallPlane {
                axis: Axis::X,
                offset: hi.x,
            },
            WallPlane {
                axis: Axis::Y,
                offset: lo.y,
            },
            WallPlane {
                axis: Axis::Y,
                offset: hi.y,
            },
            WallPlane {
                axis: Axis::Z,
                offset: lo.z,
            },
            WallPlane {
                axis: Axis::Z,
                offset: hi.z,
            },
        ]
    }
}

/// Uniform rectangular array mounted flat on a wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig<T> {
    pub center: Vec3<T>,
    /// Wall normal; the array spans the two remaining axes.
    pub normal: Axis,
    pub width: T,
    pub height: T,
    pub spacing: T,
    pub wavelength: T,
}

impl<T: Scalar> ArrayConfig<T> {
    /// `nx × nz` half-wavelength array centered at `center`.
    pub fn half_wavelength(
        center: Vec3<T>,
        normal: Axis,
        nx: usize,
        nz: usize,
        wavelength: T,
    ) -> Self {
        let spacing = wavelength / T::lit(2.0);
        Self {
            center,
            normal,
            width: spacing * T::of_usize(nx.saturating_sub(1)),
            height: spacing * T::of_usize(nz.saturating_sub(1)),
            spacing,
            wavelength,
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let ok = |v: T| v.is_finite() && v >= T::zero();
        if !(ok(self.width) && ok(self.height) && self.center.is_finite()) {
            return Err(ChannelError::Config(
                "array extent must be finite and non-negative".into(),
            ));
        }
        if !(self.spacing.is_finite() && self.spacing > T::zero()) {
            return Err(ChannelError::Config(
                "antenna spacing must be positive".into(),
            ));
        }
        if !(self.wavelength.is_finite() && self.wavelength > T::zero()) {
            return Err(ChannelError::Config("wavelength must be positive".into()));
        }
        Ok(())
    }

    fn count_along(&self, extent: T) -> usize {
        // Tolerate extents that are an integer multiple of the spacing up to rounding.
        let ratio = extent / self.spacing + T::lit(1e-9);
        ratio.floor().to_usize().unwrap_or(0) + 1
    }

    /// Elements along the width and height directions.
    pub fn grid(&self) -> (usize, usize) {
        (self.count_along(self.width), self.count_along(self.height))
    }

    /// Number of antennas `M`.
    pub fn antenna_count(&self) -> usize {
        let (nw, nh) = self.grid();
        nw * nh
    }

    /// Antenna positions, width index fastest.
    pub fn antenna_positions(&self) -> Vec<Vec3<T>> {
        let (nw, nh) = self.grid();
        let (wa, ha) = self.normal.in_plane();
        let half = T::lit(0.5);
        let mut out = Vec::with_capacity(nw * nh);
        for ih in 0..nh {
            let dh = (T::of_usize(ih) - T::of_usize(nh - 1) * half) * self.spacing;
            for iw in 0..nw {
                let dw = (T::of_usize(iw) - T::of_usize(nw - 1) * half) * self.spacing;
                let p = self
                    .center
                    .with_axis(wa, self.center.axis(wa) + dw)
                    .with_axis(ha, self.center.axis(ha) + dh);
                out.push(p);
            }
        }
        out
    }
}
