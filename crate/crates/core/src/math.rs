//! Small shared vocabulary on top of nalgebra.

use nalgebra::{Matrix3, UnitQuaternion, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Quat = UnitQuaternion<f64>;

/// Axis-aligned box, inclusive on all faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    /// Tight box around `points`; `None` for an empty iterator.
    pub fn from_points<'a, I: IntoIterator<Item = &'a Vec3>>(points: I) -> Option<Self> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut b = Self::new(first, first);
        for p in it {
            b.extend(p);
        }
        Some(b)
    }

    pub fn extend(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb::new(self.min.inf(&other.min), self.max.sup(&other.max))
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    /// Grow every face outward by the matching component of `amount`.
    pub fn inflate(&self, amount: &Vec3) -> Aabb {
        Aabb::new(self.min - amount, self.max + amount)
    }

    /// Grow each axis by `fraction` of the largest extent, never by less than `min_margin`.
    pub fn inflate_fraction(&self, fraction: f64, min_margin: f64) -> Aabb {
        let m = (self.extent().max() * fraction).max(min_margin);
        self.inflate(&Vec3::repeat(m))
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    pub fn intersects(&self, other: &Aabb) -> bool {
        (0..3).all(|k| self.min[k] <= other.max[k] && other.min[k] <= self.max[k])
    }
}

/// One of the three coordinate axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn unit(self) -> Vec3 {
        Vec3::ith(self.index(), 1.0)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(format!("expected x, y or z, got '{other}'")),
        }
    }
}

/// Angle between two vectors in degrees, `0` if either is zero.
pub fn angle_between_deg(a: &Vec3, b: &Vec3) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.cross(b).norm().atan2(a.dot(b)).to_degrees()
}

/// Fixed-precision formatting that never prints a negative zero.
pub fn fmt_fixed(value: f64, decimals: usize) -> String {
    let s = format!("{:.*}", decimals, value);
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// `[a, b, c]` with fixed precision.
pub fn fmt_vec(v: &Vec3, decimals: usize) -> String {
    format!(
        "[{}, {}, {}]",
        fmt_fixed(v.x, decimals),
        fmt_fixed(v.y, decimals),
        fmt_fixed(v.z, decimals)
    )
}

/// Quaternion to `[w, x, y, z]`.
pub fn quat_to_wxyz(q: &Quat) -> [f64; 4] {
    let c = q.quaternion().coords;
    [c.w, c.x, c.y, c.z]
}

pub fn quat_from_wxyz(q: [f64; 4]) -> Quat {
    UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]))
}

/// Geodesic distance between two rotations in degrees.
pub fn rotation_distance_deg(a: &Quat, b: &Quat) -> f64 {
    rotation_angle_deg(&(a.inverse() * b))
}

/// Rotation angle in [0, 180] degrees, accurate near both ends.
pub fn rotation_angle_deg(q: &Quat) -> f64 {
    let c = q.quaternion().coords;
    (2.0 * c.xyz().norm().atan2(c.w.abs())).to_degrees()
}

/// Rotation taking unit vector `from` onto unit vector `to` with the smallest angle.
/// Antiparallel inputs rotate by 180° about an arbitrary perpendicular axis.
pub fn rotation_between(from: &Vec3, to: &Vec3) -> Quat {
    UnitQuaternion::rotation_between(from, to).unwrap_or_else(|| {
        let helper = if from.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let axis = nalgebra::Unit::new_normalize(from.cross(&helper));
        UnitQuaternion::from_axis_angle(&axis, std::f64::consts::PI)
    })
}
