//! Planar primitives: vectors, rotations, isometries, segment predicates.

use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

/// Chooses between libstd and libm implementations of the float methods the
/// crate needs, so the core stays `no_std`-compatible.
macro_rules! define_float_ext {
    ($(fn $name:ident(self $(,$arg:ident: $arg_ty:ty)*) -> $ret:ty => $lname:ident;)+) => {
        #[cfg(not(feature = "std"))]
        pub(crate) trait FloatExt: Sized {
            $(fn $name(self $(,$arg: $arg_ty)*) -> $ret;)+
            fn rem_euclid(self, rhs: Self) -> Self;
        }

        #[cfg(not(feature = "std"))]
        impl FloatExt for f64 {
            $(#[inline]
            fn $name(self $(,$arg: $arg_ty)*) -> $ret {
                libm::$lname(self $(,$arg as _)*)
            })+

            #[inline]
            fn rem_euclid(self, rhs: f64) -> f64 {
                let r = self % rhs;
                if r < 0.0 { r + libm::fabs(rhs) } else { r }
            }
        }
    };
}

define_float_ext! {
    fn sin(self) -> Self => sin;
    fn cos(self) -> Self => cos;
    fn atan2(self, other: Self) -> Self => atan2;
    fn hypot(self, other: Self) -> Self => hypot;
    fn round(self) -> Self => round;
}

pub const TAU: f64 = core::f64::consts::TAU;
pub const PI: f64 = core::f64::consts::PI;

/// A point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at `angle` radians from the positive x-axis.
    #[inline]
    pub fn from_angle(angle: f64) -> Self {
        Vec2::new(angle.cos(), angle.sin())
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product; positive when `other` is
    /// counterclockwise from `self`.
    #[inline]
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    #[inline]
    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    /// Rotation by π/2 counterclockwise.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    #[inline]
    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    #[inline]
    pub fn lerp(self, other: Vec2, t: f64) -> Vec2 {
        self + (other - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A rotation of the plane, stored as its cosine/sine pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rot {
    pub cos: f64,
    pub sin: f64,
}

impl Rot {
    pub const IDENTITY: Rot = Rot { cos: 1.0, sin: 0.0 };

    #[inline]
    pub fn from_angle(angle: f64) -> Rot {
        Rot { cos: angle.cos(), sin: angle.sin() }
    }

    /// Rotation by 2πk/n.
    pub fn fraction(k: u32, n: u32) -> Rot {
        debug_assert!(n > 0);
        Rot::from_angle(TAU * f64::from(k % n) / f64::from(n))
    }

    #[inline]
    pub fn apply(self, v: Vec2) -> Vec2 {
        Vec2::new(self.cos * v.x - self.sin * v.y, self.sin * v.x + self.cos * v.y)
    }

    #[inline]
    pub fn compose(self, other: Rot) -> Rot {
        Rot {
            cos: self.cos * other.cos - self.sin * other.sin,
            sin: self.sin * other.cos + self.cos * other.sin,
        }
    }

    #[inline]
    pub fn inverse(self) -> Rot {
        Rot { cos: self.cos, sin: -self.sin }
    }

    #[inline]
    pub fn angle(self) -> f64 {
        self.sin.atan2(self.cos)
    }
}

/// An orientation-preserving isometry `v ↦ R v + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Iso {
    pub rot: Rot,
    pub t: Vec2,
}

impl Iso {
    pub const IDENTITY: Iso = Iso { rot: Rot::IDENTITY, t: Vec2::ZERO };

    pub fn new(rot: Rot, t: Vec2) -> Iso {
        Iso { rot, t }
    }

    pub fn translation(t: Vec2) -> Iso {
        Iso { rot: Rot::IDENTITY, t }
    }

    #[inline]
    pub fn apply(self, v: Vec2) -> Vec2 {
        self.rot.apply(v) + self.t
    }

    #[inline]
    pub fn apply_dir(self, v: Vec2) -> Vec2 {
        self.rot.apply(v)
    }

    /// `self ∘ other`: apply `other` first.
    #[inline]
    pub fn compose(self, other: Iso) -> Iso {
        Iso { rot: self.rot.compose(other.rot), t: self.rot.apply(other.t) + self.t }
    }

    pub fn inverse(self) -> Iso {
        let inv = self.rot.inverse();
        Iso { rot: inv, t: -inv.apply(self.t) }
    }
}

/// Reduce an angle to `[0, 2π)`.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU { r - TAU } else { r }
}

/// Counterclockwise angle from direction `a` to direction `b`, in `[0, 2π)`.
#[inline]
pub fn ccw_angle(a: f64, b: f64) -> f64 {
    wrap_angle(b - a)
}

/// Unsigned angle between two nonzero vectors, in `[0, π]`.
pub fn angle_between(a: Vec2, b: Vec2) -> f64 {
    let c = a.cross(b).atan2(a.dot(b));
    c.abs()
}

/// Distance from `a` to the nearest multiple of `step` (both nonnegative).
pub fn dist_to_multiple(a: f64, step: f64) -> f64 {
    let r = a.rem_euclid(step);
    r.min(step - r)
}

/// Signed twice-area of the triangle `a b c`; positive when counterclockwise.
#[inline]
pub fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

/// Signed area of a polygon given by its vertex loop.
pub fn polygon_area(vertices: &[Vec2]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += vertices[i].cross(vertices[(i + 1) % n]);
    }
    0.5 * acc
}

/// Intersection of segments `a0 a1` and `b0 b1` as parameters `(s, t)` along
/// each; `None` when (nearly) parallel.
pub fn segment_intersection(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> Option<(f64, f64)> {
    let da = a1 - a0;
    let db = b1 - b0;
    let denom = da.cross(db);
    let scale = da.norm() * db.norm();
    if denom.abs() <= 1e-14 * scale {
        return None;
    }
    let d = b0 - a0;
    let s = d.cross(db) / denom;
    let t = d.cross(da) / denom;
    Some((s, t))
}

/// Test whether `p` lies inside (or within `tol` of the boundary of) the
/// convex counterclockwise polygon `verts`.
pub fn convex_contains(verts: &[Vec2], p: Vec2, tol: f64) -> bool {
    let n = verts.len();
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let e = b - a;
        if e.cross(p - a) < -tol * e.norm() {
            return false;
        }
    }
    true
}

/// Interior angle of a counterclockwise polygon at vertex `i`.
pub fn interior_angle(verts: &[Vec2], i: usize) -> f64 {
    let n = verts.len();
    let v = verts[i];
    let out = verts[(i + 1) % n] - v;
    let back = verts[(i + n - 1) % n] - v;
    ccw_angle(out.angle(), back.angle())
}
