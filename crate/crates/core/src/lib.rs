//! Flat cone geometry on 1/n-translation surfaces.
//!
//! A 1/n-translation surface is glued from planar polygons by isometries of
//! the form `v ↦ R_{2πk/n} v + t`. The regular part carries a Euclidean
//! metric; vertex classes whose total angle exceeds 2π are cone points and
//! make the metric locally CAT(0).
//!
//! The crate builds such surfaces from gluing data ([`surface`]), tightens
//! closed curves to CAT(0) geodesic representatives ([`geodesic`]), evaluates
//! compatible Finsler lengths and decomposes Z/n-invariant polygonal norms
//! into direction measures ([`norm`]), traces straight leaves of
//! multi-foliations ([`foliation`]) and assembles the length identity between
//! Finsler length and weighted θ-lengths ([`current`]).
//!
//! The crate is `no_std`-compatible (`alloc` required); disable the default
//! `std` feature and enable `libm` for the float intrinsics.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("flatcur-core requires either the `std` or the `libm` feature");

pub mod current;
pub mod fixtures;
pub mod foliation;
pub mod funnel;
pub mod geodesic;
pub mod geom;
pub mod norm;
pub mod rng;
pub mod surface;

pub use geom::{Iso, Rot, Vec2};
pub use surface::{SurfaceComplex, SurfaceSpec, Tolerances};
