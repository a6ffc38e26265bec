//! Retarded-time photography of relativistically moving point sets.
//!
//! A pinhole at rest at the origin of an inertial frame exposes its film at
//! `t = 0`. Every material point is imaged from the event at which its light
//! left to arrive exactly then. The crate builds scenes of two extended
//! objects, images them, and computes the contact regions of the two objects
//! (retarded, integrated, permanent, semi-permanent and photographed regions)
//! together with executable checks of the set relations between them.

pub mod error;
pub mod kinematics;
pub mod numeric;
pub mod optics;
pub mod regions;
pub mod render;
pub mod scenes;

pub use error::{Error, Result};
