//! Repeated, printable surface textures on triangle meshes.
//!
//! The pipeline: pick a surface region under a cursor ([`region`]), map 2D
//! element outlines onto it ([`surface_map`]), grow demonstrated placements
//! into full patterns ([`pattern`]), and cut the result into a watertight
//! solid ([`texture`]). [`workbench`] wraps all of it in an undoable,
//! replayable command log.

pub mod config;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod mesh;
pub mod pattern;
pub mod region;
pub mod surface_map;
pub mod texture;
pub mod workbench;

pub use error::{Error, ErrorClass};
pub use exec::Execution;
pub use mesh::{Point, TriangleMesh, Vector};
