//! The `specular` guide. Each module holds one chapter of the book so that
//! the Rust snippets in it compile and run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/geometry.md")]
pub mod geometry {}

#[doc = include_str!("../../../book/src/characteristics.md")]
pub mod characteristics {}

#[doc = include_str!("../../../book/src/shift-frames.md")]
pub mod shift_frames {}

#[doc = include_str!("../../../book/src/singularities.md")]
pub mod singularities {}

#[doc = include_str!("../../../book/src/collision.md")]
pub mod collision {}

#[doc = include_str!("../../../book/src/kinetic.md")]
pub mod kinetic {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../book/src/findings.md")]
pub mod findings {}
