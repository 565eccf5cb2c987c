//! The narrative guide lives in `book/` (mdBook). Each chapter is also
//! attached here as module documentation so `cargo test --doc` compiles and
//! runs every code snippet in the book, keeping prose and API in sync.
#![allow(unused)]

#[doc = include_str!("../../../book/src/overview.md")]
pub mod overview {}

#[doc = include_str!("../../../book/src/spaces.md")]
pub mod spaces {}

#[doc = include_str!("../../../book/src/stationary.md")]
pub mod stationary {}

#[doc = include_str!("../../../book/src/stepping.md")]
pub mod stepping {}

#[doc = include_str!("../../../book/src/diagnostics.md")]
pub mod diagnostics_guide {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
