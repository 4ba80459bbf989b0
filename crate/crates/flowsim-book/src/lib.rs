//! The guide's chapters, one module each, so `cargo test` runs every listing
//! in `book/src` as a doc-test. A failing doc-test names the chapter module.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/network.md")]
pub mod network {}
#[doc = include_str!("../../../book/src/routing.md")]
pub mod routing {}
#[doc = include_str!("../../../book/src/ca.md")]
pub mod ca {}
#[doc = include_str!("../../../book/src/perception.md")]
pub mod perception {}
#[doc = include_str!("../../../book/src/motion.md")]
pub mod motion {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
