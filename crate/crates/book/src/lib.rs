//! Runs the code snippets of the guide in `book/` as doc-tests.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}

#[doc = include_str!("../../../book/src/scheme.md")]
pub mod scheme {}

#[doc = include_str!("../../../book/src/filter.md")]
pub mod filter {}

#[doc = include_str!("../../../book/src/shifts.md")]
pub mod shifts {}

#[doc = include_str!("../../../book/src/decomposition.md")]
pub mod decomposition {}

#[doc = include_str!("../../../book/src/two_d.md")]
pub mod two_d {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}
