//! The guide in `book/src`, compiled so its snippets run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/normalization.md")]
pub mod normalization {}
#[doc = include_str!("../../../book/src/clustering.md")]
pub mod clustering {}
#[doc = include_str!("../../../book/src/cutting.md")]
pub mod cutting {}
#[doc = include_str!("../../../book/src/taxonomy.md")]
pub mod taxonomy {}
#[doc = include_str!("../../../book/src/indicator.md")]
pub mod indicator {}
#[doc = include_str!("../../../book/src/reporting.md")]
pub mod reporting {}
#[doc = include_str!("../../../book/src/pipeline.md")]
pub mod pipeline {}
