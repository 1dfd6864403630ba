//! The guide in `book/` is plain mdbook, which cannot build snippets that
//! depend on workspace crates. Each chapter is pulled in here as a module
//! doc so `cargo test --doc` runs its code blocks.

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/weights.md")]
mod weights {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/norms.md")]
mod norms {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/regimes.md")]
mod regimes {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/estimates.md")]
mod estimates {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/oracle.md")]
mod oracle {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
