// mdbook cannot link snippets against this crate, so every chapter is
// compiled here as a rustdoc comment instead.

#[doc = include_str!("../../../book/src/intro.md")]
mod intro {}
#[doc = include_str!("../../../book/src/paulis.md")]
mod paulis {}
#[doc = include_str!("../../../book/src/states.md")]
mod states {}
#[doc = include_str!("../../../book/src/identity-products.md")]
mod identity_products {}
#[doc = include_str!("../../../book/src/certification.md")]
mod certification {}
#[doc = include_str!("../../../book/src/witnesses.md")]
mod witnesses {}
#[doc = include_str!("../../../book/src/data.md")]
mod data {}
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
