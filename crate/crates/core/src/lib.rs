//! Spherical Fourier eigenmeasures built from modular forms.

mod error;
mod phase;

pub mod arith;
pub mod qseries;
pub mod schwartz;
pub mod measures;
pub mod modforms;
pub mod hilbert;
pub mod verify;

pub use error::{Error, Result};
pub use phase::Phase4;

// The guide chapters are compiled here so their snippets run as doctests.
#[cfg(doctest)]
pub mod guide {
    #[doc = include_str!("../../../book/src/intro.md")]
    pub mod intro {}
    #[doc = include_str!("../../../book/src/series.md")]
    pub mod series {}
    #[doc = include_str!("../../../book/src/test-functions.md")]
    pub mod test_functions {}
    #[doc = include_str!("../../../book/src/measures.md")]
    pub mod measures {}
    #[doc = include_str!("../../../book/src/line.md")]
    pub mod line {}
    #[doc = include_str!("../../../book/src/verify.md")]
    pub mod verify {}
    #[doc = include_str!("../../../book/src/hilbert.md")]
    pub mod hilbert {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
