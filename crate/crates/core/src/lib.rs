//! Mixed-kernel polar codes over binary-input channels.
//!
//! The crate combines a binary kernel induced by a code decomposition with
//! auxiliary kernels over larger alphabets for its glued inputs. It provides
//! exact density evolution on the erasure channel, successive-cancellation
//! encoding and decoding, information-set design and empirical checks of the
//! channel tree process.

pub mod error;
pub mod gf_algebra;
pub mod kernels;
pub mod construction;
pub mod channels;
pub mod erasure_de;
pub mod code_design;
pub mod sc_codec;
pub mod polar_process;
pub mod cli;

pub use error::{Error, Result};
