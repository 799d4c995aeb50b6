//! Terminated LDPC convolutional codes built from permutation matrices.
//!
//! The crate covers the full path from code construction to threshold
//! analysis:
//!
//! * [`ensemble`] samples time-varying syndrome formers with `J` ones per row
//!   and `2J` per column, built from `M x M` permutation blocks.
//! * [`code`] terminates a syndrome former into a block code, with degree
//!   profile, rate, girth and GF(2) rank utilities; [`encode`] performs the
//!   systematic encoding including the zero-state tail; [`alist`] reads and
//!   writes the standard alist exchange format.
//! * [`bp`] is a sum-product decoder with flooding and sliding-window
//!   schedules; [`montecarlo`] wraps it in a BER/FER harness.
//! * [`de`] runs position-dependent density evolution on the erasure channel
//!   (scalar recursion) and on the binary-input AWGN channel (quantized
//!   densities), tracking Bhattacharyya parameters and the breakout
//!   certificate.
//! * [`window`] implements the sliding-window evaluation schedule and
//!   [`threshold`] bisects over the channel parameter.
//!
//! The `ldpcc` binary in this package is a thin front end over [`cli`].

pub mod alist;
pub mod bp;
pub mod channel;
pub mod cli;
pub mod code;
pub mod de;
pub mod encode;
pub mod ensemble;
pub mod error;
mod fmt;
pub mod gf2;
pub mod montecarlo;
pub mod threshold;
pub mod window;

pub use error::{Error, Result};
