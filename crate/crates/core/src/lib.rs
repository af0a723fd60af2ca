//! Texture processes for compound-Gaussian clutter.
//!
//! A Bernstein function `h` ([`bernstein`]) defines a windowed
//! compound-Poisson texture `tau(t)`: clusters arrive at rate `gamma`, stay
//! in a window of length `T`, and their sizes follow the mixing law of
//! [`mixing`]. [`texture`] simulates the paths, [`laws`] holds the closed-form
//! marginals and moments, [`speckle`] modulates complex Gaussian speckle
//! into clutter `z(t) = sqrt(tau(t)) x(t)`, and [`validation`] compares the
//! two. The `clutter` binary wraps all of it.

// Guards are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bernstein;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod export;
pub mod laws;
pub mod lst_table;
pub mod mixing;
pub mod numeric;
pub mod rng;
pub mod special;
pub mod speckle;
pub mod texture;
pub mod validation;
