//! Exact-arithmetic toolkit for finite metric spaces.
//!
//! * [`metric`]: finite rational metric spaces, axiom checking, distortion,
//!   spectra and ultrametrics, with [`graph`] for shortest-path completion.
//! * [`extension`]: metric types and one-point bi-Lipschitz extension.
//! * [`urysohn`]: the rational levels `A_0 ⊆ A_1 ⊆ ...` of the Urysohn space.
//! * [`backforth`]: back-and-forth λ-bi-Lipschitz matchings and a certifier.
//! * [`cantor`]: truncated Cantor-tree spaces, gap conditions, incomparability
//!   certificates.
//! * [`chain`]: ε-sequences against subspace chains and set coding.
//!
//! All arithmetic is exact; nothing is ever rounded.

#![allow(clippy::needless_range_loop)]

pub mod backforth;
pub mod cantor;
pub mod chain;
pub mod cli;
pub mod error;
pub mod extension;
pub mod graph;
pub mod io;
pub mod metric;
pub mod rational;
pub mod urysohn;

pub use error::{Error, Result};
pub use metric::{distortion, Distortion, FiniteMetricSpace, PartialMap};
pub use rational::{rat, Rat};
