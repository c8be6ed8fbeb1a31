//! Silhouettes of binary search trees and digital search trees.
//!
//! A finite binary tree is a prefix-closed set of bit words. Its silhouette
//! `X_s(T)` is the depth of the external node reached by following the
//! binary digits of `s ∈ [0, 1]`. This crate computes silhouettes and their
//! integrals exactly, grows random BSTs and DSTs, samples the limit objects
//! that describe large random trees, and checks the limit theorems by
//! Monte Carlo.
//!
//! The runnable programs under `examples/` are the quickest tour.

pub mod cli;
pub mod codec;
pub mod dyadic;
pub mod experiments;
pub mod growth;
pub mod limit;
pub mod rng;
pub mod shape;
pub mod silhouette;
pub mod stats;
pub mod tree;

pub use dyadic::DyadicRational;
pub use growth::{GrowthError, KeySequence, Model};
pub use rng::RngStream;
pub use shape::SearchShape;
pub use silhouette::{LevelSequence, PLFunction, SilhouetteError, StepFunction};
pub use tree::{BinaryTree, LevelProfile, NodePath, TreeError};
