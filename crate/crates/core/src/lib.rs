//! Strength estimation and strength-targeted tree search for two-player
//! board games.
//!
//! The crate trains a strength estimator from rank-labelled game records
//! with a listwise Bradley-Terry objective, predicts the rank of unlabelled
//! games from averaged strength scores, and plays at a chosen rank by steering
//! Monte Carlo tree search towards moves whose strength matches the target.

pub mod config;
pub mod datagen;
pub mod features;
pub mod game;
pub mod gradcheck;
pub mod harness;
pub mod inference;
pub mod oracle;
pub mod record;
pub mod report;
pub mod scorer;
pub mod search;
pub mod training;
