//! Exact and numerical building blocks for virtual localization computations.

pub mod acceptance;
pub mod beltrami_geometry;
pub mod canon;
pub mod dual_graphs;
pub mod exact_arith;
pub mod localization_engine;
pub mod virtual_atlas;
pub mod virtual_integration;
