//! Exact-arithmetic engine for hyperplane potential games whose target is the
//! set of weighted badly approximable triples, with the Diophantine and
//! lattice machinery needed to check the strategy at desk scale.

pub mod numerics;
pub mod geometry;
pub mod games;
pub mod diophantine;
pub mod strategy;
pub mod dynamics;
