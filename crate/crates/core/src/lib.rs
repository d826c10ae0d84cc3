//! Reconstruction of finite and piecewise-linear spaces from families of
//! functions through disjointness relations, with exact arithmetic.

pub mod basicmaps;
pub mod classify;
pub mod combinat;
pub mod exact;
pub mod fintop;
pub mod funcrel;
pub mod haarconv;
pub mod ideals;
pub mod plspace;
pub mod steinberg;
pub mod stone;
pub mod suite;
