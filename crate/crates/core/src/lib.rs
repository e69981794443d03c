//! Dynamics core for chaos-indicator studies on the 4d modulated Hénon map:
//! the map itself with tangent propagation, seven dynamic indicators, the
//! Birkhoff-weighted frequency analysis, and the KDE-based ground-truth and
//! scoring machinery.

pub mod classify;
pub mod freq;
pub mod indicators;
pub mod map;
pub mod stats;
pub mod testkit;

pub use map::{MapParams, Modulation, State};
