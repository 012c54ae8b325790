//! Application operators: CT reconstruction, earth mover's distance and
//! decentralized sensing, each a nonexpansive map in its own metric.

pub mod ct;
pub mod emd;
pub mod network;
pub mod phantom;
pub mod radon;
pub mod sparse;
