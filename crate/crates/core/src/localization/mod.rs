//! Cooperative localization in a sensor network as a consensus problem, with
//! the distributed Lagrangian method and a distributed gradient baseline.

mod layout;
mod network;
mod run;

pub use layout::{build_problem, CopyLayout};
pub use network::{generate_network, rmse, squared_distance, AnchorLayout, Edge, Point, SensorNetwork};
pub use run::{
    run_dadlm, run_dgd, LocalizationAlgo, LocalizationRecord, LocalizationRun, LocalizationRunConfig, NodeExecutor,
    Sequential, ZUpdateRule, TABLE_NAMES,
};
