//! JSON network files: node positions with anchor flags, measured edges,
//! noise variance and generating seed.

use std::path::Path;

use adlm_core::localization::{Edge, Point, SensorNetwork};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub position: Point,
    pub anchor: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub a: usize,
    pub b: usize,
    /// Measured squared distance.
    pub d2: f64,
}

/// Sensors come first, anchors after them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub seed: u64,
    pub radius: f64,
    pub sigma2: f64,
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
}

impl NetworkSpec {
    pub fn from_network(net: &SensorNetwork) -> Self {
        let nodes = (0..net.node_count())
            .map(|k| NodeSpec {
                position: net.position(k),
                anchor: net.is_anchor(k),
            })
            .collect();
        let edges = net.edges().iter().map(|e| EdgeSpec { a: e.a, b: e.b, d2: e.d2 }).collect();
        Self {
            seed: net.seed(),
            radius: net.radius(),
            sigma2: net.noise_sigma2(),
            nodes,
            edges,
        }
    }

    pub fn build(&self, path: &Path) -> Result<SensorNetwork> {
        let sensors = self.nodes.iter().take_while(|n| !n.anchor).count();
        if let Some(k) = self.nodes[sensors..].iter().position(|n| !n.anchor) {
            return Err(Error::spec(path, format!("nodes[{}]", sensors + k), "sensors must precede anchors"));
        }
        let positions = |anchor: bool| self.nodes.iter().filter(|n| n.anchor == anchor).map(|n| n.position).collect();
        let edges = self.edges.iter().map(|e| Edge { a: e.a, b: e.b, d2: e.d2 }).collect();
        SensorNetwork::from_parts(positions(false), positions(true), self.radius, edges, self.sigma2, self.seed)
            .map_err(|e| Error::spec(path, "network", e))
    }
}

pub fn read_network(path: &Path) -> Result<SensorNetwork> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let spec: NetworkSpec = serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })?;
    spec.build(path)
}

pub fn write_network(path: &Path, net: &SensorNetwork) -> Result<()> {
    crate::summary::write_json(path, &NetworkSpec::from_network(net))
}
