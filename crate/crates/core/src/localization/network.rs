use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::sampling::{stream, stream_rng};

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq)]
pub enum AnchorLayout {
    /// Corners of the unit square.
    Corner4,
    Explicit(Vec<Point>),
}

impl AnchorLayout {
    pub fn positions(&self) -> Vec<Point> {
        match self {
            AnchorLayout::Corner4 => alloc::vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]],
            AnchorLayout::Explicit(p) => p.clone(),
        }
    }
}

/// A measured squared distance between nodes `a < b`. Nodes `0..S` are
/// sensors and `S..S+A` anchors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub d2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorNetwork {
    sensors: Vec<Point>,
    anchors: Vec<Point>,
    radius: f64,
    edges: Vec<Edge>,
    noise_sigma2: f64,
    seed: u64,
    isolated: Vec<usize>,
}

pub fn squared_distance(p: &Point, q: &Point) -> f64 {
    let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
    dx * dx + dy * dy
}

impl SensorNetwork {
    /// Validates and assembles a network. Edges must be sorted by `(a, b)`,
    /// unique, join nodes closer than `radius` and never join two anchors.
    pub fn from_parts(
        sensors: Vec<Point>,
        anchors: Vec<Point>,
        radius: f64,
        edges: Vec<Edge>,
        noise_sigma2: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(invalid!("radius must be positive, got {radius}"));
        }
        if !(noise_sigma2 >= 0.0) || !noise_sigma2.is_finite() {
            return Err(invalid!("noise variance must be non-negative, got {noise_sigma2}"));
        }
        if sensors.iter().chain(&anchors).flatten().any(|v| !v.is_finite()) {
            return Err(invalid!("node positions must be finite"));
        }
        let s = sensors.len();
        let n = s + anchors.len();
        let pos = |k: usize| if k < s { sensors[k] } else { anchors[k - s] };
        for (k, e) in edges.iter().enumerate() {
            if e.a >= e.b || e.b >= n {
                return Err(invalid!("edge {k} ({}, {}) is not an ordered pair of nodes", e.a, e.b));
            }
            if e.a >= s {
                return Err(invalid!("edge {k} joins two anchors"));
            }
            if k > 0 && (edges[k - 1].a, edges[k - 1].b) >= (e.a, e.b) {
                return Err(invalid!("edges must be sorted and unique"));
            }
            if !(e.d2 >= 0.0) || !e.d2.is_finite() {
                return Err(invalid!("edge {k} has invalid squared distance {}", e.d2));
            }
            if squared_distance(&pos(e.a), &pos(e.b)) >= radius * radius {
                return Err(invalid!("edge {k} is longer than the radius"));
            }
        }
        let mut degree = alloc::vec![0usize; s];
        for e in &edges {
            degree[e.a] += 1;
            if e.b < s {
                degree[e.b] += 1;
            }
        }
        let isolated = (0..s).filter(|&k| degree[k] == 0).collect();
        Ok(Self { sensors, anchors, radius, edges, noise_sigma2, seed, isolated })
    }

    pub fn sensors(&self) -> &[Point] {
        &self.sensors
    }

    pub fn anchors(&self) -> &[Point] {
        &self.anchors
    }

    pub fn sensor_count(&self) -> usize {
        self.sensors.len()
    }

    pub fn node_count(&self) -> usize {
        self.sensors.len() + self.anchors.len()
    }

    pub fn is_anchor(&self, node: usize) -> bool {
        node >= self.sensors.len()
    }

    pub fn position(&self, node: usize) -> Point {
        if node < self.sensors.len() {
            self.sensors[node]
        } else {
            self.anchors[node - self.sensors.len()]
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn noise_sigma2(&self) -> f64 {
        self.noise_sigma2
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sensors without any measurement; their position is unobservable.
    pub fn isolated_sensors(&self) -> &[usize] {
        &self.isolated
    }

    pub fn is_flagged(&self) -> bool {
        !self.isolated.is_empty()
    }

    /// Sorted neighbors of `node` with the measured squared distance.
    pub fn neighbors(&self, node: usize) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = self
            .edges
            .iter()
            .filter_map(|e| match (e.a == node, e.b == node) {
                (true, _) => Some((e.b, e.d2)),
                (_, true) => Some((e.a, e.d2)),
                _ => None,
            })
            .collect();
        out.sort_by_key(|&(m, _)| m);
        out
    }
}

/// Sensors uniform in the unit square, edges between nodes closer than
/// `radius` (anchor pairs excluded), noisy squared distances with variance
/// `noise_factor` times the mean true squared edge length, clamped at zero.
pub fn generate_network(
    sensors: usize,
    anchors: &AnchorLayout,
    radius: f64,
    noise_factor: f64,
    seed: u64,
) -> Result<SensorNetwork> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(invalid!("radius must be positive, got {radius}"));
    }
    if !(noise_factor >= 0.0) || !noise_factor.is_finite() {
        return Err(invalid!("noise factor must be non-negative, got {noise_factor}"));
    }
    let mut rng = stream_rng(seed, stream::NETWORK);
    let sensor_pos: Vec<Point> = (0..sensors)
        .map(|_| [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
        .collect();
    let anchor_pos = anchors.positions();
    let n = sensors + anchor_pos.len();
    let pos = |k: usize| if k < sensors { sensor_pos[k] } else { anchor_pos[k - sensors] };
    let mut edges = Vec::new();
    for a in 0..sensors {
        for b in a + 1..n {
            let d2 = squared_distance(&pos(a), &pos(b));
            if d2 < radius * radius {
                edges.push(Edge { a, b, d2 });
            }
        }
    }
    let mean = if edges.is_empty() {
        0.0
    } else {
        edges.iter().map(|e| e.d2).sum::<f64>() / edges.len() as f64
    };
    let sigma2 = noise_factor * mean;
    if sigma2 > 0.0 {
        let normal = Normal::new(0.0, libm::sqrt(sigma2)).map_err(|e| invalid!("noise model: {e}"))?;
        for e in &mut edges {
            e.d2 = (e.d2 + normal.sample(&mut rng)).max(0.0);
        }
    }
    SensorNetwork::from_parts(sensor_pos, anchor_pos, radius, edges, sigma2, seed)
}

/// Root-mean-square position error over sensors; zero for an empty network.
pub fn rmse(estimates: &[Point], net: &SensorNetwork) -> Result<f64> {
    if estimates.len() != net.sensor_count() {
        return Err(invalid!(
            "expected {} estimates, got {}",
            net.sensor_count(),
            estimates.len()
        ));
    }
    if estimates.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = estimates
        .iter()
        .zip(net.sensors())
        .map(|(e, t)| squared_distance(e, t))
        .sum();
    Ok(libm::sqrt(total / estimates.len() as f64))
}
