use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::linalg::{Matrix, Vector};
use crate::problem::{ConstraintSet, ObjectiveBlock, RangeTerm, StructuredProblem, SumPart};

use super::network::SensorNetwork;

/// Which sensor positions each node keeps a local copy of.
///
/// A sensor copies itself and its sensor neighbors; an anchor copies its
/// sensor neighbors only. Copies are ordered by sensor index. `x` stacks the
/// copies of node 0, node 1, … with two coordinates per copy.
#[derive(Debug, Clone, PartialEq)]
pub struct CopyLayout {
    copies: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    holders: Vec<Vec<(usize, usize)>>,
    sensors: usize,
}

impl CopyLayout {
    pub fn new(net: &SensorNetwork) -> Self {
        let s = net.sensor_count();
        let mut copies = Vec::with_capacity(net.node_count());
        for node in 0..net.node_count() {
            let mut list: Vec<usize> = net
                .neighbors(node)
                .into_iter()
                .map(|(m, _)| m)
                .filter(|&m| m < s)
                .collect();
            if node < s {
                list.push(node);
            }
            list.sort_unstable();
            copies.push(list);
        }
        let mut offsets = Vec::with_capacity(copies.len() + 1);
        let mut holders = alloc::vec![Vec::new(); s];
        let mut at = 0;
        for (node, list) in copies.iter().enumerate() {
            offsets.push(at);
            for (slot, &m) in list.iter().enumerate() {
                holders[m].push((node, slot));
            }
            at += 2 * list.len();
        }
        offsets.push(at);
        Self { copies, offsets, holders, sensors: s }
    }

    pub fn node_count(&self) -> usize {
        self.copies.len()
    }

    pub fn sensor_count(&self) -> usize {
        self.sensors
    }

    /// Sensor indices copied by `node`, in slot order.
    pub fn copies(&self, node: usize) -> &[usize] {
        &self.copies[node]
    }

    /// Coordinate range of `node`'s copies inside `x`.
    pub fn range(&self, node: usize) -> core::ops::Range<usize> {
        self.offsets[node]..self.offsets[node + 1]
    }

    /// `(node, slot)` pairs holding a copy of `sensor`.
    pub fn holders(&self, sensor: usize) -> &[(usize, usize)] {
        &self.holders[sensor]
    }

    pub fn x_dim(&self) -> usize {
        self.offsets[self.copies.len()]
    }

    pub fn z_dim(&self) -> usize {
        2 * self.sensors
    }

    /// Selection matrix of `node`: one `I₂` block per block-row.
    pub fn selection(&self, node: usize) -> Matrix {
        let list = &self.copies[node];
        let mut e = Matrix::zeros(2 * list.len(), 2 * self.sensors);
        for (slot, &m) in list.iter().enumerate() {
            e[(2 * slot, 2 * m)] = 1.0;
            e[(2 * slot + 1, 2 * m + 1)] = 1.0;
        }
        e
    }

    /// All node selections stacked.
    pub fn stacked_selection(&self) -> Matrix {
        let mut e = Matrix::zeros(self.x_dim(), self.z_dim());
        for node in 0..self.node_count() {
            let r = self.range(node);
            e.view_mut((r.start, 0), (r.len(), self.z_dim())).copy_from(&self.selection(node));
        }
        e
    }

    /// `E z` without forming `E`.
    pub fn spread(&self, z: &Vector) -> Vector {
        let mut x = Vector::zeros(self.x_dim());
        for (node, list) in self.copies.iter().enumerate() {
            let base = self.offsets[node];
            for (slot, &m) in list.iter().enumerate() {
                x[base + 2 * slot] = z[2 * m];
                x[base + 2 * slot + 1] = z[2 * m + 1];
            }
        }
        x
    }

    /// `Eᵀ x` without forming `E`.
    pub fn gather(&self, x: &Vector) -> Vector {
        let mut z = Vector::zeros(self.z_dim());
        for (node, list) in self.copies.iter().enumerate() {
            let base = self.offsets[node];
            for (slot, &m) in list.iter().enumerate() {
                z[2 * m] += x[base + 2 * slot];
                z[2 * m + 1] += x[base + 2 * slot + 1];
            }
        }
        z
    }

    /// Local objective of `node` over its own copies.
    pub fn node_objective(&self, net: &SensorNetwork, node: usize) -> Result<ObjectiveBlock> {
        let list = &self.copies[node];
        if list.is_empty() {
            return ObjectiveBlock::zero(1);
        }
        let slot_of = |m: usize| list.binary_search(&m).map_err(|_| invalid!("sensor {m} not copied by node {node}"));
        let mut terms = Vec::new();
        if net.is_anchor(node) {
            let a = net.position(node);
            for (m, d2) in net.neighbors(node) {
                terms.push(RangeTerm::Anchor { i: slot_of(m)?, anchor: a.to_vec(), d2 });
            }
        } else {
            let own = slot_of(node)?;
            for (m, d2) in net.neighbors(node) {
                terms.push(if net.is_anchor(m) {
                    RangeTerm::Anchor { i: own, anchor: net.position(m).to_vec(), d2 }
                } else {
                    RangeTerm::Pair { i: own, j: slot_of(m)?, d2 }
                });
            }
        }
        ObjectiveBlock::range_residual(2 * list.len(), 2, terms)
    }
}

/// Consensus form: `f = Σₙ fₙ(xₙ)`, `g = 0`, `x - E z = 0`, no set constraints.
pub fn build_problem(net: &SensorNetwork, allow_flagged: bool) -> Result<(StructuredProblem, CopyLayout)> {
    if net.is_flagged() && !allow_flagged {
        return Err(crate::Error::DisconnectedNetwork(alloc::format!(
            "sensors without measurements: {:?}",
            net.isolated_sensors()
        )));
    }
    if net.sensor_count() == 0 {
        return Err(invalid!("network has no sensors"));
    }
    let layout = CopyLayout::new(net);
    let mut parts = Vec::new();
    for node in 0..layout.node_count() {
        if layout.copies(node).is_empty() {
            continue;
        }
        parts.push(SumPart { block: layout.node_objective(net, node)?, indices: layout.range(node).collect() });
    }
    let n = layout.x_dim();
    let f = ObjectiveBlock::sum(n, parts)?;
    let g = ObjectiveBlock::zero(layout.z_dim())?;
    let problem = StructuredProblem::new(
        f,
        g,
        Matrix::identity(n, n),
        -layout.stacked_selection(),
        Vector::zeros(n),
        ConstraintSet::whole_space(n)?,
        ConstraintSet::whole_space(layout.z_dim())?,
    )?;
    Ok((problem, layout))
}
