// SPDX-License-Identifier: Apache-2.0

//! Elmore delay on RC trees (downstream-capacitance form).

/// RC tree rooted at node 0. Nodes are added after their parent, so indices
/// are a topological order.
#[derive(Debug, Clone, PartialEq)]
pub struct RcTree {
    parent: Vec<usize>,
    /// Resistance of the edge to the parent, ohm; 0 for the root.
    resistance: Vec<f64>,
    /// Grounded capacitance at the node, farad.
    capacitance: Vec<f64>,
}

impl RcTree {
    pub fn new(root_capacitance: f64) -> Self {
        Self { parent: vec![0], resistance: vec![0.0], capacitance: vec![root_capacitance] }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Adds a node below `parent`; returns its index.
    pub fn add_node(&mut self, parent: usize, resistance: f64, capacitance: f64) -> usize {
        assert!(parent < self.len(), "parent {parent} not in tree");
        self.parent.push(parent);
        self.resistance.push(resistance);
        self.capacitance.push(capacitance);
        self.len() - 1
    }

    pub fn add_capacitance(&mut self, node: usize, c: f64) {
        self.capacitance[node] += c;
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        (node != 0).then(|| self.parent[node])
    }

    pub fn resistance(&self, node: usize) -> f64 {
        self.resistance[node]
    }

    pub fn capacitance(&self, node: usize) -> f64 {
        self.capacitance[node]
    }

    pub fn total_capacitance(&self) -> f64 {
        self.capacitance.iter().sum()
    }

    /// Capacitance in the subtree of each node, itself included.
    pub fn downstream_capacitance(&self) -> Vec<f64> {
        let mut down = self.capacitance.clone();
        for v in (1..self.len()).rev() {
            down[self.parent[v]] += down[v];
        }
        down
    }

    /// Elmore delay from the root to every node:
    /// `d(v) = d(parent) + R(v) * Cdown(v)`.
    pub fn elmore_delays(&self) -> Vec<f64> {
        let down = self.downstream_capacitance();
        let mut d = vec![0.0; self.len()];
        for v in 1..self.len() {
            d[v] = d[self.parent[v]] + self.resistance[v] * down[v];
        }
        d
    }

    /// Total resistance from the root to every node.
    pub fn path_resistance(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.len()];
        for v in 1..self.len() {
            r[v] = r[self.parent[v]] + self.resistance[v];
        }
        r
    }
}
