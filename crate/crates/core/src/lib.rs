// SPDX-License-Identifier: Apache-2.0

//! Design-to-vector toolkit: parses or synthesizes placed-and-routed designs
//! and extracts multi-level vector data (design, net, graph, path, patch).

pub mod design;
pub mod geom;
pub mod insight;
pub mod engines;
pub mod fidelity;
pub mod store;
pub mod vector;
