//! Graph states with local-Clifford decorations and adaptive measurement
//! plans.
//!
//! A [`CustomState`] describes a graph state (nodes, CZ edges), a local
//! Clifford per node, a list of output nodes, and an ordered plan of rotated
//! measurements on the remaining auxiliary nodes. Byproduct tables record
//! which Pauli corrections each output needs as a function of recorded
//! outcomes, keeping every branch of the adaptive protocol deterministic.

use crate::stabilizer::{LocalClifford, StabilizerTableau, C64};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, thiserror::Error)]
pub enum GraphStateError {
    #[error("node {0} out of range")]
    NodeOutOfRange(usize),
    #[error("edge ({0}, {1}) not present")]
    MissingEdge(usize, usize),
    #[error("edge ({0}, {1}) already present")]
    EdgeExists(usize, usize),
    #[error("node {0} is not an output")]
    NotAnOutput(usize),
}

/// Whether byproduct corrections act on graph-frame qubits (before the
/// output local Cliffords) or on physical outputs (after them).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ByproductFrame {
    Graph,
    Physical,
}

/// Outcome-dependent Pauli correction on one output: X^{x} Z^{z} with
/// x = x_const ⊕ Σ s_d over x_deps and likewise for z.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Byproduct {
    pub x_deps: BTreeSet<usize>,
    pub x_const: bool,
    pub z_deps: BTreeSet<usize>,
    pub z_const: bool,
}

impl Byproduct {
    fn xor_x_into_z(&mut self, other_x: &BTreeSet<usize>, other_const: bool) {
        for d in other_x {
            if !self.z_deps.remove(d) {
                self.z_deps.insert(*d);
            }
        }
        self.z_const ^= other_const;
    }

    fn toggle_x(&mut self, node: usize) {
        if !self.x_deps.remove(&node) {
            self.x_deps.insert(node);
        }
    }

    fn toggle_z(&mut self, node: usize) {
        if !self.z_deps.remove(&node) {
            self.z_deps.insert(node);
        }
    }
}

/// One adaptive rotated measurement: node measured in the basis
/// R((−1)^{sign} θ_slot) where sign = negate ⊕ sign_const ⊕ Σ s_d.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxMeasurement {
    pub node: usize,
    pub slot: usize,
    pub negate: bool,
    pub sign_deps: BTreeSet<usize>,
    pub sign_const: bool,
}

/// A decorated graph state with its adaptive measurement plan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CustomState {
    pub num_nodes: usize,
    pub outputs: Vec<usize>,
    pub edges: BTreeSet<(usize, usize)>,
    pub local_cliffords: Vec<LocalClifford>,
    pub plan: Vec<AuxMeasurement>,
    pub byproducts: BTreeMap<usize, Byproduct>,
    pub byproduct_frame: ByproductFrame,
    pub num_slots: usize,
}

impl CustomState {
    /// Bare graph state on `n` nodes, all outputs, no decorations.
    pub fn bare(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut s = CustomState {
            num_nodes: n,
            outputs: (0..n).collect(),
            edges: BTreeSet::new(),
            local_cliffords: vec![LocalClifford::identity(); n],
            plan: vec![],
            byproducts: BTreeMap::new(),
            byproduct_frame: ByproductFrame::Graph,
            num_slots: 0,
        };
        for &(a, b) in edges {
            s.edges.insert((a.min(b), a.max(b)));
        }
        s
    }

    /// Extract the graph-with-local-Cliffords form of a stabilizer state.
    pub fn from_tableau(t: &StabilizerTableau) -> Self {
        let (adj, lcs) = crate::stabilizer::tableau_to_graphstate(t);
        let n = adj.len();
        let mut edges = BTreeSet::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if adj[a][b] {
                    edges.insert((a, b));
                }
            }
        }
        CustomState {
            num_nodes: n,
            outputs: (0..n).collect(),
            edges,
            local_cliffords: lcs,
            plan: vec![],
            byproducts: BTreeMap::new(),
            byproduct_frame: ByproductFrame::Graph,
            num_slots: 0,
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbor_map(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut m: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for node in 0..self.num_nodes {
            m.entry(node).or_default();
        }
        for &(a, b) in &self.edges {
            m.entry(a).or_default().push(b);
            m.entry(b).or_default().push(a);
        }
        m
    }

    fn byproduct_mut(&mut self, node: usize) -> &mut Byproduct {
        self.byproducts.entry(node).or_default()
    }

    /// Attach the four-auxiliary rotation gadget to an existing edge (m, n).
    ///
    /// Allocates four new parameter slots (θ1..θ4, returned as the base
    /// slot index) and four auxiliary nodes. Measuring the gadget applies a
    /// four-parameter entangling rotation family on the pair (see
    /// [`decorated_edge_state`] for the closed form on a single edge). With
    /// only θ2 nonzero it reduces to U_z(−θ2) on m, and with only θ4
    /// nonzero to U_z(−θ4) on n; the remaining slots tilt those rotation
    /// axes and couple the pair through the central auxiliary link.
    pub fn decorate_edge(&mut self, m: usize, n: usize) -> Result<usize, GraphStateError> {
        if m >= self.num_nodes || n >= self.num_nodes {
            return Err(GraphStateError::NodeOutOfRange(m.max(n)));
        }
        if !self.has_edge(m, n) {
            return Err(GraphStateError::MissingEdge(m, n));
        }
        if !self.outputs.contains(&m) {
            return Err(GraphStateError::NotAnOutput(m));
        }
        if !self.outputs.contains(&n) {
            return Err(GraphStateError::NotAnOutput(n));
        }
        let base = self.num_slots;
        self.num_slots += 4;
        let a3 = self.num_nodes;
        let a4 = a3 + 1;
        let b3 = a3 + 2;
        let b4 = a3 + 3;
        self.num_nodes += 4;
        self.local_cliffords.extend([LocalClifford::identity(); 4]);
        for e in [(m, b4), (n, a4), (a3, a4), (a4, b4), (b3, b4)] {
            self.edges.insert((e.0.min(e.1), e.0.max(e.1)));
        }
        // outcome sign flips absorb the X-byproducts already pending on the
        // endpoints, so earlier decorations commute through this one
        let bx_m: (BTreeSet<usize>, bool) = self
            .byproducts
            .get(&m)
            .map(|b| (b.x_deps.clone(), b.x_const))
            .unwrap_or_default();
        let bx_n: (BTreeSet<usize>, bool) = self
            .byproducts
            .get(&n)
            .map(|b| (b.x_deps.clone(), b.x_const))
            .unwrap_or_default();
        self.plan.push(AuxMeasurement {
            node: a3,
            slot: base + 3,
            negate: true,
            sign_deps: bx_n.0.clone(),
            sign_const: bx_n.1,
        });
        self.plan.push(AuxMeasurement {
            node: a4,
            slot: base + 2,
            negate: true,
            sign_deps: BTreeSet::from([a3]),
            sign_const: false,
        });
        self.plan.push(AuxMeasurement {
            node: b3,
            slot: base + 1,
            negate: true,
            sign_deps: bx_m.0.clone(),
            sign_const: bx_m.1,
        });
        self.plan.push(AuxMeasurement {
            node: b4,
            slot: base,
            negate: true,
            sign_deps: BTreeSet::from([b3]),
            sign_const: false,
        });
        // cross terms first (they use the pre-decoration X sets), then the
        // gadget's own contributions
        self.byproduct_mut(n).xor_x_into_z(&bx_m.0, bx_m.1);
        self.byproduct_mut(m).xor_x_into_z(&bx_n.0, bx_n.1);
        {
            let bm = self.byproduct_mut(m);
            bm.toggle_x(a3);
            bm.toggle_x(b4);
            bm.toggle_z(a4);
        }
        {
            let bn = self.byproduct_mut(n);
            bn.toggle_x(a4);
            bn.toggle_x(b3);
            bn.toggle_z(b4);
        }
        Ok(base)
    }

    /// Insert a CZ edge that is not part of the underlying graph, then
    /// decorate it. The added edge changes the state; this is only sound
    /// when a compensating step exists upstream (such as layer compilation).
    pub fn add_virtual_edge_and_decorate(&mut self, m: usize, n: usize) -> Result<usize, GraphStateError> {
        if m >= self.num_nodes || n >= self.num_nodes {
            return Err(GraphStateError::NodeOutOfRange(m.max(n)));
        }
        if self.has_edge(m, n) {
            return Err(GraphStateError::EdgeExists(m, n));
        }
        self.edges.insert((m.min(n), m.max(n)));
        self.decorate_edge(m, n)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialize custom state")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Closed-form output state of a single decorated edge measured on the
/// all-zero branch with slot angles (t1, t2, t3, t4). Amplitude order is
/// |m n⟩ with m the most significant qubit.
pub fn decorated_edge_state(t1: f64, t2: f64, t3: f64, t4: f64) -> [C64; 4] {
    let (c1, s1) = (t1.cos(), t1.sin());
    let (c2, s2) = (t2.cos(), t2.sin());
    let (c3, s3) = (t3.cos(), t3.sin());
    let (c4, s4) = (t4.cos(), t4.sin());
    let a00 = Complex64::new(1.0 + c4 * s1 * s2 + c1 * c3 * s2 * s4 + c2 * s3 * s4, 0.0);
    let a01 = Complex64::new(
        (t4 / 2.0).cos().powi(2) + 0.5 * (c4 - 1.0) + s1 * s2,
        s4 * (c2 * c3 - c1 * s2 * s3),
    );
    let a10 = Complex64::new(c2 + s3 * s4, s2 * (c1 * c4 - c3 * s1 * s4));
    let a11 = Complex64::new(-c2 * c4 + s4 * s1 * s2 * s3, -c1 * s2 - s4 * c3);
    let mut v = [a00, a01, a10, a11];
    let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut v {
        *a /= norm;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{fidelity, simulate_pattern, SimOutcomes, StateVector};
    use crate::stabilizer::Gate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn state_of(custom: &CustomState, theta: &[f64], outcomes: SimOutcomes) -> StateVector {
        simulate_pattern(custom, theta, outcomes).unwrap().output_state
    }

    fn dense_two_qubit(v: &[C64; 4]) -> StateVector {
        let mut sv = StateVector::new();
        sv.add_qubit(0, Some([C64::new(1.0, 0.0), C64::new(0.0, 0.0)]));
        sv.add_qubit(1, Some([C64::new(1.0, 0.0), C64::new(0.0, 0.0)]));
        sv.amps = v.to_vec();
        sv
    }

    #[test]
    fn bare_single_edge_is_cz_plus_plus() {
        let custom = CustomState::bare(2, &[(0, 1)]);
        let got = state_of(&custom, &[], SimOutcomes::AllZero);
        let mut want = StateVector::new();
        want.add_qubit(0, None);
        want.add_qubit(1, None);
        want.cz(0, 1);
        assert!((fidelity(&got, &want).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decorated_edge_matches_closed_form_on_zero_branch() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..25 {
            let t: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let mut custom = CustomState::bare(2, &[(0, 1)]);
            custom.decorate_edge(0, 1).unwrap();
            let got = state_of(&custom, &t, SimOutcomes::AllZero);
            let want = dense_two_qubit(&decorated_edge_state(t[0], t[1], t[2], t[3]));
            let f = fidelity(&got, &want).unwrap();
            assert!(f > 1.0 - 1e-10, "fidelity {f} for angles {t:?}");
        }
    }

    #[test]
    fn decorated_edge_deterministic_over_all_branches() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let mut custom = CustomState::bare(2, &[(0, 1)]);
        custom.decorate_edge(0, 1).unwrap();
        let reference = state_of(&custom, &t, SimOutcomes::AllZero);
        for branch in 0..16u32 {
            let map: BTreeMap<usize, u8> =
                (0..4).map(|i| (2 + i, ((branch >> i) & 1) as u8)).collect();
            let got = state_of(&custom, &t, SimOutcomes::Fixed(&map));
            let f = fidelity(&got, &reference).unwrap();
            assert!(f > 1.0 - 1e-10, "branch {branch:04b}: fidelity {f}");
        }
    }

    #[test]
    fn disjoint_decorated_edges_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t: Vec<f64> = (0..8).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let mut custom = CustomState::bare(4, &[(0, 1), (2, 3)]);
        custom.decorate_edge(0, 1).unwrap();
        custom.decorate_edge(2, 3).unwrap();
        let reference = state_of(&custom, &t, SimOutcomes::AllZero);
        for seed in 0..30 {
            let got = state_of(&custom, &t, SimOutcomes::Random(seed));
            let f = fidelity(&got, &reference).unwrap();
            assert!(f > 1.0 - 1e-10, "seed {seed}: fidelity {f}");
        }
    }

    #[test]
    fn zero_angles_leave_graph_state_unchanged() {
        let mut custom = CustomState::bare(2, &[(0, 1)]);
        custom.decorate_edge(0, 1).unwrap();
        let got = state_of(&custom, &[0.0; 4], SimOutcomes::AllZero);
        let bare = CustomState::bare(2, &[(0, 1)]);
        let want = state_of(&bare, &[], SimOutcomes::AllZero);
        assert!((fidelity(&got, &want).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_angle_slots_reduce_to_local_z_rotations() {
        use crate::sim::uz_matrix;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let t = rng.gen_range(-3.0..3.0);
            for (slots, qubit) in [([0.0, t, 0.0, 0.0], 0usize), ([0.0, 0.0, 0.0, t], 1)] {
                let mut custom = CustomState::bare(2, &[(0, 1)]);
                custom.decorate_edge(0, 1).unwrap();
                let got = state_of(&custom, &slots, SimOutcomes::AllZero);
                let mut want = state_of(&CustomState::bare(2, &[(0, 1)]), &[], SimOutcomes::AllZero);
                want.apply1(&uz_matrix(-t), qubit);
                let f = fidelity(&got, &want).unwrap();
                assert!(f > 1.0 - 1e-10, "fidelity {f} for angle {t} on qubit {qubit}");
            }
        }
    }

    #[test]
    fn from_tableau_round_trips_through_dense_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..20 {
            let n = rng.gen_range(1..=5usize);
            let mut tab = StabilizerTableau::all_plus(n);
            let mut sv = StateVector::new();
            for q in 0..n {
                sv.add_qubit(q, None);
            }
            for _ in 0..12 {
                let q = rng.gen_range(0..n);
                match rng.gen_range(0..4) {
                    0 => {
                        tab.h(q);
                        sv.apply_gate1(Gate::H, q);
                    }
                    1 => {
                        tab.s(q);
                        sv.apply_gate1(Gate::S, q);
                    }
                    2 => {
                        tab.z(q);
                        sv.apply_gate1(Gate::Z, q);
                    }
                    _ => {
                        if n > 1 {
                            let b = (q + rng.gen_range(1..n)) % n;
                            tab.cz(q, b);
                            sv.cz(q, b);
                        }
                    }
                }
            }
            let custom = CustomState::from_tableau(&tab);
            let got = state_of(&custom, &[], SimOutcomes::AllZero);
            let f = fidelity(&got, &sv).unwrap();
            assert!(f > 1.0 - 1e-10, "fidelity {f}");
        }
    }

    #[test]
    fn virtual_edge_requires_absence_and_decorate_requires_presence() {
        let mut custom = CustomState::bare(3, &[(0, 1)]);
        assert!(custom.decorate_edge(1, 2).is_err());
        assert!(custom.add_virtual_edge_and_decorate(0, 1).is_err());
        assert!(custom.add_virtual_edge_and_decorate(1, 2).is_ok());
        assert!(custom.has_edge(1, 2));
    }

    #[test]
    fn json_round_trip() {
        let mut custom = CustomState::bare(2, &[(0, 1)]);
        custom.decorate_edge(0, 1).unwrap();
        let text = custom.to_json();
        let back = CustomState::from_json(&text).unwrap();
        assert_eq!(back.num_nodes, custom.num_nodes);
        assert_eq!(back.edges, custom.edges);
        assert_eq!(back.plan, custom.plan);
        assert_eq!(back.byproducts, custom.byproducts);
        assert_eq!(back.num_slots, custom.num_slots);
    }
}
