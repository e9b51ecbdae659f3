//! Measurement patterns: one-way-computation descriptions of unitaries.
//!
//! A [`MeasurementPattern`] is a graph of qubits prepared in |+⟩ (except the
//! inputs, which carry the incoming state), entangled by CZ along its edges,
//! and consumed by an ordered list of single-qubit measurements whose bases
//! adapt to earlier outcomes. Byproduct tables on the outputs make every
//! outcome branch implement the same unitary.
//!
//! Patterns compose sequentially ([`concatenate`]), compile from the layered
//! ansatz circuit ([`compile_layers`]), and reduce to a decorated graph state
//! with all Pauli measurements pre-applied ([`standardize`]).

use crate::graphstate::{AuxMeasurement, Byproduct, ByproductFrame, CustomState};
use crate::sim::{SimError, SimOutcomes, StateVector};
use crate::stabilizer::{Axis, PauliString, StabilizerTableau, C64};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, thiserror::Error)]
pub enum PatternError {
    #[error("wiring references node {0} which is not an output of the first pattern")]
    NotAnOutput(usize),
    #[error("wiring references node {0} which is not an input of the second pattern")]
    NotAnInput(usize),
    #[error("node {0} wired twice")]
    DuplicateWire(usize),
    #[error("register width must be a positive even number, got {0}")]
    BadWidth(usize),
    #[error("Pauli-measured node {0} still entangled after standardization")]
    ResidualEntanglement(usize),
}

/// Basis of one measurement step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasurementBasis {
    PauliX,
    PauliY,
    PauliZ,
    /// R((−1)^{negate ⊕ sign_const ⊕ Σ s_d} θ_slot)
    Rotated {
        slot: usize,
        negate: bool,
        sign_deps: BTreeSet<usize>,
        sign_const: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternStep {
    pub node: usize,
    pub basis: MeasurementBasis,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurementPattern {
    pub num_nodes: usize,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub edges: BTreeSet<(usize, usize)>,
    pub steps: Vec<PatternStep>,
    pub byproducts: BTreeMap<usize, Byproduct>,
    pub num_slots: usize,
}

impl MeasurementPattern {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialize pattern")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Count of rotated (parameter-carrying) measurement steps.
    pub fn rotated_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s.basis, MeasurementBasis::Rotated { .. }))
            .count()
    }

    pub fn pauli_count(&self) -> usize {
        self.steps.len() - self.rotated_count()
    }
}

fn edge(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Five-node chain implementing U_x(θ2) U_z(θ1) U_x(θ0) on one input qubit.
///
/// Node 0 is the input, node 4 the output. The input is measured in X and
/// nodes 1..3 in adaptively signed rotated bases; the output carries the
/// byproduct X^{s1⊕s3} Z^{s0⊕s2}.
pub fn single_qubit_unitary_pattern() -> MeasurementPattern {
    let steps = vec![
        PatternStep { node: 0, basis: MeasurementBasis::PauliX },
        PatternStep {
            node: 1,
            basis: MeasurementBasis::Rotated {
                slot: 0,
                negate: false,
                sign_deps: BTreeSet::from([0]),
                sign_const: false,
            },
        },
        PatternStep {
            node: 2,
            basis: MeasurementBasis::Rotated {
                slot: 1,
                negate: false,
                sign_deps: BTreeSet::from([1]),
                sign_const: false,
            },
        },
        PatternStep {
            node: 3,
            basis: MeasurementBasis::Rotated {
                slot: 2,
                negate: false,
                sign_deps: BTreeSet::from([0, 2]),
                sign_const: false,
            },
        },
    ];
    let byproducts = BTreeMap::from([(
        4usize,
        Byproduct {
            x_deps: BTreeSet::from([1, 3]),
            x_const: false,
            z_deps: BTreeSet::from([0, 2]),
            z_const: false,
        },
    )]);
    MeasurementPattern {
        num_nodes: 5,
        inputs: vec![0],
        outputs: vec![4],
        edges: (0..4).map(|i| (i, i + 1)).collect(),
        steps,
        byproducts,
        num_slots: 3,
    }
}

/// Fifteen-node pattern implementing CX (control = first input/output).
///
/// Two seven-node wires (control 0..6, target 8..14) bridged by node 7
/// between positions 3 and 11; all measurements are in Pauli X or Y bases.
pub fn cx_pattern() -> MeasurementPattern {
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 0..6 {
        edges.insert((i, i + 1));
        edges.insert((8 + i, 9 + i));
    }
    edges.insert((3, 7));
    edges.insert((7, 11));
    let x_nodes: BTreeSet<usize> = BTreeSet::from([0, 8, 9, 10, 12, 13]);
    let order = [0usize, 1, 2, 3, 4, 5, 7, 8, 9, 10, 11, 12, 13];
    let steps = order
        .iter()
        .map(|&n| PatternStep {
            node: n,
            basis: if x_nodes.contains(&n) { MeasurementBasis::PauliX } else { MeasurementBasis::PauliY },
        })
        .collect();
    let byproducts = BTreeMap::from([
        (
            6usize,
            Byproduct {
                x_deps: BTreeSet::from([1, 2, 4, 5]),
                x_const: false,
                z_deps: BTreeSet::from([0, 2, 3, 4, 7, 8, 10]),
                z_const: true,
            },
        ),
        (
            14usize,
            Byproduct {
                x_deps: BTreeSet::from([1, 2, 7, 9, 11, 13]),
                x_const: false,
                z_deps: BTreeSet::from([8, 10, 12]),
                z_const: false,
            },
        ),
    ]);
    MeasurementPattern {
        num_nodes: 15,
        inputs: vec![0, 8],
        outputs: vec![6, 14],
        edges,
        steps,
        byproducts,
        num_slots: 0,
    }
}

fn xor_set_into(target: &mut BTreeSet<usize>, src: &BTreeSet<usize>) {
    for d in src {
        if !target.remove(d) {
            target.insert(*d);
        }
    }
}

/// Sequential composition: feed outputs of `a` into inputs of `b`.
///
/// `wiring` lists (output of a, input of b) pairs; wired nodes merge.
/// Pending byproducts of `a` on wired nodes are pushed symbolically through
/// `b`'s edges and measurements: an X correction commutes through each CZ
/// by dropping a Z on the neighbor, flips the sign of a rotated basis, and
/// (like Z) relabels measurement outcomes, so downstream dependency sets
/// absorb the correction's dependency set. `b`'s parameter slots are
/// offset by `a.num_slots`.
pub fn concatenate(
    a: &MeasurementPattern,
    b: &MeasurementPattern,
    wiring: &[(usize, usize)],
) -> Result<MeasurementPattern, PatternError> {
    let mut seen_a = BTreeSet::new();
    let mut seen_b = BTreeSet::new();
    for &(ao, bi) in wiring {
        if !a.outputs.contains(&ao) {
            return Err(PatternError::NotAnOutput(ao));
        }
        if !b.inputs.contains(&bi) {
            return Err(PatternError::NotAnInput(bi));
        }
        if !seen_a.insert(ao) {
            return Err(PatternError::DuplicateWire(ao));
        }
        if !seen_b.insert(bi) {
            return Err(PatternError::DuplicateWire(bi));
        }
    }
    let wired_b: BTreeMap<usize, usize> = wiring.iter().map(|&(ao, bi)| (bi, ao)).collect();
    // relabel b's nodes: wired inputs reuse the a-output id, the rest get
    // fresh ids above a's range
    let mut map_b = vec![0usize; b.num_nodes];
    let mut next = a.num_nodes;
    for v in 0..b.num_nodes {
        if let Some(&ao) = wired_b.get(&v) {
            map_b[v] = ao;
        } else {
            map_b[v] = next;
            next += 1;
        }
    }
    let mut edges = a.edges.clone();
    for &(u, v) in &b.edges {
        edges.insert(edge(map_b[u], map_b[v]));
    }
    // pending corrections on the wired seam
    let mut frames: BTreeMap<usize, Byproduct> = BTreeMap::new();
    for &(ao, _) in wiring {
        if let Some(bp) = a.byproducts.get(&ao) {
            frames.insert(ao, bp.clone());
        }
    }
    // X parts pick up Z on CZ neighbors inside b
    let mut z_additions: Vec<(usize, BTreeSet<usize>, bool)> = Vec::new();
    for (&w, f) in &frames {
        if f.x_deps.is_empty() && !f.x_const {
            continue;
        }
        for &(u, v) in &b.edges {
            let (mu, mv) = (map_b[u], map_b[v]);
            if mu == w {
                z_additions.push((mv, f.x_deps.clone(), f.x_const));
            } else if mv == w {
                z_additions.push((mu, f.x_deps.clone(), f.x_const));
            }
        }
    }
    for (node, deps, konst) in z_additions {
        let f = frames.entry(node).or_default();
        xor_set_into(&mut f.z_deps, &deps);
        f.z_const ^= konst;
    }
    // walk b's measurements, folding frames in and recording outcome relabels
    let mut subs: BTreeMap<usize, (BTreeSet<usize>, bool)> = BTreeMap::new();
    let mut steps = a.steps.clone();
    for step in &b.steps {
        let node = map_b[step.node];
        let mut basis = match &step.basis {
            MeasurementBasis::Rotated { slot, negate, sign_deps, sign_const } => {
                let mut deps: BTreeSet<usize> = sign_deps.iter().map(|&d| map_b[d]).collect();
                let mut konst = *sign_const;
                for d in deps.clone() {
                    if let Some((sd, sc)) = subs.get(&d) {
                        xor_set_into(&mut deps, sd);
                        konst ^= sc;
                    }
                }
                MeasurementBasis::Rotated {
                    slot: slot + a.num_slots,
                    negate: *negate,
                    sign_deps: deps,
                    sign_const: konst,
                }
            }
            other => other.clone(),
        };
        if let Some(f) = frames.remove(&node) {
            match &mut basis {
                MeasurementBasis::Rotated { sign_deps, sign_const, .. } => {
                    xor_set_into(sign_deps, &f.x_deps);
                    *sign_const ^= f.x_const;
                    subs.insert(node, (f.z_deps, f.z_const));
                }
                MeasurementBasis::PauliX => {
                    subs.insert(node, (f.z_deps, f.z_const));
                }
                MeasurementBasis::PauliZ => {
                    subs.insert(node, (f.x_deps, f.x_const));
                }
                MeasurementBasis::PauliY => {
                    let mut deps = f.x_deps;
                    xor_set_into(&mut deps, &f.z_deps);
                    subs.insert(node, (deps, f.x_const ^ f.z_const));
                }
            }
        }
        steps.push(PatternStep { node, basis });
    }
    // assemble outputs: b's outputs plus any unwired outputs of a
    let mut outputs: Vec<usize> = b.outputs.iter().map(|&o| map_b[o]).collect();
    for &ao in &a.outputs {
        if !seen_a.contains(&ao) {
            outputs.push(ao);
        }
    }
    let mut byproducts: BTreeMap<usize, Byproduct> = BTreeMap::new();
    for (&bo, bp) in &b.byproducts {
        let node = map_b[bo];
        let mut out = Byproduct {
            x_deps: bp.x_deps.iter().map(|&d| map_b[d]).collect(),
            x_const: bp.x_const,
            z_deps: bp.z_deps.iter().map(|&d| map_b[d]).collect(),
            z_const: bp.z_const,
        };
        for d in out.x_deps.clone() {
            if let Some((sd, sc)) = subs.get(&d) {
                xor_set_into(&mut out.x_deps, sd);
                out.x_const ^= sc;
            }
        }
        for d in out.z_deps.clone() {
            if let Some((sd, sc)) = subs.get(&d) {
                xor_set_into(&mut out.z_deps, sd);
                out.z_const ^= sc;
            }
        }
        byproducts.insert(node, out);
    }
    for &ao in &a.outputs {
        if !seen_a.contains(&ao) {
            if let Some(bp) = a.byproducts.get(&ao) {
                byproducts.insert(ao, bp.clone());
            }
        }
    }
    // a frame left on an unmeasured wired node folds into its byproduct
    for (node, f) in frames {
        let out = byproducts.entry(node).or_default();
        xor_set_into(&mut out.x_deps, &f.x_deps);
        out.x_const ^= f.x_const;
        xor_set_into(&mut out.z_deps, &f.z_deps);
        out.z_const ^= f.z_const;
    }
    let mut inputs = a.inputs.clone();
    for &bi in &b.inputs {
        if !wired_b.contains_key(&bi) {
            inputs.push(map_b[bi]);
        }
    }
    Ok(MeasurementPattern {
        num_nodes: next,
        inputs,
        outputs,
        edges,
        steps,
        byproducts,
        num_slots: a.num_slots + b.num_slots,
    })
}

struct Wire {
    tail: usize,
    x_deps: BTreeSet<usize>,
    z_deps: BTreeSet<usize>,
}

/// Compile K ansatz layers on an S-qubit register into one pattern.
///
/// Each layer applies U_z(θ), U_x(θ) on every wire (two rotated nodes per
/// wire) followed by the brickwork of CX gates — CX(0,1), CX(2,3), ... then
/// CX(1,2), CX(3,4), ... — realized as H · CZ · H with the hop H steps as
/// Pauli-X measured nodes. Inputs start in |+⟩ as part of the graph state.
/// Slot order matches [`crate::sim::simulate_circuit`].
pub fn compile_layers(s_qubits: usize, k_layers: usize) -> Result<MeasurementPattern, PatternError> {
    if s_qubits < 2 || s_qubits % 2 != 0 {
        return Err(PatternError::BadWidth(s_qubits));
    }
    let mut next = s_qubits;
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut steps: Vec<PatternStep> = Vec::new();
    let mut wires: Vec<Wire> = (0..s_qubits)
        .map(|q| Wire { tail: q, x_deps: BTreeSet::new(), z_deps: BTreeSet::new() })
        .collect();

    // advance one wire through a teleportation hop: measure the tail
    // (rotated at `slot`, or Pauli X when None) into a fresh neighbor
    fn hop(
        w: &mut Wire,
        slot: Option<usize>,
        steps: &mut Vec<PatternStep>,
        next: &mut usize,
        edges: &mut BTreeSet<(usize, usize)>,
    ) {
        let fresh = *next;
        *next += 1;
        edges.insert(edge(w.tail, fresh));
        let basis = match slot {
            Some(sl) => MeasurementBasis::Rotated {
                slot: sl,
                negate: false,
                sign_deps: w.x_deps.clone(),
                sign_const: false,
            },
            None => MeasurementBasis::PauliX,
        };
        steps.push(PatternStep { node: w.tail, basis });
        let mut new_x = w.z_deps.clone();
        if !new_x.remove(&w.tail) {
            new_x.insert(w.tail);
        }
        w.z_deps = std::mem::replace(&mut w.x_deps, new_x);
        w.tail = fresh;
    }

    let mut slot = 0usize;
    for _ in 0..k_layers {
        for q in 0..s_qubits {
            hop(&mut wires[q], Some(slot), &mut steps, &mut next, &mut edges);
            hop(&mut wires[q], Some(slot + 1), &mut steps, &mut next, &mut edges);
            slot += 2;
        }
        let mut cx_pairs: Vec<(usize, usize)> = (0..s_qubits).step_by(2).map(|c| (c, c + 1)).collect();
        cx_pairs.extend((1..s_qubits - 1).step_by(2).map(|c| (c, c + 1)));
        for (c, t) in cx_pairs {
            hop(&mut wires[t], None, &mut steps, &mut next, &mut edges);
            edges.insert(edge(wires[c].tail, wires[t].tail));
            let xc = wires[c].x_deps.clone();
            let xt = wires[t].x_deps.clone();
            xor_set_into(&mut wires[t].z_deps, &xc);
            xor_set_into(&mut wires[c].z_deps, &xt);
            hop(&mut wires[t], None, &mut steps, &mut next, &mut edges);
        }
    }
    let outputs: Vec<usize> = wires.iter().map(|w| w.tail).collect();
    let byproducts: BTreeMap<usize, Byproduct> = wires
        .iter()
        .map(|w| {
            (
                w.tail,
                Byproduct {
                    x_deps: w.x_deps.clone(),
                    x_const: false,
                    z_deps: w.z_deps.clone(),
                    z_const: false,
                },
            )
        })
        .collect();
    Ok(MeasurementPattern {
        num_nodes: next,
        inputs: (0..s_qubits).collect(),
        outputs,
        edges,
        steps,
        byproducts,
        num_slots: 2 * k_layers * s_qubits,
    })
}

/// Pre-apply all Pauli measurements of a pattern (outcomes fixed to the +1
/// branch where free) and return the residual decorated graph state.
///
/// The graph state plus forced Pauli outcomes is tracked in a stabilizer
/// tableau; extracting its graph form yields the surviving adjacency and
/// per-node local Cliffords. Forced outcomes substitute into downstream
/// dependency sets as constants. Pauli-measured nodes must come out fully
/// disentangled and are dropped, with the remaining ids compacted.
pub fn standardize(pattern: &MeasurementPattern) -> Result<CustomState, PatternError> {
    let n = pattern.num_nodes;
    let mut tab = StabilizerTableau::all_plus(n);
    for &(a, b) in &pattern.edges {
        tab.cz(a, b);
    }
    let mut forced: BTreeMap<usize, bool> = BTreeMap::new();
    for step in &pattern.steps {
        let axis = match step.basis {
            MeasurementBasis::PauliX => Axis::X,
            MeasurementBasis::PauliY => Axis::Y,
            MeasurementBasis::PauliZ => Axis::Z,
            MeasurementBasis::Rotated { .. } => continue,
        };
        let obs = PauliString::single(n, step.node, axis);
        let (outcome, _deterministic) = tab
            .measure_pauli(&obs, crate::stabilizer::OutcomePolicy::FixedPlus)
            .expect("well-formed Pauli observable");
        forced.insert(step.node, outcome == 1);
    }
    let (adj, lcs) = crate::stabilizer::tableau_to_graphstate(&tab);
    for (&node, _) in &forced {
        if adj[node].iter().any(|&e| e) {
            return Err(PatternError::ResidualEntanglement(node));
        }
    }
    // compact ids over surviving nodes
    let survivors: Vec<usize> = (0..n).filter(|v| !forced.contains_key(v)).collect();
    let remap: BTreeMap<usize, usize> = survivors.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let resolve = |deps: &BTreeSet<usize>, konst: bool| -> (BTreeSet<usize>, bool) {
        let mut out = BTreeSet::new();
        let mut c = konst;
        for d in deps {
            match forced.get(d) {
                Some(&bit) => c ^= bit,
                None => {
                    out.insert(remap[d]);
                }
            }
        }
        (out, c)
    };
    let mut edges = BTreeSet::new();
    for &a in &survivors {
        for &b in &survivors {
            if a < b && adj[a][b] {
                edges.insert((remap[&a], remap[&b]));
            }
        }
    }
    let plan: Vec<AuxMeasurement> = pattern
        .steps
        .iter()
        .filter_map(|step| match &step.basis {
            MeasurementBasis::Rotated { slot, negate, sign_deps, sign_const } => {
                let (deps, konst) = resolve(sign_deps, *sign_const);
                Some(AuxMeasurement {
                    node: remap[&step.node],
                    slot: *slot,
                    negate: *negate,
                    sign_deps: deps,
                    sign_const: konst,
                })
            }
            _ => None,
        })
        .collect();
    let byproducts: BTreeMap<usize, Byproduct> = pattern
        .byproducts
        .iter()
        .map(|(&node, bp)| {
            let (x_deps, x_const) = resolve(&bp.x_deps, bp.x_const);
            let (z_deps, z_const) = resolve(&bp.z_deps, bp.z_const);
            (remap[&node], Byproduct { x_deps, x_const, z_deps, z_const })
        })
        .collect();
    Ok(CustomState {
        num_nodes: survivors.len(),
        outputs: pattern.outputs.iter().map(|o| remap[o]).collect(),
        edges,
        local_cliffords: survivors.iter().map(|&v| lcs[v]).collect(),
        plan,
        byproducts,
        byproduct_frame: ByproductFrame::Physical,
        num_slots: pattern.num_slots,
    })
}

/// Simulate a raw (non-standardized) pattern densely.
///
/// `input_state` must be a state over exactly the pattern's input nodes;
/// every other node starts in |+⟩. Small patterns only: all nodes are held
/// in memory at once.
pub fn simulate_raw_pattern(
    pattern: &MeasurementPattern,
    theta: &[f64],
    input_state: &StateVector,
    outcomes: SimOutcomes,
) -> Result<StateVector, SimError> {
    if theta.len() != pattern.num_slots {
        return Err(SimError::SlotMismatch { want: pattern.num_slots, got: theta.len() });
    }
    {
        let mut a = input_state.ids.clone();
        a.sort_unstable();
        let mut b = pattern.inputs.clone();
        b.sort_unstable();
        if a != b {
            return Err(SimError::QubitMismatch);
        }
    }
    let mut rng = match &outcomes {
        SimOutcomes::Random(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let mut sv = input_state.clone();
    for v in 0..pattern.num_nodes {
        if !pattern.inputs.contains(&v) {
            sv.add_qubit(v, None);
        }
    }
    for &(a, b) in &pattern.edges {
        sv.cz(a, b);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut recorded: BTreeMap<usize, u8> = BTreeMap::new();
    for step in &pattern.steps {
        let s = match &outcomes {
            SimOutcomes::AllZero => 0u8,
            SimOutcomes::Random(_) => (rng.as_mut().unwrap().next_u32() & 1) as u8,
            SimOutcomes::Fixed(map) => map.get(&step.node).copied().unwrap_or(0),
        };
        let sign = if s == 1 { -1.0 } else { 1.0 };
        let bra: [C64; 2] = match &step.basis {
            MeasurementBasis::PauliX => [C64::new(h, 0.0), C64::new(sign * h, 0.0)],
            MeasurementBasis::PauliY => [C64::new(h, 0.0), C64::new(0.0, sign * h)],
            MeasurementBasis::PauliZ => {
                if s == 0 {
                    [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
                } else {
                    [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
                }
            }
            MeasurementBasis::Rotated { slot, negate, sign_deps, sign_const } => {
                let mut flip = *negate ^ *sign_const;
                for d in sign_deps {
                    flip ^= recorded.get(d).copied().unwrap_or(0) == 1;
                }
                let angle = if flip { -theta[*slot] } else { theta[*slot] };
                [C64::new(h, 0.0), num_complex::Complex64::from_polar(sign * h, angle)]
            }
        };
        sv.project_out(step.node, bra, true)?;
        recorded.insert(step.node, s);
    }
    for (&node, bp) in &pattern.byproducts {
        let mut xbit = bp.x_const;
        for d in &bp.x_deps {
            xbit ^= recorded.get(d).copied().unwrap_or(0) == 1;
        }
        let mut zbit = bp.z_const;
        for d in &bp.z_deps {
            zbit ^= recorded.get(d).copied().unwrap_or(0) == 1;
        }
        if xbit {
            sv.apply_gate1(crate::stabilizer::Gate::X, node);
        }
        if zbit {
            sv.apply_gate1(crate::stabilizer::Gate::Z, node);
        }
    }
    sv.reorder(&pattern.outputs);
    Ok(sv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{fidelity, mat2_chain, simulate_circuit, simulate_pattern, ux_matrix, uz_matrix};
    use rand::Rng;

    fn random_state(ids: &[usize], rng: &mut ChaCha8Rng) -> StateVector {
        let mut sv = StateVector::new();
        for &q in ids {
            sv.add_qubit(q, None);
        }
        for a in &mut sv.amps {
            *a = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        sv.normalize();
        sv
    }

    fn apply_matrix_state(input: &StateVector, u1: &[[C64; 2]; 2], q: usize, out_ids: &[usize]) -> StateVector {
        let mut sv = input.clone();
        sv.apply1(u1, q);
        let mut sv2 = StateVector { ids: out_ids.to_vec(), amps: sv.amps };
        sv2.normalize();
        sv2
    }

    #[test]
    fn single_qubit_pattern_matches_euler_product() {
        let pat = single_qubit_unitary_pattern();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for trial in 0..50 {
            let t: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let input = random_state(&[0], &mut rng);
            let got = simulate_raw_pattern(&pat, &t, &input, SimOutcomes::Random(trial)).unwrap();
            let u = mat2_chain(&[ux_matrix(t[0]), uz_matrix(t[1]), ux_matrix(t[2])]);
            let want = apply_matrix_state(&input, &u, 0, &[4]);
            let f = fidelity(&got, &want).unwrap();
            assert!(f > 1.0 - 1e-12, "trial {trial}: fidelity {f}");
        }
    }

    #[test]
    fn cx_pattern_matches_cx_matrix() {
        let pat = cx_pattern();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for trial in 0..50 {
            let input = random_state(&[0, 8], &mut rng);
            let got = simulate_raw_pattern(&pat, &[], &input, SimOutcomes::Random(trial)).unwrap();
            // CX with control most significant: swap |10⟩ and |11⟩ amplitudes
            let mut want = StateVector { ids: vec![6, 14], amps: input.amps.clone() };
            want.amps.swap(2, 3);
            let f = fidelity(&got, &want).unwrap();
            assert!(f > 1.0 - 1e-12, "trial {trial}: fidelity {f}");
        }
    }

    #[test]
    fn concatenated_single_qubit_patterns_compose() {
        let a = single_qubit_unitary_pattern();
        let b = single_qubit_unitary_pattern();
        let ab = concatenate(&a, &b, &[(4, 0)]).unwrap();
        assert_eq!(ab.num_slots, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for trial in 0..20 {
            let t: Vec<f64> = (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let input = random_state(&[0], &mut rng);
            let got = simulate_raw_pattern(&ab, &t, &input, SimOutcomes::Random(trial)).unwrap();
            let u = mat2_chain(&[
                ux_matrix(t[0]),
                uz_matrix(t[1]),
                ux_matrix(t[2]),
                ux_matrix(t[3]),
                uz_matrix(t[4]),
                ux_matrix(t[5]),
            ]);
            let want = apply_matrix_state(&input, &u, 0, &[ab.outputs[0]]);
            let f = fidelity(&got, &want).unwrap();
            assert!(f > 1.0 - 1e-12, "trial {trial}: fidelity {f}");
        }
    }

    #[test]
    fn rotation_into_cx_composes() {
        let rot = single_qubit_unitary_pattern();
        let cx = cx_pattern();
        // rotate the control, then apply CX
        let combined = concatenate(&rot, &cx, &[(4, 0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..20 {
            let t: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let mut input = random_state(&[0], &mut rng);
            let target_in = combined.inputs[1];
            input.add_qubit(target_in, None);
            let got = simulate_raw_pattern(&combined, &t, &input, SimOutcomes::Random(trial)).unwrap();
            let u = mat2_chain(&[ux_matrix(t[0]), uz_matrix(t[1]), ux_matrix(t[2])]);
            let mut want = input.clone();
            want.apply1(&u, 0);
            crate::sim::apply_cx(&mut want, 0, target_in);
            let want = StateVector { ids: combined.outputs.clone(), amps: want.amps };
            let f = fidelity(&got, &want).unwrap();
            assert!(f > 1.0 - 1e-12, "trial {trial}: fidelity {f}");
        }
    }

    #[test]
    fn compiled_pattern_counts() {
        for (s, k) in [(4usize, 1usize), (4, 2), (4, 3), (6, 2)] {
            let pat = compile_layers(s, k).unwrap();
            assert_eq!(pat.num_slots, 2 * k * s);
            assert_eq!(pat.rotated_count(), 2 * k * s);
            assert_eq!(pat.pauli_count(), 2 * (s - 1) * k);
            assert_eq!(pat.num_nodes, s + k * (2 * s + 2 * (s - 1)));
            let custom = standardize(&pat).unwrap();
            assert_eq!(custom.num_nodes, s * (2 * k + 1));
            assert_eq!(custom.plan.len(), 2 * k * s);
        }
    }

    #[test]
    fn compiled_pattern_matches_circuit_zero_branch() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for (s, k) in [(2usize, 1usize), (4, 1), (4, 2)] {
            let pat = compile_layers(s, k).unwrap();
            let custom = standardize(&pat).unwrap();
            let t: Vec<f64> = (0..pat.num_slots).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let got = simulate_pattern(&custom, &t, SimOutcomes::AllZero).unwrap().output_state;
            let mut want = simulate_circuit(s, k, &t).unwrap();
            want.ids = got.ids.clone();
            let f = fidelity(&got, &want).unwrap();
            assert!(f > 1.0 - 1e-10, "S={s} K={k}: fidelity {f}");
        }
    }

    #[test]
    fn compiled_pattern_deterministic_over_random_branches() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let pat = compile_layers(4, 2).unwrap();
        let custom = standardize(&pat).unwrap();
        let t: Vec<f64> = (0..pat.num_slots).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let reference = simulate_pattern(&custom, &t, SimOutcomes::AllZero).unwrap().output_state;
        for seed in 0..25 {
            let got = simulate_pattern(&custom, &t, SimOutcomes::Random(seed)).unwrap().output_state;
            let f = fidelity(&got, &reference).unwrap();
            assert!(f > 1.0 - 1e-10, "seed {seed}: fidelity {f}");
        }
    }

    #[test]
    fn raw_compiled_pattern_matches_circuit() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let pat = compile_layers(2, 1).unwrap();
        let t: Vec<f64> = (0..pat.num_slots).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let mut input = StateVector::new();
        for &q in &pat.inputs {
            input.add_qubit(q, None);
        }
        for trial in 0..10 {
            let got = simulate_raw_pattern(&pat, &t, &input, SimOutcomes::Random(trial)).unwrap();
            let mut want = simulate_circuit(2, 1, &t).unwrap();
            want.ids = got.ids.clone();
            let f = fidelity(&got, &want).unwrap();
            assert!(f > 1.0 - 1e-12, "trial {trial}: fidelity {f}");
        }
    }

    #[test]
    fn pattern_json_round_trip() {
        let pat = compile_layers(4, 1).unwrap();
        let back = MeasurementPattern::from_json(&pat.to_json()).unwrap();
        assert_eq!(back.num_nodes, pat.num_nodes);
        assert_eq!(back.edges, pat.edges);
        assert_eq!(back.steps, pat.steps);
        assert_eq!(back.byproducts, pat.byproducts);
    }

    #[test]
    fn concatenate_rejects_bad_wiring() {
        let a = single_qubit_unitary_pattern();
        let b = single_qubit_unitary_pattern();
        assert!(concatenate(&a, &b, &[(3, 0)]).is_err());
        assert!(concatenate(&a, &b, &[(4, 1)]).is_err());
    }
}
