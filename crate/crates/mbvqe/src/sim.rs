//! Dense statevector backend.
//!
//! Holds amplitudes over an ordered register of named qubits (first id most
//! significant), supports lazy qubit activation, single-qubit unitaries, CZ,
//! projective removal of qubits, expectation values, and fidelities. The
//! pattern simulator activates auxiliaries just before they are needed so the
//! peak register size stays near the output count.

use crate::exec::{self, Strategy};
use crate::graphstate::{ByproductFrame, CustomState};
use crate::models::Hamiltonian;
use crate::stabilizer::{gate1_matrix, mat2_mul, Gate, C64};
use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashSet};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("parameter vector has length {got}, expected {want}")]
    SlotMismatch { want: usize, got: usize },
    #[error("qubit sets differ")]
    QubitMismatch,
    #[error("zero-probability measurement branch")]
    DegenerateBranch,
}

/// Dense state over an ordered list of qubit ids; the first id is the most
/// significant bit of the amplitude index.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub ids: Vec<usize>,
    pub amps: Vec<C64>,
}

impl StateVector {
    pub fn new() -> Self {
        StateVector { ids: vec![], amps: vec![C64::new(1.0, 0.0)] }
    }

    pub fn num_qubits(&self) -> usize {
        self.ids.len()
    }

    fn pos(&self, q: usize) -> usize {
        self.ids.iter().position(|&i| i == q).expect("qubit not active")
    }

    /// Append qubit `q` as the least significant, in state `vec` (default |+⟩).
    pub fn add_qubit(&mut self, q: usize, vec: Option<[C64; 2]>) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = vec.unwrap_or([C64::new(h, 0.0), C64::new(h, 0.0)]);
        let mut out = Vec::with_capacity(self.amps.len() * 2);
        for a in &self.amps {
            out.push(a * v[0]);
            out.push(a * v[1]);
        }
        self.amps = out;
        self.ids.push(q);
    }

    pub fn apply1(&mut self, u: &[[C64; 2]; 2], q: usize) {
        let p = self.pos(q);
        let stride = 1usize << (self.ids.len() - 1 - p);
        let n = self.amps.len();
        let mut i = 0;
        while i < n {
            if i & stride == 0 {
                let a = self.amps[i];
                let b = self.amps[i | stride];
                self.amps[i] = u[0][0] * a + u[0][1] * b;
                self.amps[i | stride] = u[1][0] * a + u[1][1] * b;
            }
            i += 1;
        }
    }

    pub fn apply_gate1(&mut self, g: Gate, q: usize) {
        self.apply1(&gate1_matrix(g), q);
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        let pa = self.pos(a);
        let pb = self.pos(b);
        let n = self.ids.len();
        let ma = 1usize << (n - 1 - pa);
        let mb = 1usize << (n - 1 - pb);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & ma != 0 && i & mb != 0 {
                *amp = -*amp;
            }
        }
    }

    /// Project qubit `q` onto ⟨bra| and drop it; returns the branch
    /// probability. Renormalizes unless told otherwise.
    pub fn project_out(&mut self, q: usize, bra: [C64; 2], renorm: bool) -> Result<f64, SimError> {
        let p = self.pos(q);
        let n = self.ids.len();
        let stride = 1usize << (n - 1 - p);
        let mut out = Vec::with_capacity(self.amps.len() / 2);
        let b0 = bra[0].conj();
        let b1 = bra[1].conj();
        let mut i = 0;
        while i < self.amps.len() {
            if i & stride == 0 {
                out.push(b0 * self.amps[i] + b1 * self.amps[i | stride]);
            }
            i += 1;
        }
        self.ids.remove(p);
        let prob: f64 = out.iter().map(|a| a.norm_sqr()).sum();
        if renorm {
            if prob < 1e-14 {
                return Err(SimError::DegenerateBranch);
            }
            let inv = 1.0 / prob.sqrt();
            for a in &mut out {
                *a *= inv;
            }
        }
        self.amps = out;
        Ok(prob)
    }

    /// Permute the register to the given id order.
    pub fn reorder(&mut self, new_ids: &[usize]) {
        assert_eq!(
            {
                let mut a = self.ids.clone();
                a.sort_unstable();
                a
            },
            {
                let mut b = new_ids.to_vec();
                b.sort_unstable();
                b
            }
        );
        let n = self.ids.len();
        let perm: Vec<usize> = new_ids.iter().map(|q| self.pos(*q)).collect();
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        for idx in 0..self.amps.len() {
            let mut new_idx = 0usize;
            for (newpos, &oldpos) in perm.iter().enumerate() {
                let bit = (idx >> (n - 1 - oldpos)) & 1;
                new_idx |= bit << (n - 1 - newpos);
            }
            out[new_idx] = self.amps[idx];
        }
        self.ids = new_ids.to_vec();
        self.amps = out;
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let inv = 1.0 / self.norm();
        for a in &mut self.amps {
            *a *= inv;
        }
    }
}

impl Default for StateVector {
    fn default() -> Self {
        Self::new()
    }
}

/// |⟨a|b⟩|², global-phase invariant.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64, SimError> {
    if a.ids != b.ids {
        // tolerate permuted registers by reordering a copy
        let mut sa = a.ids.clone();
        let mut sb = b.ids.clone();
        sa.sort_unstable();
        sb.sort_unstable();
        if sa != sb {
            return Err(SimError::QubitMismatch);
        }
        let mut b2 = b.clone();
        b2.reorder(&a.ids);
        return fidelity(a, &b2);
    }
    let na = a.norm();
    let nb = b.norm();
    let inner: C64 = a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum();
    Ok((inner.norm() / (na * nb)).powi(2))
}

/// Real expectation value Σ c_P ⟨ψ|P|ψ⟩ of a Hamiltonian.
pub fn expectation(state: &StateVector, h: &Hamiltonian) -> Result<f64, SimError> {
    expectation_with(state, h, Strategy::auto())
}

/// Like [`expectation`] but with an explicit execution strategy.
pub fn expectation_with(state: &StateVector, h: &Hamiltonian, strategy: Strategy) -> Result<f64, SimError> {
    let n = state.ids.len();
    if h.num_qubits != n {
        return Err(SimError::QubitMismatch);
    }
    let total = exec::sum_indexed(strategy, h.terms.len(), |t| {
        let (coeff, pauli) = &h.terms[t];
        let mut acc = C64::new(0.0, 0.0);
        for (idx, amp) in state.amps.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let (out_idx, factor) = pauli.apply_to_basis(idx, n);
            acc += state.amps[out_idx].conj() * factor * amp;
        }
        let phase = match pauli.phase_exponent % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        let v = phase * acc;
        debug_assert!(v.im.abs() < 1e-8, "imaginary expectation residue {v}");
        coeff * v.re
    });
    Ok(total)
}

/// How intermediate measurement outcomes are chosen during simulation.
pub enum SimOutcomes<'a> {
    /// Canonical branch: every rotated measurement yields s = 0.
    AllZero,
    /// Uniformly random outcomes from a seeded generator.
    Random(u64),
    /// Explicit outcome per auxiliary node (missing entries default to 0).
    Fixed(&'a BTreeMap<usize, u8>),
}

/// Result of a pattern simulation.
#[derive(Debug, Clone)]
pub struct SimReport {
    pub output_state: StateVector,
    pub branch_probability: f64,
    pub peak_active_qubits: usize,
    /// Outcome recorded per auxiliary node.
    pub outcomes: BTreeMap<usize, u8>,
}

fn r_bra(theta: f64, s: u8) -> [C64; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if s == 1 { -1.0 } else { 1.0 };
    [
        C64::new(h, 0.0),
        Complex64::from_polar(h * sign, theta),
    ]
}

/// Simulate a custom state's adaptive measurement plan.
///
/// Auxiliaries are activated (with their not-yet-active neighbors) just
/// before their measurement; each CZ edge is applied once, when its second
/// endpoint activates. Output local Cliffords are applied at the end and
/// byproducts either before them (graph frame) or after (physical frame).
pub fn simulate_pattern(
    custom: &CustomState,
    theta: &[f64],
    outcomes: SimOutcomes,
) -> Result<SimReport, SimError> {
    if theta.len() != custom.num_slots {
        return Err(SimError::SlotMismatch { want: custom.num_slots, got: theta.len() });
    }
    let mut rng = match &outcomes {
        SimOutcomes::Random(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let neighbors = custom.neighbor_map();
    let mut sv = StateVector::new();
    let mut active: HashSet<usize> = HashSet::new();
    let mut measured: HashSet<usize> = HashSet::new();
    let mut peak = 0usize;
    let mut branch_prob = 1.0;
    let mut recorded: BTreeMap<usize, u8> = BTreeMap::new();

    let activate = |sv: &mut StateVector, active: &mut HashSet<usize>, v: usize| {
        if active.insert(v) {
            sv.add_qubit(v, None);
            // realize edges toward already-active vertices
            for &u in neighbors.get(&v).map(|s| s.as_slice()).unwrap_or(&[]) {
                if active.contains(&u) {
                    sv.cz(v, u);
                }
            }
        }
    };

    for step in &custom.plan {
        activate(&mut sv, &mut active, step.node);
        for &u in neighbors.get(&step.node).map(|s| s.as_slice()).unwrap_or(&[]) {
            if !measured.contains(&u) {
                activate(&mut sv, &mut active, u);
            }
        }
        peak = peak.max(sv.num_qubits());
        // local Clifford of the auxiliary acts before its measurement
        let lc = custom.local_cliffords[step.node];
        for g in lc.gates() {
            sv.apply_gate1(g, step.node);
        }
        let mut sign = step.negate ^ step.sign_const;
        for dep in &step.sign_deps {
            sign ^= recorded.get(dep).copied().unwrap_or(0) == 1;
        }
        let angle = if sign { -theta[step.slot] } else { theta[step.slot] };
        let s = match &outcomes {
            SimOutcomes::AllZero => 0u8,
            SimOutcomes::Random(_) => (rng.as_mut().unwrap().next_u32() & 1) as u8,
            SimOutcomes::Fixed(map) => map.get(&step.node).copied().unwrap_or(0),
        };
        branch_prob *= sv.project_out(step.node, r_bra(angle, s), true)?;
        recorded.insert(step.node, s);
        measured.insert(step.node);
    }
    // activate any untouched outputs and finish remaining edges
    for &o in &custom.outputs {
        activate(&mut sv, &mut active, o);
    }
    peak = peak.max(sv.num_qubits());

    let apply_byproducts = |sv: &mut StateVector| {
        for (&o, bp) in &custom.byproducts {
            let mut xbit = bp.x_const;
            for d in &bp.x_deps {
                xbit ^= recorded.get(d).copied().unwrap_or(0) == 1;
            }
            let mut zbit = bp.z_const;
            for d in &bp.z_deps {
                zbit ^= recorded.get(d).copied().unwrap_or(0) == 1;
            }
            if xbit {
                sv.apply_gate1(Gate::X, o);
            }
            if zbit {
                sv.apply_gate1(Gate::Z, o);
            }
        }
    };
    match custom.byproduct_frame {
        ByproductFrame::Graph => {
            apply_byproducts(&mut sv);
            for &o in &custom.outputs {
                for g in custom.local_cliffords[o].gates() {
                    sv.apply_gate1(g, o);
                }
            }
        }
        ByproductFrame::Physical => {
            for &o in &custom.outputs {
                for g in custom.local_cliffords[o].gates() {
                    sv.apply_gate1(g, o);
                }
            }
            apply_byproducts(&mut sv);
        }
    }
    sv.reorder(&custom.outputs);
    Ok(SimReport { output_state: sv, branch_probability: branch_prob, peak_active_qubits: peak, outcomes: recorded })
}

/// Project every auxiliary onto an explicit branch at its base angle, with no
/// adaptive corrections; returns the post-selected state and its probability.
pub fn postselect_simulate(
    custom: &CustomState,
    theta: &[f64],
    outcomes: &BTreeMap<usize, u8>,
) -> Result<(StateVector, f64), SimError> {
    if theta.len() != custom.num_slots {
        return Err(SimError::SlotMismatch { want: custom.num_slots, got: theta.len() });
    }
    let neighbors = custom.neighbor_map();
    let mut sv = StateVector::new();
    let all: Vec<usize> = (0..custom.num_nodes).collect();
    for &v in &all {
        sv.add_qubit(v, None);
    }
    for (&v, ns) in &neighbors {
        for &u in ns {
            if v < u {
                sv.cz(v, u);
            }
        }
    }
    for step in &custom.plan {
        let lc = custom.local_cliffords[step.node];
        for g in lc.gates() {
            sv.apply_gate1(g, step.node);
        }
    }
    let mut prob = 1.0;
    for step in &custom.plan {
        let angle = if step.negate { -theta[step.slot] } else { theta[step.slot] };
        let s = outcomes.get(&step.node).copied().unwrap_or(0);
        prob *= sv.project_out(step.node, r_bra(angle, s), true)?;
    }
    for &o in &custom.outputs {
        for g in custom.local_cliffords[o].gates() {
            sv.apply_gate1(g, o);
        }
    }
    sv.reorder(&custom.outputs);
    Ok((sv, prob))
}

/// Reference circuit simulation of the layered ansatz of the translation
/// scheme: K layers of per-qubit U_z, U_x rotations followed by the two
/// brickwork CX sub-layers, acting on |+⟩^⊗S.
pub fn simulate_circuit(s_qubits: usize, k_layers: usize, theta: &[f64]) -> Result<StateVector, SimError> {
    if s_qubits % 2 != 0 || s_qubits < 2 {
        return Err(SimError::QubitMismatch);
    }
    if theta.len() != 2 * k_layers * s_qubits {
        return Err(SimError::SlotMismatch { want: 2 * k_layers * s_qubits, got: theta.len() });
    }
    let mut sv = StateVector::new();
    for q in 0..s_qubits {
        sv.add_qubit(q, None);
    }
    let mut slot = 0usize;
    for _ in 0..k_layers {
        for q in 0..s_qubits {
            sv.apply1(&uz_matrix(theta[slot]), q);
            sv.apply1(&ux_matrix(theta[slot + 1]), q);
            slot += 2;
        }
        for c in (0..s_qubits).step_by(2) {
            apply_cx(&mut sv, c, c + 1);
        }
        for c in (1..s_qubits - 1).step_by(2) {
            apply_cx(&mut sv, c, c + 1);
        }
    }
    Ok(sv)
}

/// U_z(t) = exp(i t Z / 2).
pub fn uz_matrix(t: f64) -> [[C64; 2]; 2] {
    [
        [Complex64::from_polar(1.0, t / 2.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), Complex64::from_polar(1.0, -t / 2.0)],
    ]
}

/// U_x(t) = exp(i t X / 2).
pub fn ux_matrix(t: f64) -> [[C64; 2]; 2] {
    let c = C64::new((t / 2.0).cos(), 0.0);
    let is = C64::new(0.0, (t / 2.0).sin());
    [[c, is], [is, c]]
}

pub fn apply_cx(sv: &mut StateVector, c: usize, t: usize) {
    sv.apply_gate1(Gate::H, t);
    sv.cz(c, t);
    sv.apply_gate1(Gate::H, t);
}

/// Product of 2×2 matrices in left-to-right application order:
/// `mat2_chain(&[a, b, c])` = c · b · a.
pub fn mat2_chain(ms: &[[[C64; 2]; 2]]) -> [[C64; 2]; 2] {
    let mut out = [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
    for m in ms {
        out = mat2_mul(m, &out);
    }
    out
}
