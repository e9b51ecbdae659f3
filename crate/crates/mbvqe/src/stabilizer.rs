//! Exact Clifford-state engine.
//!
//! Pauli strings with phase tracking, an Aaronson–Gottesman style stabilizer
//! tableau (destabilizers included for O(n²) measurements), the 24-element
//! single-qubit Clifford group, and extraction of a local-Clifford-equivalent
//! graph state from any stabilizer state.

use num_complex::Complex64;
use std::fmt;

pub type C64 = Complex64;

/// An n-qubit Pauli word `i^phase_exponent · P₁⊗…⊗Pₙ` in binary-symplectic
/// form: qubit q carries X iff `x[q]`, Z iff `z[q]` (both → Y).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString {
    pub x: Vec<bool>,
    pub z: Vec<bool>,
    /// Exponent of i in the global phase, mod 4.
    pub phase_exponent: u8,
}

/// Exponent of i picked up when multiplying single-qubit Paulis
/// (the Aaronson–Gottesman `g` function), in {-1, 0, 1}.
fn pauli_mul_phase(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x2i, z2i) = (x2 as i32, z2 as i32);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2i - x2i,
        (true, false) => z2i * (2 * x2i - 1),
        (false, true) => x2i * (1 - 2 * z2i),
    }
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { x: vec![false; n], z: vec![false; n], phase_exponent: 0 }
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    /// Parse a word like "XIZY" (optionally prefixed with "+", "-", "i", "-i").
    pub fn parse(s: &str) -> Result<Self, String> {
        let mut phase = 0u8;
        let mut rest = s;
        if let Some(r) = rest.strip_prefix("-i") {
            phase = 3;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('i') {
            phase = 1;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('-') {
            phase = 2;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        }
        let mut p = PauliString::identity(rest.len());
        p.phase_exponent = phase;
        for (q, c) in rest.chars().enumerate() {
            match c {
                'I' => {}
                'X' => p.x[q] = true,
                'Y' => {
                    p.x[q] = true;
                    p.z[q] = true;
                }
                'Z' => p.z[q] = true,
                _ => return Err(format!("invalid Pauli character {c:?}")),
            }
        }
        Ok(p)
    }

    /// Single-qubit word with the given Pauli on `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, axis: Axis) -> Self {
        let mut p = PauliString::identity(n);
        match axis {
            Axis::X => p.x[q] = true,
            Axis::Y => {
                p.x[q] = true;
                p.z[q] = true;
            }
            Axis::Z => p.z[q] = true,
        }
        p
    }

    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.num_qubits(), other.num_qubits());
        let n = self.num_qubits();
        let mut out = PauliString::identity(n);
        let mut ph = self.phase_exponent as i32 + other.phase_exponent as i32;
        for q in 0..n {
            ph += pauli_mul_phase(self.x[q], self.z[q], other.x[q], other.z[q]);
            out.x[q] = self.x[q] ^ other.x[q];
            out.z[q] = self.z[q] ^ other.z[q];
        }
        out.phase_exponent = ph.rem_euclid(4) as u8;
        out
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let mut s = false;
        for q in 0..self.num_qubits() {
            s ^= (self.x[q] & other.z[q]) ^ (self.z[q] & other.x[q]);
        }
        !s
    }

    /// Dense matrix of this word (including phase), for small n.
    pub fn to_matrix(&self) -> Vec<Vec<C64>> {
        let n = self.num_qubits();
        let dim = 1usize << n;
        let phase = match self.phase_exponent % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        let mut m = vec![vec![C64::new(0.0, 0.0); dim]; dim];
        for col in 0..dim {
            let (row, amp) = self.apply_to_basis(col, n);
            m[row][col] = phase * amp;
        }
        m
    }

    /// Action on a computational basis index (first qubit most significant):
    /// returns (new index, amplitude factor excluding the global phase).
    pub fn apply_to_basis(&self, idx: usize, n: usize) -> (usize, C64) {
        let mut out = idx;
        let mut amp = C64::new(1.0, 0.0);
        for q in 0..n {
            let bit_pos = n - 1 - q;
            let bit = (idx >> bit_pos) & 1;
            if self.z[q] && bit == 1 {
                amp = -amp;
            }
            if self.x[q] {
                out ^= 1 << bit_pos;
            }
            if self.x[q] && self.z[q] {
                // Y|b> = i(-1)^b |b̄>; the (-1)^b came from the Z branch above
                amp *= C64::new(0.0, 1.0);
            }
        }
        (out, amp)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.phase_exponent % 4 {
            0 => {}
            1 => write!(f, "i")?,
            2 => write!(f, "-")?,
            _ => write!(f, "-i")?,
        }
        for q in 0..self.num_qubits() {
            let c = match (self.x[q], self.z[q]) {
                (false, false) => 'I',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Clifford gates supported by [`StabilizerTableau::apply_clifford`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Gate {
    H,
    S,
    X,
    Z,
    CZ,
    CX,
}

#[derive(Debug, thiserror::Error)]
pub enum StabilizerError {
    #[error("qubit index out of range: {0}")]
    OutOfRange(usize),
    #[error("duplicate target qubits")]
    DuplicateTargets,
    #[error("gate {0:?} expects {1} targets, got {2}")]
    Arity(Gate, usize, usize),
    #[error("observable must have a real (±1) phase")]
    ImaginaryPhase,
}

/// Outcome policy for non-deterministic Pauli measurements.
pub enum OutcomePolicy<'a> {
    /// Force the `+1` (s = 0) branch.
    FixedPlus,
    /// Draw from the supplied RNG.
    Random(&'a mut dyn rand::RngCore),
}

/// CHP tableau: rows 0..n are destabilizers, rows n..2n stabilizers.
/// Row phases are stored as bits: sign = (-1)^r.
#[derive(Debug, Clone)]
pub struct StabilizerTableau {
    pub n: usize,
    x: Vec<Vec<bool>>,
    z: Vec<Vec<bool>>,
    r: Vec<bool>,
}

impl StabilizerTableau {
    /// The all-|0⟩ state: stabilizers Z_i, destabilizers X_i.
    pub fn new(n: usize) -> Self {
        let mut t = StabilizerTableau {
            n,
            x: vec![vec![false; n]; 2 * n],
            z: vec![vec![false; n]; 2 * n],
            r: vec![false; 2 * n],
        };
        for i in 0..n {
            t.x[i][i] = true;
            t.z[n + i][i] = true;
        }
        t
    }

    /// The all-|+⟩ state.
    pub fn all_plus(n: usize) -> Self {
        let mut t = Self::new(n);
        for q in 0..n {
            t.h(q);
        }
        t
    }

    pub fn stabilizer(&self, i: usize) -> PauliString {
        self.row(self.n + i)
    }

    pub fn destabilizer(&self, i: usize) -> PauliString {
        self.row(i)
    }

    fn row(&self, i: usize) -> PauliString {
        PauliString {
            x: self.x[i].clone(),
            z: self.z[i].clone(),
            phase_exponent: if self.r[i] { 2 } else { 0 },
        }
    }

    /// row_h *= row_i, with phase tracking (must stay real).
    fn rowsum(&mut self, h: usize, i: usize) {
        let mut ph = 2 * (self.r[h] as i32) + 2 * (self.r[i] as i32);
        for j in 0..self.n {
            ph += pauli_mul_phase(self.x[i][j], self.z[i][j], self.x[h][j], self.z[h][j]);
        }
        // Destabilizer rows (h < n) may pick up an imaginary factor; their
        // phases are never read, so only stabilizer rows must stay real.
        debug_assert!(h < self.n || ph % 2 == 0);
        self.r[h] = (ph.rem_euclid(4) / 2) == 1;
        for j in 0..self.n {
            self.x[h][j] ^= self.x[i][j];
            self.z[h][j] ^= self.z[i][j];
        }
    }

    pub fn h(&mut self, q: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.x[i][q] & self.z[i][q];
            let tmp = self.x[i][q];
            self.x[i][q] = self.z[i][q];
            self.z[i][q] = tmp;
        }
    }

    pub fn s(&mut self, q: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.x[i][q] & self.z[i][q];
            self.z[i][q] ^= self.x[i][q];
        }
    }

    pub fn z(&mut self, q: usize) {
        self.s(q);
        self.s(q);
    }

    pub fn x(&mut self, q: usize) {
        self.h(q);
        self.z(q);
        self.h(q);
    }

    pub fn cx(&mut self, c: usize, t: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.x[i][c] & self.z[i][t] & (self.x[i][t] ^ self.z[i][c] ^ true);
            self.x[i][t] ^= self.x[i][c];
            self.z[i][c] ^= self.z[i][t];
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cx(a, b);
        self.h(b);
    }

    /// Conjugate every generator by the gate.
    pub fn apply_clifford(&mut self, gate: Gate, targets: &[usize]) -> Result<(), StabilizerError> {
        let arity = match gate {
            Gate::H | Gate::S | Gate::X | Gate::Z => 1,
            Gate::CZ | Gate::CX => 2,
        };
        if targets.len() != arity {
            return Err(StabilizerError::Arity(gate, arity, targets.len()));
        }
        for &t in targets {
            if t >= self.n {
                return Err(StabilizerError::OutOfRange(t));
            }
        }
        if arity == 2 && targets[0] == targets[1] {
            return Err(StabilizerError::DuplicateTargets);
        }
        match gate {
            Gate::H => self.h(targets[0]),
            Gate::S => self.s(targets[0]),
            Gate::X => self.x(targets[0]),
            Gate::Z => self.z(targets[0]),
            Gate::CZ => self.cz(targets[0], targets[1]),
            Gate::CX => self.cx(targets[0], targets[1]),
        }
        Ok(())
    }

    fn row_commutes(&self, i: usize, p: &PauliString) -> bool {
        let mut s = false;
        for j in 0..self.n {
            s ^= (self.x[i][j] & p.z[j]) ^ (self.z[i][j] & p.x[j]);
        }
        !s
    }

    /// Measure the observable `(-1)^(phase/2) · P`. Returns the outcome bit
    /// (0 ↔ eigenvalue +1) and whether the outcome was deterministic.
    pub fn measure_pauli(
        &mut self,
        observable: &PauliString,
        policy: OutcomePolicy,
    ) -> Result<(u8, bool), StabilizerError> {
        if observable.phase_exponent % 2 != 0 {
            return Err(StabilizerError::ImaginaryPhase);
        }
        let sign = (observable.phase_exponent / 2) % 2;
        let n = self.n;
        let pivot = (n..2 * n).find(|&i| !self.row_commutes(i, observable));
        if let Some(p) = pivot {
            for i in 0..2 * n {
                if i != p && !self.row_commutes(i, observable) {
                    self.rowsum(i, p);
                }
            }
            // the old stabilizer row becomes the destabilizer of the new one
            self.x[p - n] = self.x[p].clone();
            self.z[p - n] = self.z[p].clone();
            self.r[p - n] = self.r[p];
            let out = match policy {
                OutcomePolicy::FixedPlus => 0u8,
                OutcomePolicy::Random(rng) => (rng.next_u32() & 1) as u8,
            };
            self.x[p] = observable.x.clone();
            self.z[p] = observable.z.clone();
            self.r[p] = ((out + sign) % 2) == 1;
            Ok((out, false))
        } else {
            // deterministic: accumulate the product of stabilizers whose
            // destabilizer partners anticommute with P
            let mut acc = PauliString::identity(n);
            for i in 0..n {
                if !self.row_commutes(i, observable) {
                    acc = acc.mul(&self.row(n + i));
                }
            }
            debug_assert_eq!(acc.x, observable.x);
            debug_assert_eq!(acc.z, observable.z);
            let out = ((acc.phase_exponent / 2) + sign) % 2;
            Ok((out, true))
        }
    }

    /// True iff `(-1)^(phase/2) P` is in the stabilizer group with sign +1.
    pub fn stabilizes(&self, observable: &PauliString) -> bool {
        let mut t = self.clone();
        matches!(t.measure_pauli(observable, OutcomePolicy::FixedPlus), Ok((0, true)))
    }
}

/// One of the 24 single-qubit Clifford group elements, represented by its
/// conjugation action on X and Z as signed Paulis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct LocalClifford {
    /// Image of X: (axis, negated).
    pub x_img: (Axis, bool),
    /// Image of Z: (axis, negated).
    pub z_img: (Axis, bool),
}

impl LocalClifford {
    pub fn identity() -> Self {
        LocalClifford { x_img: (Axis::X, false), z_img: (Axis::Z, false) }
    }

    /// The element that conjugates by the given single-qubit gate.
    pub fn from_gate(g: Gate) -> Self {
        match g {
            Gate::H => LocalClifford { x_img: (Axis::Z, false), z_img: (Axis::X, false) },
            Gate::S => LocalClifford { x_img: (Axis::Y, false), z_img: (Axis::Z, false) },
            Gate::X => LocalClifford { x_img: (Axis::X, false), z_img: (Axis::Z, true) },
            Gate::Z => LocalClifford { x_img: (Axis::X, true), z_img: (Axis::Z, false) },
            _ => panic!("not a single-qubit gate"),
        }
    }

    /// Image of Y = iXZ, derived from the X and Z images.
    pub fn y_img(&self) -> (Axis, bool) {
        // Y ↦ i · U X U† · U Z U†; multiply the signed single-qubit Paulis
        let (ax, sx) = self.x_img;
        let (az, sz) = self.z_img;
        // i · (P_x' P_z') reduced to a signed Pauli: e.g. XZ = -iY so
        // i·XZ = Y; ZX = iY so i·ZX = -Y; and so on around the axis triple.
        let (axis, flip) = match (ax, az) {
            (Axis::X, Axis::Z) => (Axis::Y, false),
            (Axis::Z, Axis::X) => (Axis::Y, true),
            (Axis::X, Axis::Y) => (Axis::Z, true),
            (Axis::Y, Axis::X) => (Axis::Z, false),
            (Axis::Y, Axis::Z) => (Axis::X, true),
            (Axis::Z, Axis::Y) => (Axis::X, false),
            _ => panic!("degenerate local Clifford"),
        };
        (axis, sx ^ sz ^ flip)
    }

    pub fn image(&self, a: Axis) -> (Axis, bool) {
        match a {
            Axis::X => self.x_img,
            Axis::Z => self.z_img,
            Axis::Y => self.y_img(),
        }
    }

    /// `self.then(g)`: first conjugate by self, then by the gate.
    pub fn then_gate(&self, g: Gate) -> Self {
        let other = Self::from_gate(g);
        other.compose(self)
    }

    /// Composition as unitaries: (a.compose(b)) acts like applying b first.
    pub fn compose(&self, inner: &LocalClifford) -> Self {
        let apply = |(ax, s): (Axis, bool)| {
            let (ax2, s2) = self.image(ax);
            (ax2, s ^ s2)
        };
        LocalClifford { x_img: apply(inner.x_img), z_img: apply(inner.z_img) }
    }

    /// Decompose into a gate sequence (applied left-to-right) over {H, S, Z, X}.
    pub fn gates(&self) -> Vec<Gate> {
        // small BFS over the group; 24 elements, cheap enough to redo on call
        use std::collections::{HashMap, VecDeque};
        let mut seen: HashMap<LocalClifford, Vec<Gate>> = HashMap::new();
        let id = LocalClifford::identity();
        seen.insert(id, vec![]);
        let mut queue = VecDeque::from([id]);
        while let Some(cur) = queue.pop_front() {
            if cur == *self {
                return seen[&cur].clone();
            }
            for g in [Gate::H, Gate::S, Gate::Z, Gate::X] {
                let nxt = cur.then_gate(g);
                if !seen.contains_key(&nxt) {
                    let mut seq = seen[&cur].clone();
                    seq.push(g);
                    seen.insert(nxt, seq);
                    queue.push_back(nxt);
                }
            }
        }
        panic!("local Clifford not reachable: {self:?}");
    }

    /// 2×2 unitary matrix (global phase arbitrary).
    pub fn matrix(&self) -> [[C64; 2]; 2] {
        let mut m = [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
        for g in self.gates() {
            let gm = gate1_matrix(g);
            m = mat2_mul(&gm, &m);
        }
        m
    }

    /// Stable id in 0..24 (lexicographic over the action signature).
    pub fn element_id(&self) -> usize {
        let code = |(a, s): (Axis, bool)| {
            let ai = match a {
                Axis::X => 0,
                Axis::Y => 1,
                Axis::Z => 2,
            };
            ai * 2 + s as usize
        };
        code(self.x_img) * 6 + code(self.z_img)
    }

    /// Conjugate a signed single-qubit Pauli: returns (axis, negated).
    pub fn conjugate(&self, axis: Axis, neg: bool) -> (Axis, bool) {
        let (a, s) = self.image(axis);
        (a, s ^ neg)
    }
}

pub fn gate1_matrix(g: Gate) -> [[C64; 2]; 2] {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    match g {
        Gate::H => [[h, h], [h, -h]],
        Gate::S => [[o, z], [z, i]],
        Gate::X => [[z, o], [o, z]],
        Gate::Z => [[o, z], [z, -o]],
        _ => panic!("not single-qubit"),
    }
}

pub fn mat2_mul(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

/// Graph-state extraction: returns the adjacency matrix and the per-qubit
/// local Cliffords C_q such that (∏ C_q) |G⟩ equals the tableau's state.
pub fn tableau_to_graphstate(t: &StabilizerTableau) -> (Vec<Vec<bool>>, Vec<LocalClifford>) {
    let n = t.n;
    let mut t = t.clone();
    // gate sequence applied to each qubit to REACH the graph state
    let mut applied: Vec<Vec<Gate>> = vec![vec![]; n];

    // 1. make the stabilizer X-block full rank: H on non-pivot columns
    let piv = gf2_pivot_columns(&stab_x_block(&t));
    for c in 0..n {
        if !piv.contains(&c) {
            t.h(c);
            applied[c].push(Gate::H);
        }
    }
    // 2. row-reduce stabilizers so the X block becomes the identity
    for c in 0..n {
        let sel = (c..n).find(|&rr| t.x[n + rr][c]).expect("X block rank-deficient");
        if sel != c {
            t.x.swap(n + c, n + sel);
            t.z.swap(n + c, n + sel);
            t.r.swap(n + c, n + sel);
            t.x.swap(c, sel);
            t.z.swap(c, sel);
            t.r.swap(c, sel);
        }
        for rr in 0..n {
            if rr != c && t.x[n + rr][c] {
                t.rowsum(n + rr, n + c);
            }
        }
    }
    // 3. clear the Z diagonal with S†, fix signs with Z
    for q in 0..n {
        if t.z[n + q][q] {
            t.s(q);
            t.s(q);
            t.s(q);
            applied[q].push(Gate::S); // recorded as one S†; inverted below
        }
    }
    // re-run sign fixing after S† since phases may have moved
    for q in 0..n {
        if t.r[n + q] {
            t.z(q);
            applied[q].push(Gate::Z);
        }
    }
    let adj: Vec<Vec<bool>> = (0..n).map(|i| t.z[n + i].clone()).collect();
    for i in 0..n {
        assert!(!adj[i][i], "self-loop in extracted graph");
        for j in 0..n {
            assert_eq!(adj[i][j], adj[j][i], "asymmetric adjacency");
        }
    }
    for i in 0..n {
        assert!(!t.r[n + i], "unresolved stabilizer sign");
    }
    // `applied` (state → graph, with the S entry meaning S†) is inverted in
    // reverse order to map graph → state: H↦H, S†↦S, Z↦Z
    let corrections = applied
        .into_iter()
        .map(|seq| {
            let mut lc = LocalClifford::identity();
            for g in seq.into_iter().rev() {
                lc = lc.then_gate(g);
            }
            lc
        })
        .collect();
    (adj, corrections)
}

fn stab_x_block(t: &StabilizerTableau) -> Vec<Vec<bool>> {
    (0..t.n).map(|i| t.x[t.n + i].clone()).collect()
}

fn gf2_pivot_columns(m: &[Vec<bool>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    let mut m: Vec<Vec<bool>> = m.to_vec();
    let mut piv = vec![];
    let mut r = 0;
    for c in 0..cols {
        if let Some(sel) = (r..rows).find(|&rr| m[rr][c]) {
            m.swap(r, sel);
            for rr in 0..rows {
                if rr != r && m[rr][c] {
                    let pivot_row = m[r].clone();
                    for j in 0..cols {
                        m[rr][j] ^= pivot_row[j];
                    }
                }
            }
            piv.push(c);
            r += 1;
        }
    }
    piv
}
