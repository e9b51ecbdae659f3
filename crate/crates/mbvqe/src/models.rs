//! Model Hamiltonians and exact references: the perturbed toric code, the
//! lattice Schwinger model, and dense ground-state solvers used as oracles.

use crate::sim::{expectation, StateVector};
use crate::stabilizer::{Axis, OutcomePolicy, PauliString, StabilizerTableau, C64};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("dense diagonalization supports at most 12 qubits, got {0}")]
    TooLarge(usize),
    #[error("coefficient vector has length {got}, expected {want}")]
    BadLength { want: usize, got: usize },
    #[error("register width must be a positive even number, got {0}")]
    BadWidth(usize),
}

/// Real linear combination of Pauli words.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub num_qubits: usize,
    pub terms: Vec<(f64, PauliString)>,
}

impl Hamiltonian {
    pub fn new(num_qubits: usize) -> Self {
        Hamiltonian { num_qubits, terms: vec![] }
    }

    pub fn add(&mut self, coeff: f64, word: PauliString) {
        debug_assert_eq!(word.num_qubits(), self.num_qubits);
        debug_assert_eq!(word.phase_exponent, 0);
        self.terms.push((coeff, word));
    }

    pub fn add_word(&mut self, coeff: f64, word: &str) {
        self.add(coeff, PauliString::parse(word).expect("valid Pauli word"));
    }

    pub fn extend(&mut self, other: &Hamiltonian) {
        debug_assert_eq!(other.num_qubits, self.num_qubits);
        self.terms.extend(other.terms.iter().cloned());
    }

    /// Total coefficient of a given Pauli word across all terms.
    pub fn coefficient_of(&self, word: &str) -> f64 {
        let target = PauliString::parse(word).expect("valid Pauli word");
        self.terms.iter().filter(|(_, p)| *p == target).map(|(c, _)| c).sum()
    }

    /// Upper bound on the spectral radius: Σ |c_P|.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<(f64, String)> =
            self.terms.iter().map(|(c, p)| (*c, p.to_string())).collect();
        serde_json::to_string_pretty(&(self.num_qubits, rows)).expect("serialize Hamiltonian")
    }

    pub fn from_json(s: &str) -> Result<Self, String> {
        let (num_qubits, rows): (usize, Vec<(f64, String)>) =
            serde_json::from_str(s).map_err(|e| e.to_string())?;
        let mut h = Hamiltonian::new(num_qubits);
        for (c, w) in rows {
            h.add(c, PauliString::parse(&w)?);
        }
        Ok(h)
    }

    /// H|ψ⟩ applied matrix-free.
    pub fn apply(&self, state: &StateVector) -> StateVector {
        let n = self.num_qubits;
        let dim = 1usize << n;
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for (coeff, pauli) in &self.terms {
            for (idx, amp) in state.amps.iter().enumerate() {
                if amp.norm_sqr() == 0.0 {
                    continue;
                }
                let (new_idx, factor) = pauli.apply_to_basis(idx, n);
                out[new_idx] += coeff * phase_factor(pauli.phase_exponent) * factor * amp;
            }
        }
        StateVector { ids: state.ids.clone(), amps: out }
    }
}

fn phase_factor(exp: u8) -> C64 {
    match exp % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Toric code on an N_x × N_y periodic lattice; edges carry the qubits.
///
/// Qubit layout: the horizontal edge at vertex (x, y) has index
/// 2(y·N_x + x) and the vertical edge at the same vertex index
/// 2(y·N_x + x) + 1, with coordinates wrapping periodically.
#[derive(Debug, Clone, Copy)]
pub struct ToricLattice {
    pub nx: usize,
    pub ny: usize,
}

impl ToricLattice {
    pub fn new(nx: usize, ny: usize) -> Self {
        assert!(nx >= 1 && ny >= 1);
        ToricLattice { nx, ny }
    }

    pub fn num_qubits(&self) -> usize {
        2 * self.nx * self.ny
    }

    pub fn h_idx(&self, x: isize, y: isize) -> usize {
        let xm = x.rem_euclid(self.nx as isize) as usize;
        let ym = y.rem_euclid(self.ny as isize) as usize;
        2 * (ym * self.nx + xm)
    }

    pub fn v_idx(&self, x: isize, y: isize) -> usize {
        self.h_idx(x, y) + 1
    }

    /// Star operator A_s at vertex (x, y): Z on the four incident edges.
    pub fn star(&self, x: isize, y: isize) -> PauliString {
        let n = self.num_qubits();
        let mut z = vec![false; n];
        for q in [self.h_idx(x, y), self.h_idx(x - 1, y), self.v_idx(x, y), self.v_idx(x, y - 1)] {
            z[q] = !z[q];
        }
        PauliString { x: vec![false; n], z, phase_exponent: 0 }
    }

    /// Plaquette operator B_p at (x, y): X on the four boundary edges.
    pub fn plaquette(&self, x: isize, y: isize) -> PauliString {
        let n = self.num_qubits();
        let mut xs = vec![false; n];
        for q in [self.h_idx(x, y), self.h_idx(x, y + 1), self.v_idx(x, y), self.v_idx(x + 1, y)] {
            xs[q] = !xs[q];
        }
        PauliString { x: xs, z: vec![false; n], phase_exponent: 0 }
    }

    /// First logical Z: Z on the horizontal edges of column 0.
    pub fn logical_z1(&self) -> PauliString {
        let n = self.num_qubits();
        let mut z = vec![false; n];
        for y in 0..self.ny as isize {
            z[self.h_idx(0, y)] = true;
        }
        PauliString { x: vec![false; n], z, phase_exponent: 0 }
    }

    /// Second logical Z: Z on the vertical edges of row 0.
    pub fn logical_z2(&self) -> PauliString {
        let n = self.num_qubits();
        let mut z = vec![false; n];
        for x in 0..self.nx as isize {
            z[self.v_idx(x, 0)] = true;
        }
        PauliString { x: vec![false; n], z, phase_exponent: 0 }
    }

    /// Stabilizer tableau of the logical state |r, t⟩_L.
    ///
    /// Starting from |0…0⟩, every star, plaquette, and both logical Z
    /// operators are measured with outcomes forced to +1, pinning |0,0⟩_L;
    /// the logical X string for each nonzero label then flips it.
    pub fn logical_state(&self, r: u8, t: u8) -> StabilizerTableau {
        let n = self.num_qubits();
        let mut tab = StabilizerTableau::new(n);
        let mut gens: Vec<PauliString> = vec![];
        for x in 0..self.nx as isize {
            for y in 0..self.ny as isize {
                gens.push(self.star(x, y));
                gens.push(self.plaquette(x, y));
            }
        }
        gens.push(self.logical_z1());
        gens.push(self.logical_z2());
        for g in &gens {
            tab.measure_pauli(g, OutcomePolicy::FixedPlus).expect("valid generator");
        }
        for g in &gens {
            debug_assert!(tab.stabilizes(g));
        }
        if r == 1 {
            // logical X conjugate to Z_L1: X along horizontal edges of row 0
            for x in 0..self.nx as isize {
                tab.x(self.h_idx(x, 0));
            }
        }
        if t == 1 {
            // logical X conjugate to Z_L2: X along vertical edges of column 0
            for y in 0..self.ny as isize {
                tab.x(self.v_idx(0, y));
            }
        }
        tab
    }
}

/// H_0 = −Σ_s A_s − Σ_p B_p.
pub fn toric_hamiltonian(lattice: &ToricLattice) -> Hamiltonian {
    let mut h = Hamiltonian::new(lattice.num_qubits());
    for x in 0..lattice.nx as isize {
        for y in 0..lattice.ny as isize {
            h.add(-1.0, lattice.star(x, y));
            h.add(-1.0, lattice.plaquette(x, y));
        }
    }
    h
}

/// H_p = Σ_n λ_n Z_n (inhomogeneous longitudinal field).
pub fn perturbation(lambdas: &[f64]) -> Hamiltonian {
    let n = lambdas.len();
    let mut h = Hamiltonian::new(n);
    for (q, &l) in lambdas.iter().enumerate() {
        if l != 0.0 {
            h.add(l, PauliString::single(n, q, Axis::Z));
        }
    }
    h
}

/// Couplings of the lattice Schwinger model in spin form.
#[derive(Debug, Clone, Copy)]
pub struct SchwingerParams {
    /// Electric term strength J = g²a/2.
    pub j: f64,
    /// Hopping strength w = 1/(2a).
    pub w: f64,
    /// Fermion mass μ.
    pub mu: f64,
}

impl SchwingerParams {
    /// Unit couplings (a = 1/2, g = 2), the regime used for the S = 4 study.
    pub fn with_mass(mu: f64) -> Self {
        SchwingerParams { j: 1.0, w: 1.0, mu }
    }

    pub fn from_lattice(a: f64, g: f64, mu: f64) -> Self {
        SchwingerParams { j: g * g * a / 2.0, w: 1.0 / (2.0 * a), mu }
    }
}

fn zz_word(n: usize, a: usize, b: usize) -> PauliString {
    let mut z = vec![false; n];
    z[a] = true;
    z[b] = true;
    PauliString { x: vec![false; n], z, phase_exponent: 0 }
}

fn xx_word(n: usize, a: usize, b: usize) -> PauliString {
    let mut x = vec![false; n];
    x[a] = true;
    x[b] = true;
    PauliString { x, z: vec![false; n], phase_exponent: 0 }
}

fn yy_word(n: usize, a: usize, b: usize) -> PauliString {
    let mut x = vec![false; n];
    let mut z = vec![false; n];
    x[a] = true;
    x[b] = true;
    z[a] = true;
    z[b] = true;
    PauliString { x, z, phase_exponent: 0 }
}

/// Spin Hamiltonian of the S-site lattice Schwinger model:
///
/// H = (J/2) Σ_{n=1}^{S−2} Σ_{k=n+1}^{S−1} (S−k) Z_n Z_k
///   − (J/2) Σ_{n=1}^{S−1} (n mod 2) Σ_{k=1}^{n} Z_k
///   + (w/2) Σ_{n=1}^{S−1} (X_n X_{n+1} + Y_n Y_{n+1})
///   + (μ/2) Σ_{n=1}^{S} (−1)^n Z_n            (sites 1-based).
pub fn schwinger_hamiltonian(s_sites: usize, p: &SchwingerParams) -> Result<Hamiltonian, ModelError> {
    if s_sites < 2 || s_sites % 2 != 0 {
        return Err(ModelError::BadWidth(s_sites));
    }
    let n = s_sites;
    let mut h = Hamiltonian::new(n);
    for site_n in 1..=(n.saturating_sub(2)) {
        for site_k in (site_n + 1)..=(n - 1) {
            h.add(p.j / 2.0 * (n - site_k) as f64, zz_word(n, site_n - 1, site_k - 1));
        }
    }
    for site_n in 1..n {
        if site_n % 2 == 1 {
            for site_k in 1..=site_n {
                h.add(-p.j / 2.0, PauliString::single(n, site_k - 1, Axis::Z));
            }
        }
    }
    for site_n in 1..n {
        h.add(p.w / 2.0, xx_word(n, site_n - 1, site_n));
        h.add(p.w / 2.0, yy_word(n, site_n - 1, site_n));
    }
    for site_n in 1..=n {
        let sign = if site_n % 2 == 1 { -1.0 } else { 1.0 };
        h.add(sign * p.mu / 2.0, PauliString::single(n, site_n - 1, Axis::Z));
    }
    Ok(h)
}

/// Observable Ô = 1/(2S(S−1)) Σ_{i, j<i} (1 + (−1)^i Z_i)(1 + (−1)^j Z_j)
/// with 1-based site labels; ⟨Ô⟩ is 1 on |1010…⟩ and 0 on |0101…⟩.
pub fn order_parameter_observable(s_sites: usize) -> Hamiltonian {
    let n = s_sites;
    let mut h = Hamiltonian::new(n);
    let norm = 1.0 / (2.0 * (n * (n - 1)) as f64);
    for i in 1..=n {
        for j in 1..i {
            let si = if i % 2 == 0 { 1.0 } else { -1.0 };
            let sj = if j % 2 == 0 { 1.0 } else { -1.0 };
            h.add(norm, PauliString::identity(n));
            h.add(norm * si, PauliString::single(n, i - 1, Axis::Z));
            h.add(norm * sj, PauliString::single(n, j - 1, Axis::Z));
            h.add(norm * si * sj, zz_word(n, i - 1, j - 1));
        }
    }
    h
}

pub fn order_parameter(state: &StateVector) -> f64 {
    let obs = order_parameter_observable(state.num_qubits());
    expectation(state, &obs).expect("matching register")
}

/// Result of dense exact diagonalization.
#[derive(Debug, Clone)]
pub struct GroundResult {
    pub energy: f64,
    pub state: StateVector,
    /// Number of eigenvalues within 1e-9 of the minimum.
    pub degeneracy: usize,
    /// Orthonormal basis of the ground eigenspace (length = degeneracy).
    pub space: Vec<StateVector>,
}

impl GroundResult {
    /// Squared overlap of ψ with the full ground eigenspace; equals the
    /// plain fidelity when the ground state is unique.
    pub fn space_fidelity(&self, psi: &StateVector) -> f64 {
        let norm2: f64 = psi.amps.iter().map(|a| a.norm_sqr()).sum();
        self.space
            .iter()
            .map(|b| {
                let inner: C64 = b.amps.iter().zip(&psi.amps).map(|(x, y)| x.conj() * y).sum();
                inner.norm_sqr()
            })
            .sum::<f64>()
            / norm2
    }
}

/// Ground energy and state by dense diagonalization (≤ 12 qubits).
///
/// The complex Hermitian matrix H is embedded as the real symmetric
/// [[Re, −Im], [Im, Re]]; each complex eigenpair appears twice there, so
/// the reported degeneracy halves the real multiplicity.
pub fn exact_ground(h: &Hamiltonian) -> Result<GroundResult, ModelError> {
    let n = h.num_qubits;
    if n > 12 {
        return Err(ModelError::TooLarge(n));
    }
    let dim = 1usize << n;
    let mut re = DMatrix::<f64>::zeros(dim, dim);
    let mut im = DMatrix::<f64>::zeros(dim, dim);
    for (coeff, pauli) in &h.terms {
        let phase = phase_factor(pauli.phase_exponent);
        for col in 0..dim {
            let (row, factor) = pauli.apply_to_basis(col, n);
            let val = coeff * phase * factor;
            re[(row, col)] += val.re;
            im[(row, col)] += val.im;
        }
    }
    let mut big = DMatrix::<f64>::zeros(2 * dim, 2 * dim);
    for r in 0..dim {
        for c in 0..dim {
            big[(r, c)] = re[(r, c)];
            big[(r + dim, c + dim)] = re[(r, c)];
            big[(r, c + dim)] = -im[(r, c)];
            big[(r + dim, c)] = im[(r, c)];
        }
    }
    let eig = SymmetricEigen::new(big);
    let mut order: Vec<usize> = (0..2 * dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let emin = eig.eigenvalues[order[0]];
    let real_multiplicity = order
        .iter()
        .take_while(|&&i| eig.eigenvalues[i] - emin < 1e-9)
        .count();
    // each complex eigenvector shows up twice in the real embedding (as v
    // and iv); Gram-Schmidt over the complexified columns recovers an
    // orthonormal basis of the ground eigenspace
    let mut space: Vec<StateVector> = Vec::new();
    for &col in order.iter().take(real_multiplicity) {
        let vec = eig.eigenvectors.column(col);
        let mut amps: Vec<C64> = (0..dim)
            .map(|i| Complex64::new(vec[i], vec[i + dim]))
            .collect();
        for prev in &space {
            let inner: C64 = prev.amps.iter().zip(&amps).map(|(x, y)| x.conj() * y).sum();
            for (a, p) in amps.iter_mut().zip(&prev.amps) {
                *a -= inner * p;
            }
        }
        if space.len() == real_multiplicity / 2 {
            break;
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            let inv = 1.0 / norm;
            for a in &mut amps {
                *a *= inv;
            }
            space.push(StateVector { ids: (0..n).collect(), amps });
        }
    }
    debug_assert_eq!(space.len(), real_multiplicity / 2);
    let state = space[0].clone();
    Ok(GroundResult { energy: emin, state, degeneracy: real_multiplicity / 2, space })
}

/// Ground energy cross-check: power iteration on (c·I − H) with
/// c = Σ|coeff|, matrix-free. Converges slowly near degeneracy; intended
/// as an independent oracle, not a production solver.
pub fn ground_energy_power_iteration(h: &Hamiltonian, iters: usize, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let n = h.num_qubits;
    let dim = 1usize << n;
    let shift = h.one_norm() + 1.0;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut v = StateVector {
        ids: (0..n).collect(),
        amps: (0..dim)
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect(),
    };
    v.normalize();
    for _ in 0..iters {
        let hv = h.apply(&v);
        for (a, b) in v.amps.iter_mut().zip(&hv.amps) {
            *a = shift * *a - b;
        }
        v.normalize();
    }
    expectation(&v, h).expect("matching register")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphstate::CustomState;
    use crate::sim::{fidelity, simulate_pattern, SimOutcomes};

    fn basis_state(bits: &[u8]) -> StateVector {
        let n = bits.len();
        let mut idx = 0usize;
        for &b in bits {
            idx = (idx << 1) | b as usize;
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[idx] = C64::new(1.0, 0.0);
        StateVector { ids: (0..n).collect(), amps }
    }

    #[test]
    fn schwinger_s2_term_content() {
        let h = schwinger_hamiltonian(2, &SchwingerParams { j: 1.0, w: 1.0, mu: 0.4 }).unwrap();
        assert!((h.coefficient_of("XX") - 0.5).abs() < 1e-12);
        assert!((h.coefficient_of("YY") - 0.5).abs() < 1e-12);
        assert!((h.coefficient_of("ZI") - (-0.5 - 0.2)).abs() < 1e-12);
        assert!((h.coefficient_of("IZ") - 0.2).abs() < 1e-12);
        assert!((h.coefficient_of("ZZ")).abs() < 1e-12);
    }

    #[test]
    fn schwinger_s4_pinned_coefficients() {
        let j = 0.8;
        let h = schwinger_hamiltonian(4, &SchwingerParams { j, w: 1.0, mu: 0.0 }).unwrap();
        assert!((h.coefficient_of("ZZII") - j).abs() < 1e-12);
        assert!((h.coefficient_of("ZIZI") - j / 2.0).abs() < 1e-12);
        assert!((h.coefficient_of("IZZI") - j / 2.0).abs() < 1e-12);
        assert!((h.coefficient_of("ZIII") + j).abs() < 1e-12);
        assert!((h.coefficient_of("IZII") + j / 2.0).abs() < 1e-12);
        assert!((h.coefficient_of("IIZI") + j / 2.0).abs() < 1e-12);
        assert!((h.coefficient_of("IIIZ")).abs() < 1e-12);
    }

    #[test]
    fn yy_word_matches_dense_yy() {
        let m = yy_word(2, 0, 1).to_matrix();
        let y = [
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0],
        ];
        for r in 0..4 {
            for c in 0..4 {
                assert!((m[r][c] - C64::new(y[r][c], 0.0)).norm() < 1e-12, "({r},{c})");
            }
        }
    }

    #[test]
    fn order_parameter_pins_neel_states() {
        assert!((order_parameter(&basis_state(&[1, 0, 1, 0])) - 1.0).abs() < 1e-12);
        assert!(order_parameter(&basis_state(&[0, 1, 0, 1])).abs() < 1e-12);
    }

    #[test]
    fn schwinger_ed_transition_is_steep_near_minus_0_7() {
        let o = order_parameter_observable(4);
        let mut prev: Option<(f64, f64)> = None;
        let mut steepest = (0.0f64, 0.0f64);
        let mut mu = -1.5;
        while mu <= 0.5 + 1e-9 {
            let h = schwinger_hamiltonian(4, &SchwingerParams::with_mass(mu)).unwrap();
            let g = exact_ground(&h).unwrap();
            let val = expectation(&g.state, &o).unwrap();
            if let Some((pmu, pval)) = prev {
                let slope: f64 = ((val - pval) / (mu - pmu)).abs();
                if slope > steepest.1 {
                    steepest = ((mu + pmu) / 2.0, slope);
                }
            }
            prev = Some((mu, val));
            mu += 0.05;
        }
        assert!(
            (-1.0..=-0.4).contains(&steepest.0),
            "steepest slope at mu = {}",
            steepest.0
        );
    }

    #[test]
    fn toric_22_graph_matches_reference() {
        let lattice = ToricLattice::new(2, 2);
        let tab = lattice.logical_state(0, 0);
        let custom = CustomState::from_tableau(&tab);
        let expected: Vec<(usize, usize)> = vec![
            (0, 4),
            (0, 5),
            (0, 7),
            (1, 3),
            (1, 5),
            (1, 7),
            (2, 5),
            (2, 6),
            (2, 7),
        ];
        assert_eq!(custom.edges.iter().copied().collect::<Vec<_>>(), expected);
        use crate::stabilizer::LocalClifford;
        let h_like = LocalClifford::from_gate(crate::stabilizer::Gate::H);
        for q in 0..3 {
            assert_eq!(custom.local_cliffords[q], LocalClifford::identity(), "qubit {q}");
        }
        for q in 3..8 {
            assert_eq!(custom.local_cliffords[q], h_like, "qubit {q}");
        }
    }

    #[test]
    fn logical_state_is_toric_ground_state() {
        let lattice = ToricLattice::new(2, 2);
        let h0 = toric_hamiltonian(&lattice);
        let tab = lattice.logical_state(0, 0);
        for x in 0..2 {
            for y in 0..2 {
                assert!(tab.stabilizes(&lattice.star(x, y)));
                assert!(tab.stabilizes(&lattice.plaquette(x, y)));
            }
        }
        let custom = CustomState::from_tableau(&tab);
        let state = simulate_pattern(&custom, &[], SimOutcomes::AllZero).unwrap().output_state;
        let e = expectation(&state, &h0).unwrap();
        assert!((e + 8.0).abs() < 1e-10, "energy {e}");
    }

    #[test]
    fn logical_states_are_orthogonal() {
        let lattice = ToricLattice::new(2, 2);
        let mut states = vec![];
        for (r, t) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let custom = CustomState::from_tableau(&lattice.logical_state(r, t));
            states.push(simulate_pattern(&custom, &[], SimOutcomes::AllZero).unwrap().output_state);
        }
        for i in 0..4 {
            for j in 0..i {
                let f = fidelity(&states[i], &states[j]).unwrap();
                assert!(f < 1e-10, "states {i} and {j} overlap: {f}");
            }
        }
        // |1,0⟩ flips the first logical Z only
        let tab10 = lattice.logical_state(1, 0);
        let mut z1 = lattice.logical_z1();
        z1.phase_exponent = 2;
        assert!(tab10.stabilizes(&z1));
        assert!(tab10.stabilizes(&lattice.logical_z2()));
    }

    #[test]
    fn toric_ground_energy_and_degeneracy() {
        let lattice = ToricLattice::new(2, 2);
        let g = exact_ground(&toric_hamiltonian(&lattice)).unwrap();
        assert!((g.energy + 8.0).abs() < 1e-9);
        assert_eq!(g.degeneracy, 4);
    }

    #[test]
    fn exact_ground_agrees_with_power_iteration() {
        for mu in [-1.2, -0.5, 0.3] {
            let h = schwinger_hamiltonian(4, &SchwingerParams::with_mass(mu)).unwrap();
            let dense = exact_ground(&h).unwrap().energy;
            let power = ground_energy_power_iteration(&h, 4000, 7);
            assert!((dense - power).abs() < 1e-6, "mu={mu}: {dense} vs {power}");
        }
    }

    #[test]
    fn perturbed_toric_ground_interpolates() {
        let lattice = ToricLattice::new(2, 2);
        let mut h = toric_hamiltonian(&lattice);
        h.extend(&perturbation(&vec![3.0; 8]));
        let g = exact_ground(&h).unwrap();
        // strong field: ground state near |1⟩^⊗8 with energy ≈ −8·3 (field)
        // plus +4 from frustrated plaquettes/stars
        let all_ones = basis_state(&[1; 8]);
        let f = fidelity(&g.state, &all_ones).unwrap();
        assert!(f > 0.8, "fidelity to polarized state {f}");
        assert!(g.energy < -8.0 * 3.0 + 8.0);
    }

    #[test]
    fn hamiltonian_json_round_trip() {
        let h = schwinger_hamiltonian(4, &SchwingerParams::with_mass(-0.7)).unwrap();
        let back = Hamiltonian::from_json(&h.to_json()).unwrap();
        assert_eq!(back.num_qubits, h.num_qubits);
        assert_eq!(back.terms.len(), h.terms.len());
        for ((c1, p1), (c2, p2)) in h.terms.iter().zip(&back.terms) {
            assert!((c1 - c2).abs() < 1e-15);
            assert_eq!(p1, p2);
        }
    }
}
