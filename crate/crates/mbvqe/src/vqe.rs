//! Variational optimization over measurement-pattern parameters.
//!
//! The cost of a parameter vector is the energy of the pattern's canonical
//! (all-outcomes-zero) output state; determinism of the patterns makes this
//! branch representative of every branch. Two derivative-free optimizers
//! are provided — adaptive Nelder–Mead and SPSA — plus a cyclic
//! coordinate-descent polish stage that refines a converged point to close
//! to machine precision.

use crate::exec::{self, Strategy};
use crate::graphstate::CustomState;
use crate::mbqc::{compile_layers, standardize};
use crate::models::{
    exact_ground, order_parameter, perturbation, schwinger_hamiltonian, toric_hamiltonian,
    Hamiltonian, SchwingerParams, ToricLattice,
};
use crate::sim::{expectation, simulate_pattern, SimOutcomes, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    NelderMead,
    Spsa,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Total cost-evaluation budget across restarts and polish.
    pub max_evals: usize,
    /// Convergence threshold on the simplex spread / polish improvement.
    pub tolerance: f64,
    pub seed: u64,
    /// Extra perturbed restarts (capped at 3).
    pub restarts: usize,
    /// Scale of the random perturbation applied to restart points.
    pub init_spread: f64,
    /// Run the coordinate-descent polish stage after the main optimizer.
    pub polish: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: Method::NelderMead,
            max_evals: 6000,
            tolerance: 1e-12,
            seed: 0,
            restarts: 2,
            init_spread: 0.5,
            polish: true,
        }
    }
}

/// Best-so-far energy after each cost evaluation; non-increasing by
/// construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunTrace {
    pub evaluations: usize,
    pub best: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub params: Vec<f64>,
    pub value: f64,
    pub trace: RunTrace,
}

struct Tracker<'a> {
    f: &'a dyn Fn(&[f64]) -> f64,
    budget: usize,
    evals: usize,
    best_value: f64,
    best_params: Vec<f64>,
    trace: Vec<f64>,
}

impl<'a> Tracker<'a> {
    fn new(f: &'a dyn Fn(&[f64]) -> f64, budget: usize, dim: usize) -> Self {
        Tracker {
            f,
            budget,
            evals: 0,
            best_value: f64::INFINITY,
            best_params: vec![0.0; dim],
            trace: vec![],
        }
    }

    fn exhausted(&self) -> bool {
        self.evals >= self.budget
    }

    fn eval(&mut self, x: &[f64]) -> f64 {
        if self.exhausted() {
            return f64::INFINITY;
        }
        let v = (self.f)(x);
        self.evals += 1;
        if v < self.best_value {
            self.best_value = v;
            self.best_params = x.to_vec();
        }
        self.trace.push(self.best_value);
        v
    }
}

fn nelder_mead(tr: &mut Tracker, x0: &[f64], step: f64, tol: f64, max_evals: usize) {
    let n = x0.len();
    // adaptive coefficients (Gao & Han) keep high-dimensional simplexes honest
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / n as f64;
    let gamma = 0.75 - 1.0 / (2.0 * n as f64);
    let delta = 1.0 - 1.0 / n as f64;
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let start = tr.evals;
    let mut values: Vec<f64> = simplex.iter().map(|p| tr.eval(p)).collect();
    loop {
        if tr.exhausted() || tr.evals - start >= max_evals {
            return;
        }
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let ordered: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let ordered_vals: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        simplex = ordered;
        values = ordered_vals;
        if values[n] - values[0] < tol {
            return;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|p| p[d]).sum::<f64>() / n as f64)
            .collect();
        let reflect: Vec<f64> = (0..n)
            .map(|d| centroid[d] + alpha * (centroid[d] - simplex[n][d]))
            .collect();
        let fr = tr.eval(&reflect);
        if fr < values[0] {
            let expand: Vec<f64> = (0..n)
                .map(|d| centroid[d] + beta * (reflect[d] - centroid[d]))
                .collect();
            let fe = tr.eval(&expand);
            if fe < fr {
                simplex[n] = expand;
                values[n] = fe;
            } else {
                simplex[n] = reflect;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflect;
            values[n] = fr;
        } else {
            let contract: Vec<f64> = if fr < values[n] {
                (0..n).map(|d| centroid[d] + gamma * (reflect[d] - centroid[d])).collect()
            } else {
                (0..n).map(|d| centroid[d] - gamma * (centroid[d] - simplex[n][d])).collect()
            };
            let fc = tr.eval(&contract);
            if fc < values[n].min(fr) {
                simplex[n] = contract;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    let p: Vec<f64> = (0..n)
                        .map(|d| simplex[0][d] + delta * (simplex[i][d] - simplex[0][d]))
                        .collect();
                    values[i] = tr.eval(&p);
                    simplex[i] = p;
                    if tr.exhausted() {
                        return;
                    }
                }
            }
        }
    }
}

fn spsa(tr: &mut Tracker, x0: &[f64], rng: &mut ChaCha8Rng, max_evals: usize) {
    let n = x0.len();
    let iters = max_evals / 2;
    let a0 = 0.15;
    let c0 = 0.1;
    let stability = 1.0 + iters as f64 / 10.0;
    let mut x = x0.to_vec();
    for k in 0..iters {
        if tr.exhausted() {
            return;
        }
        let ak = a0 / (k as f64 + stability).powf(0.602);
        let ck = c0 / (k as f64 + 1.0).powf(0.101);
        let delta: Vec<f64> = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let xp: Vec<f64> = x.iter().zip(&delta).map(|(v, d)| v + ck * d).collect();
        let xm: Vec<f64> = x.iter().zip(&delta).map(|(v, d)| v - ck * d).collect();
        let fp = tr.eval(&xp);
        let fm = tr.eval(&xm);
        let g = (fp - fm) / (2.0 * ck);
        for (v, d) in x.iter_mut().zip(&delta) {
            *v -= ak * g * d;
        }
    }
    tr.eval(&x);
}

/// Cyclic coordinate descent with parabolic steps and shrinking trust
/// radii; refines a near-converged point toward machine precision.
fn coordinate_polish(tr: &mut Tracker, x0: &[f64], tol: f64) {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut f0 = tr.eval(&x);
    let mut h = vec![0.05f64; n];
    loop {
        let mut improved = false;
        for i in 0..n {
            if tr.exhausted() {
                return;
            }
            let mut xp = x.clone();
            xp[i] += h[i];
            let fp = tr.eval(&xp);
            let mut xm = x.clone();
            xm[i] -= h[i];
            let fm = tr.eval(&xm);
            let mut cand = x.clone();
            let mut fcand = f0;
            if fp < fcand {
                cand = xp;
                fcand = fp;
            }
            if fm < fcand {
                cand = xm;
                fcand = fm;
            }
            // quadratic model through the three samples
            let denom = fp + fm - 2.0 * f0;
            if denom > 1e-300 {
                let dx = 0.5 * h[i] * (fm - fp) / denom;
                if dx.abs() < 2.0 * h[i] {
                    let mut xq = x.clone();
                    xq[i] += dx;
                    let fq = tr.eval(&xq);
                    if fq < fcand {
                        cand = xq;
                        fcand = fq;
                    }
                }
            }
            if fcand < f0 - tol * (1.0 + f0.abs()) * 1e-4 {
                x = cand;
                f0 = fcand;
                improved = true;
                h[i] = (h[i] * 2.0).min(0.1);
            } else {
                if fcand < f0 {
                    x = cand;
                    f0 = fcand;
                }
                h[i] *= 0.25;
            }
        }
        if !improved && h.iter().all(|&v| v < 1e-9) {
            return;
        }
    }
}

/// Minimize `f` from `x0` under the given configuration.
///
/// Runs the configured optimizer from `x0` and from up to three seeded
/// perturbed restarts, then (optionally) polishes the overall best point.
/// The whole procedure is deterministic for a fixed config and `x0`.
pub fn minimize(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], cfg: &OptimizerConfig) -> MinimizeResult {
    let n = x0.len();
    let mut tr = Tracker::new(f, cfg.max_evals, n);
    let restarts = cfg.restarts.min(3);
    let polish_share = if cfg.polish { cfg.max_evals / 3 } else { 0 };
    let main_budget = (cfg.max_evals - polish_share) / (restarts + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for run in 0..=restarts {
        if tr.exhausted() {
            break;
        }
        let init: Vec<f64> = if run == 0 {
            x0.to_vec()
        } else {
            x0.iter()
                .map(|v| v + cfg.init_spread * (2.0 * rng.gen::<f64>() - 1.0))
                .collect()
        };
        match cfg.method {
            Method::NelderMead => nelder_mead(&mut tr, &init, 0.25, cfg.tolerance, main_budget),
            Method::Spsa => spsa(&mut tr, &init, &mut rng, main_budget),
        }
    }
    // refinement: alternate coordinate polish with small-step simplex
    // restarts until the budget runs out or progress stops
    if cfg.polish {
        let mut prev_best = tr.best_value;
        while !tr.exhausted() {
            let best = tr.best_params.clone();
            coordinate_polish(&mut tr, &best, cfg.tolerance);
            if tr.exhausted() {
                break;
            }
            let best = tr.best_params.clone();
            nelder_mead(&mut tr, &best, 1e-3, cfg.tolerance, main_budget);
            if prev_best - tr.best_value < cfg.tolerance * (1.0 + prev_best.abs()) {
                break;
            }
            prev_best = tr.best_value;
        }
    }
    MinimizeResult {
        params: tr.best_params,
        value: tr.best_value,
        trace: RunTrace { evaluations: tr.evals, best: tr.trace },
    }
}

/// Decorated custom state for the toric ansatz: |0,0⟩_L converted to its
/// graph form with every graph edge decorated (four slots per edge).
pub fn toric_custom_state(lattice: &ToricLattice) -> CustomState {
    let tab = lattice.logical_state(0, 0);
    let mut custom = CustomState::from_tableau(&tab);
    let edges: Vec<(usize, usize)> = custom.edges.iter().copied().collect();
    for (m, n) in edges {
        custom.decorate_edge(m, n).expect("edge exists and endpoints are outputs");
    }
    custom
}

/// One optimized point of the perturbed-toric-code study.
#[derive(Debug, Clone)]
pub struct ToricRunResult {
    pub lambdas: Vec<f64>,
    pub energy: f64,
    pub params: Vec<f64>,
    pub trace: RunTrace,
    pub exact_energy: f64,
    pub degeneracy: usize,
    /// 1 − overlap with the exact ground eigenspace.
    pub infidelity: f64,
    /// Energy of the undecorated ansatz state |0,0⟩_L.
    pub ansatz_energy: f64,
    /// Energy of the fully polarized state |1⟩^⊗n.
    pub polarized_energy: f64,
    pub state: StateVector,
}

impl ToricRunResult {
    /// |E − E_exact| / |E_exact|.
    pub fn relative_error(&self) -> f64 {
        (self.energy - self.exact_energy).abs() / self.exact_energy.abs().max(1e-12)
    }
}

fn polarized_energy(h: &Hamiltonian) -> f64 {
    let n = h.num_qubits;
    let dim = 1usize << n;
    let mut amps = vec![crate::stabilizer::C64::new(0.0, 0.0); dim];
    amps[dim - 1] = crate::stabilizer::C64::new(1.0, 0.0);
    let sv = StateVector { ids: (0..n).collect(), amps };
    expectation(&sv, h).expect("matching register")
}

/// Optimize the decorated toric ansatz against H_0 + Σ λ_n Z_n.
pub fn run_toric(
    lattice: &ToricLattice,
    lambdas: &[f64],
    cfg: &OptimizerConfig,
    warm_start: Option<&[f64]>,
) -> ToricRunResult {
    let custom = toric_custom_state(lattice);
    let mut h = toric_hamiltonian(lattice);
    h.extend(&perturbation(lambdas));
    let cost = |theta: &[f64]| -> f64 {
        let report = simulate_pattern(&custom, theta, SimOutcomes::AllZero).expect("valid pattern");
        expectation(&report.output_state, &h).expect("matching register")
    };
    let x0 = warm_start.map(|w| w.to_vec()).unwrap_or_else(|| vec![0.0; custom.num_slots]);
    let result = minimize(&cost, &x0, cfg);
    let state = simulate_pattern(&custom, &result.params, SimOutcomes::AllZero)
        .expect("valid pattern")
        .output_state;
    let exact = exact_ground(&h).expect("small system");
    let ansatz_energy = cost(&vec![0.0; custom.num_slots]);
    ToricRunResult {
        lambdas: lambdas.to_vec(),
        energy: result.value,
        params: result.params,
        trace: result.trace,
        exact_energy: exact.energy,
        degeneracy: exact.degeneracy,
        infidelity: 1.0 - exact.space_fidelity(&state),
        ansatz_energy,
        polarized_energy: polarized_energy(&h),
        state,
    }
}

/// Sweep a list of λ vectors with warm starts chained in both directions,
/// keeping the better result per point.
pub fn run_toric_sweep(
    lattice: &ToricLattice,
    lambda_sets: &[Vec<f64>],
    cfg: &OptimizerConfig,
) -> Vec<ToricRunResult> {
    let mut forward: Vec<ToricRunResult> = Vec::with_capacity(lambda_sets.len());
    for ls in lambda_sets {
        let warm = forward.last().map(|r| r.params.as_slice());
        forward.push(run_toric(lattice, ls, cfg, warm));
    }
    let mut backward: Vec<Option<ToricRunResult>> = vec![None; lambda_sets.len()];
    let mut warm: Option<Vec<f64>> = None;
    for (i, ls) in lambda_sets.iter().enumerate().rev() {
        let r = run_toric(lattice, ls, cfg, warm.as_deref());
        warm = Some(r.params.clone());
        backward[i] = Some(r);
    }
    forward
        .into_iter()
        .zip(backward)
        .map(|(f, b)| {
            let b = b.expect("filled in reverse pass");
            if b.energy < f.energy {
                b
            } else {
                f
            }
        })
        .collect()
}

/// One optimized point of the Schwinger translation-scheme study.
#[derive(Debug, Clone)]
pub struct SchwingerRunResult {
    pub mu: f64,
    pub k_layers: usize,
    pub energy: f64,
    pub params: Vec<f64>,
    pub trace: RunTrace,
    pub exact_energy: f64,
    pub order_parameter: f64,
    pub exact_order_parameter: f64,
    pub infidelity: f64,
    pub state: StateVector,
}

impl SchwingerRunResult {
    pub fn relative_error(&self) -> f64 {
        (self.energy - self.exact_energy).abs() / self.exact_energy.abs().max(1e-12)
    }
}

/// Optimize the K-layer compiled pattern for the S-site Schwinger model.
pub fn run_schwinger(
    s_sites: usize,
    k_layers: usize,
    params: &SchwingerParams,
    cfg: &OptimizerConfig,
    warm_start: Option<&[f64]>,
) -> SchwingerRunResult {
    let pattern = compile_layers(s_sites, k_layers).expect("valid width");
    let custom = standardize(&pattern).expect("compiled patterns standardize");
    let h = schwinger_hamiltonian(s_sites, params).expect("valid width");
    let cost = |theta: &[f64]| -> f64 {
        let report = simulate_pattern(&custom, theta, SimOutcomes::AllZero).expect("valid pattern");
        expectation(&report.output_state, &h).expect("matching register")
    };
    let x0 = warm_start.map(|w| w.to_vec()).unwrap_or_else(|| vec![0.0; custom.num_slots]);
    let result = minimize(&cost, &x0, cfg);
    let state = simulate_pattern(&custom, &result.params, SimOutcomes::AllZero)
        .expect("valid pattern")
        .output_state;
    let exact = exact_ground(&h).expect("small system");
    SchwingerRunResult {
        mu: params.mu,
        k_layers,
        energy: result.value,
        params: result.params,
        trace: result.trace,
        exact_energy: exact.energy,
        order_parameter: order_parameter(&state),
        exact_order_parameter: order_parameter(&exact.state),
        infidelity: 1.0 - exact.space_fidelity(&state),
        state,
    }
}

/// Sweep fermion masses for fixed K with warm starts, optionally spreading
/// independent grid points over threads.
pub fn run_schwinger_sweep(
    s_sites: usize,
    k_layers: usize,
    masses: &[f64],
    base: &SchwingerParams,
    cfg: &OptimizerConfig,
    strategy: Strategy,
    warm_start_chain: bool,
) -> Vec<SchwingerRunResult> {
    if warm_start_chain {
        let mut out: Vec<SchwingerRunResult> = Vec::with_capacity(masses.len());
        for &mu in masses {
            let p = SchwingerParams { mu, ..*base };
            let warm = out.last().map(|r| r.params.as_slice());
            out.push(run_schwinger(s_sites, k_layers, &p, cfg, warm));
        }
        out
    } else {
        exec::map_indexed(strategy, masses.len(), |i| {
            let p = SchwingerParams { mu: masses[i], ..*base };
            run_schwinger(s_sites, k_layers, &p, cfg, None)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(i, v)| (i as f64 + 1.0) * (v - 0.3 * (i as f64 + 1.0)).powi(2))
            .sum()
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let cfg = OptimizerConfig { max_evals: 3000, ..Default::default() };
        let r = minimize(&quadratic, &[0.0; 4], &cfg);
        assert!(r.value < 1e-14, "value {}", r.value);
        for (i, v) in r.params.iter().enumerate() {
            assert!((v - 0.3 * (i as f64 + 1.0)).abs() < 1e-6, "param {i} = {v}");
        }
    }

    #[test]
    fn spsa_reduces_quadratic() {
        let cfg = OptimizerConfig {
            method: Method::Spsa,
            max_evals: 4000,
            polish: true,
            ..Default::default()
        };
        let r = minimize(&quadratic, &[1.0; 4], &cfg);
        assert!(r.value < 1e-10, "value {}", r.value);
    }

    #[test]
    fn trace_is_non_increasing_and_counts_evals() {
        let cfg = OptimizerConfig { max_evals: 500, ..Default::default() };
        let r = minimize(&quadratic, &[2.0; 3], &cfg);
        assert_eq!(r.trace.evaluations, r.trace.best.len());
        assert!(r.trace.evaluations <= 500);
        for w in r.trace.best.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn minimization_is_bit_reproducible() {
        for method in [Method::NelderMead, Method::Spsa] {
            let cfg = OptimizerConfig { method, max_evals: 800, seed: 42, ..Default::default() };
            let r1 = minimize(&quadratic, &[1.5; 5], &cfg);
            let r2 = minimize(&quadratic, &[1.5; 5], &cfg);
            assert_eq!(r1.value.to_bits(), r2.value.to_bits());
            for (a, b) in r1.params.iter().zip(&r2.params) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
            assert_eq!(r1.trace.best.len(), r2.trace.best.len());
        }
    }

    #[test]
    fn toric_custom_state_has_expected_size() {
        let custom = toric_custom_state(&ToricLattice::new(2, 2));
        assert_eq!(custom.num_nodes, 8 + 4 * 9);
        assert_eq!(custom.num_slots, 36);
        assert_eq!(custom.plan.len(), 36);
    }

    #[test]
    fn toric_zero_angles_reproduce_ansatz_energy() {
        let lattice = ToricLattice::new(2, 2);
        let custom = toric_custom_state(&lattice);
        let h = toric_hamiltonian(&lattice);
        let state = simulate_pattern(&custom, &vec![0.0; 36], SimOutcomes::AllZero)
            .unwrap()
            .output_state;
        let e = expectation(&state, &h).unwrap();
        assert!((e + 8.0).abs() < 1e-10, "energy {e}");
    }

    #[test]
    fn toric_single_qubit_perturbation_reaches_exact_ground() {
        let lattice = ToricLattice::new(2, 2);
        let mut lambdas = vec![0.0; 8];
        lambdas[0] = 0.7;
        let cfg = OptimizerConfig { max_evals: 30000, restarts: 1, ..Default::default() };
        let r = run_toric(&lattice, &lambdas, &cfg, None);
        assert!(
            r.relative_error() < 1e-8,
            "relative error {} (energy {} vs {})",
            r.relative_error(),
            r.energy,
            r.exact_energy
        );
    }

    #[test]
    fn schwinger_k1_easy_mass_converges() {
        // the K=1 family bottoms out near −4.895 at this mass; check the
        // optimizer reaches that plateau and tracks the order parameter
        let cfg = OptimizerConfig { max_evals: 5000, restarts: 1, ..Default::default() };
        let r = run_schwinger(4, 1, &SchwingerParams::with_mass(1.2), &cfg, None);
        assert!(
            r.energy < -4.89,
            "energy {} did not reach the K=1 plateau (exact {})",
            r.energy,
            r.exact_energy
        );
        assert!((r.order_parameter - r.exact_order_parameter).abs() < 0.05);
    }
}
