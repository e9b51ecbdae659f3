//! Parallel vs sequential execution strategy on the two hot paths:
//! Pauli-sum expectation values and batched pattern evaluations.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mbvqe::exec::Strategy;
use mbvqe::models::{perturbation, toric_hamiltonian, Hamiltonian, ToricLattice};
use mbvqe::sim::{expectation_with, simulate_pattern, SimOutcomes, StateVector};
use mbvqe::stabilizer::C64;
use mbvqe::vqe::toric_custom_state;

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> StateVector {
    let dim = 1usize << n;
    let mut amps: Vec<C64> =
        (0..dim).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    StateVector { ids: (0..n).collect(), amps }
}

fn strategies() -> Vec<(&'static str, Strategy)> {
    let mut v = vec![("sequential", Strategy::Sequential)];
    if cfg!(feature = "parallel") {
        v.push(("parallel", Strategy::Parallel));
    }
    v
}

fn bench_expectation(c: &mut Criterion) {
    let lattice = ToricLattice::new(2, 2);
    let mut h = toric_hamiltonian(&lattice);
    h.extend(&perturbation(&vec![0.7; lattice.num_qubits()]));
    // Pad with random two-body words so the term loop dominates.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut padded = Hamiltonian::new(lattice.num_qubits());
    for (c0, w) in &h.terms {
        padded.add(*c0, w.clone());
    }
    for _ in 0..200 {
        let a = rng.gen_range(0..lattice.num_qubits());
        let b = (a + 1 + rng.gen_range(0..lattice.num_qubits() - 1)) % lattice.num_qubits();
        let word: String = (0..lattice.num_qubits())
            .map(|q| if q == a { 'Z' } else if q == b { 'X' } else { 'I' })
            .collect();
        padded.add_word(rng.gen_range(-1.0..1.0), &word);
    }
    let state = random_state(&mut rng, lattice.num_qubits());

    let mut group = c.benchmark_group("expectation");
    for (name, strategy) in strategies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &strategy, |b, &s| {
            b.iter(|| expectation_with(&state, &padded, s).unwrap())
        });
    }
    group.finish();
}

fn bench_pattern_batch(c: &mut Criterion) {
    let custom = toric_custom_state(&ToricLattice::new(2, 2));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let thetas: Vec<Vec<f64>> = (0..16)
        .map(|_| (0..custom.num_slots).map(|_| rng.gen_range(-3.0..3.0)).collect())
        .collect();

    let mut group = c.benchmark_group("pattern_batch");
    group.sample_size(10);
    for (name, strategy) in strategies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &strategy, |b, &s| {
            b.iter(|| {
                mbvqe::exec::map_indexed(s, thetas.len(), |i| {
                    simulate_pattern(&custom, &thetas[i], SimOutcomes::AllZero)
                        .unwrap()
                        .branch_probability
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_expectation, bench_pattern_batch);
criterion_main!(benches);
