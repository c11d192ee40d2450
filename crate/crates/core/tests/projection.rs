//! Filter circuits against the Trotter-free prediction.

use nucsim_core::engine::{run, RunOptions};
use nucsim_core::hamiltonian::{ground_state, shift_rescale, PauliHamiltonian, PauliString};
use nucsim_core::linalg::normalized;
use nucsim_core::projection::{build_filter_circuit, default_schedule, predict_success, TrialState};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Below this the first-order error term can cross zero between doublings.
const RESOLVED_ERROR: f64 = 1e-4;

/// Random 3-qubit Hamiltonian shifted and scaled to a spectrum in `[0, 1]`,
/// with a random trial vector.
fn unit_width_case(seed: u64) -> (PauliHamiltonian, TrialState) {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = 3;
    let letters = ['I', 'X', 'Y', 'Z'];
    let terms: Vec<(f64, PauliString)> = (0..6)
        .map(|_| {
            let s: String = (0..n).map(|_| letters[rng.gen_range(0..4)]).collect();
            (rng.gen_range(-1.0..1.0), PauliString::parse(&s).unwrap())
        })
        .collect();
    let h = PauliHamiltonian::from_real_terms(n, &terms).unwrap();
    let g = ground_state(&h).unwrap();
    let width = g.spectrum.last().unwrap() - g.energy;
    let shifted = shift_rescale(&h, g.energy, width).unwrap();
    let v: Vec<Complex64> =
        (0..1 << n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    (shifted, TrialState::from_vector(normalized(&v)).unwrap())
}

#[test]
fn trotterized_filter_converges_to_prediction() {
    let schedule = default_schedule(1.0, 3).unwrap();
    for seed in 0..20 {
        let (h, trial) = unit_width_case(seed);
        let want = predict_success(&h, &trial, &schedule).unwrap();
        let mut energy_errs = Vec::new();
        let mut success_errs = Vec::new();
        for r in [1, 2, 4, 8, 16, 32, 64] {
            let c = build_filter_circuit(&h, &schedule, r, &trial).unwrap();
            let opts = RunOptions {
                shots: 1,
                hamiltonian: Some(h.clone()),
                initial_state: trial.initial_state(3).unwrap(),
                ..RunOptions::default()
            };
            let report = run(&c, &opts).unwrap();
            energy_errs.push((report.energy.unwrap() - want.energy).abs());
            success_errs.push((report.overall_success - want.success).abs());
        }
        // Asymptotic regime: r ≥ 8.
        for w in energy_errs[3..].windows(2) {
            assert!(w[1] < w[0] || w[0] <= RESOLVED_ERROR, "seed {seed}: energy errors {energy_errs:?}");
        }
        assert!(energy_errs[6] <= 1e-3, "seed {seed}: energy error {}", energy_errs[6]);
        assert!(success_errs[6] <= 1e-3, "seed {seed}: success error {}", success_errs[6]);
    }
}

#[test]
fn longer_schedules_lower_the_energy() {
    // Once 2^N exceeds the spectral width over the gap scale, every added
    // step multiplies the weights by a factor decreasing in energy.
    for seed in 0..20 {
        let (h, trial) = unit_width_case(seed);
        let energies: Vec<f64> =
            (1..=8).map(|n| predict_success(&h, &trial, &default_schedule(1.0, n).unwrap()).unwrap().energy).collect();
        for w in energies.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "seed {seed}: energies {energies:?}");
        }
    }
}
