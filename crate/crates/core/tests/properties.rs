//! Invariants of the channels, the refocusing synthesis and the compiler.

mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn channels_preserve_trace_and_positivity(x in state_and_relaxation(3)) {
        check_trace_preservation(x)?;
    }

    #[test]
    fn kraus_sets_are_complete(g in 0.0..1.0f64, p in 0.0..1.0f64, l in 0.0..1.0f64) {
        check_kraus_completeness((g, p, l))?;
    }

    #[test]
    fn amplitude_and_phase_damping_commute(x in state_and_relaxation(3)) {
        check_gad_pd_commute(x)?;
    }

    #[test]
    fn spin_order_does_not_matter(x in state_and_relaxation(3), seed in any::<u64>()) {
        check_order_invariance(x, seed)?;
    }

    #[test]
    fn refocusing_balances_pairs(sys in system_strategy(7), a in 0..7usize, b in 0..7usize, s in any::<bool>()) {
        check_refocus_balance(sys, (a, b, s))?;
    }

    #[test]
    fn passes_preserve_the_unitary(x in circuit_strategy(3)) {
        check_pass_pipeline(x)?;
    }

    #[test]
    fn grover_amplitude_matches_state_vector(n in 1..=4usize, k in 0..=40usize) {
        check_grover((n, k))?;
    }

    #[test]
    fn permutations_compile(x in permutation_strategy()) {
        check_permutation(x)?;
    }

    #[test]
    fn qft_matches_dft(psi in qft_input_strategy()) {
        check_qft(psi)?;
    }
}
